fn main() {
    std::process::exit(mfscope::cli::run(std::env::args_os()));
}
