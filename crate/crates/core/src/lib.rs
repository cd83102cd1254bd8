pub mod cli;
pub mod dataset;
pub mod dom;
pub mod eval;
pub mod mfs;
pub mod provider;
pub mod reduce;
pub mod text;
