use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AblateArgs, Cli, Command, EvalArgs, MethodArgs, MineArgs, ReduceArgs, ReportArgs, SimulateArgs};
use crate::dataset::{base_dir, read_jsonl, write_atomic, write_jsonl, CandidateRecord, HtmlSource, ObservationRecord};
use crate::dom::DomDocument;
use crate::eval::{
    ablate_element_type, coverage, load_instances, reduction_ratio, subsample_rank_correlation, AblationTarget,
    EvalReport, LoadedInstance,
};
use crate::mfs::{
    ddmin, expand_candidates, run_table4, simulation_oracle, CandidateSet, DdminOutcome, ExpandConfig, FpsPartitioner,
    MfsError, MfsInstance, MfsSpec, Oracle, Partitioner, ProxyOracle, RandomPartitioner, Source, TreeSpec,
};
use crate::provider::{ProviderConfig, Providers};
use crate::reduce::{build_reducer, MethodSpec, Reducer, ReductionRequest};

type CmdResult = Result<usize, String>;

const MAX_JOBS: usize = 32;

pub(super) fn dispatch(cli: Cli) -> CmdResult {
    let jobs = cli
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .clamp(1, MAX_JOBS);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| format!("thread pool: {e}"))?;
    let provider = cli.provider;
    pool.install(move || match cli.command {
        Command::Reduce(a) => cmd_reduce(&a, &providers(&provider)?),
        Command::Mine(a) => cmd_mine(&a, &providers(&provider)?),
        Command::Eval(a) => cmd_eval(&a, &providers(&provider)?),
        Command::Ablate(a) => cmd_ablate(&a, &providers(&provider)?),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Report(a) => cmd_report(&a),
    })
}

fn providers(name: &str) -> Result<Providers, String> {
    let cfg = ProviderConfig::from_name(name).map_err(|e| e.to_string())?;
    Providers::from_config(&cfg).map_err(|e| e.to_string())
}

fn require_file(path: &Path) -> Result<(), String> {
    if path.is_file() {
        Ok(())
    } else {
        Err(format!("{}: no such file", path.display()))
    }
}

fn method_specs(a: &MethodArgs) -> Result<Vec<MethodSpec>, String> {
    a.methods
        .iter()
        .map(|m| {
            m.parse::<MethodSpec>()
                .map(|s| s.with_defaults(a.k, a.seed, a.program.as_deref()))
                .map_err(|e| e.to_string())
        })
        .collect()
}

fn reducers(specs: &[MethodSpec], p: &Providers) -> Result<Vec<Box<dyn Reducer>>, String> {
    specs
        .iter()
        .map(|s| build_reducer(s, p).map_err(|e| format!("method `{s}`: {e}")))
        .collect()
}

/// One line of `reduce` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedRecord {
    pub instance_id: String,
    pub method_id: String,
    pub reduced_html: Option<String>,
    pub rr: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

fn cmd_reduce(a: &ReduceArgs, p: &Providers) -> CmdResult {
    require_file(&a.input)?;
    let records: Vec<ObservationRecord> = read_jsonl(&a.input).map_err(|e| e.to_string())?;
    let reducers = reducers(&method_specs(&a.method)?, p)?;
    let dir = base_dir(&a.input);
    let docs: Vec<Result<DomDocument, String>> = records
        .par_iter()
        .map(|r| {
            let html = r.html.load(&dir).map_err(|e| e.to_string())?;
            DomDocument::parse(&html).map_err(|e| e.to_string())
        })
        .collect();
    let mut out = Vec::with_capacity(records.len() * reducers.len());
    for reducer in &reducers {
        let rows: Vec<ReducedRecord> = records
            .par_iter()
            .zip(&docs)
            .map(|(rec, doc)| {
                let mut row = ReducedRecord {
                    instance_id: rec.instance_id.clone(),
                    method_id: reducer.id().to_string(),
                    reduced_html: None,
                    rr: 1.0,
                    wall_time: None,
                    error: None,
                };
                let doc = match doc {
                    Ok(d) => d,
                    Err(e) => {
                        row.error = Some(e.clone());
                        return row;
                    }
                };
                let mut req = ReductionRequest::new(doc).goal(&rec.goal).history(&rec.action_history);
                req.screenshot_ref = rec.screenshot_ref.as_deref();
                let start = Instant::now();
                let res = reducer.reduce(&req);
                let secs = start.elapsed().as_secs_f64();
                row.wall_time = (!a.no_timings).then_some(secs);
                match res {
                    Ok(reduced) => {
                        row.rr = reduction_ratio(&reduced, doc);
                        row.reduced_html = Some(reduced.serialize());
                    }
                    Err(e) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect();
        out.extend(rows);
    }
    let failed = out.iter().filter(|r| r.error.is_some()).count();
    for r in out.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "{} [{}]: {}",
            r.instance_id,
            r.method_id,
            r.error.as_deref().unwrap_or_default()
        );
    }
    write_jsonl(&a.out, &out).map_err(|e| e.to_string())?;
    Ok(failed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct MineStat {
    instance_id: String,
    status: &'static str,
    candidates: usize,
    oracle_calls: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    mfs_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reason: Option<String>,
}

/// Sidecar path for mining statistics: `x.jsonl` becomes `x.stats.jsonl`.
pub fn stats_path(out: &Path) -> PathBuf {
    out.with_extension("stats.jsonl")
}

fn mine_one(
    i: usize,
    rec: &CandidateRecord,
    a: &MineArgs,
    dir: &Path,
    p: &Providers,
) -> Result<(MfsInstance, DdminOutcome, usize), (String, usize)> {
    let fail = |e: String| (e, 0);
    let html = rec.html.load(dir).map_err(|e| fail(e.to_string()))?;
    let doc = DomDocument::parse(&html).map_err(|e| fail(e.to_string()))?;
    let mut cands = CandidateSet::new(
        rec.instance_id.clone(),
        doc,
        rec.refs.iter().cloned(),
        Source::SelfReport,
    );
    if cands.len() < rec.refs.len() {
        eprintln!(
            "{}: {} self-reported unit(s) not present in the observation were dropped",
            rec.instance_id,
            rec.refs.len() - cands.len()
        );
    }
    if a.expand {
        cands = expand_candidates(
            &cands,
            &rec.goal,
            &rec.action_history,
            rec.action_target.as_deref(),
            Some(p.embedder.as_ref()),
            &ExpandConfig::default(),
        )
        .map_err(|e| fail(e.to_string()))?;
    }
    let n = cands.len();
    let oracle: Box<dyn Oracle + '_> = match a.oracle.as_str() {
        "simulation" => {
            let truth = rec
                .ground_truth
                .clone()
                .filter(|g| !g.is_empty())
                .ok_or_else(|| fail("simulation oracle needs a non-empty `ground_truth`".into()))?;
            Box::new(simulation_oracle(truth))
        }
        _ => {
            let wrong = rec
                .erroneous_action
                .clone()
                .ok_or_else(|| fail("proxy oracle needs `erroneous_action`".into()))?;
            Box::new(
                ProxyOracle::new(&cands.doc, p.completion.as_ref(), wrong)
                    .with_context(rec.goal.clone(), rec.action_history.clone()),
            )
        }
    };
    let mut part: Box<dyn Partitioner + '_> = match a.partitioner.as_str() {
        "fps" => Box::new(FpsPartitioner { doc: &cands.doc }),
        _ => Box::new(RandomPartitioner::new(a.seed.wrapping_add(i as u64))),
    };
    let outcome = match ddmin(&cands.refs, oracle.as_ref(), part.as_mut()) {
        Ok(o) => o,
        Err(MfsError::PreconditionViolated) => {
            return Err((
                "full candidate set does not reproduce the failure".into(),
                oracle.call_count(),
            ))
        }
        Err(e) => return Err((e.to_string(), oracle.call_count())),
    };
    if outcome.mfs.is_empty() {
        return Err(("minimization produced an empty set".into(), outcome.oracle_calls));
    }
    let inst = MfsInstance {
        instance_id: rec.instance_id.clone(),
        benchmark: rec.benchmark.clone(),
        source_model: rec.source_model.clone(),
        goal: rec.goal.clone(),
        action_history: rec.action_history.clone(),
        html: HtmlSource::inline(html),
        mfs: outcome.mfs.clone(),
        step_index: rec.step_index,
    };
    Ok((inst, outcome, n))
}

fn cmd_mine(a: &MineArgs, p: &Providers) -> CmdResult {
    require_file(&a.input)?;
    let records: Vec<CandidateRecord> = read_jsonl(&a.input).map_err(|e| e.to_string())?;
    let dir = base_dir(&a.input);
    let results: Vec<_> = records
        .par_iter()
        .enumerate()
        .map(|(i, rec)| mine_one(i, rec, a, &dir, p))
        .collect();
    let mut mined = Vec::new();
    let mut stats = Vec::new();
    for (rec, res) in records.iter().zip(results) {
        match res {
            Ok((inst, outcome, n)) => {
                stats.push(MineStat {
                    instance_id: rec.instance_id.clone(),
                    status: "ok",
                    candidates: n,
                    oracle_calls: outcome.oracle_calls,
                    mfs_size: Some(outcome.mfs.len()),
                    reason: None,
                });
                mined.push(inst);
            }
            Err((reason, calls)) => {
                eprintln!("{}: skipped: {reason}", rec.instance_id);
                stats.push(MineStat {
                    instance_id: rec.instance_id.clone(),
                    status: "skipped",
                    candidates: rec.refs.len(),
                    oracle_calls: calls,
                    mfs_size: None,
                    reason: Some(reason),
                });
            }
        }
    }
    write_jsonl(&a.out, &mined).map_err(|e| e.to_string())?;
    write_jsonl(&stats_path(&a.out), &stats).map_err(|e| e.to_string())?;
    Ok(records.len() - mined.len())
}

fn load_dataset(path: &Path) -> Result<Vec<LoadedInstance>, String> {
    require_file(path)?;
    let records: Vec<MfsInstance> = read_jsonl(path).map_err(|e| e.to_string())?;
    if records.is_empty() {
        return Err(format!("{}: MFS dataset is empty", path.display()));
    }
    let data = load_instances(records, path);
    for item in &data {
        if item.instance.mfs.is_empty() {
            return Err(format!(
                "{}: instance `{}` has an empty mfs",
                path.display(),
                item.instance.instance_id
            ));
        }
        if let Ok(doc) = &item.doc {
            item.instance
                .validate(doc)
                .map_err(|e| format!("{}: {e}", path.display()))?;
        }
    }
    Ok(data)
}

fn load_scores(path: &Path) -> Result<BTreeMap<String, f64>, String> {
    require_file(path)?;
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text)
        .map_err(|e| format!("{}: expected an object of method id to number: {e}", path.display()))
}

fn csv_path(out: &Path) -> PathBuf {
    out.with_extension("csv")
}

fn summary_table(report: &EvalReport) -> String {
    let mut t = format!(
        "{:<32} {:>9} {:>8} {:>10} {:>8}\n",
        "method", "coverage", "rr", "time_s", "failed"
    );
    for s in &report.summaries {
        let _ = writeln!(
            t,
            "{:<32} {:>9.4} {:>8.4} {:>10.6} {:>8}",
            s.method_id, s.coverage, s.mean_rr, s.mean_wall_time, s.failures
        );
    }
    t
}

fn cmd_eval(a: &EvalArgs, p: &Providers) -> CmdResult {
    let specs = method_specs(&a.method)?;
    let reducers = reducers(&specs, p)?;
    let scores = a.scores.as_deref().map(load_scores).transpose()?;
    let data = load_dataset(&a.mfs)?;
    let mut results = Vec::with_capacity(reducers.len());
    for r in &reducers {
        results.push(coverage(r.as_ref(), &data).map_err(|e| e.to_string())?);
    }
    for res in &results {
        for inst in res.per_instance.iter().filter(|i| i.error.is_some()) {
            eprintln!(
                "{} [{}]: {}",
                inst.instance_id,
                res.method_id,
                inst.error.as_deref().unwrap_or_default()
            );
        }
    }
    let failed: usize = results.iter().map(|r| r.failures()).sum();
    let mut report = EvalReport::build(results, scores.as_ref());
    if let (Some(n), Some(s)) = (a.subsample, scores.as_ref()) {
        match subsample_rank_correlation(&report.methods, s, n, a.trials, a.method.seed.unwrap_or(0)) {
            Ok(st) => report.subsample = Some(st),
            Err(e) => report.warnings.push(format!("subsampling omitted: {e}")),
        }
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    write_atomic(&a.out, report.to_jsonl().as_bytes()).map_err(|e| e.to_string())?;
    write_atomic(&csv_path(&a.out), report.to_csv().as_bytes()).map_err(|e| e.to_string())?;
    print!("{}", summary_table(&report));
    if let Some(c) = &report.correlation {
        println!(
            "correlation over {} methods: {}",
            c.n_points,
            serde_json::to_string(c).expect("serializes")
        );
    }
    Ok(failed)
}

#[derive(Serialize)]
struct AblationRow<'a> {
    method_id: &'a str,
    target: String,
    drop: f64,
}

fn cmd_ablate(a: &AblateArgs, p: &Providers) -> CmdResult {
    let targets: Vec<AblationTarget> = a
        .targets
        .iter()
        .map(|t| t.parse().map_err(|e: crate::eval::EvalError| e.to_string()))
        .collect::<Result<_, _>>()?;
    let spec = a
        .method
        .parse::<MethodSpec>()
        .map_err(|e| e.to_string())?
        .with_defaults(a.k, a.seed, a.program.as_deref());
    let reducer = build_reducer(&spec, p).map_err(|e| format!("method `{spec}`: {e}"))?;
    let data = load_dataset(&a.mfs)?;
    let mut rows = Vec::new();
    println!("{:<24} {:>10}", "target", "drop_pts");
    for t in targets {
        let drop = ablate_element_type(reducer.as_ref(), &data, &t).map_err(|e| e.to_string())?;
        println!("{:<24} {:>10.2}", t.to_string(), drop);
        rows.push(AblationRow {
            method_id: reducer.id(),
            target: t.to_string(),
            drop,
        });
    }
    if let Some(out) = &a.out {
        write_jsonl(out, &rows).map_err(|e| e.to_string())?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct SimulationOut<'a> {
    tree: &'a TreeSpec,
    mfs: &'a MfsSpec,
    seed: u64,
    table: crate::mfs::Table4,
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let tree = TreeSpec {
        regions: a.regions,
        fanout: a.fanout,
        depth: a.depth,
        wrap: a.wrap,
    };
    let mfs = MfsSpec {
        size: a.mfs_size,
        groups: a.groups,
        candidates: a.candidates,
    };
    let table = run_table4(&tree, &mfs, a.trials, a.seed).map_err(|e| e.to_string())?;
    println!("mean oracle calls over {} trials", table.trials);
    println!("{:<10} {:>10} {:>10}", "strategy", "setting_a", "setting_b");
    println!("{:<10} {:>10.2} {:>10.2}", "fps", table.a_fps, table.b_fps);
    println!("{:<10} {:>10.2} {:>10.2}", "random", table.a_random, table.b_random);
    if let Some(out) = &a.out {
        let body = serde_json::to_string_pretty(&SimulationOut {
            tree: &tree,
            mfs: &mfs,
            seed: a.seed,
            table,
        })
        .expect("serializes");
        write_atomic(out, format!("{body}\n").as_bytes()).map_err(|e| e.to_string())?;
    }
    Ok(0)
}

fn cmd_report(a: &ReportArgs) -> CmdResult {
    require_file(&a.input)?;
    let lines: Vec<serde_json::Value> = read_jsonl(&a.input).map_err(|e| e.to_string())?;
    let methods: Vec<&serde_json::Value> = lines.iter().filter(|l| l["kind"] == "method").collect();
    if methods.is_empty() {
        return Err(format!("{}: no method entries", a.input.display()));
    }
    let cols = [
        "method_id",
        "coverage",
        "mean_rr",
        "mean_wall_time",
        "failures",
        "external_score",
    ];
    let cell = |v: &serde_json::Value| match v {
        serde_json::Value::Null => String::new(),
        serde_json::Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(cols).map_err(|e| e.to_string())?;
    println!(
        "{:<32} {:>9} {:>8} {:>10} {:>8} {:>8}",
        "method", "coverage", "rr", "time_s", "failed", "score"
    );
    for m in &methods {
        let row: Vec<String> = cols.iter().map(|c| cell(&m[*c])).collect();
        println!(
            "{:<32} {:>9} {:>8} {:>10} {:>8} {:>8}",
            row[0], row[1], row[2], row[3], row[4], row[5]
        );
        w.write_record(&row).map_err(|e| e.to_string())?;
    }
    for l in lines.iter().filter(|l| l["kind"] == "correlation") {
        println!("correlation: {l}");
    }
    if let Some(out) = &a.out {
        let bytes = w.into_inner().map_err(|e| e.to_string())?;
        write_atomic(out, &bytes).map_err(|e| e.to_string())?;
    }
    Ok(0)
}
