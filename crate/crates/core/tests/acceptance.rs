//! Acceptance suite. Each criterion prints one PASS or FAIL line; the
//! process exits non-zero when any of them fails.

mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::hash::{Hash, Hasher};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use mfscope::dataset::{write_jsonl, CandidateRecord, HtmlSource};
use mfscope::dom::normalize::builtin_rules;
use mfscope::dom::{ablate, normalize, normalized_equal, DomChild, DomDocument, DomElement, ElementRef, RefSet};
use mfscope::eval::{coverage, gepa_objective, kendall_tau_b, partial_correlations, pearson, spearman, LoadedInstance};
use mfscope::mfs::{
    ddmin, run_table4, simulation_oracle, ContiguousPartitioner, FnOracle, FpsPartitioner, MfsInstance, MfsSpec,
    Oracle, Partitioner, RandomPartitioner, TreeSpec, Verdict,
};
use mfscope::provider::Providers;
use mfscope::reduce::{
    build_reducer, element_repr, prune4web_score, rank_bm25, run_gepa_program, tree_prune, GepaProgram, KeywordWeights,
    MethodSpec, ReduceError, Reducer, ReductionRequest, TreePruneConfig,
};
use mfscope::text::{stem, tokenize};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    if took > limit {
        return Err(format!("took {:.2}s, limit {}s", took.as_secs_f64(), limit.as_secs()));
    }
    Ok(())
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("ddmin correctness", ddmin_correctness),
        ("simulation-oracle exactness", simulation_exactness),
        ("partitioning comparison on synthetic trees", partitioning_comparison),
        ("BM25 oracle equivalence", bm25_equivalence),
        ("keyword scorer equivalence", keyword_scorer_equivalence),
        ("tree-prune invariants", tree_prune_invariants),
        ("coverage axioms", coverage_axioms),
        ("statistics oracle equivalence", statistics_equivalence),
        ("GEPA program fidelity", gepa_fidelity),
        ("normalization", normalization),
        ("end-to-end mine and eval", end_to_end),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match res {
            Ok(detail) => println!("PASS {:>2}. {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2}. {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- mining

/// Units over a random 10-element document, plus that document for FPS.
fn unit_pool(rng: &mut ChaCha8Rng) -> (DomDocument, Vec<ElementRef>) {
    let doc = common::random_doc(rng, 10);
    let mut pool = Vec::new();
    for bid in doc.bids() {
        pool.push(ElementRef::tag(bid));
        pool.push(ElementRef::text(bid));
        pool.push(ElementRef::named(bid, "class"));
    }
    (doc, pool)
}

fn partitioner<'a>(which: usize, doc: &'a DomDocument, seed: u64) -> Box<dyn Partitioner + 'a> {
    match which % 3 {
        0 => Box::new(FpsPartitioner { doc }),
        1 => Box::new(RandomPartitioner::new(seed)),
        _ => Box::new(ContiguousPartitioner),
    }
}

fn ddmin_correctness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xdd01);
    let trials = 300;
    let mut max_ratio: f64 = 0.0;
    for t in 0..trials {
        let (doc, pool) = unit_pool(&mut rng);
        let size = rng.gen_range(1..=12);
        let cands: RefSet = pool.choose_multiple(&mut rng, size).cloned().collect();
        let cv: Vec<ElementRef> = cands.iter().cloned().collect();
        let family: Vec<RefSet> = (0..rng.gen_range(1..=3))
            .map(|_| {
                let k = rng.gen_range(1..=size);
                cv.choose_multiple(&mut rng, k).cloned().collect()
            })
            .collect();
        let fails = |s: &RefSet| family.iter().any(|g| g.is_subset(s));
        let oracle = FnOracle::new(|s: &RefSet| if fails(s) { Verdict::Fail } else { Verdict::Pass });
        let out =
            ddmin(&cands, &oracle, partitioner(t, &doc, t as u64).as_mut()).map_err(|e| format!("trial {t}: {e}"))?;
        ensure!(fails(&out.mfs), "trial {t}: output does not fail");
        ensure!(out.mfs.is_subset(&cands), "trial {t}: output is not a subset");
        for r in &out.mfs {
            let mut smaller = out.mfs.clone();
            smaller.remove(r);
            ensure!(!fails(&smaller), "trial {t}: dropping {r} still fails");
        }
        let bound = size * size + 3 * size;
        ensure!(
            out.oracle_calls == oracle.call_count(),
            "trial {t}: call count mismatch"
        );
        ensure!(
            out.oracle_calls <= bound,
            "trial {t}: {} calls > {bound}",
            out.oracle_calls
        );
        max_ratio = max_ratio.max(out.oracle_calls as f64 / bound as f64);
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{trials} oracles, worst calls/bound {max_ratio:.2}"))
}

fn simulation_exactness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xdd02);
    let trials = 600;
    for t in 0..trials {
        let (doc, pool) = unit_pool(&mut rng);
        let size = rng.gen_range(1..=12);
        let cands: Vec<ElementRef> = pool.choose_multiple(&mut rng, size).cloned().collect();
        let m = rng.gen_range(1..=size.min(4));
        let planted: RefSet = cands.choose_multiple(&mut rng, m).cloned().collect();
        let oracle = simulation_oracle(planted.clone());
        let cands: RefSet = cands.into_iter().collect();
        let out =
            ddmin(&cands, &oracle, partitioner(t, &doc, t as u64).as_mut()).map_err(|e| format!("trial {t}: {e}"))?;
        ensure!(
            out.mfs == planted,
            "trial {t}: got {:?}, planted {:?}",
            out.mfs,
            planted
        );
    }
    within(start, Duration::from_secs(10))?;
    Ok(format!("{trials}/{trials} planted sets recovered"))
}

fn partitioning_comparison() -> Check {
    let start = Instant::now();
    let tree = TreeSpec::default();
    let cases = [
        MfsSpec {
            size: 2,
            groups: 2,
            candidates: 12,
        },
        MfsSpec {
            size: 3,
            groups: 2,
            candidates: 12,
        },
        MfsSpec {
            size: 2,
            groups: 3,
            candidates: 18,
        },
        MfsSpec {
            size: 4,
            groups: 2,
            candidates: 24,
        },
    ];
    let mut lines = Vec::new();
    for (i, mfs) in cases.iter().enumerate() {
        let t = run_table4(&tree, mfs, 50, 4000 + i as u64).map_err(|e| e.to_string())?;
        let tag = format!("size {} x{} of {}", mfs.size, mfs.groups, mfs.candidates);
        ensure!(
            t.a_fps <= t.a_random,
            "{tag}: setting A fps {} > random {}",
            t.a_fps,
            t.a_random
        );
        ensure!(
            t.b_fps <= t.b_random,
            "{tag}: setting B fps {} > random {}",
            t.b_fps,
            t.b_random
        );
        lines.push(format!(
            "{tag}: A {:.2}/{:.2} B {:.2}/{:.2}",
            t.a_fps, t.a_random, t.b_fps, t.b_random
        ));
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("fps/random calls, {}", lines.join("; ")))
}

// -------------------------------------------------------------- reducers

fn bm25_direct(corpus: &[Vec<String>], query: &[String]) -> Vec<f64> {
    let (k1, b) = (1.5, 0.75);
    let n = corpus.len() as f64;
    let avgdl = corpus.iter().map(|d| d.len() as f64).sum::<f64>() / n;
    corpus
        .iter()
        .map(|d| {
            let mut s = 0.0;
            for q in query {
                let f = d.iter().filter(|t| *t == q).count() as f64;
                let nq = corpus.iter().filter(|d| d.contains(q)).count() as f64;
                let idf = ((n - nq + 0.5) / (nq + 0.5) + 1.0).ln();
                s += idf * (f * (k1 + 1.0)) / (f + k1 * (1.0 - b + b * d.len() as f64 / avgdl));
            }
            s
        })
        .collect()
}

fn bm25_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb325);
    let corpora = 40;
    for c in 0..corpora {
        let size = rng.gen_range(0..=8);
        let doc = common::random_doc(&mut rng, size);
        let query = common::phrase(&mut rng, 5);
        let bids: Vec<&str> = doc.bids().collect();
        ensure!(bids.len() <= 10, "corpus {c}: {} reps", bids.len());
        let reps: Vec<Vec<String>> = doc.bid_elements().map(|e| tokenize(&element_repr(&e))).collect();
        let want = bm25_direct(&reps, &tokenize(&query));
        let got = rank_bm25(&doc, &query);
        ensure!(got.len() == bids.len(), "corpus {c}: ranking drops elements");
        let pos = |bid: &str| bids.iter().position(|b| *b == bid).expect("known bid");
        for (bid, score) in &got {
            let w = want[pos(bid)];
            ensure!(
                (score - w).abs() <= 1e-9,
                "corpus {c}: {bid} scored {score}, direct {w}"
            );
        }
        for pair in got.windows(2) {
            let (a, b) = (pos(&pair[0].0), pos(&pair[1].0));
            let (sa, sb) = (want[a], want[b]);
            ensure!(sa >= sb - 1e-9, "corpus {c}: {a} ranked above higher-scoring {b}");
            if (sa - sb).abs() <= 1e-9 {
                ensure!(a < b, "corpus {c}: tie between {a} and {b} not in document order");
            }
        }
    }
    Ok(format!("{corpora} corpora match the closed form"))
}

fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

fn sim(a: &str, b: &str) -> f64 {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 1.0;
    }
    1.0 - levenshtein(&a, &b) as f64 / longest as f64
}

fn window_sim(a: &str, b: &str) -> f64 {
    let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return if long.is_empty() { 1.0 } else { 0.0 };
    }
    let s: String = short.iter().collect();
    let mut best: f64 = 0.0;
    for w in long.windows(short.len()) {
        best = best.max(sim(&s, &w.iter().collect::<String>()));
    }
    best
}

/// Straight-line keyword scorer over explicit field values.
fn keyword_score_direct(fields: &[(Option<&str>, f64)], weights: &[(String, f64)]) -> f64 {
    let mut score = 0.0;
    for &(value, beta) in fields {
        let value = match value {
            Some(v) if !v.is_empty() => v,
            _ => continue,
        };
        let t = value.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
        let tokens: Vec<&str> = t.split(' ').filter(|s| !s.is_empty()).collect();
        let stemmed: Vec<String> = tokens.iter().map(|w| stem(w)).collect();
        for (kw, w) in weights {
            let k = kw.to_lowercase().split_whitespace().collect::<Vec<_>>().join(" ");
            let alpha;
            if t == k {
                alpha = 1.0;
            } else if k.contains(' ') && t.contains(&k) {
                alpha = 0.8;
            } else if stemmed.contains(&stem(kw)) {
                alpha = 0.6;
            } else {
                let mut best_token: f64 = 0.0;
                for tok in &tokens {
                    best_token = best_token.max(sim(&k, tok));
                }
                let fs = window_sim(&k, &t).max(best_token);
                if fs >= 0.75 {
                    alpha = 0.4 * fs;
                } else {
                    continue;
                }
            }
            score += w * alpha * beta;
        }
    }
    score
}

fn random_casing(rng: &mut ChaCha8Rng, s: &str) -> String {
    s.chars()
        .map(|c| if rng.gen_bool(0.2) { c.to_ascii_uppercase() } else { c })
        .collect()
}

fn keyword_scorer_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x9a4b);
    let pairs = 200;
    let mut nonzero = 0;
    for p in 0..pairs {
        let pre = common::phrase(&mut rng, 3);
        let pre = random_casing(&mut rng, &pre);
        let post = if rng.gen_bool(0.5) {
            format!("  {}", common::phrase(&mut rng, 2))
        } else {
            String::new()
        };
        let names = ["aria-label", "placeholder", "name", "role", "class", "id"];
        let mut values: Vec<Option<String>> = Vec::new();
        let mut markup = String::from(r#"<div bid="t""#);
        for n in names {
            let v = match rng.gen_range(0..4) {
                0 => None,
                1 => Some(String::new()),
                _ => {
                    let v = common::phrase(&mut rng, 3);
                    Some(random_casing(&mut rng, &v))
                }
            };
            if let Some(v) = &v {
                markup.push_str(&format!(r#" {n}="{v}""#));
            }
            values.push(v);
        }
        markup.push_str(&format!(
            r#">{pre}<span bid="c">{}</span>{post}</div>"#,
            common::phrase(&mut rng, 2)
        ));
        let doc = DomDocument::parse(&markup).map_err(|e| e.to_string())?;
        let el = doc.element_by_bid("t").expect("fixture element");

        let mut weights = KeywordWeights::new();
        let mut listed: Vec<(String, f64)> = Vec::new();
        for _ in 0..rng.gen_range(0..5) {
            let kw = if rng.gen_bool(0.3) {
                common::phrase(&mut rng, 2)
            } else {
                common::phrase(&mut rng, 1)
            };
            let kw = random_casing(&mut rng, &kw);
            if listed.iter().any(|(k, _)| *k == kw) {
                continue;
            }
            let w = if rng.gen_bool(0.5) {
                f64::from(rng.gen_range(1..60))
            } else {
                rng.gen_range(0.1..10.0)
            };
            weights.insert(kw.clone(), w).map_err(|e| e.to_string())?;
            listed.push((kw, w));
        }

        let direct_text = format!("{pre}{post}");
        let betas = [0.8, 0.8, 0.8, 0.8, 0.5, 0.5];
        let mut fields: Vec<(Option<&str>, f64)> = vec![(Some(direct_text.as_str()), 1.0)];
        fields.extend(values.iter().zip(betas).map(|(v, b)| (v.as_deref(), b)));
        let want = keyword_score_direct(&fields, &listed);
        let got = prune4web_score(&el, &weights);
        ensure!(
            got == want,
            "pair {p}: scorer {got} vs direct {want} on {markup} with {listed:?}"
        );
        nonzero += usize::from(got > 0.0);
    }

    let score_of = |html: &str, kws: &[(&str, f64)]| -> Result<f64, String> {
        let doc = DomDocument::parse(html).map_err(|e| e.to_string())?;
        let mut w = KeywordWeights::new();
        for (k, v) in kws {
            w.insert(*k, *v).map_err(|e| e.to_string())?;
        }
        Ok(prune4web_score(&doc.element_by_bid("x").expect("fixture"), &w))
    };
    let a = score_of(r#"<p bid="x">search</p>"#, &[("search", 40.0)])?;
    ensure!(a == 40.0, "exact text example gave {a}");
    let b = score_of(r#"<input bid="x" aria-label="search box">"#, &[("search box", 10.0)])?;
    ensure!(b == 8.0, "aria-label example gave {b}");
    let c = score_of(r#"<p bid="x" class="search">search</p>"#, &[])?;
    ensure!(c == 0.0, "empty weights gave {c}");
    Ok(format!(
        "{pairs} pairs identical ({nonzero} non-zero), hand-traced 40.0 / 8.0 / 0.0 hold"
    ))
}

/// Expected survivors of a prune, computed from the original tree.
fn expected_kept(doc: &DomDocument, selected: &[&str], cfg: TreePruneConfig) -> BTreeSet<String> {
    let mut keep = BTreeSet::new();
    for c in doc.top_level() {
        if let DomChild::Element(e) = c {
            if let Some(b) = e.bid() {
                keep.insert(b.to_string());
            }
        }
    }
    for bid in selected {
        let el = doc.element_by_bid(bid).expect("selected bid exists");
        keep.insert(bid.to_string());
        for a in el.ancestors() {
            keep.insert(a.bid().expect("all generated elements carry bids").to_string());
        }
        let mut frontier = vec![el];
        for _ in 0..cfg.max_descendant_depth {
            let mut next = Vec::new();
            for f in &frontier {
                for c in f.element_children().take(cfg.max_children_per_node) {
                    keep.insert(c.bid().expect("bid").to_string());
                    next.push(c);
                }
            }
            frontier = next;
        }
        if cfg.max_sibling > 0 {
            if let Some(parent) = el.parent() {
                let sibs: Vec<DomElement<'_>> = parent.element_children().collect();
                let at = sibs
                    .iter()
                    .position(|s| s.bid() == Some(*bid))
                    .expect("child of parent");
                let lo = at.saturating_sub(cfg.max_sibling);
                let hi = (at + cfg.max_sibling).min(sibs.len() - 1);
                for s in &sibs[lo..=hi] {
                    keep.insert(s.bid().expect("bid").to_string());
                }
            }
        }
    }
    keep
}

type Placed = Vec<(String, Option<String>)>;
type Texts = Vec<(Option<String>, String)>;

/// (bid, nearest bid ancestor) for every element, and all text in order
/// with the bid of its parent element.
fn shape(doc: &DomDocument) -> (Placed, Texts) {
    fn walk<'a>(
        children: impl Iterator<Item = DomChild<'a>>,
        parent: Option<String>,
        els: &mut Placed,
        texts: &mut Texts,
    ) {
        for c in children {
            match c {
                DomChild::Element(e) => {
                    let bid = e.bid().expect("bid").to_string();
                    els.push((bid.clone(), parent.clone()));
                    walk(e.children(), Some(bid), els, texts);
                }
                DomChild::Text(t) => texts.push((parent.clone(), t.to_string())),
                _ => {}
            }
        }
    }
    let (mut els, mut texts) = (Vec::new(), Vec::new());
    walk(doc.top_level(), None, &mut els, &mut texts);
    (els, texts)
}

fn tree_prune_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e3e);
    let docs = 150;
    for d in 0..docs {
        let size = rng.gen_range(1..30);
        let doc = common::random_doc(&mut rng, size);
        let bids: Vec<&str> = doc.bids().collect();
        let n_sel = rng.gen_range(0..=4.min(bids.len()));
        let selected: Vec<&str> = bids.choose_multiple(&mut rng, n_sel).copied().collect();
        let cfg = match d % 4 {
            0 => TreePruneConfig::DEFAULT,
            1 => TreePruneConfig::AXTREE,
            _ => TreePruneConfig {
                max_descendant_depth: rng.gen_range(0..4),
                max_children_per_node: rng.gen_range(0..4),
                max_sibling: rng.gen_range(0..3),
            },
        };
        let out = tree_prune(&doc, &selected, cfg).map_err(|e| format!("doc {d}: {e}"))?;
        let keep = expected_kept(&doc, &selected, cfg);

        let (orig_els, orig_texts) = shape(&doc);
        let (out_els, out_texts) = shape(&out);
        let nearest_kept = |bid: &str| -> Option<String> {
            doc.element_by_bid(bid)
                .expect("bid")
                .ancestors()
                .map(|a| a.bid().expect("bid").to_string())
                .find(|b| keep.contains(b))
        };
        let want_els: Vec<(String, Option<String>)> = orig_els
            .iter()
            .filter(|(b, _)| keep.contains(b))
            .map(|(b, _)| (b.clone(), nearest_kept(b)))
            .collect();
        ensure!(
            out_els == want_els,
            "doc {d}: retained elements or structure differ for {selected:?} under {cfg:?}"
        );
        for s in &selected {
            ensure!(out.contains_bid(s), "doc {d}: selected {s} missing");
        }
        // adjacent strings merge once the element between them is unwrapped
        let want_text: String = orig_texts
            .iter()
            .filter(|(p, _)| p.as_ref().is_none_or(|p| keep.contains(p)))
            .map(|(_, t)| t.as_str())
            .collect();
        let got_text: String = out_texts.iter().map(|(_, t)| t.as_str()).collect();
        ensure!(got_text == want_text, "doc {d}: retained text differs or is reordered");
    }

    let golden = DomDocument::parse(
        r#"<body bid="b"><section bid="s"><div bid="c">c-text<i bid="g">g-text<b bid="x">x-text</b></i></div><p bid="n">next</p></section></body>"#,
    )
    .map_err(|e| e.to_string())?;
    let got = tree_prune(&golden, ["c"], TreePruneConfig::AXTREE)
        .map_err(|e| e.to_string())?
        .serialize();
    let want = r#"<body bid="b"><section bid="s"><div bid="c">c-text<i bid="g">g-text</i></div></section></body>"#;
    ensure!(got == want, "axtree golden: {got}");
    Ok(format!(
        "{docs} random prunes match the retention model, axtree golden holds"
    ))
}

// ------------------------------------------------------------ evaluation

/// Drops each unit whose hash falls under `rate`, so a lower rate removes
/// a subset of what a higher rate removes.
struct HashAblation {
    id: String,
    rate: f64,
}

impl Reducer for HashAblation {
    fn id(&self) -> &str {
        &self.id
    }

    fn reduce(&self, req: &ReductionRequest<'_>) -> Result<mfscope::dom::DomDocument, ReduceError> {
        let drop: Vec<ElementRef> = common::present_units(req.doc)
            .into_iter()
            .filter(|u| {
                let mut h = std::collections::hash_map::DefaultHasher::new();
                u.hash(&mut h);
                (h.finish() % 10_000) as f64 / 10_000.0 < self.rate
            })
            .collect();
        Ok(ablate(req.doc, &drop)?)
    }
}

fn random_dataset(rng: &mut ChaCha8Rng, n: usize) -> Vec<LoadedInstance> {
    (0..n)
        .map(|i| {
            let size = rng.gen_range(2..25);
            let html = common::random_html(rng, size);
            let doc = DomDocument::parse(&html).expect("generated html parses");
            let units = common::present_units(&doc);
            let m = rng.gen_range(1..=3.min(units.len()));
            let instance = MfsInstance {
                instance_id: format!("i{i}"),
                benchmark: "synthetic".into(),
                source_model: "none".into(),
                goal: common::phrase(rng, 3),
                action_history: vec![],
                html: HtmlSource::inline(html),
                mfs: units.choose_multiple(rng, m).cloned().collect(),
                step_index: 0,
            };
            LoadedInstance::new(instance, std::path::Path::new("."))
        })
        .collect()
}

fn padded(open: &str, close: &str, len: usize) -> DomDocument {
    let base = DomDocument::parse(&format!("{open}{close}"))
        .expect("fixture")
        .char_length();
    let doc = DomDocument::parse(&format!("{open}{}{close}", "x".repeat(len - base))).expect("fixture");
    assert_eq!(doc.char_length(), len);
    doc
}

fn coverage_axioms() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0xc0fe);
    let identity = build_reducer(&MethodSpec::new("original"), &Providers::fake()).map_err(|e| e.to_string())?;
    let datasets = 12;
    let mut pairs = 0;
    for d in 0..datasets {
        let size = rng.gen_range(3..15);
        let data = random_dataset(&mut rng, size);
        let res = coverage(identity.as_ref(), &data).map_err(|e| e.to_string())?;
        ensure!(
            res.coverage() == 1.0,
            "dataset {d}: identity coverage {}",
            res.coverage()
        );
        ensure!(
            res.per_instance.iter().all(|r| r.rr == 1.0),
            "dataset {d}: identity rr below 1"
        );

        for _ in 0..5 {
            let hi: f64 = rng.gen_range(0.0..0.6);
            let lo = hi * rng.gen_range(0.0..1.0);
            let heavy = HashAblation {
                id: "heavy".into(),
                rate: hi,
            };
            let light = HashAblation {
                id: "light".into(),
                rate: lo,
            };
            let rh = coverage(&heavy, &data).map_err(|e| e.to_string())?;
            let rl = coverage(&light, &data).map_err(|e| e.to_string())?;
            for (a, b) in rh.per_instance.iter().zip(&rl.per_instance) {
                ensure!(
                    !a.covered || b.covered,
                    "dataset {d}: {} covered only by the larger output",
                    a.instance_id
                );
            }
            ensure!(
                rh.coverage() <= rl.coverage(),
                "dataset {d}: nested coverage not monotone"
            );
            pairs += 1;
        }
    }

    let open = r#"<div bid="a" class="k">"#;
    let close = r#"<span bid="b">z</span></div>"#;
    let original = padded(open, close, 1000);
    let mfs: RefSet = [ElementRef::named("a", "class"), ElementRef::tag("b")]
        .into_iter()
        .collect();
    let cases = [
        (padded(open, close, 150), 1u8),
        (padded(open, close, 250), 0),
        (padded(r#"<div bid="a">"#, close, 100), 0),
    ];
    for (i, (reduced, want)) in cases.iter().enumerate() {
        let got = gepa_objective(reduced, &original, &mfs, 0.2).map_err(|e| e.to_string())?;
        ensure!(got == *want, "objective example {i}: got {got}, want {want}");
    }
    Ok(format!(
        "{datasets} identity datasets, {pairs} nested pairs, objective truth table holds"
    ))
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn pearson_direct(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn ranks_direct(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|a| {
            let below = v.iter().filter(|b| *b < a).count() as f64;
            let tied = v.iter().filter(|b| *b == a).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect()
}

fn kendall_direct(x: &[f64], y: &[f64]) -> f64 {
    let (mut conc, mut disc, mut tx, mut ty, mut pairs) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for i in 0..x.len() {
        for j in 0..i {
            pairs += 1.0;
            let (dx, dy) = (x[i] - x[j], y[i] - y[j]);
            if dx == 0.0 {
                tx += 1.0;
            }
            if dy == 0.0 {
                ty += 1.0;
            }
            if dx * dy > 0.0 {
                conc += 1.0;
            } else if dx * dy < 0.0 {
                disc += 1.0;
            }
        }
    }
    (conc - disc) / ((pairs - tx) * (pairs - ty)).sqrt()
}

fn ols_residuals(v: &[f64], z: &[f64]) -> Vec<f64> {
    let (mv, mz) = (mean(v), mean(z));
    let szz: f64 = z.iter().map(|c| (c - mz) * (c - mz)).sum();
    let szv: f64 = z.iter().zip(v).map(|(c, a)| (c - mz) * (a - mv)).sum();
    let slope = szv / szz;
    v.iter().zip(z).map(|(a, c)| a - mv - slope * (c - mz)).collect()
}

fn statistics_equivalence() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x57a7);
    let trials = 80;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
    let mut done = 0;
    while done < trials {
        let n = rng.gen_range(4..14);
        let tied = done % 2 == 0;
        let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            (0..n)
                .map(|_| {
                    if tied {
                        f64::from(rng.gen_range(0..5))
                    } else {
                        rng.gen_range(-3.0..3.0)
                    }
                })
                .collect()
        };
        let (x, y) = (draw(&mut rng), draw(&mut rng));
        let z: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
        if x.iter().all(|v| *v == x[0]) || y.iter().all(|v| *v == y[0]) {
            continue;
        }
        let p = pearson(&x, &y).map_err(|e| e.to_string())?;
        let s = spearman(&x, &y).map_err(|e| e.to_string())?;
        let k = kendall_tau_b(&x, &y).map_err(|e| e.to_string())?;
        ensure!(close(p, pearson_direct(&x, &y)), "trial {done}: pearson {p}");
        ensure!(
            close(s, pearson_direct(&ranks_direct(&x), &ranks_direct(&y))),
            "trial {done}: spearman {s}"
        );
        ensure!(close(k, kendall_direct(&x, &y)), "trial {done}: kendall {k}");

        // strictly increasing transform leaves rank coefficients unchanged
        let fx: Vec<f64> = x.iter().map(|v| v.exp() * 3.0 + v.powi(3)).collect();
        ensure!(
            spearman(&fx, &y).map_err(|e| e.to_string())? == s,
            "trial {done}: spearman not invariant"
        );
        ensure!(
            kendall_tau_b(&fx, &y).map_err(|e| e.to_string())? == k,
            "trial {done}: kendall not invariant"
        );

        if !tied {
            let part = partial_correlations(&x, &y, &z).map_err(|e| e.to_string())?;
            let (rx, ry) = (ols_residuals(&x, &z), ols_residuals(&y, &z));
            let (rxy, rxz, ryz) = (pearson_direct(&x, &y), pearson_direct(&x, &z), pearson_direct(&y, &z));
            let closed = (rxy - rxz * ryz) / ((1.0 - rxz * rxz) * (1.0 - ryz * ryz)).sqrt();
            let pp = part.partial_pearson_r.expect("set");
            ensure!(close(pp, closed), "trial {done}: partial pearson {pp} vs {closed}");
            ensure!(
                close(pp, pearson_direct(&rx, &ry)),
                "trial {done}: partial pearson vs residuals"
            );
            let ps = part.partial_spearman_rho.expect("set");
            ensure!(
                close(ps, pearson_direct(&ranks_direct(&rx), &ranks_direct(&ry))),
                "trial {done}: partial spearman {ps}"
            );
            let pk = part.partial_kendall_tau.expect("set");
            ensure!(
                close(pk, kendall_direct(&rx, &ry)),
                "trial {done}: partial kendall {pk}"
            );
        }
        done += 1;
    }
    Ok(format!(
        "{trials} vector pairs ({} with ties) match definitional forms",
        trials / 2
    ))
}

// --------------------------------------------------------- dom programs

const SEED_IN: &str = r#"<html><head><title>Shop</title></head><body bid="1"><div bid="2"><p bid="3">Order history</p><p bid="4">Weather today</p></div><ul bid="5"><li bid="6"><a bid="7" href="/x">Home</a></li></ul><span>loose</span><script>var x;</script></body></html>"#;
const SEED_OUT: &str = r#"<html><body bid="1"><div bid="2"><p bid="3">Order history</p></div><ul bid="5"><li bid="6"><a bid="7" href="/x">Home</a></li></ul><span>loose</span></body></html>"#;

const WORKARENA_IN: &str = r#"<html><head><meta charset="utf-8"></head><body><div bid="10" class="layout" style="x"><span bid="11" data-x="1" title="Priority">High</span><span bid="12">   Unrelated   words  </span><i>incident note</i><b>zzz</b></div><select bid="13" name="state" aria-hidden="true"><option bid="14" value="new">New</option><option bid="15" value="closed">Closed</option></select></body></html>"#;
const WORKARENA_OUT: &str = r#"<html><body><div bid="10"><span bid="11" title="Priority">High</span><i>incident note</i></div><select bid="13" name="state"><option bid="14" value="new">New</option><option bid="15" value="closed">Closed</option></select></body></html>"#;

const WEBLINX_IN: &str = r#"<html><head><title bid="t1">Inbox</title><meta bid="m1" name="description" content="Mail app"><meta bid="m2" name="viewport" content="width"></head><body><div bid="20" class="row" tabindex="0">Compose message<span bid="21">Draft</span></div><div bid="22" contenteditable="true"><p bid="23">body text</p></div><section bid="24"><p bid="25" aria-label="Send later" style="c">Schedule</p></section>stray text<noscript>js</noscript><button bid="26" onclick="f()">Send</button></body></html>"#;
const WEBLINX_OUT: &str = r#"<html><title bid="t1">Inbox</title><meta bid="m1" name="description" content="Mail app"/><body><div bid="20" tabindex="0">Compose message</div><div bid="22" contenteditable="true"><p bid="23">body text</p></div>stray text<button bid="26">Send</button></body></html>"#;

fn gepa_fidelity() -> Check {
    let cases = [
        (GepaProgram::Seed, SEED_IN, "view my orders", "", SEED_OUT),
        (
            GepaProgram::WorkarenaR02,
            WORKARENA_IN,
            "set incident",
            "select_option('13', 'Closed')\nclick('11')",
            WORKARENA_OUT,
        ),
        (
            GepaProgram::WeblinxR02,
            WEBLINX_IN,
            "compose a message",
            "",
            WEBLINX_OUT,
        ),
    ];
    for (program, input, goal, history, want) in cases {
        let doc = DomDocument::parse(input).map_err(|e| e.to_string())?;
        let got = run_gepa_program(&doc, goal, history, program)
            .map_err(|e| e.to_string())?
            .serialize();
        ensure!(got == want, "{program}: got {got}");
    }
    Ok("seed, workarena_r02 and weblinx_r02 byte-identical".into())
}

fn normalization() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e0f);
    let rules = builtin_rules();
    let inputs = 150;
    for i in 0..inputs {
        let html = common::noisy_html(&mut rng);
        let doc = DomDocument::parse(&html).map_err(|e| e.to_string())?;
        let once = normalize(&doc, &rules).map_err(|e| e.to_string())?;
        let twice = normalize(&once, &rules).map_err(|e| e.to_string())?;
        ensure!(
            once.serialize() == twice.serialize(),
            "input {i}: full ruleset not idempotent on {html}"
        );
        for rule in &rules {
            let single = std::slice::from_ref(rule);
            let a = normalize(&doc, single).map_err(|e| e.to_string())?;
            let b = normalize(&a, single).map_err(|e| e.to_string())?;
            ensure!(
                a.serialize() == b.serialize(),
                "input {i}: rule {} not idempotent on {html}",
                rule.id
            );
        }
    }

    let norm = |html: &str| -> Result<String, String> {
        let doc = DomDocument::parse(html).map_err(|e| e.to_string())?;
        Ok(normalize(&doc, &rules).map_err(|e| e.to_string())?.serialize())
    };
    let goldens = [
        ("<p>updated 5m ago</p>", "<p>updated [TIMEAGO]</p>"),
        (
            r#"<div id="row-123e4567-e89b-12d3-a456-426614174000">x</div>"#,
            r#"<div id="row-[UUID]">x</div>"#,
        ),
        (
            r#"<font size="3" face="arial">x</font>"#,
            r#"<span style="font-family: arial; font-size: medium">x</span>"#,
        ),
    ];
    for (input, want) in goldens {
        let got = norm(input)?;
        ensure!(got == want, "golden {input}: got {got}");
    }

    let fixtures = [
        r#"<div id="a-123e4567-e89b-12d3-a456-426614174000">Saved 5 min ago</div>"#,
        r#"<div id="a-00000000-1111-2222-3333-444444444444">Saved 12 hours ago</div>"#,
        r#"<div id="a-abcdefab-cdef-abcd-efab-cdefabcdefab">Saved  2 days ago</div>"#,
        r#"<span style="color: red; margin: 0">total</span>"#,
        r#"<span style="margin:0;color:red">total</span>"#,
        r#"<span style="margin: 0; color: red">total</span><script>x()</script>"#,
        r#"<font face="serif" size="1">tiny</font>"#,
        r#"<span style="font-family: serif; font-size: x-small">tiny</span>"#,
        "<p>row\n\n  17\n</p>",
        "<p>row\n 3</p>",
    ];
    let n = fixtures.len();
    let mut eq = vec![vec![false; n]; n];
    for a in 0..n {
        for b in 0..n {
            eq[a][b] = normalized_equal(fixtures[a], fixtures[b], &rules).map_err(|e| e.to_string())?;
        }
    }
    for a in 0..n {
        ensure!(eq[a][a], "fixture {a} not equal to itself");
        for b in 0..n {
            ensure!(eq[a][b] == eq[b][a], "fixtures {a},{b} not symmetric");
            for c in 0..n {
                ensure!(
                    !(eq[a][b] && eq[b][c]) || eq[a][c],
                    "fixtures {a},{b},{c} not transitive"
                );
            }
        }
    }
    let classes: HashSet<Vec<bool>> = eq.iter().cloned().collect();
    // inner runs of spaces survive, so the double-spaced row stands alone
    ensure!(
        classes.len() == 5,
        "expected 5 classes among the fixtures, got {}",
        classes.len()
    );
    ensure!(!eq[0][2] && eq[0][1], "spacing inside a line should keep rows apart");
    Ok(format!(
        "{inputs} inputs idempotent per rule and in full, goldens hold, 10 fixtures fall into 5 classes"
    ))
}

// -------------------------------------------------------------- pipeline

fn end_to_end() -> Check {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0xe2e);
    let mut records = Vec::new();
    for i in 0..12 {
        let size = rng.gen_range(6..30);
        let html = common::random_html(&mut rng, size);
        let doc = DomDocument::parse(&html).map_err(|e| e.to_string())?;
        let units = common::present_units(&doc);
        let refs: Vec<ElementRef> = units.choose_multiple(&mut rng, 12.min(units.len())).cloned().collect();
        let m = rng.gen_range(1..=3.min(refs.len()));
        let truth: RefSet = refs.choose_multiple(&mut rng, m).cloned().collect();
        records.push(CandidateRecord {
            instance_id: format!("web-{i}"),
            benchmark: "synthetic".into(),
            source_model: "none".into(),
            goal: common::phrase(&mut rng, 3),
            action_history: vec![format!("click('e{}')", rng.gen_range(1..5))],
            html: HtmlSource::inline(html),
            step_index: i,
            refs,
            ground_truth: Some(truth),
            erroneous_action: None,
            action_target: None,
        });
    }
    let input = dir.path().join("candidates.jsonl");
    write_jsonl(&input, &records).map_err(|e| e.to_string())?;
    let mined = dir.path().join("mined.jsonl");
    let report = dir.path().join("report.jsonl");
    let path = |p: &std::path::Path| p.to_string_lossy().into_owned();

    let mine = [
        "mfscope",
        "mine",
        "--input",
        &path(&input),
        "--oracle",
        "simulation",
        "--partitioner",
        "fps",
        "--out",
        &path(&mined),
    ];
    let code = mfscope::cli::run(mine);
    ensure!(code == 0, "mine exited {code}");
    let eval = [
        "mfscope",
        "eval",
        "--mfs",
        &path(&mined),
        "--method",
        "original",
        "--method",
        "random:k=1,seed=7",
        "--method",
        "gepa:program=seed",
        "--out",
        &path(&report),
    ];
    let code = mfscope::cli::run(eval);
    ensure!(code == 0, "eval exited {code}");

    let text = std::fs::read_to_string(&report).map_err(|e| e.to_string())?;
    let mut cov: BTreeMap<String, f64> = BTreeMap::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).map_err(|e| e.to_string())?;
        if v["kind"] == "method" {
            let id = v["method_id"].as_str().unwrap_or_default().to_string();
            cov.insert(id, v["coverage"].as_f64().unwrap_or(f64::NAN));
        }
    }
    ensure!(cov.len() == 3, "report lists {} methods", cov.len());
    ensure!(
        cov.get("original") == Some(&1.0),
        "original coverage {:?}",
        cov.get("original")
    );
    within(start, Duration::from_secs(30))?;
    let shown: Vec<String> = cov.iter().map(|(k, v)| format!("{k}={v:.2}")).collect();
    Ok(format!("12 instances mined and scored, coverage {}", shown.join(" ")))
}
