use rand::seq::{IteratorRandom, SliceRandom};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    ddmin, simulation_oracle, FnOracle, FpsPartitioner, MfsError, Partitioner, RandomPartitioner, Strategy, Verdict,
};
use crate::dom::{parse_html, DomDocument, ElementRef, RefSet};

/// Shape of the synthetic page: `regions` identical subtrees, each a full
/// `fanout`-ary tree of `depth` levels below its root, hung under `wrap`
/// anonymous wrappers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeSpec {
    pub regions: usize,
    pub fanout: usize,
    pub depth: usize,
    pub wrap: usize,
}

impl Default for TreeSpec {
    fn default() -> Self {
        TreeSpec {
            regions: 4,
            fanout: 3,
            depth: 2,
            wrap: 2,
        }
    }
}

/// Failure structure: `groups` planted failing groups of `size` units, each
/// inside one region around a single anchor element, padded with random
/// distractors up to `candidates` units.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MfsSpec {
    pub size: usize,
    pub groups: usize,
    pub candidates: usize,
}

impl Default for MfsSpec {
    fn default() -> Self {
        MfsSpec {
            size: 2,
            groups: 2,
            candidates: 12,
        }
    }
}

const UNITS_PER_ELEMENT: usize = 3;

fn units(bid: &str) -> [ElementRef; UNITS_PER_ELEMENT] {
    [
        ElementRef::tag(bid),
        ElementRef::text(bid),
        ElementRef::named(bid, "class"),
    ]
}

fn check(tree: &TreeSpec, mfs: &MfsSpec) -> Result<(), MfsError> {
    let bad = |m: &str| Err(MfsError::InvalidSpec(m.to_string()));
    if tree.regions == 0 || tree.fanout == 0 {
        return bad("regions and fanout must be positive");
    }
    if mfs.size == 0 || mfs.groups == 0 {
        return bad("mfs size and group count must be positive");
    }
    if mfs.groups > tree.regions {
        return bad("more failing groups than regions");
    }
    if mfs.size > 2 * UNITS_PER_ELEMENT {
        return bad("mfs size must not exceed 6");
    }
    if tree.depth == 0 && mfs.size > UNITS_PER_ELEMENT {
        return bad("mfs size above 3 needs depth >= 1");
    }
    let per_region: usize = (0..=tree.depth).map(|d| tree.fanout.pow(d as u32)).sum();
    let total = tree.regions * per_region * UNITS_PER_ELEMENT;
    if mfs.candidates < mfs.groups * mfs.size || mfs.candidates > total {
        return bad("candidate count must lie between groups*size and the unit count of the tree");
    }
    Ok(())
}

/// One generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInstance {
    pub doc: DomDocument,
    pub candidates: RefSet,
    pub groups: Vec<RefSet>,
}

impl SyntheticInstance {
    /// FAIL iff some planted group is removed in full.
    pub fn fails(&self, removed: &RefSet) -> bool {
        self.groups.iter().any(|g| g.is_subset(removed))
    }
}

fn build(tree: &TreeSpec) -> String {
    fn node(out: &mut String, bid: String, level: usize, tree: &TreeSpec) {
        out.push_str(&format!(r#"<div bid="{bid}" class="c">{bid}"#));
        if level < tree.depth {
            for i in 0..tree.fanout {
                node(out, format!("{bid}-{i}"), level + 1, tree);
            }
        }
        out.push_str("</div>");
    }
    let mut html = String::from("<html><body>");
    for r in 0..tree.regions {
        html.push_str(&"<div>".repeat(tree.wrap));
        node(&mut html, format!("r{r}"), 0, tree);
        html.push_str(&"</div>".repeat(tree.wrap));
    }
    html.push_str("</body></html>");
    html
}

/// Draws one instance. Groups sit in distinct regions.
pub fn synthetic_instance(tree: &TreeSpec, mfs: &MfsSpec, rng: &mut impl Rng) -> Result<SyntheticInstance, MfsError> {
    check(tree, mfs)?;
    let doc = parse_html(&build(tree))?;
    let all_bids: Vec<String> = doc.bids().map(str::to_string).collect();
    let regions = (0..tree.regions).choose_multiple(rng, mfs.groups);
    let mut candidates = RefSet::new();
    let mut groups = Vec::with_capacity(mfs.groups);
    for r in regions {
        let prefix = format!("r{r}");
        let in_region: Vec<&String> = all_bids
            .iter()
            .filter(|b| **b == prefix || b.starts_with(&format!("{prefix}-")))
            .collect();
        let anchor = *in_region.choose(rng).expect("region has a root");
        let el = doc.element_by_bid(anchor).expect("generated bid");
        let mut pool: Vec<ElementRef> = units(anchor).to_vec();
        let near = el.element_children().chain(el.parent()).filter_map(|e| e.bid());
        for b in near {
            pool.extend(units(b));
        }
        let group: RefSet = pool.choose_multiple(rng, mfs.size).cloned().collect();
        candidates.extend(group.iter().cloned());
        groups.push(group);
    }
    let mut rest: Vec<ElementRef> = all_bids
        .iter()
        .flat_map(|b| units(b))
        .filter(|r| !candidates.contains(r))
        .collect();
    rest.shuffle(rng);
    let need = mfs.candidates - candidates.len();
    candidates.extend(rest.into_iter().take(need));
    Ok(SyntheticInstance {
        doc,
        candidates,
        groups,
    })
}

fn partitioner<'a>(strategy: Strategy, doc: &'a DomDocument, seed: u64) -> Box<dyn Partitioner + 'a> {
    match strategy {
        Strategy::Fps => Box::new(FpsPartitioner { doc }),
        Strategy::Random => Box::new(RandomPartitioner::new(seed)),
    }
}

fn calls_against(inst: &SyntheticInstance, truth: &RefSet, strategy: Strategy, seed: u64) -> Result<usize, MfsError> {
    let oracle = simulation_oracle(truth.clone());
    let out = ddmin(
        &inst.candidates,
        &oracle,
        partitioner(strategy, &inst.doc, seed).as_mut(),
    )?;
    debug_assert_eq!(&out.mfs, truth);
    Ok(out.oracle_calls)
}

/// Mean ddmin oracle calls with the first planted group as ground truth.
pub fn simulate_partitioning(
    tree: &TreeSpec,
    mfs: &MfsSpec,
    strategy: Strategy,
    trials: usize,
    seed: u64,
) -> Result<f64, MfsError> {
    if trials == 0 {
        return Err(MfsError::InvalidSpec("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0;
    for _ in 0..trials {
        let inst = synthetic_instance(tree, mfs, &mut rng)?;
        total += calls_against(&inst, &inst.groups[0], strategy, rng.next_u64())?;
    }
    Ok(total as f64 / trials as f64)
}

/// Mean oracle calls per strategy when the ground truth is the set that
/// FPS (setting A) or random partitioning (setting B) mines from the
/// planted failure structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Table4 {
    pub trials: usize,
    pub a_fps: f64,
    pub a_random: f64,
    pub b_fps: f64,
    pub b_random: f64,
}

pub fn run_table4(tree: &TreeSpec, mfs: &MfsSpec, trials: usize, seed: u64) -> Result<Table4, MfsError> {
    if trials == 0 {
        return Err(MfsError::InvalidSpec("trials must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sums = [0usize; 4];
    for _ in 0..trials {
        let inst = synthetic_instance(tree, mfs, &mut rng)?;
        let mut truths = Vec::with_capacity(2);
        for strategy in [Strategy::Fps, Strategy::Random] {
            let hidden = FnOracle::new(|s: &RefSet| if inst.fails(s) { Verdict::Fail } else { Verdict::Pass });
            let found = ddmin(
                &inst.candidates,
                &hidden,
                partitioner(strategy, &inst.doc, rng.next_u64()).as_mut(),
            )?;
            truths.push(found.mfs);
        }
        for (setting, truth) in truths.iter().enumerate() {
            for (s, strategy) in [Strategy::Fps, Strategy::Random].into_iter().enumerate() {
                sums[setting * 2 + s] += calls_against(&inst, truth, strategy, rng.next_u64())?;
            }
        }
    }
    let mean = |i: usize| sums[i] as f64 / trials as f64;
    Ok(Table4 {
        trials,
        a_fps: mean(0),
        a_random: mean(1),
        b_fps: mean(2),
        b_random: mean(3),
    })
}
