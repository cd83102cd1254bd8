use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MfsError;
use crate::dom::{dom_distance, DomDocument, DomError, ElementRef};

/// Splits the current candidates (sorted) into at most `n` chunks.
pub trait Partitioner {
    fn partition(&mut self, refs: &[ElementRef], n: usize) -> Result<Vec<Vec<ElementRef>>, MfsError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Fps,
    Random,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Fps => "fps",
            Strategy::Random => "random",
        })
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fps" => Ok(Strategy::Fps),
            "random" => Ok(Strategy::Random),
            other => Err(format!("unknown partitioner `{other}` (expected fps or random)")),
        }
    }
}

fn balanced(refs: Vec<ElementRef>, n: usize) -> Vec<Vec<ElementRef>> {
    let n = n.clamp(1, refs.len().max(1));
    let (base, extra) = (refs.len() / n, refs.len() % n);
    let mut it = refs.into_iter();
    (0..n)
        .map(|i| it.by_ref().take(base + usize::from(i < extra)).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect()
}

/// Consecutive runs in candidate order.
#[derive(Debug, Default, Clone, Copy)]
pub struct ContiguousPartitioner;

impl Partitioner for ContiguousPartitioner {
    fn partition(&mut self, refs: &[ElementRef], n: usize) -> Result<Vec<Vec<ElementRef>>, MfsError> {
        Ok(balanced(refs.to_vec(), n))
    }
}

/// Shuffles, then cuts into balanced runs. Chunks are sorted internally.
#[derive(Debug, Clone)]
pub struct RandomPartitioner {
    rng: ChaCha8Rng,
}

impl RandomPartitioner {
    pub fn new(seed: u64) -> Self {
        RandomPartitioner {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }
}

impl Partitioner for RandomPartitioner {
    fn partition(&mut self, refs: &[ElementRef], n: usize) -> Result<Vec<Vec<ElementRef>>, MfsError> {
        let mut shuffled = refs.to_vec();
        shuffled.shuffle(&mut self.rng);
        let mut chunks = balanced(shuffled, n);
        for c in &mut chunks {
            c.sort();
        }
        Ok(chunks)
    }
}

/// Farthest-point seeds over tree distance in a fixed document.
#[derive(Debug, Clone, Copy)]
pub struct FpsPartitioner<'a> {
    pub doc: &'a DomDocument,
}

impl Partitioner for FpsPartitioner<'_> {
    fn partition(&mut self, refs: &[ElementRef], n: usize) -> Result<Vec<Vec<ElementRef>>, MfsError> {
        Ok(fps_partition(self.doc, refs, n)?)
    }
}

/// Groups `refs` around `n` farthest-point seeds.
///
/// The first seed is the smallest unit; each next seed maximizes its
/// distance to the nearest chosen seed (ties to the smaller unit). Other
/// units then go to their nearest seed, closest pairs first, while that
/// group has fewer than `ceil(len / n)` members. Chunks come out in seed
/// order with sorted members.
pub fn fps_partition(doc: &DomDocument, refs: &[ElementRef], n: usize) -> Result<Vec<Vec<ElementRef>>, DomError> {
    let mut refs = refs.to_vec();
    refs.sort();
    refs.dedup();
    let m = refs.len();
    if m == 0 {
        return Ok(Vec::new());
    }
    let n = n.clamp(1, m);
    let mut dist = vec![vec![0usize; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let d = dom_distance(doc, &refs[i], &refs[j])?;
            dist[i][j] = d;
            dist[j][i] = d;
        }
    }

    let mut seeds = vec![0];
    let mut is_seed = vec![false; m];
    is_seed[0] = true;
    let mut nearest = dist[0].clone();
    while seeds.len() < n {
        let next = (0..m)
            .filter(|&j| !is_seed[j])
            .max_by(|&a, &b| nearest[a].cmp(&nearest[b]).then(b.cmp(&a)))
            .expect("fewer seeds than refs");
        seeds.push(next);
        is_seed[next] = true;
        for j in 0..m {
            nearest[j] = nearest[j].min(dist[next][j]);
        }
    }

    let cap = m.div_ceil(n);
    let mut groups: Vec<Vec<usize>> = seeds.iter().map(|&s| vec![s]).collect();
    let mut pairs: Vec<(usize, usize, usize)> = (0..m)
        .filter(|&j| !is_seed[j])
        .flat_map(|j| seeds.iter().enumerate().map(move |(g, _)| (j, g)))
        .map(|(j, g)| (dist[seeds[g]][j], j, g))
        .collect();
    pairs.sort_unstable();
    let mut assigned = is_seed;
    for (_, j, g) in pairs {
        if !assigned[j] && groups[g].len() < cap {
            groups[g].push(j);
            assigned[j] = true;
        }
    }
    debug_assert!(assigned.iter().all(|&a| a));

    Ok(groups
        .into_iter()
        .map(|mut g| {
            g.sort_unstable();
            g.into_iter().map(|i| refs[i].clone()).collect()
        })
        .collect())
}
