use std::collections::HashMap;

use super::{build_query, element_repr, top_k, tree_prune, ReduceError, ReductionRequest, TreePruneConfig};
use crate::dom::DomDocument;
use crate::text::tokenize;

pub const BM25_K1: f64 = 1.5;
pub const BM25_B: f64 = 0.75;

/// Okapi BM25 over pre-tokenized documents.
///
/// `idf(t) = ln((N - n_t + 0.5) / (n_t + 0.5) + 1)`, which stays positive
/// for terms present in most documents.
#[derive(Debug, Clone)]
pub struct Bm25 {
    tf: Vec<HashMap<String, usize>>,
    len: Vec<usize>,
    df: HashMap<String, usize>,
    avgdl: f64,
}

impl Bm25 {
    pub fn new<D: AsRef<[String]>>(corpus: &[D]) -> Self {
        let mut tf = Vec::with_capacity(corpus.len());
        let mut len = Vec::with_capacity(corpus.len());
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in corpus {
            let doc = doc.as_ref();
            let mut counts: HashMap<String, usize> = HashMap::new();
            for t in doc {
                *counts.entry(t.clone()).or_default() += 1;
            }
            for t in counts.keys() {
                *df.entry(t.clone()).or_default() += 1;
            }
            tf.push(counts);
            len.push(doc.len());
        }
        let avgdl = if len.is_empty() {
            0.0
        } else {
            len.iter().sum::<usize>() as f64 / len.len() as f64
        };
        Bm25 { tf, len, df, avgdl }
    }

    pub fn len(&self) -> usize {
        self.tf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tf.is_empty()
    }

    pub fn idf(&self, term: &str) -> f64 {
        let n = self.tf.len() as f64;
        let nt = self.df.get(term).copied().unwrap_or(0) as f64;
        ((n - nt + 0.5) / (nt + 0.5) + 1.0).ln()
    }

    /// Score of document `i`; repeated query terms count once per repeat.
    pub fn score(&self, query: &[String], i: usize) -> f64 {
        let dl = self.len[i] as f64;
        let norm = if self.avgdl > 0.0 { dl / self.avgdl } else { 0.0 };
        query
            .iter()
            .map(|t| {
                let f = self.tf[i].get(t).copied().unwrap_or(0) as f64;
                if f == 0.0 {
                    return 0.0;
                }
                self.idf(t) * f * (BM25_K1 + 1.0) / (f + BM25_K1 * (1.0 - BM25_B + BM25_B * norm))
            })
            .sum()
    }

    pub fn scores(&self, query: &[String]) -> Vec<f64> {
        (0..self.len()).map(|i| self.score(query, i)).collect()
    }
}

/// All bid elements with their BM25 score against `query`, best first
/// (ties in document order).
pub fn rank_bm25(doc: &DomDocument, query: &str) -> Vec<(String, f64)> {
    let bids: Vec<&str> = doc.bids().collect();
    let corpus: Vec<Vec<String>> = doc.bid_elements().map(|e| tokenize(&element_repr(&e))).collect();
    let scores = Bm25::new(&corpus).scores(&tokenize(query));
    top_k(&scores, scores.len())
        .into_iter()
        .map(|i| (bids[i].to_string(), scores[i]))
        .collect()
}

pub fn reduce_dmr_bm25(req: &ReductionRequest<'_>) -> Result<DomDocument, ReduceError> {
    let k = req.require_k()?;
    let ranked = rank_bm25(req.doc, &build_query(req.goal, req.action_history));
    let chosen = ranked.iter().take(k).map(|(b, _)| b.as_str());
    Ok(tree_prune(req.doc, chosen, TreePruneConfig::DEFAULT)?)
}
