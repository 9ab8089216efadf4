//! Personalized PageRank over the concept subgraph induced by a fragment's
//! candidates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageRankConfig {
    pub damping: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self { damping: 0.85, tol: 1e-8, max_iter: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRankResult {
    /// Stationary distribution before combining with the candidate scores.
    pub pagerank: BTreeMap<String, f64>,
    /// PageRank times candidate score, re-normalized to sum to one.
    pub scores: BTreeMap<String, f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Re-ranks candidate concepts. The teleport distribution is the
/// L1-normalized candidate score map; mass held by nodes without outgoing
/// edges inside the subgraph is sent back through the teleport vector.
pub fn pagerank_rerank(
    candidates: &BTreeMap<String, f64>,
    links: &BTreeMap<String, BTreeSet<String>>,
    config: &PageRankConfig,
) -> PageRankResult {
    let ids: Vec<&String> = candidates.keys().collect();
    let n = ids.len();
    if n == 0 {
        return PageRankResult { pagerank: BTreeMap::new(), scores: BTreeMap::new(), iterations: 0, converged: true };
    }
    let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();

    let teleport = {
        let raw: Vec<f64> = candidates.values().map(|v| v.max(0.0)).collect();
        let total: f64 = raw.iter().sum();
        if total > 0.0 {
            raw.iter().map(|v| v / total).collect::<Vec<_>>()
        } else {
            vec![1.0 / n as f64; n]
        }
    };

    // out-edges restricted to the candidate set, self-loops ignored
    let out_edges: Vec<Vec<usize>> = ids
        .iter()
        .enumerate()
        .map(|(i, id)| {
            links
                .get(id.as_str())
                .map(|targets| {
                    targets.iter().filter_map(|t| index.get(t.as_str()).copied()).filter(|&j| j != i).collect()
                })
                .unwrap_or_default()
        })
        .collect();

    let d = config.damping;
    let mut rank = teleport.clone();
    let mut next = vec![0.0; n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;
        next.iter_mut().for_each(|x| *x = 0.0);
        let mut dangling = 0.0;
        for (i, edges) in out_edges.iter().enumerate() {
            if edges.is_empty() {
                dangling += rank[i];
            } else {
                let share = rank[i] / edges.len() as f64;
                for &j in edges {
                    next[j] += share;
                }
            }
        }
        for (x, t) in next.iter_mut().zip(&teleport) {
            *x = d * (*x + dangling * t) + (1.0 - d) * t;
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|x| *x /= total);
        let delta: f64 = next.iter().zip(&rank).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut rank, &mut next);
        if delta < config.tol {
            converged = true;
            break;
        }
    }

    let product: Vec<f64> = rank.iter().zip(&teleport).map(|(r, t)| r * t).collect();
    let total: f64 = product.iter().sum();
    let scores = ids
        .iter()
        .zip(&product)
        .map(|(id, p)| ((*id).clone(), if total > 0.0 { p / total } else { 0.0 }))
        .collect();
    let pagerank = ids.iter().zip(&rank).map(|(id, r)| ((*id).clone(), *r)).collect();
    PageRankResult { pagerank, scores, iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scores(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn links(pairs: &[(&str, &[&str])]) -> BTreeMap<String, BTreeSet<String>> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.iter().map(|s| s.to_string()).collect())).collect()
    }

    #[test]
    fn single_candidate() {
        let r = pagerank_rerank(&scores(&[("A", 0.3)]), &BTreeMap::new(), &PageRankConfig::default());
        assert_eq!(r.scores["A"], 1.0);
        assert!(r.converged);
    }

    #[test]
    fn symmetric_pair() {
        let r = pagerank_rerank(
            &scores(&[("A", 0.5), ("B", 0.5)]),
            &links(&[("A", &["B"]), ("B", &["A"])]),
            &PageRankConfig::default(),
        );
        assert!((r.scores["A"] - 0.5).abs() < 1e-8);
        assert!((r.scores["B"] - 0.5).abs() < 1e-8);
    }

    #[test]
    fn non_convergence_is_flagged() {
        let cfg = PageRankConfig { max_iter: 1, tol: 0.0, ..Default::default() };
        let r = pagerank_rerank(
            &scores(&[("A", 0.9), ("B", 0.1)]),
            &links(&[("A", &["B"])]),
            &cfg,
        );
        assert!(!r.converged);
        assert_eq!(r.iterations, 1);
    }

    #[test]
    fn links_outside_candidates_are_ignored() {
        let with = pagerank_rerank(
            &scores(&[("A", 0.5), ("B", 0.5)]),
            &links(&[("A", &["Z"]), ("B", &["Y"])]),
            &PageRankConfig::default(),
        );
        assert!((with.scores["A"] - 0.5).abs() < 1e-12);
    }
}
