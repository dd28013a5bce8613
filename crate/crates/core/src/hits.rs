//! HITS hub/authority scoring over the candidate subgraph.
//!
//! The candidate pages and the hyperlinks among them form a small directed
//! graph with 0/1 adjacency matrix `A`. Starting from the all-ones hub
//! vector, the update pair
//!
//! ```text
//! v = Aᵗ·u      (authorities gather incoming hub weight)
//! u = A·v      (hubs gather outgoing authority weight)
//! ```
//!
//! is applied until equilibrium, normalizing each vector to sum 1 every
//! step. When `AᵗA` and `AAᵗ` are primitive the normalized sequences
//! converge to the unique probabilistic dominant eigenvectors of those
//! matrices; the dominant eigenvalue is estimated with a Rayleigh
//! quotient at convergence. Non-primitive graphs still iterate (the
//! sequence settles into a dominant eigenspace projection) and are merely
//! flagged.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::logparse::SiteMap;

pub const DEFAULT_HITS_TOLERANCE: f64 = 1e-10;
pub const DEFAULT_HITS_MAX_ITERATIONS: usize = 1000;
/// Largest node count for which primitivity is decided exactly; larger
/// graphs report `Unchecked`.
pub const DEFAULT_PRIMITIVITY_LIMIT: usize = 64;

/// Adjacency over the candidate page set. Nodes are sorted
/// lexicographically; `adjacency[i][j] = 1` iff page `i` links to page
/// `j`. No self-loops.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateGraph {
    pub nodes: Vec<String>,
    pub adjacency: Vec<Vec<u8>>,
}

impl CandidateGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency
            .iter()
            .map(|row| row.iter().filter(|&&x| x != 0).count())
            .sum()
    }
}

/// Tri-state primitivity verdict for `AᵗA`/`AAᵗ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Primitivity {
    Primitive,
    NotPrimitive,
    Unchecked,
}

/// Converged hub/authority weights. Both maps are probabilistic (entries
/// sum to 1) and nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitsScores {
    pub hub: BTreeMap<String, f64>,
    pub authority: BTreeMap<String, f64>,
    pub iterations_used: usize,
    pub dominant_eigenvalue_estimate: f64,
    pub primitivity: Primitivity,
}

/// Connect the candidate pages with the hyperlinks the site map knows
/// about. Isolated nodes are fine.
pub fn build_candidate_graph(candidate_pages: &BTreeSet<String>, site: &SiteMap) -> CandidateGraph {
    let nodes: Vec<String> = candidate_pages.iter().cloned().collect();
    let index: BTreeMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let mut adjacency = vec![vec![0u8; nodes.len()]; nodes.len()];
    for (i, page) in nodes.iter().enumerate() {
        if let Some(outlinks) = site.outlinks_of(page) {
            for target in outlinks {
                if let Some(&j) = index.get(target.as_str()) {
                    if i != j {
                        adjacency[i][j] = 1;
                    }
                }
            }
        }
    }
    CandidateGraph { nodes, adjacency }
}

/// Run the alternating update from the all-ones start.
pub fn hits_iterate(graph: &CandidateGraph, tolerance: f64, max_iterations: usize) -> HitsScores {
    let ones = vec![1.0; graph.node_count()];
    hits_iterate_from(graph, &ones, tolerance, max_iterations)
}

/// Same iteration with a caller-chosen strictly positive start; the rank
/// order of the converged scores does not depend on it.
pub fn hits_iterate_from(
    graph: &CandidateGraph,
    start: &[f64],
    tolerance: f64,
    max_iterations: usize,
) -> HitsScores {
    let n = graph.node_count();
    assert_eq!(start.len(), n, "start vector length must match node count");
    let primitivity = is_primitive_product(graph, DEFAULT_PRIMITIVITY_LIMIT);

    if n == 0 {
        return HitsScores {
            hub: BTreeMap::new(),
            authority: BTreeMap::new(),
            iterations_used: 0,
            dominant_eigenvalue_estimate: 0.0,
            primitivity,
        };
    }
    if graph.edge_count() == 0 {
        // Nothing to propagate; the paper's primitivity assumption fails
        // outright, so report the uniform vectors unchanged.
        let uniform = 1.0 / n as f64;
        let scores: BTreeMap<String, f64> =
            graph.nodes.iter().map(|p| (p.clone(), uniform)).collect();
        return HitsScores {
            hub: scores.clone(),
            authority: scores,
            iterations_used: 0,
            dominant_eigenvalue_estimate: 0.0,
            primitivity,
        };
    }

    let mut hub = normalize_sum1(start.to_vec());
    let mut authority = vec![0.0; n];
    let mut iterations_used = 0;
    for _ in 0..max_iterations {
        let new_authority = normalize_sum1(matvec_transposed(&graph.adjacency, &hub));
        let new_hub = normalize_sum1(matvec(&graph.adjacency, &new_authority));
        let delta_v = l1_distance(&new_authority, &authority);
        let delta_u = l1_distance(&new_hub, &hub);
        authority = new_authority;
        hub = new_hub;
        iterations_used += 1;
        if delta_v < tolerance && delta_u < tolerance {
            break;
        }
    }

    // Rayleigh quotient of AᵗA at the converged authority vector.
    let av = matvec(&graph.adjacency, &authority);
    let atav = matvec_transposed(&graph.adjacency, &av);
    let vv: f64 = authority.iter().map(|x| x * x).sum();
    let dominant_eigenvalue_estimate = if vv > 0.0 {
        authority.iter().zip(&atav).map(|(a, b)| a * b).sum::<f64>() / vv
    } else {
        0.0
    };

    HitsScores {
        hub: zip_scores(&graph.nodes, &hub),
        authority: zip_scores(&graph.nodes, &authority),
        iterations_used,
        dominant_eigenvalue_estimate,
        primitivity,
    }
}

/// Decide whether both `AᵗA` and `AAᵗ` are primitive by checking that
/// some power up to `n` is entrywise positive. Both products are
/// symmetric with positive diagonal wherever a node has any link, so the
/// bounded check is exact; graphs above `size_limit` return `Unchecked`.
pub fn is_primitive_product(graph: &CandidateGraph, size_limit: usize) -> Primitivity {
    let n = graph.node_count();
    if n == 0 {
        return Primitivity::NotPrimitive;
    }
    if n > size_limit {
        return Primitivity::Unchecked;
    }
    let a = &graph.adjacency;
    let ata = product_support(a, true);
    let aat = product_support(a, false);
    if has_positive_power(&ata, n) && has_positive_power(&aat, n) {
        Primitivity::Primitive
    } else {
        Primitivity::NotPrimitive
    }
}

/// Boolean support of AᵗA (`transposed_first`) or AAᵗ.
fn product_support(a: &[Vec<u8>], transposed_first: bool) -> Vec<Vec<bool>> {
    let n = a.len();
    let mut out = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            let hit = (0..n).any(|k| {
                if transposed_first {
                    a[k][i] != 0 && a[k][j] != 0
                } else {
                    a[i][k] != 0 && a[j][k] != 0
                }
            });
            out[i][j] = hit;
        }
    }
    out
}

fn has_positive_power(m: &[Vec<bool>], max_power: usize) -> bool {
    let n = m.len();
    let all_true = |p: &[Vec<bool>]| p.iter().all(|row| row.iter().all(|&x| x));
    let mut power = m.to_vec();
    for _ in 0..max_power {
        if all_true(&power) {
            return true;
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                next[i][j] = (0..n).any(|k| power[i][k] && m[k][j]);
            }
        }
        if next == power {
            break; // support closed without filling up
        }
        power = next;
    }
    all_true(&power)
}

fn matvec(a: &[Vec<u8>], x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(&aij, xj)| aij as f64 * xj).sum())
        .collect()
}

fn matvec_transposed(a: &[Vec<u8>], x: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, row) in a.iter().enumerate() {
        for (j, &aij) in row.iter().enumerate() {
            if aij != 0 {
                out[j] += x[i];
            }
        }
    }
    out
}

fn normalize_sum1(mut v: Vec<f64>) -> Vec<f64> {
    let sum: f64 = v.iter().sum();
    if sum > 0.0 {
        for x in &mut v {
            *x /= sum;
        }
    }
    v
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn zip_scores(nodes: &[String], values: &[f64]) -> BTreeMap<String, f64> {
    nodes
        .iter()
        .zip(values)
        .map(|(p, &v)| (p.clone(), v))
        .collect()
}
