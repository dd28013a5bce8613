//! Independent reference implementations used by the integration suites.
//! Everything here recomputes results through a different route than the
//! library: dense eigendecomposition instead of power iteration,
//! exhaustive subset enumeration instead of level-wise mining.

#![allow(dead_code)]

use std::collections::BTreeSet;

use warmrec_core::hits::CandidateGraph;
use warmrec_core::logparse::SessionLog;
use warmrec_core::pageweight::PageWeightTable;
use warmrec_core::warm::{MiningParams, WeightedRule};

/// Probabilistic dominant eigenvector of a symmetric matrix plus its
/// eigenvalue, via nalgebra's dense symmetric eigendecomposition.
pub fn dominant_probabilistic_eigenvector(m: &nalgebra::DMatrix<f64>) -> (f64, Vec<f64>) {
    let eigen = nalgebra::SymmetricEigen::new(m.clone());
    let (idx, &lambda) = eigen
        .eigenvalues
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty spectrum");
    let column = eigen.eigenvectors.column(idx);
    let sum: f64 = column.iter().sum();
    let sign = if sum < 0.0 { -1.0 } else { 1.0 };
    let total: f64 = column.iter().map(|x| x * sign).sum();
    (lambda, column.iter().map(|x| x * sign / total).collect())
}

pub fn adjacency_matrix(graph: &CandidateGraph) -> nalgebra::DMatrix<f64> {
    let n = graph.node_count();
    nalgebra::DMatrix::from_fn(n, n, |i, j| graph.adjacency[i][j] as f64)
}

/// Expected hub (dominant eigenvector of AAᵗ) and authority (of AᵗA)
/// vectors in graph node order, plus the dominant eigenvalue.
pub fn dense_hits_oracle(graph: &CandidateGraph) -> (Vec<f64>, Vec<f64>, f64) {
    let a = adjacency_matrix(graph);
    let (lambda, authority) = dominant_probabilistic_eigenvector(&(a.transpose() * &a));
    let (_, hub) = dominant_probabilistic_eigenvector(&(&a * a.transpose()));
    (hub, authority, lambda)
}

/// Exhaustive weighted-support computation, independent of the library's
/// containment machinery.
pub fn oracle_wsupport(itemset: &[String], log: &SessionLog, weights: &PageWeightTable) -> f64 {
    let set: BTreeSet<&String> = itemset.iter().collect();
    let mean: f64 =
        set.iter().map(|p| weights.weight_of(p)).sum::<f64>() / set.len() as f64;
    let mut containing = 0usize;
    for session in &log.sessions {
        let pages: BTreeSet<&String> = session.visits.iter().map(|v| &v.page).collect();
        if set.iter().all(|p| pages.contains(*p)) {
            containing += 1;
        }
    }
    containing as f64 / log.sessions.len() as f64 * mean
}

/// Every itemset (up to the size cap) present in at least one session and
/// meeting the exact threshold, by full power-set enumeration.
pub fn oracle_itemsets(
    log: &SessionLog,
    weights: &PageWeightTable,
    params: &MiningParams,
) -> Vec<(Vec<String>, f64)> {
    let universe: Vec<String> = log.page_universe.iter().cloned().collect();
    assert!(universe.len() <= 20, "oracle is exponential");
    let mut out = Vec::new();
    for mask in 1u32..(1u32 << universe.len()) {
        let items: Vec<String> = universe
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, p)| p.clone())
            .collect();
        if items.len() > params.max_itemset_size {
            continue;
        }
        let present = log.sessions.iter().any(|s| {
            let pages: BTreeSet<&String> = s.visits.iter().map(|v| &v.page).collect();
            items.iter().all(|p| pages.contains(p))
        });
        if !present {
            continue;
        }
        let support = oracle_wsupport(&items, log, weights);
        if support >= params.min_wsupport {
            out.push((items, support));
        }
    }
    out.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

/// Rule derivation over oracle itemsets with the same semantics the
/// library documents: single heads, zero-support bodies skipped,
/// confidence capped at 1.
pub fn oracle_rules(
    itemsets: &[(Vec<String>, f64)],
    log: &SessionLog,
    weights: &PageWeightTable,
    params: &MiningParams,
) -> Vec<WeightedRule> {
    let mut rules = Vec::new();
    for (itemset, support) in itemsets {
        if itemset.len() < 2 {
            continue;
        }
        for (skip, head) in itemset.iter().enumerate() {
            let mut body = itemset.clone();
            body.remove(skip);
            let body_support = oracle_wsupport(&body, log, weights);
            if body_support <= 0.0 {
                continue;
            }
            let wconf = (support / body_support).min(1.0);
            if wconf >= params.min_wconf {
                rules.push(WeightedRule {
                    body,
                    head: head.clone(),
                    wsupport: *support,
                    wconf,
                });
            }
        }
    }
    rules.sort_by(|a, b| {
        b.wconf
            .total_cmp(&a.wconf)
            .then_with(|| b.wsupport.total_cmp(&a.wsupport))
            .then_with(|| a.body.cmp(&b.body))
            .then_with(|| a.head.cmp(&b.head))
    });
    rules
}

/// Classic (unweighted) Apriori by enumeration: fraction-of-sessions
/// support, plain confidence ratio.
pub fn classic_apriori(
    log: &SessionLog,
    params: &MiningParams,
) -> (Vec<(Vec<String>, f64)>, Vec<WeightedRule>) {
    let ones = PageWeightTable::uniform(log.page_universe.iter().cloned(), 1.0);
    let itemsets = oracle_itemsets(log, &ones, params);
    let rules = oracle_rules(&itemsets, log, &ones, params);
    (itemsets, rules)
}
