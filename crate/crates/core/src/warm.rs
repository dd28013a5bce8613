//! Weighted association-rule mining over sessionized usage logs.
//!
//! Support is classic session-containment support scaled by the mean page
//! weight of the itemset:
//!
//! ```text
//! wsupport(X) = (sessions containing X / total sessions) · mean weight of X
//! ```
//!
//! With all weights at 1 this degenerates to classic Apriori support, and
//! confidence `wsupport(Z)/wsupport(Z∖{p})` to classic confidence.
//!
//! Mean-weight scaling is not anti-monotone (adding a high-weight page can
//! raise the mean), so the level-wise prune runs on the anti-monotone
//! upper bound `containment fraction × max page weight in the universe`
//! and the exact threshold is applied as a final filter. That keeps the
//! Apriori candidate join complete.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::logparse::SessionLog;
use crate::pageweight::PageWeightTable;
use crate::{Error, Result};

/// Mining thresholds. A `min_wsupport` of 0 disables the support cut
/// (itemsets still need at least one containing session).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiningParams {
    pub min_wsupport: f64,
    pub min_wconf: f64,
    pub max_itemset_size: usize,
}

impl Default for MiningParams {
    fn default() -> Self {
        MiningParams {
            min_wsupport: 0.1,
            min_wconf: 0.5,
            max_itemset_size: 5,
        }
    }
}

impl MiningParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.min_wsupport) {
            return Err(Error::InvalidConfig("min_wsupport must be in [0,1]".into()));
        }
        if !(0.0..=1.0).contains(&self.min_wconf) {
            return Err(Error::InvalidConfig("min_wconf must be in [0,1]".into()));
        }
        if self.max_itemset_size == 0 {
            return Err(Error::InvalidConfig("max_itemset_size must be ≥ 1".into()));
        }
        Ok(())
    }
}

/// An association rule `body ⇒ head` with weighted support of the full
/// itemset and weighted confidence. The head is always a single page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedRule {
    pub body: Vec<String>,
    pub head: String,
    pub wsupport: f64,
    pub wconf: f64,
}

/// Mined rules in deterministic order: confidence descending, support
/// descending, then lexicographic body and head.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RuleBase {
    pub rules: Vec<WeightedRule>,
}

impl RuleBase {
    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }
}

/// Weighted support of one itemset against the full log.
pub fn wsupport(itemset: &[String], log: &SessionLog, weights: &PageWeightTable) -> f64 {
    let set: BTreeSet<&String> = itemset.iter().collect();
    if set.is_empty() || log.sessions.is_empty() {
        return 0.0;
    }
    let items: Vec<&String> = set.into_iter().collect();
    let mean_weight =
        items.iter().map(|p| weights.weight_of(p)).sum::<f64>() / items.len() as f64;
    let containing = log
        .sessions
        .iter()
        .filter(|s| items.iter().all(|p| s.visits.iter().any(|v| &&v.page == p)))
        .count();
    containing as f64 / log.sessions.len() as f64 * mean_weight
}

/// Level-wise weighted Apriori. Returns `(itemset, wsupport)` pairs for
/// every itemset within the size cap that occurs in at least one session
/// and meets `min_wsupport`; itemsets sorted by size then lexicographic.
pub fn mine_weighted_itemsets(
    log: &SessionLog,
    weights: &PageWeightTable,
    params: &MiningParams,
) -> Vec<(Vec<String>, f64)> {
    let universe: Vec<&String> = log.page_universe.iter().collect();
    if universe.is_empty() || log.sessions.is_empty() {
        return Vec::new();
    }

    let page_weight: Vec<f64> = universe.iter().map(|p| weights.weight_of(p)).collect();
    let wmax = page_weight.iter().copied().fold(0.0f64, f64::max);
    let n_sessions = log.sessions.len() as f64;

    // Sessions as sorted distinct page-index sets.
    let index_of: BTreeMap<&str, u32> = universe
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i as u32))
        .collect();
    let session_sets: Vec<Vec<u32>> = log
        .sessions
        .iter()
        .map(|s| {
            let set: BTreeSet<u32> = s
                .visits
                .iter()
                .filter_map(|v| index_of.get(v.page.as_str()).copied())
                .collect();
            set.into_iter().collect()
        })
        .collect();

    let mut mined: Vec<(Vec<u32>, f64)> = Vec::new();
    // Frontier: itemsets passing the anti-monotone upper bound, kept for
    // candidate generation at the next level.
    let mut frontier: Vec<Vec<u32>> = Vec::new();

    for level in 1..=params.max_itemset_size {
        let candidates: Vec<Vec<u32>> = if level == 1 {
            (0..universe.len() as u32).map(|i| vec![i]).collect()
        } else {
            join_candidates(&frontier, level)
        };
        if candidates.is_empty() {
            break;
        }

        let mut next_frontier = Vec::new();
        for candidate in candidates {
            let count = session_sets
                .iter()
                .filter(|s| is_subset(&candidate, s))
                .count();
            if count == 0 {
                continue;
            }
            let fraction = count as f64 / n_sessions;
            let mean = candidate
                .iter()
                .map(|&i| page_weight[i as usize])
                .sum::<f64>()
                / candidate.len() as f64;
            if fraction * mean >= params.min_wsupport {
                mined.push((candidate.clone(), fraction * mean));
            }
            if fraction * wmax >= params.min_wsupport {
                next_frontier.push(candidate);
            }
        }
        frontier = next_frontier;
        if frontier.is_empty() {
            break;
        }
    }

    mined.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));
    mined
        .into_iter()
        .map(|(items, support)| {
            (
                items
                    .into_iter()
                    .map(|i| universe[i as usize].clone())
                    .collect(),
                support,
            )
        })
        .collect()
}

/// Classic Apriori join: merge two level-(k−1) sets sharing the first k−2
/// items, then require every (k−1)-subset to be in the frontier.
fn join_candidates(frontier: &[Vec<u32>], level: usize) -> Vec<Vec<u32>> {
    let frontier_set: BTreeSet<&[u32]> = frontier.iter().map(|v| v.as_slice()).collect();
    let mut sorted: Vec<&Vec<u32>> = frontier.iter().collect();
    sorted.sort();

    let mut candidates = Vec::new();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let (a, b) = (sorted[i], sorted[j]);
            if a[..level - 2] != b[..level - 2] {
                break;
            }
            let mut merged = a.clone();
            merged.push(b[level - 2]);
            debug_assert!(merged.windows(2).all(|w| w[0] < w[1]));

            let all_subsets_alive = (0..merged.len()).all(|skip| {
                let mut subset = merged.clone();
                subset.remove(skip);
                frontier_set.contains(subset.as_slice())
            });
            if all_subsets_alive {
                candidates.push(merged);
            }
        }
    }
    candidates
}

fn is_subset(needle: &[u32], haystack: &[u32]) -> bool {
    let mut it = haystack.iter();
    'outer: for want in needle {
        for have in it.by_ref() {
            if have == want {
                continue 'outer;
            }
            if have > want {
                return false;
            }
        }
        return false;
    }
    true
}

/// Derive single-head rules from mined itemsets: for every itemset `Z`
/// with at least two pages and every `p ∈ Z`, emit `Z∖{p} ⇒ p` with
/// confidence `wsupport(Z)/wsupport(Z∖{p})`, kept when it meets
/// `min_wconf`. Bodies whose support is zero (all body pages weightless)
/// carry no signal and are skipped. Confidence is capped at 1 so it stays
/// a score even when the head weight exceeds the body mean.
pub fn generate_rules(
    itemsets: &[(Vec<String>, f64)],
    log: &SessionLog,
    weights: &PageWeightTable,
    params: &MiningParams,
) -> RuleBase {
    let known: BTreeMap<&[String], f64> = itemsets
        .iter()
        .map(|(items, support)| (items.as_slice(), *support))
        .collect();

    let mut rules = Vec::new();
    for (itemset, support) in itemsets {
        if itemset.len() < 2 {
            continue;
        }
        for (skip, head) in itemset.iter().enumerate() {
            let mut body: Vec<String> = itemset.clone();
            body.remove(skip);
            // The body may have fallen below the mining threshold (mean
            // weight is not anti-monotone), so fall back to a direct count.
            let body_support = known
                .get(body.as_slice())
                .copied()
                .unwrap_or_else(|| wsupport(&body, log, weights));
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
    RuleBase { rules }
}

/// Mine itemsets and derive rules in one call.
pub fn mine_rules(
    log: &SessionLog,
    weights: &PageWeightTable,
    params: &MiningParams,
) -> RuleBase {
    let itemsets = mine_weighted_itemsets(log, weights, params);
    generate_rules(&itemsets, log, weights, params)
}
