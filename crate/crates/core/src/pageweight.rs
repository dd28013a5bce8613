//! Quantitative page weights from raw usage statistics.
//!
//! Three scores per page, all in `[0, 1]`:
//!
//! * duration: dwell time per byte, normalized by the site-wide maximum
//! * frequency: share of all visits, damped by the page's indegree
//! * weight: the harmonic combination `2·f·d / (f + d)` of the two

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::logparse::PageStats;
use crate::{Error, Result};

/// Per-page duration, frequency and combined weight scores. All three
/// maps share the same key set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PageWeightTable {
    pub duration_score: BTreeMap<String, f64>,
    pub frequency_score: BTreeMap<String, f64>,
    pub weight: BTreeMap<String, f64>,
}

impl PageWeightTable {
    /// Build the full table from raw stats.
    pub fn from_stats(stats: &BTreeMap<String, PageStats>) -> Result<PageWeightTable> {
        let duration = duration_score(stats);
        let frequency = frequency_score(stats)?;
        let weight = duration
            .iter()
            .map(|(page, d)| (page.clone(), page_weight(*d, frequency[page])))
            .collect();
        Ok(PageWeightTable {
            duration_score: duration,
            frequency_score: frequency,
            weight,
        })
    }

    /// All pages at a fixed weight; used by tests exercising the classic
    /// (unweighted) degeneration of the miner.
    pub fn uniform<I: IntoIterator<Item = String>>(pages: I, value: f64) -> PageWeightTable {
        let weight: BTreeMap<String, f64> = pages.into_iter().map(|p| (p, value)).collect();
        PageWeightTable {
            duration_score: weight.clone(),
            frequency_score: weight.clone(),
            weight,
        }
    }

    /// Combined weight of a page; 0 for pages the table does not know.
    pub fn weight_of(&self, page: &str) -> f64 {
        self.weight.get(page).copied().unwrap_or(0.0)
    }
}

/// Duration score: `(dwell/size) / max_Q (dwell/size)`. All zeros when no
/// page accumulated any dwell.
pub fn duration_score(stats: &BTreeMap<String, PageStats>) -> BTreeMap<String, f64> {
    let ratio = |s: &PageStats| s.total_dwell_seconds / s.size_bytes.max(1) as f64;
    let max = stats.values().map(ratio).fold(0.0f64, f64::max);
    stats
        .iter()
        .map(|(page, s)| {
            let score = if max > 0.0 { ratio(s) / max } else { 0.0 };
            (page.clone(), score)
        })
        .collect()
}

/// Frequency score: `(visits(p) / Σ visits) · (1 / indegree(p))`.
pub fn frequency_score(stats: &BTreeMap<String, PageStats>) -> Result<BTreeMap<String, f64>> {
    let total: u64 = stats.values().map(|s| s.visit_count).sum();
    if total == 0 {
        return Err(Error::EmptyUsageData);
    }
    Ok(stats
        .iter()
        .map(|(page, s)| {
            let share = s.visit_count as f64 / total as f64;
            (page.clone(), share / s.indegree.max(1) as f64)
        })
        .collect())
}

/// Harmonic combination `2·f·d / (f + d)`, with the 0/0 case pinned to 0.
pub fn page_weight(duration: f64, frequency: f64) -> f64 {
    let sum = duration + frequency;
    if sum == 0.0 {
        0.0
    } else {
        2.0 * frequency * duration / sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stats(entries: &[(&str, f64, u64, u64, u64)]) -> BTreeMap<String, PageStats> {
        entries
            .iter()
            .map(|(page, dwell, visits, indeg, size)| {
                (
                    page.to_string(),
                    PageStats {
                        total_dwell_seconds: *dwell,
                        visit_count: *visits,
                        indegree: *indeg,
                        size_bytes: *size,
                    },
                )
            })
            .collect()
    }

    #[test]
    fn single_page_is_its_own_duration_max() {
        let s = stats(&[("/a", 30.0, 1, 1, 3)]);
        assert_eq!(duration_score(&s)["/a"], 1.0);
    }

    #[test]
    fn duration_normalizes_by_best_ratio() {
        let s = stats(&[("/a", 8.0, 1, 1, 2), ("/b", 4.0, 1, 1, 2)]);
        let d = duration_score(&s);
        assert_eq!(d["/a"], 1.0);
        assert_eq!(d["/b"], 0.5);
    }

    #[test]
    fn all_zero_dwells_give_zero_scores() {
        let s = stats(&[("/a", 0.0, 1, 1, 1), ("/b", 0.0, 1, 1, 1)]);
        assert!(duration_score(&s).values().all(|&v| v == 0.0));
    }

    #[test]
    fn frequency_follows_visit_share_and_indegree() {
        let s = stats(&[("/p", 0.0, 3, 2, 1), ("/q", 0.0, 7, 1, 1)]);
        let f = frequency_score(&s).unwrap();
        assert!((f["/p"] - 0.15).abs() < 1e-12);
        assert!((f["/q"] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn sole_page_sole_visit_scores_one() {
        let s = stats(&[("/p", 0.0, 1, 1, 1)]);
        assert_eq!(frequency_score(&s).unwrap()["/p"], 1.0);
    }

    #[test]
    fn indegree_divides_the_share() {
        let s = stats(&[("/p", 0.0, 5, 5, 1)]);
        assert!((frequency_score(&s).unwrap()["/p"] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn zero_total_visits_is_an_error() {
        let s = stats(&[("/p", 1.0, 0, 1, 1)]);
        assert!(matches!(frequency_score(&s), Err(Error::EmptyUsageData)));
    }

    #[test]
    fn weight_examples() {
        assert_eq!(page_weight(0.5, 0.5), 0.5);
        assert_eq!(page_weight(0.0, 1.0), 0.0);
        assert!((page_weight(0.8, 0.2) - 0.32).abs() < 1e-12);
        assert_eq!(page_weight(0.0, 0.0), 0.0);
    }

    #[test]
    fn table_shares_key_set_and_has_a_duration_maximizer() {
        let s = stats(&[("/a", 8.0, 2, 1, 2), ("/b", 4.0, 3, 2, 2)]);
        let table = PageWeightTable::from_stats(&s).unwrap();
        let keys: Vec<&String> = table.duration_score.keys().collect();
        assert_eq!(keys, table.frequency_score.keys().collect::<Vec<_>>());
        assert_eq!(keys, table.weight.keys().collect::<Vec<_>>());
        assert!(table.duration_score.values().any(|&v| v == 1.0));
    }

    proptest! {
        /// Harmonic-mean bounds: weight ≤ min(2f, 2d) and ≤ max(f, d).
        #[test]
        fn weight_respects_harmonic_bounds(f in 0.0f64..=1.0, d in 0.0f64..=1.0) {
            let w = page_weight(d, f);
            prop_assert!(w >= 0.0);
            prop_assert!(w <= 2.0 * f.min(d) + 1e-15);
            prop_assert!(w <= f.max(d) + 1e-15);
        }

        /// Holding one argument fixed and positive, the weight strictly
        /// increases in the other.
        #[test]
        fn weight_is_monotone(f in 0.01f64..=1.0, d in 0.01f64..=0.99, bump in 0.001f64..=0.01) {
            prop_assert!(page_weight(d + bump, f) > page_weight(d, f));
        }

        /// Scaling every dwell by the same constant leaves duration scores
        /// unchanged.
        #[test]
        fn duration_is_scale_invariant(
            dwells in proptest::collection::vec(0.0f64..100.0, 1..8),
            scale in 0.1f64..50.0,
        ) {
            let base: BTreeMap<String, PageStats> = dwells
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    (format!("/p{i}"), PageStats {
                        total_dwell_seconds: *d,
                        visit_count: 1,
                        indegree: 1,
                        size_bytes: (i as u64 % 3) + 1,
                    })
                })
                .collect();
            let scaled: BTreeMap<String, PageStats> = base
                .iter()
                .map(|(k, s)| (k.clone(), PageStats {
                    total_dwell_seconds: s.total_dwell_seconds * scale,
                    ..*s
                }))
                .collect();
            let a = duration_score(&base);
            let b = duration_score(&scaled);
            for (k, v) in &a {
                prop_assert!((v - b[k]).abs() < 1e-12);
            }
        }
    }
}
