//! Precision/coverage evaluation over held-out sessions.
//!
//! Each held-out session is split into an observed prefix (fed to the
//! recommender) and a holdout set of remaining pages (the relevance
//! target). Precision is the share of recommended pages that are
//! relevant; coverage the share of relevant pages that were recommended.
//! Both are aggregated as arithmetic means over the valid cases, with
//! undefined cases (nothing recommended, nothing relevant) counted but
//! excluded.

use std::collections::BTreeSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::logparse::SessionLog;
use crate::model::ModelBundle;
use crate::recommender::{recommend, ActiveSession};
use crate::{Error, Result};

/// One evaluation case: the observed page prefix and the disjoint,
/// non-empty holdout it should predict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalCase {
    pub observed_prefix: Vec<String>,
    pub holdout: BTreeSet<String>,
}

impl EvalCase {
    pub fn new(observed_prefix: Vec<String>, holdout: BTreeSet<String>) -> Result<EvalCase> {
        if observed_prefix.is_empty() || holdout.is_empty() {
            return Err(Error::InvalidInput(
                "eval case needs a non-empty prefix and holdout".into(),
            ));
        }
        if observed_prefix.iter().any(|p| holdout.contains(p)) {
            return Err(Error::InvalidInput(
                "eval prefix and holdout must be disjoint".into(),
            ));
        }
        Ok(EvalCase {
            observed_prefix,
            holdout,
        })
    }
}

/// Fraction of recommendations that are relevant. Undefined (None) when
/// nothing was recommended.
pub fn precision(recommended: &BTreeSet<String>, relevant: &BTreeSet<String>) -> Option<f64> {
    if recommended.is_empty() {
        return None;
    }
    let hits = recommended.intersection(relevant).count();
    Some(hits as f64 / recommended.len() as f64)
}

/// Fraction of relevant pages that were recommended. Undefined (None)
/// when nothing is relevant; an empty recommendation set covers 0.
pub fn coverage(recommended: &BTreeSet<String>, relevant: &BTreeSet<String>) -> Option<f64> {
    if relevant.is_empty() {
        return None;
    }
    let hits = recommended.intersection(relevant).count();
    Some(hits as f64 / relevant.len() as f64)
}

/// One aggregated row: metrics in percent at a given list length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub n: usize,
    pub precision_pct: f64,
    pub coverage_pct: f64,
}

/// Per-case outcome at one list length, kept for auditability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseDetail {
    pub case_index: usize,
    pub n: usize,
    pub recommended: Vec<String>,
    pub hits: usize,
    pub precision: Option<f64>,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub details: Vec<CaseDetail>,
    /// Cases whose precision was undefined (empty recommendation list),
    /// per n, counted but excluded from the means.
    pub skipped_precision_cases: Vec<(usize, usize)>,
}

impl EvalReport {
    /// Plot-ready CSV: `n,precision_pct,coverage_pct`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["n", "precision_pct", "coverage_pct"])?;
        for row in &self.rows {
            w.write_record([
                row.n.to_string(),
                format!("{}", row.precision_pct),
                format!("{}", row.coverage_pct),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Run the recommender over every case at every requested list length
/// and aggregate.
pub fn evaluate(model: &ModelBundle, cases: &[EvalCase], n_values: &[usize]) -> Result<EvalReport> {
    if cases.is_empty() {
        return Err(Error::InvalidInput("no evaluation cases".into()));
    }
    if n_values.is_empty() || n_values.contains(&0) {
        return Err(Error::InvalidInput("n values must be positive".into()));
    }

    let sessions: Vec<ActiveSession> = cases
        .iter()
        .map(|case| ActiveSession::from_pages(&case.observed_prefix, &model.page_weights).0)
        .collect();

    let mut report = EvalReport::default();
    for &n in n_values {
        let mut precision_sum = 0.0;
        let mut precision_count = 0usize;
        let mut coverage_sum = 0.0;
        let mut coverage_count = 0usize;
        let mut skipped = 0usize;

        for (idx, (case, session)) in cases.iter().zip(&sessions).enumerate() {
            let set = recommend(session, model, n);
            let recommended: BTreeSet<String> = set.pages().into_iter().collect();
            let hits = recommended.intersection(&case.holdout).count();
            let p = precision(&recommended, &case.holdout);
            let c = coverage(&recommended, &case.holdout);
            match p {
                Some(v) => {
                    precision_sum += v;
                    precision_count += 1;
                }
                None => skipped += 1,
            }
            if let Some(v) = c {
                coverage_sum += v;
                coverage_count += 1;
            }
            report.details.push(CaseDetail {
                case_index: idx,
                n,
                recommended: set.pages(),
                hits,
                precision: p,
                coverage: c,
            });
        }

        report.rows.push(EvalRow {
            n,
            precision_pct: if precision_count > 0 {
                100.0 * precision_sum / precision_count as f64
            } else {
                0.0
            },
            coverage_pct: if coverage_count > 0 {
                100.0 * coverage_sum / coverage_count as f64
            } else {
                0.0
            },
        });
        report.skipped_precision_cases.push((n, skipped));
    }
    Ok(report)
}

/// Split each held-out session into a prefix/holdout case. Distinct pages
/// in first-visit order; the first `fraction` share (at least one page,
/// at most all but one) is observed and the rest is the target. Sessions
/// with fewer than two distinct pages yield no case.
pub fn cases_from_log(log: &SessionLog, fraction: f64) -> Vec<EvalCase> {
    let mut cases = Vec::new();
    for session in &log.sessions {
        let mut ordered: Vec<String> = Vec::new();
        for visit in &session.visits {
            if !ordered.contains(&visit.page) {
                ordered.push(visit.page.clone());
            }
        }
        if ordered.len() < 2 {
            continue;
        }
        let split = ((ordered.len() as f64 * fraction).floor() as usize)
            .clamp(1, ordered.len() - 1);
        let holdout: BTreeSet<String> = ordered[split..].iter().cloned().collect();
        cases.push(EvalCase {
            observed_prefix: ordered[..split].to_vec(),
            holdout,
        });
    }
    cases
}
