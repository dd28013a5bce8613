//! Usage-pattern clustering: pages are grouped by which sessions they
//! occur in, not by their content. Pages that are visited together end
//! up together, which is what later lets rarely visited pages ride along
//! with popular cluster mates.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::logparse::SessionLog;
use crate::pageweight::PageWeightTable;
use crate::{Error, Result};

/// Sparse per-page occurrence vector over session dimensions. Each entry
/// maps a session id to the page's global weight; only positive weights
/// are stored, so a page whose weight is 0 (or that was never visited)
/// has an empty vector and will stay a singleton cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageUsageVector {
    pub page: String,
    pub occurrence: BTreeMap<String, f64>,
}

/// A partition of the page universe. Every page belongs to exactly one
/// cluster; singletons are allowed. Clusters are ordered by their
/// lexicographically smallest member.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub clusters: Vec<BTreeSet<String>>,
    pub assignment: BTreeMap<String, usize>,
}

impl Clustering {
    pub fn from_clusters(mut clusters: Vec<BTreeSet<String>>) -> Clustering {
        clusters.retain(|c| !c.is_empty());
        clusters.sort_by(|a, b| a.iter().next().cmp(&b.iter().next()));
        let assignment = clusters
            .iter()
            .enumerate()
            .flat_map(|(idx, cluster)| cluster.iter().map(move |p| (p.clone(), idx)))
            .collect();
        Clustering {
            clusters,
            assignment,
        }
    }

    /// Cluster containing `page`, if the page is known.
    pub fn cluster_of(&self, page: &str) -> Option<&BTreeSet<String>> {
        self.assignment.get(page).map(|&idx| &self.clusters[idx])
    }
}

/// One occurrence vector per page in the universe. The session dimension
/// is present iff the page was visited in that session and carries a
/// positive global weight.
pub fn build_usage_vectors(log: &SessionLog, weights: &PageWeightTable) -> Vec<PageUsageVector> {
    let mut vectors: BTreeMap<&String, BTreeMap<String, f64>> = log
        .page_universe
        .iter()
        .map(|p| (p, BTreeMap::new()))
        .collect();
    for session in &log.sessions {
        for visit in &session.visits {
            let weight = weights.weight_of(&visit.page);
            if weight > 0.0 {
                if let Some(vector) = vectors.get_mut(&visit.page) {
                    vector.insert(session.session_id.clone(), weight);
                }
            }
        }
    }
    vectors
        .into_iter()
        .map(|(page, occurrence)| PageUsageVector {
            page: page.clone(),
            occurrence,
        })
        .collect()
}

/// Sparse cosine similarity in `[0, 1]`; 0 when either vector is empty.
/// Values within 1e−12 of 1 are snapped to exactly 1 so identical-support
/// pages merge cleanly at threshold 1.
pub fn cosine_similarity(a: &PageUsageVector, b: &PageUsageVector) -> f64 {
    if a.occurrence.is_empty() || b.occurrence.is_empty() {
        return 0.0;
    }
    let mut dot = 0.0;
    for (session, value) in &a.occurrence {
        if let Some(other) = b.occurrence.get(session) {
            dot += value * other;
        }
    }
    if dot == 0.0 {
        return 0.0;
    }
    let norm2_a: f64 = a.occurrence.values().map(|v| v * v).sum();
    let norm2_b: f64 = b.occurrence.values().map(|v| v * v).sum();
    let cos = dot / (norm2_a * norm2_b).sqrt();
    if cos > 1.0 - 1e-12 {
        1.0
    } else {
        cos.max(0.0)
    }
}

/// Average-linkage agglomerative clustering.
///
/// Starting from singletons over the pages with non-empty vectors, the
/// pair of clusters with the highest average pairwise similarity merges
/// until no pair reaches `threshold`. Pages with empty vectors never
/// merge and are emitted as singletons. Ties pick the pair whose
/// lexicographically smallest members come first, which makes the result
/// independent of input order.
pub fn agglomerative_cluster(
    vectors: &[PageUsageVector],
    threshold: f64,
) -> Result<Clustering> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidConfig(format!(
            "cluster threshold {threshold} outside [0,1]"
        )));
    }

    let mut sorted: Vec<&PageUsageVector> = vectors.iter().collect();
    sorted.sort_by(|a, b| a.page.cmp(&b.page));
    sorted.dedup_by(|a, b| a.page == b.page);

    let mut singletons: Vec<BTreeSet<String>> = Vec::new();
    let mut active: Vec<&PageUsageVector> = Vec::new();
    for vector in sorted {
        if vector.occurrence.is_empty() {
            singletons.push([vector.page.clone()].into_iter().collect());
        } else {
            active.push(vector);
        }
    }

    let n = active.len();
    let mut sim = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let s = cosine_similarity(active[i], active[j]);
            sim[i][j] = s;
            sim[j][i] = s;
        }
    }

    // Clusters as index sets into `active`; member lists stay sorted so
    // element 0 is the representative used for tie-breaking.
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut total = 0.0;
                for &i in &clusters[a] {
                    for &j in &clusters[b] {
                        total += sim[i][j];
                    }
                }
                let avg = total / (clusters[a].len() * clusters[b].len()) as f64;
                let better = match best {
                    None => true,
                    Some((best_avg, best_a, best_b)) => {
                        avg > best_avg
                            || (avg == best_avg
                                && key_of(&clusters, a, b) < key_of_idx(&clusters, best_a, best_b))
                    }
                };
                if better {
                    best = Some((avg, a, b));
                }
            }
        }
        match best {
            Some((avg, a, b)) if avg >= threshold => {
                let merged_in = clusters.remove(b);
                clusters[a].extend(merged_in);
                clusters[a].sort_unstable();
            }
            _ => break,
        }
    }

    let mut out: Vec<BTreeSet<String>> = clusters
        .into_iter()
        .map(|members| members.into_iter().map(|i| active[i].page.clone()).collect())
        .collect();
    out.append(&mut singletons);
    Ok(Clustering::from_clusters(out))
}

fn key_of<'a>(clusters: &'a [Vec<usize>], a: usize, b: usize) -> (usize, usize) {
    key_of_idx(clusters, a, b)
}

fn key_of_idx(clusters: &[Vec<usize>], a: usize, b: usize) -> (usize, usize) {
    // Representatives are the smallest active-index members; active is
    // sorted by page name, so index order is lexicographic page order.
    let ra = clusters[a][0];
    let rb = clusters[b][0];
    (ra.min(rb), ra.max(rb))
}

/// Cluster straight from a log: build vectors, then merge.
pub fn cluster_pages(
    log: &SessionLog,
    weights: &PageWeightTable,
    threshold: f64,
) -> Result<Clustering> {
    let vectors = build_usage_vectors(log, weights);
    agglomerative_cluster(&vectors, threshold)
}
