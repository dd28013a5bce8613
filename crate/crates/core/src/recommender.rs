//! The online recommendation pipeline.
//!
//! Four stages against an immutable trained model:
//!
//! 1. score every mined rule against the active session and keep the top
//!    seed rules (match score × weighted confidence),
//! 2. extend the seed heads with their cluster mates — this is how pages
//!    that are rarely or never visited become recommendable,
//! 3. connect the candidate set through the site's hyperlinks and rank it
//!    with HITS hub scores,
//! 4. score the candidates' text against the session-derived query and
//!    fuse rule, hub and text components into the final ranking.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cluster::Clustering;
use crate::hits::{build_candidate_graph, hits_iterate, Primitivity};
use crate::logparse::normalize_page;
use crate::model::ModelBundle;
use crate::pageweight::PageWeightTable;
use crate::textmine::{tfidf_score_batch, TokenCounts};
use crate::warm::{RuleBase, WeightedRule};

/// How the per-page dissimilarity term treats the doubling constant:
/// `(2·Δ)²` (the default reading) or `2·Δ²`. Rank order within a rule
/// body size is unaffected either way.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DissimilarityVariant {
    #[default]
    DoubleThenSquare,
    SquareThenDouble,
}

/// The active user session: all visited pages, plus the significance
/// weight of each visited page that carries one. Zero weights are
/// represented by absence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ActiveSession {
    pub visited: BTreeSet<String>,
    pub weights: BTreeMap<String, f64>,
}

impl ActiveSession {
    /// Build from raw page identifiers. Pages get their global weight
    /// from the table; pages the model has never seen come back in the
    /// second slot so callers can warn about them.
    pub fn from_pages(pages: &[String], table: &PageWeightTable) -> (ActiveSession, Vec<String>) {
        let mut session = ActiveSession::default();
        let mut unknown = Vec::new();
        for raw in pages {
            let page = normalize_page(raw);
            if page.is_empty() {
                continue;
            }
            if !table.weight.contains_key(&page) && !unknown.contains(&page) {
                unknown.push(page.clone());
            }
            let weight = table.weight_of(&page);
            if weight > 0.0 {
                session.weights.insert(page.clone(), weight);
            }
            session.visited.insert(page);
        }
        (session, unknown)
    }

    fn weight_of(&self, page: &str) -> f64 {
        self.weights.get(page).copied().unwrap_or(0.0)
    }
}

/// A rule scored against the active session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredRule {
    pub rule: WeightedRule,
    pub match_score: f64,
    pub rec_score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Seed,
    ClusterExtension,
}

/// One recommended page with its component scores. `rec_score` is 0 for
/// pages that entered through cluster extension only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub page: String,
    pub rec_score: f64,
    pub hub_score: f64,
    pub text_score: f64,
    pub final_score: f64,
    pub provenance: Provenance,
}

/// Per-stage diagnostics emitted with every recommendation set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecommendTrace {
    pub session_pages: Vec<String>,
    pub seed: Vec<ScoredRule>,
    pub candidates: Vec<String>,
    pub hits_iterations: usize,
    pub hits_primitivity: Option<Primitivity>,
    pub dominant_eigenvalue: f64,
    pub pages_without_text: Vec<String>,
    pub notes: Vec<String>,
}

/// Final ranked recommendations, best first, deduplicated by page.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RecommendationSet {
    pub items: Vec<Recommendation>,
    pub trace: RecommendTrace,
}

impl RecommendationSet {
    pub fn pages(&self) -> Vec<String> {
        self.items.iter().map(|r| r.page.clone()).collect()
    }
}

/// Eq.-4 style weighted dissimilarity between the session vector and a
/// rule, summed over the rule's body pages. Terms where both weights are
/// zero are skipped.
pub fn dissimilarity(
    session: &ActiveSession,
    rule: &WeightedRule,
    weights: &PageWeightTable,
    variant: DissimilarityVariant,
) -> f64 {
    rule.body
        .iter()
        .filter_map(|page| {
            let ws = session.weight_of(page);
            let wr = weights.weight_of(page);
            let denom = ws + wr;
            if denom == 0.0 {
                return None;
            }
            let delta = ws - wr;
            let numer = match variant {
                DissimilarityVariant::DoubleThenSquare => (2.0 * delta) * (2.0 * delta),
                DissimilarityVariant::SquareThenDouble => 2.0 * delta * delta,
            };
            Some(numer / denom)
        })
        .sum()
}

/// Similarity in `[0, 1]`: `1 − sqrt(dissimilarity / m) / 4` with `m` the
/// body size. 1 exactly when the session matches the body weights.
pub fn match_score(
    session: &ActiveSession,
    rule: &WeightedRule,
    weights: &PageWeightTable,
    variant: DissimilarityVariant,
) -> f64 {
    let m = rule.body.len();
    if m == 0 {
        return 0.0;
    }
    let d = dissimilarity(session, rule, weights, variant);
    (1.0 - (d / m as f64).sqrt() / 4.0).clamp(0.0, 1.0)
}

pub fn score_rule(
    session: &ActiveSession,
    rule: &WeightedRule,
    weights: &PageWeightTable,
    variant: DissimilarityVariant,
) -> ScoredRule {
    let m = match_score(session, rule, weights, variant);
    ScoredRule {
        match_score: m,
        rec_score: m * rule.wconf,
        rule: rule.clone(),
    }
}

/// Score every rule whose head the session has not visited and keep the
/// top `n` by recommendation score; ties break on head then body.
pub fn seed_recommendations(
    session: &ActiveSession,
    rules: &RuleBase,
    weights: &PageWeightTable,
    n: usize,
    variant: DissimilarityVariant,
) -> Vec<ScoredRule> {
    let mut scored: Vec<ScoredRule> = rules
        .rules
        .iter()
        .filter(|r| !session.visited.contains(&r.head))
        .map(|r| score_rule(session, r, weights, variant))
        .collect();
    scored.sort_by(|a, b| {
        b.rec_score
            .total_cmp(&a.rec_score)
            .then_with(|| a.rule.head.cmp(&b.rule.head))
            .then_with(|| a.rule.body.cmp(&b.rule.body))
    });
    scored.truncate(n);
    scored
}

/// Candidate set: the seed heads plus every page sharing a cluster with
/// one, minus the session's own pages.
pub fn extend_with_clusters(
    seed: &[ScoredRule],
    clustering: &Clustering,
    session: &ActiveSession,
) -> BTreeSet<String> {
    let mut candidates: BTreeSet<String> = BTreeSet::new();
    for scored in seed {
        let head = &scored.rule.head;
        candidates.insert(head.clone());
        if let Some(cluster) = clustering.cluster_of(head) {
            candidates.extend(cluster.iter().cloned());
        }
    }
    for page in &session.visited {
        candidates.remove(page);
    }
    candidates
}

/// Run the full pipeline and return the top `n` recommendations.
///
/// The seed stage always uses the model's configured width, so for a
/// fixed session the rankings at different `n` are prefixes of the same
/// ordering.
pub fn recommend(session: &ActiveSession, model: &ModelBundle, n: usize) -> RecommendationSet {
    let params = &model.params;
    let variant = params.dissimilarity_variant;
    let mut trace = RecommendTrace {
        session_pages: session.visited.iter().cloned().collect(),
        ..RecommendTrace::default()
    };

    let seed = seed_recommendations(
        session,
        &model.rules,
        &model.page_weights,
        params.top_n,
        variant,
    );
    if model.rules.is_empty() {
        trace.notes.push("rule base is empty; no seed rules".into());
    } else if seed.is_empty() {
        trace
            .notes
            .push("no seed rules apply (all heads already visited)".into());
    }
    trace.seed = seed.clone();

    let candidates = extend_with_clusters(&seed, &model.clustering, session);
    trace.candidates = candidates.iter().cloned().collect();
    if candidates.is_empty() {
        trace.notes.push("empty candidate set".into());
        return RecommendationSet {
            items: Vec::new(),
            trace,
        };
    }

    // Stage 3: HITS hub ranking over the candidate graph. Without any
    // links there is no hub evidence and the component stays zero.
    let graph = build_candidate_graph(&candidates, &model.sitemap);
    let hub_component: BTreeMap<String, f64> = if graph.edge_count() == 0 {
        trace
            .notes
            .push("no links among candidates; hub component zero".into());
        trace.hits_primitivity = Some(Primitivity::NotPrimitive);
        candidates.iter().map(|p| (p.clone(), 0.0)).collect()
    } else {
        let scores = hits_iterate(&graph, params.hits_tolerance, params.hits_max_iterations);
        trace.hits_iterations = scores.iterations_used;
        trace.hits_primitivity = Some(scores.primitivity);
        trace.dominant_eigenvalue = scores.dominant_eigenvalue_estimate;
        let max = scores.hub.values().copied().fold(0.0f64, f64::max);
        candidates
            .iter()
            .map(|p| {
                let raw = scores.hub.get(p).copied().unwrap_or(0.0);
                (p.clone(), if max > 0.0 { raw / max } else { 0.0 })
            })
            .collect()
    };

    // Stage 4a: text relevance against the session-derived query (the
    // concatenated token multisets of the visited pages).
    let mut query = TokenCounts::new();
    for page in &session.visited {
        if let Some(tokens) = model.corpus.docs.get(page) {
            for (term, count) in tokens {
                *query.entry(term.clone()).or_insert(0) += count;
            }
        }
    }
    if query.is_empty() {
        trace
            .notes
            .push("session pages have no indexed text; text component zero".into());
    }
    let text_component = tfidf_score_batch(&model.tfidf, &candidates, &query);
    trace.pages_without_text = candidates
        .iter()
        .filter(|p| !model.corpus.docs.contains_key(*p))
        .cloned()
        .collect();

    // Page-level rule score: strongest seed rule recommending the page.
    let mut rec_component: BTreeMap<&String, f64> = BTreeMap::new();
    for scored in &seed {
        let entry = rec_component.entry(&scored.rule.head).or_insert(0.0);
        if scored.rec_score > *entry {
            *entry = scored.rec_score;
        }
    }

    let fw = params.fusion_weights;
    let mut items: Vec<Recommendation> = candidates
        .iter()
        .map(|page| {
            let rec_score = rec_component.get(page).copied().unwrap_or(0.0);
            let hub_score = hub_component[page];
            let text_score = text_component[page];
            Recommendation {
                page: page.clone(),
                rec_score,
                hub_score,
                text_score,
                final_score: fw.rec * rec_score + fw.hub * hub_score + fw.text * text_score,
                provenance: if rec_component.contains_key(page) {
                    Provenance::Seed
                } else {
                    Provenance::ClusterExtension
                },
            }
        })
        .collect();
    items.sort_by(|a, b| {
        b.final_score
            .total_cmp(&a.final_score)
            .then_with(|| a.page.cmp(&b.page))
    });
    items.truncate(n);

    RecommendationSet { items, trace }
}
