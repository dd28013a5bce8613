//! Trained model bundle and configuration.
//!
//! The bundle persists everything the online pipeline needs as one
//! versioned, human-auditable JSON file: page weights, mined rules,
//! usage clusters, the site map, the tokenized corpus and its TF-IDF
//! index, plus the parameters used at train time.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cluster::{cluster_pages, Clustering};
use crate::logparse::{page_stats, FilterRules, SessionLog, SiteMap};
use crate::pageweight::PageWeightTable;
use crate::recommender::DissimilarityVariant;
use crate::textmine::{build_index, default_stopwords, DocumentCorpus, TfIdfIndex};
use crate::warm::{mine_rules, MiningParams, RuleBase};
use crate::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

/// Relative weights of the three fused components; must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FusionWeights {
    pub rec: f64,
    pub hub: f64,
    pub text: f64,
}

impl Default for FusionWeights {
    fn default() -> Self {
        FusionWeights {
            rec: 1.0 / 3.0,
            hub: 1.0 / 3.0,
            text: 1.0 / 3.0,
        }
    }
}

impl FusionWeights {
    /// The rule-score-only baseline used for comparison runs.
    pub fn rec_only() -> Self {
        FusionWeights {
            rec: 1.0,
            hub: 0.0,
            text: 0.0,
        }
    }
}

/// Every tunable of the pipeline. Missing fields in a config file fall
/// back to these defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub session_timeout_seconds: f64,
    pub min_wsupport: f64,
    pub min_wconf: f64,
    pub max_itemset_size: usize,
    pub cluster_threshold: f64,
    pub hits_tolerance: f64,
    pub hits_max_iterations: usize,
    pub fusion_weights: FusionWeights,
    /// Recommendation count when the caller gives none; also the width of
    /// the seed-rule stage, which keeps rankings prefix-consistent across
    /// requested n.
    pub top_n: usize,
    /// Share of each held-out session observed before the rest becomes
    /// the relevance target.
    pub eval_prefix_fraction: f64,
    pub stopwords: Vec<String>,
    pub filters: FilterRules,
    pub dissimilarity_variant: DissimilarityVariant,
}

impl Default for Config {
    fn default() -> Self {
        let mining = MiningParams::default();
        Config {
            session_timeout_seconds: crate::logparse::DEFAULT_SESSION_TIMEOUT_SECS,
            min_wsupport: mining.min_wsupport,
            min_wconf: mining.min_wconf,
            max_itemset_size: mining.max_itemset_size,
            cluster_threshold: 0.5,
            hits_tolerance: crate::hits::DEFAULT_HITS_TOLERANCE,
            hits_max_iterations: crate::hits::DEFAULT_HITS_MAX_ITERATIONS,
            fusion_weights: FusionWeights::default(),
            top_n: 5,
            eval_prefix_fraction: 0.5,
            stopwords: default_stopwords().iter().cloned().collect(),
            filters: FilterRules::default(),
            dissimilarity_variant: DissimilarityVariant::default(),
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.session_timeout_seconds <= 0.0 {
            return Err(Error::InvalidConfig("session timeout must be positive".into()));
        }
        self.mining_params().validate()?;
        if !(0.0..=1.0).contains(&self.cluster_threshold) {
            return Err(Error::InvalidConfig("cluster_threshold must be in [0,1]".into()));
        }
        if self.hits_tolerance <= 0.0 {
            return Err(Error::InvalidConfig("hits_tolerance must be positive".into()));
        }
        if self.hits_max_iterations == 0 {
            return Err(Error::InvalidConfig("hits_max_iterations must be ≥ 1".into()));
        }
        let fw = &self.fusion_weights;
        if fw.rec < 0.0 || fw.hub < 0.0 || fw.text < 0.0 {
            return Err(Error::InvalidConfig("fusion weights must be nonnegative".into()));
        }
        if ((fw.rec + fw.hub + fw.text) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig("fusion weights must sum to 1".into()));
        }
        if self.top_n == 0 {
            return Err(Error::InvalidConfig("top_n must be ≥ 1".into()));
        }
        if !(self.eval_prefix_fraction > 0.0 && self.eval_prefix_fraction < 1.0) {
            return Err(Error::InvalidConfig("eval_prefix_fraction must be in (0,1)".into()));
        }
        Ok(())
    }

    pub fn mining_params(&self) -> MiningParams {
        MiningParams {
            min_wsupport: self.min_wsupport,
            min_wconf: self.min_wconf,
            max_itemset_size: self.max_itemset_size,
        }
    }

    pub fn stopword_set(&self) -> BTreeSet<String> {
        self.stopwords.iter().cloned().collect()
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)?;
        let config: Config = serde_json::from_str(&text)?;
        config.validate()?;
        Ok(config)
    }
}

/// Everything the online side needs, frozen at train time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    pub params: Config,
    pub page_weights: PageWeightTable,
    pub rules: RuleBase,
    pub clustering: Clustering,
    pub sitemap: SiteMap,
    /// Kept alongside the index: the online query is built from the
    /// session pages' token multisets.
    pub corpus: DocumentCorpus,
    pub tfidf: TfIdfIndex,
}

impl ModelBundle {
    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<ModelBundle> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<ModelBundle> {
        #[derive(Deserialize)]
        struct VersionProbe {
            format_version: u32,
        }
        let probe: VersionProbe = serde_json::from_str(text)?;
        if probe.format_version != FORMAT_VERSION {
            return Err(Error::ModelVersion {
                found: probe.format_version,
                expected: FORMAT_VERSION,
            });
        }
        Ok(serde_json::from_str(text)?)
    }
}

/// The offline pipeline: weights from stats, rules from the weighted
/// miner, clusters from usage vectors, TF-IDF from the corpus.
pub fn train_model(
    log: &SessionLog,
    sitemap: SiteMap,
    corpus: DocumentCorpus,
    config: Config,
) -> Result<ModelBundle> {
    config.validate()?;
    if log.is_empty() {
        return Err(Error::EmptyUsageData);
    }
    let stats = page_stats(log, &sitemap);
    let page_weights = PageWeightTable::from_stats(&stats)?;
    let rules = mine_rules(log, &page_weights, &config.mining_params());
    let clustering = cluster_pages(log, &page_weights, config.cluster_threshold)?;
    let tfidf = build_index(&corpus);
    Ok(ModelBundle {
        format_version: FORMAT_VERSION,
        params: config,
        page_weights,
        rules,
        clustering,
        sitemap,
        corpus,
        tfidf,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logparse::{Session, Visit};

    fn tiny_log() -> SessionLog {
        let sessions = vec![
            Session {
                session_id: "s1".into(),
                visits: vec![
                    Visit { page: "/a".into(), timestamp: 0.0, dwell_seconds: 10.0 },
                    Visit { page: "/b".into(), timestamp: 10.0, dwell_seconds: 10.0 },
                ],
            },
            Session {
                session_id: "s2".into(),
                visits: vec![
                    Visit { page: "/a".into(), timestamp: 100.0, dwell_seconds: 5.0 },
                    Visit { page: "/b".into(), timestamp: 105.0, dwell_seconds: 5.0 },
                ],
            },
        ];
        SessionLog::from_sessions(sessions)
    }

    fn tiny_corpus() -> DocumentCorpus {
        let texts: std::collections::BTreeMap<String, String> = [
            ("/a".to_string(), "alpha topic".to_string()),
            ("/b".to_string(), "beta topic".to_string()),
        ]
        .into_iter()
        .collect();
        DocumentCorpus::from_texts(&texts, default_stopwords())
    }

    #[test]
    fn default_config_is_valid() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut c = Config::default();
        c.fusion_weights = FusionWeights { rec: 0.5, hub: 0.5, text: 0.5 };
        assert!(c.validate().is_err());

        let mut c = Config::default();
        c.top_n = 0;
        assert!(c.validate().is_err());

        let mut c = Config::default();
        c.min_wconf = 1.5;
        assert!(c.validate().is_err());
    }

    #[test]
    fn partial_config_file_uses_defaults() {
        let config: Config = serde_json::from_str(r#"{"top_n": 9}"#).unwrap();
        assert_eq!(config.top_n, 9);
        assert_eq!(config.min_wconf, Config::default().min_wconf);
    }

    #[test]
    fn bundle_roundtrips_byte_stable() {
        let model = train_model(
            &tiny_log(),
            SiteMap::default(),
            tiny_corpus(),
            Config::default(),
        )
        .unwrap();
        let json = model.to_json().unwrap();
        let back = ModelBundle::from_json(&json).unwrap();
        assert_eq!(model, back);
        assert_eq!(json, back.to_json().unwrap());
    }

    #[test]
    fn version_mismatch_is_rejected() {
        let model = train_model(
            &tiny_log(),
            SiteMap::default(),
            tiny_corpus(),
            Config::default(),
        )
        .unwrap();
        let json = model.to_json().unwrap().replace(
            &format!("\"format_version\": {FORMAT_VERSION}"),
            "\"format_version\": 99",
        );
        match ModelBundle::from_json(&json) {
            Err(Error::ModelVersion { found: 99, .. }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }

    #[test]
    fn empty_log_fails_training() {
        let result = train_model(
            &SessionLog::default(),
            SiteMap::default(),
            DocumentCorpus::default(),
            Config::default(),
        );
        assert!(matches!(result, Err(Error::EmptyUsageData)));
    }
}
