//! Deterministic synthetic logs, site maps and corpora with known
//! ground-truth structure, for fixtures and acceptance tests.
//!
//! A spec lists co-visit groups (future clusters), body→head patterns
//! (future rules) and per-page text. Sessions realize the blueprint units
//! round-robin; optional noise inserts or deletes single visits with a
//! per-session probability. Everything is a pure function of the spec,
//! seed included.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::logparse::{write_session_csv, Session, SessionLog, SiteMap, Visit};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RulePattern {
    pub body: Vec<String>,
    pub head: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthSpec {
    /// Total page universe; filler pages pad out whatever the blueprints
    /// do not name.
    pub page_count: usize,
    pub session_count: usize,
    pub cluster_blueprint: Vec<Vec<String>>,
    pub rule_blueprint: Vec<RulePattern>,
    pub text_blueprint: BTreeMap<String, String>,
    /// Per-session probability of one random page insertion and,
    /// independently, one random visit deletion.
    pub noise: f64,
    pub rng_seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            page_count: 0,
            session_count: 0,
            cluster_blueprint: Vec::new(),
            rule_blueprint: Vec::new(),
            text_blueprint: BTreeMap::new(),
            noise: 0.0,
            rng_seed: 0,
        }
    }
}

/// A prefix/relevant split suggested by the blueprint: observing the
/// first half of a co-visit group should predict the second half.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevanceCase {
    pub prefix: Vec<String>,
    pub relevant: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub injected_rules: Vec<RulePattern>,
    pub injected_clusters: Vec<Vec<String>>,
    pub relevance_cases: Vec<RelevanceCase>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthOutput {
    pub log: SessionLog,
    pub sitemap: SiteMap,
    pub corpus_text: BTreeMap<String, String>,
    pub ground_truth: GroundTruth,
}

fn validate(spec: &SynthSpec) -> Result<BTreeSet<String>> {
    if spec.session_count == 0 {
        return Err(Error::InvalidSpec("session_count must be ≥ 1".into()));
    }
    if !(0.0..1.0).contains(&spec.noise) {
        return Err(Error::InvalidSpec("noise must be in [0,1)".into()));
    }
    if spec.cluster_blueprint.is_empty() && spec.rule_blueprint.is_empty() {
        return Err(Error::InvalidSpec("no blueprints to realize".into()));
    }
    let mut named: BTreeSet<String> = BTreeSet::new();
    for group in &spec.cluster_blueprint {
        if group.is_empty() {
            return Err(Error::InvalidSpec("empty cluster group".into()));
        }
        named.extend(group.iter().cloned());
    }
    for rule in &spec.rule_blueprint {
        if rule.body.is_empty() {
            return Err(Error::InvalidSpec("rule with empty body".into()));
        }
        if rule.body.contains(&rule.head) {
            return Err(Error::InvalidSpec(format!(
                "rule head {} appears in its own body",
                rule.head
            )));
        }
        named.extend(rule.body.iter().cloned());
        named.insert(rule.head.clone());
    }
    named.extend(spec.text_blueprint.keys().cloned());
    if spec.page_count > 0 && spec.page_count < named.len() {
        return Err(Error::InvalidSpec(format!(
            "page_count {} below the {} blueprint pages",
            spec.page_count,
            named.len()
        )));
    }
    Ok(named)
}

enum Unit<'a> {
    Group(&'a [String]),
    Rule(&'a RulePattern),
}

pub fn generate(spec: &SynthSpec) -> Result<SynthOutput> {
    let named = validate(spec)?;
    let mut all_pages: Vec<String> = named.iter().cloned().collect();
    for i in 0..spec.page_count.saturating_sub(named.len()) {
        all_pages.push(format!("/extra{i:02}"));
    }
    all_pages.sort();

    let units: Vec<Unit> = spec
        .cluster_blueprint
        .iter()
        .map(|g| Unit::Group(g.as_slice()))
        .chain(spec.rule_blueprint.iter().map(Unit::Rule))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
    let mut sessions = Vec::with_capacity(spec.session_count);
    for i in 0..spec.session_count {
        let round = i / units.len();
        let mut pages: Vec<String> = match &units[i % units.len()] {
            Unit::Group(group) => {
                // rotate so page order varies while co-occurrence stays put
                let k = group.len();
                (0..k).map(|j| group[(j + round) % k].clone()).collect()
            }
            Unit::Rule(rule) => {
                let mut p = rule.body.clone();
                p.push(rule.head.clone());
                p
            }
        };

        if spec.noise > 0.0 {
            if rng.random::<f64>() < spec.noise {
                let page = all_pages[rng.random_range(0..all_pages.len())].clone();
                let at = rng.random_range(0..=pages.len());
                pages.insert(at, page);
            }
            if rng.random::<f64>() < spec.noise && pages.len() >= 2 {
                let at = rng.random_range(0..pages.len());
                pages.remove(at);
            }
        }

        let base = i as f64 * 10_000.0;
        let visits = pages
            .into_iter()
            .enumerate()
            .map(|(j, page)| Visit {
                page,
                timestamp: base + j as f64 * 10.0,
                dwell_seconds: 10.0,
            })
            .collect();
        sessions.push(Session {
            session_id: format!("synth{i:05}"),
            visits,
        });
    }

    let mut sitemap = SiteMap::default();
    for page in &all_pages {
        sitemap.pages.insert(page.clone());
        sitemap.size_bytes.insert(page.clone(), 1);
    }
    let mut add_link = |from: &String, to: &String| {
        if from != to {
            sitemap
                .outlinks
                .entry(from.clone())
                .or_default()
                .insert(to.clone());
        }
    };
    for group in &spec.cluster_blueprint {
        if group.len() >= 2 {
            for j in 0..group.len() {
                add_link(&group[j], &group[(j + 1) % group.len()]);
            }
        }
    }
    for rule in &spec.rule_blueprint {
        for body_page in &rule.body {
            add_link(body_page, &rule.head);
        }
    }

    let relevance_cases = spec
        .cluster_blueprint
        .iter()
        .filter(|g| g.len() >= 2)
        .map(|g| {
            let split = (g.len() / 2).max(1);
            RelevanceCase {
                prefix: g[..split].to_vec(),
                relevant: g[split..].to_vec(),
            }
        })
        .collect();

    Ok(SynthOutput {
        log: SessionLog::from_sessions(sessions),
        sitemap,
        corpus_text: spec.text_blueprint.clone(),
        ground_truth: GroundTruth {
            injected_rules: spec.rule_blueprint.clone(),
            injected_clusters: spec.cluster_blueprint.clone(),
            relevance_cases,
        },
    })
}

/// Write the three training inputs plus the ground truth under `dir`:
/// `log.csv`, `sitemap.json`, `docs.json`, `ground_truth.json`.
pub fn write_outputs(output: &SynthOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let log_file = std::fs::File::create(dir.join("log.csv"))?;
    write_session_csv(&output.log, log_file)?;
    output.sitemap.save(&dir.join("sitemap.json"))?;
    std::fs::write(
        dir.join("docs.json"),
        serde_json::to_string_pretty(&output.corpus_text)?,
    )?;
    std::fs::write(
        dir.join("ground_truth.json"),
        serde_json::to_string_pretty(&output.ground_truth)?,
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pageweight::PageWeightTable;
    use crate::warm::{mine_rules, MiningParams};

    fn pages(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn head_inside_body_is_rejected() {
        let spec = SynthSpec {
            session_count: 4,
            rule_blueprint: vec![RulePattern {
                body: pages(&["/a", "/c"]),
                head: "/a".into(),
            }],
            ..SynthSpec::default()
        };
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn fixed_seed_is_byte_identical() {
        let spec = SynthSpec {
            page_count: 8,
            session_count: 20,
            cluster_blueprint: vec![pages(&["/a", "/b", "/c"])],
            rule_blueprint: vec![RulePattern {
                body: pages(&["/a"]),
                head: "/d".into(),
            }],
            noise: 0.3,
            rng_seed: 99,
            ..SynthSpec::default()
        };
        let one = serde_json::to_string(&generate(&spec).unwrap()).unwrap();
        let two = serde_json::to_string(&generate(&spec).unwrap()).unwrap();
        assert_eq!(one, two);
    }

    #[test]
    fn noiseless_rule_blueprint_is_recovered_with_full_confidence() {
        let spec = SynthSpec {
            session_count: 10,
            rule_blueprint: vec![RulePattern {
                body: pages(&["/a", "/b"]),
                head: "/c".into(),
            }],
            ..SynthSpec::default()
        };
        let output = generate(&spec).unwrap();
        let weights = PageWeightTable::uniform(output.log.page_universe.iter().cloned(), 1.0);
        let rules = mine_rules(
            &output.log,
            &weights,
            &MiningParams {
                min_wsupport: 0.5,
                min_wconf: 0.9,
                max_itemset_size: 3,
            },
        );
        let recovered = rules
            .rules
            .iter()
            .find(|r| r.body == pages(&["/a", "/b"]) && r.head == "/c")
            .expect("blueprint rule mined");
        assert_eq!(recovered.wconf, 1.0);
    }

    #[test]
    fn disjoint_groups_cluster_apart_at_default_threshold() {
        let spec = SynthSpec {
            session_count: 12,
            cluster_blueprint: vec![
                pages(&["/g1a", "/g1b", "/g1c"]),
                pages(&["/g2a", "/g2b", "/g2c"]),
            ],
            ..SynthSpec::default()
        };
        let output = generate(&spec).unwrap();
        let stats = crate::logparse::page_stats(&output.log, &output.sitemap);
        let weights = PageWeightTable::from_stats(&stats).unwrap();
        let clustering = crate::cluster::cluster_pages(&output.log, &weights, 0.5).unwrap();
        assert_eq!(clustering.clusters.len(), 2);
        assert_eq!(
            clustering.cluster_of("/g1a"),
            clustering.cluster_of("/g1c")
        );
        assert_ne!(
            clustering.cluster_of("/g1a"),
            clustering.cluster_of("/g2a")
        );
    }

    #[test]
    fn relevance_cases_split_groups_in_half() {
        let spec = SynthSpec {
            session_count: 4,
            cluster_blueprint: vec![pages(&["/a", "/b", "/c", "/d"])],
            ..SynthSpec::default()
        };
        let output = generate(&spec).unwrap();
        let case = &output.ground_truth.relevance_cases[0];
        assert_eq!(case.prefix, pages(&["/a", "/b"]));
        assert_eq!(case.relevant, pages(&["/c", "/d"]));
    }

    #[test]
    fn outputs_write_and_reload() {
        let spec = SynthSpec {
            session_count: 6,
            cluster_blueprint: vec![pages(&["/a", "/b"])],
            text_blueprint: [("/a".to_string(), "alpha text".to_string())]
                .into_iter()
                .collect(),
            ..SynthSpec::default()
        };
        let output = generate(&spec).unwrap();
        let dir = std::env::temp_dir().join(format!("synthgen-test-{}", std::process::id()));
        write_outputs(&output, &dir).unwrap();
        let log = crate::logparse::read_session_csv_file(&dir.join("log.csv")).unwrap();
        assert_eq!(log, output.log);
        let site = SiteMap::load(&dir.join("sitemap.json")).unwrap();
        assert_eq!(site, output.sitemap);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
