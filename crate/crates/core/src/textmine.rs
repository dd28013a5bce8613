//! Page-text indexing and TF-IDF relevance scoring.
//!
//! Term frequency is max-normalized within each document, inverse
//! document frequency is the unsmoothed natural log `ln(N/df)`, and
//! scores are normalized per scoring batch so the best candidate gets 1.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::path::Path;
use std::sync::OnceLock;

use percent_encoding::percent_decode_str;
use serde::{Deserialize, Serialize};

use crate::Result;

/// Token multiset: term → occurrence count.
pub type TokenCounts = BTreeMap<String, u64>;

/// Terms dropped by the default tokenizer. Callers can swap in their own
/// list through the config.
pub fn default_stopwords() -> &'static BTreeSet<String> {
    static WORDS: OnceLock<BTreeSet<String>> = OnceLock::new();
    WORDS.get_or_init(|| {
        [
            "the", "a", "an", "and", "or", "of", "to", "in", "is", "it", "on", "for", "with",
            "as", "at", "by", "be", "this", "that", "are", "was", "were", "from", "we", "you",
            "not", "have", "has",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect()
    })
}

/// Lowercase, split on non-alphanumerics, drop tokens shorter than two
/// characters and stopwords.
pub fn tokenize(text: &str, stopwords: &BTreeSet<String>) -> TokenCounts {
    let mut counts = TokenCounts::new();
    for raw in text.split(|c: char| !c.is_alphanumeric()) {
        if raw.len() < 2 {
            continue;
        }
        let token = raw.to_lowercase();
        if stopwords.contains(&token) {
            continue;
        }
        *counts.entry(token).or_insert(0) += 1;
    }
    counts
}

/// Tokenized page texts. `vocabulary` is the union of all token sets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentCorpus {
    pub docs: BTreeMap<String, TokenCounts>,
    pub vocabulary: BTreeSet<String>,
}

impl DocumentCorpus {
    pub fn from_token_maps(docs: BTreeMap<String, TokenCounts>) -> DocumentCorpus {
        let vocabulary = docs.values().flat_map(|d| d.keys().cloned()).collect();
        DocumentCorpus { docs, vocabulary }
    }

    pub fn from_texts(
        texts: &BTreeMap<String, String>,
        stopwords: &BTreeSet<String>,
    ) -> DocumentCorpus {
        Self::from_token_maps(
            texts
                .iter()
                .map(|(page, text)| (page.clone(), tokenize(text, stopwords)))
                .collect(),
        )
    }

    /// Directory of plain-text files named by URL-encoded page identifier
    /// (`%2Fa.html` → `/a.html`).
    pub fn load_dir(dir: &Path, stopwords: &BTreeSet<String>) -> Result<DocumentCorpus> {
        let mut texts = BTreeMap::new();
        for entry in std::fs::read_dir(dir)? {
            let entry = entry?;
            if !entry.file_type()?.is_file() {
                continue;
            }
            let name = entry.file_name();
            let page = percent_decode_str(&name.to_string_lossy())
                .decode_utf8_lossy()
                .to_string();
            let text = std::fs::read_to_string(entry.path())?;
            texts.insert(page, text);
        }
        Ok(Self::from_texts(&texts, stopwords))
    }

    /// JSON file holding a map page → text.
    pub fn load_json(path: &Path, stopwords: &BTreeSet<String>) -> Result<DocumentCorpus> {
        let text = std::fs::read_to_string(path)?;
        let texts: BTreeMap<String, String> = serde_json::from_str(&text)?;
        Ok(Self::from_texts(&texts, stopwords))
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }
}

/// Max-normalized term frequencies and log inverse document frequencies.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TfIdfIndex {
    pub tf: BTreeMap<String, BTreeMap<String, f64>>,
    pub idf: BTreeMap<String, f64>,
}

/// Build the index: `tf(d,t) = count(t,d) / max count in d`,
/// `idf(t) = ln(N / df(t))`.
pub fn build_index(corpus: &DocumentCorpus) -> TfIdfIndex {
    let doc_count = corpus.doc_count() as f64;
    let mut df: BTreeMap<&String, u64> = BTreeMap::new();
    let mut tf = BTreeMap::new();
    for (page, counts) in &corpus.docs {
        let max = counts.values().copied().max().unwrap_or(0) as f64;
        let page_tf: BTreeMap<String, f64> = counts
            .iter()
            .map(|(term, &count)| (term.clone(), count as f64 / max))
            .collect();
        tf.insert(page.clone(), page_tf);
        for term in counts.keys() {
            *df.entry(term).or_insert(0) += 1;
        }
    }
    let idf = df
        .into_iter()
        .map(|(term, df)| (term.clone(), (doc_count / df as f64).ln()))
        .collect();
    TfIdfIndex { tf, idf }
}

/// Raw (un-normalized) relevance of one page to a query multiset:
/// `Σ_t tf(page,t) · idf(t) · count(t in query)`. Unindexed pages score 0.
pub fn raw_tfidf_score(index: &TfIdfIndex, page: &str, query: &TokenCounts) -> f64 {
    let Some(page_tf) = index.tf.get(page) else {
        return 0.0;
    };
    query
        .iter()
        .filter_map(|(term, &count)| {
            let tf = page_tf.get(term)?;
            let idf = index.idf.get(term)?;
            Some(tf * idf * count as f64)
        })
        .sum()
}

/// Score a batch of pages and normalize so the batch maximum is 1
/// (all zeros stay zero). Normalization preserves the raw rank order.
pub fn tfidf_score_batch(
    index: &TfIdfIndex,
    pages: &BTreeSet<String>,
    query: &TokenCounts,
) -> BTreeMap<String, f64> {
    let raw: BTreeMap<String, f64> = pages
        .iter()
        .map(|p| (p.clone(), raw_tfidf_score(index, p, query)))
        .collect();
    let max = raw.values().copied().fold(0.0f64, f64::max);
    if max <= 0.0 {
        return raw.keys().map(|p| (p.clone(), 0.0)).collect();
    }
    raw.into_iter().map(|(p, s)| (p, s / max)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corpus(docs: &[(&str, &str)]) -> DocumentCorpus {
        let texts: BTreeMap<String, String> = docs
            .iter()
            .map(|(p, t)| (p.to_string(), t.to_string()))
            .collect();
        DocumentCorpus::from_texts(&texts, default_stopwords())
    }

    fn query(terms: &[(&str, u64)]) -> TokenCounts {
        terms.iter().map(|(t, c)| (t.to_string(), *c)).collect()
    }

    #[test]
    fn tokenize_folds_case_and_drops_stopwords() {
        let tokens = tokenize("The Web, the WEB", default_stopwords());
        assert_eq!(tokens, query(&[("web", 2)]));
    }

    #[test]
    fn tokenize_empty_and_delimiters() {
        assert!(tokenize("", default_stopwords()).is_empty());
        let tokens = tokenize("a1-b2", default_stopwords());
        assert_eq!(tokens, query(&[("a1", 1), ("b2", 1)]));
        // single-character fragments are dropped
        assert!(tokenize("x y z", default_stopwords()).is_empty());
    }

    #[test]
    fn ubiquitous_term_has_zero_idf() {
        let c = corpus(&[("/a", "shared alpha"), ("/b", "shared beta")]);
        let index = build_index(&c);
        assert_eq!(index.idf["shared"], 0.0);
        assert!((index.idf["alpha"] - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn most_frequent_term_has_unit_tf() {
        let c = corpus(&[("/a", "alpha alpha beta")]);
        let index = build_index(&c);
        assert_eq!(index.tf["/a"]["alpha"], 1.0);
        assert_eq!(index.tf["/a"]["beta"], 0.5);
    }

    #[test]
    fn three_doc_fixture_matches_hand_computation() {
        let c = corpus(&[
            ("/d1", "alpha alpha beta"),
            ("/d2", "alpha gamma gamma gamma"),
            ("/d3", "beta beta delta"),
        ]);
        let index = build_index(&c);
        let q = query(&[("alpha", 1), ("beta", 2)]);

        let ln32 = (3.0f64 / 2.0).ln();
        // d1: tf(alpha)=1, tf(beta)=0.5 → 1·ln(3/2)·1 + 0.5·ln(3/2)·2
        assert!((raw_tfidf_score(&index, "/d1", &q) - 2.0 * ln32).abs() < 1e-12);
        // d2: tf(alpha)=1/3 → ln(3/2)/3
        assert!((raw_tfidf_score(&index, "/d2", &q) - ln32 / 3.0).abs() < 1e-12);
        // d3: tf(beta)=1 → 2·ln(3/2)
        assert!((raw_tfidf_score(&index, "/d3", &q) - 2.0 * ln32).abs() < 1e-12);

        let pages: BTreeSet<String> =
            ["/d1", "/d2", "/d3"].iter().map(|s| s.to_string()).collect();
        let batch = tfidf_score_batch(&index, &pages, &q);
        assert_eq!(batch["/d1"], 1.0);
        assert_eq!(batch["/d3"], 1.0);
        assert!((batch["/d2"] - 1.0 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn query_with_no_overlap_scores_zero() {
        let c = corpus(&[("/a", "alpha beta")]);
        let index = build_index(&c);
        assert_eq!(raw_tfidf_score(&index, "/a", &query(&[("missing", 3)])), 0.0);
        assert_eq!(raw_tfidf_score(&index, "/unindexed", &query(&[("alpha", 1)])), 0.0);
    }

    #[test]
    fn exclusive_term_puts_batch_max_on_its_page() {
        let c = corpus(&[("/a", "special topic"), ("/b", "other content")]);
        let index = build_index(&c);
        let pages: BTreeSet<String> = ["/a", "/b"].iter().map(|s| s.to_string()).collect();
        let batch = tfidf_score_batch(&index, &pages, &query(&[("special", 1)]));
        assert_eq!(batch["/a"], 1.0);
        assert_eq!(batch["/b"], 0.0);
    }

    #[test]
    fn all_zero_batch_stays_zero() {
        let c = corpus(&[("/a", "alpha")]);
        let index = build_index(&c);
        let pages: BTreeSet<String> = ["/a"].iter().map(|s| s.to_string()).collect();
        let batch = tfidf_score_batch(&index, &pages, &query(&[("nothing", 1)]));
        assert_eq!(batch["/a"], 0.0);
    }

    #[test]
    fn adding_a_containing_doc_lowers_idf() {
        let small = corpus(&[("/a", "alpha"), ("/b", "beta")]);
        let grown = corpus(&[("/a", "alpha"), ("/b", "beta"), ("/c", "alpha more")]);
        let idf_small = build_index(&small).idf["alpha"];
        let idf_grown = build_index(&grown).idf["alpha"];
        assert!(idf_grown < idf_small);
    }

    proptest! {
        /// Raw score is monotone nondecreasing in query multiplicity.
        #[test]
        fn raw_score_monotone_in_multiplicity(base in 1u64..5, extra in 1u64..5) {
            let c = corpus(&[("/a", "alpha beta gamma"), ("/b", "beta")]);
            let index = build_index(&c);
            let lo = raw_tfidf_score(&index, "/a", &query(&[("alpha", base)]));
            let hi = raw_tfidf_score(&index, "/a", &query(&[("alpha", base + extra)]));
            prop_assert!(hi >= lo);
        }

        /// Batch normalization never reorders pages.
        #[test]
        fn batch_normalization_preserves_rank(
            texts in proptest::collection::vec("[a-d]{2,6}( [a-d]{2,6}){0,4}", 2..5),
            q in proptest::collection::btree_map("[a-d]{2,6}", 1u64..4, 1..4),
        ) {
            let docs: BTreeMap<String, String> = texts
                .iter()
                .enumerate()
                .map(|(i, t)| (format!("/p{i}"), t.clone()))
                .collect();
            let c = DocumentCorpus::from_texts(&docs, default_stopwords());
            let index = build_index(&c);
            let pages: BTreeSet<String> = docs.keys().cloned().collect();
            let raw: Vec<(String, f64)> = pages
                .iter()
                .map(|p| (p.clone(), raw_tfidf_score(&index, p, &q)))
                .collect();
            let batch = tfidf_score_batch(&index, &pages, &q);
            for a in &raw {
                for b in &raw {
                    if a.1 > b.1 {
                        prop_assert!(batch[&a.0] > batch[&b.0]);
                    }
                }
            }
        }
    }
}
