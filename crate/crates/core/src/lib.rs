//! Hybrid web-page recommendation engine.
//!
//! The offline side mines weighted association rules from sessionized
//! access logs, clusters pages by usage pattern and builds a TF-IDF index
//! over page text. The online side scores the mined rules against an
//! active session, extends the seed pages through usage clusters, ranks
//! the candidate set with HITS hub scores and fuses in text relevance to
//! produce the final recommendation list.
//!
//! Modules follow the pipeline order:
//!
//! * [`logparse`] — access-log parsing, sessionization, per-page stats
//! * [`pageweight`] — duration/frequency/weight scores per page
//! * [`warm`] — weighted Apriori itemset mining and rule generation
//! * [`cluster`] — usage-pattern clustering of pages
//! * [`hits`] — candidate graph construction and hub/authority iteration
//! * [`textmine`] — tokenization and TF-IDF scoring
//! * [`recommender`] — the online seed → extend → rank → fuse pipeline
//! * [`eval`] — precision/coverage evaluation over held-out sessions
//! * [`model`] — trained model bundle, configuration, persistence
//! * [`synthgen`] — deterministic synthetic fixtures with known ground truth

pub mod cluster;
pub mod error;
pub mod eval;
pub mod hits;
pub mod logparse;
pub mod model;
pub mod pageweight;
pub mod recommender;
pub mod synthgen;
pub mod textmine;
pub mod warm;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
