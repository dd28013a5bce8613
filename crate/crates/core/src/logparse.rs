//! Access-log parsing, sessionization and raw per-page statistics.
//!
//! Two input forms are supported: W3C Common Log Format text files (one
//! record per line, combined-format referrer/user-agent fields optional)
//! and pre-sessionized CSV with header `session_id,page,timestamp,dwell_seconds`.
//! Both normalize page identifiers the same way: query string and fragment
//! dropped, trailing slash collapsed.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default inactivity gap that closes a session, in seconds.
pub const DEFAULT_SESSION_TIMEOUT_SECS: f64 = 1800.0;

/// One parsed access-log record.
///
/// `client_key` is the remote host concatenated with the user agent; it
/// only serves to separate visit streams and is never interpreted.
/// `status` and `user_agent` are kept so that filtering (non-2xx, asset
/// suffixes, crawler agents) can run after parsing — the parser itself
/// does not judge.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLogEntry {
    pub client_key: String,
    pub page: String,
    pub timestamp: f64,
    pub bytes: Option<u64>,
    pub status: u16,
    pub user_agent: String,
}

/// A single page visit inside a session.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Visit {
    pub page: String,
    pub timestamp: f64,
    pub dwell_seconds: f64,
}

/// A maximal run of visits by one client with inter-visit gaps below the
/// timeout. Visits are timestamp-nondecreasing and dwell is nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub session_id: String,
    pub visits: Vec<Visit>,
}

impl Session {
    pub fn pages(&self) -> BTreeSet<String> {
        self.visits.iter().map(|v| v.page.clone()).collect()
    }

    /// True when every page of `itemset` occurs somewhere in this session.
    pub fn contains_all(&self, itemset: &[String]) -> bool {
        itemset
            .iter()
            .all(|p| self.visits.iter().any(|v| &v.page == p))
    }
}

/// The transaction database for mining: sessions plus the set of all
/// pages observed in them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionLog {
    pub sessions: Vec<Session>,
    pub page_universe: BTreeSet<String>,
}

impl SessionLog {
    pub fn from_sessions(sessions: Vec<Session>) -> Self {
        let page_universe = sessions
            .iter()
            .flat_map(|s| s.visits.iter().map(|v| v.page.clone()))
            .collect();
        SessionLog {
            sessions,
            page_universe,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.sessions.is_empty()
    }
}

/// Site metadata: page sizes and hyperlink structure. Sizes are clamped
/// to at least one byte and outlinks only reference known pages; both
/// guards keep the downstream weight formulas free of zero divisions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "SiteMapFile", into = "SiteMapFile")]
pub struct SiteMap {
    pub pages: BTreeSet<String>,
    pub size_bytes: BTreeMap<String, u64>,
    pub outlinks: BTreeMap<String, BTreeSet<String>>,
}

impl SiteMap {
    pub fn size_of(&self, page: &str) -> u64 {
        self.size_bytes.get(page).copied().unwrap_or(1).max(1)
    }

    pub fn outlinks_of(&self, page: &str) -> Option<&BTreeSet<String>> {
        self.outlinks.get(page)
    }

    pub fn load(path: &Path) -> Result<SiteMap> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text)?;
        Ok(())
    }
}

/// On-disk form: `{ "pages": { "<page>": { "size": <int>, "outlinks": [...] } } }`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteMapFile {
    pages: BTreeMap<String, SiteMapFileEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SiteMapFileEntry {
    #[serde(default = "default_page_size")]
    size: u64,
    #[serde(default)]
    outlinks: BTreeSet<String>,
}

fn default_page_size() -> u64 {
    1
}

impl From<SiteMapFile> for SiteMap {
    fn from(file: SiteMapFile) -> Self {
        let mut map = SiteMap::default();
        for (page, entry) in &file.pages {
            map.pages.insert(page.clone());
            map.size_bytes.insert(page.clone(), entry.size.max(1));
            // Link targets missing from the page table are absorbed with a
            // default size rather than rejected.
            for target in &entry.outlinks {
                map.pages.insert(target.clone());
                map.size_bytes.entry(target.clone()).or_insert(1);
            }
            if !entry.outlinks.is_empty() {
                map.outlinks.insert(page.clone(), entry.outlinks.clone());
            }
        }
        map
    }
}

impl From<SiteMap> for SiteMapFile {
    fn from(map: SiteMap) -> Self {
        let pages = map
            .pages
            .iter()
            .map(|p| {
                (
                    p.clone(),
                    SiteMapFileEntry {
                        size: map.size_of(p),
                        outlinks: map.outlinks.get(p).cloned().unwrap_or_default(),
                    },
                )
            })
            .collect();
        SiteMapFile { pages }
    }
}

/// Raw per-page usage statistics, the input to the weight formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageStats {
    pub total_dwell_seconds: f64,
    pub visit_count: u64,
    /// Number of site pages linking here; floored at 1.
    pub indegree: u64,
    /// Page size in bytes; floored at 1.
    pub size_bytes: u64,
}

/// Record filters applied between parsing and sessionization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterRules {
    pub status_min: u16,
    pub status_max: u16,
    /// Requests whose page ends with one of these suffixes are dropped
    /// (static assets). Compared case-insensitively.
    pub skip_suffixes: Vec<String>,
    /// Requests whose user agent contains one of these substrings are
    /// dropped (crawler denylist). Compared case-insensitively.
    pub skip_user_agents: Vec<String>,
}

impl Default for FilterRules {
    fn default() -> Self {
        FilterRules {
            status_min: 200,
            status_max: 299,
            skip_suffixes: [
                ".css", ".js", ".png", ".jpg", ".jpeg", ".gif", ".ico", ".svg", ".woff",
                ".woff2", ".ttf",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            skip_user_agents: ["bot", "crawler", "spider"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

impl FilterRules {
    /// Keep everything; used where the caller wants raw entries.
    pub fn keep_all() -> Self {
        FilterRules {
            status_min: 0,
            status_max: u16::MAX,
            skip_suffixes: Vec::new(),
            skip_user_agents: Vec::new(),
        }
    }

    pub fn keeps(&self, entry: &RawLogEntry) -> bool {
        if entry.status < self.status_min || entry.status > self.status_max {
            return false;
        }
        let page = entry.page.to_ascii_lowercase();
        if self.skip_suffixes.iter().any(|s| page.ends_with(&s.to_ascii_lowercase())) {
            return false;
        }
        let agent = entry.user_agent.to_ascii_lowercase();
        if self
            .skip_user_agents
            .iter()
            .any(|s| !s.is_empty() && agent.contains(&s.to_ascii_lowercase()))
        {
            return false;
        }
        true
    }
}

/// Counters from a skip-and-count file read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    pub lines: usize,
    pub parsed: usize,
    pub malformed: usize,
    pub filtered: usize,
}

/// Canonical page identifier: query string and fragment dropped, trailing
/// slash collapsed (the root path `/` stays as is).
pub fn normalize_page(raw: &str) -> String {
    let mut page = raw;
    if let Some(idx) = page.find(['?', '#']) {
        page = &page[..idx];
    }
    let mut page = page.to_string();
    while page.len() > 1 && page.ends_with('/') {
        page.pop();
    }
    page
}

fn clf_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r#"^(\S+) (\S+) (\S+) \[([^\]]+)\] "([^"]*)" (\d{3}) (\S+)(?: "([^"]*)" "([^"]*)")?\s*$"#,
        )
        .expect("static CLF pattern compiles")
    })
}

/// Parse one Common Log Format record.
///
/// `line_no` is only used for error context. Status filtering is not done
/// here; a 404 parses fine.
pub fn parse_clf_line(line: &str, line_no: usize) -> Result<RawLogEntry> {
    let caps = clf_regex()
        .captures(line.trim_end())
        .ok_or_else(|| Error::log_parse(line_no, "not a Common Log Format record"))?;

    let host = &caps[1];
    let timestamp = chrono::DateTime::parse_from_str(&caps[4], "%d/%b/%Y:%H:%M:%S %z")
        .map_err(|e| Error::log_parse(line_no, format!("bad timestamp: {e}")))?
        .timestamp() as f64;
    if timestamp < 0.0 {
        return Err(Error::log_parse(line_no, "timestamp before epoch"));
    }

    let request = &caps[5];
    let mut parts = request.split_whitespace();
    let _method = parts
        .next()
        .ok_or_else(|| Error::log_parse(line_no, "empty request field"))?;
    let raw_path = parts
        .next()
        .ok_or_else(|| Error::log_parse(line_no, "request missing path"))?;
    let page = normalize_page(raw_path);
    if page.is_empty() {
        return Err(Error::log_parse(line_no, "empty page after normalization"));
    }

    let status: u16 = caps[6]
        .parse()
        .map_err(|_| Error::log_parse(line_no, "bad status code"))?;
    let bytes = match &caps[7] {
        "-" => None,
        s => Some(
            s.parse::<u64>()
                .map_err(|_| Error::log_parse(line_no, "bad byte count"))?,
        ),
    };
    let user_agent = caps.get(9).map_or("", |m| m.as_str()).to_string();

    Ok(RawLogEntry {
        client_key: format!("{host} {user_agent}"),
        page,
        timestamp,
        bytes,
        status,
        user_agent,
    })
}

/// Read a CLF stream, skipping (and counting) malformed lines and records
/// rejected by `filters`.
pub fn read_clf<R: Read>(reader: R, filters: &FilterRules) -> Result<(Vec<RawLogEntry>, ParseStats)> {
    let mut entries = Vec::new();
    let mut stats = ParseStats::default();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        stats.lines += 1;
        match parse_clf_line(&line, idx + 1) {
            Ok(entry) => {
                if filters.keeps(&entry) {
                    stats.parsed += 1;
                    entries.push(entry);
                } else {
                    stats.filtered += 1;
                }
            }
            Err(_) => stats.malformed += 1,
        }
    }
    Ok((entries, stats))
}

pub fn read_clf_file(path: &Path, filters: &FilterRules) -> Result<(Vec<RawLogEntry>, ParseStats)> {
    let file = std::fs::File::open(path)?;
    read_clf(file, filters)
}

/// Group entries into sessions: consecutive visits from the same client
/// with gaps at most `timeout_seconds` form one session.
///
/// Dwell of a visit is the gap to the next visit in the same session; the
/// last visit gets the mean dwell of the session's other visits (0 for a
/// single-visit session). Session ids are assigned deterministically:
/// clients in order of first appearance, sessions chronologically within
/// each client.
pub fn sessionize(entries: &[RawLogEntry], timeout_seconds: f64) -> SessionLog {
    let mut order: Vec<&str> = Vec::new();
    let mut by_client: BTreeMap<&str, Vec<&RawLogEntry>> = BTreeMap::new();
    for entry in entries {
        by_client
            .entry(entry.client_key.as_str())
            .or_insert_with(|| {
                order.push(entry.client_key.as_str());
                Vec::new()
            })
            .push(entry);
    }

    let mut sessions = Vec::new();
    let mut next_id = 0usize;
    for client in order {
        let mut stream = by_client.remove(client).unwrap_or_default();
        stream.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));

        let mut current: Vec<&RawLogEntry> = Vec::new();
        for entry in stream {
            if let Some(last) = current.last() {
                if entry.timestamp - last.timestamp > timeout_seconds {
                    sessions.push(close_session(&current, &mut next_id));
                    current.clear();
                }
            }
            current.push(entry);
        }
        if !current.is_empty() {
            sessions.push(close_session(&current, &mut next_id));
        }
    }

    SessionLog::from_sessions(sessions)
}

fn close_session(entries: &[&RawLogEntry], next_id: &mut usize) -> Session {
    let session_id = format!("s{:05}", *next_id);
    *next_id += 1;

    let n = entries.len();
    let mut visits = Vec::with_capacity(n);
    for i in 0..n {
        let dwell = if i + 1 < n {
            entries[i + 1].timestamp - entries[i].timestamp
        } else {
            0.0 // placeholder, patched below
        };
        visits.push(Visit {
            page: entries[i].page.clone(),
            timestamp: entries[i].timestamp,
            dwell_seconds: dwell,
        });
    }
    patch_last_dwell(&mut visits);
    Session { session_id, visits }
}

/// Last-visit dwell rule: the mean of the other visits' dwells, or 0 for
/// a single-visit session.
fn patch_last_dwell(visits: &mut [Visit]) {
    let n = visits.len();
    if n >= 2 {
        let sum: f64 = visits[..n - 1].iter().map(|v| v.dwell_seconds).sum();
        visits[n - 1].dwell_seconds = sum / (n - 1) as f64;
    }
}

/// Read a session CSV with header `session_id,page,timestamp,dwell_seconds`.
///
/// The dwell column may be empty; if any dwell in a session is absent the
/// whole session's dwells are recomputed from timestamps with the same
/// gap/mean rule `sessionize` uses.
pub fn read_session_csv<R: Read>(reader: R) -> Result<SessionLog> {
    #[derive(Debug, Deserialize)]
    struct Row {
        session_id: String,
        page: String,
        timestamp: f64,
        #[serde(default)]
        dwell_seconds: Option<f64>,
    }

    let mut csv_reader = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let mut order: Vec<String> = Vec::new();
    let mut rows: BTreeMap<String, Vec<Row>> = BTreeMap::new();
    for (idx, record) in csv_reader.deserialize::<Row>().enumerate() {
        let mut row: Row =
            record.map_err(|e| Error::log_parse(idx + 2, format!("bad CSV row: {e}")))?;
        row.page = normalize_page(&row.page);
        if row.page.is_empty() {
            return Err(Error::log_parse(idx + 2, "empty page after normalization"));
        }
        if row.timestamp < 0.0 {
            return Err(Error::log_parse(idx + 2, "negative timestamp"));
        }
        if let Some(d) = row.dwell_seconds {
            if d < 0.0 {
                return Err(Error::log_parse(idx + 2, "negative dwell"));
            }
        }
        rows.entry(row.session_id.clone())
            .or_insert_with(|| {
                order.push(row.session_id.clone());
                Vec::new()
            })
            .push(row);
    }

    let mut sessions = Vec::new();
    for session_id in order {
        let mut session_rows = rows.remove(&session_id).unwrap_or_default();
        session_rows.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
        let recompute = session_rows.iter().any(|r| r.dwell_seconds.is_none());
        let n = session_rows.len();
        let mut visits: Vec<Visit> = session_rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let dwell = if recompute {
                    if i + 1 < n {
                        session_rows[i + 1].timestamp - r.timestamp
                    } else {
                        0.0
                    }
                } else {
                    r.dwell_seconds.unwrap_or(0.0)
                };
                Visit {
                    page: r.page.clone(),
                    timestamp: r.timestamp,
                    dwell_seconds: dwell,
                }
            })
            .collect();
        if recompute {
            patch_last_dwell(&mut visits);
        }
        sessions.push(Session { session_id, visits });
    }

    Ok(SessionLog::from_sessions(sessions))
}

pub fn read_session_csv_file(path: &Path) -> Result<SessionLog> {
    let file = std::fs::File::open(path)?;
    read_session_csv(file)
}

/// Write a session CSV in the format `read_session_csv` accepts.
pub fn write_session_csv<W: Write>(log: &SessionLog, writer: W) -> Result<()> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    csv_writer.write_record(["session_id", "page", "timestamp", "dwell_seconds"])?;
    for session in &log.sessions {
        for visit in &session.visits {
            csv_writer.write_record([
                session.session_id.as_str(),
                visit.page.as_str(),
                &format!("{}", visit.timestamp),
                &format!("{}", visit.dwell_seconds),
            ])?;
        }
    }
    csv_writer.flush()?;
    Ok(())
}

/// Per-page totals feeding the weight formulas: dwell and visit counts from
/// the log, indegree and size from the site map. Pages missing from the
/// site map get size 1; pages nothing links to get indegree 1.
pub fn page_stats(log: &SessionLog, site: &SiteMap) -> BTreeMap<String, PageStats> {
    let mut indegree: BTreeMap<&str, u64> = BTreeMap::new();
    for (source, targets) in &site.outlinks {
        for target in targets {
            if target != source {
                *indegree.entry(target.as_str()).or_insert(0) += 1;
            }
        }
    }

    let mut stats: BTreeMap<String, PageStats> = log
        .page_universe
        .iter()
        .map(|page| {
            (
                page.clone(),
                PageStats {
                    total_dwell_seconds: 0.0,
                    visit_count: 0,
                    indegree: indegree.get(page.as_str()).copied().unwrap_or(0).max(1),
                    size_bytes: site.size_of(page),
                },
            )
        })
        .collect();

    for session in &log.sessions {
        for visit in &session.visits {
            if let Some(entry) = stats.get_mut(&visit.page) {
                entry.total_dwell_seconds += visit.dwell_seconds;
                entry.visit_count += 1;
            }
        }
    }

    stats
}
