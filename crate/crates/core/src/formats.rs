//! Line-oriented input formats: TREC run files, qrels, and `id<TAB>text`
//! collections. Every error carries its 1-based line number.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunEntry {
    pub query_id: String,
    pub doc_id: String,
    pub rank: u32,
    pub score: f64,
    pub tag: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct QrelEntry {
    pub query_id: String,
    pub doc_id: String,
    pub relevance: u32,
}

/// Yields `(line_no, line)` for every non-blank line, CR stripped.
fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(idx, line)| match line {
        Err(e) => Some(Err(e.into())),
        Ok(mut line) => {
            if line.ends_with('\r') {
                line.pop();
            }
            (!line.trim().is_empty()).then_some(Ok((idx + 1, line)))
        }
    })
}

/// Parses `queryId Q0 docId rank score tag` lines.
pub fn parse_run(reader: impl BufRead) -> Result<Vec<RunEntry>> {
    let mut entries = Vec::new();
    let mut seen_ranks: HashMap<String, HashSet<u32>> = HashMap::new();
    let mut seen_docs: HashMap<String, HashSet<String>> = HashMap::new();

    for line in content_lines(reader) {
        let (line_no, line) = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [query_id, _q0, doc_id, rank, score, tag] = fields[..] else {
            return Err(Error::parse(
                line_no,
                format!("expected 6 fields (qid Q0 docid rank score tag), found {}", fields.len()),
            ));
        };
        let rank: u32 = rank
            .parse()
            .ok()
            .filter(|r| *r >= 1)
            .ok_or_else(|| Error::parse(line_no, format!("rank {rank:?} is not a positive integer")))?;
        let score: f64 = score
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(line_no, format!("invalid score {score:?}")))?;

        if !seen_ranks.entry(query_id.to_string()).or_default().insert(rank) {
            return Err(Error::parse(
                line_no,
                format!("duplicate rank {rank} for query {query_id}"),
            ));
        }
        if !seen_docs.entry(query_id.to_string()).or_default().insert(doc_id.to_string()) {
            return Err(Error::parse(
                line_no,
                format!("document {doc_id} listed twice for query {query_id}"),
            ));
        }
        entries.push(RunEntry {
            query_id: query_id.to_string(),
            doc_id: doc_id.to_string(),
            rank,
            score,
            tag: tag.to_string(),
        });
    }
    Ok(entries)
}

/// Parses `queryId iteration docId relevance` lines.
pub fn parse_qrels(reader: impl BufRead) -> Result<Vec<QrelEntry>> {
    let mut entries = Vec::new();
    let mut seen: HashSet<(String, String)> = HashSet::new();

    for line in content_lines(reader) {
        let (line_no, line) = line?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [query_id, _iteration, doc_id, relevance] = fields[..] else {
            return Err(Error::parse(
                line_no,
                format!("expected 4 fields (qid 0 docid relevance), found {}", fields.len()),
            ));
        };
        let relevance: i64 = relevance
            .parse()
            .map_err(|_| Error::parse(line_no, format!("relevance {relevance:?} is not an integer")))?;
        let relevance = u32::try_from(relevance)
            .map_err(|_| Error::parse(line_no, format!("negative relevance {relevance}")))?;
        if !seen.insert((query_id.to_string(), doc_id.to_string())) {
            return Err(Error::parse(
                line_no,
                format!("duplicate judgment for ({query_id}, {doc_id})"),
            ));
        }
        entries.push(QrelEntry {
            query_id: query_id.to_string(),
            doc_id: doc_id.to_string(),
            relevance,
        });
    }
    Ok(entries)
}

/// Parses `id<TAB>text` lines; tabs after the first stay in the text.
pub fn parse_tsv_texts(reader: impl BufRead) -> Result<BTreeMap<String, String>> {
    let mut texts = BTreeMap::new();
    for line in content_lines(reader) {
        let (line_no, line) = line?;
        let Some((id, text)) = line.split_once('\t') else {
            return Err(Error::parse(line_no, "missing tab between id and text"));
        };
        if id.is_empty() {
            return Err(Error::parse(line_no, "empty id"));
        }
        if texts.insert(id.to_string(), text.to_string()).is_some() {
            return Err(Error::parse(line_no, format!("duplicate id {id}")));
        }
    }
    Ok(texts)
}

/// Opens `path` and runs `parse` over it, tagging errors with the path.
pub fn parse_file<T>(path: &Path, parse: impl FnOnce(std::io::BufReader<std::fs::File>) -> Result<T>) -> Result<T> {
    let file = std::fs::File::open(path).map_err(|e| Error::from(e).in_file(path))?;
    parse(std::io::BufReader::new(file)).map_err(|e| e.in_file(path))
}

/// Manual cluster titles: `clusterId<TAB>title` lines.
pub fn parse_title_overrides(reader: impl BufRead) -> Result<BTreeMap<String, String>> {
    parse_tsv_texts(reader)
}
