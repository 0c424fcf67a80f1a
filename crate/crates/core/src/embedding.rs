//! Term vectors loaded from a word-vector text file.
//!
//! Every stored vector is unit length, so cosine similarity is a plain dot
//! product. Terms that are missing from the table (OOV) have no vector;
//! callers treat them as similarity 0 to everything.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Vectors whose length is already within this distance of 1 are stored
/// verbatim, which keeps a dump/reload cycle bit-exact.
const UNIT_NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermVector {
    pub term: String,
    /// Unit-length components.
    pub vector: Vec<f64>,
    /// Euclidean length of the vector as it appeared in the source.
    pub norm: f64,
}

impl TermVector {
    /// Normalizes `raw`. Returns `None` for zero or non-finite vectors.
    pub fn new(term: impl Into<String>, raw: Vec<f64>) -> Option<Self> {
        let norm = raw.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return None;
        }
        let vector = if (norm - 1.0).abs() <= UNIT_NORM_SLACK {
            raw
        } else {
            raw.into_iter().map(|c| c / norm).collect()
        };
        Some(TermVector {
            term: term.into(),
            vector,
            norm,
        })
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }
}

#[derive(Debug, Clone, Default)]
pub struct EmbeddingTable {
    dimension: usize,
    entries: HashMap<String, TermVector>,
    /// Source order of the terms, used by [`EmbeddingTable::write_text`].
    order: Vec<String>,
    duplicates: usize,
}

impl EmbeddingTable {
    /// Parses the word-vector text format: an optional `"V d"` header line
    /// followed by `term c1 c2 ... cd` lines. Vectors are unit-normalized.
    /// Terms are lowercased; a repeated term keeps its first vector and is
    /// counted in [`EmbeddingTable::duplicates`].
    pub fn load(reader: impl BufRead) -> Result<Self> {
        let mut table = EmbeddingTable::default();
        let mut declared_dim: Option<usize> = None;
        let mut first_content_line = true;

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_ascii_whitespace().collect();

            if first_content_line {
                first_content_line = false;
                if let Some(dim) = parse_header(&fields) {
                    if dim == 0 {
                        return Err(Error::parse(line_no, "header declares dimension 0"));
                    }
                    declared_dim = Some(dim);
                    continue;
                }
            }

            let (term, components) = fields
                .split_first()
                .ok_or_else(|| Error::parse(line_no, "empty line"))?;
            if components.is_empty() {
                return Err(Error::parse(line_no, format!("term {term:?} has no components")));
            }
            let expected = declared_dim.or(table.order.first().map(|_| table.dimension));
            if let Some(expected) = expected {
                if components.len() != expected {
                    return Err(Error::parse(
                        line_no,
                        format!(
                            "dimension mismatch: expected {expected} components, found {}",
                            components.len()
                        ),
                    ));
                }
            }
            let raw = components
                .iter()
                .map(|c| {
                    c.parse::<f64>()
                        .ok()
                        .filter(|v| v.is_finite())
                        .ok_or_else(|| Error::parse(line_no, format!("invalid component {c:?}")))
                })
                .collect::<Result<Vec<f64>>>()?;

            let term = term.to_lowercase();
            let Some(tv) = TermVector::new(term.clone(), raw) else {
                return Err(Error::parse(line_no, format!("zero vector for term {term:?}")));
            };
            if table.entries.contains_key(&term) {
                table.duplicates += 1;
                continue;
            }
            table.dimension = tv.dimension();
            table.order.push(term.clone());
            table.entries.insert(term, tv);
        }

        if table.entries.is_empty() {
            return Err(Error::Empty("embedding stream"));
        }
        Ok(table)
    }

    pub fn load_str(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Number of repeated terms skipped while loading.
    pub fn duplicates(&self) -> usize {
        self.duplicates
    }

    /// `None` marks an out-of-vocabulary term.
    pub fn lookup(&self, term: &str) -> Option<&TermVector> {
        self.entries.get(term)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    /// Terms in load order.
    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.order.iter().map(String::as_str)
    }

    /// Debug dump in the same text format `load` reads: a header line, then
    /// the normalized vectors with round-trip exact decimal components.
    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "{} {}", self.entries.len(), self.dimension)?;
        for term in &self.order {
            let tv = &self.entries[term];
            write!(out, "{term}")?;
            for c in &tv.vector {
                write!(out, " {c:?}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// A first line made of exactly two unsigned integers is a `"V d"` header.
fn parse_header(fields: &[&str]) -> Option<usize> {
    match fields {
        [count, dim] => {
            count.parse::<usize>().ok()?;
            dim.parse::<usize>().ok()
        }
        _ => None,
    }
}

/// Dot product of two unit vectors, clamped to `[-1, 1]`.
pub fn cosine(u: &TermVector, v: &TermVector) -> Result<f64> {
    cosine_slices(&u.vector, &v.vector)
}

pub fn cosine_slices(u: &[f64], v: &[f64]) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::contract(format!(
            "cosine of vectors with dimensions {} and {}",
            u.len(),
            v.len()
        )));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    Ok(dot.clamp(-1.0, 1.0))
}
