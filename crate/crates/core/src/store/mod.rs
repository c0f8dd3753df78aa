//! The per-year n-gram count index.
//!
//! A [`CorpusIndex`] is immutable once built, imported, or loaded. Grams are
//! kept in one sorted table per order so lookups are binary searches and
//! prefix scans (used by completion) are contiguous ranges.

mod build;
mod import;
mod persist;

use std::collections::{BTreeMap, HashMap};
use std::ops::Range;
use std::path::PathBuf;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::analysis::CharModel;
use crate::error::{Error, Result};
use crate::extract::{DocumentMeta, Ngram, MAX_ORDER};

pub(crate) use build::read_source;
pub use build::{build_index, build_index_from_texts, Manifest, ManifestEntry};
pub use import::import_gb_tsv;
pub(crate) use persist::{read_manifest, MANIFEST_FILE};
pub use persist::{load_index, save_index};

/// Occurrences of one n-gram in one year.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearlyCount {
    pub match_count: u64,
    pub volume_count: u64,
}

/// Per-year denominators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearTotals {
    pub year: i32,
    /// `total_matches[n - 1]` is the total count of order-`n` grams.
    pub total_matches: [u64; MAX_ORDER],
    pub volumes: u64,
}

impl YearTotals {
    pub fn new(year: i32) -> Self {
        YearTotals {
            year,
            total_matches: [0; MAX_ORDER],
            volumes: 0,
        }
    }

    pub fn total_for_order(&self, order: usize) -> u64 {
        self.total_matches.get(order.wrapping_sub(1)).copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct YearEntry {
    pub year: i32,
    pub count: YearlyCount,
    /// Indexes into `CorpusIndex::documents`, ascending. Empty without postings.
    pub docs: Box<[u32]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct GramRecord {
    pub text: Box<str>,
    pub years: Box<[YearEntry]>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Source {
    None,
    File(PathBuf),
    Text(Arc<str>),
}

/// Grams of one order, sorted by canonical text.
pub(crate) type GramTable = Vec<GramRecord>;

pub struct CorpusIndex {
    pub(crate) corpus_id: String,
    pub(crate) max_order: usize,
    /// Sorted by `doc_id`.
    pub(crate) documents: Vec<DocumentMeta>,
    pub(crate) sources: Vec<Source>,
    /// `tables[n - 1]` holds the order-`n` grams.
    pub(crate) tables: Vec<GramTable>,
    pub(crate) totals: BTreeMap<i32, YearTotals>,
    pub(crate) has_postings: bool,
    pub(crate) year_span: Option<(i32, i32)>,
    pub(crate) char_models: RwLock<HashMap<usize, Arc<CharModel>>>,
}

impl std::fmt::Debug for CorpusIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CorpusIndex")
            .field("corpus_id", &self.corpus_id)
            .field("max_order", &self.max_order)
            .field("documents", &self.documents.len())
            .field("grams", &self.tables.iter().map(Vec::len).sum::<usize>())
            .field("year_span", &self.year_span)
            .field("has_postings", &self.has_postings)
            .finish()
    }
}

impl CorpusIndex {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        corpus_id: String,
        max_order: usize,
        documents: Vec<DocumentMeta>,
        sources: Vec<Source>,
        mut tables: Vec<GramTable>,
        totals: BTreeMap<i32, YearTotals>,
        has_postings: bool,
        year_span: Option<(i32, i32)>,
    ) -> Self {
        tables.resize_with(MAX_ORDER, Vec::new);
        CorpusIndex {
            corpus_id,
            max_order,
            documents,
            sources,
            tables,
            totals,
            has_postings,
            year_span,
            char_models: RwLock::new(HashMap::new()),
        }
    }

    pub fn corpus_id(&self) -> &str {
        &self.corpus_id
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn documents(&self) -> &[DocumentMeta] {
        &self.documents
    }

    pub fn has_postings(&self) -> bool {
        self.has_postings
    }

    /// `(min_year, max_year)`, or `None` for an empty corpus.
    pub fn year_span(&self) -> Option<(i32, i32)> {
        self.year_span
    }

    pub fn totals(&self, year: i32) -> Option<&YearTotals> {
        self.totals.get(&year)
    }

    pub fn all_totals(&self) -> impl Iterator<Item = &YearTotals> {
        self.totals.values()
    }

    /// Number of distinct grams of the given order.
    pub fn gram_count(&self, order: usize) -> usize {
        self.table(order).map_or(0, Vec::len)
    }

    pub(crate) fn table(&self, order: usize) -> Option<&GramTable> {
        order.checked_sub(1).and_then(|i| self.tables.get(i))
    }

    pub(crate) fn record(&self, ngram: &Ngram) -> Option<&GramRecord> {
        self.record_by_text(ngram.order(), ngram.as_str())
    }

    pub(crate) fn record_by_text(&self, order: usize, text: &str) -> Option<&GramRecord> {
        let table = self.table(order)?;
        table
            .binary_search_by(|r| r.text.as_ref().cmp(text))
            .ok()
            .map(|i| &table[i])
    }

    /// Records of `order` whose text starts with `prefix`.
    pub(crate) fn prefix_range(&self, order: usize, prefix: &str) -> &[GramRecord] {
        let Some(table) = self.table(order) else {
            return &[];
        };
        let start = table.partition_point(|r| r.text.as_ref() < prefix);
        let len = table[start..].partition_point(|r| r.text.starts_with(prefix));
        &table[start..start + len]
    }

    /// Per-year counts of one n-gram, ascending by year.
    pub fn yearly_counts(&self, ngram: &Ngram) -> Vec<(i32, YearlyCount)> {
        self.record(ngram)
            .map(|r| r.years.iter().map(|e| (e.year, e.count)).collect())
            .unwrap_or_default()
    }

    pub fn count(&self, ngram: &Ngram, year: i32) -> YearlyCount {
        self.record(ngram)
            .and_then(|r| {
                r.years
                    .binary_search_by_key(&year, |e| e.year)
                    .ok()
                    .map(|i| r.years[i].count)
            })
            .unwrap_or_default()
    }

    /// Every gram of `order` with its per-year counts, in canonical order.
    pub fn grams(
        &self,
        order: usize,
    ) -> impl Iterator<Item = (&str, impl Iterator<Item = (i32, YearlyCount)> + '_)> + '_ {
        self.table(order).into_iter().flatten().map(|r| {
            (
                r.text.as_ref(),
                r.years.iter().map(|e| (e.year, e.count)),
            )
        })
    }

    /// Document ids containing `ngram` in `year`.
    pub fn postings(&self, ngram: &Ngram, year: i32) -> Result<Vec<&str>> {
        if !self.has_postings {
            return Err(Error::Capability("postings"));
        }
        let docs = self.record(ngram).and_then(|r| {
            r.years
                .binary_search_by_key(&year, |e| e.year)
                .ok()
                .map(|i| &r.years[i].docs)
        });
        Ok(docs
            .into_iter()
            .flat_map(|d| d.iter())
            .map(|&d| self.documents[d as usize].doc_id.as_str())
            .collect())
    }

    /// Indexes (into the order table) of every case variant of `ngram`.
    pub(crate) fn case_variants(&self, ngram: &Ngram) -> Vec<usize> {
        let mut out = Vec::new();
        if let Some(table) = self.table(ngram.order()) {
            let alternatives: Vec<Vec<char>> = ngram.as_str().chars().map(case_alternatives).collect();
            let mut prefix = String::new();
            descend_variants(table, 0..table.len(), &mut prefix, &alternatives, &mut out);
        }
        out
    }
}

/// Walks the sorted table one character at a time, trying every character
/// with the same case fold and pruning prefixes that no record starts with.
fn descend_variants(
    table: &[GramRecord],
    range: Range<usize>,
    prefix: &mut String,
    rest: &[Vec<char>],
    out: &mut Vec<usize>,
) {
    let Some((options, rest)) = rest.split_first() else {
        // The exact match, if any, sorts first among records with this prefix.
        if table[range.start].text.as_ref() == prefix.as_str() {
            out.push(range.start);
        }
        return;
    };
    for &c in options {
        prefix.push(c);
        let slice = &table[range.clone()];
        let start = range.start + slice.partition_point(|r| r.text.as_ref() < prefix.as_str());
        let len = table[start..range.end].partition_point(|r| r.text.starts_with(prefix.as_str()));
        if len > 0 {
            descend_variants(table, start..start + len, prefix, rest, out);
        }
        prefix.pop();
    }
}

/// Every character whose simple case fold equals that of `c`.
fn case_alternatives(c: char) -> Vec<char> {
    static CLASSES: OnceLock<HashMap<char, Vec<char>>> = OnceLock::new();
    let classes = CLASSES.get_or_init(|| {
        let mut classes: HashMap<char, Vec<char>> = HashMap::new();
        for c in (0..=char::MAX as u32).filter_map(char::from_u32) {
            let folded = fold_char(c);
            if folded != c {
                classes.entry(folded).or_insert_with(|| vec![folded]).push(c);
            }
        }
        classes
    });
    let folded = fold_char(c);
    classes.get(&folded).cloned().unwrap_or_else(|| vec![folded])
}

fn fold_char(c: char) -> char {
    unicode_case_mapping::case_folded(c)
        .and_then(|cp| char::from_u32(cp.get()))
        .unwrap_or(c)
}

/// Unicode simple case folding, code point by code point.
pub fn fold_case(text: &str) -> String {
    text.chars().map(fold_char).collect()
}
