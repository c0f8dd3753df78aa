use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::BufRead;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::Deserialize;

use super::{CorpusIndex, GramRecord, GramTable, Source, YearEntry, YearTotals, YearlyCount};
use crate::error::{Error, Result};
use crate::extract::{
    check_order, for_each_window, join, tokenize_str, DocumentMeta, MAX_YEAR, MIN_YEAR,
};

/// Documents counted per parallel batch before merging.
const BATCH: usize = 64;

/// One line of a corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub doc_id: String,
    pub title: String,
    pub year: i32,
    #[serde(default)]
    pub language: Option<String>,
    pub path: PathBuf,
}

impl ManifestEntry {
    fn meta(&self) -> DocumentMeta {
        DocumentMeta {
            doc_id: self.doc_id.clone(),
            title: self.title.clone(),
            year: self.year,
            language: self.language.clone(),
        }
    }
}

/// A JSON Lines corpus manifest.
#[derive(Debug, Clone, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    /// Reads a manifest file. Relative document paths resolve against the
    /// manifest's directory.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = fs::File::open(path)
            .map_err(|e| Error::Manifest(format!("cannot open {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        Manifest::from_reader(std::io::BufReader::new(file), base)
    }

    pub fn from_reader(reader: impl BufRead, base_dir: &Path) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Manifest(format!("line {}: {e}", i + 1)))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut entry: ManifestEntry = serde_json::from_str(&line)
                .map_err(|e| Error::Manifest(format!("line {}: {e}", i + 1)))?;
            if entry.path.is_relative() {
                entry.path = base_dir.join(&entry.path);
            }
            entries.push(entry);
        }
        Ok(Manifest { entries })
    }
}

fn validate(docs: &[DocumentMeta]) -> Result<()> {
    let mut seen = HashSet::new();
    for doc in docs {
        if doc.doc_id.is_empty() || doc.doc_id.chars().any(|c| c == '\t' || c.is_control()) {
            return Err(Error::Manifest(format!(
                "invalid doc_id `{}`",
                doc.doc_id.escape_debug()
            )));
        }
        if !seen.insert(doc.doc_id.as_str()) {
            return Err(Error::Manifest(format!("duplicate doc_id `{}`", doc.doc_id)));
        }
        if !(MIN_YEAR..=MAX_YEAR).contains(&doc.year) {
            return Err(Error::Manifest(format!(
                "document `{}` has year {} outside {MIN_YEAR}..={MAX_YEAR}",
                doc.doc_id, doc.year
            )));
        }
    }
    Ok(())
}

/// Builds an index from the documents listed in a manifest.
pub fn build_index(
    corpus_id: &str,
    manifest: &Manifest,
    max_order: usize,
    with_postings: bool,
) -> Result<CorpusIndex> {
    let docs: Vec<(DocumentMeta, Source)> = manifest
        .entries
        .iter()
        .map(|e| (e.meta(), Source::File(e.path.clone())))
        .collect();
    build(corpus_id, docs, max_order, with_postings)
}

/// Builds an index from in-memory texts.
pub fn build_index_from_texts(
    corpus_id: &str,
    docs: impl IntoIterator<Item = (DocumentMeta, String)>,
    max_order: usize,
    with_postings: bool,
) -> Result<CorpusIndex> {
    let docs = docs
        .into_iter()
        .map(|(meta, text)| (meta, Source::Text(Arc::from(text))))
        .collect();
    build(corpus_id, docs, max_order, with_postings)
}

pub(crate) fn read_source(meta: &DocumentMeta, source: &Source) -> Result<Option<Arc<str>>> {
    match source {
        Source::None => Ok(None),
        Source::Text(text) => Ok(Some(text.clone())),
        Source::File(path) => fs::read_to_string(path)
            .map(|t| Some(Arc::from(t)))
            .map_err(|source| Error::Ingest {
                doc_id: meta.doc_id.clone(),
                path: path.clone(),
                source,
            }),
    }
}

struct PendingEntry {
    year: i32,
    count: YearlyCount,
    docs: Vec<u32>,
}

/// Per-order gram counts for one document.
type LocalCounts = Vec<HashMap<String, u64>>;

fn count_document(text: &str, max_order: usize) -> LocalCounts {
    let tokens = tokenize_str(text);
    let mut local: LocalCounts = vec![HashMap::new(); max_order];
    for_each_window(&tokens, max_order, |order, _, window| {
        *local[order - 1].entry(join(window)).or_insert(0) += 1;
    });
    local
}

fn build(
    corpus_id: &str,
    mut docs: Vec<(DocumentMeta, Source)>,
    max_order: usize,
    with_postings: bool,
) -> Result<CorpusIndex> {
    check_order(max_order)?;
    docs.sort_by(|a, b| a.0.doc_id.cmp(&b.0.doc_id));
    let metas: Vec<DocumentMeta> = docs.iter().map(|(m, _)| m.clone()).collect();
    validate(&metas)?;

    let mut grams: Vec<HashMap<Box<str>, Vec<PendingEntry>>> =
        (0..max_order).map(|_| HashMap::new()).collect();
    let mut totals: BTreeMap<i32, YearTotals> = BTreeMap::new();

    for (batch_no, batch) in docs.chunks(BATCH).enumerate() {
        let counted: Vec<LocalCounts> = batch
            .par_iter()
            .map(|(meta, source)| {
                let text = read_source(meta, source)?.unwrap_or_else(|| Arc::from(""));
                Ok(count_document(&text, max_order))
            })
            .collect::<Result<_>>()?;

        // Merge sequentially in doc_id order so postings come out sorted.
        for (offset, local) in counted.into_iter().enumerate() {
            let doc_index = (batch_no * BATCH + offset) as u32;
            let year = batch[offset].0.year;
            let year_totals = totals.entry(year).or_insert_with(|| YearTotals::new(year));
            year_totals.volumes += 1;
            for (order_index, counts) in local.into_iter().enumerate() {
                let table = &mut grams[order_index];
                for (text, n) in counts {
                    year_totals.total_matches[order_index] += n;
                    let entries = table.entry(text.into_boxed_str()).or_default();
                    let entry = match entries.iter_mut().position(|e| e.year == year) {
                        Some(i) => &mut entries[i],
                        None => {
                            entries.push(PendingEntry {
                                year,
                                count: YearlyCount::default(),
                                docs: Vec::new(),
                            });
                            entries.last_mut().unwrap()
                        }
                    };
                    entry.count.match_count += n;
                    entry.count.volume_count += 1;
                    if with_postings {
                        entry.docs.push(doc_index);
                    }
                }
            }
        }
    }

    let tables: Vec<GramTable> = grams
        .into_par_iter()
        .map(|map| {
            finish_table(map.into_iter().map(|(text, entries)| {
                let years = entries
                    .into_iter()
                    .map(|e| YearEntry {
                        year: e.year,
                        count: e.count,
                        docs: e.docs.into_boxed_slice(),
                    })
                    .collect();
                (text, years)
            }))
        })
        .collect();
    let year_span = metas
        .iter()
        .map(|d| d.year)
        .min()
        .zip(metas.iter().map(|d| d.year).max());
    let sources = docs.into_iter().map(|(_, s)| s).collect();
    Ok(CorpusIndex::from_parts(
        corpus_id.to_owned(),
        max_order,
        metas,
        sources,
        tables,
        totals,
        with_postings,
        year_span,
    ))
}

pub(crate) fn finish_table(
    grams: impl IntoIterator<Item = (Box<str>, Vec<YearEntry>)>,
) -> GramTable {
    let mut table: GramTable = grams
        .into_iter()
        .map(|(text, mut years)| {
            years.sort_by_key(|e| e.year);
            GramRecord {
                text,
                years: years.into_boxed_slice(),
            }
        })
        .collect();
    table.sort_unstable_by(|a, b| a.text.cmp(&b.text));
    table
}
