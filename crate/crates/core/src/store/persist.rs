//! On-disk layout of a saved index:
//!
//! - `counts.tsv`: `ngram<TAB>order<TAB>year<TAB>match_count<TAB>volume_count`,
//!   sorted by (order, ngram, year)
//! - `totals.tsv`: `year<TAB>t1,t2,t3,t4,t5<TAB>volumes`, sorted by year
//! - `postings.tsv` (optional): `ngram<TAB>order<TAB>year<TAB>doc_id[<TAB>doc_id...]`
//! - `manifest.json`: corpus metadata, documents, and SHA-256 digests of the
//!   TSV files

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::build::finish_table;
use super::{CorpusIndex, GramTable, Source, YearEntry, YearTotals, YearlyCount};
use crate::error::{Error, Result};
use crate::extract::{DocumentMeta, Ngram, MAX_ORDER};

pub(crate) const MANIFEST_FILE: &str = "manifest.json";
const COUNTS_FILE: &str = "counts.tsv";
const TOTALS_FILE: &str = "totals.tsv";
const POSTINGS_FILE: &str = "postings.tsv";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct StoredDocument {
    #[serde(flatten)]
    meta: DocumentMeta,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    path: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
pub(crate) struct StoredManifest {
    format_version: u32,
    pub corpus_id: String,
    pub max_order: usize,
    pub year_span: Option<[i32; 2]>,
    pub has_postings: bool,
    documents: Vec<StoredDocument>,
    checksums: BTreeMap<String, String>,
}

impl StoredManifest {
    pub fn document_count(&self) -> usize {
        self.documents.len()
    }
}

struct HashingWriter<W> {
    inner: W,
    hasher: Sha256,
}

impl<W: Write> Write for HashingWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.hasher.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

fn write_hashed(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> io::Result<()>,
) -> io::Result<String> {
    let mut writer = HashingWriter {
        inner: BufWriter::new(fs::File::create(path)?),
        hasher: Sha256::new(),
    };
    body(&mut writer)?;
    writer.flush()?;
    Ok(hex::encode(writer.hasher.finalize()))
}

/// Writes the index to `dir`, creating it if needed. Output is byte-for-byte
/// deterministic.
pub fn save_index(index: &CorpusIndex, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let mut checksums = BTreeMap::new();

    let digest = write_hashed(&dir.join(COUNTS_FILE), |w| {
        for (i, table) in index.tables.iter().enumerate() {
            for record in table {
                for e in record.years.iter() {
                    writeln!(
                        w,
                        "{}\t{}\t{}\t{}\t{}",
                        record.text,
                        i + 1,
                        e.year,
                        e.count.match_count,
                        e.count.volume_count
                    )?;
                }
            }
        }
        Ok(())
    })?;
    checksums.insert(COUNTS_FILE.to_owned(), digest);

    let digest = write_hashed(&dir.join(TOTALS_FILE), |w| {
        for t in index.totals.values() {
            let per_order: Vec<String> = t.total_matches.iter().map(u64::to_string).collect();
            writeln!(w, "{}\t{}\t{}", t.year, per_order.join(","), t.volumes)?;
        }
        Ok(())
    })?;
    checksums.insert(TOTALS_FILE.to_owned(), digest);

    let postings_path = dir.join(POSTINGS_FILE);
    if index.has_postings {
        let digest = write_hashed(&postings_path, |w| {
            for (i, table) in index.tables.iter().enumerate() {
                for record in table {
                    for e in record.years.iter() {
                        write!(w, "{}\t{}\t{}", record.text, i + 1, e.year)?;
                        for &d in e.docs.iter() {
                            write!(w, "\t{}", index.documents[d as usize].doc_id)?;
                        }
                        writeln!(w)?;
                    }
                }
            }
            Ok(())
        })?;
        checksums.insert(POSTINGS_FILE.to_owned(), digest);
    } else if postings_path.exists() {
        fs::remove_file(&postings_path)?;
    }

    let manifest = StoredManifest {
        format_version: FORMAT_VERSION,
        corpus_id: index.corpus_id.clone(),
        max_order: index.max_order,
        year_span: index.year_span.map(|(a, b)| [a, b]),
        has_postings: index.has_postings,
        documents: index
            .documents
            .iter()
            .zip(&index.sources)
            .map(|(meta, source)| StoredDocument {
                meta: meta.clone(),
                path: match source {
                    Source::File(p) => Some(p.clone()),
                    _ => None,
                },
            })
            .collect(),
        checksums,
    };
    let mut json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    json.push('\n');
    fs::write(dir.join(MANIFEST_FILE), json)?;
    Ok(())
}

pub(crate) fn read_manifest(dir: &Path) -> Result<StoredManifest> {
    let bytes =
        fs::read(dir.join(MANIFEST_FILE)).map_err(|e| Error::load(MANIFEST_FILE, e))?;
    let manifest: StoredManifest =
        serde_json::from_slice(&bytes).map_err(|e| Error::load(MANIFEST_FILE, e))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::load(
            MANIFEST_FILE,
            format!("unsupported format version {}", manifest.format_version),
        ));
    }
    if !(1..=MAX_ORDER).contains(&manifest.max_order) {
        return Err(Error::load(MANIFEST_FILE, "max_order out of range"));
    }
    Ok(manifest)
}

fn read_verified(dir: &Path, name: &str, manifest: &StoredManifest) -> Result<String> {
    let expected = manifest
        .checksums
        .get(name)
        .ok_or_else(|| Error::load(MANIFEST_FILE, format!("no checksum recorded for {name}")))?;
    let bytes = fs::read(dir.join(name)).map_err(|e| Error::load(name, e))?;
    if hex::encode(Sha256::digest(&bytes)) != *expected {
        return Err(Error::Integrity { file: name.into() });
    }
    String::from_utf8(bytes).map_err(|e| Error::load(name, e))
}

fn field<'a>(
    fields: &mut impl Iterator<Item = &'a str>,
    file: &str,
    line: usize,
    what: &str,
) -> Result<&'a str> {
    fields
        .next()
        .ok_or_else(|| Error::load(file, format!("line {line}: missing {what}")))
}

fn number<T: std::str::FromStr>(text: &str, file: &str, line: usize, what: &str) -> Result<T> {
    text.parse()
        .map_err(|_| Error::load(file, format!("line {line}: invalid {what} `{text}`")))
}

/// Loads an index written by [`save_index`], verifying checksums.
pub fn load_index(dir: impl AsRef<Path>) -> Result<CorpusIndex> {
    let dir = dir.as_ref();
    let manifest = read_manifest(dir)?;

    let mut grams: Vec<HashMap<Box<str>, Vec<YearEntry>>> =
        (0..MAX_ORDER).map(|_| HashMap::new()).collect();
    let counts = read_verified(dir, COUNTS_FILE, &manifest)?;
    for (i, line) in counts.lines().enumerate() {
        let n = i + 1;
        let mut fields = line.split('\t');
        let text = field(&mut fields, COUNTS_FILE, n, "ngram")?;
        let order: usize = number(field(&mut fields, COUNTS_FILE, n, "order")?, COUNTS_FILE, n, "order")?;
        let year: i32 = number(field(&mut fields, COUNTS_FILE, n, "year")?, COUNTS_FILE, n, "year")?;
        let match_count = number(field(&mut fields, COUNTS_FILE, n, "match_count")?, COUNTS_FILE, n, "match_count")?;
        let volume_count = number(field(&mut fields, COUNTS_FILE, n, "volume_count")?, COUNTS_FILE, n, "volume_count")?;
        if fields.next().is_some() {
            return Err(Error::load(COUNTS_FILE, format!("line {n}: too many fields")));
        }
        let ngram = Ngram::parse(text).map_err(|e| Error::load(COUNTS_FILE, format!("line {n}: {e}")))?;
        if ngram.order() != order || order > manifest.max_order {
            return Err(Error::load(COUNTS_FILE, format!("line {n}: bad order {order}")));
        }
        let entries = grams[order - 1].entry(String::from(ngram).into_boxed_str()).or_default();
        if entries.iter().any(|e| e.year == year) {
            return Err(Error::load(COUNTS_FILE, format!("line {n}: duplicate row")));
        }
        entries.push(YearEntry {
            year,
            count: YearlyCount {
                match_count,
                volume_count,
            },
            docs: Box::new([]),
        });
    }
    let mut tables: Vec<GramTable> = grams.into_iter().map(finish_table).collect();

    let mut totals = BTreeMap::new();
    let text = read_verified(dir, TOTALS_FILE, &manifest)?;
    for (i, line) in text.lines().enumerate() {
        let t = parse_totals_line(line).map_err(|m| Error::load(TOTALS_FILE, format!("line {}: {m}", i + 1)))?;
        if totals.insert(t.year, t).is_some() {
            return Err(Error::load(TOTALS_FILE, format!("line {}: duplicate year", i + 1)));
        }
    }

    let documents: Vec<DocumentMeta> = manifest.documents.iter().map(|d| d.meta.clone()).collect();
    let sources = manifest
        .documents
        .iter()
        .map(|d| d.path.clone().map_or(Source::None, Source::File))
        .collect();

    if manifest.has_postings {
        let by_id: HashMap<&str, u32> = documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.doc_id.as_str(), i as u32))
            .collect();
        let text = read_verified(dir, POSTINGS_FILE, &manifest)?;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            let mut fields = line.split('\t');
            let gram = field(&mut fields, POSTINGS_FILE, n, "ngram")?;
            let order: usize = number(field(&mut fields, POSTINGS_FILE, n, "order")?, POSTINGS_FILE, n, "order")?;
            let year: i32 = number(field(&mut fields, POSTINGS_FILE, n, "year")?, POSTINGS_FILE, n, "year")?;
            let mut docs = fields
                .map(|id| {
                    by_id
                        .get(id)
                        .copied()
                        .ok_or_else(|| Error::load(POSTINGS_FILE, format!("line {n}: unknown doc_id `{id}`")))
                })
                .collect::<Result<Vec<u32>>>()?;
            docs.sort_unstable();
            let entry = order
                .checked_sub(1)
                .and_then(|o| tables.get_mut(o))
                .and_then(|table| {
                    let pos = table.binary_search_by(|r| r.text.as_ref().cmp(gram)).ok()?;
                    let record = &mut table[pos];
                    let at = record.years.binary_search_by_key(&year, |e| e.year).ok()?;
                    Some(&mut record.years[at])
                })
                .ok_or_else(|| Error::load(POSTINGS_FILE, format!("line {n}: no counts row for posting")))?;
            if entry.count.volume_count != docs.len() as u64 {
                return Err(Error::load(
                    POSTINGS_FILE,
                    format!("line {n}: posting length disagrees with volume_count"),
                ));
            }
            entry.docs = docs.into_boxed_slice();
        }
    }

    Ok(CorpusIndex::from_parts(
        manifest.corpus_id,
        manifest.max_order,
        documents,
        sources,
        tables,
        totals,
        manifest.has_postings,
        manifest.year_span.map(|[a, b]| (a, b)),
    ))
}

/// Parses `year<TAB>t1,...,t5<TAB>volumes`.
pub(crate) fn parse_totals_line(line: &str) -> Result<YearTotals, String> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 3 {
        return Err(format!("expected 3 tab-separated fields, found {}", fields.len()));
    }
    let year = fields[0]
        .parse()
        .map_err(|_| format!("invalid year `{}`", fields[0]))?;
    let parts: Vec<&str> = fields[1].split(',').collect();
    if parts.len() != MAX_ORDER {
        return Err(format!(
            "expected {MAX_ORDER} comma-separated totals, found {}",
            parts.len()
        ));
    }
    let mut totals = YearTotals::new(year);
    for (slot, part) in totals.total_matches.iter_mut().zip(parts) {
        *slot = part
            .parse()
            .map_err(|_| format!("invalid total `{part}`"))?;
    }
    totals.volumes = fields[2]
        .parse()
        .map_err(|_| format!("invalid volume count `{}`", fields[2]))?;
    Ok(totals)
}
