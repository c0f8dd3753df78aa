use std::collections::{BTreeMap, HashMap};
use std::io::BufRead;

use super::build::finish_table;
use super::persist::parse_totals_line;
use super::{CorpusIndex, GramTable, YearEntry, YearTotals, YearlyCount};
use crate::error::{Error, Result};
use crate::extract::{Ngram, MAX_ORDER, MAX_YEAR, MIN_YEAR};

/// Imports an index from an n-gram export.
///
/// `rows` holds `ngram<TAB>year<TAB>match_count<TAB>volume_count` lines, with
/// the n-gram's tokens separated by spaces. `totals` holds
/// `year<TAB>t1,t2,t3,t4,t5<TAB>volumes` lines. Repeated (ngram, year) rows
/// are summed. The result has no documents and no postings.
pub fn import_gb_tsv(corpus_id: &str, rows: impl BufRead, totals: impl BufRead) -> Result<CorpusIndex> {
    let mut year_totals: BTreeMap<i32, YearTotals> = BTreeMap::new();
    for (i, line) in totals.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::import(line_no, format!("totals: {e}")))?;
        if line.is_empty() {
            continue;
        }
        let t = parse_totals_line(&line).map_err(|m| Error::import(line_no, format!("totals: {m}")))?;
        if year_totals.insert(t.year, t).is_some() {
            return Err(Error::import(line_no, "totals: duplicate year"));
        }
    }

    let mut grams: Vec<HashMap<Box<str>, Vec<YearEntry>>> =
        (0..MAX_ORDER).map(|_| HashMap::new()).collect();
    for (i, line) in rows.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| Error::import(line_no, e.to_string()))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(Error::import(
                line_no,
                format!("expected 4 tab-separated fields, found {}", fields.len()),
            ));
        }
        let ngram = Ngram::from_words(fields[0]).map_err(|e| Error::import(line_no, e.to_string()))?;
        let year: i32 = fields[1]
            .parse()
            .map_err(|_| Error::import(line_no, format!("invalid year `{}`", fields[1])))?;
        if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
            return Err(Error::import(line_no, format!("year {year} out of range")));
        }
        let match_count: u64 = fields[2]
            .parse()
            .map_err(|_| Error::import(line_no, format!("invalid match_count `{}`", fields[2])))?;
        let volume_count: u64 = fields[3]
            .parse()
            .map_err(|_| Error::import(line_no, format!("invalid volume_count `{}`", fields[3])))?;
        if !year_totals.contains_key(&year) {
            return Err(Error::import(line_no, format!("no totals row for year {year}")));
        }

        let order = ngram.order();
        let entries = grams[order - 1]
            .entry(String::from(ngram).into_boxed_str())
            .or_default();
        match entries.iter_mut().find(|e| e.year == year) {
            Some(e) => {
                e.count.match_count += match_count;
                e.count.volume_count += volume_count;
            }
            None => entries.push(YearEntry {
                year,
                count: YearlyCount {
                    match_count,
                    volume_count,
                },
                docs: Box::new([]),
            }),
        }
    }

    let tables: Vec<GramTable> = grams.into_iter().map(finish_table).collect();
    let year_span = year_totals
        .keys()
        .next()
        .copied()
        .zip(year_totals.keys().next_back().copied());
    Ok(CorpusIndex::from_parts(
        corpus_id.to_owned(),
        MAX_ORDER,
        Vec::new(),
        Vec::new(),
        tables,
        year_totals,
        false,
        year_span,
    ))
}
