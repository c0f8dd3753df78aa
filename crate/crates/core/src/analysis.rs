//! Analyses over an index: next-symbol completion, spike scoring,
//! misdated-document detection, and document drill-down.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{join, tokenize_str, DocumentMeta, Ngram, MAX_ORDER};
use crate::query::FrequencySeries;
use crate::store::{CorpusIndex, Source};

pub const DEFAULT_ISOLATION_WINDOW: usize = 10;
pub const DEFAULT_MIN_GAP: usize = 50;
pub const DEFAULT_SPIKE_WINDOW: usize = 5;
pub const DEFAULT_SPIKE_THRESHOLD: f64 = 10.0;

/// Highest character model order (history of up to nine characters).
pub const MAX_CHAR_ORDER: usize = 10;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Word,
    Char,
}

impl FromStr for Unit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "word" => Ok(Unit::Word),
            "char" => Ok(Unit::Char),
            other => Err(Error::Parameter(format!(
                "unit must be `word` or `char`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Word => "word",
            Unit::Char => "char",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionEntry {
    pub symbol: String,
    pub probability: f64,
    pub count: u64,
}

/// Maximum-likelihood next-symbol distribution for one history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionDistribution {
    pub history: Vec<String>,
    pub unit: Unit,
    /// Descending probability, ties by symbol.
    pub entries: Vec<CompletionEntry>,
    /// Number of times the history is followed by some symbol.
    pub support_count: u64,
}

fn distribution(
    history: Vec<String>,
    unit: Unit,
    continuations: impl IntoIterator<Item = (String, u64)>,
    top: usize,
) -> CompletionDistribution {
    let mut counts: Vec<(String, u64)> = continuations.into_iter().filter(|(_, c)| *c > 0).collect();
    let support_count: u64 = counts.iter().map(|(_, c)| c).sum();
    counts.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    if top > 0 {
        counts.truncate(top);
    }
    CompletionDistribution {
        history,
        unit,
        entries: counts
            .into_iter()
            .map(|(symbol, count)| CompletionEntry {
                symbol,
                probability: count as f64 / support_count as f64,
                count,
            })
            .collect(),
        support_count,
    }
}

/// Character m-gram counts, keyed by the (m-1)-character history.
#[derive(Debug, Default)]
pub struct CharModel {
    order: usize,
    next: HashMap<String, HashMap<char, u64>>,
}

/// Collapses whitespace and control runs into one space.
fn char_stream(text: &str) -> Vec<char> {
    let mut out = Vec::with_capacity(text.len());
    for c in text.trim_matches(crate::extract::is_separator).chars() {
        if crate::extract::is_separator(c) {
            if out.last() != Some(&' ') {
                out.push(' ');
            }
        } else {
            out.push(c);
        }
    }
    out
}

impl CharModel {
    pub fn from_texts<'a>(texts: impl IntoIterator<Item = &'a str>, order: usize) -> Self {
        let mut next: HashMap<String, HashMap<char, u64>> = HashMap::new();
        for text in texts {
            let chars = char_stream(text);
            for window in chars.windows(order) {
                let (history, last) = window.split_at(order - 1);
                let history: String = history.iter().collect();
                *next.entry(history).or_default().entry(last[0]).or_insert(0) += 1;
            }
        }
        CharModel { order, next }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn continuations(&self, history: &str) -> impl Iterator<Item = (String, u64)> + '_ {
        self.next
            .get(history)
            .into_iter()
            .flatten()
            .map(|(c, n)| (c.to_string(), *n))
    }
}

fn char_history(history: &str) -> Result<Vec<char>> {
    let mut symbols = Vec::new();
    for c in history.chars() {
        if crate::extract::is_separator(c) {
            if symbols.last() != Some(&' ') {
                symbols.push(' ');
            }
        } else {
            symbols.push(c);
        }
    }
    if symbols.is_empty() {
        return Err(Error::Parameter("history must not be empty".into()));
    }
    if symbols.len() + 1 > MAX_CHAR_ORDER {
        return Err(Error::Parameter(format!(
            "character history of {} symbols exceeds the maximum of {}",
            symbols.len(),
            MAX_CHAR_ORDER - 1
        )));
    }
    Ok(symbols)
}

fn word_history(history: &str, max_order: usize) -> Result<Vec<&str>> {
    let tokens = tokenize_str(history);
    if tokens.is_empty() {
        return Err(Error::Parameter("history must not be empty".into()));
    }
    if tokens.len() + 1 > max_order {
        return Err(Error::Parameter(format!(
            "history of {} words needs order {}, above the maximum {max_order}",
            tokens.len(),
            tokens.len() + 1
        )));
    }
    Ok(tokens)
}

fn char_model(index: &CorpusIndex, order: usize) -> Result<Arc<CharModel>> {
    if let Some(model) = index.char_models.read().unwrap().get(&order) {
        return Ok(model.clone());
    }
    let mut models = index.char_models.write().unwrap();
    if let Some(model) = models.get(&order) {
        return Ok(model.clone());
    }
    let imported = index.documents.is_empty() && index.tables.iter().any(|t| !t.is_empty());
    if imported || index.sources.iter().any(|s| matches!(s, Source::None)) {
        return Err(Error::Capability("raw document text"));
    }
    let texts = index
        .documents
        .iter()
        .zip(&index.sources)
        .map(|(meta, source)| crate::store::read_source(meta, source).map(Option::unwrap_or_default))
        .collect::<Result<Vec<Arc<str>>>>()?;
    let model = Arc::new(CharModel::from_texts(texts.iter().map(|t| t.as_ref()), order));
    models.insert(order, model.clone());
    Ok(model)
}

/// Next-symbol distribution from an index. `top == 0` keeps every entry.
pub fn complete(
    index: &CorpusIndex,
    history: &str,
    unit: Unit,
    top: usize,
) -> Result<CompletionDistribution> {
    match unit {
        Unit::Word => {
            let tokens = word_history(history, index.max_order())?;
            let order = tokens.len() + 1;
            let mut prefix = join(&tokens);
            prefix.push(' ');
            let continuations = index.prefix_range(order, &prefix).iter().map(|r| {
                let total = r.years.iter().map(|e| e.count.match_count).sum();
                (r.text[prefix.len()..].to_owned(), total)
            });
            let history = tokens.iter().map(|t| t.to_string()).collect();
            Ok(distribution(history, unit, continuations, top))
        }
        Unit::Char => {
            let symbols = char_history(history)?;
            let model = char_model(index, symbols.len() + 1)?;
            let key: String = symbols.iter().collect();
            Ok(distribution(
                symbols.iter().map(char::to_string).collect(),
                unit,
                model.continuations(&key),
                top,
            ))
        }
    }
}

/// Next-symbol distribution computed directly from raw texts.
pub fn complete_from_texts<'a>(
    texts: impl IntoIterator<Item = &'a str>,
    history: &str,
    unit: Unit,
    top: usize,
) -> Result<CompletionDistribution> {
    match unit {
        Unit::Word => {
            let wanted = word_history(history, MAX_ORDER)?;
            let mut counts: HashMap<String, u64> = HashMap::new();
            for text in texts {
                let tokens = tokenize_str(text);
                for window in tokens.windows(wanted.len() + 1) {
                    if window[..wanted.len()] == wanted[..] {
                        *counts.entry(window[wanted.len()].to_owned()).or_insert(0) += 1;
                    }
                }
            }
            let history = wanted.iter().map(|t| t.to_string()).collect();
            Ok(distribution(history, unit, counts, top))
        }
        Unit::Char => {
            let symbols = char_history(history)?;
            let model = CharModel::from_texts(texts, symbols.len() + 1);
            let key: String = symbols.iter().collect();
            Ok(distribution(
                symbols.iter().map(char::to_string).collect(),
                unit,
                model.continuations(&key),
                top,
            ))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spike {
    pub year: i32,
    pub score: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}

/// Flags years whose raw value exceeds `threshold` times the median of the
/// surrounding `window` years on each side (clipped to the series).
///
/// A zero median flags any positive value; its score then divides by the
/// series resolution at that year, i.e. the score counts matches.
pub fn spikes(series: &FrequencySeries, window: usize, threshold: f64) -> Result<Vec<Spike>> {
    if window == 0 {
        return Err(Error::Parameter("spike window must be at least 1".into()));
    }
    if threshold.is_nan() || threshold <= 1.0 {
        return Err(Error::Parameter("spike threshold must be greater than 1".into()));
    }
    let values = &series.values;
    if values.len() < 3 {
        return Err(Error::Parameter(
            "spike detection needs a series of at least 3 years".into(),
        ));
    }
    let mut out = Vec::new();
    let mut neighborhood = Vec::with_capacity(2 * window);
    for (i, &v) in values.iter().enumerate() {
        if v <= 0.0 {
            continue;
        }
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(values.len() - 1);
        neighborhood.clear();
        neighborhood.extend(values[lo..i].iter().chain(&values[i + 1..=hi]));
        let med = median(&mut neighborhood);
        if v > threshold * med {
            let surrogate = if med > 0.0 {
                med
            } else {
                match series.resolution.get(i) {
                    Some(&r) if r > 0.0 => r,
                    _ => f64::MIN_POSITIVE,
                }
            };
            out.push(Spike {
                year: series.start_year + i as i32,
                score: v / surrogate,
            });
        }
    }
    Ok(out)
}

/// Machine-readable form of a candidate misdating.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnomalyReport {
    pub phrase: String,
    pub year: i32,
    pub match_count: u64,
    pub volume_count: u64,
    pub doc_ids: Vec<String>,
    pub nearest_other_year: Option<i32>,
    pub gap: u32,
    pub note: String,
}

fn phrase_ngram(index: &CorpusIndex, phrase: &str) -> Result<Ngram> {
    let tokens = tokenize_str(phrase);
    if tokens.is_empty() {
        return Err(Error::Parameter("phrase must not be empty".into()));
    }
    if tokens.len() > index.max_order() {
        return Err(Error::Parameter(format!(
            "phrase `{phrase}` has order {}, above the maximum {}",
            tokens.len(),
            index.max_order()
        )));
    }
    Ngram::from_tokens(&tokens)
}

/// Reports years where the phrase occurs with no other occurrence within
/// `isolation_window` years and the nearest other occurrence is at least
/// `min_gap` years away. A phrase seen in only one year is never reported.
pub fn find_misdated(
    index: &CorpusIndex,
    phrase: &str,
    isolation_window: usize,
    min_gap: usize,
) -> Result<Vec<AnomalyReport>> {
    if isolation_window == 0 || min_gap == 0 {
        return Err(Error::Parameter(
            "isolation window and minimum gap must be at least 1".into(),
        ));
    }
    let ngram = phrase_ngram(index, phrase)?;
    let Some(record) = index.record(&ngram) else {
        return Ok(Vec::new());
    };
    let years: Vec<_> = record.years.iter().filter(|e| e.count.match_count > 0).collect();
    let window = i64::try_from(isolation_window).unwrap_or(i64::MAX);
    let min_gap = i64::try_from(min_gap).unwrap_or(i64::MAX);

    let mut reports = Vec::new();
    for (i, entry) in years.iter().enumerate() {
        let year = i64::from(entry.year);
        let prev = i.checked_sub(1).map(|p| i64::from(years[p].year));
        let next = years.get(i + 1).map(|e| i64::from(e.year));
        let isolated = prev.is_none_or(|p| year - p > window) && next.is_none_or(|n| n - year > window);
        let nearest = match (prev, next) {
            (Some(p), Some(n)) if year - p <= n - year => Some(p),
            (Some(_), Some(n)) => Some(n),
            (p, n) => p.or(n),
        };
        let Some(nearest) = nearest else { continue };
        let gap = (year - nearest).abs();
        if !isolated || gap < min_gap {
            continue;
        }
        let doc_ids: Vec<String> = entry
            .docs
            .iter()
            .map(|&d| index.documents[d as usize].doc_id.clone())
            .collect();
        let mut note = format!(
            "isolated use in {year}: none within ±{isolation_window} years, nearest other use in {nearest} \
             ({gap} years away); {} volume(s) may carry a wrong print year",
            entry.count.volume_count
        );
        if !index.has_postings() {
            note.push_str("; drill-down unavailable (no postings)");
        }
        reports.push(AnomalyReport {
            phrase: ngram.to_string(),
            year: entry.year,
            match_count: entry.count.match_count,
            volume_count: entry.count.volume_count,
            doc_ids,
            nearest_other_year: Some(nearest as i32),
            gap: u32::try_from(gap).unwrap_or(u32::MAX),
            note,
        });
    }
    Ok(reports)
}

/// Documents printed in `[start_year, end_year]` that contain the phrase,
/// sorted by (year, doc_id).
pub fn documents(
    index: &CorpusIndex,
    phrase: &str,
    start_year: i32,
    end_year: i32,
) -> Result<Vec<DocumentMeta>> {
    if !index.has_postings() {
        return Err(Error::Capability("postings"));
    }
    let ngram = phrase_ngram(index, phrase)?;
    let Some(record) = index.record(&ngram) else {
        return Ok(Vec::new());
    };
    let mut docs: Vec<DocumentMeta> = record
        .years
        .iter()
        .filter(|e| (start_year..=end_year).contains(&e.year))
        .flat_map(|e| e.docs.iter())
        .map(|&d| index.documents[d as usize].clone())
        .collect();
    docs.sort_by(|a, b| (a.year, &a.doc_id).cmp(&(b.year, &b.doc_id)));
    Ok(docs)
}
