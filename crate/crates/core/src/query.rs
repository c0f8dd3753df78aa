//! Multi-phrase queries and normalized frequency series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{tokenize_str, Ngram};
use crate::store::CorpusIndex;

/// Suffix marking a phrase as case-insensitive.
pub const CASE_INSENSITIVE_MARKER: &str = ":ci";

pub const DEFAULT_START_YEAR: i32 = 1500;
pub const DEFAULT_END_YEAR: i32 = 2015;
pub const DEFAULT_SMOOTHING: usize = 3;

/// Denominator used to turn counts into frequencies.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// Divide by the year's total count of same-order n-grams.
    #[default]
    Tokens,
    /// Divide by the number of volumes printed that year.
    Volumes,
}

impl FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tokens" => Ok(Normalization::Tokens),
            "volumes" => Ok(Normalization::Volumes),
            other => Err(Error::Parameter(format!(
                "normalization must be `tokens` or `volumes`, got `{other}`"
            ))),
        }
    }
}

impl fmt::Display for Normalization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Normalization::Tokens => "tokens",
            Normalization::Volumes => "volumes",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Phrase {
    pub ngram: Ngram,
    pub case_insensitive: bool,
}

impl Phrase {
    /// Label used in output: the canonical form, plus the marker when
    /// case-insensitive.
    pub fn label(&self) -> String {
        if self.case_insensitive {
            format!("{}{CASE_INSENSITIVE_MARKER}", self.ngram)
        } else {
            self.ngram.to_string()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhraseQuery {
    pub phrases: Vec<Phrase>,
    pub start_year: i32,
    pub end_year: i32,
    pub smoothing: usize,
    /// Applies to every phrase, in addition to per-phrase markers.
    pub case_insensitive: bool,
    pub normalization: Normalization,
}

impl PhraseQuery {
    pub fn years(mut self, start_year: i32, end_year: i32) -> Self {
        self.start_year = start_year;
        self.end_year = end_year;
        self
    }

    pub fn smoothing(mut self, k: usize) -> Self {
        self.smoothing = k;
        self
    }

    pub fn normalization(mut self, normalization: Normalization) -> Self {
        self.normalization = normalization;
        self
    }

    pub fn case_insensitive(mut self, yes: bool) -> Self {
        self.case_insensitive = yes;
        self
    }

    pub fn validate(&self, max_order: usize) -> Result<()> {
        if self.phrases.is_empty() {
            return Err(Error::Parse("query has no phrases".into()));
        }
        if self.start_year > self.end_year {
            return Err(Error::Parameter(format!(
                "start year {} is after end year {}",
                self.start_year, self.end_year
            )));
        }
        if let Some(p) = self.phrases.iter().find(|p| p.ngram.order() > max_order) {
            return Err(Error::Parse(format!(
                "phrase `{}` has order {}, above the corpus maximum {max_order}",
                p.ngram,
                p.ngram.order()
            )));
        }
        Ok(())
    }
}

/// Parses a comma-separated phrase list. Years, smoothing, and
/// normalization start at their defaults.
pub fn parse_query(text: &str, max_order: usize) -> Result<PhraseQuery> {
    if text.trim().is_empty() {
        return Err(Error::Parse("empty query".into()));
    }
    let mut phrases = Vec::new();
    for raw in text.split(',') {
        let mut body = raw.trim();
        let mut case_insensitive = false;
        if let Some(stripped) = body.strip_suffix(CASE_INSENSITIVE_MARKER) {
            body = stripped.trim_end();
            case_insensitive = true;
        }
        let tokens = tokenize_str(body);
        if tokens.is_empty() {
            return Err(Error::Parse(format!("empty phrase in `{text}`")));
        }
        if tokens.len() > max_order {
            return Err(Error::Parse(format!(
                "phrase `{body}` has order {}, above the maximum {max_order}",
                tokens.len()
            )));
        }
        phrases.push(Phrase {
            ngram: Ngram::from_tokens(&tokens)?,
            case_insensitive,
        });
    }
    Ok(PhraseQuery {
        phrases,
        start_year: DEFAULT_START_YEAR,
        end_year: DEFAULT_END_YEAR,
        smoothing: 0,
        case_insensitive: false,
        normalization: Normalization::default(),
    })
}

/// Per-year frequencies of one phrase over an inclusive year range.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySeries {
    pub phrase: String,
    pub start_year: i32,
    pub end_year: i32,
    pub values: Vec<f64>,
    /// Years whose denominator was zero, ascending.
    pub missing_years: Vec<i32>,
    /// The value a single match would have in each year; 0 where missing.
    pub resolution: Vec<f64>,
}

impl FrequencySeries {
    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.start_year..=self.end_year
    }

    pub fn value_at(&self, year: i32) -> Option<f64> {
        let i = usize::try_from(year.checked_sub(self.start_year)?).ok()?;
        self.values.get(i).copied()
    }

    /// Multiplies every value (and the resolution) by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        FrequencySeries {
            values: self.values.iter().map(|v| v * factor).collect(),
            resolution: self.resolution.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    pub fn smoothed(&self, k: usize) -> Self {
        FrequencySeries {
            values: smooth(&self.values, k),
            ..self.clone()
        }
    }
}

/// Centered moving average over `[i - k, i + k]`, truncated at the edges
/// and divided by the number of points actually in the window.
pub fn smooth(values: &[f64], k: usize) -> Vec<f64> {
    if k == 0 {
        return values.to_vec();
    }
    (0..values.len())
        .map(|i| {
            let lo = i.saturating_sub(k);
            let hi = (i + k).min(values.len() - 1);
            let window = &values[lo..=hi];
            window.iter().sum::<f64>() / window.len() as f64
        })
        .collect()
}

fn denominator(index: &CorpusIndex, year: i32, order: usize, norm: Normalization) -> u64 {
    index.totals(year).map_or(0, |t| match norm {
        Normalization::Tokens => t.total_for_order(order),
        Normalization::Volumes => t.volumes,
    })
}

/// Summed match counts for a phrase, one entry per year of the range.
pub(crate) fn phrase_counts(
    index: &CorpusIndex,
    phrase: &Phrase,
    case_insensitive: bool,
    start_year: i32,
    end_year: i32,
) -> Vec<u64> {
    let len = (end_year as i64 - start_year as i64 + 1).max(0) as usize;
    let mut counts = vec![0u64; len];
    let mut add = |record: &crate::store::GramRecord| {
        for e in record.years.iter() {
            if (start_year..=end_year).contains(&e.year) {
                counts[(e.year - start_year) as usize] += e.count.match_count;
            }
        }
    };
    let order = phrase.ngram.order();
    if phrase.case_insensitive || case_insensitive {
        if let Some(table) = index.table(order) {
            for i in index.case_variants(&phrase.ngram) {
                add(&table[i]);
            }
        }
    } else if let Some(record) = index.record(&phrase.ngram) {
        add(record);
    }
    counts
}

/// Evaluates every phrase of the query.
pub fn series(index: &CorpusIndex, q: &PhraseQuery) -> Result<Vec<FrequencySeries>> {
    q.validate(index.max_order())?;
    Ok(q.phrases
        .iter()
        .map(|phrase| {
            let order = phrase.ngram.order();
            let counts = phrase_counts(index, phrase, q.case_insensitive, q.start_year, q.end_year);
            let mut values = Vec::with_capacity(counts.len());
            let mut resolution = Vec::with_capacity(counts.len());
            let mut missing_years = Vec::new();
            for (year, count) in (q.start_year..=q.end_year).zip(counts) {
                let denom = denominator(index, year, order, q.normalization);
                if denom == 0 {
                    missing_years.push(year);
                    values.push(0.0);
                    resolution.push(0.0);
                } else {
                    values.push(count as f64 / denom as f64);
                    resolution.push(1.0 / denom as f64);
                }
            }
            let label = if q.case_insensitive && !phrase.case_insensitive {
                Phrase {
                    case_insensitive: true,
                    ..phrase.clone()
                }
                .label()
            } else {
                phrase.label()
            };
            FrequencySeries {
                phrase: label,
                start_year: q.start_year,
                end_year: q.end_year,
                values: smooth(&values, q.smoothing),
                missing_years,
                resolution,
            }
        })
        .collect())
}

/// Raw match counts of one phrase as a series (resolution 1 everywhere).
pub fn count_series(
    index: &CorpusIndex,
    phrase: &Phrase,
    start_year: i32,
    end_year: i32,
) -> Result<FrequencySeries> {
    if start_year > end_year {
        return Err(Error::Parameter("start year after end year".into()));
    }
    let counts = phrase_counts(index, phrase, false, start_year, end_year);
    Ok(FrequencySeries {
        phrase: phrase.label(),
        start_year,
        end_year,
        resolution: vec![1.0; counts.len()],
        values: counts.into_iter().map(|c| c as f64).collect(),
        missing_years: Vec::new(),
    })
}
