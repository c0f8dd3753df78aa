//! Command-line and HTTP front ends.

mod chart;
pub mod cli;
pub mod http;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::query::{parse_query, series, Normalization, PhraseQuery, DEFAULT_SMOOTHING};
use crate::store::CorpusIndex;

pub use chart::render_chart;

/// One phrase of an [`ApiSeriesResponse`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPayload {
    pub phrase: String,
    pub values: Vec<f64>,
    pub missing_years: Vec<i32>,
}

/// Body of `GET /api/v1/series` and of `query --format json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApiSeriesResponse {
    pub corpus: String,
    pub start_year: i32,
    pub end_year: i32,
    pub smoothing: usize,
    pub series: Vec<SeriesPayload>,
}

/// Longest year span a single request may ask for.
pub const MAX_SPAN_YEARS: i64 = 5000;

/// Builds a query the way both front ends do: years default to the corpus
/// span and smoothing to [`DEFAULT_SMOOTHING`].
pub fn resolve_query(
    index: &CorpusIndex,
    phrases: &str,
    start_year: Option<i32>,
    end_year: Option<i32>,
    smoothing: Option<usize>,
    case_insensitive: bool,
    normalization: Normalization,
) -> Result<PhraseQuery> {
    let q = parse_query(phrases, index.max_order())?;
    let span = index.year_span();
    let (Some(start), Some(end)) = (
        start_year.or(span.map(|s| s.0)),
        end_year.or(span.map(|s| s.1)),
    ) else {
        return Err(Error::Parameter(
            "corpus has no years; give start and end explicitly".into(),
        ));
    };
    if i64::from(end) - i64::from(start) + 1 > MAX_SPAN_YEARS {
        return Err(Error::Parameter(format!(
            "year span {start}..={end} is longer than {MAX_SPAN_YEARS} years"
        )));
    }
    let q = q
        .years(start, end)
        .smoothing(smoothing.unwrap_or(DEFAULT_SMOOTHING))
        .case_insensitive(case_insensitive)
        .normalization(normalization);
    q.validate(index.max_order())?;
    Ok(q)
}

pub fn series_response(index: &CorpusIndex, q: &PhraseQuery) -> Result<ApiSeriesResponse> {
    let series = series(index, q)?
        .into_iter()
        .map(|s| SeriesPayload {
            phrase: s.phrase,
            values: s.values,
            missing_years: s.missing_years,
        })
        .collect();
    Ok(ApiSeriesResponse {
        corpus: index.corpus_id().to_owned(),
        start_year: q.start_year,
        end_year: q.end_year,
        smoothing: q.smoothing,
        series,
    })
}

/// Entry of `GET /api/v1/corpora`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub corpus_id: String,
    pub year_span: Option<[i32; 2]>,
    pub max_order: usize,
    pub document_count: usize,
    pub has_postings: bool,
}

impl CorpusSummary {
    pub fn of(index: &CorpusIndex) -> Self {
        CorpusSummary {
            corpus_id: index.corpus_id().to_owned(),
            year_span: index.year_span().map(|(a, b)| [a, b]),
            max_order: index.max_order(),
            document_count: index.documents().len(),
            has_postings: index.has_postings(),
        }
    }
}

/// Writes `year,<phrase1>,<phrase2>,...` followed by one row per year.
pub fn write_csv(response: &ApiSeriesResponse, out: impl std::io::Write) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header = vec!["year".to_owned()];
    header.extend(response.series.iter().map(|s| s.phrase.clone()));
    writer.write_record(&header)?;
    for (i, year) in (response.start_year..=response.end_year).enumerate() {
        let mut row = vec![year.to_string()];
        row.extend(response.series.iter().map(|s| s.values[i].to_string()));
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}
