//! Per-year n-gram count indexes over dated corpora, with normalized and
//! smoothed frequency series, next-symbol completion, spike and misdating
//! detection, and document drill-down.

pub mod analysis;
pub mod error;
pub mod extract;
pub mod interface;
pub mod query;
pub mod store;

pub use analysis::{
    complete, complete_from_texts, documents, find_misdated, spikes, AnomalyReport,
    CompletionDistribution, CompletionEntry, Spike, Unit,
};
pub use error::{Error, Result};
pub use extract::{extract_ngrams, tokenize, DocumentMeta, Ngram, Token, MAX_ORDER};
pub use query::{parse_query, series, FrequencySeries, Normalization, PhraseQuery};
pub use store::{
    build_index, import_gb_tsv, load_index, save_index, CorpusIndex, Manifest, YearTotals,
    YearlyCount,
};
