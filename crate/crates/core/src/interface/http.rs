//! Read-only JSON service over one or more saved indexes.
//!
//! Corpora are discovered at startup from their `manifest.json`; the count
//! tables of each corpus load on first use, exactly once.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::extract::rejection::QueryRejection;
use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::Serialize;
use tokio::sync::OnceCell;

use super::{resolve_query, series_response, ApiSeriesResponse, CorpusSummary};
use crate::analysis::{
    self, AnomalyReport, CompletionDistribution, Unit, DEFAULT_ISOLATION_WINDOW, DEFAULT_MIN_GAP,
};
use crate::error::{Error, Result};
use crate::extract::DocumentMeta;
use crate::store::{load_index, CorpusIndex};

pub const DEFAULT_TOP: usize = 10;

struct CorpusSlot {
    dir: Option<PathBuf>,
    summary: CorpusSummary,
    index: OnceCell<Arc<CorpusIndex>>,
}

/// The corpora a service instance answers for.
pub struct Registry {
    corpora: BTreeMap<String, CorpusSlot>,
}

impl Registry {
    /// Finds saved indexes in `dir`: either `dir` itself or its immediate
    /// subdirectories containing a `manifest.json`.
    pub fn discover(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let mut candidates = Vec::new();
        if dir.join(crate::store::MANIFEST_FILE).is_file() {
            candidates.push(dir.to_path_buf());
        } else {
            let mut entries: Vec<PathBuf> = fs::read_dir(dir)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.join(crate::store::MANIFEST_FILE).is_file())
                .collect();
            entries.sort();
            candidates.extend(entries);
        }
        let mut corpora = BTreeMap::new();
        for path in candidates {
            let manifest = crate::store::read_manifest(&path)?;
            let summary = CorpusSummary {
                corpus_id: manifest.corpus_id.clone(),
                year_span: manifest.year_span,
                max_order: manifest.max_order,
                document_count: manifest.document_count(),
                has_postings: manifest.has_postings,
            };
            let slot = CorpusSlot {
                dir: Some(path.clone()),
                summary,
                index: OnceCell::new(),
            };
            if corpora.insert(manifest.corpus_id.clone(), slot).is_some() {
                return Err(Error::load(
                    path.display().to_string(),
                    format!("duplicate corpus id `{}`", manifest.corpus_id),
                ));
            }
        }
        if corpora.is_empty() {
            return Err(Error::load(
                dir.display().to_string(),
                "no saved corpus found",
            ));
        }
        Ok(Registry { corpora })
    }

    /// A registry over already loaded indexes.
    pub fn from_indexes(indexes: impl IntoIterator<Item = CorpusIndex>) -> Self {
        let corpora = indexes
            .into_iter()
            .map(|index| {
                let summary = CorpusSummary::of(&index);
                (
                    index.corpus_id().to_owned(),
                    CorpusSlot {
                        dir: None,
                        summary,
                        index: OnceCell::new_with(Some(Arc::new(index))),
                    },
                )
            })
            .collect();
        Registry { corpora }
    }

    pub fn summaries(&self) -> Vec<CorpusSummary> {
        self.corpora.values().map(|s| s.summary.clone()).collect()
    }

    pub async fn get(&self, corpus_id: &str) -> Result<Arc<CorpusIndex>> {
        let slot = self
            .corpora
            .get(corpus_id)
            .ok_or_else(|| Error::UnknownCorpus(corpus_id.to_owned()))?;
        slot.index
            .get_or_try_init(|| async {
                let dir = slot.dir.clone().expect("preloaded corpora are initialized");
                let index = tokio::task::spawn_blocking(move || load_index(dir))
                    .await
                    .map_err(|e| Error::load("index", e))??;
                Ok(Arc::new(index))
            })
            .await
            .cloned()
    }
}

#[derive(Debug, Serialize)]
struct ErrorBody {
    error: ErrorDetail,
}

#[derive(Debug, Serialize)]
struct ErrorDetail {
    code: &'static str,
    message: String,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: StatusCode::BAD_REQUEST,
            code: "invalid_parameter",
            message: message.into(),
        }
    }
}

impl From<Error> for ApiError {
    fn from(err: Error) -> Self {
        let (status, code) = match &err {
            Error::Parameter(_) => (StatusCode::BAD_REQUEST, "invalid_parameter"),
            Error::Parse(_) => (StatusCode::BAD_REQUEST, "invalid_query"),
            Error::UnknownCorpus(_) => (StatusCode::NOT_FOUND, "unknown_corpus"),
            Error::Capability(_) => (StatusCode::CONFLICT, "capability_unavailable"),
            _ => (StatusCode::INTERNAL_SERVER_ERROR, "corpus_error"),
        };
        ApiError {
            status,
            code,
            message: err.to_string(),
        }
    }
}

impl From<QueryRejection> for ApiError {
    fn from(rejection: QueryRejection) -> Self {
        ApiError::bad_request(rejection.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = ErrorBody {
            error: ErrorDetail {
                code: self.code,
                message: self.message,
            },
        };
        (self.status, Json(body)).into_response()
    }
}

type Params = Result<Query<HashMap<String, String>>, QueryRejection>;
type ApiResult<T> = Result<Json<T>, ApiError>;

struct Args(HashMap<String, String>);

impl Args {
    fn new(params: Params) -> Result<Self, ApiError> {
        Ok(Args(params?.0))
    }

    fn required(&self, name: &str) -> Result<&str, ApiError> {
        self.0
            .get(name)
            .map(String::as_str)
            .ok_or_else(|| ApiError::bad_request(format!("missing parameter `{name}`")))
    }

    fn optional<T: std::str::FromStr>(&self, name: &str) -> Result<Option<T>, ApiError> {
        match self.0.get(name).map(|v| v.trim()) {
            None | Some("") => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| ApiError::bad_request(format!("invalid value `{v}` for `{name}`"))),
        }
    }
}

fn parse_case(value: Option<&str>) -> Result<bool, ApiError> {
    match value.map(str::trim) {
        None | Some("") | Some("sensitive") | Some("false") => Ok(false),
        Some("insensitive") | Some("ci") | Some("true") => Ok(true),
        Some(other) => Err(ApiError::bad_request(format!(
            "case must be `sensitive` or `insensitive`, got `{other}`"
        ))),
    }
}

async fn corpora(State(registry): State<Arc<Registry>>) -> Json<Vec<CorpusSummary>> {
    Json(registry.summaries())
}

async fn series(State(registry): State<Arc<Registry>>, params: Params) -> ApiResult<ApiSeriesResponse> {
    let args = Args::new(params)?;
    let index = registry.get(args.required("corpus")?).await?;
    let normalization = match args.0.get("normalize").map(|s| s.trim()) {
        None | Some("") => Default::default(),
        Some(v) => v.parse()?,
    };
    let q = resolve_query(
        &index,
        args.required("phrases")?,
        args.optional("start")?,
        args.optional("end")?,
        args.optional("smoothing")?,
        parse_case(args.0.get("case").map(String::as_str))?,
        normalization,
    )?;
    Ok(Json(series_response(&index, &q)?))
}

async fn completions(
    State(registry): State<Arc<Registry>>,
    params: Params,
) -> ApiResult<CompletionDistribution> {
    let args = Args::new(params)?;
    let index = registry.get(args.required("corpus")?).await?;
    let history = args.required("history")?.to_owned();
    let unit = match args.0.get("unit").map(|s| s.trim()) {
        None | Some("") => Unit::default(),
        Some(v) => v.parse()?,
    };
    let top = args.optional("top")?.unwrap_or(DEFAULT_TOP);
    let dist = tokio::task::spawn_blocking(move || analysis::complete(&index, &history, unit, top))
        .await
        .map_err(|e| Error::load("index", e))??;
    Ok(Json(dist))
}

async fn anomalies(
    State(registry): State<Arc<Registry>>,
    params: Params,
) -> ApiResult<Vec<AnomalyReport>> {
    let args = Args::new(params)?;
    let index = registry.get(args.required("corpus")?).await?;
    let window = args.optional("window")?.unwrap_or(DEFAULT_ISOLATION_WINDOW);
    let gap = args.optional("gap")?.unwrap_or(DEFAULT_MIN_GAP);
    Ok(Json(analysis::find_misdated(
        &index,
        args.required("phrase")?,
        window,
        gap,
    )?))
}

async fn documents(
    State(registry): State<Arc<Registry>>,
    params: Params,
) -> ApiResult<Vec<DocumentMeta>> {
    let args = Args::new(params)?;
    let index = registry.get(args.required("corpus")?).await?;
    let phrase = args.required("phrase")?;
    if !index.has_postings() {
        return Err(Error::Capability("postings").into());
    }
    let span = index.year_span();
    let start = args.optional("start")?.or(span.map(|s| s.0)).unwrap_or(i32::MIN);
    let end = args.optional("end")?.or(span.map(|s| s.1)).unwrap_or(i32::MAX);
    Ok(Json(analysis::documents(&index, phrase, start, end)?))
}

async fn not_found() -> ApiError {
    ApiError {
        status: StatusCode::NOT_FOUND,
        code: "not_found",
        message: "no such endpoint".into(),
    }
}

pub fn router(registry: Arc<Registry>) -> Router {
    Router::new()
        .route("/api/v1/corpora", get(corpora))
        .route("/api/v1/series", get(series))
        .route("/api/v1/completions", get(completions))
        .route("/api/v1/anomalies", get(anomalies))
        .route("/api/v1/documents", get(documents))
        .fallback(not_found)
        .with_state(registry)
}

/// Serves every corpus under `corpus_dir` until the process is stopped.
pub async fn serve(port: u16, corpus_dir: impl AsRef<Path>) -> Result<()> {
    let registry = Arc::new(Registry::discover(corpus_dir)?);
    let addr = SocketAddr::from(([0, 0, 0, 0], port));
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(registry)).await?;
    Ok(())
}
