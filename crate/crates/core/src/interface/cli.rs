//! `ngram-viewer` command line.
//!
//! Exit status: 0 on success, 1 on usage errors (bad flags, bad queries or
//! parameters), 2 on data errors (unreadable corpora, failed imports,
//! missing capabilities).

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

use super::{render_chart, resolve_query, series_response, write_csv};
use crate::analysis::{self, Unit, DEFAULT_ISOLATION_WINDOW, DEFAULT_MIN_GAP};
use crate::error::Error;
use crate::extract::MAX_ORDER;
use crate::query::Normalization;
use crate::store::{build_index, import_gb_tsv, load_index, save_index, Manifest};

#[derive(Debug, Parser)]
#[command(name = "ngram-viewer", version, about = "Per-year n-gram frequency series over dated corpora")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
    Chart,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormalizeArg {
    Tokens,
    Volumes,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum UnitArg {
    Word,
    Char,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an index from a JSON Lines corpus manifest
    Ingest {
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = MAX_ORDER)]
        max_order: usize,
        /// Record which documents contain each n-gram (enables drill-down)
        #[arg(long)]
        postings: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Import n-gram count and totals TSV exports
    Import {
        #[arg(long)]
        corpus: String,
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        totals: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Frequency series for comma-separated phrases (`:ci` suffix folds case)
    Query {
        phrases: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        start: Option<i32>,
        #[arg(long)]
        end: Option<i32>,
        #[arg(long)]
        smoothing: Option<usize>,
        #[arg(long, value_enum, default_value = "tokens")]
        normalize: NormalizeArg,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Next-symbol distribution after a history
    Complete {
        history: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_enum, default_value = "word")]
        unit: UnitArg,
        /// Number of entries to show; 0 shows all
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Isolated early occurrences that suggest a misdated volume
    Anomalies {
        phrase: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, default_value_t = DEFAULT_ISOLATION_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_MIN_GAP)]
        gap: usize,
    },
    /// Documents containing a phrase within a year range
    Docs {
        phrase: String,
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        start: i32,
        #[arg(long)]
        end: i32,
    },
    /// Serve the JSON API for every corpus under a directory
    Serve {
        #[arg(long)]
        port: u16,
        #[arg(long)]
        corpus_dir: PathBuf,
    },
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parameter(_) | Error::Parse(_) => 1,
        _ => 2,
    }
}

fn open(path: &PathBuf) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::load(path.display().to_string(), e))
}

fn to_json(value: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(value).expect("plain data serializes")
}

fn execute(command: Command, out: &mut dyn Write) -> Result<(), Error> {
    match command {
        Command::Ingest {
            corpus,
            manifest,
            max_order,
            postings,
            out: dir,
        } => {
            let manifest = Manifest::from_path(&manifest)?;
            let index = build_index(&corpus, &manifest, max_order, postings)?;
            save_index(&index, &dir)?;
            writeln!(
                out,
                "indexed {} documents into {}",
                index.documents().len(),
                dir.display()
            )?;
        }
        Command::Import {
            corpus,
            counts,
            totals,
            out: dir,
        } => {
            let index = import_gb_tsv(&corpus, open(&counts)?, open(&totals)?)?;
            save_index(&index, &dir)?;
            writeln!(out, "imported `{corpus}` into {}", dir.display())?;
        }
        Command::Query {
            phrases,
            corpus,
            start,
            end,
            smoothing,
            normalize,
            format,
        } => {
            // Validate the phrase list before touching the corpus.
            crate::query::parse_query(&phrases, MAX_ORDER)?;
            let index = load_index(&corpus)?;
            let normalization = match normalize {
                NormalizeArg::Tokens => Normalization::Tokens,
                NormalizeArg::Volumes => Normalization::Volumes,
            };
            let q = resolve_query(&index, &phrases, start, end, smoothing, false, normalization)?;
            let response = series_response(&index, &q)?;
            match format {
                Format::Json => writeln!(out, "{}", to_json(&response))?,
                Format::Csv => write_csv(&response, &mut *out).map_err(std::io::Error::other)?,
                Format::Chart => write!(out, "{}", render_chart(&response))?,
            }
        }
        Command::Complete {
            history,
            corpus,
            unit,
            top,
        } => {
            let index = load_index(&corpus)?;
            let unit = match unit {
                UnitArg::Word => Unit::Word,
                UnitArg::Char => Unit::Char,
            };
            let dist = analysis::complete(&index, &history, unit, top)?;
            writeln!(out, "{}", to_json(&dist))?;
        }
        Command::Anomalies {
            phrase,
            corpus,
            window,
            gap,
        } => {
            let index = load_index(&corpus)?;
            let reports = analysis::find_misdated(&index, &phrase, window, gap)?;
            writeln!(out, "{}", to_json(&reports))?;
        }
        Command::Docs {
            phrase,
            corpus,
            start,
            end,
        } => {
            let index = load_index(&corpus)?;
            let docs = analysis::documents(&index, &phrase, start, end)?;
            writeln!(out, "{}", to_json(&docs))?;
        }
        Command::Serve { port, corpus_dir } => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(super::http::serve(port, corpus_dir))?;
        }
    }
    Ok(())
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let target: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}
