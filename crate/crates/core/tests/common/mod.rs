#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use ngram_viewer::DocumentMeta;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const PLANTED_DOC: &str = "reid-essays-1594";

pub struct FixtureDoc {
    pub doc_id: String,
    pub title: String,
    pub year: i32,
    pub text: String,
}

impl FixtureDoc {
    pub fn new(doc_id: impl Into<String>, year: i32, text: impl Into<String>) -> Self {
        let doc_id = doc_id.into();
        FixtureDoc {
            title: format!("Volume {doc_id}"),
            doc_id,
            year,
            text: text.into(),
        }
    }

    pub fn meta(&self) -> DocumentMeta {
        DocumentMeta {
            doc_id: self.doc_id.clone(),
            title: self.title.clone(),
            year: self.year,
            language: Some("en".into()),
        }
    }
}

/// One misprinted 1594 volume mentioning Frankenstein, sustained use from
/// 1818 to 1900, and unrelated early volumes.
pub fn misdating_corpus() -> Vec<FixtureDoc> {
    let mut docs = vec![FixtureDoc {
        doc_id: PLANTED_DOC.into(),
        title: "Essays on the Christian Aspect of Some Pressing Problems".into(),
        year: 1594,
        text: "think that if it were to be transfigured before us into hard concrete facts, \
               we would shrink back in dismay from the Frankenstein we had raised."
            .into(),
    }];
    for year in (1500..=1796).step_by(11) {
        docs.push(FixtureDoc::new(
            format!("early-{year}"),
            year,
            "Marshal Neuperg had marched toward the town and the castle.",
        ));
    }
    for year in 1818..=1900 {
        docs.push(FixtureDoc::new(
            format!("novel-{year}"),
            year,
            format!("Victor Frankenstein created the creature. Edition of {year}, the monster speaks."),
        ));
    }
    docs
}

/// Writes documents and a JSON Lines manifest; returns the manifest path.
pub fn write_corpus(dir: &Path, docs: &[FixtureDoc]) -> PathBuf {
    let text_dir = dir.join("texts");
    fs::create_dir_all(&text_dir).unwrap();
    let mut manifest = String::new();
    for doc in docs {
        let file = format!("{}.txt", doc.doc_id);
        fs::write(text_dir.join(&file), &doc.text).unwrap();
        let line = serde_json::json!({
            "doc_id": doc.doc_id,
            "title": doc.title,
            "year": doc.year,
            "language": "en",
            "path": format!("texts/{file}"),
        });
        manifest.push_str(&line.to_string());
        manifest.push('\n');
    }
    let path = dir.join("manifest.jsonl");
    fs::write(&path, manifest).unwrap();
    path
}

/// Random word-only corpus: up to `max_docs` documents of up to
/// `max_tokens` tokens over a small vocabulary so n-grams repeat.
pub fn random_corpus(seed: u64, max_docs: usize, max_tokens: usize) -> Vec<FixtureDoc> {
    const VOCAB: &[&str] = &[
        "the", "The", "cat", "sat", "on", "mat", "Frankenstein", "smectic", "vampire", "of",
        "and", "a",
    ];
    let mut rng = StdRng::seed_from_u64(seed);
    let n_docs = rng.gen_range(0..=max_docs);
    (0..n_docs)
        .map(|i| {
            let len = rng.gen_range(0..=max_tokens);
            let words: Vec<&str> = (0..len).map(|_| VOCAB[rng.gen_range(0..VOCAB.len())]).collect();
            FixtureDoc::new(format!("doc-{seed}-{i:03}"), rng.gen_range(1700..1712), words.join(" "))
        })
        .collect()
}

/// Brute-force recount: (ngram, year) -> (match_count, volume ids).
pub type Recount = BTreeMap<(String, i32), (u64, BTreeSet<String>)>;

pub fn brute_force_counts(docs: &[FixtureDoc], order: usize) -> Recount {
    let mut out = Recount::new();
    for doc in docs {
        let tokens: Vec<&str> = doc.text.split_whitespace().collect();
        if tokens.len() < order {
            continue;
        }
        for start in 0..=tokens.len() - order {
            let key = tokens[start..start + order].join(" ");
            let slot = out.entry((key, doc.year)).or_default();
            slot.0 += 1;
            slot.1.insert(doc.doc_id.clone());
        }
    }
    out
}

/// Brute-force next-token counts after `history` (word-only texts).
pub fn brute_force_continuations(texts: &[&str], history: &[&str]) -> BTreeMap<String, u64> {
    let mut out = BTreeMap::new();
    for text in texts {
        let tokens: Vec<&str> = text.split_whitespace().collect();
        for i in 0..tokens.len() {
            if i + history.len() < tokens.len() && tokens[i..i + history.len()] == *history {
                *out.entry(tokens[i + history.len()].to_owned()).or_insert(0) += 1;
            }
        }
    }
    out
}

/// Files of a saved index directory, by name.
pub fn read_dir_bytes(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}
