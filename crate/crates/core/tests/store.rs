mod common;

use std::fs;

use common::*;
use ngram_viewer::analysis::{complete, documents, find_misdated, Unit};
use ngram_viewer::store::{build_index_from_texts, Manifest};
use ngram_viewer::{
    build_index, load_index, parse_query, save_index, series, CorpusIndex, Error, Ngram,
};
use proptest::prelude::*;

fn build_from_files(dir: &std::path::Path, docs: &[FixtureDoc], postings: bool) -> CorpusIndex {
    let manifest = Manifest::from_path(write_corpus(dir, docs)).unwrap();
    build_index("fixture", &manifest, 3, postings).unwrap()
}

fn assert_same_answers(a: &CorpusIndex, b: &CorpusIndex) {
    assert_eq!(a.corpus_id(), b.corpus_id());
    assert_eq!(a.max_order(), b.max_order());
    assert_eq!(a.year_span(), b.year_span());
    assert_eq!(a.documents(), b.documents());
    assert_eq!(a.all_totals().collect::<Vec<_>>(), b.all_totals().collect::<Vec<_>>());
    for order in 1..=a.max_order() {
        let left: Vec<(String, Vec<_>)> =
            a.grams(order).map(|(g, y)| (g.to_owned(), y.collect())).collect();
        let right: Vec<(String, Vec<_>)> =
            b.grams(order).map(|(g, y)| (g.to_owned(), y.collect())).collect();
        assert_eq!(left, right, "order {order}");
    }
    let q = parse_query("Frankenstein, the creature, the:ci, monster", 3)
        .unwrap()
        .years(1500, 1910)
        .smoothing(3);
    let (sa, sb) = (series(a, &q).unwrap(), series(b, &q).unwrap());
    for (x, y) in sa.iter().zip(&sb) {
        assert_eq!(x.phrase, y.phrase);
        let bits = |s: &ngram_viewer::FrequencySeries| s.values.iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(x), bits(y));
        assert_eq!(x.missing_years, y.missing_years);
    }
    assert_eq!(
        find_misdated(a, "Frankenstein", 10, 50).unwrap(),
        find_misdated(b, "Frankenstein", 10, 50).unwrap()
    );
    assert_eq!(
        complete(a, "Victor", Unit::Word, 0).unwrap(),
        complete(b, "Victor", Unit::Word, 0).unwrap()
    );
    assert_eq!(
        documents(a, "Frankenstein", 1500, 1900).ok(),
        documents(b, "Frankenstein", 1500, 1900).ok()
    );
}

#[test]
fn save_load_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_from_files(tmp.path(), &misdating_corpus(), true);
    let out = tmp.path().join("index");
    save_index(&index, &out).unwrap();
    let loaded = load_index(&out).unwrap();
    assert_same_answers(&index, &loaded);
    assert!(loaded.has_postings());

    // The loaded index still reaches the raw text for character completion.
    let d = complete(&loaded, "Franken", Unit::Char, 0).unwrap();
    assert_eq!(d.entries[0].symbol, "s");
    assert_eq!(d.support_count, 84);
}

#[test]
fn single_sentence_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let doc = FixtureDoc::new("d1", 1900, "the cat sat on the mat");
    let index = build_index_from_texts("one", [(doc.meta(), doc.text.clone())], 5, false).unwrap();
    save_index(&index, tmp.path()).unwrap();
    let loaded = load_index(tmp.path()).unwrap();
    let the = Ngram::parse("the").unwrap();
    assert_eq!(loaded.count(&the, 1900), index.count(&the, 1900));
    assert_eq!(loaded.totals(1900), index.totals(1900));
    let counts = fs::read_to_string(tmp.path().join("counts.tsv")).unwrap();
    assert!(counts.starts_with("cat\t1\t1900\t1\t1\nmat\t1\t1900\t1\t1\non\t1\t1900\t1\t1\n"));
    assert!(counts.contains("the\t1\t1900\t2\t1\n"));
    assert!(counts.ends_with("the cat sat on the\t5\t1900\t1\t1\n"));
    let totals = fs::read_to_string(tmp.path().join("totals.tsv")).unwrap();
    assert_eq!(totals, "1900\t6,5,4,3,2\t1\n");
    assert!(!tmp.path().join("postings.tsv").exists());
}

#[test]
fn saves_are_deterministic_and_order_independent() {
    let tmp = tempfile::tempdir().unwrap();
    let docs = misdating_corpus();
    let index = build_from_files(tmp.path(), &docs, true);
    save_index(&index, tmp.path().join("a")).unwrap();
    save_index(&index, tmp.path().join("b")).unwrap();
    assert_eq!(
        read_dir_bytes(&tmp.path().join("a")),
        read_dir_bytes(&tmp.path().join("b"))
    );

    let mut manifest = Manifest::from_path(tmp.path().join("manifest.jsonl")).unwrap();
    manifest.entries.reverse();
    manifest.entries.rotate_left(17);
    let permuted = build_index("fixture", &manifest, 3, true).unwrap();
    save_index(&permuted, tmp.path().join("c")).unwrap();
    assert_eq!(
        read_dir_bytes(&tmp.path().join("a")),
        read_dir_bytes(&tmp.path().join("c"))
    );
}

#[test]
fn postings_file_lists_documents() {
    let tmp = tempfile::tempdir().unwrap();
    let index = build_from_files(tmp.path(), &misdating_corpus(), true);
    save_index(&index, tmp.path().join("ix")).unwrap();
    let postings = fs::read_to_string(tmp.path().join("ix/postings.tsv")).unwrap();
    assert!(postings.contains(&format!("Frankenstein\t1\t1594\t{PLANTED_DOC}\n")));
}

#[test]
fn load_errors_name_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    match load_index(tmp.path()).unwrap_err() {
        Error::Load { file, .. } => assert_eq!(file, "manifest.json"),
        other => panic!("unexpected {other:?}"),
    }

    let index = build_from_files(tmp.path(), &misdating_corpus(), true);
    let dir = tmp.path().join("ix");
    save_index(&index, &dir).unwrap();

    let counts = dir.join("counts.tsv");
    let original = fs::read(&counts).unwrap();
    let mut tampered = original.clone();
    tampered[0] ^= 0x01;
    fs::write(&counts, &tampered).unwrap();
    match load_index(&dir).unwrap_err() {
        Error::Integrity { file } => assert_eq!(file, "counts.tsv"),
        other => panic!("unexpected {other:?}"),
    }
    fs::write(&counts, &original).unwrap();

    fs::remove_file(dir.join("totals.tsv")).unwrap();
    match load_index(&dir).unwrap_err() {
        Error::Load { file, .. } => assert_eq!(file, "totals.tsv"),
        other => panic!("unexpected {other:?}"),
    }

    fs::write(dir.join("manifest.json"), "{ not json").unwrap();
    assert!(matches!(load_index(&dir), Err(Error::Load { .. })));
}

#[test]
fn resaving_without_postings_removes_stale_file() {
    let tmp = tempfile::tempdir().unwrap();
    let with = build_from_files(tmp.path(), &misdating_corpus(), true);
    let dir = tmp.path().join("ix");
    save_index(&with, &dir).unwrap();
    let manifest = Manifest::from_path(tmp.path().join("manifest.jsonl")).unwrap();
    let without = build_index("fixture", &manifest, 3, false).unwrap();
    save_index(&without, &dir).unwrap();
    assert!(!dir.join("postings.tsv").exists());
    let loaded = load_index(&dir).unwrap();
    assert!(matches!(
        documents(&loaded, "Frankenstein", 1500, 1796),
        Err(Error::Capability(_))
    ));
}

fn check_against_oracle(docs: &[FixtureDoc], index: &CorpusIndex, max_order: usize) -> Result<(), TestCaseError> {
    for order in 1..=max_order {
        let oracle = brute_force_counts(docs, order);
        let mut seen = 0;
        for (gram, years) in index.grams(order) {
            for (year, count) in years {
                let expected = oracle.get(&(gram.to_owned(), year));
                prop_assert!(expected.is_some(), "extra gram {gram} {year}");
                let (m, vols) = expected.unwrap();
                prop_assert_eq!(count.match_count, *m);
                prop_assert_eq!(count.volume_count, vols.len() as u64);
                let ids = index.postings(&Ngram::parse(gram).unwrap(), year).unwrap();
                prop_assert!(ids.iter().copied().eq(vols.iter().map(String::as_str)));
                seen += 1;
            }
        }
        prop_assert_eq!(seen, oracle.len());
        // totals consistency
        for totals in index.all_totals() {
            let sum: u64 = oracle
                .iter()
                .filter(|((_, y), _)| *y == totals.year)
                .map(|(_, (m, _))| m)
                .sum();
            prop_assert_eq!(totals.total_for_order(order), sum);
            let volumes = docs.iter().filter(|d| d.year == totals.year).count() as u64;
            prop_assert_eq!(totals.volumes, volumes);
        }
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn build_matches_brute_force(seed in any::<u64>(), max_order in 1usize..=5) {
        let docs = random_corpus(seed, 20, 60);
        let index = build_index_from_texts(
            "r",
            docs.iter().map(|d| (d.meta(), d.text.clone())),
            max_order,
            true,
        )
        .unwrap();
        check_against_oracle(&docs, &index, max_order)?;
    }

    #[test]
    fn build_is_order_independent(seed in any::<u64>(), rotate in 0usize..50) {
        let docs = random_corpus(seed, 15, 40);
        let tmp = tempfile::tempdir().unwrap();
        let forward = build_index_from_texts("r", docs.iter().map(|d| (d.meta(), d.text.clone())), 3, true).unwrap();
        let mut shuffled: Vec<_> = docs.iter().map(|d| (d.meta(), d.text.clone())).collect();
        shuffled.reverse();
        if !shuffled.is_empty() {
            let r = rotate % shuffled.len();
            shuffled.rotate_left(r);
        }
        let backward = build_index_from_texts("r", shuffled, 3, true).unwrap();
        save_index(&forward, tmp.path().join("f")).unwrap();
        save_index(&backward, tmp.path().join("b")).unwrap();
        prop_assert_eq!(read_dir_bytes(&tmp.path().join("f")), read_dir_bytes(&tmp.path().join("b")));
    }
}
