#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use tweetkg::pipeline::{run_all, PipelineConfig, RunReport};
use tweetkg::relation_extract::SurfaceTriple;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data")
}

pub fn golden(name: &str) -> String {
    let p = data_dir().join("golden").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

/// Fixture config writing into `out`.
pub fn fixture_config(out: &Path) -> PipelineConfig {
    let mut cfg = PipelineConfig::load(&data_dir().join("config.toml")).expect("fixture config loads");
    cfg.out_dir = out.to_path_buf();
    cfg
}

pub fn run_fixture(out: &Path) -> RunReport {
    run_all(&fixture_config(out), None).expect("fixture pipeline runs")
}

pub fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Vec<T> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// One row per triple, in the layout of `golden/triples.tsv`.
pub fn triple_row(t: &SurfaceTriple) -> String {
    let mut flags = Vec::new();
    if t.negated {
        flags.push("NEGATION");
    }
    if t.interrogative {
        flags.push("INTERROGATIVE");
    }
    [
        t.post_id.clone(),
        t.sent_index.to_string(),
        t.subject.surface.clone(),
        t.verb_surface.clone(),
        t.object.surface.clone(),
        t.pattern.join(","),
        flags.join(","),
    ]
    .join("\t")
}

pub fn tsv_rows(text: &str) -> BTreeSet<String> {
    text.lines().filter(|l| !l.is_empty()).map(str::to_string).collect()
}

/// Directory listing of regular files with their bytes, sorted by name.
pub fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.is_file())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    out.sort();
    out
}
