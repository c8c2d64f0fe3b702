#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub const BIN: &str = env!("CARGO_BIN_EXE_aetas");

pub const SMALL_SPEC: &str = "docs_per_bin = 300\ntokens_per_doc = 100\n";

pub const SMALL_CONFIG: &str = r#"output_dir = "out"
[corpus]
inputs = ["corpus.jsonl"]
[bins]
min_tokens = 20000
[train]
dim = 20
min_count = 5
negative = 5
epochs = 2
[align]
anchor = "1820s"
[drift]
targets = "targets.csv"
spans = [{ start = "1800s", end = "1820s" }, { start = "1800s", end = "1810s" }]
k_list = [5, 20]
n_pivots = 100
top_m = 20
[stability]
repeats = 3
[incremental]
enabled = true
seeds = [1, 2]
[stats]
neighbor_context = 2
"#;

pub fn aetas(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .current_dir(dir)
        .env_remove("AETAS_OUTPUT_DIR")
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn aetas")
}

/// Writes a small synthetic corpus and a config into `dir`.
pub fn fixture(dir: &Path, config: &str) -> PathBuf {
    fs::write(dir.join("spec.toml"), SMALL_SPEC).unwrap();
    let out = aetas(dir, &["synth", "--spec", "spec.toml", "--out", "."]);
    assert!(
        out.status.success(),
        "synth failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let cfg = dir.join("config.toml");
    fs::write(&cfg, config).unwrap();
    cfg
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Relative path to contents for every `.csv` under `root`.
pub fn csv_tree(root: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else if p.extension().is_some_and(|x| x == "csv") {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                files.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    files.sort();
    files
}
