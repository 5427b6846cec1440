#![allow(dead_code)]

use std::path::{Path, PathBuf};

use share_cli::commands::cmd_generate;
use share_cli::Settings;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures").join(name)
}

pub fn settings(pairs: &[(&str, &str)]) -> Settings {
    let o: Vec<(String, String)> = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    Settings::resolve(None, &o).unwrap()
}

/// A planted-community source small enough for multi-run commands.
pub fn small_source(dir: &Path) -> (PathBuf, PathBuf) {
    let s = settings(&[
        ("gen_users", "200"),
        ("gen_items", "320"),
        ("gen_core_items", "12"),
        ("gen_avg_degree", "8"),
        ("gen_communities", "4"),
        ("gen_groups", "2"),
    ]);
    cmd_generate(&s, &dir.join("source")).unwrap()
}

/// Settings for quick training runs on synthetic sub-graphs of `small_source`.
pub fn quick(extra: &[(&str, &str)]) -> Settings {
    let mut pairs = vec![
        ("users", "50,60"),
        ("avg_degree", "6"),
        ("epochs", "3"),
        ("warmup", "1"),
        ("dim", "8"),
        ("batch", "256"),
        ("tolerance", "0.02"),
    ];
    pairs.extend_from_slice(extra);
    settings(&pairs)
}
