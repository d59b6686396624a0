#![allow(dead_code)]

use std::path::{Path, PathBuf};

use hess_core::config::RunConfig;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn bundled_config_path() -> PathBuf {
    data_dir().join("default.toml")
}

pub fn bundled_config() -> RunConfig {
    RunConfig::load(&bundled_config_path()).expect("bundled config loads")
}

/// Writes the bundled config with `edits` applied as (from, to) replacements.
/// Cell and cycle paths become absolute and `output_dir` is `<dir>/out`.
pub fn write_config(dir: &Path, edits: &[(&str, &str)]) -> PathBuf {
    let data = data_dir();
    let mut text = std::fs::read_to_string(bundled_config_path()).unwrap();
    text = text.replace("\"cells/", &format!("\"{}/cells/", data.display()));
    text = text.replace("\"wltc3_like.csv\"", &format!("\"{}/wltc3_like.csv\"", data.display()));
    text = text.replace("output_dir = \"../../../out\"", "output_dir = \"out\"");
    for (from, to) in edits {
        assert!(text.contains(from), "config has no `{from}`");
        text = text.replace(from, to);
    }
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}
