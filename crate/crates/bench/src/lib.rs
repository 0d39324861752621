//! Benchmark fixtures shared by the criterion targets.

use std::path::PathBuf;

/// Absolute path of a file in the workspace `corpus/` directory.
pub fn corpus_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../corpus")
        .join(name)
}

pub fn corpus_source(name: &str) -> String {
    std::fs::read_to_string(corpus_path(name)).expect("corpus file")
}

pub use frj;
