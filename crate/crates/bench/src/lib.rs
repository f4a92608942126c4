//! Experiment drivers, result tables, file formats and runtime property
//! checks built on `geodesic-core`.

// `!(x > 0.0)` deliberately rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod experiments;
pub mod io;
pub mod table;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    /// Invalid user configuration; the CLI exits with status 2.
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] geodesic_core::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}
