//! Driver for `sfde-core`: convergence studies, fast-versus-dense
//! comparisons, SOE diagnostics and scaling benchmarks, with CSV output, grid
//! files and TOML configuration.

pub mod alloc_audit;
pub mod bench;
pub mod config;
pub mod error;
pub mod gridfile;
pub mod study;
pub mod table;

pub use error::{HarnessError, Result};
