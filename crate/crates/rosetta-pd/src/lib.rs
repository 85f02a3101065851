//! File formats, reports and the command line around `rosetta-pd-core`.

pub mod bookshelf_io;
pub mod cli;
pub mod config;
pub mod def;
pub mod error;
pub mod lef;
pub mod lex;
pub mod metrics_io;
pub mod netlist;
pub mod sweep_par;

pub use error::FormatError;

/// Header marker written into every generated file.
pub const GENERATED_BY: &str = concat!("generated-by rosetta-pd ", env!("CARGO_PKG_VERSION"));
