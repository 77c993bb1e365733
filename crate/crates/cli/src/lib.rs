//! Library surface of the `mdcs` command line: configuration, file
//! formats, manifests, and the simulate/analyze/sweep drivers. The binary
//! in `main.rs` is a thin dispatcher over these.

pub mod analyze;
pub mod config;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod simulate;
pub mod sweep;
