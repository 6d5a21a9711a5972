//! Command-line driver for the stable reduction engine: file formats,
//! DOT emission, and pipeline orchestration. The binary in `main.rs` is
//! a thin argument parser over [`pipeline`].

pub mod dot;
pub mod format;
pub mod pipeline;
