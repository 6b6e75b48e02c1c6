//! Std companion of `muntzlab-core`: kernel files, run configuration,
//! CSV/JSON output, a thread pool for Gram assembly, and the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod kernel_io;
pub mod output;
pub mod parallel;
