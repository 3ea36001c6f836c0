//! Configuration, output formats and command implementations behind the
//! `kapitza` binary.

// `!(x > 0.0)` is used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod failure;
pub mod output;

pub use failure::Failure;
