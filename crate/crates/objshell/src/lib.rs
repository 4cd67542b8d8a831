//! File formats, dataset writer and command-line front end for
//! `objshell-core`.

pub mod cli;
pub mod dataset;
pub mod error;
pub mod formats;

pub use error::{Error, Result};
