//! File formats, checkpoints, reports and the `drauc` command line on top of
//! [`drauc_core`].

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod csv;
pub mod error;
pub mod report;
pub mod verify;

pub use error::{Error, Result};

/// Formats a float with 17 significant digits; parsing the text back yields
/// the same bits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}
