//! File formats and batch commands for the `gwflop` command-line tool.
//!
//! All formats are plain text, one record per line, with a version header.
//! Blank lines and anything after `#` are ignored.

pub mod commands;
pub mod geometry;
pub mod table;
pub mod text;
