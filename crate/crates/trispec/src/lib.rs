//! File formats and command-line front end for `trispec-core`.

pub mod cli;
pub mod io;
