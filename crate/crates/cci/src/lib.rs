//! File formats, remote data access, run configuration, plotting and the
//! `cci` command line on top of [`cci_core`].

pub mod cli;
pub mod config;
pub mod csv_io;
mod error;
pub mod fred;
pub mod svg;

pub use error::{IngestError, Result};
