//! Climate concern index construction and the econometrics around it.
//!
//! The crate is `no_std` (with `alloc`) so the estimators can be embedded
//! anywhere; all file formats, network access and the command line live in
//! the companion `cci` crate. The `std` feature (on by default) only enables
//! parallel replicate loops.
//!
//! Layout:
//! - [`series`]: monthly series, calendar alignment and transforms.
//! - [`index`]: query vocabulary, benchmark rescaling, index aggregation.
//! - [`var`]: reduced-form VAR, diagnostics, Granger tests, PCA.
//! - [`proxy`]: external-instrument identification, impulse responses,
//!   moving-block bootstrap bands, instrument relevance.
//! - [`t90`]: extreme-temperature exceedance instrument.
//! - [`sim`]: synthetic data-generating processes and Monte Carlo harness.

#![cfg_attr(not(feature = "std"), no_std)]
// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

mod error;
pub mod index;
pub mod proxy;
pub mod series;
pub mod sim;
pub mod special;
pub mod stats;
pub mod t90;
pub mod var;

mod par;

pub use error::{Error, Result};
pub use series::{MonthStamp, SeriesPanel, TimeSeries};

pub use nalgebra::{DMatrix, DVector};
