//! External-instrument ("proxy") identification of one structural shock.
//!
//! With reduced-form innovations `η_t = B ε_t`, `Σ_ε = I`, and an instrument
//! `z_t = φ ε_{1t} + ω_t` uncorrelated with the other shocks, the moments
//!
//! ```text
//! Σ_zη Σ_η⁻¹ Σ_ηz = φ²
//! Σ_zη            = φ B_•1'
//! ```
//!
//! pin down `θ = (φ, B_•1')'`. The system is just identified (n + 1 moments,
//! n + 1 parameters), so the minimum-distance estimate is available in closed
//! form and the distance criterion is zero at the solution. Impulse responses
//! follow from the VAR companion form; confidence bands come from a moving
//! block bootstrap that resamples residual and instrument rows jointly.

mod bootstrap;
mod identify;
mod irf;
mod moments;
mod relevance;

pub use bootstrap::{default_block_len, mbb_bands, BootstrapConfig, IrfBundle};
pub use identify::{identify, identify_with, IdentifyOptions, ProxyIdentification, SignConvention};
pub use irf::{impulse_responses, irf};
pub use moments::{compute_moments, moments_from_residuals, MomentSet};
pub use relevance::{relevance_test, RelevanceReport, DEFAULT_F_THRESHOLD};

use alloc::vec::Vec;

use crate::series::{MonthStamp, TimeSeries};
use crate::var::VarModel;
use crate::{Error, Result};

/// Instrument values on the VAR residual window. Missing months are `None`
/// and are dropped from the moment computation only.
#[derive(Debug, Clone, PartialEq)]
pub struct InstrumentSeries {
    start: MonthStamp,
    values: Vec<Option<f64>>,
}

impl InstrumentSeries {
    pub fn new(start: MonthStamp, values: Vec<Option<f64>>) -> Result<Self> {
        if let Some(index) = values.iter().position(|v| matches!(v, Some(x) if !x.is_finite())) {
            return Err(Error::NonFinite { name: "instrument".into(), index });
        }
        Ok(Self { start, values })
    }

    pub fn from_series(series: &TimeSeries) -> Self {
        Self { start: series.start(), values: series.values().iter().copied().map(Some).collect() }
    }

    /// Picks `series` values on the residual window of `model`; months the
    /// series does not cover become missing.
    pub fn aligned_to(model: &VarModel, series: &TimeSeries) -> Self {
        let start = model.residual_start();
        let values = (0..model.n_obs()).map(|i| series.get(start.offset(i as i64))).collect();
        Self { start, values }
    }

    pub fn start(&self) -> MonthStamp {
        self.start
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn n_missing(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }
}
