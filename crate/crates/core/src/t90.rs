//! Extreme-temperature instrument: the change in how often standardized
//! monthly temperature anomalies exceed the reference-period 90th
//! percentile, averaged across grid points.
//!
//! Per grid point:
//! 1. anomaly = (temp - reference mean of that calendar month) / reference
//!    standard deviation of that calendar month;
//! 2. exceedance = 100 when the anomaly is above the 90th percentile of the
//!    reference-window anomalies, else 0.
//!
//! Nationally, exceedance is averaged across grid points and the 10-point
//! reference baseline subtracted.

use alloc::string::String;
use alloc::vec::Vec;

use crate::series::{self, MonthStamp, TimeSeries};
use crate::stats;
use crate::{Error, Result};

/// Exceedance frequency of the reference period by construction, in percent.
pub const BASELINE_PCT: f64 = 10.0;
/// Minimum reference observations per calendar month.
pub const MIN_REFERENCE_PER_MONTH: usize = 20;
/// Minimum pooled reference anomalies for the percentile.
pub const MIN_REFERENCE_OBS: usize = 100;

pub fn default_reference_window() -> (MonthStamp, MonthStamp) {
    (MonthStamp::new(1961, 1).expect("valid month"), MonthStamp::new(1990, 12).expect("valid month"))
}

/// Monthly temperatures (°C) at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSeries {
    pub grid_id: String,
    pub temps: TimeSeries,
    pub reference: (MonthStamp, MonthStamp),
}

impl GridSeries {
    pub fn new(grid_id: impl Into<String>, temps: TimeSeries, reference: (MonthStamp, MonthStamp)) -> Result<Self> {
        let (from, to) = reference;
        if from < temps.start() || to > temps.end() || to < from {
            return Err(Error::InvalidRequest(alloc::format!(
                "reference window {from}..{to} not inside {}..{}",
                temps.start(),
                temps.end()
            )));
        }
        let mut counts = [0usize; 12];
        for (date, _) in temps.iter().filter(|(d, _)| *d >= from && *d <= to) {
            counts[date.month_index()] += 1;
        }
        let fewest = *counts.iter().min().unwrap();
        if fewest < MIN_REFERENCE_PER_MONTH {
            return Err(Error::TooFewReferenceObs { needed: MIN_REFERENCE_PER_MONTH, got: fewest });
        }
        Ok(Self { grid_id: grid_id.into(), temps, reference })
    }
}

/// The national instrument and the exceedance frequency it is derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct T90Series {
    /// Percentage-point change relative to the 10% baseline.
    pub t90: TimeSeries,
    /// Average exceedance frequency in percent.
    pub raw_frequency: TimeSeries,
}

pub fn standardized_anomaly(g: &GridSeries) -> Result<TimeSeries> {
    let (from, to) = g.reference;
    let mut by_month: [Vec<f64>; 12] = Default::default();
    for (date, v) in g.temps.iter().filter(|(d, _)| *d >= from && *d <= to) {
        by_month[date.month_index()].push(v);
    }
    let mut mean = [0.0; 12];
    let mut sd = [0.0; 12];
    for m in 0..12 {
        mean[m] = stats::mean(&by_month[m]);
        sd[m] = stats::sample_std(&by_month[m]);
        if !(sd[m] > 1e-12 * mean[m].abs().max(1.0)) {
            return Err(Error::ZeroVariance(alloc::format!("{} reference month {}", g.grid_id, m + 1)));
        }
    }
    let values = g.temps.iter().map(|(d, v)| (v - mean[d.month_index()]) / sd[d.month_index()]).collect();
    TimeSeries::new(g.grid_id.clone(), g.temps.start(), values)
}

/// 100 where the anomaly exceeds the reference 90th percentile
/// (linear-interpolation quantile), 0 elsewhere.
pub fn grid_exceedance(anomalies: &TimeSeries, reference: (MonthStamp, MonthStamp)) -> Result<TimeSeries> {
    let (from, to) = reference;
    let reference_values: Vec<f64> = anomalies.iter().filter(|(d, _)| *d >= from && *d <= to).map(|(_, v)| v).collect();
    if reference_values.len() < MIN_REFERENCE_OBS {
        return Err(Error::TooFewReferenceObs { needed: MIN_REFERENCE_OBS, got: reference_values.len() });
    }
    let threshold = stats::quantile(&reference_values, 0.9);
    anomalies.map(|v| if v > threshold { 100.0 } else { 0.0 })
}

/// Unweighted cross-grid average minus the baseline.
pub fn aggregate_t90(per_grid: &[TimeSeries]) -> Result<T90Series> {
    aggregate_t90_weighted(per_grid, None)
}

/// Weighted cross-grid average (weights normalized to sum to one, e.g. grid
/// cell areas) minus the baseline.
pub fn aggregate_t90_weighted(per_grid: &[TimeSeries], weights: Option<&[f64]>) -> Result<T90Series> {
    if per_grid.is_empty() {
        return Err(Error::EmptyOverlap);
    }
    let w: Vec<f64> = match weights {
        Some(w) if w.len() != per_grid.len() => {
            return Err(Error::LengthMismatch { expected: per_grid.len(), got: w.len() })
        }
        Some(w) => {
            let total: f64 = w.iter().sum();
            if w.iter().any(|x| *x < 0.0 || !x.is_finite()) || !(total > 0.0) {
                return Err(Error::InvalidArgument("grid weights must be non-negative with positive sum".into()));
            }
            w.iter().map(|x| x / total).collect()
        }
        None => alloc::vec![1.0 / per_grid.len() as f64; per_grid.len()],
    };
    let panel = if per_grid.len() == 1 {
        // A single grid needs no alignment (and may be one month long).
        None
    } else {
        Some(series::align(per_grid)?)
    };
    let aligned: &[TimeSeries] = panel.as_ref().map_or(per_grid, |p| p.series());
    let len = aligned[0].len();
    let start = aligned[0].start();
    let freq: Vec<f64> = (0..len).map(|t| aligned.iter().zip(&w).map(|(s, wi)| wi * s.values()[t]).sum()).collect();
    let raw_frequency = TimeSeries::new("t90_frequency", start, freq)?;
    let t90 = raw_frequency.map(|v| v - BASELINE_PCT)?.with_name("t90");
    Ok(T90Series { t90, raw_frequency })
}

/// Anomaly, exceedance and aggregation for a set of grids.
pub fn t90_from_grids(grids: &[GridSeries]) -> Result<T90Series> {
    let exceed =
        grids.iter().map(|g| grid_exceedance(&standardized_anomaly(g)?, g.reference)).collect::<Result<Vec<_>>>()?;
    aggregate_t90(&exceed)
}
