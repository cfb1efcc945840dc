use alloc::vec::Vec;

use crate::series::TimeSeries;
use crate::stats;
use crate::{Error, Result};

fn check_positive(s: &TimeSeries) -> Result<()> {
    match s.iter().find(|&(_, v)| v <= 0.0) {
        Some((date, value)) => Err(Error::NonPositiveLevel { name: s.name().into(), date, value }),
        None => Ok(()),
    }
}

fn growth(s: &TimeSeries, lag: usize) -> Result<TimeSeries> {
    if s.len() <= lag {
        return Err(Error::TooShort { needed: lag + 1, got: s.len() });
    }
    check_positive(s)?;
    let x = s.values();
    let out = (lag..x.len()).map(|t| 100.0 * (x[t] - x[t - lag]) / x[t - lag]).collect();
    TimeSeries::new(s.name(), s.start().offset(lag as i64), out)
}

/// Month-on-month percentage change, `100 (x_t - x_{t-1}) / x_{t-1}`.
pub fn pct_change(s: &TimeSeries) -> Result<TimeSeries> {
    growth(s, 1)
}

/// Year-on-year growth rate in percent.
pub fn yoy_growth(s: &TimeSeries) -> Result<TimeSeries> {
    growth(s, 12)
}

/// Rescales to sample mean zero and unit sample standard deviation (`n - 1`).
pub fn standardize(s: &TimeSeries) -> Result<TimeSeries> {
    if s.len() < 2 {
        return Err(Error::TooShort { needed: 2, got: s.len() });
    }
    let m = stats::mean(s.values());
    let sd = stats::sample_std(s.values());
    if !(sd > 0.0) || sd <= 1e-14 * m.abs() {
        return Err(Error::ZeroVariance(s.name().into()));
    }
    s.map(|v| (v - m) / sd)
}

/// Removes month-of-year means and adds back the grand mean.
pub fn seasonal_adjust(s: &TimeSeries) -> Result<TimeSeries> {
    if s.len() < 24 {
        return Err(Error::TooShort { needed: 24, got: s.len() });
    }
    let mut sums = [0.0; 12];
    let mut counts = [0usize; 12];
    for (date, v) in s.iter() {
        sums[date.month_index()] += v;
        counts[date.month_index()] += 1;
    }
    let grand = stats::mean(s.values());
    let month_means: Vec<f64> = sums.iter().zip(counts).map(|(s, c)| s / c as f64).collect();
    let out = s.iter().map(|(date, v)| v - month_means[date.month_index()] + grand).collect();
    TimeSeries::new(s.name(), s.start(), out)
}
