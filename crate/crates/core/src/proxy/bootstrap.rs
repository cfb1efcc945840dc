use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use super::{compute_moments, identify_with, irf, moments_from_residuals, IdentifyOptions, InstrumentSeries};
use crate::par::map_indexed;
use crate::series::SeriesPanel;
use crate::sim::{replicate_rng, var_recursion};
use crate::stats::quantile_sorted;
use crate::var::{estimate_var, estimate_var_matrix, VarSpec};
use crate::{Error, Result};

/// Share of replicates allowed to fail before the bands are rejected.
const MAX_DROPPED_SHARE: f64 = 0.10;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapConfig {
    pub horizon: usize,
    /// Central coverage of the bands, in (0, 1).
    pub level: f64,
    pub reps: usize,
    /// Defaults to [`default_block_len`] of the residual sample.
    pub block_len: Option<usize>,
    pub seed: u64,
    pub identify: IdentifyOptions,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self { horizon: 12, level: 0.68, reps: 1000, block_len: None, seed: 0, identify: IdentifyOptions::default() }
    }
}

/// Point impulse responses with pointwise bootstrap bands.
#[derive(Debug, Clone, PartialEq)]
pub struct IrfBundle {
    pub names: Vec<String>,
    pub horizon: usize,
    /// `(horizon + 1) x n`; row 0 is `B_•1`.
    pub point: DMatrix<f64>,
    pub lower: DMatrix<f64>,
    pub upper: DMatrix<f64>,
    pub level: f64,
    pub block_len: usize,
    /// Replicates used for the quantiles.
    pub reps: usize,
    /// Replicates dropped after failed estimation or identification.
    pub dropped: usize,
    /// `(horizon, variable)` cells where the point estimate lies outside
    /// its band.
    pub crossings: Vec<(usize, usize)>,
}

/// `⌈5.03 T^{1/4}⌉`.
pub fn default_block_len(n_obs: usize) -> usize {
    libm::ceil(5.03 * libm::pow(n_obs as f64, 0.25)) as usize
}

/// Moving-block bootstrap bands for the proxy-identified responses.
///
/// Each replicate draws blocks of `block_len` consecutive
/// (residual, instrument) rows, centers them position-by-position across all
/// admissible blocks, rebuilds pseudo-data through the estimated VAR from the
/// observed initial values, and re-runs estimation, moments, identification
/// and responses. Replicate `r` uses its own stream of the master seed, so
/// results do not depend on scheduling.
pub fn mbb_bands(
    panel: &SeriesPanel,
    spec: VarSpec,
    z: &InstrumentSeries,
    config: &BootstrapConfig,
) -> Result<IrfBundle> {
    if config.reps < 100 {
        return Err(Error::InvalidArgument(alloc::format!(
            "bootstrap needs at least 100 replicates, got {}",
            config.reps
        )));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(Error::InvalidArgument(alloc::format!("level {} outside (0, 1)", config.level)));
    }
    let model = estimate_var(panel, spec)?;
    let t_eff = model.n_obs();
    let block_len = config.block_len.unwrap_or_else(|| default_block_len(t_eff));
    if block_len == 0 || block_len >= t_eff {
        return Err(Error::InvalidArgument(alloc::format!(
            "block length {block_len} leaves fewer than two distinct blocks in {t_eff} rows"
        )));
    }
    let ident = identify_with(&compute_moments(&model, z)?, &config.identify)?;
    let point = irf(&model, &ident, config.horizon);

    let (eta_mean, z_mean) = position_means(&model.residuals, z.values(), block_len);
    let n_blocks = t_eff - block_len + 1;
    let phi = model.lag_matrices();
    let intercept = model.intercept();
    let initial = model.data.rows(0, spec.lags).into_owned();
    let n = model.n_vars();
    // Re-estimation shrinks residual covariance by about (T - K) / T;
    // inflating the draws keeps the bootstrap world centered on Σ̂_η.
    let inflate = libm::sqrt(t_eff as f64 / (t_eff - spec.n_regressors(n)) as f64);

    let draws: Vec<Option<DMatrix<f64>>> = map_indexed(config.reps, |r| {
        let mut rng = replicate_rng(config.seed, r as u64);
        let mut eta_star = DMatrix::zeros(t_eff, n);
        let mut z_star: Vec<Option<f64>> = Vec::with_capacity(t_eff);
        while z_star.len() < t_eff {
            let start = rng.random_range(0..n_blocks);
            #[allow(clippy::needless_range_loop)]
            for s in 0..block_len {
                let row = z_star.len();
                if row == t_eff {
                    break;
                }
                let centered = (model.residuals.row(start + s) - eta_mean.row(s)) * inflate;
                eta_star.row_mut(row).copy_from(&centered);
                z_star.push(z.values()[start + s].map(|v| v - z_mean[s]));
            }
        }
        let mut innovations = DMatrix::zeros(t_eff + spec.lags, n);
        innovations.rows_mut(spec.lags, t_eff).copy_from(&eta_star);
        let data = var_recursion(&phi, intercept.as_ref(), &innovations, Some(&initial));
        let m = estimate_var_matrix(&data, &model.names, model.start, spec).ok()?;
        let mom = moments_from_residuals(&m.residuals, &m.sigma_eta, &z_star).ok()?;
        let id = identify_with(&mom, &config.identify).ok()?;
        Some(irf(&m, &id, config.horizon))
    });

    let kept: Vec<DMatrix<f64>> = draws.into_iter().flatten().collect();
    let dropped = config.reps - kept.len();
    if dropped as f64 > MAX_DROPPED_SHARE * config.reps as f64 {
        return Err(Error::TooManyFailures { failed: dropped, total: config.reps });
    }

    let tail = (1.0 - config.level) / 2.0;
    let rows = config.horizon + 1;
    let mut lower = DMatrix::zeros(rows, n);
    let mut upper = DMatrix::zeros(rows, n);
    let mut crossings = Vec::new();
    let mut cell = Vec::with_capacity(kept.len());
    for h in 0..rows {
        for j in 0..n {
            cell.clear();
            cell.extend(kept.iter().map(|d| d[(h, j)]));
            cell.sort_by(|a, b| a.total_cmp(b));
            lower[(h, j)] = quantile_sorted(&cell, tail);
            upper[(h, j)] = quantile_sorted(&cell, 1.0 - tail);
            if point[(h, j)] < lower[(h, j)] || point[(h, j)] > upper[(h, j)] {
                crossings.push((h, j));
            }
        }
    }

    Ok(IrfBundle {
        names: model.names.clone(),
        horizon: config.horizon,
        point,
        lower,
        upper,
        level: config.level,
        block_len,
        reps: kept.len(),
        dropped,
        crossings,
    })
}

/// Mean of the rows a block can place at each within-block position `s`,
/// i.e. rows `s..s + T - ℓ + 1`. Drawn rows are centered by these means.
fn position_means(eta: &DMatrix<f64>, z: &[Option<f64>], block_len: usize) -> (DMatrix<f64>, Vec<f64>) {
    let (t, n) = eta.shape();
    let n_blocks = t - block_len + 1;
    let mut eta_mean = DMatrix::zeros(block_len, n);
    let mut z_mean = Vec::with_capacity(block_len);
    for s in 0..block_len {
        let window = eta.rows(s, n_blocks);
        for j in 0..n {
            eta_mean[(s, j)] = window.column(j).mean();
        }
        let present: Vec<f64> = z[s..s + n_blocks].iter().flatten().copied().collect();
        z_mean.push(if present.is_empty() { 0.0 } else { present.iter().sum::<f64>() / present.len() as f64 });
    }
    (eta_mean, z_mean)
}
