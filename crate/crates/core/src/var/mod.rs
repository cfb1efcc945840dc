//! Reduced-form vector autoregressions.
//!
//! `Y_t = c + Φ_1 Y_{t-1} + ... + Φ_p Y_{t-p} + η_t`, estimated equation by
//! equation with least squares (Householder QR on the stacked regressors).

mod diagnostics;
mod granger;
mod pca;

pub use diagnostics::{portmanteau, residual_autocorr_test, shock_correlation, PortmanteauOrder};
pub use granger::{granger_table, granger_test, CovarianceKind, GrangerResult};
pub use pca::{pca, PcaResult};

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{Complex, DMatrix, DVector};

use crate::series::{MonthStamp, SeriesPanel};
use crate::{Error, Result};

/// Lag count and deterministic terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VarSpec {
    pub lags: usize,
    pub include_intercept: bool,
}

impl VarSpec {
    pub fn new(lags: usize) -> Self {
        Self { lags, include_intercept: true }
    }

    pub fn without_intercept(mut self) -> Self {
        self.include_intercept = false;
        self
    }

    /// Regressors per equation.
    pub fn n_regressors(&self, n_vars: usize) -> usize {
        n_vars * self.lags + self.include_intercept as usize
    }
}

/// An estimated VAR.
#[derive(Debug, Clone)]
pub struct VarModel {
    pub spec: VarSpec,
    pub names: Vec<String>,
    /// `n x K` with columns `[c, Φ_1, ..., Φ_p]` (intercept column only when
    /// included).
    pub coeffs: DMatrix<f64>,
    /// `(T - p) x n` least-squares residuals.
    pub residuals: DMatrix<f64>,
    /// `η̂'η̂ / (T - p)`.
    pub sigma_eta: DMatrix<f64>,
    pub r2: Vec<f64>,
    /// Observations the model was fitted on, `T x n`.
    pub data: DMatrix<f64>,
    /// Stacked regressors, `(T - p) x K`.
    pub regressors: DMatrix<f64>,
    /// `(X'X)^{-1}`.
    pub xtx_inv: DMatrix<f64>,
    /// First month of the data.
    pub start: MonthStamp,
}

impl VarModel {
    pub fn n_vars(&self) -> usize {
        self.names.len()
    }

    pub fn lags(&self) -> usize {
        self.spec.lags
    }

    /// Effective sample size `T - p`.
    pub fn n_obs(&self) -> usize {
        self.residuals.nrows()
    }

    /// First month of the residual sample.
    pub fn residual_start(&self) -> MonthStamp {
        self.start.offset(self.spec.lags as i64)
    }

    pub fn position(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::UnknownVariable(name.into()))
    }

    pub fn intercept(&self) -> Option<DVector<f64>> {
        self.spec.include_intercept.then(|| self.coeffs.column(0).into_owned())
    }

    /// `Φ_lag` for `lag` in `1..=p`.
    pub fn lag_matrix(&self, lag: usize) -> DMatrix<f64> {
        assert!((1..=self.spec.lags).contains(&lag), "lag {lag} out of range");
        let n = self.n_vars();
        let offset = self.spec.include_intercept as usize + (lag - 1) * n;
        self.coeffs.columns(offset, n).into_owned()
    }

    pub fn lag_matrices(&self) -> Vec<DMatrix<f64>> {
        (1..=self.spec.lags).map(|l| self.lag_matrix(l)).collect()
    }

    /// Column in the regressor matrix holding `variable` at `lag`.
    pub fn regressor_index(&self, variable: usize, lag: usize) -> usize {
        self.spec.include_intercept as usize + (lag - 1) * self.n_vars() + variable
    }

    pub fn fitted(&self) -> DMatrix<f64> {
        &self.regressors * self.coeffs.transpose()
    }

    pub fn companion(&self) -> CompanionForm {
        CompanionForm::from_lags(&self.lag_matrices())
    }

    pub fn stability(&self) -> Stability {
        self.companion().stability()
    }
}

/// Stacks `Y_{t-1}', ..., Y_{t-p}'` (with a leading 1 when requested) for
/// `t = p..T`.
pub fn lagged_regressors(data: &DMatrix<f64>, spec: VarSpec) -> DMatrix<f64> {
    let (t_total, n) = data.shape();
    let p = spec.lags;
    let k = spec.n_regressors(n);
    let c = spec.include_intercept as usize;
    DMatrix::from_fn(t_total - p, k, |row, col| {
        if col < c {
            1.0
        } else {
            let lag = (col - c) / n + 1;
            let var = (col - c) % n;
            data[(row + p - lag, var)]
        }
    })
}

/// Least-squares fit of every equation.
pub fn estimate_var(panel: &SeriesPanel, spec: VarSpec) -> Result<VarModel> {
    estimate_var_matrix(&panel.to_matrix(), &panel.names(), panel.start(), spec)
}

pub(crate) fn estimate_var_matrix(
    data: &DMatrix<f64>,
    names: &[String],
    start: MonthStamp,
    spec: VarSpec,
) -> Result<VarModel> {
    if spec.lags == 0 {
        return Err(Error::InvalidArgument("VAR needs at least one lag".into()));
    }
    let (t_total, n) = data.shape();
    let p = spec.lags;
    if t_total <= n * p + p + 1 {
        return Err(Error::TooShort { needed: n * p + p + 2, got: t_total });
    }
    let x = lagged_regressors(data, spec);
    let y = data.rows(p, t_total - p).into_owned();
    let k = x.ncols();

    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if r.diagonal().iter().any(|v| v.abs() <= 1e-12 * scale) {
        return Err(Error::RankDeficient);
    }
    let qty = qr.q().transpose() * &y;
    let beta = r.solve_upper_triangular(&qty).ok_or(Error::RankDeficient)?;
    let r_inv = r.solve_upper_triangular(&DMatrix::identity(k, k)).ok_or(Error::RankDeficient)?;
    let xtx_inv = &r_inv * r_inv.transpose();

    let residuals = &y - &x * &beta;
    let t_eff = (t_total - p) as f64;
    let sigma_eta = residuals.transpose() * &residuals / t_eff;
    let r2 = (0..n)
        .map(|j| {
            let col = y.column(j);
            let mean = col.mean();
            let sst: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
            let ssr: f64 = residuals.column(j).iter().map(|e| e * e).sum();
            if sst > 0.0 {
                (1.0 - ssr / sst).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect();

    Ok(VarModel {
        spec,
        names: names.to_vec(),
        coeffs: beta.transpose(),
        residuals,
        sigma_eta,
        r2,
        data: data.clone(),
        regressors: x,
        xtx_inv,
        start,
    })
}

/// First-order stacked form of a VAR(p).
#[derive(Debug, Clone, PartialEq)]
pub struct CompanionForm {
    /// `np x np`: top block row `[Φ_1 ... Φ_p]`, identity blocks below.
    pub matrix: DMatrix<f64>,
    /// `n x np` selector `[I_n 0 ... 0]`.
    pub selector: DMatrix<f64>,
}

impl CompanionForm {
    pub fn from_lags(lags: &[DMatrix<f64>]) -> Self {
        assert!(!lags.is_empty(), "companion form needs at least one lag matrix");
        let n = lags[0].nrows();
        let np = n * lags.len();
        let mut matrix = DMatrix::zeros(np, np);
        for (i, phi) in lags.iter().enumerate() {
            matrix.view_mut((0, i * n), (n, n)).copy_from(phi);
        }
        for i in n..np {
            matrix[(i, i - n)] = 1.0;
        }
        let selector = DMatrix::from_fn(n, np, |r, c| (r == c) as u8 as f64);
        Self { matrix, selector }
    }

    pub fn n_vars(&self) -> usize {
        self.selector.nrows()
    }

    pub fn eigenvalues(&self) -> Vec<Complex<f64>> {
        nalgebra::Schur::try_new(self.matrix.clone(), 1e-14, 100_000)
            .map(|s| s.complex_eigenvalues().iter().copied().collect())
            .unwrap_or_default()
    }

    pub fn stability(&self) -> Stability {
        let eig = self.eigenvalues();
        let radius =
            if eig.is_empty() { f64::NAN } else { eig.iter().map(|z| libm::hypot(z.re, z.im)).fold(0.0, f64::max) };
        Stability { stable: radius < 1.0, radius }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    pub stable: bool,
    /// Largest eigenvalue modulus of the companion matrix.
    pub radius: f64,
}
