use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::VarModel;
use crate::special::chi2_sf;
use crate::{Error, Result};

/// Multivariate portmanteau statistic at one order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortmanteauOrder {
    pub order: usize,
    pub statistic: f64,
    pub df: usize,
    /// False when `order <= p`, where the lag-adjusted degrees of freedom
    /// would be non-positive and the unadjusted `n² h` is used instead.
    pub df_adjusted: bool,
    pub p_value: f64,
}

/// Small-sample corrected multivariate Ljung-Box statistics for orders
/// `1..=max_order` on the model residuals.
pub fn residual_autocorr_test(model: &VarModel, max_order: usize) -> Result<Vec<PortmanteauOrder>> {
    portmanteau(&model.residuals, max_order, model.lags())
}

/// `Q_h = T² Σ_{j=1}^{h} tr(C_j' C_0⁻¹ C_j C_0⁻¹) / (T - j)` with
/// `C_j = T⁻¹ Σ_t u_t u_{t-j}'` on demeaned rows of `residuals`.
/// Degrees of freedom are `n² (h - fitted_lags)` when positive.
pub fn portmanteau(residuals: &DMatrix<f64>, max_order: usize, fitted_lags: usize) -> Result<Vec<PortmanteauOrder>> {
    if max_order == 0 {
        return Err(Error::InvalidArgument("portmanteau order must be at least 1".into()));
    }
    let (t, n) = residuals.shape();
    if t <= max_order + 1 {
        return Err(Error::TooShort { needed: max_order + 2, got: t });
    }
    let mut u = residuals.clone();
    for j in 0..n {
        let m = u.column(j).mean();
        u.column_mut(j).add_scalar_mut(-m);
    }
    let tf = t as f64;
    let autocov = |lag: usize| -> DMatrix<f64> {
        let a = u.rows(lag, t - lag);
        let b = u.rows(0, t - lag);
        a.transpose() * b / tf
    };
    let c0_inv = autocov(0).cholesky().ok_or(Error::SingularSigma)?.inverse();

    let mut out = Vec::with_capacity(max_order);
    let mut acc = 0.0;
    for h in 1..=max_order {
        let cj = autocov(h);
        let term = (cj.transpose() * &c0_inv * &cj * &c0_inv).trace();
        acc += term / (tf - h as f64);
        let statistic = tf * tf * acc;
        let (df, df_adjusted) = if h > fitted_lags { (n * n * (h - fitted_lags), true) } else { (n * n * h, false) };
        out.push(PortmanteauOrder { order: h, statistic, df, df_adjusted, p_value: chi2_sf(statistic, df) });
    }
    Ok(out)
}

/// Contemporaneous correlation matrix of the reduced-form residuals.
pub fn shock_correlation(model: &VarModel) -> DMatrix<f64> {
    let s = &model.sigma_eta;
    let n = s.nrows();
    DMatrix::from_fn(
        n,
        n,
        |i, j| {
            if i == j {
                1.0
            } else {
                (s[(i, j)] / libm::sqrt(s[(i, i)] * s[(j, j)])).clamp(-1.0, 1.0)
            }
        },
    )
}
