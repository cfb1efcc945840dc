use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::VarModel;
use crate::special::chi2_sf;
use crate::{Error, Result};

/// Coefficient covariance used in the Wald statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CovarianceKind {
    /// `s² (X'X)⁻¹` with `s² = SSR / (T - p - K)`.
    #[default]
    Homoskedastic,
    /// White (HC0) sandwich.
    Robust,
}

/// Wald test that every lag of `excluded` drops out of the `dependent`
/// equation.
#[derive(Debug, Clone, PartialEq)]
pub struct GrangerResult {
    pub dependent: String,
    pub excluded: Vec<String>,
    pub wald_stat: f64,
    pub df: usize,
    pub p_value: f64,
}

impl GrangerResult {
    /// Row label: the excluded variable, or `All` for the joint test.
    pub fn label(&self, n_vars: usize) -> String {
        if self.excluded.len() == n_vars - 1 && n_vars > 2 {
            "All".into()
        } else {
            self.excluded.join("+")
        }
    }
}

pub fn granger_test(
    model: &VarModel,
    dependent: &str,
    excluded: &[&str],
    covariance: CovarianceKind,
) -> Result<GrangerResult> {
    let dep = model.position(dependent)?;
    if excluded.is_empty() {
        return Err(Error::InvalidRequest("no excluded variables".into()));
    }
    let mut ex = Vec::with_capacity(excluded.len());
    for name in excluded {
        let j = model.position(name)?;
        if j == dep {
            return Err(Error::InvalidRequest(alloc::format!("`{name}` is the dependent variable")));
        }
        if ex.contains(&j) {
            return Err(Error::InvalidRequest(alloc::format!("`{name}` listed twice")));
        }
        ex.push(j);
    }

    let p = model.lags();
    let idx: Vec<usize> = ex
        .iter()
        .flat_map(|&j| (1..=p).map(move |lag| (j, lag)))
        .map(|(j, lag)| model.regressor_index(j, lag))
        .collect();
    let q = idx.len();
    let b = model.coeffs.row(dep);
    let b_r = DVector::from_fn(q, |i, _| b[idx[i]]);

    let cov = coefficient_covariance(model, dep, covariance);
    let v_r = DMatrix::from_fn(q, q, |i, j| cov[(idx[i], idx[j])]);
    let chol = v_r.cholesky().ok_or(Error::RankDeficient)?;
    let wald_stat = b_r.dot(&chol.solve(&b_r)).max(0.0);

    Ok(GrangerResult {
        dependent: dependent.into(),
        excluded: ex.iter().map(|&j| model.names[j].clone()).collect(),
        wald_stat,
        df: q,
        p_value: chi2_sf(wald_stat, q),
    })
}

fn coefficient_covariance(model: &VarModel, eq: usize, kind: CovarianceKind) -> DMatrix<f64> {
    let e = model.residuals.column(eq);
    match kind {
        CovarianceKind::Homoskedastic => {
            let k = model.regressors.ncols();
            let dof = (model.n_obs() - k) as f64;
            let s2 = e.dot(&e) / dof;
            &model.xtx_inv * s2
        }
        CovarianceKind::Robust => {
            let x = &model.regressors;
            let mut meat = DMatrix::zeros(x.ncols(), x.ncols());
            for t in 0..x.nrows() {
                let row = x.row(t);
                meat += row.transpose() * row * (e[t] * e[t]);
            }
            &model.xtx_inv * meat * &model.xtx_inv
        }
    }
}

/// Every pairwise test plus, for three or more variables, the joint test
/// excluding all other variables, grouped by dependent variable.
pub fn granger_table(model: &VarModel, covariance: CovarianceKind) -> Result<Vec<GrangerResult>> {
    let n = model.n_vars();
    let mut out = Vec::new();
    for dep in &model.names {
        let others: Vec<&str> = model.names.iter().filter(|x| *x != dep).map(String::as_str).collect();
        for other in &others {
            out.push(granger_test(model, dep, &[other], covariance)?);
        }
        if n > 2 {
            out.push(granger_test(model, dep, &others, covariance)?);
        }
    }
    Ok(out)
}
