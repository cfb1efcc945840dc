use super::InstrumentSeries;
use crate::var::VarModel;
use crate::{Error, Result};

/// Rule-of-thumb first-stage threshold.
pub const DEFAULT_F_THRESHOLD: f64 = 10.0;

/// First-stage strength of the instrument for the target residual.
///
/// This is a heteroskedasticity-robust first-stage F statistic, used as a
/// stand-in relevance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelevanceReport {
    pub f_stat: f64,
    pub first_stage_coef: f64,
    pub threshold: f64,
    pub strong: bool,
    pub n_used: usize,
}

/// Regresses the first reduced-form residual on the demeaned instrument
/// (with intercept) and returns the HC1-robust Wald/F statistic of the slope.
pub fn relevance_test(model: &VarModel, z: &InstrumentSeries, threshold: f64) -> Result<RelevanceReport> {
    let t = model.n_obs();
    if z.len() != t {
        return Err(Error::LengthMismatch { expected: t, got: z.len() });
    }
    let pairs: alloc::vec::Vec<(f64, f64)> =
        z.values().iter().enumerate().filter_map(|(i, v)| v.map(|zv| (zv, model.residuals[(i, 0)]))).collect();
    let n = pairs.len();
    if n < 3 {
        return Err(Error::TooShort { needed: 3, got: n });
    }
    let nf = n as f64;
    let z_mean = pairs.iter().map(|p| p.0).sum::<f64>() / nf;
    let e_mean = pairs.iter().map(|p| p.1).sum::<f64>() / nf;
    let szz: f64 = pairs.iter().map(|(zv, _)| (zv - z_mean) * (zv - z_mean)).sum();
    if !(szz > 0.0) {
        return Err(Error::ZeroVariance("instrument".into()));
    }
    let sze: f64 = pairs.iter().map(|(zv, e)| (zv - z_mean) * (e - e_mean)).sum();
    let coef = sze / szz;
    let meat: f64 = pairs
        .iter()
        .map(|(zv, e)| {
            let zc = zv - z_mean;
            let u = e - e_mean - coef * zc;
            zc * zc * u * u
        })
        .sum();
    let var = nf / (nf - 2.0) * meat / (szz * szz);
    let f_stat = if var > 0.0 { coef * coef / var } else { f64::INFINITY };
    Ok(RelevanceReport { f_stat, first_stage_coef: coef, threshold, strong: f_stat > threshold, n_used: n })
}
