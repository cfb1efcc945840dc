use nalgebra::{DMatrix, DVector};

use super::InstrumentSeries;
use crate::var::VarModel;
use crate::{Error, Result};

/// Reduced-form moments used for identification.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet {
    /// `Σ_zη` as an n-vector.
    pub sigma_z_eta: DVector<f64>,
    pub sigma_eta: DMatrix<f64>,
    /// `Σ_zη Σ_η⁻¹ Σ_ηz`.
    pub scalar_moment: f64,
    pub n_used: usize,
    pub n_dropped: usize,
}

pub fn compute_moments(model: &VarModel, z: &InstrumentSeries) -> Result<MomentSet> {
    moments_from_residuals(&model.residuals, &model.sigma_eta, z.values())
}

/// `Σ_zη = T⁻¹ Σ_t (z_t - z̄) η_t'` over rows where the instrument is
/// present; the quadratic form is evaluated through a Cholesky solve.
pub fn moments_from_residuals(
    residuals: &DMatrix<f64>,
    sigma_eta: &DMatrix<f64>,
    z: &[Option<f64>],
) -> Result<MomentSet> {
    let (t, n) = residuals.shape();
    if z.len() != t {
        return Err(Error::LengthMismatch { expected: t, got: z.len() });
    }
    let used: usize = z.iter().flatten().count();
    if used < 2 {
        return Err(Error::TooShort { needed: 2, got: used });
    }
    let z_mean = z.iter().flatten().sum::<f64>() / used as f64;
    let mut sigma_z_eta = DVector::zeros(n);
    for (row, zt) in z.iter().enumerate() {
        if let Some(v) = zt {
            sigma_z_eta.axpy(v - z_mean, &residuals.row(row).transpose(), 1.0);
        }
    }
    sigma_z_eta /= used as f64;

    let chol = sigma_eta.clone().cholesky().ok_or(Error::SingularSigma)?;
    let half = chol.l().solve_lower_triangular(&sigma_z_eta).ok_or(Error::SingularSigma)?;
    Ok(MomentSet {
        sigma_z_eta,
        sigma_eta: sigma_eta.clone(),
        scalar_moment: half.norm_squared(),
        n_used: used,
        n_dropped: t - used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::standard_normal_matrix;
    use alloc::vec::Vec;
    use rand::SeedableRng;

    #[test]
    fn unit_construction() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut eta = standard_normal_matrix(&mut rng, 200, 3);
        for j in 0..3 {
            let m = eta.column(j).mean();
            eta.column_mut(j).add_scalar_mut(-m);
        }
        // Whiten so that η'η / T = I exactly.
        let s = eta.transpose() * &eta / 200.0;
        let l = s.cholesky().unwrap().l();
        let eta = (l.solve_lower_triangular(&eta.transpose()).unwrap()).transpose();
        let sigma = eta.transpose() * &eta / 200.0;
        assert!((&sigma - DMatrix::identity(3, 3)).amax() < 1e-12);
        let z: Vec<Option<f64>> = eta.column(0).iter().map(|&v| Some(v)).collect();
        let m = moments_from_residuals(&eta, &sigma, &z).unwrap();
        assert!((m.sigma_z_eta.clone() - DVector::from_vec(alloc::vec![1.0, 0.0, 0.0])).amax() < 1e-12);
        assert!((m.scalar_moment - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_noise_gives_small_moment() {
        let mut small = 0;
        for seed in 0..200u64 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let eta = standard_normal_matrix(&mut rng, 240, 3);
            let sigma = eta.transpose() * &eta / 240.0;
            let zs = standard_normal_matrix(&mut rng, 240, 1);
            let z: Vec<Option<f64>> = zs.iter().map(|&v| Some(v)).collect();
            small += (moments_from_residuals(&eta, &sigma, &z).unwrap().scalar_moment < 0.05) as usize;
        }
        assert!(small as f64 / 200.0 >= 0.95);
    }

    #[test]
    fn guards_and_missing_rows() {
        let eta = DMatrix::from_fn(10, 2, |t, j| ((t * 3 + j * 5) % 7) as f64 - 3.0);
        let sigma = eta.transpose() * &eta / 10.0;
        let short: Vec<Option<f64>> = (0..9).map(|v| Some(v as f64)).collect();
        assert_eq!(moments_from_residuals(&eta, &sigma, &short), Err(Error::LengthMismatch { expected: 10, got: 9 }));
        let mut z: Vec<Option<f64>> = (0..10).map(|v| Some(v as f64)).collect();
        z[3] = None;
        let m = moments_from_residuals(&eta, &sigma, &z).unwrap();
        assert_eq!((m.n_used, m.n_dropped), (9, 1));
        let singular = DMatrix::from_element(2, 2, 1.0);
        assert_eq!(moments_from_residuals(&eta, &singular, &z), Err(Error::SingularSigma));
    }
}
