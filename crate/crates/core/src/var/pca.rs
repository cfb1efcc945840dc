use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::series::SeriesPanel;
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PcaResult {
    /// `n x n`, one orthonormal loading vector per column, ordered by
    /// decreasing eigenvalue. Each column's largest-magnitude entry is positive.
    pub loadings: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
    /// Eigenvalue shares, descending, summing to one.
    pub explained: Vec<f64>,
    /// Component scores named `pc1`, `pc2`, ...
    pub scores: SeriesPanel,
}

/// Principal components of the panel's correlation matrix
/// (`standardize_first`) or covariance matrix.
pub fn pca(panel: &SeriesPanel, standardize_first: bool) -> Result<PcaResult> {
    let n = panel.n_vars();
    if n < 2 {
        return Err(Error::InvalidArgument("PCA needs at least two series".into()));
    }
    let t = panel.len();
    let mut z = panel.to_matrix();
    for (j, s) in panel.series().iter().enumerate() {
        let mean = z.column(j).mean();
        z.column_mut(j).add_scalar_mut(-mean);
        if standardize_first {
            let sd = libm::sqrt(z.column(j).norm_squared() / (t as f64 - 1.0));
            if !(sd > 0.0) {
                return Err(Error::ZeroVariance(s.name().into()));
            }
            z.column_mut(j).scale_mut(1.0 / sd);
        }
    }
    let cov = z.transpose() * &z / (t as f64 - 1.0);
    let eig = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let mut loadings = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    for mut col in loadings.column_iter_mut() {
        let pivot = col.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            col.neg_mut();
        }
    }
    let total: f64 = eigenvalues.iter().sum();
    let explained = eigenvalues.iter().map(|v| v / total).collect();
    let names: Vec<String> = (1..=n).map(|k| format!("pc{k}")).collect();
    let scores = SeriesPanel::from_matrix(panel.start(), &names, &(z * &loadings))?;
    Ok(PcaResult { loadings, eigenvalues, explained, scores })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::MonthStamp;
    use crate::sim::standard_normal_matrix;
    use crate::stats;
    use rand::SeedableRng;

    /// Two series with sample correlation exactly `rho`: `b` is built from a
    /// component orthogonalized against `a`.
    pub(crate) fn pair_with_correlation(rho: f64, t: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let raw = standard_normal_matrix(&mut rng, t, 2);
        let center = |v: Vec<f64>| {
            let m = stats::mean(&v);
            v.into_iter().map(|x| x - m).collect::<Vec<f64>>()
        };
        let a = center(raw.column(0).iter().copied().collect());
        let w = center(raw.column(1).iter().copied().collect());
        let aa: f64 = a.iter().map(|x| x * x).sum();
        let aw: f64 = a.iter().zip(&w).map(|(x, y)| x * y).sum();
        let w: Vec<f64> = w.iter().zip(&a).map(|(y, x)| y - aw / aa * x).collect();
        let ww: f64 = w.iter().map(|x| x * x).sum();
        let scale = libm::sqrt(aa / ww);
        let b: Vec<f64> = a.iter().zip(&w).map(|(x, y)| rho * x + libm::sqrt(1.0 - rho * rho) * y * scale).collect();
        DMatrix::from_fn(t, 2, |r, c| if c == 0 { a[r] * 3.0 + 10.0 } else { b[r] - 4.0 })
    }

    fn panel(data: &DMatrix<f64>) -> SeriesPanel {
        let names: Vec<String> = (0..data.ncols()).map(|i| format!("s{i}")).collect();
        SeriesPanel::from_matrix(MonthStamp::new(2005, 1).unwrap(), &names, data).unwrap()
    }

    #[test]
    fn correlated_pair_share() {
        let data = pair_with_correlation(0.71, 240, 1);
        let col = |j: usize| data.column(j).iter().copied().collect::<Vec<_>>();
        assert!((stats::correlation(&col(0), &col(1)) - 0.71).abs() < 1e-12);
        let res = pca(&panel(&data), true).unwrap();
        assert!((res.explained[0] - 0.855).abs() < 1e-10);
        assert!((res.explained[1] - 0.145).abs() < 1e-10);
    }

    #[test]
    fn duplicated_and_uncorrelated() {
        let dup = pair_with_correlation(1.0, 100, 2);
        let res = pca(&panel(&dup), true).unwrap();
        assert!((res.explained[0] - 1.0).abs() < 1e-12);
        let iso = pair_with_correlation(0.0, 100, 3);
        let res = pca(&panel(&iso), true).unwrap();
        assert!((res.explained[0] - 0.5).abs() < 1e-12);
        assert!((res.explained[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_rejected() {
        let mut data = pair_with_correlation(0.3, 50, 4);
        data.column_mut(1).fill(2.0);
        assert!(matches!(pca(&panel(&data), true), Err(Error::ZeroVariance(_))));
        assert!(pca(&panel(&data), false).is_ok());
    }

    #[test]
    fn loadings_scores_and_order_invariance() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let base = standard_normal_matrix(&mut rng, 200, 4);
        let mix = DMatrix::from_row_slice(
            4,
            4,
            &[1.0, 0.5, 0.2, 0.0, 0.0, 1.0, 0.4, 0.1, 0.0, 0.0, 1.0, 0.3, 0.0, 0.0, 0.0, 1.0],
        );
        let data = base * mix;
        let res = pca(&panel(&data), true).unwrap();
        let gram = res.loadings.transpose() * &res.loadings;
        assert!((gram - DMatrix::identity(4, 4)).amax() < 1e-10);
        assert!((res.explained.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        assert!(res.explained.windows(2).all(|w| w[0] >= w[1]));
        for col in res.loadings.column_iter() {
            let pivot = col.iter().copied().fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
            assert!(pivot > 0.0);
        }
        let s = res.scores.to_matrix();
        for i in 0..4 {
            for j in 0..i {
                let a: Vec<f64> = s.column(i).iter().copied().collect();
                let b: Vec<f64> = s.column(j).iter().copied().collect();
                assert!(stats::correlation(&a, &b).abs() < 1e-8);
            }
        }
        let reversed = DMatrix::from_fn(200, 4, |r, c| data[(r, 3 - c)]);
        let res2 = pca(&panel(&reversed), true).unwrap();
        for (a, b) in res.explained.iter().zip(&res2.explained) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
