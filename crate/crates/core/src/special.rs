//! Chi-square tail probabilities via the regularized incomplete gamma function.

const EPS: f64 = 1e-15;
const MAX_ITER: usize = 1000;
const TINY: f64 = 1e-300;

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0, "gamma_q requires a > 0");
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - lower_series(a, x)
    } else {
        upper_continued_fraction(a, x)
    }
}

fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * libm::exp(-x + a * libm::log(x) - libm::lgamma(a))
}

// Modified Lentz evaluation.
fn upper_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    libm::exp(-x + a * libm::log(x) - libm::lgamma(a)) * h
}

/// Upper-tail probability `P(X > stat)` for `X ~ χ²(df)`.
pub fn chi2_sf(stat: f64, df: usize) -> f64 {
    if df == 0 {
        return if stat > 0.0 { 0.0 } else { 1.0 };
    }
    if stat.is_nan() {
        return f64::NAN;
    }
    gamma_q(df as f64 / 2.0, stat / 2.0).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn granger_style_probabilities() {
        // (chi-sq, df, prob) triples at the sizes a Granger table produces.
        let rows = [
            (18.015, 13, 0.1570),
            (26.356, 13, 0.0152),
            (49.146, 26, 0.0040),
            (22.407, 13, 0.0494),
            (15.941, 13, 0.2523),
            (32.519, 26, 0.1765),
            (24.200, 13, 0.0293),
            (14.048, 13, 0.3705),
            (49.740, 26, 0.0034),
        ];
        for (stat, df, prob) in rows {
            let p = chi2_sf(stat, df);
            assert!((p - prob).abs() < 6e-5, "chi2_sf({stat}, {df}) = {p}, expected {prob}");
        }
    }

    #[test]
    fn matches_statrs() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for df in [1usize, 2, 5, 13, 48, 200] {
            let dist = ChiSquared::new(df as f64).unwrap();
            for stat in [0.01, 0.5, 1.0, 3.84, 10.0, 30.0, 100.0, 400.0] {
                let expected = dist.sf(stat);
                let got = chi2_sf(stat, df);
                assert!((got - expected).abs() < 1e-12 + 1e-9 * expected, "df {df} stat {stat}: {got} vs {expected}");
            }
        }
    }

    #[test]
    fn edge_cases() {
        assert_eq!(chi2_sf(0.0, 3), 1.0);
        assert_eq!(chi2_sf(-1.0, 3), 1.0);
        assert!(chi2_sf(1e4, 3) < 1e-300 + 1e-200);
    }
}
