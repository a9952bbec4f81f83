//! Reference error-term exponents and log-log fits of residual series.

use serde::Serialize;
use thiserror::Error;

use crate::analytic::ols_slope;

pub const DEFAULT_FLOOR: f64 = 1e-9;
pub const MIN_FIT_POINTS: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("degree must be at least 2, got {0}")]
    BadDegree(u32),
    #[error("only {kept} of {total} points lie above the floor; need at least 8 and more than half")]
    TooFewPoints { kept: usize, total: usize },
    #[error("grid point x = {0} is not a positive finite number")]
    BadAbscissa(f64),
    #[error("all kept abscissae coincide")]
    DegenerateGrid,
}

/// Exponents for a field of degree `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReferenceExponents {
    pub n: u32,
    /// `1 − 2/(n+1)`
    pub landau: f64,
    /// `1 − 3/(n+6)`
    pub lao: f64,
    /// `1 − 4/(2n+1)`
    pub withdrawn: f64,
    pub lambda_n: f64,
    /// `1 − 3/n`, only for `n ≥ 6`.
    pub theorem: Option<f64>,
}

/// `3/4 − 3/(2n)` up to `n = 6`, `1 − 3/n` from there on.
pub fn lambda_small_branch(n: u32) -> f64 {
    0.75 - 1.5 / n as f64
}

pub fn lambda_large_branch(n: u32) -> f64 {
    1.0 - 3.0 / n as f64
}

pub fn reference_exponents(n: u32) -> Result<ReferenceExponents, FitError> {
    if n < 2 {
        return Err(FitError::BadDegree(n));
    }
    let nf = n as f64;
    let lambda_n = if n <= 6 {
        lambda_small_branch(n)
    } else {
        lambda_large_branch(n)
    };
    Ok(ReferenceExponents {
        n,
        landau: 1.0 - 2.0 / (nf + 1.0),
        lao: 1.0 - 3.0 / (nf + 6.0),
        withdrawn: 1.0 - 4.0 / (2.0 * nf + 1.0),
        lambda_n,
        theorem: (n >= 6).then(|| lambda_large_branch(n)),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    /// Kept `(x, |residual|)` pairs.
    pub pairs: Vec<(f64, f64)>,
    pub fitted_theta: f64,
    pub stderr: f64,
    pub dropped_points: usize,
}

/// Least-squares slope of `log |r|` against `log x`, after dropping
/// residuals with `|r| < floor`.
pub fn fit_exponent(series: &[(f64, f64)], floor: f64) -> Result<FitReport, FitError> {
    let mut pairs = Vec::with_capacity(series.len());
    for &(x, r) in series {
        if !(x.is_finite() && x > 0.0) {
            return Err(FitError::BadAbscissa(x));
        }
        // NaN residuals fall through this comparison and are dropped too.
        if r.abs() >= floor {
            pairs.push((x, r.abs()));
        }
    }
    let dropped_points = series.len() - pairs.len();
    if pairs.len() < MIN_FIT_POINTS || 2 * dropped_points >= series.len() {
        return Err(FitError::TooFewPoints {
            kept: pairs.len(),
            total: series.len(),
        });
    }
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    if lx.iter().all(|&v| v == lx[0]) {
        return Err(FitError::DegenerateGrid);
    }
    let (fitted_theta, stderr) = ols_slope(&lx, &ly);
    Ok(FitReport {
        pairs,
        fitted_theta,
        stderr,
        dropped_points,
    })
}

/// `start · ratio^j` for `j < count`.
pub fn geometric_grid(start: f64, ratio: f64, count: usize) -> Vec<f64> {
    (0..count).map(|j| start * ratio.powi(j as i32)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn reference_examples() {
        let r6 = reference_exponents(6).unwrap();
        assert_eq!(lambda_small_branch(6), 0.5);
        assert_eq!(lambda_large_branch(6), 0.5);
        assert_eq!(r6.lambda_n, 0.5);
        assert_eq!(r6.theorem, Some(0.5));
        let r2 = reference_exponents(2).unwrap();
        assert!((r2.landau - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r2.theorem, None);
        assert_eq!(reference_exponents(10).unwrap().lao, 0.8125);
        assert!((reference_exponents(4).unwrap().withdrawn - 5.0 / 9.0).abs() < 1e-15);
        assert_eq!(reference_exponents(1), Err(FitError::BadDegree(1)));
    }

    #[test]
    fn theorem_matches_lambda_from_six() {
        for n in 6..200 {
            let r = reference_exponents(n).unwrap();
            assert_eq!(r.theorem, Some(r.lambda_n));
        }
    }

    #[test]
    fn exact_power_law() {
        let series: Vec<_> = geometric_grid(100.0, 2.0, 12)
            .into_iter()
            .map(|x| (x, x.sqrt()))
            .collect();
        let fit = fit_exponent(&series, DEFAULT_FLOOR).unwrap();
        assert!((fit.fitted_theta - 0.5).abs() < 1e-12);
        assert_eq!(fit.dropped_points, 0);
    }

    #[test]
    fn noisy_power_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let series: Vec<_> = geometric_grid(1e3, 2.0, 16)
            .into_iter()
            .map(|x| (x, 3.0 * x.powf(0.33) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0))))
            .collect();
        let fit = fit_exponent(&series, DEFAULT_FLOOR).unwrap();
        assert!((fit.fitted_theta - 0.33).abs() < 0.02);
        assert!(fit.stderr > 0.0 && fit.stderr < 0.01);
    }

    #[test]
    fn floor_handling() {
        let xs = geometric_grid(10.0, 2.0, 10);
        let tiny: Vec<_> = xs.iter().map(|&x| (x, 1e-12)).collect();
        assert!(matches!(
            fit_exponent(&tiny, DEFAULT_FLOOR),
            Err(FitError::TooFewPoints { kept: 0, .. })
        ));
        // Two of ten dropped still leaves eight.
        let mut series: Vec<_> = xs.iter().map(|&x| (x, x)).collect();
        series[3].1 = 0.0;
        series[7].1 = -1e-10;
        let fit = fit_exponent(&series, DEFAULT_FLOOR).unwrap();
        assert_eq!(fit.dropped_points, 2);
        assert!((fit.fitted_theta - 1.0).abs() < 1e-12);
        series[5].1 = 0.0;
        assert!(fit_exponent(&series, DEFAULT_FLOOR).is_err());
        // Half the grid dropped is rejected even with eight left.
        let mut long: Vec<_> = geometric_grid(10.0, 2.0, 16).into_iter().map(|x| (x, x)).collect();
        for p in long.iter_mut().take(8) {
            p.1 = 0.0;
        }
        assert!(fit_exponent(&long, DEFAULT_FLOOR).is_err());
        assert_eq!(
            fit_exponent(&[(0.0, 1.0); 9], DEFAULT_FLOOR),
            Err(FitError::BadAbscissa(0.0))
        );
        assert_eq!(
            fit_exponent(&[(5.0, 1.0); 9], DEFAULT_FLOOR),
            Err(FitError::DegenerateGrid)
        );
    }

    #[test]
    fn residual_sign_is_ignored() {
        let series: Vec<_> = geometric_grid(10.0, 3.0, 9)
            .into_iter()
            .enumerate()
            .map(|(j, x)| (x, if j % 2 == 0 { x } else { -x }))
            .collect();
        let fit = fit_exponent(&series, DEFAULT_FLOOR).unwrap();
        assert!((fit.fitted_theta - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn slope_is_scale_invariant(
            seed in any::<u64>(),
            scale in 1e-3f64..1e3,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let series: Vec<_> = geometric_grid(50.0, 2.0, 12)
                .into_iter()
                .map(|x| (x, x.powf(0.4) * rng.gen_range(0.5..2.0)))
                .collect();
            let scaled: Vec<_> = series.iter().map(|&(x, r)| (x, scale * r)).collect();
            let a = fit_exponent(&series, DEFAULT_FLOOR).unwrap();
            let b = fit_exponent(&scaled, DEFAULT_FLOOR).unwrap();
            prop_assert!((a.fitted_theta - b.fitted_theta).abs() < 1e-12);
        }

        #[test]
        fn recovers_planted_exponent(theta in -1.0f64..2.0, c in 0.1f64..10.0) {
            let series: Vec<_> = geometric_grid(2.0, 2.0, 10)
                .into_iter()
                .map(|x| (x, c * x.powf(theta)))
                .collect();
            let fit = fit_exponent(&series, DEFAULT_FLOOR).unwrap();
            prop_assert!((fit.fitted_theta - theta).abs() < 1e-10);
        }
    }
}
