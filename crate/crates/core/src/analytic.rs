//! Weighted sums of ideal counts, their main terms, and the exact identities
//! that relate the log-log weighted sum to the log-weighted one.
//!
//! For a coefficient sequence `c_m` (normally `r_K(m)`) and a real `x`:
//!
//! * plain sum        `S(x)   = Σ_{m≤x} c_m`, main term `κx`
//! * Cesàro mean      `(1/x)∫_1^x S(t) dt = (1/x) Σ_{m≤x} c_m (x − m)`, main term `κx/2`
//! * log-weighted     `Σ_{m≤x} c_m log(x/m)`, main term `κx`
//! * log-log-weighted `Σ_{m≤x/e} c_m log log(x/m)`, main term `E_1(1) κx`

use serde::Serialize;
use thiserror::Error;

use crate::arith::kronecker;
use crate::compensated::CompensatedSum;
use crate::ideal_sieve::RkTable;
use crate::number_field::NumberField;
use crate::quadrature::integrate;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082_402_43;

/// Absolute tolerance per unit interval in the partial-summation check.
pub const INTERVAL_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticError {
    #[error("E_1 is only defined here for X > 0, got {0}")]
    NonPositiveArgument(f64),
    #[error("x = {x} outside the admissible range [{lo}, {hi}]")]
    OutOfRange { x: f64, lo: f64, hi: f64 },
    #[error("closed-form residue is only available for quadratic fields with index 1 ({0})")]
    Unsupported(String),
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
}

/// A finite coefficient sequence `c_1, ..., c_len`.
pub trait Coefficients {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// `c_m` for `1 <= m <= len()`.
    fn coeff(&self, m: usize) -> f64;
}

impl Coefficients for RkTable {
    fn len(&self) -> usize {
        self.x_max()
    }

    #[inline]
    fn coeff(&self, m: usize) -> f64 {
        // u32 -> f64 is exact.
        self.values()[m - 1] as f64
    }
}

impl Coefficients for [f64] {
    fn len(&self) -> usize {
        <[f64]>::len(self)
    }

    #[inline]
    fn coeff(&self, m: usize) -> f64 {
        self[m - 1]
    }
}

impl Coefficients for Vec<f64> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    #[inline]
    fn coeff(&self, m: usize) -> f64 {
        self[m - 1]
    }
}

fn check_range(x: f64, lo: f64, hi: f64) -> Result<(), AnalyticError> {
    if x.is_nan() || x < lo || x > hi {
        Err(AnalyticError::OutOfRange { x, lo, hi })
    } else {
        Ok(())
    }
}

/// `E_1(X) = ∫_X^∞ e^{−t}/t dt`: power series for `X <= 1`, continued fraction above.
pub fn exp_integral_e1(x: f64) -> Result<f64, AnalyticError> {
    if x.is_nan() || x <= 0.0 {
        return Err(AnalyticError::NonPositiveArgument(x));
    }
    Ok(if x <= 1.0 { e1_series(x) } else { e1_continued_fraction(x) })
}

/// `−γ − log X + Σ_{k≥1} (−1)^{k+1} X^k / (k·k!)`.
pub(crate) fn e1_series(x: f64) -> f64 {
    let mut sum = CompensatedSum::new();
    let mut power_over_factorial = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        power_over_factorial *= x / kf;
        let term = power_over_factorial / kf;
        sum.add(if k % 2 == 1 { term } else { -term });
        if term < 1e-18 * sum.value().abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() + sum.value()
}

/// `e^{−X}/(X + 1 − 1/(X + 3 − 4/(X + 5 − ...)))` by the modified Lentz method.
pub(crate) fn e1_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x).exp()
}

/// `Σ_{m≤x} c_m`.
pub fn plain_sum<C: Coefficients + ?Sized>(c: &C, x: f64) -> Result<f64, AnalyticError> {
    check_range(x, 1.0, c.len() as f64)?;
    Ok(compensated(1..=x.floor() as usize, |m| c.coeff(m)))
}

/// `(1/x)∫_1^x Σ_{m≤t} c_m dt`, evaluated exactly as `(1/x) Σ_{m≤x} c_m (x − m)`.
pub fn cesaro_mean<C: Coefficients + ?Sized>(c: &C, x: f64) -> Result<f64, AnalyticError> {
    check_range(x, 1.0, c.len() as f64)?;
    Ok(compensated(1..=x.floor() as usize, |m| c.coeff(m) * (x - m as f64)) / x)
}

/// `Σ_{m≤x} c_m log(x/m)`.
pub fn log_weighted_sum<C: Coefficients + ?Sized>(c: &C, x: f64) -> Result<f64, AnalyticError> {
    check_range(x, 1.0, c.len() as f64)?;
    Ok(compensated(1..=x.floor() as usize, |m| c.coeff(m) * (x / m as f64).ln()))
}

/// `Σ_{m≤x/e} c_m log log(x/m)`; the boundary term `m = x/e` has weight 0.
pub fn loglog_weighted_sum<C: Coefficients + ?Sized>(c: &C, x: f64) -> Result<f64, AnalyticError> {
    let e = std::f64::consts::E;
    check_range(x, e, c.len() as f64 * e)?;
    let upper = ((x / e).floor() as usize).min(c.len());
    Ok(compensated(1..=upper, |m| c.coeff(m) * loglog_weight(x, m)))
}

/// `log log(x/m)`, clamped to 0 at and beyond `m = x/e`.
#[inline]
fn loglog_weight(x: f64, m: usize) -> f64 {
    let l = (x / m as f64).ln();
    if l <= 1.0 {
        0.0
    } else {
        l.ln()
    }
}

fn compensated<F: Fn(usize) -> f64>(range: std::ops::RangeInclusive<usize>, f: F) -> f64 {
    let mut acc = CompensatedSum::new();
    for m in range {
        acc.add(f(m));
    }
    acc.value()
}

/// All four weighted sums at one point, with residuals against their main terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedSumReport {
    pub x: f64,
    pub plain_sum: f64,
    pub cesaro_mean: f64,
    pub log_sum: f64,
    pub loglog_sum: f64,
    pub kappa_used: f64,
    /// `plain_sum − κx`
    pub residual_plain: f64,
    /// `cesaro_mean − κx/2`
    pub residual_cesaro: f64,
    /// `log_sum − κx`
    pub residual_log: f64,
    /// `loglog_sum − E_1(1)κx`
    pub residual_loglog: f64,
}

/// CSV header matching [`WeightedSumReport::csv_row`].
pub const REPORT_CSV_HEADER: &str = "x,plain_sum,cesaro_mean,log_sum,loglog_sum,kappa,residual_plain,residual_cesaro,residual_log,residual_loglog";

impl WeightedSumReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            self.x,
            self.plain_sum,
            self.cesaro_mean,
            self.log_sum,
            self.loglog_sum,
            self.kappa_used,
            self.residual_plain,
            self.residual_cesaro,
            self.residual_log,
            self.residual_loglog
        )
    }

    /// Ordering relations every report must satisfy (up to rounding).
    pub fn invariants_hold(&self) -> bool {
        let slack = 1e-9 * self.plain_sum.abs().max(1.0);
        let loglog_x = self.x.ln().ln().max(0.0);
        self.plain_sum >= 0.0
            && self.cesaro_mean >= 0.0
            && self.log_sum >= 0.0
            && self.loglog_sum >= 0.0
            && self.plain_sum + slack >= self.cesaro_mean
            && self.log_sum <= self.plain_sum * self.x.ln() + slack
            && self.loglog_sum <= self.plain_sum * loglog_x + slack
    }
}

/// Evaluates all four sums in one pass over `m ≤ x`. Requires `e ≤ x ≤ len`.
pub fn weighted_sum_report<C: Coefficients + ?Sized>(
    c: &C,
    x: f64,
    kappa: f64,
) -> Result<WeightedSumReport, AnalyticError> {
    check_range(x, std::f64::consts::E, c.len() as f64)?;
    let mut plain = CompensatedSum::new();
    let mut cesaro = CompensatedSum::new();
    let mut log = CompensatedSum::new();
    let mut loglog = CompensatedSum::new();
    for m in 1..=x.floor() as usize {
        let cm = c.coeff(m);
        if cm == 0.0 {
            continue;
        }
        plain.add(cm);
        cesaro.add(cm * (x - m as f64));
        log.add(cm * (x / m as f64).ln());
        let w = loglog_weight(x, m);
        if w > 0.0 {
            loglog.add(cm * w);
        }
    }
    let e1_one = exp_integral_e1(1.0)?;
    let report = WeightedSumReport {
        x,
        plain_sum: plain.value(),
        cesaro_mean: cesaro.value() / x,
        log_sum: log.value(),
        loglog_sum: loglog.value(),
        kappa_used: kappa,
        residual_plain: plain.value() - kappa * x,
        residual_cesaro: cesaro.value() / x - 0.5 * kappa * x,
        residual_log: log.value() - kappa * x,
        residual_loglog: loglog.value() - e1_one * kappa * x,
    };
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaMethod {
    ClosedForm,
    GridFit,
}

/// An estimate of the residue `κ_K` of `ζ_K` at `s = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KappaEstimate {
    pub value: f64,
    pub method: KappaMethod,
    pub uncertainty: f64,
}

/// `κ_K = L(1, χ_D)` for a quadratic field of fundamental discriminant `D`.
pub fn kappa_closed_form(field: &NumberField) -> Result<KappaEstimate, AnalyticError> {
    let d = field
        .quadratic_discriminant()
        .ok_or_else(|| AnalyticError::Unsupported(field.label().to_string()))?;
    let (value, uncertainty) = l_one_real_character(d);
    Ok(KappaEstimate {
        value,
        method: KappaMethod::ClosedForm,
        uncertainty,
    })
}

/// `L(1, χ_D) = Σ_{j≥0} Σ_{a=1}^{|D|} χ_D(a)/(|D|j + a)`.
///
/// The first `BLOCKS` periods are summed directly; the tail is the
/// Euler-Maclaurin expansion of the smooth block function
/// `g(t) = Σ_a χ(a)/(qt + a)`, whose antiderivative and derivatives are exact.
/// For `D = −4` this is the Leibniz series `1 − 1/3 + 1/5 − ...` accelerated.
/// Returns the value and the size of the last correction term kept.
pub fn l_one_real_character(d: i64) -> (f64, f64) {
    const BLOCKS: usize = 64;
    // B_2, B_4, ..., B_12 divided by (2k)!
    const BERNOULLI_OVER_FACTORIAL: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
    ];
    let q = d.unsigned_abs() as usize;
    let chars: Vec<(f64, f64)> = (1..=q)
        .map(|a| (kronecker(d, a as u64) as f64, a as f64))
        .filter(|&(chi, _)| chi != 0.0)
        .collect();
    let qf = q as f64;

    let mut sum = CompensatedSum::new();
    for j in 0..BLOCKS {
        for &(chi, a) in &chars {
            sum.add(chi / (qf * j as f64 + a));
        }
    }

    let t = BLOCKS as f64;
    // ∫_t^∞ g = −(1/q) Σ χ(a) log(qt + a) = −(1/q) Σ χ(a) log1p(a/(qt)) since Σ χ(a) = 0.
    let integral: f64 = -chars
        .iter()
        .map(|&(chi, a)| chi * (a / (qf * t)).ln_1p())
        .sum::<f64>()
        / qf;
    sum.add(integral);
    let g_at_t: f64 = chars.iter().map(|&(chi, a)| chi / (qf * t + a)).sum();
    sum.add(0.5 * g_at_t);
    // g^{(m)}(t) = (−1)^m m! q^m Σ χ(a)/(qt + a)^{m+1}
    let derivative = |m: i32| -> f64 {
        let factorial: f64 = (1..=m).map(f64::from).product();
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        sign * factorial
            * qf.powi(m)
            * chars
                .iter()
                .map(|&(chi, a)| chi / (qf * t + a).powi(m + 1))
                .sum::<f64>()
    };
    let mut last = 0.0f64;
    for (k, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        let term = -b * derivative(2 * k as i32 + 1);
        sum.add(term);
        last = term.abs();
    }
    let value = sum.value();
    (value, last + 4.0 * f64::EPSILON * value.abs())
}

/// Least-squares slope of `Σ_{m≤x} c_m` against `x` over the grid, with its standard error.
pub fn kappa_grid_fit<C: Coefficients + ?Sized>(
    c: &C,
    grid: &[f64],
) -> Result<KappaEstimate, AnalyticError> {
    if grid.len() < 8 {
        return Err(AnalyticError::DegenerateGrid(format!(
            "need at least 8 points, got {}",
            grid.len()
        )));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    if sorted.first() == sorted.last() {
        return Err(AnalyticError::DegenerateGrid("all grid points coincide".into()));
    }
    for &x in &sorted {
        check_range(x, 1.0, c.len() as f64)?;
    }
    // One sweep over m gives S(x) at every grid point.
    let mut sums = Vec::with_capacity(sorted.len());
    let mut acc = CompensatedSum::new();
    let mut m = 1usize;
    for &x in &sorted {
        let upper = x.floor() as usize;
        while m <= upper {
            acc.add(c.coeff(m));
            m += 1;
        }
        sums.push(acc.value());
    }
    let (slope, stderr) = ols_slope(&sorted, &sums);
    Ok(KappaEstimate {
        value: slope,
        method: KappaMethod::GridFit,
        uncertainty: stderr,
    })
}

/// Slope and standard error of an ordinary least-squares line `y = a + b x`.
pub(crate) fn ols_slope(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (x - mean_x) * (y - mean_y))
        .sum();
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ssr: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, stderr)
}

/// Outcome of an identity check.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(lhs: f64, rhs: f64, residual: f64, tolerance: f64) -> Self {
        IdentityCheck {
            lhs,
            rhs,
            residual,
            tolerance,
            passed: residual <= tolerance,
        }
    }
}

/// Checks, for `N = x/e`,
///
/// `Σ_{m≤N} c_m log log(x/m) = Σ_{m≤N} c_m log(x/(em)) − ∫_1^N (Σ_{m≤t} c_m log(t/m)) / (t log²(x/t)) dt`.
///
/// The left side is summed directly, the integral is done by quadrature on each
/// unit interval. Residual is `|LHS − RHS| / max(1, |LHS|)`.
pub fn check_partial_summation_identity<C: Coefficients + ?Sized>(
    c: &C,
    x: f64,
    tol: f64,
) -> Result<IdentityCheck, AnalyticError> {
    check_partial_summation_identity_between(c, c, x, tol)
}

/// As [`check_partial_summation_identity`], with the left side read from
/// `lhs_coeffs` and the right side from `rhs_coeffs`. Any entry on which the two
/// disagree below `x/e` shows up in the residual.
pub fn check_partial_summation_identity_between<A, B>(
    lhs_coeffs: &A,
    rhs_coeffs: &B,
    x: f64,
    tol: f64,
) -> Result<IdentityCheck, AnalyticError>
where
    A: Coefficients + ?Sized,
    B: Coefficients + ?Sized,
{
    let e = std::f64::consts::E;
    let len = lhs_coeffs.len().min(rhs_coeffs.len());
    check_range(x, e, len as f64 * e)?;
    let lhs = loglog_weighted_sum(lhs_coeffs, x)?;

    let n_real = x / e;
    let n = (n_real.floor() as usize).min(len);
    let log_x = x.ln();
    let mut boundary = CompensatedSum::new();
    for m in 1..=n {
        boundary.add(rhs_coeffs.coeff(m) * (log_x - (m as f64).ln() - 1.0));
    }

    // On [j, j+1): Σ_{m≤t} c_m log(t/m) = S_j log t − L_j.
    let mut integral = CompensatedSum::new();
    let mut s = 0.0;
    let mut l = CompensatedSum::new();
    for j in 1..=n {
        let cj = rhs_coeffs.coeff(j);
        s += cj;
        l.add(cj * (j as f64).ln());
        let lo = j as f64;
        let hi = ((j + 1) as f64).min(n_real);
        if hi <= lo {
            break;
        }
        let lj = l.value();
        if s == 0.0 && lj == 0.0 {
            continue;
        }
        let f = |t: f64| {
            let u = log_x - t.ln();
            (s * t.ln() - lj) / (t * u * u)
        };
        integral.add(integrate(f, lo, hi, INTERVAL_TOL).value);
    }
    let rhs = boundary.value() - integral.value();
    let residual = (lhs - rhs).abs() / lhs.abs().max(1.0);
    Ok(IdentityCheck::new(lhs, rhs, residual, tol))
}

/// Default tolerance for [`check_e1_identity`].
pub const E1_IDENTITY_TOL: f64 = 1e-10;

/// Checks `∫_1^{log x} e^{−u}/u² du = e^{−1} − E_1(1) + E_1(log x) − 1/(x log x)`
/// with the left side by quadrature. Residual is the absolute difference.
pub fn check_e1_identity(x: f64) -> Result<IdentityCheck, AnalyticError> {
    let e = std::f64::consts::E;
    check_range(x, e * e, f64::INFINITY)?;
    let log_x = x.ln();
    let lhs = integrate(|u: f64| (-u).exp() / (u * u), 1.0, log_x, 1e-14).value;
    let rhs = (-1f64).exp() - exp_integral_e1(1.0)? + exp_integral_e1(log_x)? - 1.0 / (x * log_x);
    Ok(IdentityCheck::new(lhs, rhs, (lhs - rhs).abs(), E1_IDENTITY_TOL))
}

/// The bracketing `1/(x log(ex)) < E_1(log x) < 1/(x log x)`; returns `(lower, value, upper)`.
pub fn e1_sandwich(x: f64) -> Result<(f64, f64, f64), AnalyticError> {
    check_range(x, 2.0, f64::INFINITY)?;
    let log_x = x.ln();
    let value = exp_integral_e1(log_x)?;
    Ok((1.0 / (x * (1.0 + log_x)), value, 1.0 / (x * log_x)))
}
