//! Bilinear exponential sums
//! `S = Σ_{M<m≤M1} a_m Σ_{N<n≤N1} b_n e(X (m/M)^α (n/N)^β)`, `e(t) = exp(2πi t)`,
//! and the five-term upper bound once claimed for them.
//!
//! Choosing `a_m = e(−X (m/M)^α (n0/N)^β)` with a single inner index `n0`
//! makes every summand equal to 1, so `|S| = M1 − M`, which outgrows the
//! claimed bound like `M^{1/4}`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::compensated::CompensatedSum;

/// Summands processed per block; blocks are combined in index order.
pub const BLOCK_SIZE: u64 = 4096;
/// Largest number of summands `(M1 − M)(N1 − N)` evaluated.
pub const MAX_TERMS: u64 = 1_000_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExpSumError {
    #[error("X must be at least 1, got {0}")]
    BadScale(f64),
    #[error("need 1 <= {name} < {name}1 <= 2*{name}, got {lo} and {hi}")]
    BadRange { name: &'static str, lo: u64, hi: u64 },
    #[error("(α−1)(α−2)αβ must be nonzero (α = {alpha}, β = {beta})")]
    DegenerateExponents { alpha: f64, beta: f64 },
    #[error("conjugate phase index n0 = {n0} lies outside ({n}, {n1}]")]
    BadConjugateIndex { n0: u64, n: u64, n1: u64 },
    #[error("conjugate phase is only defined for the outer coefficients a_m")]
    ConjugateInner,
    #[error("sum has {0} terms, above the limit of 10^9")]
    TooManyTerms(u128),
    #[error("epsilon must lie in [0, 0.1], got {0}")]
    BadEpsilon(f64),
    #[error("counterexample needs M a power of two with M >= 2^10, got {0}")]
    BadCounterexampleSize(u64),
}

/// How the unimodular coefficients are generated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffGen {
    ConstantOne,
    /// Independent uniform phases from a ChaCha stream keyed by `seed`.
    RandomUnimodular { seed: u64 },
    /// `a_m = e(−X (m/M)^α (n0/N)^β)`; valid for the outer coefficients only.
    ConjugatePhase { n0: u64 },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpSumSpec {
    pub x: f64,
    pub m: u64,
    pub m1: u64,
    pub n: u64,
    pub n1: u64,
    pub alpha: f64,
    pub beta: f64,
    pub a_gen: CoeffGen,
    pub b_gen: CoeffGen,
}

/// Whether phases are reduced mod 1 before the exponential is taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhaseMode {
    Reduced,
    Unreduced,
}

impl ExpSumSpec {
    pub fn validate(&self) -> Result<(), ExpSumError> {
        if self.x.is_nan() || self.x < 1.0 {
            return Err(ExpSumError::BadScale(self.x));
        }
        for (name, lo, hi) in [("M", self.m, self.m1), ("N", self.n, self.n1)] {
            if lo < 1 || hi <= lo || hi > 2 * lo {
                return Err(ExpSumError::BadRange { name, lo, hi });
            }
        }
        let (a, b) = (self.alpha, self.beta);
        let product = (a - 1.0) * (a - 2.0) * a * b;
        if product == 0.0 || !product.is_finite() {
            return Err(ExpSumError::DegenerateExponents { alpha: a, beta: b });
        }
        if let CoeffGen::ConjugatePhase { n0 } = self.a_gen {
            if n0 <= self.n || n0 > self.n1 {
                return Err(ExpSumError::BadConjugateIndex {
                    n0,
                    n: self.n,
                    n1: self.n1,
                });
            }
        }
        if matches!(self.b_gen, CoeffGen::ConjugatePhase { .. }) {
            return Err(ExpSumError::ConjugateInner);
        }
        let terms = self.term_count();
        if terms > MAX_TERMS as u128 {
            return Err(ExpSumError::TooManyTerms(terms));
        }
        Ok(())
    }

    /// `(M1 − M)(N1 − N)`.
    pub fn term_count(&self) -> u128 {
        (self.m1 - self.m) as u128 * (self.n1 - self.n) as u128
    }

    /// `X (m/M)^α (n/N)^β`.
    pub fn phase(&self, m: u64, n: u64) -> f64 {
        self.x
            * (m as f64 / self.m as f64).powf(self.alpha)
            * (n as f64 / self.n as f64).powf(self.beta)
    }

    /// Phase of `a_m` (so `a_m = e(θ)`), reduced mod 1 or not.
    fn outer_phase(&self, m: u64, mode: PhaseMode, random: &mut PhaseStream) -> f64 {
        match self.a_gen {
            CoeffGen::ConstantOne => 0.0,
            CoeffGen::RandomUnimodular { .. } => random.at(m - self.m - 1),
            CoeffGen::ConjugatePhase { n0 } => {
                let t = self.phase(m, n0);
                match mode {
                    PhaseMode::Reduced => -(t - t.floor()),
                    PhaseMode::Unreduced => -t,
                }
            }
        }
    }

    fn inner_phases(&self) -> Vec<f64> {
        let count = self.n1 - self.n;
        match self.b_gen {
            CoeffGen::RandomUnimodular { seed } => {
                let mut s = PhaseStream::new(seed);
                (0..count).map(|i| s.at(i)).collect()
            }
            _ => vec![0.0; count as usize],
        }
    }

    /// `a_m` as a complex number.
    pub fn outer_coefficient(&self, m: u64) -> Complex64 {
        let mut stream = PhaseStream::for_gen(self.a_gen);
        unit(self.outer_phase(m, PhaseMode::Reduced, &mut stream))
    }

    /// `b_n` as a complex number.
    pub fn inner_coefficient(&self, n: u64) -> Complex64 {
        match self.b_gen {
            CoeffGen::RandomUnimodular { seed } => unit(PhaseStream::new(seed).at(n - self.n - 1)),
            _ => Complex64::new(1.0, 0.0),
        }
    }
}

/// Random-access uniform phases in `[0, 1)`.
struct PhaseStream {
    rng: Option<ChaCha8Rng>,
}

impl PhaseStream {
    fn new(seed: u64) -> Self {
        PhaseStream {
            rng: Some(ChaCha8Rng::seed_from_u64(seed)),
        }
    }

    fn for_gen(gen: CoeffGen) -> Self {
        match gen {
            CoeffGen::RandomUnimodular { seed } => Self::new(seed),
            _ => PhaseStream { rng: None },
        }
    }

    fn at(&mut self, index: u64) -> f64 {
        let rng = self.rng.as_mut().expect("phase stream without a seed");
        // Each u64 consumes two 32-bit words of the stream.
        rng.set_word_pos(2 * index as u128);
        (rng.gen::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[inline]
fn unit(turns: f64) -> Complex64 {
    let (s, c) = (std::f64::consts::TAU * turns).sin_cos();
    Complex64::new(c, s)
}

pub fn evaluate_bilinear_sum(spec: &ExpSumSpec) -> Result<Complex64, ExpSumError> {
    evaluate_bilinear_sum_with(spec, PhaseMode::Reduced)
}

/// Double sum with compensated accumulation. Blocks of [`BLOCK_SIZE`] outer
/// indices run in parallel and are combined in order, so the result does not
/// depend on the thread count.
pub fn evaluate_bilinear_sum_with(
    spec: &ExpSumSpec,
    mode: PhaseMode,
) -> Result<Complex64, ExpSumError> {
    spec.validate()?;
    let inner = spec.inner_phases();
    let first = spec.m + 1;
    let count = spec.m1 - spec.m;
    let blocks = count.div_ceil(BLOCK_SIZE);
    let partials: Vec<(CompensatedSum, CompensatedSum)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut stream = PhaseStream::for_gen(spec.a_gen);
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            let lo = first + b * BLOCK_SIZE;
            let hi = (lo + BLOCK_SIZE).min(spec.m1 + 1);
            for m in lo..hi {
                let outer = spec.outer_phase(m, mode, &mut stream);
                for (k, &theta_b) in inner.iter().enumerate() {
                    let n = spec.n + 1 + k as u64;
                    let phi = spec.phase(m, n);
                    let turns = match mode {
                        PhaseMode::Reduced => {
                            let t = outer + theta_b + (phi - phi.floor());
                            t - t.floor()
                        }
                        PhaseMode::Unreduced => outer + theta_b + phi,
                    };
                    let z = unit(turns);
                    re.add(z.re);
                    im.add(z.im);
                }
            }
            (re, im)
        })
        .collect();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (r, i) in partials {
        re.merge(r);
        im.merge(i);
    }
    let total = Complex64::new(re.value(), im.value());
    debug_assert!(total.norm() <= spec.term_count() as f64 * (1.0 + 1e-12));
    Ok(total)
}

/// The five claimed terms
/// `(XM^5N^7)^{1/8}`, `N(X^{−2}M^{11})^{1/12}`, `(X^{−3}M^{21}N^{23})^{1/24}`,
/// `M^{3/4}N`, `X^{−1/4}MN`, evaluated in log space.
pub fn rhs_terms(x: f64, m: f64, n: f64) -> [f64; 5] {
    let (lx, lm, ln) = (x.ln(), m.ln(), n.ln());
    [
        ((lx + 5.0 * lm + 7.0 * ln) / 8.0).exp(),
        (ln + (-2.0 * lx + 11.0 * lm) / 12.0).exp(),
        ((-3.0 * lx + 21.0 * lm + 23.0 * ln) / 24.0).exp(),
        (0.75 * lm + ln).exp(),
        (-0.25 * lx + lm + ln).exp(),
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "X")]
    pub x: f64,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "lhs")]
    pub lhs_abs: f64,
    pub rhs_terms: [f64; 5],
    pub rhs_total: f64,
    #[serde(rename = "eps")]
    pub epsilon_used: f64,
    /// `|S| / ((MN)^ε · rhs_total)`
    #[serde(rename = "ratio")]
    pub violation_ratio: f64,
}

/// Evaluates `|S|` and the claimed bound for `spec`.
pub fn claimed_rhs(spec: &ExpSumSpec, eps: f64) -> Result<BoundReport, ExpSumError> {
    if !(0.0..=0.1).contains(&eps) {
        return Err(ExpSumError::BadEpsilon(eps));
    }
    let lhs_abs = evaluate_bilinear_sum(spec)?.norm();
    let (m, n) = (spec.m as f64, spec.n as f64);
    let rhs_terms = rhs_terms(spec.x, m, n);
    let rhs_total: f64 = rhs_terms.iter().sum();
    let damping = (m * n).powf(eps);
    Ok(BoundReport {
        m: spec.m,
        x: spec.x,
        n: spec.n,
        lhs_abs,
        rhs_terms,
        rhs_total,
        epsilon_used: eps,
        violation_ratio: lhs_abs / (damping * rhs_total),
    })
}

/// The conjugate-phase construction with `X = M`, `α = 3/2`, `β = 1`, `N = 1`,
/// `N1 = 2`, `M1 = 2M` and the single inner index `n0 = 2`.
pub fn counterexample_spec(m: u64) -> Result<ExpSumSpec, ExpSumError> {
    if m < 1 << 10 || !m.is_power_of_two() {
        return Err(ExpSumError::BadCounterexampleSize(m));
    }
    Ok(ExpSumSpec {
        x: m as f64,
        m,
        m1: 2 * m,
        n: 1,
        n1: 2,
        alpha: 1.5,
        beta: 1.0,
        a_gen: CoeffGen::ConjugatePhase { n0: 2 },
        b_gen: CoeffGen::ConstantOne,
    })
}

pub fn counterexample_driver(m: u64, eps: f64) -> Result<BoundReport, ExpSumError> {
    claimed_rhs(&counterexample_spec(m)?, eps)
}
