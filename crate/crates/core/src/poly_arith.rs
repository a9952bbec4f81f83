//! Exact polynomial arithmetic over ℤ and over prime fields.
//!
//! Factorization modulo `p` follows the usual three-stage pipeline:
//! squarefree decomposition, distinct-degree factorization and a randomized
//! equal-degree split. The output is sorted canonically, so the result does
//! not depend on the seed that drives the randomized stage.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::arith::{add_mod, inv_mod_prime, is_prime, mul_mod, sub_mod};

/// Seed used wherever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PolyError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("the zero polynomial has no factorization")]
    ZeroPolynomial,
    #[error("discriminant of a constant polynomial is undefined")]
    ConstantPolynomial,
}

/// Polynomial with integer coefficients, ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigInt> {
        self.coeffs.last()
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_some_and(|c| c.is_one())
    }

    pub fn derivative(&self) -> IntPoly {
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * BigInt::from(i))
                .collect(),
        )
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().map(|c| c.to_string()))
    }
}

fn write_terms<I: DoubleEndedIterator<Item = String> + ExactSizeIterator>(
    f: &mut fmt::Formatter<'_>,
    coeffs: I,
) -> fmt::Result {
    let terms: Vec<String> = coeffs
        .enumerate()
        .rev()
        .filter(|(_, c)| c != "0")
        .map(|(i, c)| match (i, c.as_str()) {
            (0, _) => c,
            (1, "1") => "x".to_string(),
            (_, "1") => format!("x^{i}"),
            (1, _) => format!("{c}*x"),
            _ => format!("{c}*x^{i}"),
        })
        .collect();
    if terms.is_empty() {
        write!(f, "0")
    } else {
        write!(f, "{}", terms.join(" + "))
    }
}

/// Polynomial over `F_p`, ascending degree order, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl ModPoly {
    /// Reduces every coefficient into `[0, p)`. The caller guarantees `p` prime.
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut poly = ModPoly {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        poly.trim();
        poly
    }

    pub fn zero(p: u64) -> Self {
        ModPoly { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        ModPoly { p, coeffs: vec![1 % p] }
    }

    /// The monomial `x`.
    pub fn x(p: u64) -> Self {
        ModPoly::new(p, vec![0, 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    fn deg_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn leading(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.leading() == 1
    }

    /// Divides by the leading coefficient; the zero polynomial is returned unchanged.
    pub fn monic(&self) -> ModPoly {
        let lc = self.leading();
        if lc == 0 || lc == 1 {
            return self.clone();
        }
        self.scale(inv_mod_prime(lc, self.p))
    }

    pub fn scale(&self, k: u64) -> ModPoly {
        ModPoly::new(
            self.p,
            self.coeffs.iter().map(|&c| mul_mod(c, k, self.p)).collect(),
        )
    }

    pub fn add(&self, other: &ModPoly) -> ModPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                add_mod(a, b, self.p)
            })
            .collect();
        ModPoly::new(self.p, coeffs)
    }

    pub fn sub(&self, other: &ModPoly) -> ModPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n)
            .map(|i| {
                let a = self.coeffs.get(i).copied().unwrap_or(0);
                let b = other.coeffs.get(i).copied().unwrap_or(0);
                sub_mod(a, b, self.p)
            })
            .collect();
        ModPoly::new(self.p, coeffs)
    }

    pub fn mul(&self, other: &ModPoly) -> ModPoly {
        ModPoly::new(self.p, self.mul_raw(other))
    }

    fn mul_raw(&self, other: &ModPoly) -> Vec<u64> {
        let mut out = Vec::new();
        mul_into(self.p, &self.coeffs, &other.coeffs, &mut out);
        out
    }

    /// `self * other mod modulus` with a single allocation.
    pub fn mul_rem(&self, other: &ModPoly, modulus: &ModPoly) -> ModPoly {
        let mut buf = self.mul_raw(other);
        reduce_in_place(self.p, &mut buf, modulus);
        let mut out = ModPoly { p: self.p, coeffs: buf };
        out.trim();
        out
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn div_rem(&self, divisor: &ModPoly) -> (ModPoly, ModPoly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let p = self.p;
        let dd = divisor.deg_or_zero();
        if self.coeffs.len() < divisor.coeffs.len() {
            return (ModPoly::zero(p), self.clone());
        }
        let lc = divisor.leading();
        let inv_lc = if lc == 1 { 1 } else { inv_mod_prime(lc, p) };
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0u64; rem.len() - dd];
        for i in (dd..rem.len()).rev() {
            let c = if inv_lc == 1 { rem[i] } else { mul_mod(rem[i], inv_lc, p) };
            if c == 0 {
                continue;
            }
            quot[i - dd] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                let idx = i - dd + j;
                rem[idx] = sub_mod(rem[idx], mul_mod(c, d, p), p);
            }
        }
        rem.truncate(dd);
        (ModPoly::new(p, quot), ModPoly::new(p, rem))
    }

    pub fn rem(&self, divisor: &ModPoly) -> ModPoly {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let mut buf = self.coeffs.clone();
        reduce_in_place(self.p, &mut buf, divisor);
        let mut out = ModPoly { p: self.p, coeffs: buf };
        out.trim();
        out
    }

    /// Exact quotient; debug-asserts a zero remainder.
    pub fn exact_div(&self, divisor: &ModPoly) -> ModPoly {
        let (q, r) = self.div_rem(divisor);
        debug_assert!(r.is_zero(), "inexact polynomial division");
        q
    }

    /// Monic greatest common divisor (zero only when both inputs are zero).
    pub fn gcd(&self, other: &ModPoly) -> ModPoly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn derivative(&self) -> ModPoly {
        let p = self.p;
        ModPoly::new(
            p,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| mul_mod(c, i as u64 % p, p))
                .collect(),
        )
    }

    /// `self^exp mod modulus`.
    pub fn pow_mod(&self, mut exp: u64, modulus: &ModPoly) -> ModPoly {
        let p = self.p;
        let mut base = self.rem(modulus).coeffs;
        let mut acc = ModPoly::one(p).rem(modulus).coeffs;
        let mut scratch = Vec::with_capacity(2 * modulus.coeffs.len());
        while exp > 0 {
            if exp & 1 == 1 {
                mul_into(p, &acc, &base, &mut scratch);
                reduce_in_place(p, &mut scratch, modulus);
                std::mem::swap(&mut acc, &mut scratch);
            }
            exp >>= 1;
            if exp > 0 {
                mul_into(p, &base, &base, &mut scratch);
                reduce_in_place(p, &mut scratch, modulus);
                std::mem::swap(&mut base, &mut scratch);
            }
        }
        ModPoly::new(p, acc)
    }

    /// For `f(x) = g(x^p)` returns `g`; coefficients are their own `p`-th roots in `F_p`.
    fn pth_root(&self) -> ModPoly {
        let p = self.p as usize;
        ModPoly::new(
            self.p,
            self.coeffs.iter().step_by(p).copied().collect(),
        )
    }

    fn random_below_degree<R: Rng>(p: u64, degree: usize, rng: &mut R) -> ModPoly {
        ModPoly::new(p, (0..degree).map(|_| rng.gen_range(0..p)).collect())
    }

    /// Canonical order: by degree, then lexicographically on ascending coefficients.
    pub fn canonical_cmp(&self, other: &ModPoly) -> Ordering {
        self.coeffs
            .len()
            .cmp(&other.coeffs.len())
            .then_with(|| self.coeffs.cmp(&other.coeffs))
    }
}

const LAZY_MODULUS_BOUND: u64 = 1 << 28;
const LAZY_TERMS: usize = 256;

/// Writes the product of two coefficient slices (reduced mod `p`) into `out`.
fn mul_into(p: u64, a: &[u64], b: &[u64], out: &mut Vec<u64>) {
    out.clear();
    if a.is_empty() || b.is_empty() {
        return;
    }
    out.resize(a.len() + b.len() - 1, 0);
    if p < LAZY_MODULUS_BOUND && a.len().min(b.len()) <= LAZY_TERMS {
        // Products stay below 2^56, so up to 256 of them fit in a u64 before reducing.
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        for c in out.iter_mut() {
            *c %= p;
        }
    } else {
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = add_mod(out[i + j], mul_mod(x, y, p), p);
            }
        }
    }
}

/// Replaces `buf` by its remainder modulo `divisor` (trailing zeros may remain).
fn reduce_in_place(p: u64, buf: &mut Vec<u64>, divisor: &ModPoly) {
    let dlen = divisor.coeffs.len();
    if buf.len() < dlen {
        return;
    }
    let dd = dlen - 1;
    let lc = divisor.leading();
    let inv_lc = if lc == 1 { 1 } else { inv_mod_prime(lc, p) };
    for i in (dd..buf.len()).rev() {
        let top = buf[i];
        if top == 0 {
            continue;
        }
        let c = if inv_lc == 1 { top } else { mul_mod(top, inv_lc, p) };
        let base = i - dd;
        for (j, &d) in divisor.coeffs[..dd].iter().enumerate() {
            if d != 0 {
                buf[base + j] = sub_mod(buf[base + j], mul_mod(c, d, p), p);
            }
        }
        buf[i] = 0;
    }
    buf.truncate(dd);
}

impl fmt::Display for ModPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().map(|c| c.to_string()))?;
        write!(f, " (mod {})", self.p)
    }
}

/// Complete factorization of a polynomial over `F_p` into monic irreducibles.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModFactorization {
    pub p: u64,
    /// Leading coefficient of the input; the factors multiply to the monic part.
    pub unit: u64,
    pub factors: Vec<(ModPoly, u32)>,
}

impl ModFactorization {
    /// Product of `factor^multiplicity` over all factors, i.e. the monic normalization.
    pub fn product(&self) -> ModPoly {
        self.factors
            .iter()
            .fold(ModPoly::one(self.p), |acc, (f, e)| {
                (0..*e).fold(acc, |a, _| a.mul(f))
            })
    }

    pub fn total_degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(f, e)| f.deg_or_zero() * *e as usize)
            .sum()
    }
}

pub fn reduce_mod_p(f: &IntPoly, p: u64) -> Result<ModPoly, PolyError> {
    if !is_prime(p) {
        return Err(PolyError::NotPrime(p));
    }
    Ok(reduce_mod_prime(f, p))
}

/// [`reduce_mod_p`] for a modulus already known to be prime.
pub(crate) fn reduce_mod_prime(f: &IntPoly, p: u64) -> ModPoly {
    if let Ok(small) = f
        .coeffs()
        .iter()
        .map(i64::try_from)
        .collect::<Result<Vec<i64>, _>>()
    {
        let m = p as i128;
        let coeffs = small
            .iter()
            .map(|&c| (c as i128).rem_euclid(m) as u64)
            .collect();
        return ModPoly::new(p, coeffs);
    }
    let modulus = BigInt::from(p);
    let coeffs = f
        .coeffs()
        .iter()
        .map(|c| {
            let r = ((c % &modulus) + &modulus) % &modulus;
            u64::try_from(r).expect("residue fits in u64")
        })
        .collect();
    ModPoly::new(p, coeffs)
}

/// Factors `f` over `F_p`. The randomized equal-degree stage is driven by `seed`;
/// the canonical sort makes the output seed-independent.
pub fn factor_mod_p(f: &ModPoly, seed: u64) -> Result<ModFactorization, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let p = f.modulus();
    let monic = f.monic();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors: Vec<(ModPoly, u32)> = Vec::new();
    for (part, mult) in squarefree_decomposition(&monic) {
        for (block, d) in distinct_degree(&part) {
            for irreducible in equal_degree(&block, d, &mut rng) {
                factors.push((irreducible, mult));
            }
        }
    }
    factors.sort_by(|a, b| a.0.canonical_cmp(&b.0).then(a.1.cmp(&b.1)));
    // Yun's parts are pairwise coprime, so duplicates never occur; merge anyway.
    let mut merged: Vec<(ModPoly, u32)> = Vec::with_capacity(factors.len());
    for (g, e) in factors {
        match merged.last_mut() {
            Some((last, m)) if *last == g => *m += e,
            _ => merged.push((g, e)),
        }
    }
    Ok(ModFactorization {
        p,
        unit: f.leading(),
        factors: merged,
    })
}

/// Degrees and multiplicities of the irreducible factors of `f`, sorted, without
/// splitting equal-degree blocks. Agrees with the degree pattern of [`factor_mod_p`].
pub fn factor_degrees_mod_p(f: &ModPoly) -> Result<Vec<(usize, u32)>, PolyError> {
    if f.is_zero() {
        return Err(PolyError::ZeroPolynomial);
    }
    let mut pattern = Vec::new();
    for (part, mult) in squarefree_decomposition(&f.monic()) {
        for (block, d) in distinct_degree(&part) {
            let count = block.deg_or_zero() / d;
            pattern.extend(std::iter::repeat_n((d, mult), count));
        }
    }
    pattern.sort_unstable();
    Ok(pattern)
}

/// Yun's algorithm with the characteristic-`p` correction. Input must be monic.
fn squarefree_decomposition(f: &ModPoly) -> Vec<(ModPoly, u32)> {
    let p = f.modulus();
    let mut out = Vec::new();
    if f.deg_or_zero() == 0 {
        return out;
    }
    let df = f.derivative();
    if df.is_zero() {
        for (g, m) in squarefree_decomposition(&f.pth_root()) {
            out.push((g, m * p as u32));
        }
        return out;
    }
    let mut c = f.gcd(&df);
    let mut w = f.exact_div(&c);
    let mut i = 1u32;
    while !w.is_one() {
        let y = w.gcd(&c);
        let z = w.exact_div(&y);
        if z.deg_or_zero() > 0 {
            out.push((z, i));
        }
        i += 1;
        c = c.exact_div(&y);
        w = y;
    }
    if !c.is_one() {
        for (g, m) in squarefree_decomposition(&c.pth_root()) {
            out.push((g, m * p as u32));
        }
    }
    out
}

/// Splits a monic squarefree polynomial into products of irreducibles of equal degree.
///
/// `x^(p^d) mod f` is advanced with the Frobenius matrix of `F_p[x]/(f)`, and stays
/// valid modulo every divisor of `f`, so it is never reduced by the shrinking rest.
fn distinct_degree(f: &ModPoly) -> Vec<(ModPoly, usize)> {
    let p = f.modulus();
    let n = f.deg_or_zero();
    let x = ModPoly::x(p);
    let mut out = Vec::new();
    if n < 2 {
        if n == 1 {
            out.push((f.clone(), 1));
        }
        return out;
    }
    let frobenius = FrobeniusMatrix::new(f);
    let mut h = x.rem(f);
    let mut rest = f.clone();
    let mut d = 1;
    while rest.deg_or_zero() >= 2 * d {
        h = frobenius.apply(&h);
        let g = rest.gcd(&h.sub(&x));
        if !g.is_one() {
            rest = rest.exact_div(&g);
            out.push((g, d));
        }
        d += 1;
    }
    if rest.deg_or_zero() > 0 {
        let deg = rest.deg_or_zero();
        out.push((rest, deg));
    }
    out
}

/// Rows `x^(ip) mod f` for `i < deg f`; `g ↦ g^p` is linear over `F_p`.
struct FrobeniusMatrix {
    p: u64,
    rows: Vec<Vec<u64>>,
}

impl FrobeniusMatrix {
    fn new(f: &ModPoly) -> Self {
        let p = f.modulus();
        let n = f.deg_or_zero();
        let xp = ModPoly::x(p).pow_mod(p, f);
        let mut rows = Vec::with_capacity(n);
        let mut power = ModPoly::one(p);
        for _ in 0..n {
            let mut row = power.coeffs.clone();
            row.resize(n, 0);
            rows.push(row);
            power = power.mul_rem(&xp, f);
        }
        FrobeniusMatrix { p, rows }
    }

    fn apply(&self, g: &ModPoly) -> ModPoly {
        let p = self.p;
        let n = self.rows.len();
        let mut out = vec![0u64; n];
        if p < LAZY_MODULUS_BOUND && n <= LAZY_TERMS {
            for (&c, row) in g.coeffs.iter().zip(&self.rows) {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o += c * r;
                }
            }
            for o in &mut out {
                *o %= p;
            }
        } else {
            for (&c, row) in g.coeffs.iter().zip(&self.rows) {
                for (o, &r) in out.iter_mut().zip(row) {
                    *o = add_mod(*o, mul_mod(c, r, p), p);
                }
            }
        }
        ModPoly::new(p, out)
    }
}

/// Cantor-Zassenhaus split of a product of distinct monic irreducibles of degree `d`.
fn equal_degree<R: Rng>(f: &ModPoly, d: usize, rng: &mut R) -> Vec<ModPoly> {
    let n = f.deg_or_zero();
    if n == d {
        return vec![f.clone()];
    }
    let p = f.modulus();
    loop {
        let a = ModPoly::random_below_degree(p, n, rng);
        if a.deg_or_zero() == 0 {
            continue;
        }
        let candidate = if p == 2 {
            // Absolute trace a + a^2 + ... + a^(2^(d-1)) of F_{2^d} over F_2.
            let mut term = a.rem(f);
            let mut trace = term.clone();
            for _ in 1..d {
                term = term.mul(&term).rem(f);
                trace = trace.add(&term);
            }
            trace
        } else {
            // a^((p^d - 1)/2) = (a^(1 + p + ... + p^(d-1)))^((p - 1)/2)
            let mut norm = a.rem(f);
            for _ in 1..d {
                norm = norm.pow_mod(p, f).mul(&a).rem(f);
            }
            norm.pow_mod((p - 1) / 2, f).sub(&ModPoly::one(p))
        };
        let g = f.gcd(&candidate);
        let dg = g.deg_or_zero();
        if dg > 0 && dg < n {
            let mut parts = equal_degree(&g, d, rng);
            parts.extend(equal_degree(&f.exact_div(&g), d, rng));
            return parts;
        }
    }
}

/// Resultant of two integer polynomials through the Sylvester matrix (Bareiss elimination).
pub fn resultant(f: &IntPoly, g: &IntPoly) -> BigInt {
    let (Some(m), Some(n)) = (f.degree(), g.degree()) else {
        return BigInt::zero();
    };
    let size = m + n;
    if size == 0 {
        return BigInt::one();
    }
    let mut mat = vec![vec![BigInt::zero(); size]; size];
    // Rows hold coefficients in descending degree order.
    for row in 0..n {
        for (j, c) in f.coeffs().iter().rev().enumerate() {
            mat[row][row + j] = c.clone();
        }
    }
    for row in 0..m {
        for (j, c) in g.coeffs().iter().rev().enumerate() {
            mat[n + row][row + j] = c.clone();
        }
    }
    bareiss_determinant(mat)
}

fn bareiss_determinant(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(swap) = (k + 1..n).find(|&r| !a[r][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, swap);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// `disc(f) = (-1)^(n(n-1)/2) · Res(f, f') / lc(f)`.
pub fn discriminant(f: &IntPoly) -> Result<BigInt, PolyError> {
    let n = match f.degree() {
        Some(d) if d >= 1 => d,
        _ => return Err(PolyError::ConstantPolynomial),
    };
    let res = resultant(f, &f.derivative());
    let lc = f.leading().expect("nonzero polynomial");
    let mut disc = res / lc;
    if (n * (n - 1) / 2) % 2 == 1 {
        disc = -disc;
    }
    Ok(disc)
}

/// Sign-aware helper: true when `d` divides `value`.
pub(crate) fn divides(d: &BigInt, value: &BigInt) -> bool {
    !d.is_zero() && (value.abs() % d.abs()).is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mp(p: u64, c: &[u64]) -> ModPoly {
        ModPoly::new(p, c.to_vec())
    }

    #[test]
    fn reduction_examples() {
        let f = IntPoly::from_i64s(&[1, 0, 1]);
        assert_eq!(reduce_mod_p(&f, 2).unwrap(), mp(2, &[1, 0, 1]));
        let g = IntPoly::from_i64s(&[10, 7, 0, 5]);
        assert_eq!(reduce_mod_p(&g, 5).unwrap(), mp(5, &[0, 2]));
        assert!(reduce_mod_p(&IntPoly::zero(), 3).unwrap().is_zero());
        assert_eq!(reduce_mod_p(&f, 4), Err(PolyError::NotPrime(4)));
        let neg = IntPoly::from_i64s(&[-1, -1, 1]);
        assert_eq!(reduce_mod_p(&neg, 7).unwrap(), mp(7, &[6, 6, 1]));
    }

    #[test]
    fn factor_examples() {
        let f2 = factor_mod_p(&mp(2, &[1, 0, 1]), 1).unwrap();
        assert_eq!(f2.factors, vec![(mp(2, &[1, 1]), 2)]);
        let f5 = factor_mod_p(&mp(5, &[1, 0, 1]), 1).unwrap();
        assert_eq!(f5.factors, vec![(mp(5, &[2, 1]), 1), (mp(5, &[3, 1]), 1)]);
        let f3 = factor_mod_p(&mp(3, &[1, 0, 1]), 1).unwrap();
        assert_eq!(f3.factors, vec![(mp(3, &[1, 0, 1]), 1)]);
        assert_eq!(
            factor_mod_p(&ModPoly::zero(3), 1),
            Err(PolyError::ZeroPolynomial)
        );
    }

    #[test]
    fn inseparable_powers() {
        // (x^3 + 2)^3 ... over F_3 this is x^9 + 2 = (x + 2)^9.
        let f = mp(3, &[2, 0, 0, 0, 0, 0, 0, 0, 0, 1]);
        let fac = factor_mod_p(&f, 1).unwrap();
        assert_eq!(fac.factors, vec![(mp(3, &[2, 1]), 9)]);
        // x^4 + x^2 + 1 = (x^2 + x + 1)^2 over F_2, and x^2 + x + 1 is irreducible.
        let g = mp(2, &[1, 0, 1, 0, 1]);
        let fac = factor_mod_p(&g, 1).unwrap();
        assert_eq!(fac.factors, vec![(mp(2, &[1, 1, 1]), 2)]);
    }

    #[test]
    fn seventh_cyclotomic_mod_two() {
        let f = mp(2, &[1; 7]);
        let fac = factor_mod_p(&f, 1).unwrap();
        assert_eq!(
            fac.factors,
            vec![(mp(2, &[1, 0, 1, 1]), 1), (mp(2, &[1, 1, 0, 1]), 1)]
        );
    }

    #[test]
    fn discriminant_examples() {
        let d = |c: &[i64]| discriminant(&IntPoly::from_i64s(c)).unwrap();
        assert_eq!(d(&[1, 0, 1]), BigInt::from(-4));
        assert_eq!(d(&[-1, -1, 1]), BigInt::from(5));
        assert_eq!(d(&[-2, 0, 0, 1]), BigInt::from(-108));
        assert_eq!(d(&[1, 1, 1, 1, 1]), BigInt::from(125));
        assert_eq!(d(&[1, 1, 1, 1, 1, 1, 1]), BigInt::from(-16807));
        assert_eq!(d(&[1, 0, 0, 1, 0, 0, 1]), BigInt::from(-19683));
        assert_eq!(
            discriminant(&IntPoly::from_i64s(&[5])),
            Err(PolyError::ConstantPolynomial)
        );
    }

    const SMALL_PRIMES: [u64; 10] = [2, 3, 5, 7, 11, 13, 101, 997, 7919, 9973];

    fn mod_poly_strategy() -> impl Strategy<Value = ModPoly> {
        (0..SMALL_PRIMES.len(), 1usize..=8)
            .prop_flat_map(|(pi, deg)| {
                let p = SMALL_PRIMES[pi];
                (Just(p), prop::collection::vec(0..p, deg), 1..p)
            })
            .prop_map(|(p, mut c, lead)| {
                c.push(lead);
                ModPoly::new(p, c)
            })
    }

    proptest! {
        #[test]
        fn factorization_multiplies_back(f in mod_poly_strategy()) {
            let fac = factor_mod_p(&f, DEFAULT_SEED).unwrap();
            prop_assert_eq!(fac.product(), f.monic());
            prop_assert_eq!(fac.total_degree(), f.degree().unwrap());
        }

        #[test]
        fn factors_are_irreducible(f in mod_poly_strategy()) {
            // Rabin: g of degree d is irreducible iff x^(p^d) = x mod g and
            // gcd(x^(p^(d/q)) - x, g) = 1 for each prime q | d.
            let fac = factor_mod_p(&f, DEFAULT_SEED).unwrap();
            for (g, _) in &fac.factors {
                let p = g.modulus();
                let d = g.degree().unwrap();
                let x = ModPoly::x(p);
                let frob = |k: usize| (0..k).fold(x.rem(g), |h, _| h.pow_mod(p, g));
                prop_assert_eq!(frob(d), x.rem(g));
                for (q, _) in crate::arith::factorize_small(d as u64) {
                    let h = frob(d / q as usize).sub(&x);
                    prop_assert!(g.gcd(&h).is_one());
                }
            }
        }

        #[test]
        fn degree_pattern_matches_full_factorization(f in mod_poly_strategy()) {
            let fac = factor_mod_p(&f, DEFAULT_SEED).unwrap();
            let mut expected: Vec<(usize, u32)> = fac
                .factors
                .iter()
                .map(|(g, e)| (g.degree().unwrap(), *e))
                .collect();
            expected.sort_unstable();
            prop_assert_eq!(factor_degrees_mod_p(&f).unwrap(), expected);
        }

        #[test]
        fn factorization_is_seed_independent(f in mod_poly_strategy()) {
            let reference = factor_mod_p(&f, 1).unwrap();
            for seed in 2..12 {
                prop_assert_eq!(&factor_mod_p(&f, seed).unwrap(), &reference);
            }
        }

        #[test]
        fn low_degree_discriminants(a in -50i64..50, b in -50i64..50, c in -50i64..50, lead in 1i64..6) {
            let quad = IntPoly::from_i64s(&[c, b, lead]);
            prop_assert_eq!(discriminant(&quad).unwrap(), BigInt::from(b * b - 4 * lead * c));
            // Monic cubic x^3 + a x^2 + b x + c.
            let cubic = IntPoly::from_i64s(&[c, b, a, 1]);
            let expected = a * a * b * b - 4 * b * b * b - 4 * a * a * a * c - 27 * c * c + 18 * a * b * c;
            prop_assert_eq!(discriminant(&cubic).unwrap(), BigInt::from(expected));
        }
    }
}
