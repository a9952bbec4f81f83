//! Dense tables of the ideal-counting function `r_K(m)`.
//!
//! `r_K` is multiplicative, and `r_K(p^k)` is the number of ways to write `k`
//! as `Σ f_i a_i` over the residue degrees above `p`. The table is filled by
//! first writing every prime-power entry and then combining
//! `r_K(m) = r_K(p^k) · r_K(m / p^k)` along the smallest prime factor of `m`.

use std::io::{self, BufWriter, Read, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::number_field::{splitting_type_of_prime, FieldError, NumberField, SplittingType};

/// Largest table the library will build.
pub const MAX_X: u64 = 1 << 31;

const MAGIC: &[u8; 4] = b"RKT1";
const FORMAT_VERSION: u32 = 1;
const PRIME_CHUNK: usize = 1 << 14;
const PARALLEL_BLOCK: usize = 1 << 15;

#[derive(Debug, Error)]
pub enum SieveError {
    #[error("x_max must be at least 1")]
    EmptyRange,
    #[error("x_max = {0} exceeds the supported maximum 2^31 (the table would need {1} MB)")]
    TooLarge(u64, u64),
    #[error("r_K(p^k) for p = {p}, k = {k} does not fit in 32 bits")]
    Overflow { p: u64, k: u32 },
    #[error(transparent)]
    Field(#[from] FieldError),
}

#[derive(Debug, Error)]
pub enum TableFormatError {
    #[error("not an RKT1 table (bad magic)")]
    BadMagic,
    #[error("unsupported table version {0}")]
    BadVersion(u32),
    #[error("table is empty (x_max = 0)")]
    Empty,
    #[error("table label is not valid UTF-8")]
    BadLabel,
    #[error("table truncated: expected {expected} value bytes, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("table declares x_max = {0}, above the supported maximum")]
    TooLarge(u64),
    #[error("corrupt table: r(1) = {0}, expected 1")]
    BadUnit(u32),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// How the multiplicative combination pass runs. Both modes give identical tables.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SieveMode {
    #[default]
    Sequential,
    BlockedParallel,
}

/// `values[m] = r_K(m)` for `1 <= m <= x_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RkTable {
    field_label: String,
    x_max: usize,
    /// Index 0 is unused and always 0.
    values: Vec<u32>,
}

impl RkTable {
    /// Builds a table from `r(1), r(2), ...`; used for synthetic sequences and tests.
    pub fn from_values(field_label: impl Into<String>, values: &[u32]) -> Self {
        let mut v = Vec::with_capacity(values.len() + 1);
        v.push(0);
        v.extend_from_slice(values);
        RkTable {
            field_label: field_label.into(),
            x_max: values.len(),
            values: v,
        }
    }

    pub fn field_label(&self) -> &str {
        &self.field_label
    }

    pub fn x_max(&self) -> usize {
        self.x_max
    }

    /// `r_K(m)`; panics when `m` is 0 or beyond `x_max`.
    pub fn get(&self, m: usize) -> u32 {
        assert!(m >= 1 && m <= self.x_max, "m = {m} outside 1..={}", self.x_max);
        self.values[m]
    }

    /// `r_K(1), ..., r_K(x_max)`.
    pub fn values(&self) -> &[u32] {
        &self.values[1..]
    }

    /// Overwrites one entry. Only meant for fault-injection experiments.
    pub fn set(&mut self, m: usize, value: u32) {
        assert!(m >= 1 && m <= self.x_max);
        self.values[m] = value;
    }

    /// Binary form: 16-byte header (`RKT1`, version, x_max), then the label as
    /// a u32 length plus UTF-8 bytes, then `r(1..=x_max)` as little-endian u32.
    pub fn write_binary<W: Write>(&self, writer: W) -> io::Result<()> {
        let mut w = BufWriter::new(writer);
        w.write_all(MAGIC)?;
        w.write_all(&FORMAT_VERSION.to_le_bytes())?;
        w.write_all(&(self.x_max as u64).to_le_bytes())?;
        let label = self.field_label.as_bytes();
        w.write_all(&(label.len() as u32).to_le_bytes())?;
        w.write_all(label)?;
        for v in self.values() {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_binary<R: Read>(mut reader: R) -> Result<Self, TableFormatError> {
        let mut header = [0u8; 16];
        reader.read_exact(&mut header).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => TableFormatError::BadMagic,
            _ => e.into(),
        })?;
        if &header[..4] != MAGIC {
            return Err(TableFormatError::BadMagic);
        }
        let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
        if version != FORMAT_VERSION {
            return Err(TableFormatError::BadVersion(version));
        }
        let x_max = u64::from_le_bytes(header[8..16].try_into().unwrap());
        if x_max == 0 {
            return Err(TableFormatError::Empty);
        }
        if x_max > MAX_X {
            return Err(TableFormatError::TooLarge(x_max));
        }
        let mut len = [0u8; 4];
        reader.read_exact(&mut len)?;
        let mut label = vec![0u8; u32::from_le_bytes(len) as usize];
        reader.read_exact(&mut label)?;
        let field_label = String::from_utf8(label).map_err(|_| TableFormatError::BadLabel)?;
        let expected = x_max * 4;
        let mut raw = Vec::with_capacity(expected as usize);
        reader.take(expected).read_to_end(&mut raw)?;
        if raw.len() as u64 != expected {
            return Err(TableFormatError::Truncated {
                expected,
                found: raw.len() as u64,
            });
        }
        let mut values = Vec::with_capacity(x_max as usize + 1);
        values.push(0);
        values.extend(
            raw.chunks_exact(4)
                .map(|c| u32::from_le_bytes(c.try_into().unwrap())),
        );
        if values[1] != 1 {
            return Err(TableFormatError::BadUnit(values[1]));
        }
        Ok(RkTable {
            field_label,
            x_max: x_max as usize,
            values,
        })
    }

    /// CSV export with header `m,r`.
    pub fn write_csv<W: Write>(&self, writer: W) -> io::Result<()> {
        let mut w = BufWriter::new(writer);
        writeln!(w, "m,r")?;
        for (i, v) in self.values().iter().enumerate() {
            writeln!(w, "{},{}", i + 1, v)?;
        }
        w.flush()
    }
}

/// Number of ideals of norm `p^k` given the splitting type at `p`:
/// `#{a ∈ ℤ_{≥0}^g : Σ f_i a_i = k}`. Ramification indices do not enter.
pub fn r_prime_power(split: &SplittingType, k: u32) -> u64 {
    let k = k as usize;
    let mut ways = vec![0u64; k + 1];
    ways[0] = 1;
    for f in split.residue_degrees() {
        let f = f as usize;
        for s in f..=k {
            ways[s] = ways[s]
                .checked_add(ways[s - f])
                .expect("prime-power count overflows u64");
        }
    }
    ways[k]
}

pub fn sieve_rk(field: &NumberField, x_max: u64) -> Result<RkTable, SieveError> {
    sieve_rk_with(field, x_max, SieveMode::Sequential)
}

pub fn sieve_rk_with(
    field: &NumberField,
    x_max: u64,
    mode: SieveMode,
) -> Result<RkTable, SieveError> {
    sieve_with_splitting(field.label(), x_max, mode, |p| {
        splitting_type_of_prime(field, p)
    })
}

/// Builds a table from an arbitrary source of splitting types, e.g. a closed-form oracle.
pub fn sieve_with_splitting<F>(
    label: &str,
    x_max: u64,
    mode: SieveMode,
    split: F,
) -> Result<RkTable, SieveError>
where
    F: Fn(u64) -> Result<SplittingType, FieldError> + Sync,
{
    if x_max == 0 {
        return Err(SieveError::EmptyRange);
    }
    if x_max > MAX_X {
        return Err(SieveError::TooLarge(x_max, (x_max * 4) >> 20));
    }
    let n = x_max as usize;
    let (spf, primes) = smallest_prime_factors(n);

    let mut values = vec![0u32; n + 1];
    values[1] = 1;
    for chunk in primes.chunks(PRIME_CHUNK) {
        let local: Vec<Result<Vec<(usize, u32)>, SieveError>> = match mode {
            SieveMode::Sequential => chunk.iter().map(|&p| local_factors(p, n, &split)).collect(),
            SieveMode::BlockedParallel => chunk
                .par_iter()
                .map(|&p| local_factors(p, n, &split))
                .collect(),
        };
        for entries in local {
            for (q, r) in entries? {
                values[q] = r;
            }
        }
    }

    match mode {
        SieveMode::Sequential => combine_range(&spf, &mut values, 2, n + 1),
        SieveMode::BlockedParallel => {
            // Every dependency of m lies below m/2, so each doubling range
            // [lo, 2lo) only reads entries that are already final.
            let mut lo = 2;
            while lo <= n {
                let hi = (2 * lo).min(n + 1);
                let (done, todo) = values.split_at_mut(lo);
                let done: &[u32] = done;
                todo[..hi - lo]
                    .par_chunks_mut(PARALLEL_BLOCK)
                    .enumerate()
                    .for_each(|(b, block)| {
                        let start = lo + b * PARALLEL_BLOCK;
                        for (i, slot) in block.iter_mut().enumerate() {
                            if let Some(v) = combine_one(&spf, done, start + i) {
                                *slot = v;
                            }
                        }
                    });
                lo = hi;
            }
        }
    }

    Ok(RkTable {
        field_label: label.to_string(),
        x_max: n,
        values,
    })
}

fn local_factors<F>(p: u32, n: usize, split: &F) -> Result<Vec<(usize, u32)>, SieveError>
where
    F: Fn(u64) -> Result<SplittingType, FieldError>,
{
    let s = split(p as u64)?;
    let mut out = Vec::new();
    let mut q = p as usize;
    let mut k = 1;
    loop {
        let r = r_prime_power(&s, k);
        let r = u32::try_from(r).map_err(|_| SieveError::Overflow { p: p as u64, k })?;
        out.push((q, r));
        match q.checked_mul(p as usize) {
            Some(next) if next <= n => q = next,
            _ => break,
        }
        k += 1;
    }
    Ok(out)
}

fn combine_range(spf: &[u32], values: &mut [u32], lo: usize, hi: usize) {
    for m in lo..hi {
        if let Some(v) = combine_one(spf, values, m) {
            values[m] = v;
        }
    }
}

/// `r(p^k) · r(m')` for `m = p^k m'` with `p = spf(m)`, or `None` when `m` is a prime power.
#[inline]
fn combine_one(spf: &[u32], values: &[u32], m: usize) -> Option<u32> {
    let p = spf[m] as usize;
    let mut q = p;
    let mut rest = m / p;
    while rest > 1 && spf[rest] as usize == p {
        rest /= p;
        q *= p;
    }
    if rest == 1 {
        return None;
    }
    let v = values[q] as u64 * values[rest] as u64;
    debug_assert!(v <= u32::MAX as u64, "r_K({m}) overflows u32");
    Some(v as u32)
}

/// Linear sieve: smallest prime factor of every `m <= n`, and the primes up to `n`.
fn smallest_prime_factors(n: usize) -> (Vec<u32>, Vec<u32>) {
    let mut spf = vec![0u32; n + 1];
    let mut primes: Vec<u32> = Vec::new();
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
        }
        let si = spf[i];
        for &p in &primes {
            let ip = i * p as usize;
            if p > si || ip > n {
                break;
            }
            spf[ip] = p;
        }
    }
    (spf, primes)
}

/// Primes up to `n` (inclusive).
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    smallest_prime_factors(n as usize)
        .1
        .into_iter()
        .map(u64::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::number_field::{catalog_field, cyclotomic_splitting_oracle};

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn prime_power_examples() {
        let inert = SplittingType::new(3, vec![(1, 6)]);
        for k in 0..20 {
            assert_eq!(r_prime_power(&inert, k), u64::from(k % 6 == 0));
        }
        let split6 = SplittingType::new(29, vec![(1, 1); 6]);
        assert_eq!(r_prime_power(&split6, 3), 56);
        assert_eq!(r_prime_power(&split6, 3), binomial(8, 5));
        let ramified = SplittingType::new(2, vec![(2, 1)]);
        assert!((0..30).all(|k| r_prime_power(&ramified, k) == 1));
        let mixed = SplittingType::new(2, vec![(1, 3), (1, 3)]);
        assert_eq!(r_prime_power(&mixed, 1), 0);
        assert_eq!(r_prime_power(&mixed, 3), 2);
        assert_eq!(r_prime_power(&mixed, 6), 3);
    }

    #[test]
    fn gaussian_small_table() {
        let t = sieve_rk(&catalog_field("Q(i)").unwrap(), 10).unwrap();
        // Σ_{d|m} χ_{-4}(d): 3 is inert, so r(3) = r(6) = 0.
        assert_eq!(t.values(), &[1, 1, 0, 1, 2, 0, 0, 1, 1, 2]);
    }

    #[test]
    fn zeta7_has_no_ideal_of_norm_two() {
        let t = sieve_rk(&catalog_field("Q(zeta7)").unwrap(), 64).unwrap();
        assert_eq!(t.get(1), 1);
        assert_eq!(t.get(2), 0);
        assert_eq!(t.get(8), 2);
        assert_eq!(t.get(7), 1);
        assert_eq!(t.get(29), 6);
    }

    #[test]
    fn unit_table() {
        let t = sieve_rk(&catalog_field("Q(zeta5)").unwrap(), 1).unwrap();
        assert_eq!(t.values(), &[1]);
    }

    #[test]
    fn limits() {
        let k = catalog_field("Q(i)").unwrap();
        assert!(matches!(sieve_rk(&k, 0), Err(SieveError::EmptyRange)));
        assert!(matches!(sieve_rk(&k, MAX_X + 1), Err(SieveError::TooLarge(..))));
    }

    #[test]
    fn uncertified_prime_is_named() {
        let k = NumberField::new(
            "x^2+4",
            crate::poly_arith::IntPoly::from_i64s(&[4, 0, 1]),
            false,
        )
        .unwrap();
        let err = sieve_rk(&k, 100).unwrap_err();
        assert!(matches!(err, SieveError::Field(FieldError::UncertifiedPrime(2))));
        assert!(err.to_string().contains("uncertified prime 2"));
    }

    #[test]
    fn parallel_mode_is_identical() {
        let k = catalog_field("Q(zeta7)").unwrap();
        let a = sieve_rk_with(&k, 200_000, SieveMode::Sequential).unwrap();
        let b = sieve_rk_with(&k, 200_000, SieveMode::BlockedParallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oracle_table_matches() {
        let k = catalog_field("Q(zeta7)").unwrap();
        let a = sieve_rk(&k, 50_000).unwrap();
        let b = sieve_with_splitting(k.label(), 50_000, SieveMode::Sequential, |p| {
            cyclotomic_splitting_oracle(7, p)
        })
        .unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_and_csv_formats() {
        let t = RkTable::from_values("Q(i)", &[1, 1, 1, 1, 2]);
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"RKT1");
        assert_eq!(u32::from_le_bytes(buf[4..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 5);
        assert_eq!(u32::from_le_bytes(buf[16..20].try_into().unwrap()), 4);
        assert_eq!(&buf[20..24], b"Q(i)");
        assert_eq!(buf.len(), 24 + 5 * 4);
        assert_eq!(RkTable::read_binary(buf.as_slice()).unwrap(), t);

        let mut csv = Vec::new();
        t.write_csv(&mut csv).unwrap();
        assert_eq!(String::from_utf8(csv).unwrap(), "m,r\n1,1\n2,1\n3,1\n4,1\n5,2\n");
    }

    #[test]
    fn binary_rejects_bad_input() {
        let t = RkTable::from_values("K", &[1, 2, 3]);
        let mut buf = Vec::new();
        t.write_binary(&mut buf).unwrap();
        assert!(matches!(
            RkTable::read_binary(&buf[..buf.len() - 1]),
            Err(TableFormatError::Truncated { .. })
        ));
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(RkTable::read_binary(bad.as_slice()), Err(TableFormatError::BadMagic)));
        let mut empty = buf[..16].to_vec();
        empty[8..16].copy_from_slice(&0u64.to_le_bytes());
        assert!(matches!(RkTable::read_binary(empty.as_slice()), Err(TableFormatError::Empty)));
        assert!(matches!(RkTable::read_binary(&[][..]), Err(TableFormatError::BadMagic)));
    }

    #[test]
    fn primes() {
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert!(primes_up_to(1).is_empty());
    }
}
