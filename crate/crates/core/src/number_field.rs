//! Number fields given by a monic defining polynomial, and the splitting of
//! rational primes read off from the factorization of that polynomial mod `p`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::Serialize;
use thiserror::Error;

use crate::arith::{is_fundamental_discriminant, is_prime, kronecker, multiplicative_order};
use crate::poly_arith::{
    discriminant, divides, factor_degrees_mod_p, factor_mod_p, reduce_mod_prime, IntPoly, PolyError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FieldError {
    #[error("uncertified prime {0}: p^2 divides disc(f) and the field has no declared index 1")]
    UncertifiedPrime(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("defining polynomial must be monic of degree at least 2")]
    BadPolynomial,
    #[error("cyclotomic oracle needs an odd prime q, got {0}")]
    BadCyclotomicOrder(u64),
    #[error("{0} is not a fundamental discriminant")]
    NotFundamental(i64),
    #[error("unknown field label '{0}'")]
    UnknownField(String),
    #[error("catalog line {line}: {reason}")]
    Catalog { line: usize, reason: String },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// The shipped field catalog, in the catalog file format.
pub const DEFAULT_CATALOG: &str = "\
# label : coefficients (ascending) : index_is_one
Q(i) : 1,0,1 : true
Q(sqrt5) : -1,-1,1 : true
Q(zeta5) : 1,1,1,1,1 : true
Q(zeta7) : 1,1,1,1,1,1,1 : true
Q(zeta9) : 1,0,0,1,0,0,1 : true
";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NumberField {
    label: String,
    defining_poly: IntPoly,
    degree: usize,
    poly_disc: BigInt,
    index_is_one: bool,
}

impl NumberField {
    /// Irreducibility of `defining_poly` over ℚ is trusted.
    pub fn new(
        label: impl Into<String>,
        defining_poly: IntPoly,
        index_is_one: bool,
    ) -> Result<Self, FieldError> {
        let degree = match defining_poly.degree() {
            Some(d) if d >= 2 && defining_poly.is_monic() => d,
            _ => return Err(FieldError::BadPolynomial),
        };
        let poly_disc = discriminant(&defining_poly)?;
        Ok(NumberField {
            label: label.into(),
            defining_poly,
            degree,
            poly_disc,
            index_is_one,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn defining_poly(&self) -> &IntPoly {
        &self.defining_poly
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn poly_disc(&self) -> &BigInt {
        &self.poly_disc
    }

    pub fn index_is_one(&self) -> bool {
        self.index_is_one
    }

    /// Dedekind's criterion applies at `p` when the index is known to be 1
    /// or when `p^2` does not divide the polynomial discriminant.
    pub fn is_certified(&self, p: u64) -> bool {
        let p2 = BigInt::from(p) * BigInt::from(p);
        self.index_is_one || !divides(&p2, &self.poly_disc)
    }

    /// The fundamental discriminant of a quadratic field with index 1.
    pub fn quadratic_discriminant(&self) -> Option<i64> {
        if self.degree != 2 || !self.index_is_one {
            return None;
        }
        let d = i64::try_from(&self.poly_disc).ok()?;
        is_fundamental_discriminant(d).then_some(d)
    }

    /// The catalog file line describing this field.
    pub fn catalog_line(&self) -> String {
        let coeffs: Vec<String> = self
            .defining_poly
            .coeffs()
            .iter()
            .map(|c| c.to_string())
            .collect();
        format!("{} : {} : {}", self.label, coeffs.join(","), self.index_is_one)
    }
}

impl fmt::Display for NumberField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = Q[x]/({})", self.label, self.defining_poly)
    }
}

/// Parses the catalog format: `label : c0,c1,...,cn : index_is_one`, one field
/// per line. Blank lines and lines starting with `#` are skipped.
pub fn parse_catalog(text: &str) -> Result<Vec<NumberField>, FieldError> {
    let mut fields = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |reason: &str| FieldError::Catalog {
            line: i + 1,
            reason: reason.to_string(),
        };
        // Labels may contain ':' only if we split from the right.
        let mut parts = line.rsplitn(3, ':');
        let (Some(flag), Some(coeffs), Some(label)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(err("expected 'label : coefficients : index_is_one'"));
        };
        let index_is_one = match flag.trim() {
            "true" => true,
            "false" => false,
            _ => return Err(err("index_is_one must be 'true' or 'false'")),
        };
        let coeffs = coeffs
            .split(',')
            .map(|c| BigInt::from_str(c.trim()))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| err("bad integer coefficient"))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(err("empty label"));
        }
        let field = NumberField::new(label, IntPoly::new(coeffs), index_is_one)
            .map_err(|e| err(&e.to_string()))?;
        fields.push(field);
    }
    Ok(fields)
}

pub fn catalog() -> Vec<NumberField> {
    parse_catalog(DEFAULT_CATALOG).expect("built-in catalog parses")
}

pub fn catalog_field(label: &str) -> Result<NumberField, FieldError> {
    catalog()
        .into_iter()
        .find(|f| f.label == label)
        .ok_or_else(|| FieldError::UnknownField(label.to_string()))
}

/// Ramification data `(e_i, f_i)` of the primes above a rational prime `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SplittingType {
    pub p: u64,
    pairs: Vec<(u32, u32)>,
}

impl SplittingType {
    /// Sorts the pairs canonically (by `f`, then `e`).
    pub fn new(p: u64, mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.sort_by_key(|&(e, f)| (f, e));
        SplittingType { p, pairs }
    }

    /// `(e, f)` pairs in canonical order.
    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    /// Residue degrees, one per prime ideal above `p`.
    pub fn residue_degrees(&self) -> impl Iterator<Item = u32> + '_ {
        self.pairs.iter().map(|&(_, f)| f)
    }

    /// `Σ e_i f_i`, which equals the field degree.
    pub fn degree(&self) -> u32 {
        self.pairs.iter().map(|&(e, f)| e * f).sum()
    }

    pub fn is_ramified(&self) -> bool {
        self.pairs.iter().any(|&(e, _)| e > 1)
    }
}

impl fmt::Display for SplittingType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> = self
            .pairs
            .iter()
            .map(|(e, fd)| format!("(e={e},f={fd})"))
            .collect();
        write!(f, "{}", pairs.join(" "))
    }
}

/// Dedekind's theorem: each irreducible factor of degree `f` and multiplicity
/// `e` of the defining polynomial mod `p` gives a prime of type `(e, f)`.
///
/// Only the degree pattern of the factorization is needed, so the randomized
/// equal-degree stage is skipped.
pub fn splitting_type(field: &NumberField, p: u64) -> Result<SplittingType, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    splitting_type_of_prime(field, p)
}

/// [`splitting_type`] for `p` already known to be prime.
pub(crate) fn splitting_type_of_prime(
    field: &NumberField,
    p: u64,
) -> Result<SplittingType, FieldError> {
    if !field.is_certified(p) {
        return Err(FieldError::UncertifiedPrime(p));
    }
    let reduced = reduce_mod_prime(&field.defining_poly, p);
    let pairs = factor_degrees_mod_p(&reduced)?
        .into_iter()
        .map(|(d, e)| (e, d as u32))
        .collect();
    Ok(field.checked_split(p, pairs))
}

/// Same result as [`splitting_type`], read off the complete factorization
/// produced by [`factor_mod_p`] with the given seed.
pub fn splitting_type_seeded(
    field: &NumberField,
    p: u64,
    seed: u64,
) -> Result<SplittingType, FieldError> {
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if !field.is_certified(p) {
        return Err(FieldError::UncertifiedPrime(p));
    }
    let factorization = factor_mod_p(&reduce_mod_prime(&field.defining_poly, p), seed)?;
    let pairs = factorization
        .factors
        .iter()
        .map(|(g, e)| (*e, g.degree().expect("nonconstant factor") as u32))
        .collect();
    Ok(field.checked_split(p, pairs))
}

impl NumberField {
    fn checked_split(&self, p: u64, pairs: Vec<(u32, u32)>) -> SplittingType {
        let split = SplittingType::new(p, pairs);
        assert_eq!(
            split.degree() as usize,
            self.degree,
            "sum of e*f must equal the degree at p = {p}"
        );
        split
    }
}

/// Splitting in `ℚ(ζ_q)`: total ramification at `q`, otherwise `(q-1)/f`
/// unramified primes of degree `f = ord_q(p)`.
pub fn cyclotomic_splitting_oracle(q: u64, p: u64) -> Result<SplittingType, FieldError> {
    if q == 2 || !is_prime(q) {
        return Err(FieldError::BadCyclotomicOrder(q));
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    if p == q {
        return Ok(SplittingType::new(p, vec![((q - 1) as u32, 1)]));
    }
    let f = multiplicative_order(p % q, q).expect("p is a unit mod q");
    let g = (q - 1) / f;
    Ok(SplittingType::new(p, vec![(1, f as u32); g as usize]))
}

/// Splitting in the quadratic field of fundamental discriminant `d`, from `(d/p)`.
pub fn quadratic_splitting_oracle(d: i64, p: u64) -> Result<SplittingType, FieldError> {
    if !is_fundamental_discriminant(d) {
        return Err(FieldError::NotFundamental(d));
    }
    if !is_prime(p) {
        return Err(FieldError::NotPrime(p));
    }
    let pairs = match kronecker(d, p) {
        1 => vec![(1, 1), (1, 1)],
        -1 => vec![(1, 2)],
        _ => vec![(2, 1)],
    };
    Ok(SplittingType::new(p, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qi() -> NumberField {
        catalog_field("Q(i)").unwrap()
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(splitting_type(&qi(), 2).unwrap().pairs(), &[(2, 1)]);
        assert_eq!(splitting_type(&qi(), 5).unwrap().pairs(), &[(1, 1), (1, 1)]);
        assert_eq!(splitting_type(&qi(), 3).unwrap().pairs(), &[(1, 2)]);
        assert_eq!(splitting_type(&qi(), 4), Err(FieldError::NotPrime(4)));
    }

    #[test]
    fn cyclotomic_examples() {
        assert_eq!(cyclotomic_splitting_oracle(7, 2).unwrap().pairs(), &[(1, 3); 2]);
        assert_eq!(cyclotomic_splitting_oracle(7, 3).unwrap().pairs(), &[(1, 6)]);
        assert_eq!(cyclotomic_splitting_oracle(7, 7).unwrap().pairs(), &[(6, 1)]);
        assert_eq!(
            cyclotomic_splitting_oracle(2, 3),
            Err(FieldError::BadCyclotomicOrder(2))
        );
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(quadratic_splitting_oracle(-4, 5).unwrap().pairs(), &[(1, 1), (1, 1)]);
        assert_eq!(quadratic_splitting_oracle(-4, 3).unwrap().pairs(), &[(1, 2)]);
        assert_eq!(quadratic_splitting_oracle(-4, 2).unwrap().pairs(), &[(2, 1)]);
        assert_eq!(
            quadratic_splitting_oracle(-16, 3),
            Err(FieldError::NotFundamental(-16))
        );
    }

    #[test]
    fn uncertified_primes_are_refused() {
        // x^2 + 4 has discriminant -16, so p = 2 is not covered by Dedekind's criterion.
        let f = NumberField::new("x^2+4", IntPoly::from_i64s(&[4, 0, 1]), false).unwrap();
        assert_eq!(splitting_type(&f, 2), Err(FieldError::UncertifiedPrime(2)));
        assert_eq!(splitting_type(&f, 5).unwrap().pairs(), &[(1, 1), (1, 1)]);
    }

    #[test]
    fn catalog_contents() {
        let fields = catalog();
        let labels: Vec<&str> = fields.iter().map(|f| f.label()).collect();
        assert_eq!(labels, ["Q(i)", "Q(sqrt5)", "Q(zeta5)", "Q(zeta7)", "Q(zeta9)"]);
        let degrees: Vec<usize> = fields.iter().map(|f| f.degree()).collect();
        assert_eq!(degrees, [2, 2, 4, 6, 6]);
        assert_eq!(fields[0].quadratic_discriminant(), Some(-4));
        assert_eq!(fields[1].quadratic_discriminant(), Some(5));
        assert_eq!(fields[3].quadratic_discriminant(), None);
        for f in &fields {
            let reparsed = parse_catalog(&f.catalog_line()).unwrap();
            assert_eq!(&reparsed[0], f);
        }
    }

    #[test]
    fn catalog_parse_errors() {
        assert!(matches!(
            parse_catalog("Q(i) : 1,0,1"),
            Err(FieldError::Catalog { line: 1, .. })
        ));
        assert!(matches!(
            parse_catalog("\n# c\nK : 1,0,2 : maybe"),
            Err(FieldError::Catalog { line: 3, .. })
        ));
        assert!(matches!(
            parse_catalog("K : 1,a : true"),
            Err(FieldError::Catalog { .. })
        ));
        assert!(matches!(
            parse_catalog("K : 1,0,2 : true"),
            Err(FieldError::Catalog { .. })
        ));
        assert!(catalog_field("Q(zeta11)").is_err());
    }

    #[test]
    fn both_routes_agree() {
        for field in catalog() {
            for p in crate::ideal_sieve::primes_up_to(3000) {
                let fast = splitting_type(&field, p).unwrap();
                for seed in [1, 2, 99] {
                    assert_eq!(splitting_type_seeded(&field, p, seed).unwrap(), fast);
                }
            }
        }
    }

    #[test]
    fn zeta9_splitting() {
        // Q(ζ_9): f = ord_9(p) for p != 3, total ramification at 3.
        let k = catalog_field("Q(zeta9)").unwrap();
        assert_eq!(splitting_type(&k, 3).unwrap().pairs(), &[(6, 1)]);
        for p in [2u64, 5, 7, 11, 13, 17, 19, 37, 73] {
            let f = multiplicative_order(p % 9, 9).unwrap() as u32;
            let expected = vec![(1, f); (6 / f) as usize];
            assert_eq!(splitting_type(&k, p).unwrap().pairs(), expected.as_slice());
        }
    }
}
