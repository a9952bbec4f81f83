//! Sieved tables and splitting types against independent closed forms.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rklab::arith::{kronecker, multiplicative_order};
use rklab::ideal_sieve::{primes_up_to, sieve_rk, sieve_rk_with, SieveMode};
use rklab::number_field::{
    catalog_field, cyclotomic_splitting_oracle, quadratic_splitting_oracle, splitting_type,
    SplittingType,
};

/// `Σ_{d|m} χ_D(d)` for every `m ≤ n`, by a divisor sweep.
fn quadratic_divisor_sums(d: i64, n: usize) -> Vec<i64> {
    let mut out = vec![0i64; n + 1];
    for k in 1..=n {
        let chi = kronecker(d, k as u64) as i64;
        if chi == 0 {
            continue;
        }
        for m in (k..=n).step_by(k) {
            out[m] += chi;
        }
    }
    out
}

#[test]
fn quadratic_tables_match_divisor_sums() {
    for (label, d, n) in [("Q(i)", -4, 200_000), ("Q(sqrt5)", 5, 200_000)] {
        let field = catalog_field(label).unwrap();
        let table = sieve_rk(&field, n as u64).unwrap();
        let oracle = quadratic_divisor_sums(d, n);
        for m in 1..=n {
            assert_eq!(table.get(m) as i64, oracle[m], "{label} at m = {m}");
        }
    }
}

#[test]
fn quadratic_splitting_matches_kronecker() {
    let field = catalog_field("Q(sqrt5)").unwrap();
    for p in primes_up_to(20_000) {
        assert_eq!(
            splitting_type(&field, p).unwrap(),
            quadratic_splitting_oracle(5, p).unwrap()
        );
    }
}

#[test]
fn prime_cyclotomic_splitting_matches_orders() {
    for (label, q) in [("Q(zeta5)", 5), ("Q(zeta7)", 7)] {
        let field = catalog_field(label).unwrap();
        for p in primes_up_to(20_000) {
            assert_eq!(
                splitting_type(&field, p).unwrap(),
                cyclotomic_splitting_oracle(q, p).unwrap(),
                "{label} at p = {p}"
            );
        }
    }
}

#[test]
fn ninth_roots_split_by_order_mod_nine() {
    let field = catalog_field("Q(zeta9)").unwrap();
    for p in primes_up_to(20_000) {
        let expected = if p == 3 {
            SplittingType::new(3, vec![(6, 1)])
        } else {
            let f = multiplicative_order(p % 9, 9).unwrap();
            SplittingType::new(p, vec![(1, f as u32); (6 / f) as usize])
        };
        assert_eq!(splitting_type(&field, p).unwrap(), expected);
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[test]
fn tables_are_multiplicative() {
    let n = 1_000_000usize;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for label in ["Q(zeta7)", "Q(sqrt5)"] {
        let field = catalog_field(label).unwrap();
        let table = sieve_rk_with(&field, n as u64, SieveMode::BlockedParallel).unwrap();
        let mut checked = 0;
        while checked < 10_000 {
            let a = rng.gen_range(1..=1000usize);
            let b = rng.gen_range(1..=n / a);
            if gcd(a, b) != 1 {
                continue;
            }
            assert_eq!(
                table.get(a * b) as u64,
                table.get(a) as u64 * table.get(b) as u64,
                "{label}: r({a}·{b})"
            );
            checked += 1;
        }
    }
}

#[test]
fn gaussian_mean_value_settles_at_quarter_pi() {
    let field = catalog_field("Q(i)").unwrap();
    let table = sieve_rk(&field, 1_000_000).unwrap();
    let kappa = std::f64::consts::FRAC_PI_4;
    let mut sum = 0u64;
    let mut errors = Vec::new();
    for m in 1..=1_000_000usize {
        sum += table.get(m) as u64;
        if m % 100_000 == 0 {
            errors.push((sum as f64 / m as f64 - kappa).abs());
        }
    }
    // The lattice-point error is far below x^{1/2}.
    for (j, e) in errors.iter().enumerate() {
        let x = 100_000.0 * (j + 1) as f64;
        assert!(*e < 1.0 / x.sqrt(), "x = {x}: {e}");
    }
}
