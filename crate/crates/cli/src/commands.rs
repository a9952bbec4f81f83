use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::Path;

use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use sha2::{Digest, Sha256};

use rklab::analytic::{
    check_e1_identity, check_partial_summation_identity_between, kappa_closed_form,
    kappa_grid_fit, weighted_sum_report, Coefficients, IdentityCheck, KappaEstimate,
    REPORT_CSV_HEADER,
};
use rklab::exponent_fit::{fit_exponent, reference_exponents, FitReport, ReferenceExponents, DEFAULT_FLOOR};
use rklab::expsum::{counterexample_driver, BoundReport};
use rklab::ideal_sieve::{primes_up_to, sieve_rk, sieve_rk_with, RkTable, SieveMode};
use rklab::number_field::{catalog_field, splitting_type_seeded, FieldError, NumberField};
use rklab::poly_arith::IntPoly;

use crate::config::{parse_u64_list, GridSpec, Options};
use crate::Failure;

const DEFAULT_PMAX: u64 = 100;
const DEFAULT_EPS: f64 = 0.01;
const CHECK_GRID: [f64; 3] = [1e2, 1e3, 1e4];
const E1_CHECK_POINTS: [f64; 3] = [10.0, 1e3, 1e6];
const RANDOM_SEQUENCES: usize = 100;
const IDENTITY_TOL: f64 = 1e-8;

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| Failure::usage(anyhow!("--{flag} is required")))
}

fn resolve_field(opts: &Options) -> Result<NumberField> {
    if let Some(poly) = &opts.poly {
        let coeffs: Vec<i64> = poly
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<_, _>>()
            .map_err(|e| Failure::usage(anyhow!("--poly: {e}")))?;
        let label = opts.field.clone().unwrap_or_else(|| "user".to_string());
        // Nothing is known about the ring of integers of a user polynomial.
        return NumberField::new(label, IntPoly::from_i64s(&coeffs), false)
            .map_err(|e| Failure::usage(e.into()));
    }
    let label = require(&opts.field, "field")?;
    catalog_field(label).map_err(|e| Failure::usage(e.into()))
}

fn read_table(path: &Path) -> Result<RkTable> {
    let file = File::open(path)
        .with_context(|| format!("opening table {}", path.display()))
        .map_err(Failure::usage)?;
    RkTable::read_binary(BufReader::new(file))
        .with_context(|| format!("reading table {}", path.display()))
}

/// Writes to `--out` when given, otherwise to stdout.
fn emit(opts: &Options, bytes: &[u8]) -> Result<()> {
    match &opts.out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            std::io::stdout().write_all(bytes)?;
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn field(opts: &Options) -> Result<()> {
    let field = resolve_field(opts)?;
    let pmax = opts.pmax.unwrap_or(DEFAULT_PMAX);
    let seed = opts.seed();
    println!("{field}");
    println!("degree {}", field.degree());
    println!("poly_disc {}", field.poly_disc());
    println!("index_is_one {}", field.index_is_one());
    let mut uncertified = Vec::new();
    for p in primes_up_to(pmax) {
        match splitting_type_seeded(&field, p, seed) {
            Ok(split) => {
                let tag = if split.is_ramified() { "  ramified" } else { "" };
                println!("{p:>8}  {split}{tag}");
            }
            Err(FieldError::UncertifiedPrime(_)) => {
                println!("{p:>8}  uncertified");
                uncertified.push(p.to_string());
            }
            Err(e) => return Err(e.into()),
        }
    }
    if !uncertified.is_empty() {
        println!("uncertified primes: {}", uncertified.join(" "));
    }
    Ok(())
}

pub fn sieve(opts: &Options) -> Result<()> {
    let field = resolve_field(opts)?;
    let x_max = *require(&opts.xmax, "xmax")?;
    let out = require(&opts.out, "out")?;
    let mode = match opts.threads {
        Some(1) => SieveMode::Sequential,
        _ => SieveMode::BlockedParallel,
    };
    let table = sieve_rk_with(&field, x_max, mode)
        .with_context(|| format!("sieving {} up to {x_max}", field.label()))?;
    let mut bytes = Vec::with_capacity(table.values().len() * 4 + 64);
    table.write_binary(&mut bytes)?;
    fs::write(out, &bytes).with_context(|| format!("writing {}", out.display()))?;
    if let Some(csv) = &opts.csv {
        let mut text = Vec::new();
        table.write_csv(&mut text)?;
        fs::write(csv, text).with_context(|| format!("writing {}", csv.display()))?;
    }
    println!("{} x_max={} entries={}", field.label(), table.x_max(), table.values().len());
    println!("sha256 {}", sha256_hex(&bytes));
    Ok(())
}

/// Closed form when the field has one, else a fit over `x_max · 2^{−k}`, `k < 10`.
fn kappa_for(table: &RkTable) -> Result<KappaEstimate> {
    if let Ok(field) = catalog_field(table.field_label()) {
        if let Ok(k) = kappa_closed_form(&field) {
            return Ok(k);
        }
    }
    kappa_fit(table)
}

fn kappa_fit(table: &RkTable) -> Result<KappaEstimate> {
    let top = table.x_max() as f64;
    let grid: Vec<f64> = (0..10).rev().map(|k| top / f64::powi(2.0, k)).collect();
    if grid[0] < 1.0 {
        return Err(Failure::usage(anyhow!(
            "table too short for a grid fit (x_max = {}, need at least 512)",
            table.x_max()
        )));
    }
    Ok(kappa_grid_fit(table, &grid)?)
}

fn method_name(k: &KappaEstimate) -> String {
    serde_json::to_value(k.method)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

pub fn sums(opts: &Options) -> Result<()> {
    let table = read_table(require(&opts.table, "table")?)?;
    let grid = match &opts.grid {
        Some(g) => g.parse::<GridSpec>().map_err(Failure::usage)?.points(),
        None => default_sums_grid(table.x_max()),
    };
    let kappa = kappa_for(&table)?;
    println!(
        "kappa {} source {} uncertainty {:e}",
        kappa.value,
        method_name(&kappa),
        kappa.uncertainty
    );
    let mut csv = String::from(REPORT_CSV_HEADER);
    csv.push('\n');
    for &x in &grid {
        let report = weighted_sum_report(&table, x, kappa.value)
            .with_context(|| format!("grid point {x} against a table of length {}", table.x_max()))?;
        println!(
            "x {}  residual_loglog/x {:e}  loglog/(kappa x) {}",
            x,
            report.residual_loglog / x,
            report.loglog_sum / (kappa.value * x)
        );
        csv.push_str(&report.csv_row());
        csv.push('\n');
    }
    emit(opts, csv.as_bytes())
}

/// `1000 · 2^j` up to the table length, or the length alone for short tables.
fn default_sums_grid(len: usize) -> Vec<f64> {
    let mut grid = Vec::new();
    let mut x = 1000.0;
    while x <= len as f64 {
        grid.push(x);
        x *= 2.0;
    }
    if grid.is_empty() {
        grid.push(len as f64);
    }
    grid
}

#[derive(Serialize)]
struct KappaOutput {
    field: String,
    x_max: usize,
    closed_form: Option<KappaEstimate>,
    grid_fit: KappaEstimate,
}

pub fn kappa(opts: &Options) -> Result<()> {
    let table = read_table(require(&opts.table, "table")?)?;
    let closed = catalog_field(table.field_label())
        .ok()
        .and_then(|f| kappa_closed_form(&f).ok());
    let fit = match &opts.grid {
        Some(g) => kappa_grid_fit(&table, &g.parse::<GridSpec>().map_err(Failure::usage)?.points())?,
        None => kappa_fit(&table)?,
    };
    println!("field {}", table.field_label());
    match &closed {
        Some(k) => println!("closed_form {} uncertainty {:e}", k.value, k.uncertainty),
        None => println!("closed_form unavailable"),
    }
    println!("grid_fit {} stderr {:e}", fit.value, fit.uncertainty);
    if let Some(k) = &closed {
        let sigmas = (fit.value - k.value).abs() / fit.uncertainty.max(f64::MIN_POSITIVE);
        println!("difference {:e} ({sigmas:.2} stderr)", fit.value - k.value);
    }
    if opts.out.is_some() {
        let out = KappaOutput {
            field: table.field_label().to_string(),
            x_max: table.x_max(),
            closed_form: closed,
            grid_fit: fit,
        };
        emit(opts, &to_json(&out)?)?;
    }
    Ok(())
}

pub fn counterexample(opts: &Options) -> Result<()> {
    let ms = match &opts.m_list {
        Some(list) => parse_u64_list(list).map_err(Failure::usage)?,
        None => (10..=20).step_by(2).map(|k| 1u64 << k).collect(),
    };
    let eps = opts.eps.unwrap_or(DEFAULT_EPS);
    let reports: Vec<BoundReport> = ms
        .iter()
        .map(|&m| counterexample_driver(m, eps).map_err(|e| Failure::usage(e.into())))
        .collect::<Result<_>>()?;
    let bytes = to_json(&reports)?;
    if opts.out.is_some() {
        emit(opts, &bytes)?;
        for r in &reports {
            println!("M {}  |S| {}  ratio {}", r.m, r.lhs_abs, r.violation_ratio);
        }
    } else {
        std::io::stdout().write_all(&bytes)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct FitOutput {
    #[serde(flatten)]
    fit: FitReport,
    reference: Option<ReferenceExponents>,
}

pub fn fit(opts: &Options) -> Result<()> {
    let path = require(&opts.input, "input")?;
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)?;
    let series = parse_residual_csv(&text).map_err(Failure::usage)?;
    let fit = fit_exponent(&series, opts.floor.unwrap_or(DEFAULT_FLOOR))
        .map_err(|e| Failure::usage(e.into()))?;
    let reference = if opts.field.is_some() || opts.poly.is_some() {
        let n = resolve_field(opts)?.degree() as u32;
        Some(reference_exponents(n)?)
    } else {
        None
    };
    emit(opts, &to_json(&FitOutput { fit, reference })?)
}

/// Reads `(x, residual)` pairs. With a header, the columns named `x` and
/// `residual` (or `residual_loglog`) are used; without one, the first two.
fn parse_residual_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
    let first = lines.peek().ok_or_else(|| anyhow!("empty residual file"))?;
    let header: Vec<&str> = first.split(',').map(str::trim).collect();
    let (xi, ri) = if header[0].parse::<f64>().is_ok() {
        (0, 1)
    } else {
        let find = |name: &str| header.iter().position(|h| *h == name);
        let xi = find("x").ok_or_else(|| anyhow!("no `x` column"))?;
        let ri = find("residual")
            .or_else(|| find("residual_loglog"))
            .ok_or_else(|| anyhow!("no `residual` column"))?;
        lines.next();
        (xi, ri)
    };
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<&str> = line.split(',').map(str::trim).collect();
            let cell = |j: usize| -> Result<f64> {
                cells
                    .get(j)
                    .ok_or_else(|| anyhow!("row {}: missing column {j}", i + 1))?
                    .parse()
                    .with_context(|| format!("row {}", i + 1))
            };
            Ok((cell(xi)?, cell(ri)?))
        })
        .collect()
}

#[derive(Serialize)]
struct RandomSummary {
    sequences: usize,
    seed: u64,
    max_residual: f64,
    failures: usize,
}

#[derive(Serialize)]
struct CheckReport {
    field: String,
    x_max: usize,
    reference: String,
    partial_summation: Vec<IdentityCheck>,
    e1_identity: Vec<IdentityCheck>,
    random_sequences: RandomSummary,
    passed: bool,
}

pub fn check(opts: &Options) -> Result<()> {
    let table = read_table(require(&opts.table, "table")?).map_err(|e| {
        match e.downcast_ref::<rklab::ideal_sieve::TableFormatError>() {
            Some(rklab::ideal_sieve::TableFormatError::Empty) => Failure::usage(e),
            _ => e,
        }
    })?;
    let seed = opts.seed();
    let len = table.x_max() as f64;
    let e = std::f64::consts::E;
    let grid: Vec<f64> = match &opts.grid {
        Some(g) => g.parse::<GridSpec>().map_err(Failure::usage)?.points(),
        None => CHECK_GRID.iter().copied().filter(|&x| x <= len * e).collect(),
    };
    if grid.is_empty() || grid.iter().all(|&x| x < e) {
        return Err(Failure::usage(anyhow!(
            "table of length {} is too short for the identity grid",
            table.x_max()
        )));
    }

    // A fresh sieve of a catalog field supplies the right-hand side, so a
    // corrupted table entry shows up as a residual.
    let top = grid.iter().fold(0.0f64, |a, &b| a.max(b));
    let reference_len = ((top / e).ceil() as u64 + 1).min(table.x_max() as u64);
    let (reference, reference_name) = match catalog_field(table.field_label()) {
        Ok(field) => (Some(sieve_rk(&field, reference_len)?), "resieve"),
        Err(_) => (None, "table"),
    };
    let mut partial = Vec::with_capacity(grid.len());
    for &x in &grid {
        let c = match &reference {
            Some(r) => check_partial_summation_identity_between(&table, r, x, IDENTITY_TOL)?,
            None => check_partial_summation_identity_between(&table, &table, x, IDENTITY_TOL)?,
        };
        print_check("partial_summation", x, &c);
        partial.push(c);
    }

    let mut e1 = Vec::with_capacity(E1_CHECK_POINTS.len());
    for &x in &E1_CHECK_POINTS {
        let c = check_e1_identity(x)?;
        print_check("e1_identity", x, &c);
        e1.push(c);
    }

    let random = random_sequence_checks(seed)?;
    println!(
        "{} random_sequences n={} seed={} max_residual={:e}",
        if random.failures == 0 { "PASS" } else { "FAIL" },
        random.sequences,
        seed,
        random.max_residual
    );

    let passed = partial.iter().chain(&e1).all(|c| c.passed) && random.failures == 0;
    let report = CheckReport {
        field: table.field_label().to_string(),
        x_max: table.x_max(),
        reference: reference_name.to_string(),
        partial_summation: partial,
        e1_identity: e1,
        random_sequences: random,
        passed,
    };
    if let Some(out) = &opts.out {
        fs::write(out, to_json(&report)?).with_context(|| format!("writing {}", out.display()))?;
    }
    if passed {
        println!("all checks passed");
        Ok(())
    } else {
        Err(Failure::check("identity check failed"))
    }
}

fn print_check(name: &str, x: f64, c: &IdentityCheck) {
    println!(
        "{} {name} x={x} residual={:e} tol={:e}",
        if c.passed { "PASS" } else { "FAIL" },
        c.residual,
        c.tolerance
    );
}

struct RandomSequence(Vec<f64>);

impl Coefficients for RandomSequence {
    fn len(&self) -> usize {
        self.0.len()
    }

    fn coeff(&self, m: usize) -> f64 {
        self.0[m - 1]
    }
}

fn random_sequence_checks(seed: u64) -> Result<RandomSummary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let e = std::f64::consts::E;
    let mut max_residual = 0.0f64;
    let mut failures = 0;
    for _ in 0..RANDOM_SEQUENCES {
        let len = rng.gen_range(50..=600);
        let seq = RandomSequence((0..len).map(|_| rng.gen_range(0.0..4.0)).collect());
        let x = rng.gen_range(e * e..len as f64 * e);
        let c = check_partial_summation_identity_between(&seq, &seq, x, IDENTITY_TOL)?;
        max_residual = max_residual.max(c.residual);
        failures += usize::from(!c.passed);
    }
    Ok(RandomSummary {
        sequences: RANDOM_SEQUENCES,
        seed,
        max_residual,
        failures,
    })
}
