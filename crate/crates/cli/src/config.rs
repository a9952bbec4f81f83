//! Command-line options merged with an optional `key=value` file.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use crate::Failure;

#[derive(Parser, Debug)]
#[command(name = "rklab", version, about = "Ideal-counting tables, weighted sums and bound checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Print the discriminant and splitting types of small primes
    Field,
    /// Tabulate r_K(m) for m <= xmax and write an RKT1 file
    Sieve,
    /// Weighted sums and residuals over a grid, as CSV
    Sums,
    /// Closed-form and fitted residue estimates
    Kappa,
    /// Evaluate the conjugate-phase counterexample against the claimed bound
    Counterexample,
    /// Fit an error-term exponent to a residual series
    Fit,
    /// Run the identity checks against a table
    Check,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Options {
    /// Key=value file; flags given on the command line take precedence
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Catalog label, or a name for --poly
    #[arg(long, global = true)]
    pub field: Option<String>,
    /// Monic defining polynomial as ascending coefficients, e.g. 1,0,1
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub poly: Option<String>,
    #[arg(long, global = true)]
    pub xmax: Option<u64>,
    /// Geometric grid start:ratio:count
    #[arg(long, global = true)]
    pub grid: Option<String>,
    #[arg(long, global = true)]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub pmax: Option<u64>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// RKT1 table to read
    #[arg(long, global = true)]
    pub table: Option<PathBuf>,
    /// Comma-separated list of M values
    #[arg(long = "m", global = true)]
    pub m_list: Option<String>,
    /// Extra CSV export of the table
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Residual series CSV with columns x and residual
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub floor: Option<f64>,
}

pub const DEFAULT_SEED: u64 = 1;

impl Options {
    /// Fills every option not given on the command line from the config file.
    pub fn merge_config_file(&mut self) -> Result<()> {
        let Some(path) = self.config.clone() else {
            return Ok(());
        };
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading config {}", path.display()))
            .map_err(Failure::usage)?;
        let mut entries = parse_key_values(&text).map_err(Failure::usage)?;
        fill(&mut self.field, &mut entries, "field")?;
        fill(&mut self.poly, &mut entries, "poly")?;
        fill(&mut self.xmax, &mut entries, "xmax")?;
        fill(&mut self.grid, &mut entries, "grid")?;
        fill(&mut self.eps, &mut entries, "eps")?;
        fill(&mut self.seed, &mut entries, "seed")?;
        fill(&mut self.out, &mut entries, "out")?;
        fill(&mut self.pmax, &mut entries, "pmax")?;
        fill(&mut self.threads, &mut entries, "threads")?;
        fill(&mut self.table, &mut entries, "table")?;
        fill(&mut self.m_list, &mut entries, "m")?;
        fill(&mut self.csv, &mut entries, "csv")?;
        fill(&mut self.input, &mut entries, "input")?;
        fill(&mut self.floor, &mut entries, "floor")?;
        if let Some(key) = entries.keys().next() {
            return Err(Failure::usage(anyhow!("unknown config key `{key}`")));
        }
        Ok(())
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

fn fill<T: FromStr>(
    slot: &mut Option<T>,
    entries: &mut BTreeMap<String, String>,
    key: &str,
) -> Result<()>
where
    T::Err: std::fmt::Display,
{
    if let Some(raw) = entries.remove(key) {
        if slot.is_none() {
            let value = raw
                .parse()
                .map_err(|e| Failure::usage(anyhow!("config key `{key}`: {e}")))?;
            *slot = Some(value);
        }
    }
    Ok(())
}

/// `key = value` lines; `#` starts a comment.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("config line {}: expected key=value", i + 1))?;
        let key = key.trim().to_string();
        if out.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(anyhow!("config line {}: duplicate key `{key}`", i + 1));
        }
    }
    Ok(out)
}

/// A geometric grid `start · ratio^j`, `j < count`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub ratio: f64,
    pub count: usize,
}

impl FromStr for GridSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, ratio, count] = parts[..] else {
            return Err(anyhow!("grid must be start:ratio:count, got `{s}`"));
        };
        let grid = GridSpec {
            start: start.trim().parse().context("grid start")?,
            ratio: ratio.trim().parse().context("grid ratio")?,
            count: count.trim().parse().context("grid count")?,
        };
        if !(grid.start > 0.0 && grid.start.is_finite()) {
            return Err(anyhow!("grid start must be positive"));
        }
        if !(grid.ratio > 1.0 && grid.ratio.is_finite()) && grid.count > 1 {
            return Err(anyhow!("grid ratio must exceed 1"));
        }
        if grid.count == 0 {
            return Err(anyhow!("grid count must be positive"));
        }
        Ok(grid)
    }
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        rklab::exponent_fit::geometric_grid(self.start, self.ratio, self.count)
    }
}

/// Comma-separated integer list.
pub fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            t.parse::<u64>()
                .with_context(|| format!("`{t}` is not a non-negative integer"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_values() {
        let m = parse_key_values("# run\nfield = Q(i)\nxmax=1000 # small\n\n").unwrap();
        assert_eq!(m["field"], "Q(i)");
        assert_eq!(m["xmax"], "1000");
        assert!(parse_key_values("field").is_err());
        assert!(parse_key_values("a=1\na=2").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = std::env::temp_dir().join(format!("rklab-config-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        fs::write(&path, "field=Q(i)\nxmax=500\nseed=9\n").unwrap();
        let mut opts = Options {
            config: Some(path.clone()),
            xmax: Some(10),
            ..Options::default()
        };
        opts.merge_config_file().unwrap();
        assert_eq!(opts.xmax, Some(10));
        assert_eq!(opts.field.as_deref(), Some("Q(i)"));
        assert_eq!(opts.seed(), 9);

        fs::write(&path, "colour=blue\n").unwrap();
        let mut opts = Options {
            config: Some(path),
            ..Options::default()
        };
        assert!(opts.merge_config_file().is_err());
        fs::remove_dir_all(dir).unwrap();
    }

    #[test]
    fn grid_spec() {
        let g: GridSpec = "1000:2:4".parse().unwrap();
        assert_eq!(g.points(), vec![1000.0, 2000.0, 4000.0, 8000.0]);
        let single: GridSpec = "50:1:1".parse().unwrap();
        assert_eq!(single.points(), vec![50.0]);
        for bad in ["1:2", "0:2:3", "1:0.5:3", "1:2:0", "a:2:3"] {
            assert!(bad.parse::<GridSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn u64_lists() {
        assert_eq!(parse_u64_list("1024, 4096").unwrap(), vec![1024, 4096]);
        assert!(parse_u64_list("1,-2").is_err());
    }
}
