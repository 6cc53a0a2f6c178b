use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mirrorgeo::game_value::{value_lower_bound, ValueBudget};
use mirrorgeo::geometry::{BallSpec, GeometryPair};
use mirrorgeo::harness::config::RunKind;
use mirrorgeo::harness::csv::{read_records, write_records};
use mirrorgeo::harness::{check, fit_rate_exponent, maxnorm_experiment, run_experiment, table_d2_experiment, ExperimentConfig};
use mirrorgeo::Error;

#[derive(Parser)]
#[command(name = "mirrorgeo", version, about = "Mirror descent experiments over non-dual geometries")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a TOML config.
    Run { config: PathBuf },
    /// Fit the log-log slope of worst regret against n from a result CSV.
    RateFit { csv: PathBuf },
    /// D₂ table rows for W = B_{p1}, X = B_{p2}.
    TableD2 {
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, value_delimiter = ',', default_value = "4,16,64,256,1024")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
    /// Lower bound on the game value from sign trees.
    ValueBound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value = "l2")]
        wball: String,
        #[arg(long, default_value = "l2")]
        xball: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Max-norm matrix learner.
    Maxnorm {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n_cols: usize,
        #[arg(long)]
        rounds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run the full invariant suite.
    Check,
}

enum Outcome {
    Ok,
    AssertionFailed(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionFailed(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(1)
        }
        Err(Error::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Cmd) -> mirrorgeo::Result<Outcome> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cmd {
        Cmd::Run { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let records = run_experiment(&cfg)?;
            if cfg.output.path.is_none() {
                write_records(&records, &mut out)?;
            }
            let bad: Vec<String> = records
                .iter()
                .filter(|r| match cfg.run.kind {
                    RunKind::Regret => matches!((r.measured_regret, r.bound), (Some(m), Some(b)) if m > b + 1e-6),
                    RunKind::Sandwich => {
                        matches!((r.value_lower, r.measured_regret), (Some(l), Some(m)) if l > 2.0 * m + 1e-6)
                    }
                })
                .map(|r| format!("d={} n={}", r.d, r.n))
                .collect();
            if bad.is_empty() {
                Ok(Outcome::Ok)
            } else {
                Ok(Outcome::AssertionFailed(bad.join(", ")))
            }
        }
        Cmd::RateFit { csv } => {
            let records = read_records(BufReader::new(File::open(&csv)?))?;
            let mut worst: BTreeMap<usize, f64> = BTreeMap::new();
            for r in records {
                if let Some(m) = r.measured_regret {
                    let e = worst.entry(r.n).or_insert(f64::NEG_INFINITY);
                    *e = e.max(m);
                }
            }
            let pts: Vec<(f64, f64)> = worst.into_iter().map(|(n, m)| (n as f64, m)).collect();
            writeln!(out, "{}", fit_rate_exponent(&pts)?)?;
            Ok(Outcome::Ok)
        }
        Cmd::TableD2 { p1, p2, dims, n } => {
            let recs = table_d2_experiment(p1, p2, &dims, n)?;
            writeln!(out, "row,d,r,d2_hat,formula,ratio,measured_regret,bound")?;
            for r in &recs {
                writeln!(
                    out,
                    "{:?},{},{},{},{},{},{},{}",
                    r.row, r.d, r.r, r.d2_hat, r.formula, r.ratio, r.measured_regret, r.bound
                )?;
            }
            let bad: Vec<String> = recs
                .iter()
                .filter(|r| !(r.ratio >= 1.0 / 16.0 && r.ratio <= 16.0))
                .map(|r| format!("d={} ratio {}", r.d, r.ratio))
                .collect();
            Ok(if bad.is_empty() { Outcome::Ok } else { Outcome::AssertionFailed(bad.join(", ")) })
        }
        Cmd::ValueBound { n, dim, wball, xball, seed } => {
            let pair = GeometryPair::new(
                BallSpec::parse_short(&wball, dim).map_err(|e| Error::Config(format!("--wball: {e}")))?,
                BallSpec::parse_short(&xball, dim).map_err(|e| Error::Config(format!("--xball: {e}")))?,
            )?;
            let v = value_lower_bound(&pair, n, ValueBudget { seed, ..Default::default() })?;
            writeln!(out, "value_lower={} exhaustive={}", v.value, v.exhaustive)?;
            Ok(Outcome::Ok)
        }
        Cmd::Maxnorm { m, n_cols, rounds, seed } => {
            let r = maxnorm_experiment(m, n_cols, rounds, seed)?;
            writeln!(out, "k,sup,log_k,n,measured_regret,bound,rate_constant")?;
            writeln!(out, "{},{},{},{},{},{},{}", r.k, r.sup, r.log_k, r.n, r.measured_regret, r.bound, r.rate_constant)?;
            Ok(if r.measured_regret <= r.bound + 1e-6 {
                Outcome::Ok
            } else {
                Outcome::AssertionFailed(format!("regret {} above bound {}", r.measured_regret, r.bound))
            })
        }
        Cmd::Check => {
            let mut failed = Vec::new();
            for (name, f) in check::all() {
                let res = f().unwrap_or_else(|e| check::CheckOutcome {
                    name: name.into(),
                    passed: false,
                    detail: format!("error: {e}"),
                });
                writeln!(out, "{res}")?;
                out.flush()?;
                if !res.passed {
                    failed.push(res.name);
                }
            }
            Ok(if failed.is_empty() { Outcome::Ok } else { Outcome::AssertionFailed(failed.join(", ")) })
        }
    }
}
