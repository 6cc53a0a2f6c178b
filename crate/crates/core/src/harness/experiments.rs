use std::fs::File;
use std::io::BufWriter;

use rayon::prelude::*;

use super::config::{AdversaryChoice, AdversaryConfig, ExperimentConfig, RunKind};
use super::csv::{write_records, ResultRecord};
use crate::costs::{Adversary, AdversaryKind};
use crate::error::{Error, Result};
use crate::game_value::{sandwich_report, ValueBudget};
use crate::geometry::{BallSpec, Exponent, GeometryPair};
use crate::md;
use crate::regularizers::catalog::{pick_r_for_d2, scaled_psi_for_lp_pair};
use crate::regularizers::Regularizer;

/// Least-squares slope of `log regret` against `log n`.
pub fn fit_rate_exponent(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 4 {
        return Err(Error::InvalidParameter(format!("need at least 4 points, got {}", points.len())));
    }
    if let Some(&(n, v)) = points.iter().find(|&&(n, v)| !(n > 0.0) || !(v > 0.0)) {
        return Err(Error::InvalidParameter(format!("points must be positive, got ({n}, {v})")));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all n are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorstRegret {
    pub regret: f64,
    pub bound: f64,
    pub contract_held: bool,
}

fn adversaries(pair: &GeometryPair, cfg: &AdversaryConfig, seed: u64) -> Vec<Adversary> {
    let x = &pair.x_ball;
    let mut out = Vec::new();
    if cfg.kind != AdversaryChoice::RandomVertex {
        out.push(Adversary::new(AdversaryKind::SignGreedy, x.clone(), cfg.loss));
    }
    if cfg.kind != AdversaryChoice::SignGreedy {
        for s in 0..cfg.seeds as u64 {
            out.push(Adversary::new(AdversaryKind::RandomVertex { seed: seed.wrapping_add(s) }, x.clone(), cfg.loss));
        }
    }
    out
}

/// Largest final regret over the adversary suite, a lower estimate of the
/// worst case.
pub fn worst_regret(
    reg: &Regularizer,
    pair: &GeometryPair,
    n: usize,
    adv: &AdversaryConfig,
    seed: u64,
    b: f64,
) -> Result<WorstRegret> {
    let traces: Vec<md::RegretTrace> = adversaries(pair, adv, seed)
        .into_par_iter()
        .map(|mut a| md::run_with_budget(reg, pair, &mut a, n, b))
        .collect::<Result<_>>()?;
    let regret = traces.iter().map(|t| t.final_regret()).fold(f64::NEG_INFINITY, f64::max);
    Ok(WorstRegret {
        regret,
        bound: traces[0].final_bound(),
        contract_held: traces.iter().all(|t| t.contract_held),
    })
}

/// Suite of sign-greedy plus eight random-vertex streams.
pub fn default_suite() -> AdversaryConfig {
    AdversaryConfig::default()
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    cfg.validate()?;
    let digest = cfg.digest();
    let mut records = Vec::new();
    for d in cfg.dims()? {
        let pair = cfg.pair(d)?;
        let reg = cfg.regularizer(&pair)?;
        match cfg.run.kind {
            RunKind::Regret => {
                let mut rows = Vec::new();
                for &n in &cfg.run.n_list {
                    let w = worst_regret(&reg, &pair, n, &cfg.adversary, cfg.run.seed, cfg.run.b)?;
                    rows.push(ResultRecord {
                        config_digest: digest.clone(),
                        n,
                        d,
                        measured_regret: Some(w.regret),
                        bound: Some(w.bound),
                        ..Default::default()
                    });
                }
                let pts: Vec<(f64, f64)> =
                    rows.iter().map(|r| (r.n as f64, r.measured_regret.unwrap_or(0.0))).collect();
                let slope = fit_rate_exponent(&pts).ok();
                for r in &mut rows {
                    r.fitted_exponent = slope;
                }
                records.extend(rows);
            }
            RunKind::Sandwich => {
                let budget = ValueBudget { seed: cfg.run.seed, ..Default::default() };
                for row in sandwich_report(&pair, &reg, &cfg.run.n_list, budget)? {
                    records.push(ResultRecord {
                        config_digest: digest.clone(),
                        n: row.n,
                        d,
                        measured_regret: Some(row.upper_md),
                        bound: Some(row.upper_dp),
                        value_lower: Some(row.lower),
                        c_p_hat: Some(row.c_p_hat).filter(|c| c.is_finite()),
                        ..Default::default()
                    });
                }
            }
        }
    }
    if let Some(path) = &cfg.output.path {
        write_records(&records, BufWriter::new(File::create(path)?))?;
    }
    Ok(records)
}

/// Rows of the `D₂` table for `W = B_{p1}`, `X = B_{p2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableRow {
    /// `p₁ ≤ 2`, `q₂ > 2`: `1`.
    SmallP1LargeQ2,
    /// `p₁ ≤ q₂ ≤ 2`: `√(p₂−1)`.
    P1BelowQ2,
    /// `q₂ < p₁ ≤ 2`: `d^{1/q₂−1/p₁}√(p₂−1)`.
    Q2BelowP1,
    /// `p₁ > 2`, `q₂ > 2`: `d^{1/2−1/p₁}`.
    LargeBoth,
    /// `p₁ > 2`, `q₂ ≤ 2`: `d^{1/q₂−1/p₁}`.
    LargeP1SmallQ2,
    /// `q₂ = ∞`: `√log d`.
    LogD,
}

/// The table entry for `(p₁, p₂, d)`.
pub fn table_formula(p1: f64, p2: f64, d: usize) -> Result<(TableRow, f64)> {
    let e1 = Exponent::new(p1)?;
    let e2 = Exponent::new(p2)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be ≥ 1".into()));
    }
    let q2 = e2.conjugate();
    let (inv_p1, inv_q2) = (e1.recip(), q2.recip());
    let df = d as f64;
    let p1v = e1.as_f64();
    let q2v = q2.as_f64();
    let (row, v) = if q2.is_infinite() {
        (TableRow::LogD, df.ln().max(1.0).sqrt())
    } else if p1v <= 2.0 && q2v > 2.0 {
        (TableRow::SmallP1LargeQ2, 1.0)
    } else if p1v <= 2.0 && p1v <= q2v {
        (TableRow::P1BelowQ2, (e2.as_f64() - 1.0).sqrt())
    } else if p1v <= 2.0 {
        (TableRow::Q2BelowP1, df.powf(inv_q2 - inv_p1) * (e2.as_f64() - 1.0).sqrt())
    } else if q2v > 2.0 {
        (TableRow::LargeBoth, df.powf(0.5 - inv_p1))
    } else {
        (TableRow::LargeP1SmallQ2, df.powf(inv_q2 - inv_p1))
    };
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::Unsupported(format!("table entry undefined for p1={p1}, p2={p2}")));
    }
    Ok((row, v))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRecord {
    pub row: TableRow,
    pub d: usize,
    pub r: f64,
    pub d2_hat: f64,
    pub formula: f64,
    pub ratio: f64,
    pub measured_regret: f64,
    pub bound: f64,
}

/// For each `d`: picks `r ∈ (1, 2]` minimizing the `D₂` bound, builds `ψ̃_r`,
/// records `d2_hat = (sup_W ψ̃_r)^{1/2}`, its ratio to the table entry, and the
/// sign-greedy MD regret over `n` rounds.
pub fn table_d2_experiment(p1: f64, p2: f64, dims: &[usize], n: usize) -> Result<Vec<TableRecord>> {
    if dims.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("dims must be strictly ascending".into()));
    }
    dims.par_iter()
        .map(|&d| {
            let (row, formula) = table_formula(p1, p2, d)?;
            let r = pick_r_for_d2(p1, p2, d)?;
            let pair = GeometryPair::new(BallSpec::lp(p1, d)?, BallSpec::lp(p2, d)?)?;
            let reg = scaled_psi_for_lp_pair(p1, p2, d, r)?.bind(&pair.w_ball)?;
            let d2_hat = reg.d_p_upper(2.0)?;
            let (measured_regret, bound) = if n > 0 {
                let tr = md::run(&reg, &pair, &mut Adversary::sign_greedy(pair.x_ball.clone()), n)?;
                (tr.final_regret(), tr.final_bound())
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok(TableRecord { row, d, r, d2_hat, formula, ratio: d2_hat / formula, measured_regret, bound })
        })
        .collect()
}

/// Rank-one sign matrices `u vᵀ` with `u₁ = +1`, flattened row-major.
pub fn rank_one_sign_matrices(m: usize, n_cols: usize) -> Vec<Vec<f64>> {
    let sign = |mask: usize, i: usize| if mask >> i & 1 == 1 { -1.0 } else { 1.0 };
    let mut out = Vec::with_capacity(1 << (m + n_cols - 1));
    for um in 0..1usize << (m - 1) {
        for vm in 0..1usize << n_cols {
            let mut a = Vec::with_capacity(m * n_cols);
            for i in 0..m {
                // row 0 keeps u₁ = +1
                let ui = if i == 0 { 1.0 } else { sign(um, i - 1) };
                for j in 0..n_cols {
                    a.push(ui * sign(vm, j));
                }
            }
            out.push(a);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxnormRecord {
    pub k: usize,
    pub sup: f64,
    pub log_k: f64,
    pub n: usize,
    pub measured_regret: f64,
    pub bound: f64,
    /// Regret over `√((M+N)/n)`.
    pub rate_constant: f64,
}

/// Max-norm learner: `W` the hull of rank-one sign matrices, `X` the
/// entrywise ℓ1 ball, `Ψ` the squared `(W, q)` norm.
pub fn maxnorm_experiment(m: usize, n_cols: usize, n: usize, seed: u64) -> Result<MaxnormRecord> {
    if !(1..=6).contains(&m) || !(1..=6).contains(&n_cols) {
        return Err(Error::BudgetExceeded(format!("max-norm experiment needs 1 ≤ M, N ≤ 6, got {m}×{n_cols}")));
    }
    let verts = rank_one_sign_matrices(m, n_cols);
    let k = verts.len();
    let d = m * n_cols;
    let pair = GeometryPair::new(BallSpec::vertex_hull(verts.clone())?, BallSpec::l1(d))?;
    let reg = Regularizer::vertex_hull_squared(verts, pair.x_ball.clone())?.bind(&pair.w_ball)?;
    let suite = AdversaryConfig { kind: AdversaryChoice::Suite, seeds: 8, ..Default::default() };
    let w = worst_regret(&reg, &pair, n, &suite, seed, 1.0)?;
    Ok(MaxnormRecord {
        k,
        sup: reg.sup()?,
        log_k: (k as f64).ln(),
        n,
        measured_regret: w.regret,
        bound: w.bound,
        rate_constant: w.regret / (((m + n_cols) as f64) / n as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_fit_examples() {
        let ns = [1e2, 1e3, 1e4, 1e5];
        let pts: Vec<_> = ns.iter().map(|&n: &f64| (n, 3.0 * n.powf(-0.5))).collect();
        assert!((fit_rate_exponent(&pts).unwrap() + 0.5).abs() < 1e-9);
        let flat: Vec<_> = ns.iter().map(|&n| (n, 0.7)).collect();
        assert!(fit_rate_exponent(&flat).unwrap().abs() < 1e-12);
        let wavy: Vec<_> = ns.iter().map(|&n: &f64| (n, n.powf(-0.25) * (1.0 + 0.01 * n.ln().sin()))).collect();
        assert!((fit_rate_exponent(&wavy).unwrap() + 0.25).abs() < 0.02);
        assert!(fit_rate_exponent(&pts[..3]).is_err());
        assert!(fit_rate_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0), (4.0, 1.0)]).is_err());
    }

    #[test]
    fn table_rows() {
        assert_eq!(table_formula(1.5, 1.5, 16).unwrap().0, TableRow::SmallP1LargeQ2);
        assert_eq!(table_formula(2.0, 4.0, 16).unwrap().0, TableRow::Q2BelowP1);
        assert_eq!(table_formula(1.0, 1.0, 16).unwrap().0, TableRow::LogD);
        assert_eq!(table_formula(1.5, 2.5, 16).unwrap().0, TableRow::P1BelowQ2);
        assert_eq!(table_formula(2.0, 4.0 / 3.0, 16).unwrap().0, TableRow::SmallP1LargeQ2);
        assert_eq!(table_formula(4.0, 1.5, 16).unwrap().0, TableRow::LargeBoth);
        assert_eq!(table_formula(4.0, 2.0, 16).unwrap().0, TableRow::LargeP1SmallQ2);
        let (_, v) = table_formula(2.0, 4.0, 16).unwrap();
        assert!((v - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        assert!(table_formula(2.0, 4.0, 1).unwrap().1.is_finite());
    }

    #[test]
    fn table_ratio_in_range_small() {
        for rec in table_d2_experiment(2.0, 4.0, &[4, 16, 64], 0).unwrap() {
            assert!(rec.ratio >= 1.0 / 16.0 && rec.ratio <= 16.0, "{rec:?}");
        }
    }

    #[test]
    fn sign_matrices() {
        let v = rank_one_sign_matrices(2, 2);
        assert_eq!(v.len(), 8);
        assert!(v.iter().all(|a| a[0] == 1.0 || a[0] == -1.0));
        let one = rank_one_sign_matrices(1, 1);
        assert_eq!(one, vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn minimal_config_example() {
        let text = "[geometry]\nw = \"l2\"\nx = \"l2\"\n[regularizer]\ntype = \"euclidean\"\n\
                    [adversary]\nkind = \"sign_greedy\"\n[run]\nn_list = [256]\ndims = [2]\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        let recs = run_experiment(&cfg).unwrap();
        assert_eq!(recs.len(), 1);
        let r = recs[0].measured_regret.unwrap();
        assert!(r <= 2.0 * (0.5f64 / 256.0).sqrt() + 1e-6, "{r}");
    }
}
