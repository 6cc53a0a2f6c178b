//! Invariant and acceptance suite. Every check returns an outcome rather than
//! panicking so that a report can list all failures.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::config::{AdversaryChoice, AdversaryConfig, ExperimentConfig};
use super::csv::records_to_string;
use super::experiments::{
    fit_rate_exponent, maxnorm_experiment, rank_one_sign_matrices, run_experiment, table_d2_experiment, worst_regret,
};
use crate::costs::random_extreme_point;
use crate::error::Result;
use crate::game_value::{estimate_cp, mtype_ratio, random_tree, sandwich_report, value_lower_bound, ValueBudget};
use crate::geometry::{BallKind, BallSpec, Exponent, GeometryPair};
use crate::md;
use crate::regularizers::catalog::{d2_bound, pick_r, pick_r_for_d2, scaled_psi_for_lp_pair};
use crate::regularizers::{sup_over_ball, Regularizer};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &str, passed: bool, detail: String) -> Self {
        CheckOutcome { name: name.into(), passed, detail }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

pub type Check = fn() -> Result<CheckOutcome>;

pub fn all() -> Vec<(&'static str, Check)> {
    vec![
        ("md_bound", md_bound as Check),
        ("classical_equivalence", classical_equivalence),
        ("numerical_calculus", numerical_calculus),
        ("uniform_convexity", uniform_convexity),
        ("rate_exponents", rate_exponents),
        ("rate_exponent_clarkson", rate_exponent_clarkson),
        ("d2_table", d2_table),
        ("value_sandwich", value_sandwich),
        ("hilbert_mtype", hilbert_mtype),
        ("interpolation_sum", interpolation_sum),
        ("interpolation_inf_conv", interpolation_inf_conv),
        ("maxnorm", maxnorm),
        ("determinism", determinism),
        ("mtype_sanity", mtype_sanity),
    ]
}

/// Runs every check, turning errors into failures.
pub fn run_all() -> Vec<CheckOutcome> {
    all()
        .into_iter()
        .map(|(name, f)| f().unwrap_or_else(|e| CheckOutcome::new(name, false, format!("error: {e}"))))
        .collect()
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub pair: GeometryPair,
    pub reg: Regularizer,
}

/// Certified (W, X, Ψ) pairings used throughout the suite.
pub fn catalog() -> Result<Vec<CatalogEntry>> {
    let mut out = Vec::new();
    let mut push = |name, pair: GeometryPair, reg: Regularizer| -> Result<()> {
        let reg = reg.bind(&pair.w_ball)?;
        out.push(CatalogEntry { name, pair, reg });
        Ok(())
    };
    push("l2/l2 euclidean", GeometryPair::new(BallSpec::l2(4), BallSpec::l2(4))?, Regularizer::euclidean(4))?;
    push("simplex/linf entropy", GeometryPair::new(BallSpec::simplex(4), BallSpec::linf(4))?, Regularizer::entropy(4))?;
    let lp = |p1: f64, p2: f64, d: usize, r: f64| -> Result<(GeometryPair, Regularizer)> {
        Ok((GeometryPair::new(BallSpec::lp(p1, d)?, BallSpec::lp(p2, d)?)?, scaled_psi_for_lp_pair(p1, p2, d, r)?))
    };
    let inf = f64::INFINITY;
    let (p, r) = lp(1.0, inf, 16, pick_r_for_d2(1.0, inf, 16)?)?;
    push("l1/linf psi_r", p, r)?;
    let (p, r) = lp(1.5, 1.5, 8, pick_r(1.5, 1.5, 8, 10_000)?)?;
    push("l1.5/l1.5 scaled psi", p, r)?;
    let (p, r) = lp(4.0, 2.0, 8, pick_r(4.0, 2.0, 8, 10_000)?)?;
    push("l4/l2 scaled psi", p, r)?;
    let (p, r) = lp(2.0, 1.0, 8, pick_r(2.0, 1.0, 8, 10_000)?)?;
    push("l2/l1 scaled psi", p, r)?;
    let (p, r) = lp(3.0, 1.5, 4, 3.0)?;
    push("l3/l1.5 clarkson", p, r)?;
    let two = Exponent::Finite(2.0);
    push(
        "group(2,1)/linf",
        GeometryPair::new(BallSpec::group(two, Exponent::Finite(1.0), 2, 4), BallSpec::linf(8))?,
        Regularizer::group_for_linf(2.0, 2, 4)?,
    )?;
    let verts = rank_one_sign_matrices(2, 2);
    let pair = GeometryPair::new(BallSpec::vertex_hull(verts.clone())?, BallSpec::l1(4))?;
    let reg = Regularizer::vertex_hull_squared(verts, pair.x_ball.clone())?;
    push("maxnorm 2x2 vertex hull", pair, reg)?;
    Ok(out)
}

fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// A point of `W`: a random convex mix of two shrunken support points, or a
/// random interior point of the simplex.
pub fn sample_in(ball: &BallSpec, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d = ball.dim();
    if let BallKind::Simplex { .. } = ball.kind {
        let e: Vec<f64> = (0..d).map(|_| -rng.gen_range(1e-3f64..1.0).ln()).collect();
        let s: f64 = e.iter().sum();
        return Ok(e.into_iter().map(|x| ball.radius * x / s).collect());
    }
    let a = ball.support_point(&gaussian(rng, d))?;
    let b = ball.support_point(&gaussian(rng, d))?;
    let (sa, sb, lam) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
    Ok(a.iter().zip(&b).map(|(x, y)| lam * sa * x + (1.0 - lam) * sb * y).collect())
}

const MD_NS: [usize; 3] = [100, 1_000, 10_000];

/// Regret within `2(sup Ψ/n)^{1/q}` for every catalog pairing, adversary and horizon.
pub fn md_bound() -> Result<CheckOutcome> {
    let suite = AdversaryConfig::default();
    let mut worst_slack = f64::INFINITY;
    let mut failures = Vec::new();
    let cat = catalog()?;
    for e in &cat {
        for n in MD_NS {
            let w = worst_regret(&e.reg, &e.pair, n, &suite, 0, 1.0)?;
            let closed = 2.0 * (e.reg.sup()? / n as f64).powf(1.0 / e.reg.q_exponent);
            let ok = w.contract_held && w.regret <= closed + 1e-6;
            worst_slack = worst_slack.min(closed - w.regret);
            if !ok {
                failures.push(format!("{} n={n}: {:.6} > {:.6}", e.name, w.regret, closed));
            }
        }
    }
    let detail = if failures.is_empty() {
        format!("{} pairings x {:?}, min slack {:.3e}", cat.len(), MD_NS, worst_slack)
    } else {
        failures.join("; ")
    };
    Ok(CheckOutcome::new("md_bound", failures.is_empty(), detail))
}

/// MD reproduces projected gradient descent and multiplicative weights.
pub fn classical_equivalence() -> Result<CheckOutcome> {
    let n = 1000;
    let d = 5;
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    let pair = GeometryPair::new(BallSpec::l2(d), BallSpec::l2(d))?;
    let gs: Vec<Vec<f64>> = (0..n).map(|_| random_extreme_point(&pair.x_ball, &mut rng)).collect::<Result<_>>()?;
    let mut st = md::init(&Regularizer::euclidean(d), &pair, n)?;
    let eta = st.eta;
    let mut w = vec![0.0; d];
    let mut gd_err: f64 = 0.0;
    for g in &gs {
        st.advance(g)?;
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi -= eta * gi;
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1.0 {
            w.iter_mut().for_each(|x| *x /= norm);
        }
        gd_err = st.w.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(gd_err, f64::max);
    }

    let pair = GeometryPair::new(BallSpec::simplex(d), BallSpec::linf(d))?;
    let gs: Vec<Vec<f64>> = (0..n).map(|_| random_extreme_point(&pair.x_ball, &mut rng)).collect::<Result<_>>()?;
    let mut st = md::init(&Regularizer::entropy(d), &pair, n)?;
    let eta = st.eta;
    let mut w = vec![1.0 / d as f64; d];
    let mut mw_err: f64 = 0.0;
    for g in &gs {
        st.advance(g)?;
        for (wi, gi) in w.iter_mut().zip(g) {
            *wi *= (-eta * gi).exp();
        }
        let s: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= s);
        mw_err = st.w.iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(mw_err, f64::max);
    }
    let ok = gd_err <= 1e-10 && mw_err <= 1e-10;
    Ok(CheckOutcome::new(
        "classical_equivalence",
        ok,
        format!("max iterate gap: gradient descent {gd_err:.2e}, multiplicative weights {mw_err:.2e}"),
    ))
}

fn calculus_kinds() -> Result<Vec<(&'static str, Regularizer)>> {
    let verts = rank_one_sign_matrices(2, 2);
    Ok(vec![
        ("euclidean", Regularizer::euclidean(4)),
        ("psi_r 1.5", Regularizer::psi_r(1.5, 4)?),
        ("psi_r 3", Regularizer::psi_r(3.0, 4)?),
        ("scaled psi", scaled_psi_for_lp_pair(4.0, 2.0, 8, 1.7)?),
        ("entropy", Regularizer::entropy(4)),
        ("group", Regularizer::group_for_linf(2.0, 2, 4)?),
        ("vertex hull", Regularizer::vertex_hull_squared(verts, BallSpec::l1(4))?),
        ("schatten", Regularizer::schatten_psi_r(1.5, 2, 3)?),
    ])
}

/// Finite-difference gradients and conjugate round trips for every kind.
pub fn numerical_calculus() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_fd: f64 = 0.0;
    let mut worst_inv: f64 = 0.0;
    let mut worst_kind = ("", "");
    for (name, reg) in calculus_kinds()? {
        let d = reg.dim;
        for _ in 0..1000 {
            let w: Vec<f64> = if name == "entropy" {
                sample_in(&BallSpec::simplex(d), &mut rng)?
            } else {
                gaussian(&mut rng, d).into_iter().map(|x| 0.5 * x).collect()
            };
            let g = reg.grad(&w)?;
            let mut fd = vec![0.0; d];
            for i in 0..d {
                let h = 1e-6 * w[i].abs().max(1e-2);
                let (mut a, mut b) = (w.clone(), w.clone());
                a[i] += h;
                b[i] -= h;
                fd[i] = (reg.eval(&a)? - reg.eval(&b)?) / (2.0 * h);
            }
            let diff = g.iter().zip(&fd).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
            let scale = 1.0 + fd.iter().map(|x| x * x).sum::<f64>().sqrt();
            if diff / scale > worst_fd {
                worst_fd = diff / scale;
                worst_kind.0 = name;
            }
            let back = reg.conj_grad(&g)?;
            let inv = back.iter().zip(&w).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            if inv > worst_inv {
                worst_inv = inv;
                worst_kind.1 = name;
            }
        }
    }
    let ok = worst_fd <= 1e-5 && worst_inv <= 1e-6;
    Ok(CheckOutcome::new(
        "numerical_calculus",
        ok,
        format!(
            "worst relative FD error {worst_fd:.2e} ({}), worst inversion error {worst_inv:.2e} ({})",
            worst_kind.0, worst_kind.1
        ),
    ))
}

/// The uniform convexity inequality and the Bregman lower bound on sampled
/// points of `W`, measured in each regularizer's convexity norm.
pub fn uniform_convexity() -> Result<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst_def = f64::NEG_INFINITY;
    let mut worst_breg = f64::NEG_INFINITY;
    let mut offenders = Vec::new();
    for e in catalog()? {
        let q = e.reg.q_exponent;
        let (mut def_v, mut breg_v) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for _ in 0..10_000 {
            let a = sample_in(&e.pair.w_ball, &mut rng)?;
            let b = sample_in(&e.pair.w_ball, &mut rng)?;
            let al: f64 = rng.gen();
            let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| al * x + (1.0 - al) * y).collect();
            let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
            let nq = e.reg.convexity_norm(&diff)?.powf(q) / q;
            let (fa, fb, fm) = (e.reg.eval(&a)?, e.reg.eval(&b)?, e.reg.eval(&mid)?);
            def_v = def_v.max(fm - (al * fa + (1.0 - al) * fb - al * (1.0 - al) * nq));
            breg_v = breg_v.max(nq - e.reg.bregman(&a, &b)?);
        }
        if def_v > 1e-9 || breg_v > 1e-9 {
            offenders.push(format!("{} ({def_v:.2e}, {breg_v:.2e})", e.name));
        }
        worst_def = worst_def.max(def_v);
        worst_breg = worst_breg.max(breg_v);
    }
    let ok = offenders.is_empty();
    let detail = if ok {
        format!("max violation: definition {worst_def:.2e}, Bregman {worst_breg:.2e}")
    } else {
        offenders.join("; ")
    };
    Ok(CheckOutcome::new("uniform_convexity", ok, detail))
}

fn rate_slopes(name: &str, cases: &[(f64, f64)]) -> Result<CheckOutcome> {
    let ns: Vec<usize> = (7..=14).map(|k| 1usize << k).collect();
    let d = 4;
    let suite = AdversaryConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for &(p1, r) in cases {
        let p2 = Exponent::new(p1)?.conjugate().as_f64();
        let pair = GeometryPair::new(BallSpec::lp(p1, d)?, BallSpec::lp(p2, d)?)?;
        let reg = scaled_psi_for_lp_pair(p1, p2, d, r)?.bind(&pair.w_ball)?;
        let pts: Vec<(f64, f64)> = ns
            .iter()
            .map(|&n| Ok((n as f64, worst_regret(&reg, &pair, n, &suite, 0, 1.0)?.regret)))
            .collect::<Result<_>>()?;
        let slope = fit_rate_exponent(&pts)?;
        let target = -1.0 / r.max(2.0);
        ok &= (slope - target).abs() <= 0.1;
        parts.push(format!("p1={p1}: {slope:.3} (target {target:.3})"));
    }
    Ok(CheckOutcome::new(name, ok, parts.join(", ")))
}

/// Fitted slope of worst regret over `n = 2⁷..2¹⁴` for dual ℓp pairs with `p₁ ≤ 2`.
pub fn rate_exponents() -> Result<CheckOutcome> {
    rate_slopes("rate_exponents", &[(1.5, 1.5), (2.0, 2.0)])
}

/// The same fit for the `p₁ = 3` dual pair with `ψ_3`, where the target is `−1/3`.
pub fn rate_exponent_clarkson() -> Result<CheckOutcome> {
    rate_slopes("rate_exponent_clarkson", &[(3.0, 3.0)])
}

/// Representative `(p₁, p₂)` for each table row.
pub const TABLE_REPRESENTATIVES: [(f64, f64); 6] = [(1.5, 1.5), (1.5, 2.5), (2.0, 4.0), (4.0, 1.5), (4.0, 2.0), (1.0, 1.0)];
pub const TABLE_DIMS: [usize; 5] = [4, 16, 64, 256, 1024];

pub fn d2_table() -> Result<CheckOutcome> {
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for (p1, p2) in TABLE_REPRESENTATIVES {
        for rec in table_d2_experiment(p1, p2, &TABLE_DIMS, 0)? {
            lo = lo.min(rec.ratio);
            hi = hi.max(rec.ratio);
        }
    }
    let ok = lo >= 1.0 / 16.0 && hi <= 16.0;
    Ok(CheckOutcome::new("d2_table", ok, format!("ratios in [{lo:.3}, {hi:.3}], required [0.0625, 16]")))
}

pub fn value_sandwich() -> Result<CheckOutcome> {
    let ns = [1, 2, 4, 8];
    let budget = ValueBudget::default();
    let mut ok = true;
    let mut parts = Vec::new();
    let one = GeometryPair::new(BallSpec::linf(1), BallSpec::linf(1))?;
    let two = GeometryPair::new(BallSpec::l1(2), BallSpec::linf(2))?;
    let two_reg = scaled_psi_for_lp_pair(1.0, f64::INFINITY, 2, pick_r_for_d2(1.0, f64::INFINITY, 2)?)?;
    for (label, pair, reg) in [("d=1", &one, Regularizer::euclidean(1)), ("d=2", &two, two_reg)] {
        let rows = sandwich_report(pair, &reg, &ns, budget)?;
        for r in &rows {
            let pass = r.lower <= 2.0 * r.upper_md + 1e-6;
            ok &= pass;
            if !pass {
                parts.push(format!("{label} n={}: lower {:.4} > 2x{:.4}", r.n, r.lower, r.upper_md));
            }
        }
        let max_gap = rows.iter().map(|r| r.lower / (2.0 * r.upper_md)).fold(0.0, f64::max);
        parts.push(format!("{label} max lower/(2 md) {max_gap:.3}"));
    }
    let v2 = value_lower_bound(&one, 2, budget)?;
    let v4 = value_lower_bound(&one, 4, budget)?;
    let exact = v2.exhaustive && v4.exhaustive && v2.value == 0.5 && v4.value == 0.375;
    ok &= exact;
    parts.push(format!("1-D values {} and {}", v2.value, v4.value));
    Ok(CheckOutcome::new("value_sandwich", ok, parts.join(", ")))
}

pub fn hilbert_mtype() -> Result<CheckOutcome> {
    let pair = GeometryPair::new(BallSpec::l2(3), BallSpec::l2(3))?;
    let c = estimate_cp(&pair, 2.0, 4, 32, 3, 0)?.value;
    Ok(CheckOutcome::new("hilbert_mtype", (c - 1.0).abs() <= 1e-9, format!("C_2 estimate {c:.12}")))
}

struct InterpHats {
    l1: f64,
    l2: f64,
    sum_norm: f64,
    inf_conv: f64,
}

/// `d2_hat` for the elastic-net instance (`ℓ1`, `ℓ2` with `X = B_∞`,
/// `d = 32`): each component ball with its best `ψ̃_r`, and both
/// interpolated balls with the better of the two component regularizers.
fn interp_hats() -> Result<InterpHats> {
    let d = 32;
    let inf = f64::INFINITY;
    let comp = |p1: f64| -> Result<(f64, Regularizer)> {
        let r = pick_r_for_d2(p1, inf, d)?;
        let reg = scaled_psi_for_lp_pair(p1, inf, d, r)?;
        let v = sup_over_ball(&reg, &BallSpec::lp(p1, d)?)?.value.sqrt();
        debug_assert!((v - d2_bound(p1, inf, d, r)?).abs() < 1e-9 * v.max(1.0));
        Ok((v, reg))
    };
    let (l1, reg1) = comp(1.0)?;
    let (l2, reg2) = comp(2.0)?;
    let hat = |w: &BallSpec| -> Result<f64> {
        let a = sup_over_ball(&reg1, w)?.value.sqrt();
        let b = sup_over_ball(&reg2, w)?.value.sqrt();
        Ok(a.min(b))
    };
    let sum_norm = hat(&BallSpec::interp1(BallSpec::l1(d), BallSpec::l2(d))?)?;
    let inf_conv = hat(&BallSpec::interp2(BallSpec::l1(d), BallSpec::l2(d))?)?;
    Ok(InterpHats { l1, l2, sum_norm, inf_conv })
}

/// Sum-norm ball: `d2_hat ≤ 2·min` of the components.
pub fn interpolation_sum() -> Result<CheckOutcome> {
    let h = interp_hats()?;
    let cap = 2.0 * h.l1.min(h.l2);
    Ok(CheckOutcome::new(
        "interpolation_sum",
        h.sum_norm <= cap + 1e-6,
        format!("d2_hat {:.4} vs 2*min {:.4} (components l1 {:.4}, l2 {:.4})", h.sum_norm, cap, h.l1, h.l2),
    ))
}

/// Infimal-convolution ball: `d2_hat ≤ ½·max` of the components.
pub fn interpolation_inf_conv() -> Result<CheckOutcome> {
    let h = interp_hats()?;
    let cap = 0.5 * h.l1.max(h.l2);
    Ok(CheckOutcome::new(
        "interpolation_inf_conv",
        h.inf_conv <= cap + 1e-6,
        format!("d2_hat {:.4} vs max/2 {:.4} (components l1 {:.4}, l2 {:.4})", h.inf_conv, cap, h.l1, h.l2),
    ))
}

pub const MAXNORM_SIZES: [usize; 3] = [2, 3, 4];
pub const MAXNORM_NS: [usize; 5] = [256, 512, 1024, 2048, 4096];

pub fn maxnorm() -> Result<CheckOutcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for m in MAXNORM_SIZES {
        let mut pts = Vec::new();
        let mut line = String::new();
        for n in MAXNORM_NS {
            let rec = maxnorm_experiment(m, m, n, 0)?;
            let within = rec.measured_regret <= rec.bound + 1e-6 && rec.sup <= 8.0 * rec.log_k;
            ok &= within;
            if !within {
                parts.push(format!("{m}x{m} n={n}: regret {:.4}, bound {:.4}, sup {:.3}", rec.measured_regret, rec.bound, rec.sup));
            }
            line = format!("{m}x{m}: sup/logK {:.3}", rec.sup / rec.log_k);
            pts.push((n as f64, rec.measured_regret));
        }
        let slope = fit_rate_exponent(&pts)?;
        ok &= (slope + 0.5).abs() <= 0.1;
        parts.push(format!("{line}, slope {slope:.3}"));
    }
    Ok(CheckOutcome::new("maxnorm", ok, parts.join("; ")))
}

pub fn determinism() -> Result<CheckOutcome> {
    let text = r#"
[geometry]
w = "l1"
x = "linf"
[regularizer]
type = "scaled_psi"
[adversary]
kind = "suite"
seeds = 3
[run]
n_list = [64, 128, 256, 512]
dims = [3, 6]
seed = 17
"#;
    let cfg = ExperimentConfig::from_toml(text)?;
    let a = records_to_string(&run_experiment(&cfg)?)?;
    let b = records_to_string(&run_experiment(&cfg)?)?;
    let mut sand = cfg.clone();
    sand.run.kind = super::config::RunKind::Sandwich;
    sand.run.n_list = vec![1, 2, 3];
    sand.run.dims = vec![2];
    sand.adversary.kind = AdversaryChoice::SignGreedy;
    let c = records_to_string(&run_experiment(&sand)?)?;
    let e = records_to_string(&run_experiment(&sand)?)?;
    let t1 = format!("{:?}", table_d2_experiment(1.5, 2.5, &[4, 16], 32)?);
    let t2 = format!("{:?}", table_d2_experiment(1.5, 2.5, &[4, 16], 32)?);
    let ok = a == b && c == e && t1 == t2;
    Ok(CheckOutcome::new("determinism", ok, format!("{} + {} CSV bytes compared", a.len(), c.len())))
}

/// Witnessed martingale-type ratios at `p′ < p` stay below `1104·D̂/(p−p′)²`.
pub fn mtype_sanity() -> Result<CheckOutcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for e in catalog()?.into_iter().filter(|e| e.reg.q_exponent == 2.0) {
        let dhat = e.reg.d_p_upper(2.0)?;
        let mut worst: f64 = 0.0;
        for seed in 0..4 {
            let tree = random_tree(&e.pair, 4, seed)?;
            for pp in [1.25, 1.5, 1.75] {
                let ratio = mtype_ratio(&tree, &e.pair, pp)?;
                let cap = 1104.0 * dhat / (2.0 - pp).powi(2);
                ok &= ratio <= cap;
                worst = worst.max(ratio / cap);
            }
        }
        parts.push(format!("{} {worst:.1e}", e.name));
    }
    Ok(CheckOutcome::new("mtype_sanity", ok, format!("max ratio/cap: {}", parts.join(", "))))
}
