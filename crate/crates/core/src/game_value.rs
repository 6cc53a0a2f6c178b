//! Sign trees, the tree payoff `E‖(1/n)Σ εᵢ xᵢ(ε)‖_{W*}`, lower bounds on the
//! minimax value, martingale-type ratio estimates and the sandwich report.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costs::{random_extreme_point, Adversary, CostFunction};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{BallSpec, GeometryPair};
use crate::md;
use crate::regularizers::{d_p_upper, Regularizer};

/// Depth up to which payoffs are computed by enumerating all sign paths.
pub const EXACT_DEPTH: usize = 20;
/// Minimum number of sampled paths beyond [`EXACT_DEPTH`].
pub const MIN_MC_PATHS: usize = 100_000;

/// A complete binary tree of vectors. Level `i` (1-based) has `2^{i−1}`
/// nodes indexed by the sign prefix `ε_1..ε_{i−1}`, read as bits with
/// `−1 ↦ 1`, most significant first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignTree {
    pub depth: usize,
    pub dim: usize,
    /// Heap order: level `i`, prefix `k` sits at `2^{i−1} − 1 + k`.
    pub nodes: Vec<Vec<f64>>,
    /// Optional `x_0` added before the signed sum.
    pub root: Option<Vec<f64>>,
}

impl SignTree {
    pub fn new(depth: usize, dim: usize, nodes: Vec<Vec<f64>>, root: Option<Vec<f64>>) -> Result<Self> {
        if depth == 0 || depth > 40 {
            return Err(Error::InvalidParameter(format!("tree depth must lie in [1, 40], got {depth}")));
        }
        let want = (1usize << depth) - 1;
        if nodes.len() != want {
            return Err(Error::DimensionMismatch { expected: want, got: nodes.len() });
        }
        for v in nodes.iter().chain(root.iter()) {
            check_dim(dim, v.len())?;
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite("tree node"));
            }
        }
        Ok(SignTree { depth, dim, nodes, root })
    }

    /// Every node equal to `x`.
    pub fn constant(depth: usize, x: &[f64]) -> Result<Self> {
        Self::new(depth, x.len(), vec![x.to_vec(); (1usize << depth.min(40)) - 1], None)
    }

    pub fn index(level: usize, prefix: usize) -> usize {
        (1usize << (level - 1)) - 1 + prefix
    }

    pub fn node(&self, level: usize, prefix: usize) -> &[f64] {
        &self.nodes[Self::index(level, prefix)]
    }
}

fn check_tree(tree: &SignTree, pair: &GeometryPair) -> Result<()> {
    check_dim(pair.dim(), tree.dim)
}

/// Visits every node in depth-first order, handing the callback the level
/// and the running signed sum after that level.
fn walk(tree: &SignTree, mut visit: impl FnMut(usize, &[f64]) -> Result<()>) -> Result<()> {
    let d = tree.dim;
    let start = tree.root.clone().unwrap_or_else(|| vec![0.0; d]);
    visit(0, &start)?;
    // explicit stack of (level, prefix, partial sum)
    let mut stack = vec![(1usize, 0usize, start)];
    while let Some((level, prefix, sum)) = stack.pop() {
        let x = tree.node(level, prefix);
        for bit in [1usize, 0] {
            let e = if bit == 1 { -1.0 } else { 1.0 };
            let s: Vec<f64> = sum.iter().zip(x).map(|(a, b)| a + e * b).collect();
            visit(level, &s)?;
            if level < tree.depth {
                stack.push((level + 1, prefix * 2 + bit, s));
            }
        }
    }
    Ok(())
}

/// `E_ε ‖(1/n)(x_0 + Σ εᵢ xᵢ(ε))‖_{W*}` by full enumeration.
pub fn tree_payoff(tree: &SignTree, pair: &GeometryPair) -> Result<f64> {
    check_tree(tree, pair)?;
    if tree.depth > EXACT_DEPTH {
        return Err(Error::BudgetExceeded(format!(
            "exact payoff limited to depth {EXACT_DEPTH}; use tree_payoff_mc"
        )));
    }
    let n = tree.depth;
    let mut acc = 0.0;
    walk(tree, |level, s| {
        if level == n {
            acc += pair.w_dual(s)?;
        }
        Ok(())
    })?;
    Ok(acc / (1u64 << n) as f64 / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Sampled payoff with at least [`MIN_MC_PATHS`] paths.
pub fn tree_payoff_mc(tree: &SignTree, pair: &GeometryPair, paths: usize, seed: u64) -> Result<Estimate> {
    check_tree(tree, pair)?;
    let paths = paths.max(MIN_MC_PATHS);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = tree.depth;
    let (mut m, mut m2) = (0.0, 0.0);
    for _ in 0..paths {
        let mut s = tree.root.clone().unwrap_or_else(|| vec![0.0; tree.dim]);
        let mut prefix = 0usize;
        for level in 1..=n {
            let minus = rng.gen::<bool>();
            let e = if minus { -1.0 } else { 1.0 };
            for (a, b) in s.iter_mut().zip(tree.node(level, prefix)) {
                *a += e * b;
            }
            prefix = prefix * 2 + usize::from(minus);
        }
        let v = pair.w_dual(&s)? / n as f64;
        m += v;
        m2 += v * v;
    }
    let k = paths as f64;
    let mean = m / k;
    let var = (m2 / k - mean * mean).max(0.0);
    Ok(Estimate { mean, std_err: (var / k).sqrt() })
}

/// `E‖x_0 + Σ_{i≤m} εᵢ xᵢ‖^p_{W*}` for every `m = 0..=n`.
pub fn tree_moments(tree: &SignTree, pair: &GeometryPair, p: f64) -> Result<Vec<f64>> {
    check_tree(tree, pair)?;
    if tree.depth > EXACT_DEPTH {
        return Err(Error::BudgetExceeded(format!("moments limited to depth {EXACT_DEPTH}")));
    }
    let mut out = vec![0.0; tree.depth + 1];
    walk(tree, |level, s| {
        out[level] += pair.w_dual(s)?.powf(p) / (1u64 << level) as f64;
        Ok(())
    })?;
    Ok(out)
}

/// `sup_{m ≤ n} E‖x_0 + Σ_{i≤m} εᵢxᵢ‖^p` over `‖x_0‖^p + Σᵢ E‖xᵢ‖^p_X`, to the power `1/p`.
pub fn mtype_ratio(tree: &SignTree, pair: &GeometryPair, p: f64) -> Result<f64> {
    let num = tree_moments(tree, pair, p)?.into_iter().fold(0.0, f64::max);
    let mut den = match &tree.root {
        Some(r) => pair.x_ball.gauge(r)?.powf(p),
        None => 0.0,
    };
    for level in 1..=tree.depth {
        let width = 1usize << (level - 1);
        let mut s = 0.0;
        for k in 0..width {
            s += pair.x_ball.gauge(tree.node(level, k))?.powf(p);
        }
        den += s / width as f64;
    }
    if !(den > 0.0) {
        return Err(Error::InvalidParameter("tree has zero X-size".into()));
    }
    Ok((num / den).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueBudget {
    /// Exhaustive search when the number of trees is at most this.
    pub max_configs: f64,
    pub restarts: usize,
    pub rounds: usize,
    pub seed: u64,
}

impl Default for ValueBudget {
    fn default() -> Self {
        ValueBudget { max_configs: 1e6, restarts: 8, rounds: 3, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct ValueBound {
    pub value: f64,
    pub exhaustive: bool,
    pub tree: SignTree,
}

fn alphabet(x_ball: &BallSpec, with_zero: bool) -> Result<Vec<Vec<f64>>> {
    let mut pts = x_ball.extreme_points(64)?.points;
    if with_zero {
        pts.push(vec![0.0; x_ball.dim()]);
    }
    if pts.is_empty() {
        return Err(Error::Unsupported("X has no usable extreme points".into()));
    }
    Ok(pts)
}

/// Coordinate ascent over node labels drawn from `alpha`.
fn ascend(
    labels: &mut [usize],
    alpha: &[Vec<f64>],
    rounds: usize,
    build: &dyn Fn(&[usize]) -> Result<SignTree>,
    score: &dyn Fn(&SignTree) -> Result<f64>,
) -> Result<f64> {
    let mut best = score(&build(labels)?)?;
    for _ in 0..rounds {
        let mut improved = false;
        for i in 0..labels.len() {
            let mut pick = labels[i];
            for a in 0..alpha.len() {
                if a == pick {
                    continue;
                }
                labels[i] = a;
                let v = score(&build(labels)?)?;
                if v > best + 1e-12 {
                    best = v;
                    pick = a;
                    improved = true;
                }
            }
            labels[i] = pick;
        }
        if !improved {
            break;
        }
    }
    Ok(best)
}

/// `max_tree E‖(1/n)Σ εᵢxᵢ(ε)‖_{W*}` over trees labelled by extreme points of
/// `X`: exhaustive when affordable, otherwise constant trees refined by
/// coordinate ascent from random restarts. Always a valid lower bound on the
/// game value.
pub fn value_lower_bound(pair: &GeometryPair, n: usize, budget: ValueBudget) -> Result<ValueBound> {
    if n == 0 || n > 12 {
        return Err(Error::InvalidParameter(format!("value search needs 1 ≤ n ≤ 12, got {n}")));
    }
    let mut alpha = alphabet(&pair.x_ball, false)?;
    if pair.x_ball.is_symmetric() {
        // negating a node and swapping its two subtrees leaves the payoff
        // unchanged, so one sign per ± pair suffices
        let mut kept: Vec<Vec<f64>> = Vec::new();
        for v in alpha {
            let neg: Vec<f64> = v.iter().map(|x| -x).collect();
            if !kept.iter().any(|k| *k == neg) {
                kept.push(v);
            }
        }
        alpha = kept;
    }
    let nodes = (1usize << n) - 1;
    let build = |labels: &[usize]| SignTree::new(n, pair.dim(), labels.iter().map(|&i| alpha[i].clone()).collect(), None);
    let score = |t: &SignTree| tree_payoff(t, pair);
    let configs = (alpha.len() as f64).powi(nodes as i32);
    if configs <= budget.max_configs {
        let mut labels = vec![0usize; nodes];
        let mut best = (f64::NEG_INFINITY, labels.clone());
        loop {
            let v = score(&build(&labels)?)?;
            if v > best.0 {
                best = (v, labels.clone());
            }
            // mixed-radix increment
            let mut i = 0;
            while i < nodes {
                labels[i] += 1;
                if labels[i] < alpha.len() {
                    break;
                }
                labels[i] = 0;
                i += 1;
            }
            if i == nodes {
                break;
            }
        }
        return Ok(ValueBound { value: best.0, exhaustive: true, tree: build(&best.1)? });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(budget.seed);
    let mut starts: Vec<Vec<usize>> = (0..alpha.len()).map(|a| vec![a; nodes]).collect();
    for _ in 0..budget.restarts {
        starts.push((0..nodes).map(|_| rng.gen_range(0..alpha.len())).collect());
    }
    let mut best = (f64::NEG_INFINITY, vec![]);
    for mut labels in starts {
        let v = ascend(&mut labels, &alpha, budget.rounds, &build, &score)?;
        if v > best.0 {
            best = (v, labels);
        }
    }
    Ok(ValueBound { value: best.0, exhaustive: false, tree: build(&best.1)? })
}

#[derive(Debug, Clone)]
pub struct CpEstimate {
    pub value: f64,
    pub tree: SignTree,
}

/// Lower estimate of the martingale-type constant `C_p` of `(W, X)` by
/// maximizing [`mtype_ratio`] over trees labelled from `ext(X) ∪ {0}`,
/// with `rounds` coordinate sweeps from `restarts` random starts.
pub fn estimate_cp(pair: &GeometryPair, p: f64, depth: usize, restarts: usize, rounds: usize, seed: u64) -> Result<CpEstimate> {
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("C_p needs p in (1, 2], got {p}")));
    }
    if depth == 0 || depth > 10 {
        return Err(Error::InvalidParameter(format!("depth must lie in [1, 10], got {depth}")));
    }
    let alpha = alphabet(&pair.x_ball, true)?;
    let zero = alpha.len() - 1;
    let nodes = 1usize << depth; // root plus 2^depth − 1 nodes
    let build = |labels: &[usize]| {
        let root = if labels[0] == zero { None } else { Some(alpha[labels[0]].clone()) };
        SignTree::new(depth, pair.dim(), labels[1..].iter().map(|&i| alpha[i].clone()).collect(), root)
    };
    let score = |t: &SignTree| match mtype_ratio(t, pair, p) {
        Ok(v) => Ok(v),
        Err(Error::InvalidParameter(_)) => Ok(0.0),
        Err(e) => Err(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = (f64::NEG_INFINITY, vec![]);
    for _ in 0..restarts.max(1) {
        let mut labels: Vec<usize> = (0..nodes).map(|_| rng.gen_range(0..alpha.len())).collect();
        let v = ascend(&mut labels, &alpha, rounds, &build, &score)?;
        if v > best.0 {
            best = (v, labels);
        }
    }
    Ok(CpEstimate { value: best.0, tree: build(&best.1)? })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichRow {
    pub n: usize,
    pub lower: f64,
    pub upper_md: f64,
    pub upper_dp: f64,
    pub c_p_hat: f64,
}

impl SandwichRow {
    /// `lower ≤ 2·upper_md` and `upper_md ≤ upper_dp`.
    pub fn consistent(&self, tol: f64) -> bool {
        self.lower <= 2.0 * self.upper_md + tol && self.upper_md <= self.upper_dp + tol
    }
}

pub fn write_sandwich_csv<W: Write>(rows: &[SandwichRow], mut out: W) -> Result<()> {
    writeln!(out, "n,lower,upper_md,upper_dp,c_p_hat")?;
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.n, r.lower, r.upper_md, r.upper_dp, r.c_p_hat)?;
    }
    Ok(())
}

/// Largest oblivious sequence space searched exhaustively.
pub const EXHAUSTIVE_SEQUENCES: f64 = 65_536.0;

/// Worst MD regret over a suite of adversaries: sign-greedy, seeded random
/// vertices, and every oblivious linear sequence over `ext(X)` when that set
/// is small enough.
pub fn md_worst_regret(reg: &Regularizer, pair: &GeometryPair, n: usize, seeds: usize) -> Result<f64> {
    let reg = if reg.sup_over_w.is_some() { reg.clone() } else { reg.clone().bind(&pair.w_ball)? };
    let mut worst = md::run(&reg, pair, &mut Adversary::sign_greedy(pair.x_ball.clone()), n)?.final_regret();
    for s in 0..seeds as u64 {
        let tr = md::run(&reg, pair, &mut Adversary::random_vertex(pair.x_ball.clone(), s), n)?;
        worst = worst.max(tr.final_regret());
    }
    let ext = pair.x_ball.extreme_points(64)?;
    if ext.exhaustive && (ext.points.len() as f64).powi(n as i32) <= EXHAUSTIVE_SEQUENCES {
        let k = ext.points.len();
        let mut idx = vec![0usize; n];
        loop {
            let costs: Vec<CostFunction> = idx.iter().map(|&i| CostFunction::Linear { x: ext.points[i].clone() }).collect();
            worst = worst.max(md::run_costs(&reg, pair, &costs)?.final_regret());
            let mut i = 0;
            while i < n {
                idx[i] += 1;
                if idx[i] < k {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
    }
    Ok(worst)
}

/// For each `n`: a lower bound on the value, the worst observed MD regret,
/// the bound `2·D_p·n^{−(1−1/p)}` and a `C_p` estimate.
pub fn sandwich_report(pair: &GeometryPair, reg: &Regularizer, n_list: &[usize], budget: ValueBudget) -> Result<Vec<SandwichRow>> {
    if n_list.is_empty() {
        return Err(Error::InvalidParameter("n_list is empty".into()));
    }
    let reg = if reg.sup_over_w.is_some() { reg.clone() } else { reg.clone().bind(&pair.w_ball)? };
    let p = reg.dual_exponent();
    let dp = d_p_upper(&reg, &pair.w_ball, p.min(2.0))?;
    let c_p_hat = if p > 1.0 && p <= 2.0 {
        estimate_cp(pair, p, 3, budget.restarts.min(8), budget.rounds, budget.seed)?.value
    } else {
        f64::NAN
    };
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let lower = value_lower_bound(pair, n, budget)?.value;
        let upper_md = md_worst_regret(&reg, pair, n, 8)?;
        let upper_dp = 2.0 * dp * (n as f64).powf(-(1.0 - 1.0 / p));
        rows.push(SandwichRow { n, lower, upper_md, upper_dp, c_p_hat });
    }
    Ok(rows)
}

/// Random tree with extreme-point labels, for tests and the replay adversary.
pub fn random_tree(pair: &GeometryPair, depth: usize, seed: u64) -> Result<SignTree> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes = (0..(1usize << depth) - 1)
        .map(|_| random_extreme_point(&pair.x_ball, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    SignTree::new(depth, pair.dim(), nodes, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l2pair(d: usize) -> GeometryPair {
        GeometryPair::new(BallSpec::l2(d), BallSpec::l2(d)).unwrap()
    }

    #[test]
    fn payoff_of_constant_tree() {
        // E|ε1 + ε2| / 2 = 1/2
        let pair = GeometryPair::new(BallSpec::l1(1), BallSpec::linf(1)).unwrap();
        let t = SignTree::constant(2, &[1.0]).unwrap();
        assert!((tree_payoff(&t, &pair).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mc_agrees_with_exact() {
        let pair = l2pair(2);
        let t = random_tree(&pair, 6, 1).unwrap();
        let exact = tree_payoff(&t, &pair).unwrap();
        let est = tree_payoff_mc(&t, &pair, 0, 2).unwrap();
        assert!((est.mean - exact).abs() < 5.0 * est.std_err + 1e-12);
    }

    #[test]
    fn euclidean_type_constant_is_one() {
        let pair = l2pair(2);
        let t = random_tree(&pair, 4, 7).unwrap();
        assert!((mtype_ratio(&t, &pair, 2.0).unwrap() - 1.0).abs() < 1e-9);
        let est = estimate_cp(&pair, 2.0, 3, 4, 2, 0).unwrap();
        assert!((est.value - 1.0).abs() < 1e-9, "{}", est.value);
        assert!(estimate_cp(&pair, 1.0, 3, 4, 2, 0).is_err());
    }

    #[test]
    fn exhaustive_value_in_one_dimension() {
        let pair = GeometryPair::new(BallSpec::l1(1), BallSpec::linf(1)).unwrap();
        let v = value_lower_bound(&pair, 2, ValueBudget::default()).unwrap();
        assert!(v.exhaustive);
        assert!((v.value - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sandwich_is_consistent_for_euclidean_pair() {
        let pair = l2pair(2);
        let rows = sandwich_report(&pair, &Regularizer::euclidean(2), &[2, 4], ValueBudget { restarts: 2, rounds: 1, ..Default::default() }).unwrap();
        for r in &rows {
            assert!(r.consistent(1e-6), "{r:?}");
        }
        let mut buf = Vec::new();
        write_sandwich_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("n,lower,upper_md,upper_dp,c_p_hat\n"));
    }
}
