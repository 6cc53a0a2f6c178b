//! Mirror descent with Bregman projection and per-round regret tracking.

use std::io::Write;

use crate::costs::{Adversary, CostFunction};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{dot, GeometryPair};
use crate::prox::{dual_point, project_with_dual};
use crate::regularizers::Regularizer;

/// Tolerance on the per-round contract `‖∇f_t‖_X ≤ 1`.
pub const CONTRACT_TOL: f64 = 1e-6;

const COMPARATOR_ITERS: usize = 2000;
const HUBER_WIDTH: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct MdState {
    pub w: Vec<f64>,
    pub t: usize,
    pub eta: f64,
    pub b: f64,
    pub reg: Regularizer,
    pub pair: GeometryPair,
}

/// `η = (sup Ψ / (n·B))^{1/p}` with `p = q/(q−1)`.
pub fn step_size(reg: &Regularizer, n: usize) -> Result<f64> {
    step_size_with(reg.sup()?, reg.q_exponent, n, 1.0)
}

pub fn step_size_with(sup: f64, q: f64, n: usize, b: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("horizon must be ≥ 1".into()));
    }
    if !(sup > 0.0) || !sup.is_finite() {
        return Err(Error::InvalidParameter(format!("sup Ψ over W must be positive and finite, got {sup}")));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("gradient budget must be positive, got {b}")));
    }
    if !(q > 1.0) || !q.is_finite() {
        return Err(Error::InvalidExponent(q));
    }
    let p = q / (q - 1.0);
    Ok((sup / (n as f64 * b)).powf(1.0 / p))
}

/// Starts at `argmin_W Ψ`: the origin when it lies in `W`, otherwise the
/// projection of `∇Ψ*(0)`. Binds `reg` to `W` if it is not bound yet.
pub fn init(reg: &Regularizer, pair: &GeometryPair, n: usize) -> Result<MdState> {
    init_with_budget(reg, pair, n, 1.0)
}

/// [`init`] with gradient budget `B` in the step size.
pub fn init_with_budget(reg: &Regularizer, pair: &GeometryPair, n: usize, b: f64) -> Result<MdState> {
    check_dim(pair.dim(), reg.dim)?;
    let reg = if reg.sup_over_w.is_some() { reg.clone() } else { reg.clone().bind(&pair.w_ball)? };
    let eta = step_size_with(reg.sup()?, reg.q_exponent, n, b)?;
    let d = pair.dim();
    let zero = vec![0.0; d];
    let w = if pair.w_ball.contains(&zero, 0.0)? && reg.eval(&zero)? == 0.0 {
        zero
    } else {
        let y = reg.conj_grad(&zero)?;
        project_with_dual(&reg, &pair.w_ball, &y, Some(&zero))?.point
    };
    Ok(MdState { w, t: 1, eta, b, reg, pair: pair.clone() })
}

impl MdState {
    /// `w ← P_W(∇Ψ*(∇Ψ(w) − η·g))`.
    pub fn advance(&mut self, g: &[f64]) -> Result<()> {
        check_dim(self.w.len(), g.len())?;
        if g.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("gradient"));
        }
        let theta = dual_point(&self.reg, &self.w, g, self.eta)?;
        let y = self.reg.conj_grad(&theta)?;
        self.w = project_with_dual(&self.reg, &self.pair.w_ball, &y, Some(&theta))?.point;
        self.t += 1;
        Ok(())
    }
}

pub fn md_step(state: &MdState, g: &[f64]) -> Result<MdState> {
    let mut next = state.clone();
    next.advance(g)?;
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundRecord {
    pub t: usize,
    pub cost: f64,
    pub grad_gauge: f64,
    /// Average regret after `t` rounds against the final comparator.
    pub cum_regret: f64,
    pub bound: f64,
}

#[derive(Debug, Clone)]
pub struct RegretTrace {
    pub records: Vec<RoundRecord>,
    pub comparator: Vec<f64>,
    /// False if any round had `‖∇f_t‖_X > 1 + CONTRACT_TOL`.
    pub contract_held: bool,
    pub eta: f64,
    pub sup: f64,
    pub q: f64,
}

impl RegretTrace {
    pub fn final_regret(&self) -> f64 {
        self.records.last().map(|r| r.cum_regret).unwrap_or(0.0)
    }

    pub fn final_bound(&self) -> f64 {
        self.records.last().map(|r| r.bound).unwrap_or(0.0)
    }

    /// Regret within the bound at every round, up to a relative `tol`.
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.records.iter().all(|r| r.cum_regret <= r.bound * (1.0 + tol) + tol)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "t,cost,grad_gauge,cum_regret,bound")?;
        for r in &self.records {
            writeln!(out, "{},{},{},{},{}", r.t, r.cost, r.grad_gauge, r.cum_regret, r.bound)?;
        }
        Ok(())
    }
}

/// `(S/η + η^{p−1}·B·t)/t`, equal to `2(S/n)^{1/q}` at `t = n` with `B = 1`.
pub fn round_bound(sup: f64, q: f64, eta: f64, t: usize, b: f64) -> f64 {
    let p = q / (q - 1.0);
    let t = t as f64;
    (sup / eta + eta.powf(p - 1.0) * b * t) / t
}

pub fn run(reg: &Regularizer, pair: &GeometryPair, adversary: &mut Adversary, n: usize) -> Result<RegretTrace> {
    run_with_budget(reg, pair, adversary, n, 1.0)
}

pub fn run_with_budget(
    reg: &Regularizer,
    pair: &GeometryPair,
    adversary: &mut Adversary,
    n: usize,
    b: f64,
) -> Result<RegretTrace> {
    let mut state = init_with_budget(reg, pair, n, b)?;
    let mut iterates = Vec::with_capacity(n);
    let mut costs = Vec::with_capacity(n);
    let mut gauges = Vec::with_capacity(n);
    for t in 1..=n {
        let f = adversary.next_cost(&state.w, t)?;
        let g = f.subgradient(&state.w)?;
        gauges.push(pair.x_ball.gauge(&g)?);
        iterates.push(state.w.clone());
        costs.push(f);
        if t < n {
            state.advance(&g)?;
        }
    }
    finish(&state, &iterates, &costs, &gauges)
}

/// Runs against a fixed cost sequence.
pub fn run_costs(reg: &Regularizer, pair: &GeometryPair, costs: &[CostFunction]) -> Result<RegretTrace> {
    let mut adv = Adversary::fixed(costs.to_vec(), pair.x_ball.clone());
    run(reg, pair, &mut adv, costs.len())
}

fn finish(state: &MdState, iterates: &[Vec<f64>], costs: &[CostFunction], gauges: &[f64]) -> Result<RegretTrace> {
    let d = state.w.len();
    let n = costs.len();
    let mut avg = vec![0.0; d];
    for w in iterates {
        for (a, b) in avg.iter_mut().zip(w) {
            *a += b / n as f64;
        }
    }
    let comparator = comparator(&state.pair, costs, &[avg, state.w.clone()])?;
    let sup = state.reg.sup()?;
    let q = state.reg.q_exponent;
    let mut sum = 0.0;
    let mut records = Vec::with_capacity(n);
    for (i, ((f, w), &gg)) in costs.iter().zip(iterates).zip(gauges).enumerate() {
        let cost = f.eval(w)?;
        sum += cost - f.eval(&comparator)?;
        let t = i + 1;
        records.push(RoundRecord {
            t,
            cost,
            grad_gauge: gg,
            cum_regret: sum / t as f64,
            bound: round_bound(sup, q, state.eta, t, state.b),
        });
    }
    let contract_held = gauges.iter().all(|&g| g <= 1.0 + CONTRACT_TOL);
    Ok(RegretTrace { records, comparator, contract_held, eta: state.eta, sup, q })
}

fn total(costs: &[CostFunction], w: &[f64]) -> Result<f64> {
    costs.iter().map(|f| f.eval(w)).sum()
}

/// Best fixed point in hindsight. Linear costs use the support oracle of
/// `W`; other costs run Frank–Wolfe on a Huber-smoothed total and keep the
/// best feasible point seen, including the supplied candidates.
pub fn comparator(pair: &GeometryPair, costs: &[CostFunction], candidates: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = pair.dim();
    let w_ball = &pair.w_ball;
    if costs.iter().all(|f| f.is_linear()) {
        let mut s = vec![0.0; d];
        for f in costs {
            for (a, b) in s.iter_mut().zip(f.data()) {
                *a -= b;
            }
        }
        return w_ball.support_point(&s);
    }
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut consider = |w: &Vec<f64>| -> Result<()> {
        let v = total(costs, w)?;
        if best.as_ref().map_or(true, |(b, _)| v < *b) {
            best = Some((v, w.clone()));
        }
        Ok(())
    };
    for c in candidates {
        if w_ball.contains(c, 1e-9)? {
            consider(c)?;
        }
    }
    let mut w = match candidates.first() {
        Some(c) if w_ball.contains(c, 1e-9)? => c.clone(),
        _ => w_ball.support_point(&vec![0.0; d])?,
    };
    for k in 0..COMPARATOR_ITERS {
        let mut grad = vec![0.0; d];
        for f in costs {
            let z = dot(f.data(), &w);
            let s = match *f {
                CostFunction::Linear { .. } => 1.0,
                CostFunction::AbsLoss { y, .. } => ((z - y) / HUBER_WIDTH).clamp(-1.0, 1.0),
                CostFunction::Hinge { y, .. } => -y * ((1.0 - y * z) / HUBER_WIDTH).clamp(0.0, 1.0),
            };
            for (g, x) in grad.iter_mut().zip(f.data()) {
                *g += s * x;
            }
        }
        let neg: Vec<f64> = grad.iter().map(|g| -g).collect();
        let v = w_ball.support_point(&neg)?;
        let gamma = 2.0 / (k as f64 + 2.0);
        for (a, b) in w.iter_mut().zip(&v) {
            *a += gamma * (b - *a);
        }
        consider(&w)?;
    }
    Ok(best.map(|(_, w)| w).expect("at least one iterate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::CostFunction;
    use crate::geometry::BallSpec;

    #[test]
    fn step_size_example() {
        let eta = step_size_with(0.5, 2.0, 100, 1.0).unwrap();
        assert!((eta - 0.070711).abs() < 1e-6);
        assert!(step_size_with(0.0, 2.0, 100, 1.0).is_err());
    }

    #[test]
    fn euclidean_step_example() {
        let pair = GeometryPair::new(BallSpec::l2(2), BallSpec::l2(2)).unwrap();
        let mut st = init(&Regularizer::euclidean(2), &pair, 100).unwrap();
        assert_eq!(st.w, vec![0.0, 0.0]);
        st.eta = 0.1;
        st.advance(&[1.0, 0.0]).unwrap();
        assert!((st.w[0] + 0.1).abs() < 1e-15 && st.w[1] == 0.0);
    }

    #[test]
    fn entropy_examples() {
        let pair = GeometryPair::new(BallSpec::simplex(3), BallSpec::linf(3)).unwrap();
        let st = init(&Regularizer::entropy(3), &pair, 10).unwrap();
        for x in &st.w {
            assert!((x - 1.0 / 3.0).abs() < 1e-12);
        }
        let pair = GeometryPair::new(BallSpec::simplex(2), BallSpec::linf(2)).unwrap();
        let mut st = init(&Regularizer::entropy(2), &pair, 10).unwrap();
        st.eta = 2f64.ln();
        st.advance(&[1.0, 0.0]).unwrap();
        assert!((st.w[0] - 1.0 / 3.0).abs() < 1e-12 && (st.w[1] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn bound_at_horizon_matches_closed_form() {
        let (s, q, n) = (0.5, 2.0, 400);
        let eta = step_size_with(s, q, n, 1.0).unwrap();
        let b = round_bound(s, q, eta, n, 1.0);
        assert!((b - 2.0 * (s / n as f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn run_respects_bound_and_writes_csv() {
        let pair = GeometryPair::new(BallSpec::l2(3), BallSpec::l2(3)).unwrap();
        let reg = Regularizer::euclidean(3);
        let mut adv = Adversary::sign_greedy(pair.x_ball.clone());
        let tr = run(&reg, &pair, &mut adv, 200).unwrap();
        assert!(tr.contract_held);
        assert!(tr.bound_holds(1e-6));
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert!(s.starts_with("t,cost,grad_gauge,cum_regret,bound\n"));
        assert_eq!(s.lines().count(), 201);
    }

    #[test]
    fn absolute_loss_comparator_is_near_optimal() {
        let pair = GeometryPair::new(BallSpec::l2(1), BallSpec::l2(1)).unwrap();
        let costs: Vec<_> =
            [0.3, 0.3, -0.5].iter().map(|&y| CostFunction::abs_loss(vec![1.0], y, 1.0).unwrap()).collect();
        let c = comparator(&pair, &costs, &[]).unwrap();
        // median of the targets
        assert!((c[0] - 0.3).abs() < 1e-3, "{c:?}");
    }
}
