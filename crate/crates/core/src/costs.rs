//! Convex cost functions with data in `X`, and adversaries that emit them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::game_value::SignTree;
use crate::geometry::lp::sign_plus;
use crate::geometry::{dot, BallKind, BallSpec, Exponent, GeometryPair};
use crate::md::{self, RegretTrace};
use crate::regularizers::Regularizer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum CostFunction {
    /// `w ↦ ⟨x, w⟩`.
    Linear { x: Vec<f64> },
    /// `w ↦ |⟨x, w⟩ − y|` with `|y| ≤ b`.
    AbsLoss { x: Vec<f64>, y: f64, b: f64 },
    /// `w ↦ max(0, 1 − y⟨x, w⟩)` with `y = ±1`.
    Hinge { x: Vec<f64>, y: f64 },
}

impl CostFunction {
    pub fn abs_loss(x: Vec<f64>, y: f64, b: f64) -> Result<Self> {
        if !(y.abs() <= b) {
            return Err(Error::InvalidParameter(format!("absolute loss needs |y| ≤ b, got y={y}, b={b}")));
        }
        Ok(CostFunction::AbsLoss { x, y, b })
    }

    pub fn hinge(x: Vec<f64>, y: f64) -> Result<Self> {
        if y != 1.0 && y != -1.0 {
            return Err(Error::InvalidParameter(format!("hinge label must be ±1, got {y}")));
        }
        Ok(CostFunction::Hinge { x, y })
    }

    pub fn data(&self) -> &[f64] {
        match self {
            CostFunction::Linear { x } | CostFunction::AbsLoss { x, .. } | CostFunction::Hinge { x, .. } => x,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, CostFunction::Linear { .. })
    }

    pub fn eval(&self, w: &[f64]) -> Result<f64> {
        check_dim(self.data().len(), w.len())?;
        Ok(match self {
            CostFunction::Linear { x } => dot(x, w),
            CostFunction::AbsLoss { x, y, .. } => (dot(x, w) - y).abs(),
            CostFunction::Hinge { x, y } => (1.0 - y * dot(x, w)).max(0.0),
        })
    }

    /// Linear → `x`; absolute loss → `sign(⟨x,w⟩ − y)·x` with `sign(0) = +1`;
    /// hinge → `−y·x` on the active side, else 0.
    pub fn subgradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.data().len(), w.len())?;
        Ok(match self {
            CostFunction::Linear { x } => x.clone(),
            CostFunction::AbsLoss { x, y, .. } => {
                let s = sign_plus(dot(x, w) - y);
                x.iter().map(|v| s * v).collect()
            }
            CostFunction::Hinge { x, y } => {
                if 1.0 - y * dot(x, w) > 0.0 {
                    x.iter().map(|v| -y * v).collect()
                } else {
                    vec![0.0; x.len()]
                }
            }
        })
    }
}

pub fn subgradient(f: &CostFunction, w: &[f64]) -> Result<Vec<f64>> {
    f.subgradient(w)
}

/// How an adversary's data vector becomes a cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossForm {
    #[default]
    Linear,
    AbsLoss { y: f64, b: f64 },
    Hinge { y: f64 },
}

impl LossForm {
    pub fn wrap(&self, x: Vec<f64>) -> Result<CostFunction> {
        match *self {
            LossForm::Linear => Ok(CostFunction::Linear { x }),
            LossForm::AbsLoss { y, b } => CostFunction::abs_loss(x, y, b),
            LossForm::Hinge { y } => CostFunction::hinge(x, y),
        }
    }
}

#[derive(Debug, Clone)]
pub enum AdversaryKind {
    Fixed(Vec<CostFunction>),
    /// Plays the extreme point of `X` maximizing `⟨x, w_t⟩`.
    SignGreedy,
    /// Uniform extreme point of `X`, drawn from a seeded stream.
    RandomVertex { seed: u64 },
    /// Walks a sign tree: emits `ε_t·x_t(ε_1..ε_{t−1})` with fresh uniform `ε_t`.
    TreeReplay { tree: SignTree, seed: u64 },
}

#[derive(Debug, Clone)]
pub struct Adversary {
    kind: AdversaryKind,
    x_ball: BallSpec,
    loss: LossForm,
    rng: ChaCha8Rng,
    path: usize,
}

impl Adversary {
    pub fn new(kind: AdversaryKind, x_ball: BallSpec, loss: LossForm) -> Self {
        let seed = match &kind {
            AdversaryKind::RandomVertex { seed } | AdversaryKind::TreeReplay { seed, .. } => *seed,
            _ => 0,
        };
        Adversary { kind, x_ball, loss, rng: ChaCha8Rng::seed_from_u64(seed), path: 0 }
    }

    pub fn sign_greedy(x_ball: BallSpec) -> Self {
        Self::new(AdversaryKind::SignGreedy, x_ball, LossForm::Linear)
    }

    pub fn random_vertex(x_ball: BallSpec, seed: u64) -> Self {
        Self::new(AdversaryKind::RandomVertex { seed }, x_ball, LossForm::Linear)
    }

    pub fn fixed(costs: Vec<CostFunction>, x_ball: BallSpec) -> Self {
        Self::new(AdversaryKind::Fixed(costs), x_ball, LossForm::Linear)
    }

    pub fn kind(&self) -> &AdversaryKind {
        &self.kind
    }

    pub fn label(&self) -> String {
        match &self.kind {
            AdversaryKind::Fixed(_) => "fixed".into(),
            AdversaryKind::SignGreedy => "sign_greedy".into(),
            AdversaryKind::RandomVertex { seed } => format!("random_vertex:{seed}"),
            AdversaryKind::TreeReplay { seed, .. } => format!("tree_replay:{seed}"),
        }
    }

    /// The cost for round `t ≥ 1` given the learner's current point.
    pub fn next_cost(&mut self, w_t: &[f64], t: usize) -> Result<CostFunction> {
        if t == 0 {
            return Err(Error::InvalidParameter("rounds are numbered from 1".into()));
        }
        check_dim(self.x_ball.dim(), w_t.len())?;
        let x = match &self.kind {
            AdversaryKind::Fixed(seq) => {
                return seq.get(t - 1).cloned().ok_or(Error::AdversaryExhausted(t));
            }
            AdversaryKind::SignGreedy => self.x_ball.support_point(w_t)?,
            AdversaryKind::RandomVertex { .. } => random_extreme_point(&self.x_ball, &mut self.rng)?,
            AdversaryKind::TreeReplay { tree, .. } => {
                if t > tree.depth {
                    return Err(Error::AdversaryExhausted(t));
                }
                let node = tree.node(t, self.path).to_vec();
                let minus = self.rng.gen::<bool>();
                self.path = self.path * 2 + usize::from(minus);
                let e = if minus { -1.0 } else { 1.0 };
                node.into_iter().map(|v| e * v).collect()
            }
        };
        self.loss.wrap(x)
    }
}

pub fn next_cost(adv: &mut Adversary, w_t: &[f64], t: usize) -> Result<CostFunction> {
    adv.next_cost(w_t, t)
}

/// A uniformly drawn extreme point for polytopes; for smooth balls, the
/// support point of a Gaussian direction.
pub fn random_extreme_point(ball: &BallSpec, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let d = ball.dim();
    let r = ball.radius;
    Ok(match &ball.kind {
        BallKind::Lp { p: Exponent::Infinity, .. } => {
            (0..d).map(|_| if rng.gen::<bool>() { -r } else { r }).collect()
        }
        BallKind::Lp { p, .. } if p.is_one() => {
            let mut v = vec![0.0; d];
            let i = rng.gen_range(0..d);
            v[i] = if rng.gen::<bool>() { -r } else { r };
            v
        }
        BallKind::Simplex { .. } => {
            let mut v = vec![0.0; d];
            v[rng.gen_range(0..d)] = r;
            v
        }
        BallKind::VertexHull { vertices } => {
            let k = rng.gen_range(0..vertices.len());
            let s = if rng.gen::<bool>() { -r } else { r };
            vertices[k].iter().map(|x| s * x).collect()
        }
        _ => {
            let dir: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            ball.support_point(&dir)?
        }
    })
}

#[derive(Debug, Clone)]
pub struct ClassValueReport {
    pub linear_regret: f64,
    pub abs_regret: f64,
    pub bound: f64,
    pub linear_within_bound: bool,
    pub abs_within_bound: bool,
}

/// Runs one MD configuration against linear and absolute-loss (`y = 0`,
/// `b = 1`) costs built from the same oblivious data sequence and checks the
/// shared MD upper bound for both.
pub fn class_value_ordering_check(
    pair: &GeometryPair,
    reg: &Regularizer,
    n: usize,
    seed: u64,
) -> Result<ClassValueReport> {
    if n == 0 || n > 1 << 10 {
        return Err(Error::InvalidParameter(format!("n must lie in [1, 1024], got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<Vec<f64>> =
        (0..n).map(|_| random_extreme_point(&pair.x_ball, &mut rng)).collect::<Result<_>>()?;
    let lin: Vec<CostFunction> = xs.iter().map(|x| CostFunction::Linear { x: x.clone() }).collect();
    let abs: Vec<CostFunction> =
        xs.iter().map(|x| CostFunction::abs_loss(x.clone(), 0.0, 1.0)).collect::<Result<_>>()?;
    let tl: RegretTrace = md::run_costs(reg, pair, &lin)?;
    let ta: RegretTrace = md::run_costs(reg, pair, &abs)?;
    Ok(ClassValueReport {
        linear_regret: tl.final_regret(),
        abs_regret: ta.final_regret(),
        bound: tl.final_bound(),
        linear_within_bound: tl.bound_holds(1e-6),
        abs_within_bound: ta.bound_holds(1e-6),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subgradient_examples() {
        let f = CostFunction::Linear { x: vec![2.0, -1.0] };
        assert_eq!(f.subgradient(&[0.3, 7.0]).unwrap(), vec![2.0, -1.0]);
        let f = CostFunction::abs_loss(vec![1.0, 0.0], 0.5, 1.0).unwrap();
        assert_eq!(f.subgradient(&[0.0, 0.0]).unwrap(), vec![-1.0, 0.0]);
        let f = CostFunction::hinge(vec![1.0, 0.0], 1.0).unwrap();
        assert_eq!(f.subgradient(&[2.0, 0.0]).unwrap(), vec![0.0, 0.0]);
        assert!(CostFunction::abs_loss(vec![1.0], 2.0, 1.0).is_err());
    }

    #[test]
    fn sign_greedy_examples() {
        let mut adv = Adversary::sign_greedy(BallSpec::linf(2));
        assert_eq!(adv.next_cost(&[0.3, -0.2], 1).unwrap(), CostFunction::Linear { x: vec![1.0, -1.0] });
        assert_eq!(adv.next_cost(&[0.0, 0.0], 2).unwrap(), CostFunction::Linear { x: vec![1.0, 1.0] });
    }

    #[test]
    fn random_vertex_is_reproducible() {
        let draw = || {
            let mut adv = Adversary::random_vertex(BallSpec::l1(3), 42);
            (1..=20).map(|t| adv.next_cost(&[0.0; 3], t).unwrap()).collect::<Vec<_>>()
        };
        let a = draw();
        assert_eq!(a, draw());
        for c in &a {
            let x = c.data();
            assert_eq!(x.iter().filter(|v| **v != 0.0).count(), 1);
            assert_eq!(x.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
        }
    }

    #[test]
    fn fixed_adversary_exhausts() {
        let mut adv = Adversary::fixed(vec![CostFunction::Linear { x: vec![1.0] }], BallSpec::linf(1));
        assert!(adv.next_cost(&[0.0], 1).is_ok());
        assert_eq!(adv.next_cost(&[0.0], 2), Err(Error::AdversaryExhausted(2)));
    }

    #[test]
    fn class_check_holds_for_both_losses() {
        let pair = GeometryPair::new(BallSpec::l2(3), BallSpec::l2(3)).unwrap();
        let reg = Regularizer::euclidean(3);
        let rep = class_value_ordering_check(&pair, &reg, 64, 3).unwrap();
        assert!(rep.linear_within_bound && rep.abs_within_bound);
    }
}
