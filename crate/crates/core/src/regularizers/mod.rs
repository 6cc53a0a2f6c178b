//! Distance-generating functions Ψ: values, gradients, conjugate gradients,
//! uniform-convexity exponents and suprema over a constraint ball.

pub mod catalog;
pub mod vertex_norm;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{check_dim, Error, Result};
use crate::geometry::lp::sign_plus;
use crate::geometry::svd::svd;
use crate::geometry::{column, group_norm, lp_norm, BallKind, BallSpec, Exponent};
pub use catalog::{lp_regret_bound, pick_r, pick_r_for_d2, scaled_psi_for_lp_pair};
use vertex_norm::half_sq_grad;
pub use vertex_norm::VertexNorm;

/// Floor applied to simplex coordinates before taking logarithms.
pub const ENTROPY_FLOOR: f64 = 1e-12;

const EXTREME_LIMIT: usize = 1 << 16;
const ASCENT_STARTS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub enum RegularizerKind {
    /// `½‖w‖₂²`.
    EuclideanHalfSq,
    /// `‖w‖_r²/(2(r−1))` for `r ≤ 2`, `(2^r/r)‖w‖_r^r` for `r > 2`.
    PsiR { r: f64 },
    ScaledPsiR { r: f64, scale: f64 },
    /// `Σ wᵢ log(d·wᵢ)`, nonnegative on the simplex with minimum at the
    /// uniform point.
    Entropy,
    /// `scale·‖w‖²_{q,r} / (2(min(q, r) − 1))` on `rows × cols` matrices.
    GroupSquared { q: f64, r: f64, rows: usize, cols: usize, scale: f64 },
    /// `scale·‖w‖²_{W,q} / (2(q − 1))`.
    VertexHullSquared { norm: VertexNorm, scale: f64 },
    /// `ψ_r` applied to the singular values.
    SchattenPsiR { r: f64, rows: usize, cols: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupValue {
    pub value: f64,
    /// False when the value comes from a local search and is only a lower
    /// bound on the supremum.
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regularizer {
    pub kind: RegularizerKind,
    pub dim: usize,
    pub q_exponent: f64,
    /// Ψ is `q_exponent`-uniformly convex with respect to the dual norm of
    /// this ball (for a geometry pair, the data ball X).
    pub convexity_ball: BallSpec,
    /// `sup_{w∈W} Ψ(w)` once bound to a constraint ball.
    pub sup_over_w: Option<SupValue>,
    /// False for kinds whose convexity constant is not established.
    pub certified: bool,
}

/// Norm through which a regularizer depends on `w`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Profile {
    Lp(f64),
    Group { q: f64, r: f64, rows: usize, cols: usize },
    Schatten { r: f64, rows: usize, cols: usize },
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::InvalidExponent(r));
    }
    Ok(())
}

impl Regularizer {
    fn build(kind: RegularizerKind, dim: usize, q: f64, convexity_ball: BallSpec) -> Result<Self> {
        check_dim(dim, convexity_ball.dim())?;
        let certified = !matches!(kind, RegularizerKind::SchattenPsiR { .. });
        Ok(Regularizer { kind, dim, q_exponent: q, convexity_ball, sup_over_w: None, certified })
    }

    pub fn euclidean(dim: usize) -> Self {
        Self::build(RegularizerKind::EuclideanHalfSq, dim, 2.0, BallSpec::l2(dim)).expect("valid")
    }

    /// `ψ_r`, uniformly convex with respect to `‖·‖_r`.
    pub fn psi_r(r: f64, dim: usize) -> Result<Self> {
        check_r(r)?;
        let ball = BallSpec::new(BallKind::Lp { p: Exponent::Finite(r).conjugate(), dim })?;
        Self::build(RegularizerKind::PsiR { r }, dim, r.max(2.0), ball)
    }

    /// `scale·ψ_r`; the caller asserts uniform convexity with respect to the
    /// dual norm of `convexity_ball`.
    pub fn scaled_psi_r(r: f64, scale: f64, convexity_ball: BallSpec) -> Result<Self> {
        check_r(r)?;
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be > 0, got {scale}")));
        }
        let dim = convexity_ball.dim();
        Self::build(RegularizerKind::ScaledPsiR { r, scale }, dim, r.max(2.0), convexity_ball)
    }

    /// Strongly convex with respect to `‖·‖₁` on the simplex.
    pub fn entropy(dim: usize) -> Self {
        Self::build(RegularizerKind::Entropy, dim, 2.0, BallSpec::linf(dim)).expect("valid")
    }

    pub fn group_squared(
        q: f64,
        r: f64,
        rows: usize,
        cols: usize,
        scale: f64,
        convexity_ball: BallSpec,
    ) -> Result<Self> {
        for e in [q, r] {
            if !(e > 1.0 && e <= 2.0) {
                return Err(Error::InvalidParameter(format!("group exponents must lie in (1, 2], got {e}")));
            }
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale must be > 0, got {scale}")));
        }
        let kind = RegularizerKind::GroupSquared { q, r, rows, cols, scale };
        Self::build(kind, rows * cols, 2.0, convexity_ball)
    }

    /// Group regularizer for `W = B_{(q,1)}` against elementwise-bounded data
    /// `X = B_∞`: `r = log d/(log d − 1)` (or 2 when `log d < 2`), scaled so the
    /// function is strongly convex with respect to the elementwise `ℓ1` norm.
    pub fn group_for_linf(q: f64, rows: usize, cols: usize) -> Result<Self> {
        let ld = (cols as f64).ln();
        let r = if ld >= 2.0 { ld / (ld - 1.0) } else { 2.0 };
        let scale = ((rows as f64).powf(1.0 - 1.0 / q) * (cols as f64).powf(1.0 - 1.0 / r)).powi(2);
        Self::group_squared(q, r, rows, cols, scale, BallSpec::linf(rows * cols))
    }

    /// `(W, q)`-norm regularizer with `q = log K/(log K − 1)` (2 when
    /// `log K < 2`), scaled to be strongly convex with respect to the dual
    /// norm of `convexity_ball`.
    pub fn vertex_hull_squared(vertices: Vec<Vec<f64>>, convexity_ball: BallSpec) -> Result<Self> {
        let k = vertices.len();
        let lk = (k as f64).ln();
        let q = if lk >= 2.0 { lk / (lk - 1.0) } else { 2.0 };
        let mut vmax: f64 = 0.0;
        for v in &vertices {
            vmax = vmax.max(convexity_ball.dual_norm(v)?);
        }
        let scale = (vmax * (k as f64).powf(1.0 - 1.0 / q)).powi(2);
        Self::vertex_hull_squared_with(vertices, q, scale, convexity_ball)
    }

    pub fn vertex_hull_squared_with(
        vertices: Vec<Vec<f64>>,
        q: f64,
        scale: f64,
        convexity_ball: BallSpec,
    ) -> Result<Self> {
        let norm = VertexNorm::new(vertices, q)?;
        let dim = norm.dim();
        Self::build(RegularizerKind::VertexHullSquared { norm, scale }, dim, 2.0, convexity_ball)
    }

    /// `ψ_r` of the singular values; its convexity constant is not certified.
    pub fn schatten_psi_r(r: f64, rows: usize, cols: usize) -> Result<Self> {
        check_r(r)?;
        let ball = BallSpec::schatten(Exponent::Finite(r).conjugate(), rows, cols);
        Self::build(RegularizerKind::SchattenPsiR { r, rows, cols }, rows * cols, r.max(2.0), ball)
    }

    /// Replaces the convexity ball (e.g. with the data ball of a pair).
    pub fn with_convexity_ball(mut self, ball: BallSpec) -> Result<Self> {
        check_dim(self.dim, ball.dim())?;
        self.convexity_ball = ball;
        Ok(self)
    }

    /// Computes and stores `sup_{w∈W} Ψ(w)`.
    pub fn bind(mut self, w_ball: &BallSpec) -> Result<Self> {
        self.sup_over_w = Some(sup_over_ball(&self, w_ball)?);
        Ok(self)
    }

    pub fn sup(&self) -> Result<f64> {
        self.sup_over_w
            .map(|s| s.value)
            .ok_or_else(|| Error::InvalidParameter("regularizer not bound to a constraint ball".into()))
    }

    /// `p = q/(q − 1)`.
    pub fn dual_exponent(&self) -> f64 {
        self.q_exponent / (self.q_exponent - 1.0)
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            RegularizerKind::EuclideanHalfSq => "euclidean",
            RegularizerKind::PsiR { .. } => "psi_r",
            RegularizerKind::ScaledPsiR { .. } => "scaled_psi_r",
            RegularizerKind::Entropy => "entropy",
            RegularizerKind::GroupSquared { .. } => "group_squared",
            RegularizerKind::VertexHullSquared { .. } => "vertex_hull_squared",
            RegularizerKind::SchattenPsiR { .. } => "schatten_psi_r",
        }
    }

    /// The norm `‖·‖` in the uniform-convexity inequality.
    pub fn convexity_norm(&self, v: &[f64]) -> Result<f64> {
        self.convexity_ball.dual_norm(v)
    }

    fn profile(&self) -> Option<Profile> {
        match self.kind {
            RegularizerKind::EuclideanHalfSq => Some(Profile::Lp(2.0)),
            RegularizerKind::PsiR { r } | RegularizerKind::ScaledPsiR { r, .. } => Some(Profile::Lp(r)),
            RegularizerKind::GroupSquared { q, r, rows, cols, .. } => Some(Profile::Group { q, r, rows, cols }),
            RegularizerKind::SchattenPsiR { r, rows, cols } => Some(Profile::Schatten { r, rows, cols }),
            RegularizerKind::Entropy | RegularizerKind::VertexHullSquared { .. } => None,
        }
    }

    /// Ψ as a function of the profile norm value `t`.
    fn profile_value(&self, t: f64) -> f64 {
        match self.kind {
            RegularizerKind::EuclideanHalfSq => 0.5 * t * t,
            RegularizerKind::PsiR { r } => psi_r_of_norm(t, r, 1.0),
            RegularizerKind::ScaledPsiR { r, scale } => psi_r_of_norm(t, r, scale),
            RegularizerKind::SchattenPsiR { r, .. } => psi_r_of_norm(t, r, 1.0),
            RegularizerKind::GroupSquared { q, r, scale, .. } => scale * t * t / (2.0 * (q.min(r) - 1.0)),
            _ => f64::NAN,
        }
    }

    /// True when Ψ is a nondecreasing function of the gauge of `ball`, so
    /// that Bregman projection onto it is radial scaling.
    pub(crate) fn is_radial_for(&self, ball: &BallSpec) -> bool {
        match (self.profile(), &ball.kind) {
            (Some(Profile::Lp(r)), BallKind::Lp { p: Exponent::Finite(p), .. }) => *p == r,
            (Some(Profile::Group { q, r, rows, cols }), BallKind::GroupQr { q: q1, r: r1, rows: k1, cols: d1 }) => {
                *q1 == Exponent::Finite(q) && *r1 == Exponent::Finite(r) && rows == *k1 && cols == *d1
            }
            (Some(Profile::Schatten { r, rows, cols }), BallKind::Schatten { p, rows: k1, cols: d1 }) => {
                *p == Exponent::Finite(r) && rows == *k1 && cols == *d1
            }
            _ => false,
        }
    }

    pub fn eval(&self, w: &[f64]) -> Result<f64> {
        check_dim(self.dim, w.len())?;
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("regularizer argument"));
        }
        Ok(match &self.kind {
            RegularizerKind::EuclideanHalfSq => 0.5 * w.iter().map(|x| x * x).sum::<f64>(),
            RegularizerKind::PsiR { r } => psi_r_of_norm(lp_norm(w, Exponent::Finite(*r)), *r, 1.0),
            RegularizerKind::ScaledPsiR { r, scale } => psi_r_of_norm(lp_norm(w, Exponent::Finite(*r)), *r, *scale),
            RegularizerKind::Entropy => {
                check_nonnegative(w)?;
                let d = self.dim as f64;
                w.iter().filter(|&&x| x > 0.0).map(|&x| x * (d * x).ln()).sum()
            }
            RegularizerKind::GroupSquared { q, r, rows, cols, .. } => {
                let n = group_norm(w, Exponent::Finite(*q), Exponent::Finite(*r), *rows, *cols);
                self.profile_value(n)
            }
            RegularizerKind::VertexHullSquared { norm, scale } => scale / (norm.q() - 1.0) * norm.solve(w, None)?.half_sq,
            RegularizerKind::SchattenPsiR { r, rows, cols } => {
                let s = svd(w, *rows, *cols)?;
                psi_r_of_norm(lp_norm(&s.sigma, Exponent::Finite(*r)), *r, 1.0)
            }
        })
    }

    pub fn grad(&self, w: &[f64]) -> Result<Vec<f64>> {
        Ok(self.grad_hinted(w, None)?.0)
    }

    /// Gradient plus an internal dual iterate that warm-starts the next call
    /// at a nearby point (used only by the vertex-hull kind).
    pub(crate) fn grad_hinted(&self, w: &[f64], hint: Option<&[f64]>) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
        check_dim(self.dim, w.len())?;
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("regularizer argument"));
        }
        let g = match &self.kind {
            RegularizerKind::EuclideanHalfSq => w.to_vec(),
            RegularizerKind::PsiR { r } => psi_r_grad(w, *r, 1.0),
            RegularizerKind::ScaledPsiR { r, scale } => psi_r_grad(w, *r, *scale),
            RegularizerKind::Entropy => {
                check_nonnegative(w)?;
                let d = self.dim as f64;
                w.iter().map(|&x| 1.0 + (d * x.max(ENTROPY_FLOOR)).ln()).collect()
            }
            RegularizerKind::GroupSquared { q, r, rows, cols, scale } => {
                let c = scale / (q.min(*r) - 1.0);
                group_half_sq_grad(w, *q, *r, *rows, *cols).into_iter().map(|x| c * x).collect()
            }
            RegularizerKind::VertexHullSquared { norm, scale } => {
                let s = norm.solve(w, hint)?;
                let c = scale / (norm.q() - 1.0);
                let g = s.theta.iter().map(|x| c * x).collect();
                return Ok((g, Some(s.theta)));
            }
            RegularizerKind::SchattenPsiR { r, rows, cols } => {
                let s = svd(w, *rows, *cols)?;
                let gs = psi_r_grad(&s.sigma, *r, 1.0);
                s.recompose(&gs)
            }
        };
        Ok((g, None))
    }

    /// `∇Ψ*(θ)`: the maximizer of `⟨θ, w⟩ − Ψ(w)`. For the entropy the
    /// conjugate is taken over the simplex (softmax).
    pub fn conj_grad(&self, theta: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, theta.len())?;
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("dual point"));
        }
        Ok(match &self.kind {
            RegularizerKind::EuclideanHalfSq => theta.to_vec(),
            RegularizerKind::PsiR { r } => psi_r_conj_grad(theta, *r, 1.0),
            RegularizerKind::ScaledPsiR { r, scale } => psi_r_conj_grad(theta, *r, *scale),
            RegularizerKind::Entropy => softmax(theta),
            RegularizerKind::GroupSquared { q, r, rows, cols, scale } => {
                let c = scale / (q.min(*r) - 1.0);
                let qs = q / (q - 1.0);
                let rs = r / (r - 1.0);
                group_half_sq_grad(theta, qs, rs, *rows, *cols).into_iter().map(|x| x / c).collect()
            }
            RegularizerKind::VertexHullSquared { norm, scale } => {
                let c = scale / (norm.q() - 1.0);
                norm.dual_half_sq_grad(theta).into_iter().map(|x| x / c).collect()
            }
            RegularizerKind::SchattenPsiR { r, rows, cols } => {
                let s = svd(theta, *rows, *cols)?;
                let ws = psi_r_conj_grad(&s.sigma, *r, 1.0);
                s.recompose(&ws)
            }
        })
    }

    /// `B_Ψ(a | b) = Ψ(a) − Ψ(b) − ⟨∇Ψ(b), a − b⟩`.
    pub fn bregman(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        let gb = self.grad(b)?;
        let lin: f64 = gb.iter().zip(a.iter().zip(b)).map(|(g, (x, y))| g * (x - y)).sum();
        Ok(self.eval(a)? - self.eval(b)? - lin)
    }

    /// `(sup_W Ψ)^{(p−1)/p}`, an upper bound on `D_p`.
    pub fn d_p_upper(&self, p: f64) -> Result<f64> {
        if !(p > 1.0 && p <= 2.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (1, 2], got {p}")));
        }
        Ok(self.sup()?.powf((p - 1.0) / p))
    }
}

fn check_nonnegative(w: &[f64]) -> Result<()> {
    if let Some(x) = w.iter().find(|&&x| x < 0.0) {
        return Err(Error::OutsideDomain(format!("entropy needs nonnegative coordinates, got {x}")));
    }
    Ok(())
}

fn psi_r_of_norm(t: f64, r: f64, scale: f64) -> f64 {
    if r <= 2.0 {
        scale * t * t / (2.0 * (r - 1.0))
    } else {
        scale * 2f64.powf(r) / r * t.powf(r)
    }
}

fn psi_r_grad(w: &[f64], r: f64, scale: f64) -> Vec<f64> {
    if r <= 2.0 {
        let c = scale / (r - 1.0);
        half_sq_grad(w, r).into_iter().map(|x| c * x).collect()
    } else {
        let c = scale * 2f64.powf(r);
        w.iter().map(|&x| c * sign_plus(x) * x.abs().powf(r - 1.0)).collect()
    }
}

fn psi_r_conj_grad(theta: &[f64], r: f64, scale: f64) -> Vec<f64> {
    if r <= 2.0 {
        let c = (r - 1.0) / scale;
        half_sq_grad(theta, r / (r - 1.0)).into_iter().map(|x| c * x).collect()
    } else {
        let c = scale * 2f64.powf(r);
        theta
            .iter()
            .map(|&x| if x == 0.0 { 0.0 } else { sign_plus(x) * (x.abs() / c).powf(1.0 / (r - 1.0)) })
            .collect()
    }
}

fn softmax(theta: &[f64]) -> Vec<f64> {
    let m = theta.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = theta.iter().map(|t| (t - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// `∇(½‖w‖²_{q,r})`.
fn group_half_sq_grad(w: &[f64], q: f64, r: f64, rows: usize, cols: usize) -> Vec<f64> {
    let a: Vec<f64> = (0..cols).map(|j| lp_norm(&column(w, rows, cols, j), Exponent::Finite(q))).collect();
    let n = lp_norm(&a, Exponent::Finite(r));
    let mut g = vec![0.0; rows * cols];
    if n == 0.0 {
        return g;
    }
    for j in 0..cols {
        if a[j] == 0.0 {
            continue;
        }
        let outer = n * (a[j] / n).powf(r - 1.0);
        for i in 0..rows {
            let x = w[i * cols + j];
            g[i * cols + j] = outer * sign_plus(x) * (x.abs() / a[j]).powf(q - 1.0);
        }
    }
    g
}

pub fn psi_eval(reg: &Regularizer, w: &[f64]) -> Result<f64> {
    reg.eval(w)
}

pub fn psi_grad(reg: &Regularizer, w: &[f64]) -> Result<Vec<f64>> {
    reg.grad(w)
}

pub fn psi_conj_grad(reg: &Regularizer, theta: &[f64]) -> Result<Vec<f64>> {
    reg.conj_grad(theta)
}

pub fn d_p_upper(reg: &Regularizer, w_ball: &BallSpec, p: f64) -> Result<f64> {
    let sup = match reg.sup_over_w {
        Some(s) => s,
        None => sup_over_ball(reg, w_ball)?,
    };
    if !(p > 1.0 && p <= 2.0) {
        return Err(Error::InvalidParameter(format!("p must lie in (1, 2], got {p}")));
    }
    Ok(sup.value.powf((p - 1.0) / p))
}

fn recip(e: Exponent) -> f64 {
    e.recip()
}

/// Largest profile norm over the ball, when known in closed form.
fn max_profile_norm(profile: Profile, ball: &BallSpec) -> Option<f64> {
    let rad = ball.radius;
    match (profile, &ball.kind) {
        (Profile::Lp(r), BallKind::Lp { p, dim }) => {
            Some(rad * (*dim as f64).powf((1.0 / r - recip(*p)).max(0.0)))
        }
        (Profile::Lp(_), BallKind::Simplex { .. }) => Some(rad),
        (Profile::Lp(r), BallKind::VertexHull { vertices }) => Some(
            rad * vertices.iter().map(|v| lp_norm(v, Exponent::Finite(r))).fold(0.0, f64::max),
        ),
        (Profile::Group { q, r, rows, cols }, BallKind::GroupQr { q: q1, r: r1, rows: k1, cols: d1 })
            if rows == *k1 && cols == *d1 =>
        {
            Some(
                rad * (rows as f64).powf((1.0 / q - recip(*q1)).max(0.0))
                    * (cols as f64).powf((1.0 / r - recip(*r1)).max(0.0)),
            )
        }
        (Profile::Group { q, r, rows, cols }, BallKind::Lp { p: Exponent::Infinity, .. }) => {
            Some(rad * (rows as f64).powf(1.0 / q) * (cols as f64).powf(1.0 / r))
        }
        (Profile::Group { .. }, BallKind::Lp { p, .. }) if p.is_one() => Some(rad),
        (Profile::Schatten { r, rows, cols }, BallKind::Schatten { p, rows: k1, cols: d1 })
            if rows == *k1 && cols == *d1 =>
        {
            Some(rad * (rows.min(cols) as f64).powf((1.0 / r - recip(*p)).max(0.0)))
        }
        _ => None,
    }
}

/// `sup_{w∈W} Ψ(w)`. Closed form where the regularizer is a function of a
/// norm whose maximum over `W` is known; otherwise the maximum over the
/// enumerated extreme points (exact, Ψ being convex), or a multi-start
/// conditional-gradient ascent flagged as a lower bound.
pub fn sup_over_ball(reg: &Regularizer, w_ball: &BallSpec) -> Result<SupValue> {
    check_dim(reg.dim, w_ball.dim())?;
    if let RegularizerKind::Entropy = reg.kind {
        return match w_ball.kind {
            BallKind::Simplex { dim } if w_ball.radius == 1.0 => Ok(SupValue { value: (dim as f64).ln(), exact: true }),
            _ => Err(Error::Unsupported("the entropy regularizer is defined on the unit simplex".into())),
        };
    }
    if let BallKind::Interp2 { a, b } = &w_ball.kind {
        let sa = sup_over_ball(reg, a)?;
        let sb = sup_over_ball(reg, b)?;
        return Ok(SupValue { value: sa.value.max(sb.value), exact: sa.exact && sb.exact });
    }
    if let Some(t) = reg.profile().and_then(|p| max_profile_norm(p, w_ball)) {
        let value = reg.profile_value(t);
        return finite_sup(SupValue { value, exact: true });
    }
    let ext = w_ball.extreme_points(EXTREME_LIMIT)?;
    let mut best = f64::NEG_INFINITY;
    for v in &ext.points {
        best = best.max(reg.eval(v)?);
    }
    if ext.exhaustive {
        return finite_sup(SupValue { value: best.max(0.0), exact: true });
    }
    let d = reg.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0f_a5ce);
    for s in 0..ASCENT_STARTS {
        let dir: Vec<f64> = if s < 2 * d {
            let mut e = vec![0.0; d];
            e[s / 2] = if s % 2 == 0 { 1.0 } else { -1.0 };
            e
        } else {
            (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
        };
        let mut w = w_ball.support_point(&dir)?;
        let mut val = reg.eval(&w)?;
        for _ in 0..100 {
            let g = reg.grad(&w)?;
            let next = w_ball.support_point(&g)?;
            let nv = reg.eval(&next)?;
            if nv <= val * (1.0 + 1e-15) {
                break;
            }
            w = next;
            val = nv;
        }
        best = best.max(val);
    }
    finite_sup(SupValue { value: best.max(0.0), exact: false })
}

fn finite_sup(s: SupValue) -> Result<SupValue> {
    if !s.value.is_finite() {
        return Err(Error::Unbounded("regularizer is unbounded on the constraint ball".into()));
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn eval_examples() {
        let r2 = Regularizer::psi_r(2.0, 2).unwrap();
        assert_eq!(r2.eval(&[3.0, 4.0]).unwrap(), 12.5);
        let r3 = Regularizer::psi_r(3.0, 3).unwrap();
        assert!(close(r3.eval(&[1.0, 0.0, 0.0]).unwrap(), 8.0 / 3.0, 1e-14));
        for reg in [r2.clone(), Regularizer::entropy(2), Regularizer::psi_r(1.5, 2).unwrap()] {
            assert_eq!(reg.eval(&[0.0, 0.0]).unwrap(), 0.0);
        }
        let vh = Regularizer::vertex_hull_squared_with(
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            2.0,
            1.0,
            BallSpec::l2(2),
        )
        .unwrap();
        assert!(close(vh.eval(&[1.0, 1.0]).unwrap(), 1.0, 1e-12));
    }

    #[test]
    fn entropy_rejects_negative() {
        assert!(matches!(Regularizer::entropy(2).eval(&[-0.1, 1.1]), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn grad_examples() {
        let r2 = Regularizer::psi_r(2.0, 2).unwrap();
        assert_eq!(r2.grad(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        let g = Regularizer::entropy(2).grad(&[0.5, 0.5]).unwrap();
        assert_eq!(g[0], g[1]);
        let r15 = Regularizer::psi_r(1.5, 2).unwrap();
        let w = [1.0, 2.0];
        let g = r15.grad(&w).unwrap();
        let h = 1e-6;
        for i in 0..2 {
            let mut a = w;
            let mut b = w;
            a[i] += h;
            b[i] -= h;
            let fd = (r15.eval(&a).unwrap() - r15.eval(&b).unwrap()) / (2.0 * h);
            assert!((fd - g[i]).abs() <= 1e-5 * (1.0 + fd.abs()));
        }
    }

    #[test]
    fn conj_grad_examples() {
        assert_eq!(Regularizer::euclidean(2).conj_grad(&[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
        assert_eq!(Regularizer::entropy(2).conj_grad(&[0.0, 0.0]).unwrap(), vec![0.5, 0.5]);
        for r in [1.5, 3.0] {
            let reg = Regularizer::psi_r(r, 3).unwrap();
            let w = [0.2, -0.7, 1.3];
            let back = reg.conj_grad(&reg.grad(&w).unwrap()).unwrap();
            for (a, b) in back.iter().zip(&w) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn sup_examples() {
        let r2 = Regularizer::psi_r(2.0, 3).unwrap();
        assert!(close(sup_over_ball(&r2, &BallSpec::l2(3)).unwrap().value, 0.5, 1e-15));
        assert!(close(sup_over_ball(&r2, &BallSpec::l1(3)).unwrap().value, 0.5, 1e-15));
        let e = Regularizer::entropy(4);
        assert!(close(sup_over_ball(&e, &BallSpec::simplex(4)).unwrap().value, 4f64.ln(), 1e-15));
        assert!(sup_over_ball(&e, &BallSpec::l1(4)).is_err());
    }

    #[test]
    fn sup_by_vertices_matches_closed_form() {
        let reg = Regularizer::psi_r(1.5, 3).unwrap();
        let closed = sup_over_ball(&reg, &BallSpec::linf(3)).unwrap().value;
        let hull = BallSpec::vertex_hull(
            (0..8)
                .map(|m: usize| (0..3).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
                .collect(),
        )
        .unwrap();
        let by_vertex = sup_over_ball(&reg, &hull).unwrap();
        assert!(by_vertex.exact);
        assert!(close(closed, by_vertex.value, 1e-12));
    }

    #[test]
    fn d_p_upper_examples() {
        let r2 = Regularizer::psi_r(2.0, 3).unwrap().bind(&BallSpec::l2(3)).unwrap();
        assert!(close(r2.d_p_upper(2.0).unwrap(), 0.5f64.sqrt(), 1e-15));
        let e = Regularizer::entropy(4).bind(&BallSpec::simplex(4)).unwrap();
        assert!(close(e.d_p_upper(2.0).unwrap(), 4f64.ln().sqrt(), 1e-15));
        assert!(e.d_p_upper(2.5).is_err());
    }

    #[test]
    fn group_d2_near_paper_rate() {
        // k = 4, q = 2, d = 16 against k^{1−1/q}·√log d
        let (k, d) = (4, 16);
        let reg = Regularizer::group_for_linf(2.0, k, d).unwrap();
        let w_ball = BallSpec::group(Exponent::Finite(2.0), Exponent::Finite(1.0), k, d);
        let d2 = d_p_upper(&reg, &w_ball, 2.0).unwrap();
        let reference = 2.0 * (d as f64).ln().sqrt();
        let ratio = d2 / reference;
        assert!((0.1..=16.0).contains(&ratio), "{ratio}");
    }

    #[test]
    fn schatten_round_trip() {
        let reg = Regularizer::schatten_psi_r(1.5, 2, 3).unwrap();
        assert!(!reg.certified);
        let w = [0.3, -0.1, 0.7, 1.2, 0.4, -0.5];
        let back = reg.conj_grad(&reg.grad(&w).unwrap()).unwrap();
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
