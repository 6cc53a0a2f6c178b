//! Bregman projection onto a constraint ball and the dual-space step of the
//! mirror-descent update.

use crate::error::{check_dim, Error, Result};
use crate::geometry::lp::project_lp_ball;
use crate::geometry::{dot, BallKind, BallSpec};
use crate::regularizers::{Regularizer, RegularizerKind};

pub const GAP_TOL: f64 = 1e-9;
pub const MAX_FW_ITERS: usize = 10_000;
/// Largest Frank–Wolfe gap accepted without reporting nonconvergence.
pub const ACCEPT_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub point: Vec<f64>,
    /// Duality-gap estimate of the projection subproblem (0 for closed forms).
    pub residual: f64,
    pub iterations: usize,
}

impl ProjectionResult {
    fn exact(point: Vec<f64>) -> Self {
        ProjectionResult { point, residual: 0.0, iterations: 0 }
    }
}

/// `∇Ψ*(∇Ψ(w) − η·g)`.
pub fn dual_step(reg: &Regularizer, w: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
    Ok(reg.conj_grad(&dual_point(reg, w, g, eta)?)?)
}

/// `∇Ψ(w) − η·g`.
pub fn dual_point(reg: &Regularizer, w: &[f64], g: &[f64], eta: f64) -> Result<Vec<f64>> {
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::InvalidParameter(format!("step size must be > 0, got {eta}")));
    }
    check_dim(w.len(), g.len())?;
    let gw = reg.grad(w)?;
    Ok(gw.iter().zip(g).map(|(a, b)| a - eta * b).collect())
}

pub fn bregman_divergence(reg: &Regularizer, a: &[f64], b: &[f64]) -> Result<f64> {
    reg.bregman(a, b)
}

/// `argmin_{w∈W} B_Ψ(w | y)`.
pub fn bregman_project(reg: &Regularizer, w_ball: &BallSpec, y: &[f64]) -> Result<ProjectionResult> {
    project_with_dual(reg, w_ball, y, None)
}

/// Projection when `θ = ∇Ψ(y)` is already known (as it is inside the MD
/// step), which saves a gradient evaluation at `y`.
pub fn project_with_dual(
    reg: &Regularizer,
    w_ball: &BallSpec,
    y: &[f64],
    theta: Option<&[f64]>,
) -> Result<ProjectionResult> {
    check_dim(w_ball.dim(), y.len())?;
    check_dim(reg.dim, y.len())?;
    if y.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("projection input"));
    }
    let is_simplex = matches!(w_ball.kind, BallKind::Simplex { .. });
    if !is_simplex && w_ball.contains(y, 0.0)? {
        return Ok(ProjectionResult::exact(y.to_vec()));
    }
    let euclidean_like = match reg.kind {
        RegularizerKind::EuclideanHalfSq => true,
        RegularizerKind::PsiR { r } | RegularizerKind::ScaledPsiR { r, .. } => r == 2.0,
        _ => false,
    };
    match (&reg.kind, &w_ball.kind) {
        (RegularizerKind::Entropy, BallKind::Simplex { .. }) => {
            if y.iter().any(|&x| x < 0.0) {
                return Err(Error::OutsideDomain("entropy projection needs a nonnegative point".into()));
            }
            let s: f64 = y.iter().sum();
            if !(s > 0.0) {
                return Err(Error::OutsideDomain("entropy projection of the zero vector".into()));
            }
            return Ok(ProjectionResult::exact(y.iter().map(|x| x * w_ball.radius / s).collect()));
        }
        (_, BallKind::Lp { p, .. }) if euclidean_like => {
            return Ok(ProjectionResult::exact(project_lp_ball(y, *p, w_ball.radius)));
        }
        (_, BallKind::Simplex { .. }) if euclidean_like => {
            return Ok(ProjectionResult::exact(project_simplex(y, w_ball.radius)));
        }
        _ => {}
    }
    if is_simplex && w_ball.contains(y, 0.0)? {
        return Ok(ProjectionResult::exact(y.to_vec()));
    }
    if reg.is_radial_for(w_ball) {
        let g = w_ball.gauge(y)?;
        return Ok(ProjectionResult::exact(y.iter().map(|x| x / g).collect()));
    }
    let theta = match theta {
        Some(t) => t.to_vec(),
        None => reg.grad(y)?,
    };
    frank_wolfe(reg, w_ball, &theta)
}

/// Euclidean projection onto `{x ≥ 0, Σx = s}`.
pub fn project_simplex(y: &[f64], s: f64) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - s) / (j as f64 + 1.0);
        if uj - t > 0.0 {
            tau = t;
        }
    }
    y.iter().map(|x| (x - tau).max(0.0)).collect()
}

/// Pairwise Frank–Wolfe on `φ(w) = Ψ(w) − ⟨θ, w⟩` over `W`, with exact line
/// search and an active set of atoms from the linear oracle.
fn frank_wolfe(reg: &Regularizer, w_ball: &BallSpec, theta: &[f64]) -> Result<ProjectionResult> {
    let d = theta.len();
    let mut hint: Option<Vec<f64>> = None;
    let mut grad_phi = |w: &[f64], hint: &mut Option<Vec<f64>>| -> Result<Vec<f64>> {
        let (g, h) = reg.grad_hinted(w, hint.as_deref())?;
        if h.is_some() {
            *hint = h;
        }
        Ok(g.iter().zip(theta).map(|(a, b)| a - b).collect())
    };

    let first = w_ball.support_point(theta)?;
    let mut atoms: Vec<Vec<f64>> = vec![first.clone()];
    let mut weights: Vec<f64> = vec![1.0];
    let mut w = first;
    let mut gap = f64::INFINITY;
    let mut iters = 0;
    while iters < MAX_FW_ITERS {
        iters += 1;
        let g = grad_phi(&w, &mut hint)?;
        let neg: Vec<f64> = g.iter().map(|x| -x).collect();
        let s = w_ball.support_point(&neg)?;
        gap = dot(&g, &w) - dot(&g, &s);
        if gap <= GAP_TOL {
            break;
        }
        // away atom: the active atom with the largest ⟨∇φ, a⟩
        let (ai, _) = atoms
            .iter()
            .enumerate()
            .map(|(i, a)| (i, dot(&g, a)))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        let dir: Vec<f64> = (0..d).map(|k| s[k] - atoms[ai][k]).collect();
        let gmax = weights[ai];
        let slope0 = dot(&g, &dir);
        if slope0 >= 0.0 {
            break;
        }
        let gamma = line_search(&mut grad_phi, &mut hint, &w, &dir, gmax, slope0)?;
        if gamma <= 0.0 {
            break;
        }
        for k in 0..d {
            w[k] += gamma * dir[k];
        }
        weights[ai] -= gamma;
        match atoms.iter().position(|a| a == &s) {
            Some(j) => weights[j] += gamma,
            None => {
                atoms.push(s);
                weights.push(gamma);
            }
        }
        if weights[ai] <= 1e-15 {
            atoms.swap_remove(ai);
            weights.swap_remove(ai);
        }
        if iters % 64 == 0 {
            // recombine to curb drift
            let mut fresh = vec![0.0; d];
            for (a, &l) in atoms.iter().zip(&weights) {
                for k in 0..d {
                    fresh[k] += l * a[k];
                }
            }
            w = fresh;
        }
    }
    if gap > ACCEPT_RESIDUAL {
        return Err(Error::NotConverged { iterations: iters, residual: gap });
    }
    Ok(ProjectionResult { point: w, residual: gap.max(0.0), iterations: iters })
}

/// Minimizes the convex `h(γ) = φ(w + γ·dir)` on `[0, γ_max]` through the
/// sign of `h′`, by the Illinois variant of regula falsi.
fn line_search(
    grad_phi: &mut impl FnMut(&[f64], &mut Option<Vec<f64>>) -> Result<Vec<f64>>,
    hint: &mut Option<Vec<f64>>,
    w: &[f64],
    dir: &[f64],
    gmax: f64,
    slope0: f64,
) -> Result<f64> {
    let mut deriv = |gamma: f64, hint: &mut Option<Vec<f64>>| -> Result<f64> {
        let p: Vec<f64> = w.iter().zip(dir).map(|(a, b)| a + gamma * b).collect();
        Ok(dot(&grad_phi(&p, hint)?, dir))
    };
    let hmax = deriv(gmax, hint)?;
    if hmax <= 0.0 {
        return Ok(gmax);
    }
    let (mut a, mut fa) = (0.0, slope0);
    let (mut b, mut fb) = (gmax, hmax);
    let mut side = 0i32;
    for _ in 0..100 {
        let c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) || (b - a) <= 1e-15 * gmax {
            break;
        }
        let fc = deriv(c, hint)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc < 0.0 {
            a = c;
            fa = fc;
            if side == -1 {
                fb *= 0.5;
            }
            side = -1;
        } else {
            b = c;
            fb = fc;
            if side == 1 {
                fa *= 0.5;
            }
            side = 1;
        }
        if (b - a) <= 1e-14 * gmax.max(1e-300) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn near(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn projection_examples() {
        let e = Regularizer::euclidean(2);
        assert!(near(&bregman_project(&e, &BallSpec::l2(2), &[3.0, 4.0]).unwrap().point, &[0.6, 0.8], 1e-15));
        assert!(near(&bregman_project(&e, &BallSpec::l1(2), &[0.8, 0.6]).unwrap().point, &[0.6, 0.4], 1e-15));
        let inside = bregman_project(&e, &BallSpec::l2(2), &[0.1, 0.2]).unwrap();
        assert_eq!(inside.point, vec![0.1, 0.2]);
        assert_eq!(inside.residual, 0.0);
        let h = Regularizer::entropy(2);
        assert!(near(&bregman_project(&h, &BallSpec::simplex(2), &[0.2, 0.6]).unwrap().point, &[0.25, 0.75], 1e-15));
    }

    #[test]
    fn l1_projection_against_grid() {
        let e = Regularizer::euclidean(2);
        let y = [0.8, 0.6];
        let p = bregman_project(&e, &BallSpec::l1(2), &y).unwrap().point;
        let mut best = (f64::INFINITY, [0.0, 0.0]);
        for i in -1000..=1000 {
            let a = i as f64 * 1e-3;
            for s in [-1.0, 1.0] {
                let b = s * (1.0 - a.abs());
                let dist = (a - y[0]).powi(2) + (b - y[1]).powi(2);
                if dist < best.0 {
                    best = (dist, [a, b]);
                }
            }
        }
        assert!(near(&p, &best.1, 1.5e-3));
    }

    #[test]
    fn dual_step_examples() {
        let e = Regularizer::euclidean(2);
        assert!(near(&dual_step(&e, &[0.0, 0.0], &[1.0, 0.0], 0.1).unwrap(), &[-0.1, 0.0], 1e-15));
        let h = Regularizer::entropy(2);
        let w = dual_step(&h, &[0.5, 0.5], &[1.0, 0.0], 2f64.ln()).unwrap();
        assert!(near(&w, &[1.0 / 3.0, 2.0 / 3.0], 1e-15));
        let r = Regularizer::psi_r(1.5, 3).unwrap();
        let w0 = [0.2, -0.1, 0.4];
        assert!(near(&dual_step(&r, &w0, &[0.0; 3], 0.3).unwrap(), &w0, 1e-12));
        assert!(dual_step(&e, &[0.0, 0.0], &[1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn frank_wolfe_matches_radial_route() {
        // ψ_1.5 onto the ℓ1.5 ball is radial; force the generic solver on the
        // same problem through an equivalent vertex-free path.
        let reg = Regularizer::psi_r(1.5, 3).unwrap();
        let ball = BallSpec::lp(1.5, 3).unwrap();
        let y = [1.0, -0.8, 0.5];
        let radial = bregman_project(&reg, &ball, &y).unwrap().point;
        let fw = frank_wolfe(&reg, &ball, &reg.grad(&y).unwrap()).unwrap().point;
        assert!(near(&radial, &fw, 1e-4), "{radial:?} {fw:?}");
    }

    #[test]
    fn frank_wolfe_polytope_is_accurate() {
        let reg = Regularizer::psi_r(1.3, 4).unwrap();
        let ball = BallSpec::l1(4);
        let y = [0.9, -0.7, 0.3, 0.05];
        let res = bregman_project(&reg, &ball, &y).unwrap();
        assert!(res.residual <= GAP_TOL);
        assert!(ball.contains(&res.point, 1e-8).unwrap());
        let again = bregman_project(&reg, &ball, &res.point).unwrap();
        assert!(near(&again.point, &res.point, 1e-9));
    }

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5], 1.0);
        assert!(near(&p, &[1.0 / 3.0; 3], 1e-15));
        let p = project_simplex(&[2.0, 0.0], 1.0);
        assert!(near(&p, &[1.0, 0.0], 1e-15));
    }
}
