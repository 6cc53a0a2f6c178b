//! Closed-form choices for ℓp non-dual pairs `W = B_{p1}`, `X = B_{p2}`.

use super::Regularizer;
use crate::error::{Error, Result};
use crate::geometry::{BallKind, BallSpec, Exponent};

const GRID_POINTS: usize = 200;
const GRID_LO: f64 = 1.0 + 1e-3;
const GRID_HI: f64 = 64.0;

fn inv(p: f64) -> Result<f64> {
    Ok(Exponent::new(p)?.recip())
}

/// `1/q₂ = 1 − 1/p₂`.
fn inv_q2(p2: f64) -> Result<f64> {
    Ok(1.0 - inv(p2)?)
}

/// `ψ̃_r = d^{Q·max(1/q₂ − 1/r, 0)}·ψ_r` with `Q = max(r, 2)`, uniformly
/// convex with respect to `‖·‖_{q₂}`, the dual norm of `X = B_{p2}`.
pub fn scaled_psi_for_lp_pair(p1: f64, p2: f64, d: usize, r: f64) -> Result<Regularizer> {
    Exponent::new(p1)?;
    if d == 0 {
        return Err(Error::InvalidParameter("d must be ≥ 1".into()));
    }
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::InvalidExponent(r));
    }
    let big_q = r.max(2.0);
    let scale = (d as f64).powf(big_q * (inv_q2(p2)? - 1.0 / r).max(0.0));
    let x_ball = BallSpec::new(BallKind::Lp { p: Exponent::new(p2)?, dim: d })?;
    Regularizer::scaled_psi_r(r, scale, x_ball)
}

/// `2·max(2, 1/√(2(r−1)))·d^{max(1/q₂−1/r,0) + max(1/r−1/p₁,0)} / n^{1/max(r,2)}`.
pub fn lp_regret_bound(p1: f64, p2: f64, d: usize, r: f64, n: usize) -> Result<f64> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter("n and d must be ≥ 1".into()));
    }
    if !(r > 1.0) || !r.is_finite() {
        return Err(Error::InvalidExponent(r));
    }
    let e = (inv_q2(p2)? - 1.0 / r).max(0.0) + (1.0 / r - inv(p1)?).max(0.0);
    let lead = 2.0 * 2f64.max(1.0 / (2.0 * (r - 1.0)).sqrt());
    Ok(lead * (d as f64).powf(e) / (n as f64).powf(1.0 / r.max(2.0)))
}

fn grid() -> impl Iterator<Item = f64> {
    let (a, b) = (GRID_LO.ln(), GRID_HI.ln());
    (0..GRID_POINTS).map(move |i| (a + (b - a) * i as f64 / (GRID_POINTS - 1) as f64).exp())
}

fn argmin_toward_two(cands: impl Iterator<Item = f64>, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut best_r: f64 = 2.0;
    let mut best = f(2.0)?;
    for r in cands {
        let v = f(r)?;
        let tie = (v - best).abs() <= 1e-12 * best.abs();
        if (v < best && !tie) || (tie && (r - 2.0).abs() < (best_r - 2.0).abs()) {
            best = v;
            best_r = r;
        }
    }
    Ok(best_r)
}

/// Minimizes [`lp_regret_bound`] over a log grid on `[1 + 1e−3, 64]`, ties
/// toward `r = 2`.
pub fn pick_r(p1: f64, p2: f64, d: usize, n: usize) -> Result<f64> {
    argmin_toward_two(grid(), |r| lp_regret_bound(p1, p2, d, r, n))
}

/// The `D₂` bound `d^{max(1/q₂−1/r,0) + max(1/r−1/p₁,0)} / √(2(r−1))` of `ψ̃_r`.
pub fn d2_bound(p1: f64, p2: f64, d: usize, r: f64) -> Result<f64> {
    let e = (inv_q2(p2)? - 1.0 / r).max(0.0) + (1.0 / r - inv(p1)?).max(0.0);
    Ok((d as f64).powf(e) / (2.0 * (r - 1.0)).sqrt())
}

/// Minimizes [`d2_bound`] over `r ∈ (1, 2]`: the grid points below 2 plus the
/// breakpoints `p₁`, `q₂` and `log d/(log d − 1)` when they fall in range.
pub fn pick_r_for_d2(p1: f64, p2: f64, d: usize) -> Result<f64> {
    let q2 = Exponent::new(p2)?.conjugate().as_f64();
    let ld = (d as f64).ln();
    let mut cands: Vec<f64> = grid().filter(|&r| r <= 2.0).collect();
    for c in [p1, q2, if ld > 1.0 { ld / (ld - 1.0) } else { 2.0 }] {
        if c > 1.0 && c <= 2.0 {
            cands.push(c);
        }
    }
    argmin_toward_two(cands.into_iter(), |r| d2_bound(p1, p2, d, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regularizers::RegularizerKind;

    fn scale_of(r: &Regularizer) -> f64 {
        match r.kind {
            RegularizerKind::ScaledPsiR { scale, .. } => scale,
            _ => panic!(),
        }
    }

    #[test]
    fn scaled_psi_examples() {
        assert_eq!(scale_of(&scaled_psi_for_lp_pair(2.0, 2.0, 10, 2.0).unwrap()), 1.0);
        assert_eq!(scale_of(&scaled_psi_for_lp_pair(2.0, 1.0, 10, 3.0).unwrap()), 1.0);
        assert!((scale_of(&scaled_psi_for_lp_pair(2.0, 2.0, 16, 4.0).unwrap()) - 16.0).abs() < 1e-12);
        assert!(scaled_psi_for_lp_pair(0.5, 2.0, 4, 2.0).is_err());
    }

    #[test]
    fn regret_bound_examples() {
        assert!((lp_regret_bound(2.0, 2.0, 7, 2.0, 100).unwrap() - 0.4).abs() < 1e-12);
        assert!((lp_regret_bound(1.0, 1.0, 8, 2.0, 100).unwrap() - 0.4).abs() < 1e-12);
        assert!((lp_regret_bound(4.0, 2.0, 16, 2.0, 10_000).unwrap() - 0.08).abs() < 1e-12);
    }

    #[test]
    fn pick_r_examples() {
        assert_eq!(pick_r(2.0, 2.0, 10, 1000).unwrap(), 2.0);
        assert_eq!(pick_r(3.0, 1.5, 1, 1000).unwrap(), 2.0);
        // ℓ1 learner against ℓ∞-bounded data: the logarithmic regime
        let r = pick_r(1.0, f64::INFINITY, 1_000_000, 1000).unwrap();
        assert!(r > 1.0 && r < 1.2, "{r}");
        let bound = lp_regret_bound(1.0, f64::INFINITY, 1_000_000, r, 1000).unwrap();
        let reference = ((1e6f64).ln() / 1000.0).sqrt();
        assert!(bound / reference < 16.0);
    }

    #[test]
    fn d2_pick_stays_in_range() {
        for (p1, p2) in [(1.5, 1.5), (1.5, 2.5), (2.0, 4.0), (4.0, 1.5), (4.0, 2.0), (1.0, 1.0)] {
            let r = pick_r_for_d2(p1, p2, 64).unwrap();
            assert!(r > 1.0 && r <= 2.0);
        }
    }
}
