//! Infimal convolution of two weighted ℓp norms,
//! `min_u  c_a‖u‖_{p_a} + c_b‖v − u‖_{p_b}`,
//! solved by ADMM with a weak-duality certificate. Both interpolation norms
//! reduce to this problem: the type-two gauge directly, the type-one support
//! function through a concave maximization over the split weight.

use super::lp::{dot, lp_norm, lp_support_point, project_lp_ball, Exponent};
use crate::error::{Error, Result};

const MAX_ITERS: usize = 200_000;
const REL_GAP: f64 = 1e-12;
const ACCEPT_GAP: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct InfConv {
    /// Best decomposition value found (an upper bound on the minimum).
    pub value: f64,
    /// Certified lower bound from the dual point `cert`.
    pub lower: f64,
    /// Minimizing `u` (the part charged to the first norm).
    pub split: Vec<f64>,
    /// Dual certificate `x` with `‖x‖_{p_a*} ≤ c_a`, `‖x‖_{p_b*} ≤ c_b`.
    pub cert: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct WeightedNorm {
    pub weight: f64,
    pub p: Exponent,
}

impl WeightedNorm {
    fn eval(&self, v: &[f64]) -> f64 {
        if self.weight == 0.0 {
            0.0
        } else {
            self.weight * lp_norm(v, self.p)
        }
    }

    /// prox of `λ·weight·‖·‖_p` by the Moreau decomposition.
    fn prox(&self, z: &[f64], lambda: f64) -> Vec<f64> {
        let proj = project_lp_ball(z, self.p.conjugate(), lambda * self.weight);
        z.iter().zip(&proj).map(|(a, b)| a - b).collect()
    }

    fn dual(&self, x: &[f64]) -> f64 {
        lp_norm(x, self.p.conjugate())
    }
}

fn scale_to_feasible(x: &mut [f64], a: &WeightedNorm, b: &WeightedNorm) {
    let mut s: f64 = 1.0;
    for n in [a, b] {
        let d = n.dual(x);
        if d > n.weight {
            s = s.min(if d > 0.0 { n.weight / d } else { 0.0 });
        }
    }
    if s < 1.0 {
        for v in x.iter_mut() {
            *v *= s;
        }
    }
}

pub fn inf_conv(a: WeightedNorm, b: WeightedNorm, v: &[f64]) -> Result<InfConv> {
    let d = v.len();
    let obj = |u: &[f64]| {
        let rest: Vec<f64> = v.iter().zip(u).map(|(x, y)| x - y).collect();
        a.eval(u) + b.eval(&rest)
    };

    let zero = vec![0.0; d];
    let (mut best_u, mut best_val) = {
        let v0 = obj(&zero);
        let v1 = obj(v);
        if v1 < v0 {
            (v.to_vec(), v1)
        } else {
            (zero.clone(), v0)
        }
    };
    let mut best_lb = f64::NEG_INFINITY;
    let mut best_x = zero.clone();
    let try_cert = |x: &mut Vec<f64>, best_lb: &mut f64, best_x: &mut Vec<f64>| {
        scale_to_feasible(x, &a, &b);
        let lb = dot(x, v);
        if lb > *best_lb {
            *best_lb = lb;
            *best_x = x.clone();
        }
    };
    for n in [&a, &b] {
        let mut x: Vec<f64> = lp_support_point(v, n.p.conjugate())
            .into_iter()
            .map(|t| t * n.weight)
            .collect();
        try_cert(&mut x, &mut best_lb, &mut best_x);
    }
    let converged = |ub: f64, lb: f64| ub - lb <= REL_GAP * ub.abs().max(1e-300) || ub <= lb;
    if converged(best_val, best_lb) || best_val == 0.0 {
        return Ok(InfConv { value: best_val, lower: best_lb.max(0.0).min(best_val), split: best_u, cert: best_x });
    }

    let scale = lp_norm(v, Exponent::Infinity).max(1e-300);
    let mut rho = (a.weight + b.weight).max(1e-12) / scale;
    let mut u = best_u.clone();
    let mut z: Vec<f64> = v.iter().zip(&u).map(|(x, y)| x - y).collect();
    let mut w = vec![0.0; d];
    for it in 0..MAX_ITERS {
        let tu: Vec<f64> = (0..d).map(|i| v[i] - z[i] - w[i]).collect();
        u = a.prox(&tu, 1.0 / rho);
        let z_old = z.clone();
        let tz: Vec<f64> = (0..d).map(|i| v[i] - u[i] - w[i]).collect();
        z = b.prox(&tz, 1.0 / rho);
        let mut r2 = 0.0;
        for i in 0..d {
            let r = u[i] + z[i] - v[i];
            w[i] += r;
            r2 += r * r;
        }
        let s2: f64 = z.iter().zip(&z_old).map(|(x, y)| rho * rho * (x - y) * (x - y)).sum();

        if it % 10 == 0 {
            let val = obj(&u);
            if val < best_val {
                best_val = val;
                best_u = u.clone();
            }
            let mut x: Vec<f64> = w.iter().map(|wi| -rho * wi).collect();
            try_cert(&mut x, &mut best_lb, &mut best_x);
            if converged(best_val, best_lb) {
                break;
            }
        }
        if it % 50 == 49 {
            let (r, s) = (r2.sqrt(), s2.sqrt());
            let factor = if r > 10.0 * s {
                2.0
            } else if s > 10.0 * r {
                0.5
            } else {
                1.0
            };
            if factor != 1.0 {
                rho *= factor;
                for wi in w.iter_mut() {
                    *wi /= factor;
                }
            }
        }
    }
    let gap = best_val - best_lb;
    if gap > ACCEPT_GAP * best_val.max(1.0) {
        return Err(Error::NotConverged { iterations: MAX_ITERS, residual: gap });
    }
    Ok(InfConv { value: best_val, lower: best_lb.min(best_val), split: best_u, cert: best_x })
}

/// Support function of `{v : ‖v‖_{p_a}/R_a + ‖v‖_{p_b}/R_b ≤ 1}` at `x`, with the
/// maximizing point. Maximizes the concave split-weight function by golden
/// section.
pub fn sum_norm_support(
    pa: Exponent,
    ra: f64,
    pb: Exponent,
    rb: f64,
    x: &[f64],
) -> Result<(f64, Vec<f64>)> {
    let phi = |theta: f64| -> Result<InfConv> {
        inf_conv(
            WeightedNorm { weight: theta * ra, p: pa.conjugate() },
            WeightedNorm { weight: (1.0 - theta) * rb, p: pb.conjugate() },
            x,
        )
    };
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut c = hi - g * (hi - lo);
    let mut dpt = lo + g * (hi - lo);
    let mut fc = phi(c)?;
    let mut fd = phi(dpt)?;
    let mut best = if fc.value > fd.value { fc.clone() } else { fd.clone() };
    for _ in 0..80 {
        if fc.value > fd.value {
            hi = dpt;
            dpt = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = phi(c)?;
        } else {
            lo = c;
            c = dpt;
            fc = fd;
            dpt = lo + g * (hi - lo);
            fd = phi(dpt)?;
        }
        for cand in [&fc, &fd] {
            if cand.value > best.value {
                best = cand.clone();
            }
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    for theta in [0.0, 1.0] {
        let f = phi(theta)?;
        if f.value > best.value {
            best = f;
        }
    }
    // The certificate lies in the ball and attains the lower bound.
    let point = best.cert.clone();
    let gauge = lp_norm(&point, pa) / ra + lp_norm(&point, pb) / rb;
    let point: Vec<f64> = if gauge > 1.0 { point.iter().map(|t| t / gauge).collect() } else { point };
    let value = dot(x, &point).max(best.lower);
    Ok((value, point))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64) -> Exponent {
        Exponent::new(p).unwrap()
    }

    #[test]
    fn identical_components_collapse() {
        let n = WeightedNorm { weight: 1.0, p: e(1.0) };
        let r = inf_conv(n, n, &[1.0, -2.0, 3.0]).unwrap();
        assert!((r.value - 6.0).abs() < 1e-12);
    }

    #[test]
    fn l1_l2_infimal_convolution_is_l2_when_nested() {
        // conv(B1 ∪ B2) = B2
        let v = [0.3, -1.0, 2.0, 0.1];
        let r = inf_conv(
            WeightedNorm { weight: 1.0, p: e(1.0) },
            WeightedNorm { weight: 1.0, p: e(2.0) },
            &v,
        )
        .unwrap();
        assert!((r.value - lp_norm(&v, e(2.0))).abs() < 1e-9, "{}", r.value);
    }

    #[test]
    fn scaled_components() {
        // 2‖u‖_1 + ‖v − u‖_∞ on v = (1, 1): u = 0 gives 1, u = v gives 4.
        let r = inf_conv(
            WeightedNorm { weight: 2.0, p: e(1.0) },
            WeightedNorm { weight: 1.0, p: Exponent::Infinity },
            &[1.0, 1.0],
        )
        .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn sum_norm_support_matches_single_norm_limit() {
        // ‖v‖_2 + ‖v‖_2 ≤ 1 is the radius-½ ℓ2 ball; support is ½‖x‖_2.
        let x = [3.0, 4.0];
        let (h, pt) = sum_norm_support(e(2.0), 1.0, e(2.0), 1.0, &x).unwrap();
        assert!((h - 2.5).abs() < 1e-8, "{h}");
        assert!((lp_norm(&pt, e(2.0)) * 2.0 - 1.0).abs() < 1e-6);
    }
}
