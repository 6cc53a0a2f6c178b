//! The `(W, q)` norm of a vertex hull,
//! `‖w‖_{W,q} = inf{‖α‖_q : Σ αᵢ vᵢ = w}`, evaluated through its dual
//! `½‖w‖²_{W,q} = max_θ ⟨θ, w⟩ − ½‖Vᵀθ‖²_p` with `p = q/(q−1)`.
//! The maximizer `θ*` is the gradient of `½‖·‖²_{W,q}` at `w`.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};
use crate::geometry::lp::sign_plus;
use crate::geometry::{lp_norm, Exponent};

const MAX_NEWTON: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct VertexNorm {
    dim: usize,
    vertices: Vec<Vec<f64>>,
    q: f64,
    p: f64,
}

#[derive(Debug, Clone)]
pub struct VertexSolution {
    /// `½‖w‖²_{W,q}`.
    pub half_sq: f64,
    /// Dual maximizer, equal to `∇(½‖·‖²_{W,q})(w)`.
    pub theta: Vec<f64>,
}

impl VertexNorm {
    pub fn new(vertices: Vec<Vec<f64>>, q: f64) -> Result<Self> {
        if !(q > 1.0 && q <= 2.0) {
            return Err(Error::InvalidParameter(format!("(W,q) norm needs q in (1, 2], got {q}")));
        }
        let dim = vertices.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 || vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidParameter("vertices must share a positive dimension".into()));
        }
        Ok(VertexNorm { dim, vertices, q, p: q / (q - 1.0) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn count(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    fn vt(&self, theta: &[f64]) -> Vec<f64> {
        self.vertices.iter().map(|v| v.iter().zip(theta).map(|(a, b)| a * b).sum()).collect()
    }

    fn v_times(&self, a: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (v, &ai) in self.vertices.iter().zip(a) {
            if ai != 0.0 {
                for (o, x) in out.iter_mut().zip(v) {
                    *o += ai * x;
                }
            }
        }
        out
    }

    /// Dual norm `‖Vᵀθ‖_p`.
    pub fn dual(&self, theta: &[f64]) -> f64 {
        lp_norm(&self.vt(theta), Exponent::Finite(self.p))
    }

    /// `∇(½‖·‖²_{W,q})*(θ) = V ∇(½‖·‖²_p)(Vᵀθ)`.
    pub fn dual_half_sq_grad(&self, theta: &[f64]) -> Vec<f64> {
        let u = self.vt(theta);
        self.v_times(&half_sq_grad(&u, self.p))
    }

    pub fn norm(&self, w: &[f64]) -> Result<f64> {
        Ok((2.0 * self.solve(w, None)?.half_sq).max(0.0).sqrt())
    }

    /// Maximizes the dual objective by damped Newton. `hint` warm-starts `θ`.
    pub fn solve(&self, w: &[f64], hint: Option<&[f64]>) -> Result<VertexSolution> {
        check_dim(self.dim, w.len())?;
        let wn = lp_norm(w, Exponent::Infinity);
        if wn == 0.0 {
            return Ok(VertexSolution { half_sq: 0.0, theta: vec![0.0; self.dim] });
        }
        let p = self.p;
        let objective = |theta: &[f64]| -> f64 {
            let u = self.vt(theta);
            let n = lp_norm(&u, Exponent::Finite(p));
            theta.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() - 0.5 * n * n
        };
        let mut theta: Vec<f64> = match hint {
            Some(h) if h.len() == self.dim && h.iter().all(|x| x.is_finite()) => h.to_vec(),
            _ => {
                // scale w so that the objective along the ray is maximized
                let d = self.dual(w);
                if d == 0.0 {
                    return Err(Error::Unbounded("vertices are orthogonal to w".into()));
                }
                let ww: f64 = w.iter().map(|x| x * x).sum();
                w.iter().map(|x| x * ww / (d * d)).collect()
            }
        };
        let mut f = objective(&theta);
        let tol = 1e-13 * (1.0 + wn);
        for it in 0..MAX_NEWTON {
            let u = self.vt(&theta);
            let gu = half_sq_grad(&u, p);
            let vg = self.v_times(&gu);
            let grad: Vec<f64> = w.iter().zip(&vg).map(|(a, b)| a - b).collect();
            let gnorm = lp_norm(&grad, Exponent::Infinity);
            if gnorm <= tol {
                return Ok(VertexSolution { half_sq: f, theta });
            }
            let h = self.hessian(&u);
            let tr = h.trace().abs().max(1e-300);
            let mut mu = 1e-14 * tr;
            let g = DVector::from_column_slice(&grad);
            let step = loop {
                let mut hm = h.clone();
                for i in 0..self.dim {
                    hm[(i, i)] += mu;
                }
                if let Some(ch) = hm.cholesky() {
                    break ch.solve(&g);
                }
                mu = (mu * 100.0).max(1e-12 * tr);
                if mu > 1e6 * tr {
                    return Err(Error::NotConverged { iterations: it, residual: gnorm });
                }
            };
            let mut t = 1.0;
            let slope: f64 = step.iter().zip(&grad).map(|(a, b)| a * b).sum();
            let mut accepted = false;
            for _ in 0..60 {
                let cand: Vec<f64> = theta.iter().zip(step.iter()).map(|(a, b)| a + t * b).collect();
                let fc = objective(&cand);
                let flat = (fc - f).abs() <= 1e-15 * f.abs().max(1e-300);
                if flat && gnorm <= 1e-9 * (1.0 + wn) {
                    // no measurable progress left
                    return Ok(VertexSolution { half_sq: f.max(fc), theta: if fc > f { cand } else { theta } });
                }
                if fc >= f + 1e-4 * t * slope || flat {
                    theta = cand;
                    f = fc.max(f);
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                // stalled at machine precision
                if gnorm <= 1e-9 * (1.0 + wn) {
                    return Ok(VertexSolution { half_sq: f, theta });
                }
                return Err(Error::NotConverged { iterations: it, residual: gnorm });
            }
            if theta.iter().any(|x| !x.is_finite()) || lp_norm(&theta, Exponent::Infinity) > 1e12 * (1.0 + wn) {
                return Err(Error::Unbounded("w lies outside the span of the vertices".into()));
            }
        }
        Err(Error::NotConverged { iterations: MAX_NEWTON, residual: f64::NAN })
    }

    /// `V H(u) Vᵀ` with `H` the Hessian of `½‖·‖²_p` at `u = Vᵀθ`.
    fn hessian(&self, u: &[f64]) -> DMatrix<f64> {
        let p = self.p;
        let n = lp_norm(u, Exponent::Finite(p));
        let d = self.dim;
        let mut h = DMatrix::zeros(d, d);
        if n == 0.0 {
            for v in &self.vertices {
                for i in 0..d {
                    for j in 0..d {
                        h[(i, j)] += v[i] * v[j];
                    }
                }
            }
            return h;
        }
        let mut a = vec![0.0; d];
        for (v, &ui) in self.vertices.iter().zip(u) {
            let r = ui.abs() / n;
            let diag = (p - 1.0) * if p == 2.0 { 1.0 } else { r.powf(p - 2.0) };
            let ai = sign_plus(ui) * r.powf(p - 1.0);
            for i in 0..d {
                a[i] += ai * v[i];
                if diag != 0.0 {
                    for j in 0..d {
                        h[(i, j)] += diag * v[i] * v[j];
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                h[(i, j)] += (2.0 - p) * a[i] * a[j];
            }
        }
        h
    }
}

/// `∇(½‖u‖²_p)` for finite `p > 1`.
pub(crate) fn half_sq_grad(u: &[f64], p: f64) -> Vec<f64> {
    let n = lp_norm(u, Exponent::Finite(p));
    if n == 0.0 {
        return vec![0.0; u.len()];
    }
    if p == 2.0 {
        return u.to_vec();
    }
    u.iter().map(|&x| n * sign_plus(x) * (x.abs() / n).powf(p - 1.0)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn signed_basis() -> Vec<Vec<f64>> {
        vec![vec![1.0, 0.0], vec![0.0, 1.0]]
    }

    #[test]
    fn signed_basis_with_q2_is_euclidean() {
        let vn = VertexNorm::new(signed_basis(), 2.0).unwrap();
        let s = vn.solve(&[1.0, 1.0], None).unwrap();
        assert!((s.half_sq - 1.0).abs() < 1e-12);
        assert!((s.theta[0] - 1.0).abs() < 1e-10 && (s.theta[1] - 1.0).abs() < 1e-10);
    }

    #[test]
    fn matches_lp_norm_for_identity_vertices() {
        // V = I gives ‖w‖_{W,q} = ‖w‖_q
        let vn = VertexNorm::new(vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]], 1.4).unwrap();
        let w = [0.3, -1.1, 0.5];
        let n = vn.norm(&w).unwrap();
        assert!((n - lp_norm(&w, Exponent::Finite(1.4))).abs() < 1e-10, "{n}");
    }

    #[test]
    fn gradient_round_trip() {
        let verts = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![0.5, 2.0]];
        let vn = VertexNorm::new(verts, 1.5).unwrap();
        let w = [0.4, -0.7];
        let s = vn.solve(&w, None).unwrap();
        let back = vn.dual_half_sq_grad(&s.theta);
        for (a, b) in back.iter().zip(&w) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn outside_span_is_unbounded() {
        let vn = VertexNorm::new(vec![vec![1.0, 0.0]], 2.0).unwrap();
        assert!(vn.solve(&[0.0, 1.0], None).is_err());
    }
}
