//! One-sided (Hestenes) Jacobi SVD for small dense matrices stored row-major.

use crate::error::{Error, Result};

/// Thin SVD `A = U diag(σ) Vᵀ` with `k = min(rows, cols)` triplets, singular
/// values nonincreasing. `u` is `rows × k`, `v` is `cols × k`, both row-major.
#[derive(Debug, Clone)]
pub struct Svd {
    pub rows: usize,
    pub cols: usize,
    pub u: Vec<f64>,
    pub sigma: Vec<f64>,
    pub v: Vec<f64>,
}

impl Svd {
    pub fn rank_k(&self) -> usize {
        self.sigma.len()
    }

    /// `U diag(s) Vᵀ` for replacement singular values `s`.
    pub fn recompose(&self, s: &[f64]) -> Vec<f64> {
        let k = self.rank_k();
        let mut out = vec![0.0; self.rows * self.cols];
        for i in 0..self.rows {
            for j in 0..self.cols {
                let mut acc = 0.0;
                for l in 0..k {
                    acc += self.u[i * k + l] * s[l] * self.v[j * k + l];
                }
                out[i * self.cols + j] = acc;
            }
        }
        out
    }
}

pub fn schatten_singular_values(m: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    Ok(svd(m, rows, cols)?.sigma)
}

pub fn svd(m: &[f64], rows: usize, cols: usize) -> Result<Svd> {
    if m.len() != rows * cols {
        return Err(Error::DimensionMismatch { expected: rows * cols, got: m.len() });
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    if rows >= cols {
        Ok(jacobi_tall(m, rows, cols))
    } else {
        let mut t = vec![0.0; rows * cols];
        for i in 0..rows {
            for j in 0..cols {
                t[j * rows + i] = m[i * cols + j];
            }
        }
        let s = jacobi_tall(&t, cols, rows);
        Ok(Svd { rows, cols, u: s.v, sigma: s.sigma, v: s.u })
    }
}

fn jacobi_tall(m: &[f64], rows: usize, cols: usize) -> Svd {
    let n = cols;
    // column-major working copy
    let mut a: Vec<Vec<f64>> = (0..n).map(|j| (0..rows).map(|i| m[i * cols + j]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let alpha: f64 = a[p].iter().map(|x| x * x).sum();
                let beta: f64 = a[q].iter().map(|x| x * x).sum();
                let gamma: f64 = a[p].iter().zip(&a[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..rows {
                    let (xp, xq) = (a[p][i], a[q][i]);
                    a[p][i] = c * xp - s * xq;
                    a[q][i] = s * xp + c * xq;
                }
                for i in 0..n {
                    let (xp, xq) = (v[p][i], v[q][i]);
                    v[p][i] = c * xp - s * xq;
                    v[q][i] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sig: Vec<(f64, usize)> = a
        .iter()
        .enumerate()
        .map(|(j, col)| (col.iter().map(|x| x * x).sum::<f64>().sqrt(), j))
        .collect();
    sig.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap().then(x.1.cmp(&y.1)));
    let k = n;
    let mut u = vec![0.0; rows * k];
    let mut vv = vec![0.0; cols * k];
    let mut sigma = Vec::with_capacity(k);
    for (l, &(s, j)) in sig.iter().enumerate() {
        sigma.push(s);
        for i in 0..rows {
            u[i * k + l] = if s > 0.0 { a[j][i] / s } else { 0.0 };
        }
        for i in 0..cols {
            vv[i * k + l] = v[j][i];
        }
    }
    Svd { rows, cols, u, sigma, v: vv }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal() {
        let s = schatten_singular_values(&[2.0, 0.0, 0.0, 3.0], 2, 2).unwrap();
        assert!((s[0] - 3.0).abs() < 1e-14 && (s[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn identity() {
        let s = schatten_singular_values(&[1.0, 0.0, 0.0, 1.0], 2, 2).unwrap();
        assert_eq!(s, vec![1.0, 1.0]);
    }

    #[test]
    fn recomposition_wide_and_tall() {
        let m = [1.0, 2.0, -0.5, 0.3, 4.0, 1.0];
        for (r, c) in [(2, 3), (3, 2)] {
            let s = svd(&m, r, c).unwrap();
            let back = s.recompose(&s.sigma);
            for (x, y) in back.iter().zip(&m) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_nan() {
        assert!(svd(&[f64::NAN, 0.0, 0.0, 1.0], 2, 2).is_err());
    }
}
