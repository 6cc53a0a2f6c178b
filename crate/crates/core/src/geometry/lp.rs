//! ℓp norms, Hölder conjugates, support points and Euclidean projections onto
//! ℓp balls.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An exponent in `[1, ∞]`. Infinity is its own variant so no arithmetic ever
/// sees an infinite float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_infinite() && p > 0.0 {
            return Ok(Exponent::Infinity);
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidExponent(p));
        }
        Ok(Exponent::Finite(p))
    }

    pub fn is_one(self) -> bool {
        matches!(self, Exponent::Finite(p) if p == 1.0)
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `1/p`, with `1/∞ = 0`.
    pub fn recip(self) -> f64 {
        match self {
            Exponent::Finite(p) => 1.0 / p,
            Exponent::Infinity => 0.0,
        }
    }

    /// Hölder conjugate: `1/p + 1/q = 1`.
    pub fn conjugate(self) -> Exponent {
        match self {
            Exponent::Infinity => Exponent::Finite(1.0),
            Exponent::Finite(p) if p == 1.0 => Exponent::Infinity,
            Exponent::Finite(p) => Exponent::Finite(p / (p - 1.0)),
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Exponent::Finite(p) => p,
            Exponent::Infinity => f64::INFINITY,
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for Exponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Exponent::Infinity),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad exponent `{s}`")))?;
                Exponent::new(p)
            }
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(p) => Exponent::new(p).map_err(serde::de::Error::custom),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Hölder conjugate of a real exponent `p ≥ 1`.
pub fn holder_conjugate(p: f64) -> Result<Exponent> {
    Ok(Exponent::new(p)?.conjugate())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    lp_norm(x, Exponent::Finite(2.0))
}

pub fn lp_norm(x: &[f64], p: Exponent) -> f64 {
    let amax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if amax == 0.0 {
        return 0.0;
    }
    match p {
        Exponent::Infinity => amax,
        Exponent::Finite(p) if p == 1.0 => x.iter().map(|v| v.abs()).sum(),
        Exponent::Finite(p) if p == 2.0 => {
            amax * x.iter().map(|v| (v / amax).powi(2)).sum::<f64>().sqrt()
        }
        Exponent::Finite(p) => {
            amax * x
                .iter()
                .map(|v| (v.abs() / amax).powf(p))
                .sum::<f64>()
                .powf(1.0 / p)
        }
    }
}

#[inline]
pub(crate) fn sign_plus(v: f64) -> f64 {
    if v < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `argmax_{‖v‖_p ≤ 1} ⟨x, v⟩`. Ties resolve to the lexicographically first
/// maximizer; at `x = 0` the all-plus direction is returned.
pub fn lp_support_point(x: &[f64], p: Exponent) -> Vec<f64> {
    let d = x.len();
    match p {
        Exponent::Infinity => x.iter().map(|&v| sign_plus(v)).collect(),
        Exponent::Finite(p1) if p1 == 1.0 => {
            let mut best = 0usize;
            for i in 1..d {
                if x[i].abs() > x[best].abs() {
                    best = i;
                }
            }
            let mut v = vec![0.0; d];
            if d > 0 {
                v[best] = sign_plus(x[best]);
            }
            v
        }
        Exponent::Finite(pf) => {
            let s = p.conjugate();
            let ns = lp_norm(x, s);
            if ns == 0.0 {
                let c = (d as f64).powf(-1.0 / pf);
                return vec![c; d];
            }
            let sf = s.as_f64();
            x.iter()
                .map(|&v| sign_plus(v) * (v.abs() / ns).powf(sf - 1.0))
                .collect()
        }
    }
}

/// Euclidean projection of `z` onto `{x : ‖x‖_s ≤ c}`.
pub fn project_lp_ball(z: &[f64], s: Exponent, c: f64) -> Vec<f64> {
    if lp_norm(z, s) <= c {
        return z.to_vec();
    }
    if c <= 0.0 {
        return vec![0.0; z.len()];
    }
    match s {
        Exponent::Infinity => z.iter().map(|&v| v.clamp(-c, c)).collect(),
        Exponent::Finite(sf) if sf == 2.0 => {
            let n = norm2(z);
            z.iter().map(|v| v * c / n).collect()
        }
        Exponent::Finite(sf) if sf == 1.0 => {
            let lam = l1_threshold(z, c);
            z.iter()
                .map(|&v| sign_plus(v) * (v.abs() - lam).max(0.0))
                .collect()
        }
        Exponent::Finite(sf) => project_general_lp(z, sf, c),
    }
}

/// Soft-threshold level `λ ≥ 0` with `Σ max(|zᵢ| − λ, 0) = c` (requires
/// `‖z‖₁ > c`). Sort-based, exact up to rounding.
pub fn l1_threshold(z: &[f64], c: f64) -> f64 {
    let mut a: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    a.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let mut cum = 0.0;
    let mut lam = 0.0;
    for (k, &ak) in a.iter().enumerate() {
        cum += ak;
        let t = (cum - c) / (k as f64 + 1.0);
        if ak - t > 0.0 {
            lam = t;
        } else {
            break;
        }
    }
    lam.max(0.0)
}

fn project_general_lp(z: &[f64], s: f64, c: f64) -> Vec<f64> {
    // KKT: tᵢ + μ s tᵢ^{s−1} = |zᵢ|, Σ tᵢ^s = c^s, solved by nested bisection.
    let solve_t = |a: f64, mu: f64| -> f64 {
        if a == 0.0 {
            return 0.0;
        }
        let (mut lo, mut hi) = (0.0f64, a);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid + mu * s * mid.powf(s - 1.0) > a {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-17 * a {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let a: Vec<f64> = z.iter().map(|v| v.abs()).collect();
    let cs = c.powf(s);
    let mass = |mu: f64| a.iter().map(|&ai| solve_t(ai, mu).powf(s)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while mass(hi) > cs {
        hi *= 2.0;
        if hi > 1e300 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > cs {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi {
            break;
        }
    }
    let mu = hi;
    z.iter()
        .zip(&a)
        .map(|(&v, &ai)| sign_plus(v) * solve_t(ai, mu))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugates() {
        assert_eq!(holder_conjugate(2.0).unwrap(), Exponent::Finite(2.0));
        assert_eq!(holder_conjugate(1.0).unwrap(), Exponent::Infinity);
        match holder_conjugate(1.5).unwrap() {
            Exponent::Finite(q) => assert!((q - 3.0).abs() < 1e-12),
            _ => panic!(),
        }
        assert_eq!(Exponent::Infinity.conjugate(), Exponent::Finite(1.0));
        assert!(holder_conjugate(0.5).is_err());
    }

    #[test]
    fn norms() {
        assert_eq!(norm2(&[3.0, 4.0]), 5.0);
        assert_eq!(lp_norm(&[3.0, -4.0], Exponent::Finite(1.0)), 7.0);
        assert_eq!(lp_norm(&[3.0, -4.0], Exponent::Infinity), 4.0);
    }

    #[test]
    fn support_points_attain_dual_norm() {
        let x = [0.3, -1.2, 0.7];
        for p in [1.0, 1.5, 2.0, 3.0, 7.0] {
            let p = Exponent::Finite(p);
            let v = lp_support_point(&x, p);
            assert!((lp_norm(&v, p) - 1.0).abs() < 1e-12);
            assert!((dot(&x, &v) - lp_norm(&x, p.conjugate())).abs() < 1e-12);
        }
        let v = lp_support_point(&[0.3, -0.2], Exponent::Infinity);
        assert_eq!(v, vec![1.0, -1.0]);
        assert_eq!(lp_support_point(&[0.0, 0.0], Exponent::Infinity), vec![1.0, 1.0]);
    }

    #[test]
    fn l1_projection_matches_example() {
        let p = project_lp_ball(&[0.8, 0.6], Exponent::Finite(1.0), 1.0);
        assert!((p[0] - 0.6).abs() < 1e-15 && (p[1] - 0.4).abs() < 1e-15);
    }

    #[test]
    fn general_projection_satisfies_kkt() {
        let z = [2.0, -1.0, 0.5, 0.0];
        for s in [1.3, 3.0] {
            let x = project_lp_ball(&z, Exponent::Finite(s), 1.0);
            assert!((lp_norm(&x, Exponent::Finite(s)) - 1.0).abs() < 1e-10);
            // z − x must be a nonnegative multiple of the gradient of ‖·‖_s at x
            let g: Vec<f64> = x.iter().map(|v| sign_plus(*v) * v.abs().powf(s - 1.0)).collect();
            let k = (z[0] - x[0]) / g[0];
            for i in 0..3 {
                assert!(((z[i] - x[i]) - k * g[i]).abs() < 1e-8, "s={s} i={i}");
            }
        }
    }
}
