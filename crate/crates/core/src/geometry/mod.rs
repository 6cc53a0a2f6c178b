//! Balls, gauge (Minkowski) norms, dual norms and support oracles for every
//! geometry family: ℓp, the probability simplex, group `(q, r)` norms,
//! Schatten norms, symmetric vertex hulls and the two interpolation norms.

pub mod interp;
pub mod linprog;
pub mod lp;
pub mod svd;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use interp::{inf_conv, sum_norm_support, WeightedNorm};
use linprog::LpOutcome;
pub use lp::{dot, holder_conjugate, lp_norm, Exponent};
pub use svd::schatten_singular_values;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BallKind {
    Lp { p: Exponent, dim: usize },
    /// The probability simplex. Not centrally symmetric; it is the natural
    /// domain of the entropic regularizer.
    Simplex { dim: usize },
    /// ℓr norm of the ℓq norms of the columns of a `rows × cols` matrix
    /// (row-major flattening).
    GroupQr { q: Exponent, r: Exponent, rows: usize, cols: usize },
    Schatten { p: Exponent, rows: usize, cols: usize },
    /// Absolute convex hull of the listed vertices (each `v` also generates `−v`).
    VertexHull { vertices: Vec<Vec<f64>> },
    /// `‖w‖ = ‖w‖_a + ‖w‖_b`.
    Interp1 { a: Box<BallSpec>, b: Box<BallSpec> },
    /// `‖w‖ = inf_{w₁ + w₂ = w} ‖w₁‖_a + ‖w₂‖_b`.
    Interp2 { a: Box<BallSpec>, b: Box<BallSpec> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    #[serde(flatten)]
    pub kind: BallKind,
    #[serde(default = "one")]
    pub radius: f64,
}

fn one() -> f64 {
    1.0
}

/// A finite list of extreme points; `exhaustive` is false when the ball has
/// infinitely many (or too many) and the list is a sample.
#[derive(Debug, Clone)]
pub struct ExtremeSet {
    pub points: Vec<Vec<f64>>,
    pub exhaustive: bool,
}

impl BallSpec {
    pub fn new(kind: BallKind) -> Result<Self> {
        Self::with_radius(kind, 1.0)
    }

    pub fn with_radius(kind: BallKind, radius: f64) -> Result<Self> {
        let b = BallSpec { kind, radius };
        b.validate()?;
        Ok(b)
    }

    pub fn lp(p: f64, dim: usize) -> Result<Self> {
        Self::new(BallKind::Lp { p: Exponent::new(p)?, dim })
    }

    pub fn l1(dim: usize) -> Self {
        Self::lp(1.0, dim).expect("valid")
    }

    pub fn l2(dim: usize) -> Self {
        Self::lp(2.0, dim).expect("valid")
    }

    pub fn linf(dim: usize) -> Self {
        BallSpec { kind: BallKind::Lp { p: Exponent::Infinity, dim }, radius: 1.0 }
    }

    pub fn simplex(dim: usize) -> Self {
        BallSpec { kind: BallKind::Simplex { dim }, radius: 1.0 }
    }

    pub fn group(q: Exponent, r: Exponent, rows: usize, cols: usize) -> Self {
        BallSpec { kind: BallKind::GroupQr { q, r, rows, cols }, radius: 1.0 }
    }

    pub fn schatten(p: Exponent, rows: usize, cols: usize) -> Self {
        BallSpec { kind: BallKind::Schatten { p, rows, cols }, radius: 1.0 }
    }

    pub fn vertex_hull(vertices: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(BallKind::VertexHull { vertices })
    }

    pub fn interp1(a: BallSpec, b: BallSpec) -> Result<Self> {
        Self::new(BallKind::Interp1 { a: Box::new(a), b: Box::new(b) })
    }

    pub fn interp2(a: BallSpec, b: BallSpec) -> Result<Self> {
        Self::new(BallKind::Interp2 { a: Box::new(a), b: Box::new(b) })
    }

    /// Short names used on the command line: `l1`, `l2`, `linf`, `l<p>`,
    /// `lp:<p>`, `simplex`.
    pub fn parse_short(s: &str, dim: usize) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "simplex" {
            return Ok(Self::simplex(dim));
        }
        let p = t
            .strip_prefix("lp:")
            .or_else(|| t.strip_prefix('l'))
            .ok_or_else(|| Error::Config(format!("unknown ball `{s}`")))?;
        let p: Exponent = p.parse().map_err(|_| Error::Config(format!("unknown ball `{s}`")))?;
        Self::new(BallKind::Lp { p, dim })
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            BallKind::Lp { dim, .. } | BallKind::Simplex { dim } => *dim,
            BallKind::GroupQr { rows, cols, .. } | BallKind::Schatten { rows, cols, .. } => rows * cols,
            BallKind::VertexHull { vertices } => vertices.first().map_or(0, |v| v.len()),
            BallKind::Interp1 { a, .. } | BallKind::Interp2 { a, .. } => a.dim(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidParameter(format!("radius must be > 0, got {}", self.radius)));
        }
        let check_exp = |e: &Exponent| match e {
            Exponent::Finite(p) if !(*p >= 1.0) || !p.is_finite() => Err(Error::InvalidExponent(*p)),
            _ => Ok(()),
        };
        match &self.kind {
            BallKind::Lp { p, dim } => {
                check_exp(p)?;
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dim must be ≥ 1".into()));
                }
            }
            BallKind::Simplex { dim } => {
                if *dim == 0 {
                    return Err(Error::InvalidParameter("dim must be ≥ 1".into()));
                }
            }
            BallKind::GroupQr { q, r, rows, cols } => {
                check_exp(q)?;
                check_exp(r)?;
                if rows * cols == 0 {
                    return Err(Error::InvalidParameter("empty group matrix".into()));
                }
            }
            BallKind::Schatten { p, rows, cols } => {
                check_exp(p)?;
                if rows * cols == 0 {
                    return Err(Error::InvalidParameter("empty Schatten matrix".into()));
                }
            }
            BallKind::VertexHull { vertices } => {
                let d = vertices.first().map(|v| v.len()).ok_or_else(|| {
                    Error::InvalidParameter("vertex hull needs at least one vertex".into())
                })?;
                if d == 0 || vertices.iter().any(|v| v.len() != d) {
                    return Err(Error::InvalidParameter("vertices must share a positive dimension".into()));
                }
                if vertices.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(Error::NonFinite("vertex coordinates"));
                }
            }
            BallKind::Interp1 { a, b } | BallKind::Interp2 { a, b } => {
                a.validate()?;
                b.validate()?;
                check_dim(a.dim(), b.dim())?;
                a.lp_component()?;
                b.lp_component()?;
            }
        }
        Ok(())
    }

    fn lp_component(&self) -> Result<(Exponent, f64)> {
        match &self.kind {
            BallKind::Lp { p, .. } => Ok((*p, self.radius)),
            _ => Err(Error::Unsupported("interpolation components must be ℓp balls".into())),
        }
    }

    pub fn is_symmetric(&self) -> bool {
        !matches!(self.kind, BallKind::Simplex { .. })
    }

    /// Minkowski functional `inf{α > 0 : v ∈ α·B}`. Points outside the span of
    /// a vertex hull (or off the simplex cone) give `+∞`.
    pub fn gauge(&self, v: &[f64]) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        let raw = match &self.kind {
            BallKind::Lp { p, .. } => lp_norm(v, *p),
            BallKind::Simplex { .. } => {
                if v.iter().any(|&x| x < 0.0) {
                    f64::INFINITY
                } else {
                    v.iter().sum()
                }
            }
            BallKind::GroupQr { q, r, rows, cols } => group_norm(v, *q, *r, *rows, *cols),
            BallKind::Schatten { p, rows, cols } => {
                lp_norm(&schatten_singular_values(v, *rows, *cols)?, *p)
            }
            BallKind::VertexHull { vertices } => vertex_hull_gauge(vertices, v),
            BallKind::Interp1 { a, b } => a.gauge(v)? + b.gauge(v)?,
            BallKind::Interp2 { a, b } => {
                let (pa, ra) = a.lp_component()?;
                let (pb, rb) = b.lp_component()?;
                inf_conv(
                    WeightedNorm { weight: 1.0 / ra, p: pa },
                    WeightedNorm { weight: 1.0 / rb, p: pb },
                    v,
                )?
                .value
            }
        };
        Ok(match &self.kind {
            BallKind::Interp1 { .. } | BallKind::Interp2 { .. } => raw,
            _ => raw / self.radius,
        })
    }

    /// Support function `sup{⟨x, v⟩ : v ∈ B}`; for symmetric balls this is the
    /// dual norm.
    pub fn dual_norm(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(match &self.kind {
            BallKind::Lp { p, .. } => self.radius * lp_norm(x, p.conjugate()),
            BallKind::Simplex { .. } => self.radius * x.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            BallKind::GroupQr { q, r, rows, cols } => {
                self.radius * group_norm(x, q.conjugate(), r.conjugate(), *rows, *cols)
            }
            BallKind::Schatten { p, rows, cols } => {
                self.radius * lp_norm(&schatten_singular_values(x, *rows, *cols)?, p.conjugate())
            }
            BallKind::VertexHull { vertices } => {
                self.radius * vertices.iter().map(|v| dot(v, x).abs()).fold(0.0, f64::max)
            }
            BallKind::Interp1 { .. } => dot(x, &self.support_point(x)?),
            BallKind::Interp2 { a, b } => a.dual_norm(x)?.max(b.dual_norm(x)?),
        })
    }

    /// A maximizer of `⟨x, v⟩` over the ball (linear maximization oracle).
    /// Ties go to the lexicographically first candidate; at `x = 0` sign-based
    /// oracles return the all-plus vertex.
    pub fn support_point(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let unit = match &self.kind {
            BallKind::Lp { p, .. } => lp::lp_support_point(x, *p),
            BallKind::Simplex { dim } => {
                let mut best = 0;
                for i in 1..*dim {
                    if x[i] > x[best] {
                        best = i;
                    }
                }
                let mut v = vec![0.0; *dim];
                v[best] = 1.0;
                v
            }
            BallKind::GroupQr { q, r, rows, cols } => {
                let col_duals: Vec<f64> =
                    (0..*cols).map(|j| lp_norm(&column(x, *rows, *cols, j), q.conjugate())).collect();
                let t = lp::lp_support_point(&col_duals, *r);
                let mut v = vec![0.0; rows * cols];
                for j in 0..*cols {
                    let cj = lp::lp_support_point(&column(x, *rows, *cols, j), *q);
                    for i in 0..*rows {
                        v[i * cols + j] = t[j] * cj[i];
                    }
                }
                v
            }
            BallKind::Schatten { p, rows, cols } => {
                let s = svd::svd(x, *rows, *cols)?;
                let t = lp::lp_support_point(&s.sigma, *p);
                s.recompose(&t)
            }
            BallKind::VertexHull { vertices } => {
                let mut best = (f64::NEG_INFINITY, 0usize, 1.0);
                for (k, v) in vertices.iter().enumerate() {
                    let ip = dot(v, x);
                    for sgn in [1.0, -1.0] {
                        if sgn * ip > best.0 + 1e-15 {
                            best = (sgn * ip, k, sgn);
                        }
                    }
                }
                vertices[best.1].iter().map(|c| best.2 * c).collect()
            }
            BallKind::Interp1 { a, b } => {
                let (pa, ra) = a.lp_component()?;
                let (pb, rb) = b.lp_component()?;
                return Ok(sum_norm_support(pa, ra, pb, rb, x)?.1);
            }
            BallKind::Interp2 { a, b } => {
                return if a.dual_norm(x)? >= b.dual_norm(x)? { a.support_point(x) } else { b.support_point(x) };
            }
        };
        Ok(unit.into_iter().map(|c| c * self.radius).collect())
    }

    /// Extreme points of the ball, enumerated when there are at most `limit`,
    /// otherwise a deterministic sample of boundary support points.
    pub fn extreme_points(&self, limit: usize) -> Result<ExtremeSet> {
        let d = self.dim();
        let scale = |pts: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            pts.into_iter().map(|v| v.into_iter().map(|c| c * self.radius).collect()).collect()
        };
        let signed_basis = || -> Vec<Vec<f64>> {
            let mut out = Vec::with_capacity(2 * d);
            for i in 0..d {
                for s in [1.0, -1.0] {
                    let mut e = vec![0.0; d];
                    e[i] = s;
                    out.push(e);
                }
            }
            out
        };
        match &self.kind {
            BallKind::Lp { p, .. } if p.is_one() => Ok(ExtremeSet { points: scale(signed_basis()), exhaustive: true }),
            BallKind::Lp { p: Exponent::Infinity, .. } => {
                if d >= 30 || (1usize << d) > limit {
                    return Ok(ExtremeSet { points: self.sampled_support_points(limit)?, exhaustive: false });
                }
                Ok(ExtremeSet { points: scale(sign_vectors(d)), exhaustive: true })
            }
            BallKind::Lp { .. } if d == 1 => Ok(ExtremeSet { points: scale(vec![vec![1.0], vec![-1.0]]), exhaustive: true }),
            BallKind::Simplex { .. } => {
                let pts = (0..d)
                    .map(|i| {
                        let mut e = vec![0.0; d];
                        e[i] = 1.0;
                        e
                    })
                    .collect();
                Ok(ExtremeSet { points: scale(pts), exhaustive: true })
            }
            BallKind::VertexHull { vertices } => {
                let mut pts = Vec::with_capacity(2 * vertices.len());
                for v in vertices {
                    pts.push(v.clone());
                    pts.push(v.iter().map(|c| -c).collect());
                }
                Ok(ExtremeSet { points: scale(pts), exhaustive: true })
            }
            BallKind::Interp2 { a, b } => {
                let ea = a.extreme_points(limit)?;
                let eb = b.extreme_points(limit)?;
                let mut pts = ea.points;
                pts.extend(eb.points);
                // a union of extreme-point lists contains the extreme points of
                // the hull but may contain interior points too
                Ok(ExtremeSet { points: pts, exhaustive: false })
            }
            _ => Ok(ExtremeSet { points: self.sampled_support_points(limit)?, exhaustive: false }),
        }
    }

    fn sampled_support_points(&self, limit: usize) -> Result<Vec<Vec<f64>>> {
        let d = self.dim();
        let mut dirs: Vec<Vec<f64>> = Vec::new();
        if d <= 12 && (1usize << d) + 2 * d <= limit.max(2 * d) {
            dirs.extend(sign_vectors(d));
        }
        for i in 0..d {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; d];
                e[i] = s;
                dirs.push(e);
            }
        }
        if d == 2 {
            for k in 0..16 {
                let a = std::f64::consts::PI * (k as f64) / 8.0;
                dirs.push(vec![a.cos(), a.sin()]);
            }
        }
        let mut out: Vec<Vec<f64>> = Vec::new();
        for dir in dirs.iter().take(limit.max(1)) {
            let p = self.support_point(dir)?;
            if !out.iter().any(|q| q.iter().zip(&p).all(|(a, b)| (a - b).abs() < 1e-12)) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// `gauge(v) ≤ 1 + tol`; for the simplex, exact membership up to `tol`.
    pub fn contains(&self, v: &[f64], tol: f64) -> Result<bool> {
        check_dim(self.dim(), v.len())?;
        if let BallKind::Simplex { .. } = self.kind {
            let s: f64 = v.iter().sum();
            return Ok(v.iter().all(|&x| x >= -tol) && (s - self.radius).abs() <= tol);
        }
        Ok(self.gauge(v)? <= 1.0 + tol)
    }
}

/// `‖v‖_b` as a free function.
pub fn gauge_norm(b: &BallSpec, v: &[f64]) -> Result<f64> {
    b.gauge(v)
}

pub fn dual_norm(b: &BallSpec, x: &[f64]) -> Result<f64> {
    b.dual_norm(x)
}

pub fn contains(b: &BallSpec, v: &[f64], tol: f64) -> Result<bool> {
    if tol < 0.0 {
        return Err(Error::InvalidParameter("tol must be ≥ 0".into()));
    }
    b.contains(v, tol)
}

fn sign_vectors(d: usize) -> Vec<Vec<f64>> {
    (0..(1usize << d))
        .map(|mask| (0..d).map(|i| if mask >> (d - 1 - i) & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

pub(crate) fn column(v: &[f64], rows: usize, cols: usize, j: usize) -> Vec<f64> {
    (0..rows).map(|i| v[i * cols + j]).collect()
}

pub fn group_norm(v: &[f64], q: Exponent, r: Exponent, rows: usize, cols: usize) -> f64 {
    let cn: Vec<f64> = (0..cols).map(|j| lp_norm(&column(v, rows, cols, j), q)).collect();
    lp_norm(&cn, r)
}

/// `min Σ|αᵢ|` subject to `Σ αᵢ vᵢ = v`, as an LP in `(α⁺, α⁻)`.
fn vertex_hull_gauge(vertices: &[Vec<f64>], v: &[f64]) -> f64 {
    if v.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let d = v.len();
    let k = vertices.len();
    let n = 2 * k;
    let mut a = vec![0.0; d * n];
    for i in 0..d {
        for (j, vert) in vertices.iter().enumerate() {
            a[i * n + j] = vert[i];
            a[i * n + k + j] = -vert[i];
        }
    }
    match linprog::solve(&a, d, n, v, &vec![1.0; n]) {
        LpOutcome::Optimal { value, .. } => value,
        LpOutcome::Infeasible | LpOutcome::Unbounded => f64::INFINITY,
    }
}

/// Learner constraint set `W` and data domain `X` (living in the dual space).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometryPair {
    pub w_ball: BallSpec,
    pub x_ball: BallSpec,
}

impl GeometryPair {
    pub fn new(w_ball: BallSpec, x_ball: BallSpec) -> Result<Self> {
        w_ball.validate()?;
        x_ball.validate()?;
        check_dim(w_ball.dim(), x_ball.dim())?;
        Ok(GeometryPair { w_ball, x_ball })
    }

    pub fn dim(&self) -> usize {
        self.w_ball.dim()
    }

    /// `‖x‖_{W*}`: the support function of `W`.
    pub fn w_dual(&self, x: &[f64]) -> Result<f64> {
        self.w_ball.dual_norm(x)
    }

    /// `‖w‖_{X*}`: the norm with respect to which regularizers must be
    /// uniformly convex.
    pub fn x_dual(&self, w: &[f64]) -> Result<f64> {
        self.x_ball.dual_norm(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_examples() {
        assert_eq!(BallSpec::l2(2).gauge(&[3.0, 4.0]).unwrap(), 5.0);
        let i1 = BallSpec::interp1(BallSpec::l1(2), BallSpec::l2(2)).unwrap();
        assert_eq!(i1.gauge(&[3.0, 4.0]).unwrap(), 12.0);
        let vh = BallSpec::vertex_hull(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!((vh.gauge(&[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
        let i2 = BallSpec::interp2(BallSpec::l1(3), BallSpec::l1(3)).unwrap();
        assert!((i2.gauge(&[1.0, -2.0, 3.0]).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_gauge_outside_span() {
        let vh = BallSpec::vertex_hull(vec![vec![1.0, 0.0]]).unwrap();
        assert_eq!(vh.gauge(&[0.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(!vh.contains(&[0.0, 0.5], 0.0).unwrap());
    }

    #[test]
    fn dual_norm_examples() {
        assert_eq!(BallSpec::l1(2).dual_norm(&[2.0, 1.0]).unwrap(), 2.0);
        assert_eq!(BallSpec::l2(2).dual_norm(&[3.0, 4.0]).unwrap(), 5.0);
        let vh = BallSpec::vertex_hull(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(vh.dual_norm(&[2.0, 1.0]).unwrap(), 2.0);
    }

    #[test]
    fn contains_examples() {
        assert!(BallSpec::l2(2).contains(&[0.6, 0.8], 0.0).unwrap());
        assert!(!BallSpec::l1(2).contains(&[0.8, 0.6], 0.0).unwrap());
        for b in [BallSpec::l1(3), BallSpec::linf(3), BallSpec::lp(3.0, 3).unwrap()] {
            assert!(b.contains(&[0.0; 3], 0.0).unwrap());
        }
        assert!(contains(&BallSpec::l1(2), &[0.0, 0.0], -1.0).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            BallSpec::l2(2).gauge(&[1.0, 2.0, 3.0]),
            Err(Error::DimensionMismatch { expected: 2, got: 3 })
        ));
        assert!(GeometryPair::new(BallSpec::l2(2), BallSpec::l2(3)).is_err());
    }

    #[test]
    fn schatten_gauge() {
        let b = BallSpec::schatten(Exponent::Finite(1.0), 2, 2);
        assert!((b.gauge(&[2.0, 0.0, 0.0, 3.0]).unwrap() - 5.0).abs() < 1e-12);
        let b2 = BallSpec::schatten(Exponent::Finite(2.0), 2, 2);
        assert!((b2.gauge(&[1.0, 0.0, 0.0, 1.0]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn group_support_attains_dual() {
        let b = BallSpec::group(Exponent::Finite(2.0), Exponent::Finite(1.0), 2, 3);
        let x = [0.5, -1.0, 2.0, 0.3, 0.1, -0.4];
        let s = b.support_point(&x).unwrap();
        assert!((b.gauge(&s).unwrap() - 1.0).abs() < 1e-12);
        assert!((dot(&s, &x) - b.dual_norm(&x).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn invalid_specs() {
        assert!(BallSpec::with_radius(BallKind::Lp { p: Exponent::Finite(2.0), dim: 2 }, 0.0).is_err());
        assert!(BallSpec::vertex_hull(vec![]).is_err());
        assert!(BallSpec::interp1(BallSpec::l1(2), BallSpec::l2(3)).is_err());
        assert!(BallSpec::interp1(BallSpec::l1(2), BallSpec::simplex(2)).is_err());
    }

    #[test]
    fn short_names() {
        assert_eq!(BallSpec::parse_short("linf", 3).unwrap(), BallSpec::linf(3));
        assert_eq!(BallSpec::parse_short("l1.5", 2).unwrap(), BallSpec::lp(1.5, 2).unwrap());
        assert!(BallSpec::parse_short("bogus", 2).is_err());
    }

    #[test]
    fn serde_roundtrip() {
        let b = BallSpec::interp1(BallSpec::l1(2), BallSpec::linf(2)).unwrap();
        let s = serde_json::to_string(&b).unwrap();
        let back: BallSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
        let bad = r#"{"type":"lp","p":2,"dim":2,"bogus":1}"#;
        assert!(serde_json::from_str::<BallSpec>(bad).is_err());
    }
}
