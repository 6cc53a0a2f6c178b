//! Dense two-phase simplex for `min cᵀx s.t. Ax = b, x ≥ 0`, Bland's rule.
//! Sized for the vertex-hull gauge problems (tens of rows, a few hundred
//! columns).

const EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>, // m rows, each ncols + 1 (rhs last)
    obj: Vec<f64>,       // ncols + 1
    basis: Vec<usize>,
    ncols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= pv;
        }
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, p) in row.iter_mut().zip(&prow) {
                    *v -= f * p;
                }
                row[c] = 0.0;
            }
        }
        let f = self.obj[c];
        if f != 0.0 {
            for (v, p) in self.obj.iter_mut().zip(&prow) {
                *v -= f * p;
            }
            self.obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    fn load_costs(&mut self, cost: &[f64]) {
        let n = self.ncols;
        self.obj = vec![0.0; n + 1];
        self.obj[..n].copy_from_slice(&cost[..n]);
        for (i, row) in self.rows.iter().enumerate() {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for (o, v) in self.obj.iter_mut().zip(row) {
                    *o -= cb * v;
                }
            }
        }
    }

    /// Returns false if unbounded.
    fn optimize(&mut self, allowed: usize) -> bool {
        for _ in 0..MAX_PIVOTS {
            let entering = (0..allowed).find(|&j| self.obj[j] < -EPS);
            let Some(c) = entering else { return true };
            let mut best: Option<(f64, usize, usize)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > EPS {
                    let ratio = row[self.ncols] / a;
                    let better = match best {
                        None => true,
                        Some((br, _, bb)) => {
                            ratio < br - 1e-14 || (ratio <= br + 1e-14 && self.basis[i] < bb)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            match best {
                None => return false,
                Some((_, r, _)) => self.pivot(r, c),
            }
        }
        true
    }
}

/// `a` is row-major `m × n`.
pub fn solve(a: &[f64], m: usize, n: usize, b: &[f64], c: &[f64]) -> LpOutcome {
    assert_eq!(a.len(), m * n);
    assert_eq!(b.len(), m);
    assert_eq!(c.len(), n);
    let ncols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let flip = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; ncols + 1];
        for j in 0..n {
            row[j] = flip * a[i * n + j];
        }
        row[n + i] = 1.0;
        row[ncols] = flip * b[i];
        rows.push(row);
    }
    let mut t = Tableau { rows, obj: vec![], basis: (n..n + m).collect(), ncols };

    let mut phase1 = vec![0.0; ncols];
    for v in phase1.iter_mut().skip(n) {
        *v = 1.0;
    }
    t.load_costs(&phase1);
    t.optimize(ncols);
    let infeas = -t.obj[ncols];
    let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if infeas > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    // drive artificials out of the basis where possible
    for r in 0..m {
        if t.basis[r] >= n {
            if let Some(cidx) = (0..n).find(|&j| t.rows[r][j].abs() > 1e-9) {
                t.pivot(r, cidx);
            }
        }
    }
    let mut phase2 = vec![0.0; ncols];
    phase2[..n].copy_from_slice(c);
    t.load_costs(&phase2);
    if !t.optimize(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bi) in t.basis.iter().enumerate() {
        if bi < n {
            x[bi] = t.rows[i][ncols].max(0.0);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min x + y s.t. x - y = 1, x,y ≥ 0 → x = 1
        match solve(&[1.0, -1.0], 1, 2, &[1.0], &[1.0, 1.0]) {
            LpOutcome::Optimal { x, value } => {
                assert!((value - 1.0).abs() < 1e-12);
                assert!((x[0] - 1.0).abs() < 1e-12);
            }
            o => panic!("{o:?}"),
        }
    }

    #[test]
    fn infeasible() {
        // x = -1 with x ≥ 0
        assert_eq!(solve(&[1.0], 1, 1, &[-1.0], &[1.0]), LpOutcome::Infeasible);
    }

    #[test]
    fn unbounded() {
        // min -x s.t. x - y = 0
        assert_eq!(solve(&[1.0, -1.0], 1, 2, &[0.0], &[-1.0, 0.0]), LpOutcome::Unbounded);
    }
}
