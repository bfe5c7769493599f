//! Dense revised simplex for `min c^T x  s.t.  A x = b, x >= 0`.
//!
//! Columns are supplied through [`LpColumns`], so very wide problems (one
//! column per index tuple) never need an explicit constraint matrix. The
//! basis inverse is kept explicitly (the row count is small) with rank-one
//! updates and periodic refactorization. Phase I uses one artificial per
//! row; Dantzig pricing switches to Bland's rule after a run of degenerate
//! pivots so the method cannot cycle.

use crate::error::{Error, Result};

pub trait LpColumns {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    fn cost(&self, j: usize) -> f64;
    /// Writes the dense column `j` into `out` (length `rows()`).
    fn column(&self, j: usize, out: &mut [f64]);
    /// `y^T A_j`.
    fn dot(&self, y: &[f64], j: usize) -> f64;
}

/// Explicit column-major constraint matrix.
#[derive(Clone, Debug)]
pub struct DenseLp {
    rows: usize,
    columns: Vec<Vec<f64>>,
    costs: Vec<f64>,
}

impl DenseLp {
    pub fn new(rows: usize) -> Self {
        DenseLp { rows, columns: Vec::new(), costs: Vec::new() }
    }

    pub fn push_column(&mut self, cost: f64, column: Vec<f64>) -> usize {
        assert_eq!(column.len(), self.rows, "column length must equal the row count");
        self.columns.push(column);
        self.costs.push(cost);
        self.columns.len() - 1
    }
}

impl LpColumns for DenseLp {
    fn rows(&self) -> usize {
        self.rows
    }
    fn cols(&self) -> usize {
        self.columns.len()
    }
    fn cost(&self, j: usize) -> f64 {
        self.costs[j]
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        out.copy_from_slice(&self.columns[j]);
    }
    fn dot(&self, y: &[f64], j: usize) -> f64 {
        self.columns[j].iter().zip(y).map(|(a, b)| a * b).sum()
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexOptions {
    /// Reduced-cost optimality tolerance, relative to `max(1, max |c_j|)`.
    pub optimality_tol: f64,
    /// Smallest pivot magnitude accepted in the ratio test.
    pub pivot_tol: f64,
    /// Phase-I infeasibility tolerance, relative to `max(1, ||b||_inf)`.
    pub feasibility_tol: f64,
    /// Primal infeasibility the ratio test may trade for a larger pivot, relative to `max(1, ||b||_inf)`.
    pub harris_tol: f64,
    pub refactor_every: usize,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_switch: usize,
    pub max_iterations: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions {
            optimality_tol: 1e-11,
            pivot_tol: 1e-9,
            feasibility_tol: 1e-9,
            harris_tol: 1e-11,
            refactor_every: 50,
            degenerate_switch: 25,
            max_iterations: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub objective: f64,
    /// Basic structural columns with their values (values may be zero when degenerate).
    pub basic: Vec<(usize, f64)>,
    /// Row duals `y` with `c_j - y^T A_j >= 0` at optimality.
    pub duals: Vec<f64>,
    pub iterations: usize,
}

pub fn solve(lp: &impl LpColumns, b: &[f64], opts: &SimplexOptions) -> Result<LpSolution> {
    Simplex::new(lp, b, *opts)?.run()
}

struct Simplex<'a, L: LpColumns> {
    lp: &'a L,
    m: usize,
    n: usize,
    sign: Vec<f64>,
    rhs: Vec<f64>,
    basis: Vec<usize>,
    position: Vec<Option<usize>>,
    binv: Vec<f64>,
    xb: Vec<f64>,
    opts: SimplexOptions,
    cost_scale: f64,
    iterations: usize,
    since_refactor: usize,
    scratch: Vec<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Phase {
    One,
    Two,
}

impl<'a, L: LpColumns> Simplex<'a, L> {
    fn new(lp: &'a L, b: &[f64], opts: SimplexOptions) -> Result<Self> {
        let (m, n) = (lp.rows(), lp.cols());
        if b.len() != m {
            return Err(Error::DimensionMismatch(format!("right-hand side has {} entries for {m} rows", b.len())));
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite right-hand side".into()));
        }
        let sign: Vec<f64> = b.iter().map(|&v| if v < 0.0 { -1.0 } else { 1.0 }).collect();
        let rhs: Vec<f64> = b.iter().map(|v| v.abs()).collect();
        let mut binv = vec![0.0; m * m];
        for r in 0..m {
            binv[r * m + r] = 1.0;
        }
        let mut position = vec![None; n + m];
        for (r, slot) in position[n..].iter_mut().enumerate() {
            *slot = Some(r);
        }
        let cost_scale = (0..n).fold(1.0f64, |s, j| s.max(lp.cost(j).abs()));
        Ok(Simplex {
            lp,
            m,
            n,
            sign,
            basis: (n..n + m).collect(),
            position,
            binv,
            xb: rhs.clone(),
            rhs,
            opts,
            cost_scale,
            iterations: 0,
            since_refactor: 0,
            scratch: vec![0.0; m],
        })
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.n
    }

    fn phase_cost(&self, phase: Phase, j: usize) -> f64 {
        match (phase, self.is_artificial(j)) {
            (Phase::One, true) => 1.0,
            (Phase::One, false) => 0.0,
            (Phase::Two, true) => 0.0,
            (Phase::Two, false) => self.lp.cost(j),
        }
    }

    /// Column `j` of the sign-normalized system.
    fn column(&self, j: usize, out: &mut [f64]) {
        if self.is_artificial(j) {
            out.iter_mut().for_each(|v| *v = 0.0);
            out[j - self.n] = 1.0;
        } else {
            self.lp.column(j, out);
            for (v, s) in out.iter_mut().zip(&self.sign) {
                *v *= s;
            }
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&mut self, j: usize) -> Vec<f64> {
        let mut col = std::mem::take(&mut self.scratch);
        self.column(j, &mut col);
        let m = self.m;
        let out = (0..m).map(|r| (0..m).map(|c| self.binv[r * m + c] * col[c]).sum()).collect();
        self.scratch = col;
        out
    }

    /// Duals of the sign-normalized system, `c_B^T B^{-1}`, already folded with the row signs
    /// so that `lp.dot(&y, j)` prices structural column `j`.
    fn pricing_vector(&self, phase: Phase) -> (Vec<f64>, Vec<f64>) {
        let m = self.m;
        let mut y = vec![0.0; m];
        for r in 0..m {
            let cb = self.phase_cost(phase, self.basis[r]);
            if cb != 0.0 {
                for c in 0..m {
                    y[c] += cb * self.binv[r * m + c];
                }
            }
        }
        let folded = y.iter().zip(&self.sign).map(|(a, s)| a * s).collect();
        (y, folded)
    }

    fn reduced_cost(&self, phase: Phase, folded: &[f64], j: usize) -> f64 {
        self.phase_cost(phase, j) - self.lp.dot(folded, j)
    }

    fn choose_entering(&self, phase: Phase, folded: &[f64], bland: bool) -> Option<usize> {
        let tol = self.opts.optimality_tol
            * match phase {
                Phase::One => 1.0,
                Phase::Two => self.cost_scale,
            };
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if self.position[j].is_some() {
                continue;
            }
            let d = self.reduced_cost(phase, folded, j);
            if d < -tol {
                if bland {
                    return Some(j);
                }
                if best.map_or(true, |(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
        }
        best.map(|(j, _)| j)
    }

    /// Harris two-pass ratio test: bound the step with a small feasibility
    /// allowance, then take the largest pivot within that bound. Under Bland
    /// the plain minimum ratio with smallest-index ties is used instead.
    fn choose_leaving(&self, alpha: &[f64], phase: Phase, bland: bool) -> Option<usize> {
        let scale = alpha.iter().fold(1.0f64, |s, a| s.max(a.abs()));
        let mut candidates: Vec<usize> = (0..self.m).filter(|&r| alpha[r] > self.opts.pivot_tol * scale).collect();
        if candidates.is_empty() {
            // only tiny pivots left; take them rather than report a false ray
            candidates = (0..self.m).filter(|&r| alpha[r] > self.opts.pivot_tol).collect();
        }
        let ratio = |r: usize| self.xb[r].max(0.0) / alpha[r];
        // phase II: push lingering artificials out first
        let prefer = |r: usize, br: usize| -> Option<bool> {
            let (ar, abr) = (self.is_artificial(self.basis[r]), self.is_artificial(self.basis[br]));
            (phase == Phase::Two && ar != abr).then_some(ar)
        };
        if bland {
            let mut best: Option<(usize, f64)> = None;
            for r in candidates {
                let rr = ratio(r);
                best = match best {
                    None => Some((r, rr)),
                    Some((br, bratio)) => {
                        let better = if (rr - bratio).abs() <= 1e-12 * (1.0 + bratio.abs()) {
                            prefer(r, br).unwrap_or(self.basis[r] < self.basis[br])
                        } else {
                            rr < bratio
                        };
                        if better {
                            Some((r, rr))
                        } else {
                            Some((br, bratio))
                        }
                    }
                };
            }
            return best.map(|(r, _)| r);
        }
        let delta = self.opts.harris_tol * self.rhs.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        let bound = candidates.iter().map(|&r| (self.xb[r].max(0.0) + delta) / alpha[r]).fold(f64::INFINITY, f64::min);
        let mut best: Option<usize> = None;
        for r in candidates {
            if ratio(r) > bound {
                continue;
            }
            best = match best {
                None => Some(r),
                Some(br) => {
                    let better = prefer(r, br)
                        .unwrap_or(alpha[r] > alpha[br] || (alpha[r] == alpha[br] && self.basis[r] < self.basis[br]));
                    Some(if better { r } else { br })
                }
            };
        }
        best
    }

    fn pivot(&mut self, r: usize, q: usize, alpha: &[f64]) {
        let m = self.m;
        let theta = self.xb[r].max(0.0) / alpha[r];
        for i in 0..m {
            if i != r {
                self.xb[i] -= theta * alpha[i];
                if self.xb[i] < 0.0 && self.xb[i] > -1e-13 {
                    self.xb[i] = 0.0;
                }
            }
        }
        self.xb[r] = theta;
        let pr = alpha[r];
        for c in 0..m {
            self.binv[r * m + c] /= pr;
        }
        for i in 0..m {
            if i != r && alpha[i] != 0.0 {
                let f = alpha[i];
                for c in 0..m {
                    self.binv[i * m + c] -= f * self.binv[r * m + c];
                }
            }
        }
        let old = self.basis[r];
        self.position[old] = None;
        self.position[q] = Some(r);
        self.basis[r] = q;
        self.iterations += 1;
        self.since_refactor += 1;
    }

    /// Rebuilds `B^{-1}` from scratch by Gauss–Jordan elimination and recomputes `x_B`.
    fn refactor(&mut self) -> Result<()> {
        let m = self.m;
        let mut a = vec![0.0; m * m];
        let mut col = vec![0.0; m];
        for (c, &j) in self.basis.iter().enumerate() {
            self.column(j, &mut col);
            for r in 0..m {
                a[r * m + c] = col[r];
            }
        }
        let mut inv = vec![0.0; m * m];
        for r in 0..m {
            inv[r * m + r] = 1.0;
        }
        for c in 0..m {
            let p = (c..m).max_by(|&x, &y| a[x * m + c].abs().total_cmp(&a[y * m + c].abs())).expect("nonempty");
            if a[p * m + c].abs() < 1e-13 {
                return Err(Error::Internal("simplex basis became singular".into()));
            }
            if p != c {
                for t in 0..m {
                    a.swap(p * m + t, c * m + t);
                    inv.swap(p * m + t, c * m + t);
                }
            }
            let d = a[c * m + c];
            for t in 0..m {
                a[c * m + t] /= d;
                inv[c * m + t] /= d;
            }
            for r in 0..m {
                if r != c {
                    let f = a[r * m + c];
                    if f != 0.0 {
                        for t in 0..m {
                            a[r * m + t] -= f * a[c * m + t];
                            inv[r * m + t] -= f * inv[c * m + t];
                        }
                    }
                }
            }
        }
        self.binv = inv;
        self.xb = (0..m)
            .map(|r| {
                let v: f64 = (0..m).map(|c| self.binv[r * m + c] * self.rhs[c]).sum();
                if v < 0.0 && v > -1e-11 {
                    0.0
                } else {
                    v
                }
            })
            .collect();
        self.since_refactor = 0;
        Ok(())
    }

    fn iterate(&mut self, phase: Phase) -> Result<()> {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.opts.max_iterations {
                return Err(Error::Internal(format!("simplex hit the iteration limit ({})", self.opts.max_iterations)));
            }
            if self.since_refactor >= self.opts.refactor_every {
                self.refactor()?;
            }
            let (_, folded) = self.pricing_vector(phase);
            let bland = degenerate_run >= self.opts.degenerate_switch;
            let Some(q) = self.choose_entering(phase, &folded, bland) else {
                return Ok(());
            };
            let alpha = self.ftran(q);
            let Some(r) = self.choose_leaving(&alpha, phase, bland) else {
                if phase == Phase::One {
                    return Err(Error::Internal("phase I reported unbounded".into()));
                }
                return Err(Error::Unbounded);
            };
            let degenerate = self.xb[r].max(0.0) / alpha[r] <= 1e-14;
            degenerate_run = if degenerate { degenerate_run + 1 } else { 0 };
            self.pivot(r, q, &alpha);
        }
    }

    /// Pivots basic artificials (at zero) out in favour of structural columns.
    /// An artificial whose row is zero on every structural column marks a
    /// redundant constraint and stays basic at zero.
    fn drive_out_artificials(&mut self) -> Result<()> {
        let m = self.m;
        for r in 0..m {
            if !self.is_artificial(self.basis[r]) {
                continue;
            }
            let row: Vec<f64> = (0..m).map(|c| self.binv[r * m + c] * self.sign[c]).collect();
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.n {
                if self.position[j].is_some() {
                    continue;
                }
                let v = self.lp.dot(&row, j).abs();
                if v > 1e-9 && best.map_or(true, |(_, bv)| v > bv) {
                    best = Some((j, v));
                }
            }
            if let Some((q, _)) = best {
                let alpha = self.ftran(q);
                self.xb[r] = 0.0;
                self.pivot(r, q, &alpha);
            }
        }
        self.refactor()
    }

    fn run(mut self) -> Result<LpSolution> {
        self.iterate(Phase::One)?;
        self.refactor()?;
        let infeasibility: f64 = (0..self.m).filter(|&r| self.is_artificial(self.basis[r])).map(|r| self.xb[r]).sum();
        let b_scale = self.rhs.iter().fold(1.0f64, |s, v| s.max(*v));
        if infeasibility > self.opts.feasibility_tol * b_scale {
            return Err(Error::Infeasible(format!("phase I ended with residual {infeasibility:e}")));
        }
        self.drive_out_artificials()?;
        self.iterate(Phase::Two)?;
        self.refactor()?;

        let (y, _) = self.pricing_vector(Phase::Two);
        let duals: Vec<f64> = y.iter().zip(&self.sign).map(|(a, s)| a * s).collect();
        let mut basic = Vec::new();
        let mut objective = 0.0;
        for r in 0..self.m {
            let j = self.basis[r];
            if !self.is_artificial(j) {
                let v = self.xb[r].max(0.0);
                objective += self.lp.cost(j) * v;
                basic.push((j, v));
            }
        }
        basic.sort_by_key(|(j, _)| *j);
        Ok(LpSolution { objective, basic, duals, iterations: self.iterations })
    }
}
