use super::{Backend, MotSolution};
use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::limits;
use crate::lp::{self, LpColumns, SimplexOptions};
use crate::tensor::{CouplingTensor, DualPotentials, IndexTuple, MarginalSpec, Shape};

const NO_ROW: usize = usize::MAX;

/// The MOT linear program for one cost, reusable across marginal specs.
///
/// One column per index tuple. Rows: every entry of the first constrained
/// marginal, and all but the last entry of each further constrained marginal
/// (the dropped rows are implied by total mass, so the system has full row
/// rank). Dropped rows carry dual zero, which fixes the additive gauge of the
/// potentials against the first constrained mode.
#[derive(Clone, Debug)]
pub struct MotLp {
    shape: Shape,
    costs: Vec<f64>,
}

impl MotLp {
    pub fn new(cost: &CostOracle) -> Result<Self> {
        let shape = cost.shape();
        limits::check_dense(shape.n, shape.k)?;
        let costs = cost.materialize()?.data;
        if costs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput("cost has non-finite entries".into()));
        }
        Ok(MotLp { shape, costs })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn solve(&self, spec: &MarginalSpec) -> Result<MotSolution> {
        if spec.shape() != self.shape {
            return Err(Error::DimensionMismatch(format!(
                "spec shape n={}, k={} but cost shape n={}, k={}",
                spec.shape().n,
                spec.shape().k,
                self.shape.n,
                self.shape.k
            )));
        }
        if spec.constrained().is_empty() {
            return Err(Error::InvalidMarginal("at least one mode must be constrained".into()));
        }
        let cols = Columns::new(self, spec);
        let sol = lp::solve(&cols, &cols.rhs, &SimplexOptions::default()).map_err(|e| match e {
            Error::Infeasible(msg) | Error::Internal(msg) => Error::Internal(format!("MOT LP: {msg}")),
            Error::Unbounded => Error::Internal("MOT LP reported unbounded".into()),
            other => other,
        })?;

        let (n, k) = (self.shape.n, self.shape.k);
        let mut duals = DualPotentials::zeros(self.shape);
        for &i in spec.constrained() {
            for j in 0..n {
                let r = cols.row_of[i * n + j];
                if r != NO_ROW {
                    duals.p[i][j] = sol.duals[r];
                }
            }
        }
        let mut tuple = vec![0; k];
        let entries: Vec<(IndexTuple, f64)> = sol
            .basic
            .iter()
            .filter(|(_, v)| *v > 0.0)
            .map(|&(j, v)| {
                self.shape.unrank(j, &mut tuple);
                (IndexTuple::from_vec_unchecked(tuple.clone()), v)
            })
            .collect();
        let coupling = CouplingTensor::sparse(self.shape, entries)?;
        let marginal_error = marginal_error(&coupling, spec)?;
        Ok(MotSolution {
            value: sol.objective,
            coupling,
            duals: Some(duals),
            backend: Backend::Lp,
            iterations: sol.iterations,
            converged: true,
            regularized_value: None,
            marginal_error,
        })
    }
}

/// Summed l1 distance between the constrained marginals of `coupling` and their targets.
pub fn marginal_error(coupling: &CouplingTensor, spec: &MarginalSpec) -> Result<f64> {
    let mut err = 0.0;
    for &i in spec.constrained() {
        let m = coupling.marginal(i)?;
        let mu = spec.marginal(i).expect("constrained");
        err += m.iter().zip(mu).map(|(a, b)| (a - b).abs()).sum::<f64>();
    }
    Ok(err)
}

/// Exact MOT value, a basic optimal coupling and optimal potentials.
pub fn solve_lp(cost: &CostOracle, spec: &MarginalSpec) -> Result<MotSolution> {
    MotLp::new(cost)?.solve(spec)
}

struct Columns<'a> {
    lp: &'a MotLp,
    /// `(mode, n^(k-1-mode))` for every constrained mode.
    strides: Vec<(usize, usize)>,
    row_of: Vec<usize>,
    rhs: Vec<f64>,
}

impl<'a> Columns<'a> {
    fn new(lp: &'a MotLp, spec: &MarginalSpec) -> Self {
        let n = lp.shape.n;
        let constrained = spec.constrained().to_vec();
        let mut row_of = vec![NO_ROW; n * lp.shape.k];
        let mut rhs = Vec::new();
        for (pos, &i) in constrained.iter().enumerate() {
            let mu = spec.marginal(i).expect("constrained");
            let keep = if pos == 0 { n } else { n - 1 };
            for j in 0..keep {
                row_of[i * n + j] = rhs.len();
                rhs.push(mu[j]);
            }
        }
        let k = lp.shape.k;
        let strides = constrained.iter().map(|&i| (i, n.pow((k - 1 - i) as u32))).collect();
        Columns { lp, strides, row_of, rhs }
    }

    /// Calls `f` with the row of every constrained mode's entry in column `col`.
    #[inline]
    fn for_each_row(&self, col: usize, mut f: impl FnMut(usize)) {
        let n = self.lp.shape.n;
        for &(i, stride) in &self.strides {
            let r = self.row_of[i * n + (col / stride) % n];
            if r != NO_ROW {
                f(r);
            }
        }
    }
}

impl LpColumns for Columns<'_> {
    fn rows(&self) -> usize {
        self.rhs.len()
    }
    fn cols(&self) -> usize {
        self.lp.costs.len()
    }
    fn cost(&self, j: usize) -> f64 {
        self.lp.costs[j]
    }
    fn column(&self, j: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        self.for_each_row(j, |r| out[r] = 1.0);
    }
    fn dot(&self, y: &[f64], j: usize) -> f64 {
        let mut s = 0.0;
        self.for_each_row(j, |r| s += y[r]);
        s
    }
}
