//! Reference solvers for `MIN_C(p) = min_j C_j - Σ_i p_i[j_i]`.
//!
//! Brute force is exponential in `k` and only meant for desk-scale instances.
//! The zero-weight 2-SAT case is polynomial (satisfiability); the weighted
//! 2-SAT case is served by brute force only, since minimum-weight 2-SAT is
//! NP-hard.

pub mod twosat;

use crate::cost::{CostFamily, CostOracle};
use crate::error::{Error, Result};
use crate::limits;
use crate::tensor::{for_each_tuple, IndexTuple, Shape};

/// The weight argument `p = (p_1, ..., p_k)` of `MIN_C(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMatrix {
    pub p: Vec<Vec<f64>>,
}

impl WeightMatrix {
    pub fn zeros(shape: Shape) -> Self {
        WeightMatrix { p: vec![vec![0.0; shape.n]; shape.k] }
    }

    pub fn new(p: Vec<Vec<f64>>, shape: Shape) -> Result<Self> {
        let w = WeightMatrix { p };
        w.check_shape(shape)?;
        Ok(w)
    }

    /// Every mode gets the same weight vector.
    pub fn repeated(row: Vec<f64>, k: usize) -> Self {
        WeightMatrix { p: vec![row; k] }
    }

    pub fn check_shape(&self, shape: Shape) -> Result<()> {
        if self.p.len() != shape.k || self.p.iter().any(|r| r.len() != shape.n) {
            return Err(Error::DimensionMismatch(format!(
                "weights must be k = {} vectors of length n = {}",
                shape.k, shape.n
            )));
        }
        if self.p.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("weights must be finite".into()));
        }
        Ok(())
    }

    pub fn sum_at(&self, tuple: &[usize]) -> f64 {
        tuple.iter().enumerate().map(|(i, &j)| self.p[i][j]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.p.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_zero(&self) -> bool {
        self.p.iter().flatten().all(|v| *v == 0.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinResult {
    pub value: f64,
    pub witness: IndexTuple,
}

/// `f(j) = C_j - Σ_i p_i[j_i]`.
pub fn objective(cost: &CostOracle, p: &WeightMatrix, tuple: &[usize]) -> f64 {
    cost.evaluate(tuple) - p.sum_at(tuple)
}

fn check_enumerable(shape: Shape) -> Result<()> {
    limits::check_dense(shape.n, shape.k).map(|_| ())
}

/// Exact minimum by enumeration; ties go to the lexicographically smallest tuple.
pub fn min_bruteforce(cost: &CostOracle, p: &WeightMatrix) -> Result<MinResult> {
    let shape = cost.shape();
    p.check_shape(shape)?;
    check_enumerable(shape)?;
    let mut best = f64::INFINITY;
    let mut witness = vec![0; shape.k];
    for_each_tuple(shape, |_, t| {
        let v = objective(cost, p, t);
        if v < best {
            best = v;
            witness.copy_from_slice(t);
        }
    });
    Ok(MinResult { value: best, witness: IndexTuple::from_vec_unchecked(witness) })
}

/// `MIN_C(0)` for a 2-SAT cost in polynomial time: `-1` with a satisfying
/// witness when satisfiable, else `0` at the all-false tuple.
pub fn twosat_min_zero(cost: &CostOracle) -> Result<MinResult> {
    let phi = match cost.family() {
        CostFamily::TwoSat(phi) => phi,
        _ => return Err(Error::WrongFamily { expected: "two_sat", found: cost.family_name() }),
    };
    Ok(match twosat::solve(phi) {
        Some(assignment) => MinResult {
            value: -1.0,
            witness: IndexTuple::from_vec_unchecked(assignment.iter().map(|&b| b as usize).collect()),
        },
        None => MinResult { value: 0.0, witness: IndexTuple::zeros(phi.num_vars()) },
    })
}

/// Smallest strictly positive spacing between distinct values of `f` over all
/// tuples; `+inf` when `f` is constant. Values within `1e-12` relative of each
/// other count as equal, so floating-point noise is not reported as a gap.
pub fn min_objective_gap(cost: &CostOracle, p: &WeightMatrix) -> Result<f64> {
    let shape = cost.shape();
    p.check_shape(shape)?;
    check_enumerable(shape)?;
    let mut values = Vec::with_capacity(shape.dense_len()?);
    for_each_tuple(shape, |_, t| values.push(objective(cost, p, t)));
    values.sort_by(f64::total_cmp);
    let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let noise = 1e-12 * scale;
    Ok(values.windows(2).map(|w| w[1] - w[0]).filter(|d| *d > noise).fold(f64::INFINITY, f64::min))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{build_clique_tensor, build_twosat_cost, Cnf, KPartiteGraph, Vertex};

    fn triangle() -> KPartiteGraph {
        let v = Vertex::new;
        KPartiteGraph::new(2, 3, [(v(0, 1), v(1, 1)), (v(1, 1), v(2, 1)), (v(0, 1), v(2, 1))]).unwrap()
    }

    #[test]
    fn zero_cost_zero_weights() {
        let s = Shape::new(3, 3).unwrap();
        let c = CostOracle::constant(s, 0.0).unwrap();
        let r = min_bruteforce(&c, &WeightMatrix::zeros(s)).unwrap();
        assert_eq!(r.value, 0.0);
        assert_eq!(r.witness.as_slice(), &[0, 0, 0]);
    }

    #[test]
    fn twosat_dual_weight_instance() {
        let c = build_twosat_cost(&Cnf::new(2, vec![vec![1, 2]]).unwrap()).unwrap();
        let k = 2.0;
        let p = WeightMatrix::repeated(vec![0.0, -1.0 / (2.0 * k)], 2);
        // enumeration: (0,0): 0; (0,1): -1 + 0.25; (1,0): -1 + 0.25; (1,1): -1 + 0.5
        let r = min_bruteforce(&c, &p).unwrap();
        assert_eq!(r.value, -0.75);
        assert_eq!(r.witness.as_slice(), &[0, 1]);
    }

    #[test]
    fn clique_triangle_minimum() {
        let (c, _) = build_clique_tensor(&triangle()).unwrap();
        let r = min_bruteforce(&c, &WeightMatrix::zeros(c.shape())).unwrap();
        assert_eq!(r.value, -3.0);
        assert_eq!(r.witness.as_slice(), &[1, 1, 1]);
        assert_eq!(min_objective_gap(&c, &WeightMatrix::zeros(c.shape())).unwrap(), 1.0);
    }

    #[test]
    fn twosat_polynomial_path() {
        let sat = build_twosat_cost(&Cnf::new(2, vec![vec![1, 2]]).unwrap()).unwrap();
        let r = twosat_min_zero(&sat).unwrap();
        assert_eq!(r.value, -1.0);
        assert_eq!(sat.evaluate(&r.witness), -1.0);
        let unsat = build_twosat_cost(&Cnf::new(1, vec![vec![1], vec![-1]]).unwrap()).unwrap();
        let r = twosat_min_zero(&unsat).unwrap();
        assert_eq!((r.value, r.witness.as_slice()), (0.0, &[0usize][..]));
        let other = CostOracle::constant(Shape::new(2, 2).unwrap(), 1.0).unwrap();
        assert!(matches!(twosat_min_zero(&other), Err(Error::WrongFamily { .. })));
    }

    #[test]
    fn objective_gap_cases() {
        let s = Shape::new(2, 3).unwrap();
        let c = build_twosat_cost(&Cnf::new(3, vec![vec![1, -2]]).unwrap()).unwrap();
        assert_eq!(min_objective_gap(&c, &WeightMatrix::zeros(s)).unwrap(), 1.0);
        let flat = CostOracle::constant(s, 2.5).unwrap();
        assert_eq!(min_objective_gap(&flat, &WeightMatrix::zeros(s)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn cap_is_enforced() {
        let s = Shape::new(10, 8).unwrap();
        let c = CostOracle::constant(s, 0.0).unwrap();
        assert!(matches!(min_bruteforce(&c, &WeightMatrix::zeros(s)), Err(Error::CapExceeded { .. })));
    }
}
