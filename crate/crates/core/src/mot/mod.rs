//! MOT backends: exact LP with duals, log-domain Sinkhorn, and the Lovász
//! chain coupling for submodular set functions.

mod exact;
mod sinkhorn;
mod submodular;

pub use exact::{marginal_error, solve_lp, MotLp};
pub use sinkhorn::{sinkhorn, suggest_eta, SinkhornConfig};
pub use submodular::{lovasz_extension, solve_submodular};

use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::limits;
use crate::tensor::{for_each_tuple, CouplingTensor, DualPotentials};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Lp,
    Sinkhorn,
    Submodular,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Lp => "lp",
            Backend::Sinkhorn => "sinkhorn",
            Backend::Submodular => "submodular",
        }
    }
}

#[derive(Clone, Debug)]
pub struct MotSolution {
    /// `⟨P, C⟩` of the returned coupling.
    pub value: f64,
    pub coupling: CouplingTensor,
    /// Optimal potentials; LP backend only.
    pub duals: Option<DualPotentials>,
    pub backend: Backend,
    pub iterations: usize,
    pub converged: bool,
    /// Sinkhorn only: `⟨P, C⟩ - H(P) / eta`.
    pub regularized_value: Option<f64>,
    /// Summed l1 error over the constrained marginals.
    pub marginal_error: f64,
}

/// True iff `C_j - Σ_i p_i[j_i] >= -tol` for every tuple.
pub fn check_dual_feasibility(cost: &CostOracle, duals: &DualPotentials, tol: f64) -> Result<bool> {
    let shape = cost.shape();
    limits::check_dense(shape.n, shape.k)?;
    if duals.shape() != Some(shape) {
        return Err(Error::DimensionMismatch(format!("duals do not match cost shape n={}, k={}", shape.n, shape.k)));
    }
    let mut ok = true;
    for_each_tuple(shape, |_, t| {
        if ok && cost.evaluate(t) - duals.sum_at(t) < -tol {
            ok = false;
        }
    });
    Ok(ok)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{MarginalSpec, Shape};

    #[test]
    fn dual_feasibility_examples() {
        let shape = Shape::new(2, 2).unwrap();
        let zero = CostOracle::constant(shape, 0.0).unwrap();
        let mut d = DualPotentials::zeros(shape);
        assert!(check_dual_feasibility(&zero, &d, 1e-9).unwrap());
        d.p[0][1] += 1.0;
        assert!(!check_dual_feasibility(&zero, &d, 1e-9).unwrap());

        let c = CostOracle::dense(shape, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let sol = solve_lp(&c, &MarginalSpec::uniform(shape).unwrap()).unwrap();
        assert!(check_dual_feasibility(&c, sol.duals.as_ref().unwrap(), 1e-9).unwrap());
    }
}
