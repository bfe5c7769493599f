use super::{marginal_error, Backend, MotSolution};
use crate::cost::{mask_to_tuple, CostOracle, SetFunction};
use crate::error::{Error, Result};
use crate::limits::DEFAULT_SET_FUNCTION_BRUTE_CAP;
use crate::tensor::{CouplingTensor, IndexTuple, MarginalSpec, Shape};

/// Chain `∅ = S_0 ⊂ S_1 ⊂ … ⊂ S_k` of top-t coordinate sets with the masses
/// `1 - x_(1)`, `x_(t) - x_(t+1)` placed on them.
fn chain(x: &[f64]) -> Vec<(u64, f64)> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    let mut out = Vec::with_capacity(x.len() + 1);
    let first = order.first().map_or(0.0, |&i| x[i]);
    out.push((0u64, 1.0 - first));
    let mut mask = 0u64;
    for (t, &i) in order.iter().enumerate() {
        mask |= 1 << i;
        let next = order.get(t + 1).map_or(0.0, |&j| x[j]);
        out.push((mask, x[i] - next));
    }
    out
}

fn set_function_and_point<'a>(cost: &'a CostOracle, x: &[f64]) -> Result<&'a SetFunction> {
    let f = cost.as_set_function()?;
    if x.len() != f.k() {
        return Err(Error::DimensionMismatch(format!("x has {} entries, k = {}", x.len(), f.k())));
    }
    if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::InvalidInput(format!("x entry {bad} outside [0, 1]")));
    }
    Ok(f)
}

/// Lovász extension of a set-function cost at `x ∈ [0,1]^k`.
pub fn lovasz_extension(cost: &CostOracle, x: &[f64]) -> Result<f64> {
    let f = set_function_and_point(cost, x)?;
    Ok(chain(x).into_iter().map(|(mask, w)| w * f.eval_mask(mask)).sum())
}

/// MOT with Bernoulli marginals `Ber(x_i)` for a submodular set function,
/// solved by the chain coupling. Submodularity is checked when `k <= 16`
/// and `verify` is set; larger instances are trusted.
pub fn solve_submodular(cost: &CostOracle, x: &[f64], verify: bool) -> Result<MotSolution> {
    let f = set_function_and_point(cost, x)?;
    let k = f.k();
    if verify && k <= DEFAULT_SET_FUNCTION_BRUTE_CAP && !f.is_submodular()? {
        return Err(Error::NotSubmodular);
    }
    let shape = Shape::new(2, k)?;
    let pieces = chain(x);
    let value = pieces.iter().map(|&(mask, w)| w * f.eval_mask(mask)).sum();
    let entries = pieces
        .into_iter()
        .filter(|&(_, w)| w > 0.0)
        .map(|(mask, w)| (IndexTuple::from_vec_unchecked(mask_to_tuple(mask, k)), w))
        .collect();
    let coupling = CouplingTensor::sparse(shape, entries)?;
    let marginal_error = marginal_error(&coupling, &MarginalSpec::bernoulli(x)?)?;
    Ok(MotSolution {
        value,
        coupling,
        duals: None,
        backend: Backend::Submodular,
        iterations: 0,
        converged: true,
        regularized_value: None,
        marginal_error,
    })
}
