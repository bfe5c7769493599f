use super::{envelope_value, normalized_spec, LpOracle, MotOracle};
use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::lp::{self, DenseLp, SimplexOptions};
use crate::min::{min_objective_gap, objective, MinResult, WeightMatrix};
use crate::tensor::{IndexTuple, MarginalSpec};

/// Below this half-gap the purified answer is reported as approximate.
pub const EXACT_HALF_GAP_FLOOR: f64 = 1e-9;
pub const DEFAULT_TARGET_GAP: f64 = 1e-6;
pub const APPROXIMATE_TARGET_GAP: f64 = 1e-7;

#[derive(Clone, Copy, Debug)]
pub struct KelleyOptions {
    /// Hard cap on oracle calls; the Lipschitz/diameter budget is usually far larger.
    pub max_iters: usize,
}

impl Default for KelleyOptions {
    fn default() -> Self {
        KelleyOptions { max_iters: 5000 }
    }
}

#[derive(Clone, Debug)]
pub struct EnvelopeMinimum {
    pub mu: MarginalSpec,
    /// Best `F` seen (an upper bound on `min F`).
    pub value: f64,
    /// Cutting-plane model minimum (a lower bound on `min F`).
    pub lower_bound: f64,
    pub iterations: usize,
    pub certified: bool,
    /// Best-seen `F` after each oracle call.
    pub trace: Vec<f64>,
}

/// `ceil((L D / gap)^2)` with `L = 2 C_max + max |p|`, `D = sqrt(2k)`.
pub fn iteration_budget(c_max: f64, p_max: f64, k: usize, gap: f64) -> f64 {
    let l = 2.0 * c_max + p_max;
    let d = (2.0 * k as f64).sqrt();
    ((l * d / gap).powi(2)).ceil().max(1.0)
}

/// Kelley's cutting-plane method for `min F` over the product of simplices.
///
/// Every oracle call at `mu_t` yields the global minorant
/// `F(mu) >= F(mu_t) + ⟨g_t, mu - mu_t⟩`. The next query point minimizes the
/// pointwise max of all cuts; that master problem is solved through its LP
/// dual, whose row count stays `1 + nk` while cuts add columns.
pub fn minimize_envelope_exact(
    oracle: &dyn MotOracle,
    p: &WeightMatrix,
    target_gap: f64,
    opts: &KelleyOptions,
) -> Result<EnvelopeMinimum> {
    if !(target_gap > 0.0) {
        return Err(Error::InvalidInput(format!("target gap must be positive, got {target_gap}")));
    }
    if oracle.accuracy() != 0.0 {
        return Err(Error::Oracle("cutting-plane minimization needs an exact oracle".into()));
    }
    let shape = oracle.shape();
    p.check_shape(shape)?;
    let (n, k) = (shape.n, shape.k);
    let budget = iteration_budget(oracle.c_max(), p.max_abs(), k, target_gap);
    let max_iters = (opts.max_iters as f64).min(budget) as usize;

    let mut mu = vec![vec![1.0 / n as f64; n]; k];
    let mut cuts: Vec<(Vec<f64>, f64)> = Vec::new();
    let mut best: Option<(f64, MarginalSpec)> = None;
    let mut trace = Vec::new();
    let mut lower_bound = f64::NEG_INFINITY;
    let mut certified = false;

    for _ in 0..max_iters.max(1) {
        let spec = normalized_spec(mu.clone())?;
        let point = envelope_value(oracle, p, &spec)?;
        let g = point.subgradient.ok_or_else(|| Error::Oracle("exact oracle returned no duals".into()))?;
        if best.as_ref().map_or(true, |(v, _)| point.value < *v) {
            best = Some((point.value, spec.clone()));
        }
        let upper = best.as_ref().expect("set above").0;
        trace.push(upper);

        let flat: Vec<f64> = g.into_iter().flatten().collect();
        let at: f64 = spec.marginals().iter().flat_map(|m| m.iter()).zip(&flat).map(|(a, b)| a * b).sum();
        cuts.push((flat, point.value - at));

        let (lb, next) = solve_master(&cuts, n, k)?;
        lower_bound = lb.min(upper);
        if upper - lower_bound <= target_gap {
            certified = true;
            break;
        }
        mu = next;
    }
    let (value, mu) = best.expect("at least one iteration");
    Ok(EnvelopeMinimum { mu, value, lower_bound, iterations: trace.len(), certified, trace })
}

/// Dual of `min_{mu, z} z  s.t.  z >= a_t + ⟨g_t, mu⟩,  mu_i ∈ Δ_n`:
///
/// `max Σ θ_t a_t + Σ_i λ_i  s.t.  θ ∈ Δ_T,  λ_i <= Σ_t θ_t g_t[i][j]`.
///
/// `λ_i` is shifted by a bound `B > max |g|` to make it nonnegative; the row
/// duals of the `(i, j)` constraints are then `-mu[i][j]`.
fn solve_master(cuts: &[(Vec<f64>, f64)], n: usize, k: usize) -> Result<(f64, Vec<Vec<f64>>)> {
    let rows = 1 + n * k;
    let bound = cuts.iter().flat_map(|(g, _)| g.iter()).fold(0.0f64, |m, v| m.max(v.abs())) + 1.0;
    let mut master = DenseLp::new(rows);
    for (g, a) in cuts {
        let mut col = vec![0.0; rows];
        col[0] = 1.0;
        for (slot, v) in col[1..].iter_mut().zip(g) {
            *slot = -v;
        }
        master.push_column(-a, col);
    }
    for i in 0..k {
        let mut col = vec![0.0; rows];
        col[1 + i * n..1 + (i + 1) * n].iter_mut().for_each(|v| *v = 1.0);
        master.push_column(-1.0, col);
    }
    for r in 1..rows {
        let mut col = vec![0.0; rows];
        col[r] = 1.0;
        master.push_column(0.0, col);
    }
    let mut rhs = vec![bound; rows];
    rhs[0] = 1.0;
    let sol = lp::solve(&master, &rhs, &SimplexOptions::default())
        .map_err(|e| Error::Internal(format!("cutting-plane master: {e}")))?;
    let lower = -sol.objective - k as f64 * bound;
    let mu = (0..k).map(|i| (0..n).map(|j| -sol.duals[1 + i * n + j]).collect()).collect();
    Ok((lower, mu))
}

/// Best objective over the support of an optimal coupling at `mu`.
pub fn purify(oracle: &dyn MotOracle, cost: &CostOracle, p: &WeightMatrix, mu: &MarginalSpec) -> Result<MinResult> {
    let answer = oracle.query(mu)?;
    let coupling =
        answer.coupling.ok_or_else(|| Error::Oracle("purification needs an oracle that returns couplings".into()))?;
    let mut best: Option<(f64, Vec<usize>)> = None;
    coupling.for_each_entry(|t, w| {
        if w > 0.0 {
            let v = objective(cost, p, t);
            if best.as_ref().map_or(true, |(bv, bt)| v < *bv || (v == *bv && t < bt.as_slice())) {
                best = Some((v, t.to_vec()));
            }
        }
    });
    let (value, witness) = best.ok_or_else(|| Error::Internal("optimal coupling has empty support".into()))?;
    Ok(MinResult { value, witness: IndexTuple::new(witness, cost.shape())? })
}

/// `(target_gap, approximate)` from half the minimum objective gap.
pub fn default_target_gap(half_gap: f64) -> (f64, bool) {
    if half_gap.is_infinite() {
        (DEFAULT_TARGET_GAP, false)
    } else if half_gap > EXACT_HALF_GAP_FLOOR {
        (DEFAULT_TARGET_GAP.min(half_gap), false)
    } else {
        (APPROXIMATE_TARGET_GAP, true)
    }
}

#[derive(Clone, Debug)]
pub struct ExactReduction {
    pub result: MinResult,
    pub queries: usize,
    pub iterations: usize,
    pub certified: bool,
    /// The half-gap was too small for purification to be provably exact.
    pub approximate: bool,
    pub target_gap: f64,
    pub envelope_value: f64,
    pub lower_bound: f64,
    pub trace: Vec<f64>,
}

/// Envelope minimization followed by purification, using the LP oracle.
pub fn min_via_mot_exact(cost: &CostOracle, p: &WeightMatrix) -> Result<ExactReduction> {
    min_via_mot_exact_with(cost, p, &KelleyOptions::default())
}

pub fn min_via_mot_exact_with(cost: &CostOracle, p: &WeightMatrix, opts: &KelleyOptions) -> Result<ExactReduction> {
    p.check_shape(cost.shape())?;
    let (target_gap, approximate) = default_target_gap(min_objective_gap(cost, p)? / 2.0);
    let oracle = LpOracle::new(cost)?;
    let env = minimize_envelope_exact(&oracle, p, target_gap, opts)?;
    let result = purify(&oracle, cost, p, &env.mu)?;
    Ok(ExactReduction {
        result,
        queries: oracle.queries(),
        iterations: env.iterations,
        certified: env.certified,
        approximate,
        target_gap,
        envelope_value: env.value,
        lower_bound: env.lower_bound,
        trace: env.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::{build_clique_tensor, build_maxcut_cost, build_twosat_cost, Cnf, Graph, KPartiteGraph};
    use crate::min::min_bruteforce;
    use crate::tensor::Shape;

    fn check(cost: &CostOracle, p: &WeightMatrix, expect: f64) -> ExactReduction {
        let r = min_via_mot_exact(cost, p).unwrap();
        assert!(r.certified);
        assert_eq!(r.result.value, expect);
        assert_eq!(r.result.value, min_bruteforce(cost, p).unwrap().value);
        assert!(r.trace.windows(2).all(|w| w[1] <= w[0]));
        r
    }

    #[test]
    fn constant_cost() {
        let s = Shape::new(3, 3).unwrap();
        check(&CostOracle::constant(s, 4.0).unwrap(), &WeightMatrix::zeros(s), 4.0);
    }

    #[test]
    fn twosat_instances() {
        let c = build_twosat_cost(&Cnf::new(2, vec![vec![1, 2]]).unwrap()).unwrap();
        let s = c.shape();
        check(&c, &WeightMatrix::zeros(s), -1.0);
        let p = WeightMatrix::repeated(vec![0.0, -0.25], 2);
        check(&c, &p, -0.75);
    }

    #[test]
    fn clique_triangle() {
        let (c, _) = build_clique_tensor(&KPartiteGraph::complete(2, 3).unwrap()).unwrap();
        check(&c, &WeightMatrix::zeros(c.shape()), -3.0);
    }

    #[test]
    fn maxcut_triangle() {
        let c = build_maxcut_cost(&Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()).unwrap();
        check(&c, &WeightMatrix::zeros(c.shape()), -2.0);
    }

    #[test]
    fn budget_formula() {
        assert_eq!(iteration_budget(1.0, 0.0, 2, 1.0), 16.0);
        assert_eq!(default_target_gap(0.5), (1e-6, false));
        assert_eq!(default_target_gap(1e-7), (1e-7, false));
        assert!(default_target_gap(1e-10).1);
    }
}
