//! MIN_C(p) through a MOT_C oracle only: envelope evaluation, cutting-plane
//! minimization with support purification, and a zeroth-order annealer for
//! noisy oracles.

mod approx;
mod exact;

pub use approx::{min_via_mot_approx, AnnealConfig, ApproxReduction};
pub use exact::{
    default_target_gap, iteration_budget, min_via_mot_exact, min_via_mot_exact_with, minimize_envelope_exact, purify,
    EnvelopeMinimum, ExactReduction, KelleyOptions,
};

use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::min::WeightMatrix;
use crate::mot::MotLp;
use crate::tensor::{CouplingTensor, DualPotentials, MarginalSpec, Shape};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

#[derive(Clone, Debug)]
pub struct OracleAnswer {
    pub value: f64,
    pub duals: Option<DualPotentials>,
    pub coupling: Option<CouplingTensor>,
}

/// A MOT_C value oracle. Exact oracles (`accuracy() == 0`) must return duals.
pub trait MotOracle: Send + Sync {
    fn shape(&self) -> Shape;
    /// Declared additive accuracy; 0 for exact.
    fn accuracy(&self) -> f64;
    /// Declared bound on `max |C|`.
    fn c_max(&self) -> f64;
    fn query(&self, spec: &MarginalSpec) -> Result<OracleAnswer>;
    fn queries(&self) -> usize;
}

/// Exact oracle backed by the simplex solver.
pub struct LpOracle {
    lp: MotLp,
    c_max: f64,
    count: AtomicUsize,
}

impl LpOracle {
    pub fn new(cost: &CostOracle) -> Result<Self> {
        Ok(LpOracle { lp: MotLp::new(cost)?, c_max: cost.cost_upper_bound(), count: AtomicUsize::new(0) })
    }
}

impl MotOracle for LpOracle {
    fn shape(&self) -> Shape {
        self.lp.shape()
    }
    fn accuracy(&self) -> f64 {
        0.0
    }
    fn c_max(&self) -> f64 {
        self.c_max
    }
    fn query(&self, spec: &MarginalSpec) -> Result<OracleAnswer> {
        self.count.fetch_add(1, Ordering::Relaxed);
        let sol = self.lp.solve(spec)?;
        Ok(OracleAnswer { value: sol.value, duals: sol.duals, coupling: Some(sol.coupling) })
    }
    fn queries(&self) -> usize {
        self.count.load(Ordering::Relaxed)
    }
}

/// Wraps an oracle, adds seeded `U(-eps, eps)` noise and hides duals and couplings.
pub struct NoisyOracle<O> {
    inner: O,
    eps: f64,
    rng: Mutex<ChaCha8Rng>,
}

impl<O: MotOracle> NoisyOracle<O> {
    pub fn new(inner: O, eps: f64, seed: u64) -> Result<Self> {
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::InvalidInput(format!("noise level must be >= 0, got {eps}")));
        }
        Ok(NoisyOracle { inner, eps, rng: Mutex::new(ChaCha8Rng::seed_from_u64(seed)) })
    }
}

impl<O: MotOracle> MotOracle for NoisyOracle<O> {
    fn shape(&self) -> Shape {
        self.inner.shape()
    }
    fn accuracy(&self) -> f64 {
        self.eps
    }
    fn c_max(&self) -> f64 {
        self.inner.c_max()
    }
    fn query(&self, spec: &MarginalSpec) -> Result<OracleAnswer> {
        let exact = self.inner.query(spec)?;
        let noise = if self.eps > 0.0 {
            self.rng.lock().expect("noise rng poisoned").gen_range(-self.eps..=self.eps)
        } else {
            0.0
        };
        Ok(OracleAnswer { value: exact.value + noise, duals: None, coupling: None })
    }
    fn queries(&self) -> usize {
        self.inner.queries()
    }
}

/// `F(mu) = -⟨mu, p⟩ + MOT_C(mu)` with subgradient blocks `q_i - p_i`.
#[derive(Clone, Debug)]
pub struct EnvelopePoint {
    pub mu: MarginalSpec,
    pub value: f64,
    pub subgradient: Option<Vec<Vec<f64>>>,
    pub coupling: Option<CouplingTensor>,
}

pub fn envelope_value(oracle: &dyn MotOracle, p: &WeightMatrix, mu: &MarginalSpec) -> Result<EnvelopePoint> {
    let shape = oracle.shape();
    if mu.shape() != shape || !mu.is_fully_fixed() {
        return Err(Error::InvalidMarginal("envelope needs a fully fixed spec of the oracle's shape".into()));
    }
    p.check_shape(shape)?;
    let answer = oracle.query(mu)?;
    let linear: f64 =
        mu.marginals().iter().zip(&p.p).map(|(m, pi)| m.iter().zip(pi).map(|(a, b)| a * b).sum::<f64>()).sum();
    let subgradient = answer
        .duals
        .map(|q| q.p.iter().zip(&p.p).map(|(qi, pi)| qi.iter().zip(pi).map(|(a, b)| a - b).collect()).collect());
    Ok(EnvelopePoint { mu: mu.clone(), value: answer.value - linear, subgradient, coupling: answer.coupling })
}

/// `2 * C_max`: the l1-Lipschitz constant of `mu -> MOT_C(mu)`.
pub fn lipschitz_bound(cost: &CostOracle) -> f64 {
    2.0 * cost.cost_upper_bound()
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    let mut out: Vec<f64> = v.iter().map(|x| (x - theta).max(0.0)).collect();
    renormalize(&mut out);
    out
}

/// Clamps to `>= 0` and rescales to unit mass (exact to rounding).
pub(crate) fn renormalize(v: &mut [f64]) {
    v.iter_mut().for_each(|x| {
        if !(*x > 0.0) {
            *x = 0.0
        }
    });
    let s: f64 = v.iter().sum();
    if s <= 0.0 {
        let u = 1.0 / v.len() as f64;
        v.iter_mut().for_each(|x| *x = u);
    } else {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

/// Full spec from marginals, each clamped to `>= 0` and rescaled to unit mass.
pub fn normalized_spec(mut marginals: Vec<Vec<f64>>) -> Result<MarginalSpec> {
    marginals.iter_mut().for_each(|m| renormalize(m));
    MarginalSpec::full(marginals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::min::objective;
    use crate::tensor::for_each_tuple;

    #[test]
    fn envelope_at_vertices_is_the_objective() {
        let s = Shape::new(3, 2).unwrap();
        let c = CostOracle::dense(s, (0..9).map(|v| ((v * 5) % 7) as f64).collect()).unwrap();
        let p = WeightMatrix::new(vec![vec![0.5, -1.0, 0.0], vec![0.25, 0.0, 2.0]], s).unwrap();
        let oracle = LpOracle::new(&c).unwrap();
        for_each_tuple(s, |_, t| {
            let e = envelope_value(&oracle, &p, &MarginalSpec::point_masses(s, t).unwrap()).unwrap();
            assert_eq!(e.value, objective(&c, &p, t));
        });
        assert_eq!(oracle.queries(), 9);
    }

    #[test]
    fn worked_envelope_value() {
        let s = Shape::new(2, 2).unwrap();
        let c = CostOracle::dense(s, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let e =
            envelope_value(&LpOracle::new(&c).unwrap(), &WeightMatrix::zeros(s), &MarginalSpec::uniform(s).unwrap())
                .unwrap();
        assert!(e.value.abs() < 1e-12);
        assert!(e.subgradient.is_some());
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        assert_eq!(project_to_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let v = project_to_simplex(&[0.5, 0.5, 0.5]);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let v = project_to_simplex(&[-1.0, 0.3, 0.9]);
        assert!((v[0]).abs() < 1e-15 && (v[1] - 0.2).abs() < 1e-12 && (v[2] - 0.8).abs() < 1e-12);
    }

    #[test]
    fn noisy_oracle_is_bounded_and_seeded() {
        let s = Shape::new(2, 2).unwrap();
        let c = CostOracle::constant(s, 1.0).unwrap();
        let spec = MarginalSpec::uniform(s).unwrap();
        let a = NoisyOracle::new(LpOracle::new(&c).unwrap(), 0.01, 7).unwrap();
        let b = NoisyOracle::new(LpOracle::new(&c).unwrap(), 0.01, 7).unwrap();
        for _ in 0..20 {
            let (x, y) = (a.query(&spec).unwrap(), b.query(&spec).unwrap());
            assert_eq!(x.value, y.value);
            assert!((x.value - 1.0).abs() <= 0.01 + 1e-12);
            assert!(x.duals.is_none());
        }
    }

    #[test]
    fn lipschitz_bounds() {
        let s = Shape::new(2, 3).unwrap();
        assert_eq!(lipschitz_bound(&CostOracle::constant(s, 0.0).unwrap()), 0.0);
    }
}
