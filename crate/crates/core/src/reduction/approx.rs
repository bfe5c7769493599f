use super::{envelope_value, normalized_spec, project_to_simplex, renormalize, MotOracle};
use crate::error::{Error, Result};
use crate::min::WeightMatrix;
use crate::tensor::{IndexTuple, MarginalSpec};
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, StandardNormal};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug)]
pub struct AnnealConfig {
    pub seed: u64,
    pub restarts: usize,
    pub steps: usize,
    /// Vertices sampled from the product of the best marginals at the end.
    pub final_samples: usize,
    /// Rounds of single-coordinate vertex improvement after sampling.
    pub polish_rounds: usize,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig { seed: 0, restarts: 2, steps: 150, final_samples: 12, polish_rounds: 4 }
    }
}

#[derive(Clone, Debug)]
pub struct ApproxReduction {
    /// Oracle-reported `F` at the returned vertex.
    pub value: f64,
    pub witness: IndexTuple,
    pub best_mu: MarginalSpec,
    pub queries: usize,
}

struct Walker<'a> {
    oracle: &'a dyn MotOracle,
    p: &'a WeightMatrix,
    queries: usize,
    vertices: BTreeMap<Vec<usize>, f64>,
}

impl Walker<'_> {
    fn eval(&mut self, mu: &[Vec<f64>]) -> Result<f64> {
        self.queries += 1;
        Ok(envelope_value(self.oracle, self.p, &normalized_spec(mu.to_vec())?)?.value)
    }

    fn eval_vertex(&mut self, t: &[usize]) -> Result<f64> {
        if let Some(v) = self.vertices.get(t) {
            return Ok(*v);
        }
        self.queries += 1;
        let spec = MarginalSpec::point_masses(self.oracle.shape(), t)?;
        let v = envelope_value(self.oracle, self.p, &spec)?.value;
        self.vertices.insert(t.to_vec(), v);
        Ok(v)
    }
}

/// Zeroth-order minimization of the envelope under an `eps`-accurate oracle.
///
/// Simulated annealing over the product of simplices with a geometric
/// temperature schedule. Proposals alternate between Dikin-style steps
/// (`mu + s (mu ∘ z - mu ⟨mu, z⟩)`, projected back onto the simplex) and
/// convex moves toward random vertices. The walk's best point is then rounded
/// to vertices by sampling from its product measure and polished by
/// single-coordinate vertex moves; the best vertex value is returned.
pub fn min_via_mot_approx(
    oracle: &dyn MotOracle,
    p: &WeightMatrix,
    eps: f64,
    cfg: &AnnealConfig,
) -> Result<ApproxReduction> {
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidInput(format!("eps must be >= 0, got {eps}")));
    }
    let shape = oracle.shape();
    p.check_shape(shape)?;
    let (n, k) = (shape.n, shape.k);
    let eps = eps.max(oracle.accuracy());
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut w = Walker { oracle, p, queries: 0, vertices: BTreeMap::new() };

    let scale = oracle.c_max() + k as f64 * p.max_abs();
    let t0 = (0.5 * scale).max(eps).max(1e-12);
    let t_end = (1e-4 * t0).max(0.5 * eps).max(1e-15).min(t0);
    let steps = cfg.steps.max(1);

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for restart in 0..cfg.restarts.max(1) {
        let mut mu: Vec<Vec<f64>> = if restart == 0 || n == 1 {
            vec![vec![1.0 / n as f64; n]; k]
        } else {
            let dir = Dirichlet::new(&vec![1.0; n]).map_err(|e| Error::Internal(e.to_string()))?;
            (0..k).map(|_| dir.sample(&mut rng)).collect()
        };
        let mut f = w.eval(&mu)?;
        if best.as_ref().map_or(true, |(b, _)| f < *b) {
            best = Some((f, mu.clone()));
        }
        for s in 0..steps {
            let frac = s as f64 / (steps.max(2) - 1) as f64;
            let temp = t0 * (t_end / t0).powf(frac);
            let sigma = 0.5 * (1.0 - frac) + 0.02;
            let proposal =
                if rng.gen_bool(0.5) { dikin_step(&mu, sigma, &mut rng) } else { vertex_step(&mu, sigma, &mut rng) };
            let fp = w.eval(&proposal)?;
            if fp <= f || rng.gen::<f64>() < (-(fp - f) / temp).exp() {
                mu = proposal;
                f = fp;
                if best.as_ref().map_or(true, |(b, _)| f < *b) {
                    best = Some((f, mu.clone()));
                }
            }
        }
    }
    let (_, best_mu) = best.expect("at least one evaluation");

    let mut candidates: Vec<Vec<usize>> = vec![best_mu
        .iter()
        .map(|m| (0..n).max_by(|&a, &b| m[a].total_cmp(&m[b]).then(b.cmp(&a))).unwrap_or(0))
        .collect()];
    let samplers: Vec<WeightedIndex<f64>> = best_mu
        .iter()
        .map(|m| WeightedIndex::new(m).map_err(|e| Error::Internal(e.to_string())))
        .collect::<Result<_>>()?;
    for _ in 0..cfg.final_samples {
        candidates.push(samplers.iter().map(|d| d.sample(&mut rng)).collect());
    }
    let mut best_vertex: Option<(f64, Vec<usize>)> = None;
    for t in candidates {
        let v = w.eval_vertex(&t)?;
        if best_vertex.as_ref().map_or(true, |(b, _)| v < *b) {
            best_vertex = Some((v, t));
        }
    }
    let (mut value, mut vertex) = best_vertex.expect("argmax candidate");
    for _ in 0..cfg.polish_rounds {
        let mut improved = false;
        for i in 0..k {
            for j in 0..n {
                if j == vertex[i] {
                    continue;
                }
                let mut t = vertex.clone();
                t[i] = j;
                let v = w.eval_vertex(&t)?;
                if v < value {
                    value = v;
                    vertex = t;
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Ok(ApproxReduction {
        value,
        witness: IndexTuple::new(vertex, shape)?,
        best_mu: normalized_spec(best_mu)?,
        queries: w.queries,
    })
}

fn dikin_step(mu: &[Vec<f64>], sigma: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    mu.iter()
        .map(|m| {
            let z: Vec<f64> = m.iter().map(|_| rng.sample(StandardNormal)).collect();
            let mean: f64 = m.iter().zip(&z).map(|(a, b)| a * b).sum();
            let moved: Vec<f64> = m.iter().zip(&z).map(|(a, b)| a + sigma * a * (b - mean)).collect();
            project_to_simplex(&moved)
        })
        .collect()
}

fn vertex_step(mu: &[Vec<f64>], sigma: f64, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let lambda = rng.gen_range(0.0..=sigma.min(1.0));
    mu.iter()
        .map(|m| {
            let n = m.len();
            let target = rng.gen_range(0..n);
            let mut out: Vec<f64> = m.iter().map(|a| (1.0 - lambda) * a).collect();
            out[target] += lambda;
            renormalize(&mut out);
            out
        })
        .collect()
}
