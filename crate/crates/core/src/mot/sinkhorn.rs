use super::{marginal_error, Backend, MotSolution};
use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::limits;
use crate::tensor::{CouplingTensor, MarginalSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SinkhornConfig {
    pub eta: f64,
    /// Stop once the summed l1 error of the constrained marginals is at most this.
    pub tol: f64,
    pub max_iters: usize,
}

impl SinkhornConfig {
    pub fn new(eta: f64, tol: f64, max_iters: usize) -> Result<Self> {
        let cfg = SinkhornConfig { eta, tol, max_iters };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidInput(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// `eta = k ln n / delta`: the entropy term then costs at most `delta`.
pub fn suggest_eta(n: usize, k: usize, delta: f64) -> f64 {
    (k as f64 * (n as f64).ln()).max(f64::MIN_POSITIVE) / delta
}

/// Multimarginal Sinkhorn on the constrained modes, in the log domain.
///
/// Non-convergence is not an error: the last iterate comes back with
/// `converged == false`.
pub fn sinkhorn(cost: &CostOracle, spec: &MarginalSpec, cfg: &SinkhornConfig) -> Result<MotSolution> {
    cfg.validate()?;
    let shape = cost.shape();
    if spec.shape() != shape {
        return Err(Error::DimensionMismatch("spec and cost shapes differ".into()));
    }
    limits::check_dense(shape.n, shape.k)?;
    let (n, k) = (shape.n, shape.k);
    let c = cost.materialize()?.data;
    let log_kernel: Vec<f64> = c.iter().map(|v| -cfg.eta * v).collect();

    let modes = spec.constrained().to_vec();
    let strides: Vec<usize> = (0..k).map(|i| n.pow((k - 1 - i) as u32)).collect();
    let digit = |idx: usize, i: usize| (idx / strides[i]) % n;
    let log_mu: Vec<Vec<f64>> =
        modes.iter().map(|&i| spec.marginal(i).unwrap().iter().map(|v| v.ln()).collect()).collect();
    let mut u = vec![vec![0.0; n]; modes.len()];
    let mut log_p = log_kernel.clone();

    let recompute = |u: &[Vec<f64>], log_p: &mut [f64]| {
        for (idx, lp) in log_p.iter_mut().enumerate() {
            let mut s = log_kernel[idx];
            for (pos, &i) in modes.iter().enumerate() {
                s += u[pos][digit(idx, i)];
            }
            *lp = s;
        }
    };

    if modes.is_empty() {
        // nothing to match: normalize the Gibbs kernel
        let z = log_sum_exp(log_p.iter().copied());
        log_p.iter_mut().for_each(|v| *v -= z);
    }

    let mut iterations = 0;
    let mut converged = modes.is_empty();
    while !converged && iterations < cfg.max_iters {
        for (pos, &i) in modes.iter().enumerate() {
            let lm = log_marginal(&log_p, n, |idx| digit(idx, i));
            for j in 0..n {
                let delta = log_mu[pos][j] - lm[j];
                u[pos][j] = if log_mu[pos][j] == f64::NEG_INFINITY { f64::NEG_INFINITY } else { u[pos][j] + delta };
            }
            recompute(&u, &mut log_p);
        }
        iterations += 1;
        let mut error = 0.0;
        for (pos, &i) in modes.iter().enumerate() {
            let lm = log_marginal(&log_p, n, |idx| digit(idx, i));
            error += lm.iter().zip(&log_mu[pos]).map(|(a, b)| (a.exp() - b.exp()).abs()).sum::<f64>();
        }
        converged = error <= cfg.tol;
    }

    let data: Vec<f64> = log_p.iter().map(|v| v.exp()).collect();
    let coupling = CouplingTensor::dense(shape, data)?;
    let value: f64 = coupling.to_dense_vec()?.iter().zip(&c).map(|(p, c)| p * c).sum();
    let entropy = coupling.entropy()?;
    let marginal_error = if modes.is_empty() { 0.0 } else { marginal_error(&coupling, spec)? };
    Ok(MotSolution {
        value,
        coupling,
        duals: None,
        backend: Backend::Sinkhorn,
        iterations,
        converged,
        regularized_value: Some(value - entropy / cfg.eta),
        marginal_error,
    })
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + values.map(|v| (v - m).exp()).sum::<f64>().ln()
}

fn log_marginal(log_p: &[f64], n: usize, digit: impl Fn(usize) -> usize) -> Vec<f64> {
    let mut max = vec![f64::NEG_INFINITY; n];
    for (idx, &v) in log_p.iter().enumerate() {
        let j = digit(idx);
        if v > max[j] {
            max[j] = v;
        }
    }
    let mut sum = vec![0.0; n];
    for (idx, &v) in log_p.iter().enumerate() {
        let j = digit(idx);
        if max[j] > f64::NEG_INFINITY {
            sum[j] += (v - max[j]).exp();
        }
    }
    (0..n).map(|j| if max[j] == f64::NEG_INFINITY { max[j] } else { max[j] + sum[j].ln() }).collect()
}
