//! Set functions on subsets of `[k]`, viewed as costs over `{0, 1}^k`.
//!
//! A tuple `(j_1, ..., j_k)` corresponds to the subset `S = {i : j_i = 1}`,
//! encoded as a bitmask with bit `i` set for element `i` (0-based).

use crate::error::{Error, Result};
use crate::limits::DEFAULT_SET_FUNCTION_BRUTE_CAP;

use super::graph::Graph;

#[derive(Clone, Debug, PartialEq)]
pub enum SetFunctionRepr {
    /// Full table of `2^k` values indexed by bitmask.
    Table(Vec<f64>),
    /// `scale * cut(G, S)`; `scale = -1` gives the Max-Cut encoding.
    Cut { graph: Graph, scale: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SetFunction {
    k: usize,
    repr: SetFunctionRepr,
}

impl SetFunction {
    pub fn table(k: usize, values: Vec<f64>) -> Result<Self> {
        if k == 0 || k > 30 {
            return Err(Error::InvalidInput(format!("set function ground set size {k} unsupported")));
        }
        if values.len() != 1 << k {
            return Err(Error::DimensionMismatch(format!(
                "set function table has {} values, expected 2^{k}",
                values.len()
            )));
        }
        Ok(SetFunction { k, repr: SetFunctionRepr::Table(values) })
    }

    /// `scale * cut(G, S)`, stored as a table when `k` is within the brute-force cap.
    pub fn cut(graph: Graph, scale: f64) -> Result<Self> {
        let k = graph.vertices();
        if k == 0 || k > 63 {
            return Err(Error::InvalidInput(format!("cut function on {k} vertices unsupported")));
        }
        let implicit = SetFunction { k, repr: SetFunctionRepr::Cut { graph, scale } };
        if k <= DEFAULT_SET_FUNCTION_BRUTE_CAP {
            let table = (0..1u64 << k).map(|m| implicit.eval_mask(m)).collect();
            return Self::table(k, table);
        }
        Ok(implicit)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn repr(&self) -> &SetFunctionRepr {
        &self.repr
    }

    pub fn eval_mask(&self, mask: u64) -> f64 {
        match &self.repr {
            SetFunctionRepr::Table(t) => t[mask as usize],
            SetFunctionRepr::Cut { graph, scale } => scale * graph.cut_value(mask) as f64,
        }
    }

    pub fn eval_tuple(&self, tuple: &[usize]) -> f64 {
        self.eval_mask(tuple_to_mask(tuple))
    }

    pub fn max_abs(&self) -> f64 {
        match &self.repr {
            SetFunctionRepr::Table(t) => t.iter().fold(0.0, |m, v| m.max(v.abs())),
            SetFunctionRepr::Cut { graph, scale } => scale.abs() * graph.edges().len() as f64,
        }
    }

    fn check_cap(&self) -> Result<()> {
        if self.k > DEFAULT_SET_FUNCTION_BRUTE_CAP {
            return Err(Error::CapExceeded {
                entries: (self.k as f64).exp2(),
                cap: 1 << DEFAULT_SET_FUNCTION_BRUTE_CAP,
            });
        }
        Ok(())
    }

    /// Smallest value of `F(S+i) + F(S+j) - F(S+i+j) - F(S)` over all `S` and `i < j` outside `S`.
    /// Nonnegative iff submodular.
    fn min_diminishing_return(&self, sign: f64) -> Result<f64> {
        self.check_cap()?;
        let mut worst = f64::INFINITY;
        for s in 0..1u64 << self.k {
            let fs = self.eval_mask(s);
            for i in 0..self.k {
                if s >> i & 1 == 1 {
                    continue;
                }
                let fi = self.eval_mask(s | 1 << i);
                for j in i + 1..self.k {
                    if s >> j & 1 == 1 {
                        continue;
                    }
                    let fj = self.eval_mask(s | 1 << j);
                    let fij = self.eval_mask(s | 1 << i | 1 << j);
                    worst = worst.min(sign * (fi + fj - fij - fs));
                }
            }
        }
        Ok(worst)
    }

    fn tolerance(&self) -> f64 {
        1e-12 * self.max_abs().max(1.0)
    }

    pub fn is_submodular(&self) -> Result<bool> {
        Ok(self.k < 2 || self.min_diminishing_return(1.0)? >= -self.tolerance())
    }

    pub fn is_supermodular(&self) -> Result<bool> {
        Ok(self.k < 2 || self.min_diminishing_return(-1.0)? >= -self.tolerance())
    }
}

pub fn tuple_to_mask(tuple: &[usize]) -> u64 {
    tuple.iter().enumerate().fold(0u64, |m, (i, &j)| if j != 0 { m | 1 << i } else { m })
}

pub fn mask_to_tuple(mask: u64, k: usize) -> Vec<usize> {
    (0..k).map(|i| (mask >> i & 1) as usize).collect()
}
