//! Couplings over `[n]^k`, marginal specifications, entropy and the
//! marginal-repair rounding onto the transportation polytope.

use serde::{Deserialize, Serialize};

use crate::cost::CostOracle;
use crate::error::{Error, Result};
use crate::limits;

/// Tolerance for "exact" marginal membership.
pub const EXACT_TOL: f64 = 1e-9;
/// Tolerance for normalization preconditions.
pub const NORMALIZATION_TOL: f64 = 1e-6;
/// Below this total deficit the rounding correction term is skipped.
const DEFICIT_FLOOR: f64 = 1e-12;

/// Side length `n` and number of modes `k` of a tensor over `[n]^k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub n: usize,
    pub k: usize,
}

impl Shape {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidInput(format!("shape needs n, k >= 1 (got n = {n}, k = {k})")));
        }
        Ok(Shape { n, k })
    }

    /// Number of entries, checked against the dense cap.
    pub fn dense_len(&self) -> Result<usize> {
        limits::check_dense(self.n, self.k)
    }

    /// Row-major linear index; mode 0 varies slowest, so increasing
    /// linear indices enumerate tuples in lexicographic order.
    pub fn linear_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &j| acc * self.n + j)
    }

    pub fn unrank(&self, mut index: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = index % self.n;
            index /= self.n;
        }
    }

    pub fn check_tuple(&self, tuple: &[usize]) -> Result<()> {
        if tuple.len() != self.k {
            return Err(Error::DimensionMismatch(format!(
                "index tuple has length {}, expected k = {}",
                tuple.len(),
                self.k
            )));
        }
        if let Some(&bad) = tuple.iter().find(|&&j| j >= self.n) {
            return Err(Error::InvalidInput(format!("index entry {bad} out of range for n = {}", self.n)));
        }
        Ok(())
    }

    pub fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.k {
            return Err(Error::ModeOutOfRange { mode, k: self.k });
        }
        Ok(())
    }
}

/// Calls `f(linear_index, tuple)` for every tuple of `[n]^k` in lexicographic order.
pub fn for_each_tuple(shape: Shape, mut f: impl FnMut(usize, &[usize])) {
    let mut tuple = vec![0usize; shape.k];
    let mut index = 0usize;
    loop {
        f(index, &tuple);
        index += 1;
        // odometer increment, last mode fastest
        let mut mode = shape.k;
        loop {
            if mode == 0 {
                return;
            }
            mode -= 1;
            tuple[mode] += 1;
            if tuple[mode] < shape.n {
                break;
            }
            tuple[mode] = 0;
        }
    }
}

/// An index `(j_1, ..., j_k)` with every entry in `[n]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct IndexTuple(Vec<usize>);

impl IndexTuple {
    pub fn new(entries: Vec<usize>, shape: Shape) -> Result<Self> {
        shape.check_tuple(&entries)?;
        Ok(IndexTuple(entries))
    }

    pub fn zeros(k: usize) -> Self {
        IndexTuple(vec![0; k])
    }

    pub(crate) fn from_vec_unchecked(entries: Vec<usize>) -> Self {
        IndexTuple(entries)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Entries shifted to 1-based numbering, as used in file formats.
    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|j| j + 1).collect()
    }
}

impl std::ops::Deref for IndexTuple {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Storage {
    Dense(Vec<f64>),
    /// Sorted lexicographically by index, indices distinct.
    Sparse(Vec<(IndexTuple, f64)>),
}

/// A nonnegative tensor over `[n]^k`, dense or sparse.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTensor {
    shape: Shape,
    storage: Storage,
}

impl CouplingTensor {
    pub fn dense(shape: Shape, data: Vec<f64>) -> Result<Self> {
        if let Some(bad) = data.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!("coupling entries must be finite and nonnegative (found {bad})")));
        }
        Self::dense_unchecked(shape, data)
    }

    /// Dense tensor without the sign check; only the length is validated.
    /// Useful for perturbed inputs to [`CouplingTensor::is_coupling`].
    pub fn dense_unchecked(shape: Shape, data: Vec<f64>) -> Result<Self> {
        let len = shape.dense_len()?;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "dense data has {} entries, expected n^k = {len}",
                data.len()
            )));
        }
        Ok(CouplingTensor { shape, storage: Storage::Dense(data) })
    }

    /// Sparse tensor; duplicate indices are summed and zero entries dropped.
    pub fn sparse(shape: Shape, mut entries: Vec<(IndexTuple, f64)>) -> Result<Self> {
        for (idx, v) in &entries {
            shape.check_tuple(idx)?;
            if !(*v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "coupling entries must be finite and nonnegative (found {v})"
                )));
            }
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(IndexTuple, f64)> = Vec::with_capacity(entries.len());
        for (idx, v) in entries {
            match merged.last_mut() {
                Some((last, acc)) if *last == idx => *acc += v,
                _ => merged.push((idx, v)),
            }
        }
        merged.retain(|(_, v)| *v > 0.0);
        Ok(CouplingTensor { shape, storage: Storage::Sparse(merged) })
    }

    pub fn point_mass(shape: Shape, tuple: &[usize]) -> Result<Self> {
        let idx = IndexTuple::new(tuple.to_vec(), shape)?;
        Self::sparse(shape, vec![(idx, 1.0)])
    }

    pub fn uniform(shape: Shape) -> Result<Self> {
        let len = shape.dense_len()?;
        Self::dense(shape, vec![1.0 / len as f64; len])
    }

    /// The product measure `mu_1 ⊗ ... ⊗ mu_k`.
    pub fn product(shape: Shape, factors: &[&[f64]]) -> Result<Self> {
        if factors.len() != shape.k || factors.iter().any(|f| f.len() != shape.n) {
            return Err(Error::DimensionMismatch("product factors must be k vectors of length n".into()));
        }
        let len = shape.dense_len()?;
        let mut data = vec![0.0; len];
        for_each_tuple(shape, |idx, t| {
            data[idx] = t.iter().enumerate().map(|(i, &j)| factors[i][j]).product();
        });
        Self::dense(shape, data)
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    /// Visits every stored entry (all entries for dense storage).
    pub fn for_each_entry(&self, mut f: impl FnMut(&[usize], f64)) {
        match &self.storage {
            Storage::Dense(data) => for_each_tuple(self.shape, |idx, t| f(t, data[idx])),
            Storage::Sparse(entries) => {
                for (idx, v) in entries {
                    f(idx, *v)
                }
            }
        }
    }

    pub fn get(&self, tuple: &[usize]) -> f64 {
        match &self.storage {
            Storage::Dense(data) => data[self.shape.linear_index(tuple)],
            Storage::Sparse(entries) => {
                entries.binary_search_by(|(idx, _)| idx.as_slice().cmp(tuple)).map(|pos| entries[pos].1).unwrap_or(0.0)
            }
        }
    }

    pub fn to_dense_vec(&self) -> Result<Vec<f64>> {
        match &self.storage {
            Storage::Dense(data) => Ok(data.clone()),
            Storage::Sparse(entries) => {
                let mut data = vec![0.0; self.shape.dense_len()?];
                for (idx, v) in entries {
                    data[self.shape.linear_index(idx)] += *v;
                }
                Ok(data)
            }
        }
    }

    /// Sparse copy holding only strictly positive entries.
    pub fn to_sparse(&self) -> CouplingTensor {
        match &self.storage {
            Storage::Sparse(_) => self.clone(),
            Storage::Dense(data) => {
                let mut entries = Vec::new();
                for_each_tuple(self.shape, |idx, t| {
                    if data[idx] > 0.0 {
                        entries.push((IndexTuple::from_vec_unchecked(t.to_vec()), data[idx]));
                    }
                });
                CouplingTensor { shape: self.shape, storage: Storage::Sparse(entries) }
            }
        }
    }

    pub fn support_len(&self) -> usize {
        let mut count = 0;
        self.for_each_entry(|_, v| {
            if v != 0.0 {
                count += 1
            }
        });
        count
    }

    pub fn total_mass(&self) -> f64 {
        let mut sum = 0.0;
        self.for_each_entry(|_, v| sum += v);
        sum
    }

    /// The `mode`-th marginal: entry `j` sums all entries whose `mode`-th coordinate is `j`.
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>> {
        self.shape.check_mode(mode)?;
        let mut out = vec![0.0; self.shape.n];
        self.for_each_entry(|t, v| out[t[mode]] += v);
        Ok(out)
    }

    /// Entrywise l1 distance; both tensors are compared densely when either is dense.
    pub fn l1_distance(&self, other: &CouplingTensor) -> Result<f64> {
        if self.shape != other.shape {
            return Err(Error::DimensionMismatch("l1 distance between different shapes".into()));
        }
        match (&self.storage, &other.storage) {
            (Storage::Sparse(a), Storage::Sparse(b)) => {
                let (mut i, mut j, mut acc) = (0, 0, 0.0);
                while i < a.len() || j < b.len() {
                    let ord = match (a.get(i), b.get(j)) {
                        (Some(x), Some(y)) => x.0.cmp(&y.0),
                        (Some(_), None) => std::cmp::Ordering::Less,
                        _ => std::cmp::Ordering::Greater,
                    };
                    match ord {
                        std::cmp::Ordering::Less => {
                            acc += a[i].1.abs();
                            i += 1;
                        }
                        std::cmp::Ordering::Greater => {
                            acc += b[j].1.abs();
                            j += 1;
                        }
                        std::cmp::Ordering::Equal => {
                            acc += (a[i].1 - b[j].1).abs();
                            i += 1;
                            j += 1;
                        }
                    }
                }
                Ok(acc)
            }
            _ => {
                let a = self.to_dense_vec()?;
                let b = other.to_dense_vec()?;
                Ok(a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum())
            }
        }
    }

    /// Membership in the (partially) fixed transportation polytope up to `tol`.
    pub fn is_coupling(&self, spec: &MarginalSpec, tol: f64) -> Result<bool> {
        if self.shape != spec.shape() {
            return Err(Error::DimensionMismatch(format!(
                "coupling shape {:?} vs marginal spec shape {:?}",
                self.shape,
                spec.shape()
            )));
        }
        let mut min_entry = f64::INFINITY;
        self.for_each_entry(|_, v| min_entry = min_entry.min(v));
        if min_entry < -tol {
            return Ok(false);
        }
        for &mode in spec.constrained() {
            let m = self.marginal(mode)?;
            let target = spec.marginal(mode).expect("constrained mode has a marginal");
            let err: f64 = m.iter().zip(target).map(|(a, b)| (a - b).abs()).sum();
            if err > tol {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Shannon entropy `-Σ P log P` with `0 log 0 = 0`.
    pub fn entropy(&self) -> Result<f64> {
        let mass = self.total_mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { mass });
        }
        let mut h = 0.0;
        let mut negative = false;
        self.for_each_entry(|_, v| {
            if v > 0.0 {
                h -= v * v.ln();
            } else if v < 0.0 {
                negative = true;
            }
        });
        if negative {
            return Err(Error::InvalidInput("entropy of a tensor with negative entries".into()));
        }
        Ok(h.max(0.0))
    }

    /// `⟨P, C⟩` summed over the support of `P`.
    pub fn inner_product(&self, cost: &CostOracle) -> Result<f64> {
        if self.shape != cost.shape() {
            return Err(Error::DimensionMismatch("coupling and cost shapes differ".into()));
        }
        let mut acc = 0.0;
        self.for_each_entry(|t, v| {
            if v != 0.0 {
                acc += v * cost.evaluate(t);
            }
        });
        Ok(acc)
    }

    /// Repairs the marginals of a (near-)probability tensor so it lands exactly in
    /// `M(mu_1, ..., mu_k)`, moving at most `2 Σ_i ||m_i(P) - mu_i||_1` of l1 mass.
    ///
    /// Each mode in turn has its slices scaled down to at most the target mass; the
    /// remaining per-mode deficits are then filled with their normalized outer product.
    pub fn round_to_polytope(&self, spec: &MarginalSpec) -> Result<CouplingTensor> {
        if self.shape != spec.shape() {
            return Err(Error::DimensionMismatch("coupling and marginal spec shapes differ".into()));
        }
        if !spec.is_fully_fixed() {
            return Err(Error::InvalidInput("rounding requires every marginal to be constrained".into()));
        }
        let mass = self.total_mass();
        if (mass - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { mass });
        }
        let shape = self.shape;
        let mut data = self.to_dense_vec()?;
        for v in data.iter_mut() {
            *v = v.max(0.0);
        }

        let mut tuple = vec![0usize; shape.k];
        for mode in 0..shape.k {
            let target = spec.marginal(mode).expect("fully fixed");
            let current = dense_marginal(shape, &data, mode, &mut tuple);
            let factors: Vec<f64> =
                current.iter().zip(target).map(|(&m, &mu)| if m > mu { mu / m } else { 1.0 }).collect();
            if factors.iter().all(|&f| f == 1.0) {
                continue;
            }
            for (idx, v) in data.iter_mut().enumerate() {
                shape.unrank(idx, &mut tuple);
                *v *= factors[tuple[mode]];
            }
        }

        let deficits: Vec<Vec<f64>> = (0..shape.k)
            .map(|mode| {
                let target = spec.marginal(mode).expect("fully fixed");
                dense_marginal(shape, &data, mode, &mut tuple)
                    .iter()
                    .zip(target)
                    .map(|(m, mu)| (mu - m).max(0.0))
                    .collect()
            })
            .collect();
        let total: f64 = deficits[0].iter().sum();
        if total >= DEFICIT_FLOOR {
            let scale = total.powi(shape.k as i32 - 1);
            for (idx, v) in data.iter_mut().enumerate() {
                shape.unrank(idx, &mut tuple);
                let prod: f64 = tuple.iter().enumerate().map(|(i, &j)| deficits[i][j]).product();
                *v += prod / scale;
            }
        }
        CouplingTensor::dense(shape, data)
    }
}

fn dense_marginal(shape: Shape, data: &[f64], mode: usize, tuple: &mut [usize]) -> Vec<f64> {
    let mut out = vec![0.0; shape.n];
    for (idx, v) in data.iter().enumerate() {
        shape.unrank(idx, tuple);
        out[tuple[mode]] += v;
    }
    out
}

/// Target marginals for a subset `I` of the modes; `I = [k]` is the fully fixed case.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalSpec {
    shape: Shape,
    constrained: Vec<usize>,
    marginals: Vec<Option<Vec<f64>>>,
}

impl MarginalSpec {
    /// All `k` marginals fixed.
    pub fn full(marginals: Vec<Vec<f64>>) -> Result<Self> {
        let k = marginals.len();
        let n = marginals.first().map(|m| m.len()).unwrap_or(0);
        let shape = Shape::new(n, k)?;
        Self::partial(shape, marginals.into_iter().enumerate().collect())
    }

    /// Only the listed modes are constrained.
    pub fn partial(shape: Shape, fixed: Vec<(usize, Vec<f64>)>) -> Result<Self> {
        let mut marginals = vec![None; shape.k];
        for (mode, mu) in fixed {
            shape.check_mode(mode)?;
            if marginals[mode].is_some() {
                return Err(Error::InvalidMarginal(format!("mode {mode} constrained twice")));
            }
            validate_simplex_point(&mu, shape.n).map_err(|e| Error::InvalidMarginal(format!("mode {mode}: {e}")))?;
            marginals[mode] = Some(mu);
        }
        let constrained: Vec<usize> = (0..shape.k).filter(|&i| marginals[i].is_some()).collect();
        Ok(MarginalSpec { shape, constrained, marginals })
    }

    pub fn uniform(shape: Shape) -> Result<Self> {
        Self::full(vec![vec![1.0 / shape.n as f64; shape.n]; shape.k])
    }

    /// Point masses `mu_i = e_{j_i}`.
    pub fn point_masses(shape: Shape, tuple: &[usize]) -> Result<Self> {
        shape.check_tuple(tuple)?;
        Self::full(
            tuple
                .iter()
                .map(|&j| {
                    let mut e = vec![0.0; shape.n];
                    e[j] = 1.0;
                    e
                })
                .collect(),
        )
    }

    /// `mu_i = Ber(x_i)` on the ground set `{0, 1}`.
    pub fn bernoulli(x: &[f64]) -> Result<Self> {
        if let Some(bad) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidMarginal(format!("Bernoulli parameter {bad} outside [0, 1]")));
        }
        Self::full(x.iter().map(|&p| vec![1.0 - p, p]).collect())
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn constrained(&self) -> &[usize] {
        &self.constrained
    }

    pub fn is_fully_fixed(&self) -> bool {
        self.constrained.len() == self.shape.k
    }

    pub fn marginal(&self, mode: usize) -> Option<&[f64]> {
        self.marginals.get(mode).and_then(|m| m.as_deref())
    }

    /// All marginals of a fully fixed spec, in mode order.
    pub fn marginals(&self) -> Vec<&[f64]> {
        self.marginals.iter().flatten().map(|m| m.as_slice()).collect()
    }

    /// Entrywise l1 distance between two fully fixed specs of equal shape.
    pub fn l1_distance(&self, other: &MarginalSpec) -> Result<f64> {
        if self.shape != other.shape || !self.is_fully_fixed() || !other.is_fully_fixed() {
            return Err(Error::DimensionMismatch("l1 distance needs two fully fixed specs of equal shape".into()));
        }
        Ok(self
            .marginals()
            .iter()
            .zip(other.marginals())
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .sum())
    }
}

fn validate_simplex_point(mu: &[f64], n: usize) -> std::result::Result<(), String> {
    if mu.len() != n {
        return Err(format!("length {} but n = {n}", mu.len()));
    }
    if let Some(bad) = mu.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(format!("entry {bad} is not a finite nonnegative number"));
    }
    let sum: f64 = mu.iter().sum();
    if (sum - 1.0).abs() > EXACT_TOL {
        return Err(format!("entries sum to {sum}, not 1"));
    }
    Ok(())
}

/// Per-mode dual vectors `(p_1, ..., p_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DualPotentials {
    pub p: Vec<Vec<f64>>,
}

impl DualPotentials {
    pub fn zeros(shape: Shape) -> Self {
        DualPotentials { p: vec![vec![0.0; shape.n]; shape.k] }
    }

    pub fn shape(&self) -> Option<Shape> {
        let k = self.p.len();
        let n = self.p.first()?.len();
        if self.p.iter().any(|v| v.len() != n) {
            return None;
        }
        Shape::new(n, k).ok()
    }

    /// `Σ_i p_i[j_i]`.
    pub fn sum_at(&self, tuple: &[usize]) -> f64 {
        tuple.iter().enumerate().map(|(i, &j)| self.p[i][j]).sum()
    }

    /// Dual objective `Σ_{i ∈ I} ⟨p_i, mu_i⟩`.
    pub fn objective(&self, spec: &MarginalSpec) -> f64 {
        spec.constrained()
            .iter()
            .map(|&i| {
                let mu = spec.marginal(i).expect("constrained");
                self.p[i].iter().zip(mu).map(|(a, b)| a * b).sum::<f64>()
            })
            .sum()
    }
}
