//! Implicit cost tensors with polynomial-time entry evaluation, and the
//! builders that encode graphs, point sets, ion systems and 2-CNF formulas.

pub mod cnf;
pub mod graph;
pub mod ions;
pub mod setfn;

use crate::error::{Error, Result};
use crate::min::twosat;
use crate::tensor::{for_each_tuple, Shape};

pub use cnf::Cnf;
pub use graph::{Graph, KPartiteGraph, Vertex};
pub use ions::{BuckinghamParams, IonSystem, IonVariant};
pub use setfn::{mask_to_tuple, tuple_to_mask, SetFunction, SetFunctionRepr};

/// Sum of `r` rank-one terms; term `t` is a list of `k` vectors of length `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct LowRank {
    pub terms: Vec<Vec<Vec<f64>>>,
}

/// Tables `g_{i,i'}` for `i < i'`, stored row-major (`g[j * n + j']`) in
/// lexicographic pair order.
#[derive(Clone, Debug, PartialEq)]
pub struct Pairwise {
    pub tables: Vec<Vec<f64>>,
}

impl Pairwise {
    pub fn pair_slot(k: usize, i: usize, i2: usize) -> usize {
        debug_assert!(i < i2 && i2 < k);
        i * (2 * k - i - 1) / 2 + (i2 - i - 1)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeterminantVariant {
    /// `-|det(x_{j_1}, ..., x_{j_k})|`
    NegAbsDet,
    /// `min(0, -ln |det(...)|)`, with `|det| < 1e-300` mapped to 0.
    CappedNegLogAbsDet,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Determinant {
    /// `n` points in `R^k`.
    pub points: Vec<Vec<f64>>,
    pub variant: DeterminantVariant,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CostFamily {
    /// Row-major values, mode 0 slowest.
    Dense(Vec<f64>),
    LowRank(LowRank),
    Pairwise(Pairwise),
    Determinant(Determinant),
    SetFunction(SetFunction),
    Ions(IonSystem),
    TwoSat(Cnf),
}

/// A cost tensor `C` over `[n]^k` given implicitly by one of the supported families.
#[derive(Clone, Debug, PartialEq)]
pub struct CostOracle {
    shape: Shape,
    family: CostFamily,
}

/// A fully materialized cost tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    pub shape: Shape,
    pub data: Vec<f64>,
}

impl DenseTensor {
    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.data[self.shape.linear_index(tuple)]
    }
}

impl CostOracle {
    pub fn dense(shape: Shape, data: Vec<f64>) -> Result<Self> {
        let len = shape.dense_len()?;
        if data.len() != len {
            return Err(Error::DimensionMismatch(format!("dense cost has {} entries, expected {len}", data.len())));
        }
        check_finite(&data)?;
        Ok(CostOracle { shape, family: CostFamily::Dense(data) })
    }

    pub fn constant(shape: Shape, value: f64) -> Result<Self> {
        Self::low_rank(shape, vec![vec![vec![1.0; shape.n]; shape.k]]).map(|c| c.scaled(value))
    }

    pub fn low_rank(shape: Shape, terms: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("low-rank cost needs at least one term".into()));
        }
        for term in &terms {
            if term.len() != shape.k || term.iter().any(|u| u.len() != shape.n) {
                return Err(Error::DimensionMismatch("each low-rank term must hold k vectors of length n".into()));
            }
            for u in term {
                check_finite(u)?;
            }
        }
        Ok(CostOracle { shape, family: CostFamily::LowRank(LowRank { terms }) })
    }

    pub fn pairwise(shape: Shape, tables: Vec<Vec<f64>>) -> Result<Self> {
        let pairs = shape.k * (shape.k - 1) / 2;
        if tables.len() != pairs || tables.iter().any(|t| t.len() != shape.n * shape.n) {
            return Err(Error::DimensionMismatch(format!("pairwise cost needs {pairs} tables of size n x n")));
        }
        for t in &tables {
            check_finite(t)?;
        }
        Ok(CostOracle { shape, family: CostFamily::Pairwise(Pairwise { tables }) })
    }

    /// `n = points.len()` points in `R^k`, `k` taken from the point dimension.
    pub fn determinant(points: Vec<Vec<f64>>, variant: DeterminantVariant) -> Result<Self> {
        let n = points.len();
        let k = points.first().map(Vec::len).unwrap_or(0);
        let shape = Shape::new(n, k)?;
        if points.iter().any(|x| x.len() != k) {
            return Err(Error::DimensionMismatch("all points must share dimension k".into()));
        }
        for x in &points {
            check_finite(x)?;
        }
        Ok(CostOracle { shape, family: CostFamily::Determinant(Determinant { points, variant }) })
    }

    pub fn set_function(f: SetFunction) -> Result<Self> {
        let shape = Shape::new(2, f.k())?;
        Ok(CostOracle { shape, family: CostFamily::SetFunction(f) })
    }

    pub fn ions(system: IonSystem, k: usize) -> Result<Self> {
        let shape = Shape::new(system.n(), k)?;
        if system.variant == IonVariant::Buckingham && system.penalty < system.params.min_penalty(k) {
            return Err(Error::InvalidInput("penalty M too small for this number of marginals".into()));
        }
        Ok(CostOracle { shape, family: CostFamily::Ions(system) })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn family(&self) -> &CostFamily {
        &self.family
    }

    pub fn family_name(&self) -> &'static str {
        match &self.family {
            CostFamily::Dense(_) => "dense",
            CostFamily::LowRank(_) => "low_rank",
            CostFamily::Pairwise(_) => "pairwise",
            CostFamily::Determinant(d) => match d.variant {
                DeterminantVariant::NegAbsDet => "determinant",
                DeterminantVariant::CappedNegLogAbsDet => "log_determinant",
            },
            CostFamily::SetFunction(_) => "set_function",
            CostFamily::Ions(s) => match s.variant {
                IonVariant::Coulomb => "coulomb",
                IonVariant::Buckingham => "coulomb_buckingham",
            },
            CostFamily::TwoSat(_) => "two_sat",
        }
    }

    /// Whether every entry is an integer by construction (for given integer payloads).
    pub fn is_integer_valued(&self) -> bool {
        let int = |v: &f64| v.fract() == 0.0;
        match &self.family {
            CostFamily::Dense(d) => d.iter().all(int),
            CostFamily::LowRank(l) => l.terms.iter().flatten().flatten().all(int),
            CostFamily::Pairwise(p) => p.tables.iter().flatten().all(int),
            CostFamily::SetFunction(f) => match f.repr() {
                SetFunctionRepr::Table(t) => t.iter().all(int),
                SetFunctionRepr::Cut { scale, .. } => int(scale),
            },
            CostFamily::TwoSat(_) => true,
            CostFamily::Determinant(_) | CostFamily::Ions(_) => false,
        }
    }

    /// `C_j` for a tuple assumed valid for the shape.
    pub fn evaluate(&self, tuple: &[usize]) -> f64 {
        match &self.family {
            CostFamily::Dense(d) => d[self.shape.linear_index(tuple)],
            CostFamily::LowRank(l) => {
                l.terms.iter().map(|term| term.iter().zip(tuple).map(|(u, &j)| u[j]).product::<f64>()).sum()
            }
            CostFamily::Pairwise(p) => {
                let (n, k) = (self.shape.n, self.shape.k);
                let mut acc = 0.0;
                let mut slot = 0;
                for i in 0..k {
                    for i2 in i + 1..k {
                        acc += p.tables[slot][tuple[i] * n + tuple[i2]];
                        slot += 1;
                    }
                }
                acc
            }
            CostFamily::Determinant(d) => {
                let det = abs_det_of_columns(&d.points, tuple);
                match d.variant {
                    DeterminantVariant::NegAbsDet => -det,
                    DeterminantVariant::CappedNegLogAbsDet => {
                        if det < 1e-300 {
                            0.0
                        } else {
                            (-det.ln()).min(0.0)
                        }
                    }
                }
            }
            CostFamily::SetFunction(f) => f.eval_tuple(tuple),
            CostFamily::Ions(s) => s.evaluate(tuple),
            CostFamily::TwoSat(phi) => {
                if phi.eval(tuple) {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// [`CostOracle::evaluate`] with tuple validation.
    pub fn evaluate_checked(&self, tuple: &[usize]) -> Result<f64> {
        self.shape.check_tuple(tuple)?;
        Ok(self.evaluate(tuple))
    }

    pub fn materialize(&self) -> Result<DenseTensor> {
        let len = self.shape.dense_len()?;
        let data = match &self.family {
            CostFamily::Dense(d) => d.clone(),
            _ => {
                let mut data = vec![0.0; len];
                for_each_tuple(self.shape, |idx, t| data[idx] = self.evaluate(t));
                data
            }
        };
        Ok(DenseTensor { shape: self.shape, data })
    }

    /// Certified upper bound on `max_j |C_j|`.
    pub fn cost_upper_bound(&self) -> f64 {
        match &self.family {
            CostFamily::Dense(d) => d.iter().fold(0.0, |m, v| m.max(v.abs())),
            CostFamily::LowRank(l) => l
                .terms
                .iter()
                .map(|term| term.iter().map(|u| u.iter().fold(0.0f64, |m, v| m.max(v.abs()))).product::<f64>())
                .sum(),
            CostFamily::Pairwise(p) => p.tables.iter().map(|t| t.iter().fold(0.0f64, |m, v| m.max(v.abs()))).sum(),
            CostFamily::Determinant(d) => {
                // Hadamard: |det| <= product of column norms
                let max_norm = d.points.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).fold(0.0, f64::max);
                let hadamard = max_norm.powi(self.shape.k as i32);
                match d.variant {
                    DeterminantVariant::NegAbsDet => hadamard,
                    DeterminantVariant::CappedNegLogAbsDet => hadamard.ln().max(0.0),
                }
            }
            CostFamily::SetFunction(f) => match f.repr() {
                SetFunctionRepr::Table(_) => f.max_abs(),
                SetFunctionRepr::Cut { graph, scale } => {
                    // exact when within the brute cap, else the |E| bound
                    scale.abs() * graph.edges().len() as f64
                }
            },
            CostFamily::Ions(s) => s.upper_bound(self.shape.k),
            CostFamily::TwoSat(phi) => {
                if twosat::solve(phi).is_some() {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// `lambda * C`, staying in the same family.
    pub fn scaled(&self, lambda: f64) -> CostOracle {
        let family = match &self.family {
            CostFamily::Dense(d) => CostFamily::Dense(d.iter().map(|v| v * lambda).collect()),
            CostFamily::LowRank(l) => CostFamily::LowRank(LowRank {
                terms: l
                    .terms
                    .iter()
                    .map(|term| {
                        let mut term = term.clone();
                        for v in term[0].iter_mut() {
                            *v *= lambda;
                        }
                        term
                    })
                    .collect(),
            }),
            CostFamily::Pairwise(p) => CostFamily::Pairwise(Pairwise {
                tables: p.tables.iter().map(|t| t.iter().map(|v| v * lambda).collect()).collect(),
            }),
            CostFamily::SetFunction(f) => {
                let table = (0..1u64 << f.k()).map(|m| lambda * f.eval_mask(m)).collect();
                CostFamily::SetFunction(SetFunction::table(f.k(), table).expect("same k"))
            }
            // families without a native scaling are materialized
            _ => CostFamily::Dense(
                self.materialize()
                    .expect("scaling a non-scalable family needs a dense-capped shape")
                    .data
                    .into_iter()
                    .map(|v| v * lambda)
                    .collect(),
            ),
        };
        CostOracle { shape: self.shape, family }
    }

    /// Set-function view; errors for other families.
    pub fn as_set_function(&self) -> Result<&SetFunction> {
        match &self.family {
            CostFamily::SetFunction(f) => Ok(f),
            _ => Err(Error::WrongFamily { expected: "set_function", found: self.family_name() }),
        }
    }

    pub fn is_submodular(&self) -> Result<bool> {
        self.as_set_function()?.is_submodular()
    }

    pub fn is_supermodular(&self) -> Result<bool> {
        self.as_set_function()?.is_supermodular()
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Error::InvalidInput(format!("non-finite cost value {v}"))),
        None => Ok(()),
    }
}

/// `|det|` of the `k x k` matrix whose columns are `points[j_1], ..., points[j_k]`,
/// via LU with partial pivoting; singular matrices give 0.
fn abs_det_of_columns(points: &[Vec<f64>], tuple: &[usize]) -> f64 {
    let k = tuple.len();
    // row-major a[r * k + c] = points[tuple[c]][r]
    let mut a = vec![0.0; k * k];
    for (c, &j) in tuple.iter().enumerate() {
        for r in 0..k {
            a[r * k + c] = points[j][r];
        }
    }
    abs_det(&mut a, k)
}

pub(crate) fn abs_det(a: &mut [f64], k: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..k {
        let pivot_row =
            (col..k).max_by(|&x, &y| a[x * k + col].abs().total_cmp(&a[y * k + col].abs())).expect("nonempty range");
        let pivot = a[pivot_row * k + col];
        if pivot == 0.0 {
            return 0.0;
        }
        if pivot_row != col {
            for c in 0..k {
                a.swap(pivot_row * k + c, col * k + c);
            }
        }
        det *= pivot;
        for r in col + 1..k {
            let factor = a[r * k + col] / pivot;
            if factor != 0.0 {
                for c in col..k {
                    a[r * k + c] -= factor * a[col * k + c];
                }
            }
        }
    }
    det.abs()
}

/// `-T_G` as a low-rank cost: one rank-one term per edge, each the outer product of
/// `-e_{j_i}` on mode `i`, `e_{j_i'}` on mode `i'` and all-ones elsewhere.
/// Returns the cost and the number of terms `r = |E|` (an empty graph is
/// represented by a single zero term but reports `r = 0`).
pub fn build_clique_tensor(graph: &KPartiteGraph) -> Result<(CostOracle, usize)> {
    let shape = Shape::new(graph.n(), graph.k())?;
    let indicator = |j: usize, value: f64| {
        let mut e = vec![0.0; shape.n];
        e[j] = value;
        e
    };
    let mut terms = Vec::with_capacity(graph.edges().len().max(1));
    for (a, b) in graph.edges() {
        let mut term = vec![vec![1.0; shape.n]; shape.k];
        term[a.class] = indicator(a.index, -1.0);
        term[b.class] = indicator(b.index, 1.0);
        terms.push(term);
    }
    let r = terms.len();
    if terms.is_empty() {
        terms.push(vec![vec![0.0; shape.n]; shape.k]);
    }
    Ok((CostOracle::low_rank(shape, terms)?, r))
}

/// `-T_G` as a sum of pairwise interactions `g_{i,i'}(j, j') = -1[(v_{i,j}, v_{i',j'}) ∈ E]`.
pub fn build_pairwise_from_graph(graph: &KPartiteGraph) -> Result<CostOracle> {
    let (n, k) = (graph.n(), graph.k());
    let shape = Shape::new(n, k)?;
    let mut tables = vec![vec![0.0; n * n]; k * (k - 1) / 2];
    for (a, b) in graph.edges() {
        let (lo, hi) = if a.class < b.class { (a, b) } else { (b, a) };
        tables[Pairwise::pair_slot(k, lo.class, hi.class)][lo.index * n + hi.index] = -1.0;
    }
    CostOracle::pairwise(shape, tables)
}

/// `C(S) = -cut(G, S)`, the supermodular Max-Cut encoding on `k = |V|` elements.
pub fn build_maxcut_cost(graph: &Graph) -> Result<CostOracle> {
    CostOracle::set_function(SetFunction::cut(graph.clone(), -1.0)?)
}

/// `C(S) = cut(G, S)`, the (submodular) cut function itself.
pub fn build_cut_cost(graph: &Graph) -> Result<CostOracle> {
    CostOracle::set_function(SetFunction::cut(graph.clone(), 1.0)?)
}

/// `C_j = -φ(j)` on `{0, 1}^k` for a formula with clauses of width at most 2.
pub fn build_twosat_cost(phi: &Cnf) -> Result<CostOracle> {
    phi.check_two_sat()?;
    let shape = Shape::new(2, phi.num_vars())?;
    Ok(CostOracle { shape, family: CostFamily::TwoSat(phi.clone()) })
}
