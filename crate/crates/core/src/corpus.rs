//! Seeded random instances for every cost family.

use crate::cost::{
    build_twosat_cost, BuckinghamParams, Cnf, CostOracle, DeterminantVariant, Graph, IonSystem, IonVariant,
    KPartiteGraph, SetFunction, Vertex,
};
use crate::error::Result;
use crate::tensor::Shape;
use rand::seq::SliceRandom;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Dense,
    LowRank,
    Pairwise,
    Determinant,
    LogDeterminant,
    SetFunction,
    Coulomb,
    Buckingham,
    TwoSat,
}

impl Family {
    pub const ALL: [Family; 9] = [
        Family::Dense,
        Family::LowRank,
        Family::Pairwise,
        Family::Determinant,
        Family::LogDeterminant,
        Family::SetFunction,
        Family::Coulomb,
        Family::Buckingham,
        Family::TwoSat,
    ];

    /// Families whose entries are fixed to the ground set `{0, 1}`.
    pub fn binary(self) -> bool {
        matches!(self, Family::SetFunction | Family::TwoSat)
    }
}

fn int(rng: &mut impl Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.gen_range(lo..=hi))
}

/// A random instance of `family` with the given shape. Binary families
/// ignore `n`; ion families need `n >= 1` sites and select `k` of them.
pub fn random_cost(family: Family, n: usize, k: usize, rng: &mut impl Rng) -> Result<CostOracle> {
    match family {
        Family::Dense => {
            let shape = Shape::new(n, k)?;
            CostOracle::dense(shape, (0..shape.dense_len()?).map(|_| int(rng, -5, 5)).collect())
        }
        Family::LowRank => {
            let r = rng.gen_range(1..=3);
            let terms = (0..r).map(|_| (0..k).map(|_| (0..n).map(|_| int(rng, -2, 2)).collect()).collect()).collect();
            CostOracle::low_rank(Shape::new(n, k)?, terms)
        }
        Family::Pairwise => {
            let tables = (0..k * (k - 1) / 2).map(|_| (0..n * n).map(|_| int(rng, -3, 3)).collect()).collect();
            CostOracle::pairwise(Shape::new(n, k)?, tables)
        }
        Family::Determinant | Family::LogDeterminant => {
            let points = (0..n).map(|_| (0..k).map(|_| int(rng, -2, 2)).collect()).collect();
            let variant = if family == Family::Determinant {
                DeterminantVariant::NegAbsDet
            } else {
                DeterminantVariant::CappedNegLogAbsDet
            };
            CostOracle::determinant(points, variant)
        }
        Family::SetFunction => {
            CostOracle::set_function(SetFunction::table(k, (0..1usize << k).map(|_| int(rng, -4, 4)).collect())?)
        }
        Family::Coulomb | Family::Buckingham => CostOracle::ions(random_ions(family, n, k, rng)?, k),
        Family::TwoSat => build_twosat_cost(&random_two_cnf(k, rng.gen_range(1..=2 * k), rng)?),
    }
}

pub fn default_buckingham_params() -> BuckinghamParams {
    BuckinghamParams { a_plus: 1.0, a_minus: 1.0, b_plus: 1.0, b_minus: 1.0, c_plus: 1.0, c_minus: 1.0 }
}

/// `n` ions on distinct integer lattice sites (pairwise distance >= 1) with random charges.
pub fn random_ions(family: Family, n: usize, k: usize, rng: &mut impl Rng) -> Result<IonSystem> {
    let mut sites: Vec<[f64; 3]> =
        (0..4).flat_map(|x| (0..4).flat_map(move |y| (0..2).map(move |z| [x as f64, y as f64, z as f64]))).collect();
    sites.shuffle(rng);
    let positions: Vec<[f64; 3]> = sites.into_iter().take(n).collect();
    let charges = (0..positions.len()).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let params = default_buckingham_params();
    let (variant, penalty) = match family {
        Family::Buckingham => (IonVariant::Buckingham, params.min_penalty(k)),
        _ => (IonVariant::Coulomb, 10.0 * (k * k) as f64),
    };
    IonSystem::new(positions, charges, params, penalty, variant, k)
}

pub fn random_two_cnf(vars: usize, clauses: usize, rng: &mut impl Rng) -> Result<Cnf> {
    let lit = |rng: &mut dyn rand::RngCore| {
        let v = rng.gen_range(1..=vars) as i32;
        if rng.gen_bool(0.5) {
            v
        } else {
            -v
        }
    };
    let cs = (0..clauses).map(|_| if rng.gen_bool(0.2) { vec![lit(rng)] } else { vec![lit(rng), lit(rng)] }).collect();
    Cnf::new(vars, cs)
}

pub fn random_kpartite(n: usize, k: usize, density: f64, rng: &mut impl Rng) -> Result<KPartiteGraph> {
    let mut edges = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            for i in 0..n {
                for j in 0..n {
                    if rng.gen_bool(density) {
                        edges.push((Vertex::new(a, i), Vertex::new(b, j)));
                    }
                }
            }
        }
    }
    KPartiteGraph::new(n, k, edges)
}

pub fn random_graph(vertices: usize, density: f64, rng: &mut impl Rng) -> Result<Graph> {
    let edges: Vec<(usize, usize)> =
        (0..vertices).flat_map(|a| (a + 1..vertices).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect();
    Graph::new(vertices, edges)
}

/// Weighted coverage function: `C(S) = Σ_{u covered by S} w_u` (submodular).
pub fn random_coverage(k: usize, universe: usize, rng: &mut impl Rng) -> Result<CostOracle> {
    let weights: Vec<f64> = (0..universe).map(|_| rng.gen_range(0.1..2.0)).collect();
    let covers: Vec<u64> = (0..k).map(|_| rng.gen_range(0..1u64 << universe)).collect();
    let table = (0..1u64 << k)
        .map(|mask| {
            let covered = (0..k).filter(|i| mask >> i & 1 == 1).fold(0u64, |acc, i| acc | covers[i]);
            (0..universe).filter(|u| covered >> u & 1 == 1).map(|u| weights[u]).sum()
        })
        .collect();
    CostOracle::set_function(SetFunction::table(k, table)?)
}

/// An arbitrary (generally neither sub- nor supermodular) set function.
pub fn random_set_function(k: usize, rng: &mut impl Rng) -> Result<CostOracle> {
    CostOracle::set_function(SetFunction::table(k, (0..1usize << k).map(|_| rng.gen_range(-1.0..1.0)).collect())?)
}

/// A random point of the simplex `Δ_n` (uniform via normalized exponentials),
/// with a chance of zeroed coordinates.
pub fn random_simplex_point(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> =
        (0..n).map(|_| if n > 1 && rng.gen_bool(0.15) { 0.0 } else { -rng.gen::<f64>().max(1e-300).ln() }).collect();
    if v.iter().all(|x| *x == 0.0) {
        v[rng.gen_range(0..n)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}
