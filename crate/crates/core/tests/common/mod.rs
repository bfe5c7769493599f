//! Independent brute-force oracles shared by the integration tests. Nothing
//! here calls the library's own enumerators or solvers.
#![allow(dead_code)]

use motlab::cost::{Cnf, CostOracle, Graph, KPartiteGraph};
use rand::Rng;

/// Every tuple of `[n]^k` in lexicographic order.
pub fn tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut t = vec![0; k];
    loop {
        out.push(t.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < n {
                break;
            }
            t[i] = 0;
        }
    }
}

pub fn f(cost: &CostOracle, p: &[Vec<f64>], t: &[usize]) -> f64 {
    cost.evaluate(t) - t.iter().enumerate().map(|(i, &j)| p[i][j]).sum::<f64>()
}

/// `(min f, every minimizing tuple)`.
pub fn argmin(cost: &CostOracle, p: &[Vec<f64>]) -> (f64, Vec<Vec<usize>>) {
    let s = cost.shape();
    let mut best = f64::INFINITY;
    let mut arg = Vec::new();
    for t in tuples(s.n, s.k) {
        let v = f(cost, p, &t);
        if v < best {
            best = v;
            arg = vec![t];
        } else if v == best {
            arg.push(t);
        }
    }
    (best, arg)
}

pub fn zeros(n: usize, k: usize) -> Vec<Vec<f64>> {
    vec![vec![0.0; n]; k]
}

pub fn induced_edges(g: &KPartiteGraph, t: &[usize]) -> usize {
    g.edges().iter().filter(|(a, b)| t[a.class] == a.index && t[b.class] == b.index).count()
}

pub fn max_cut(g: &Graph) -> usize {
    (0u64..1 << g.vertices())
        .map(|m| g.edges().iter().filter(|(u, v)| (m >> u & 1) != (m >> v & 1)).count())
        .max()
        .unwrap()
}

/// Clause-by-clause evaluation of a DIMACS-literal CNF.
pub fn satisfies(phi: &Cnf, a: &[usize]) -> bool {
    phi.clauses().iter().all(|c| {
        c.iter().any(|&l| {
            let v = a[l.unsigned_abs() as usize - 1] == 1;
            if l > 0 {
                v
            } else {
                !v
            }
        })
    })
}

/// A random point of the simplex with a few exact zeros now and then.
pub fn simplex_point(n: usize, rng: &mut impl Rng) -> Vec<f64> {
    let mut v: Vec<f64> =
        (0..n).map(|_| if rng.gen_bool(0.15) { 0.0 } else { -rng.gen::<f64>().max(1e-300).ln() }).collect();
    let s: f64 = v.iter().sum();
    if s == 0.0 {
        v[rng.gen_range(0..n)] = 1.0;
        return v;
    }
    v.iter_mut().for_each(|x| *x /= s);
    v
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}
