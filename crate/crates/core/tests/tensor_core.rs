mod common;

use common::{l1, tuples};
use motlab::cost::{CostOracle, Pairwise};
use motlab::mot::{sinkhorn, SinkhornConfig};
use motlab::tensor::{CouplingTensor, IndexTuple, MarginalSpec, Shape};
use motlab::Error;
use proptest::prelude::*;
use std::f64::consts::LN_2;

fn shape(n: usize, k: usize) -> Shape {
    Shape::new(n, k).unwrap()
}

#[test]
fn point_mass_marginal() {
    let p = CouplingTensor::point_mass(shape(2, 2), &[0, 1]).unwrap();
    assert_eq!(p.marginal(1).unwrap(), vec![0.0, 1.0]);
    assert_eq!(p.marginal(0).unwrap(), vec![1.0, 0.0]);
}

#[test]
fn uniform_marginals_are_uniform() {
    for (n, k) in [(2, 3), (3, 2), (4, 3)] {
        let p = CouplingTensor::uniform(shape(n, k)).unwrap();
        for i in 0..k {
            for v in p.marginal(i).unwrap() {
                assert!((v - 1.0 / n as f64).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn sparse_marginal_matches_dense_row_sums() {
    let s = shape(3, 3);
    let entries = vec![
        (IndexTuple::new(vec![0, 1, 2], s).unwrap(), 0.1),
        (IndexTuple::new(vec![2, 2, 2], s).unwrap(), 0.3),
        (IndexTuple::new(vec![1, 0, 0], s).unwrap(), 0.2),
        (IndexTuple::new(vec![0, 0, 1], s).unwrap(), 0.15),
        (IndexTuple::new(vec![1, 2, 0], s).unwrap(), 0.25),
    ];
    let p = CouplingTensor::sparse(s, entries).unwrap();
    let dense = p.to_dense_vec().unwrap();
    for mode in 0..3 {
        let mut sums = vec![0.0; 3];
        for (idx, t) in tuples(3, 3).iter().enumerate() {
            sums[t[mode]] += dense[idx];
        }
        assert_eq!(p.marginal(mode).unwrap(), sums);
    }
}

#[test]
fn is_coupling_examples() {
    let mu2 = vec![0.5, 0.3, 0.2];
    let s = shape(3, 2);
    let a = vec![0.2, 0.8, 0.0];
    let prod = CouplingTensor::product(s, &[&a, &mu2]).unwrap();
    let spec = MarginalSpec::full(vec![a.clone(), mu2.clone()]).unwrap();
    assert!(prod.is_coupling(&spec, 1e-9).unwrap());

    let s = shape(2, 2);
    let spec = MarginalSpec::uniform(s).unwrap();
    let bad = CouplingTensor::dense_unchecked(s, vec![0.501, 0.0, -1e-3, 0.5]).unwrap();
    assert!(!bad.is_coupling(&spec, 1e-9).unwrap());
}

#[test]
fn entropy_examples() {
    assert_eq!(CouplingTensor::point_mass(shape(3, 2), &[2, 1]).unwrap().entropy().unwrap(), 0.0);
    let u = CouplingTensor::uniform(shape(2, 3)).unwrap().entropy().unwrap();
    assert!((u - 3.0 * LN_2).abs() < 1e-12);
    let p = CouplingTensor::dense(shape(2, 2), vec![0.5, 0.25, 0.25, 0.0]).unwrap();
    // -0.5 ln 0.5 - 2 * 0.25 ln 0.25 = 0.5 ln 2 + ln 2
    assert!((p.entropy().unwrap() - 1.5 * LN_2).abs() < 1e-12);
    let unnormalized = CouplingTensor::dense(shape(2, 1), vec![0.5, 0.4]).unwrap();
    assert!(matches!(unnormalized.entropy(), Err(Error::NotNormalized { .. })));
}

#[test]
fn rounding_fixed_point() {
    let s = shape(3, 2);
    let spec = MarginalSpec::full(vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.4, 0.0]]).unwrap();
    let a = [0.2, 0.3, 0.5];
    let b = [0.6, 0.4, 0.0];
    let p = CouplingTensor::product(s, &[&a, &b]).unwrap();
    let q = p.round_to_polytope(&spec).unwrap();
    assert!(p.l1_distance(&q).unwrap() < 1e-15);
}

#[test]
fn rounding_worked_example() {
    let s = shape(2, 2);
    let p = CouplingTensor::dense(s, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
    let spec = MarginalSpec::full(vec![vec![0.6, 0.4], vec![0.6, 0.4]]).unwrap();
    let q = p.round_to_polytope(&spec).unwrap();
    assert!(q.is_coupling(&spec, 1e-12).unwrap());
    assert!(p.l1_distance(&q).unwrap() <= 2.0 * (0.2 + 0.2));
    for i in 0..2 {
        assert!(l1(&q.marginal(i).unwrap(), &[0.6, 0.4]) < 1e-15);
    }
}

#[test]
fn rounding_rejects_partial_spec() {
    let s = shape(2, 2);
    let p = CouplingTensor::uniform(s).unwrap();
    let spec = MarginalSpec::partial(s, vec![(0, vec![0.3, 0.7])]).unwrap();
    assert!(p.round_to_polytope(&spec).is_err());
}

#[test]
fn sinkhorn_then_round_is_feasible() {
    let s = shape(3, 3);
    let cost = CostOracle::dense(s, (0..27).map(|i| ((i * 7) % 5) as f64).collect()).unwrap();
    let spec = MarginalSpec::full(vec![vec![0.5, 0.3, 0.2], vec![0.1, 0.1, 0.8], vec![1.0 / 3.0; 3]]).unwrap();
    let sol = sinkhorn(&cost, &spec, &SinkhornConfig::new(5.0, 1e-4, 10_000).unwrap()).unwrap();
    let q = sol.coupling.round_to_polytope(&spec).unwrap();
    assert!(q.is_coupling(&spec, 1e-9).unwrap());
}

#[test]
fn inner_product_examples() {
    let s = shape(3, 3);
    let cost = CostOracle::dense(s, (0..27).map(|i| i as f64 - 4.0).collect()).unwrap();
    let p = CouplingTensor::point_mass(s, &[1, 2, 0]).unwrap();
    assert_eq!(p.inner_product(&cost).unwrap(), cost.evaluate(&[1, 2, 0]));
    let zero = CostOracle::constant(s, 0.0).unwrap();
    assert_eq!(CouplingTensor::uniform(s).unwrap().inner_product(&zero).unwrap(), 0.0);
}

#[test]
fn inner_product_pairwise_sparse_vs_dense() {
    // g_{01}(a, b) = a + 2b, g_{02}(a, c) = a * c, g_{12}(b, c) = (b == c)
    let s = shape(3, 3);
    let mut tables = vec![vec![0.0; 9]; 3];
    for a in 0..3 {
        for b in 0..3 {
            tables[Pairwise::pair_slot(3, 0, 1)][a * 3 + b] = (a + 2 * b) as f64;
            tables[Pairwise::pair_slot(3, 0, 2)][a * 3 + b] = (a * b) as f64;
            tables[Pairwise::pair_slot(3, 1, 2)][a * 3 + b] = f64::from(u8::from(a == b));
        }
    }
    let cost = CostOracle::pairwise(s, tables).unwrap();
    let entries = vec![
        (IndexTuple::new(vec![0, 1, 2], s).unwrap(), 0.4),
        (IndexTuple::new(vec![2, 2, 2], s).unwrap(), 0.35),
        (IndexTuple::new(vec![1, 0, 1], s).unwrap(), 0.25),
    ];
    let p = CouplingTensor::sparse(s, entries).unwrap();
    let g = |a: usize, b: usize, c: usize| (a + 2 * b) as f64 + (a * c) as f64 + f64::from(u8::from(b == c));
    let expect = 0.4 * g(0, 1, 2) + 0.35 * g(2, 2, 2) + 0.25 * g(1, 0, 1);
    assert!((p.inner_product(&cost).unwrap() - expect).abs() < 1e-12);
    let dense = CouplingTensor::dense(s, p.to_dense_vec().unwrap()).unwrap();
    assert!((dense.inner_product(&cost).unwrap() - expect).abs() < 1e-12);
}

#[test]
fn entropy_is_maximal_only_at_uniform() {
    // n = 2, k <= 3: perturb the uniform tensor along every pair of coordinates
    for k in 1..=3 {
        let s = shape(2, k);
        let len = 1 << k;
        let max = k as f64 * LN_2;
        let u = CouplingTensor::uniform(s).unwrap();
        assert!((u.entropy().unwrap() - max).abs() < 1e-12);
        for a in 0..len {
            for b in 0..len {
                if a == b {
                    continue;
                }
                let mut d = vec![1.0 / len as f64; len];
                d[a] += 1e-3;
                d[b] -= 1e-3;
                let h = CouplingTensor::dense(s, d).unwrap().entropy().unwrap();
                assert!(h < max - 1e-9);
            }
        }
    }
}

fn tensor_strategy() -> impl Strategy<Value = (usize, usize, Vec<f64>)> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(n, k)| {
        let len = n.pow(k as u32);
        (Just(n), Just(k), prop::collection::vec(prop_oneof![Just(0.0), 0.0..1.0f64], len))
    })
}

fn normalize(mut v: Vec<f64>) -> Vec<f64> {
    let s: f64 = v.iter().sum();
    if s == 0.0 {
        v[0] = 1.0;
        return v;
    }
    v.iter_mut().for_each(|x| *x /= s);
    v
}

fn simplex(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1.0f64, n).prop_map(normalize)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn marginal_sums_equal_mass((n, k, data) in tensor_strategy(), sparse in any::<bool>()) {
        let mut p = CouplingTensor::dense(shape(n, k), data).unwrap();
        if sparse {
            p = p.to_sparse();
        }
        let mass = p.total_mass();
        for i in 0..k {
            let s: f64 = p.marginal(i).unwrap().iter().sum();
            prop_assert!((s - mass).abs() <= 1e-9);
        }
    }

    #[test]
    fn entropy_within_bounds((n, k, data) in tensor_strategy()) {
        let p = CouplingTensor::dense(shape(n, k), normalize(data)).unwrap();
        let h = p.entropy().unwrap();
        prop_assert!(h >= 0.0);
        prop_assert!(h <= k as f64 * (n as f64).ln() + 1e-12);
    }

    #[test]
    fn rounding_postconditions(
        (n, k, data) in tensor_strategy(),
        seeds in prop::collection::vec(prop::collection::vec(0.0..1.0f64, 4), 4),
    ) {
        let s = shape(n, k);
        let p = CouplingTensor::dense(s, normalize(data)).unwrap();
        let mus: Vec<Vec<f64>> = seeds.into_iter().take(k).map(|v| normalize(v[..n].to_vec())).collect();
        let spec = MarginalSpec::full(mus.clone()).unwrap();
        let q = p.round_to_polytope(&spec).unwrap();
        prop_assert!(q.is_coupling(&spec, 1e-9).unwrap());
        let drift: f64 = (0..k).map(|i| l1(&p.marginal(i).unwrap(), &mus[i])).sum();
        prop_assert!(p.l1_distance(&q).unwrap() <= 2.0 * drift + 1e-12);
    }

    #[test]
    fn sparse_inner_product_matches_dense(
        (n, k, data) in tensor_strategy(),
        costs in prop::collection::vec(-5.0..5.0f64, 256),
    ) {
        let s = shape(n, k);
        let cost = CostOracle::dense(s, costs[..data.len()].to_vec()).unwrap();
        let dense = CouplingTensor::dense(s, data.clone()).unwrap();
        let explicit: f64 = data.iter().zip(&costs).map(|(a, b)| a * b).sum();
        let via_sparse = dense.to_sparse().inner_product(&cost).unwrap();
        prop_assert!((via_sparse - explicit).abs() <= 1e-9);
        prop_assert!((dense.inner_product(&cost).unwrap() - explicit).abs() <= 1e-9);
    }

    #[test]
    fn product_coupling_is_feasible(mus in (1usize..=4, 1usize..=4).prop_flat_map(|(n, k)| prop::collection::vec(simplex(n), k))) {
        let n = mus[0].len();
        let s = shape(n, mus.len());
        let refs: Vec<&[f64]> = mus.iter().map(|m| m.as_slice()).collect();
        let p = CouplingTensor::product(s, &refs).unwrap();
        prop_assert!(p.is_coupling(&MarginalSpec::full(mus.clone()).unwrap(), 1e-9).unwrap());
    }
}
