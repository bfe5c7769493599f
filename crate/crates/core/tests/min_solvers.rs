mod common;

use common::{argmin, f, satisfies, tuples, zeros};
use motlab::corpus::{random_cost, random_two_cnf, Family};
use motlab::cost::{build_clique_tensor, build_twosat_cost, Cnf, CostOracle, KPartiteGraph, Vertex};
use motlab::min::{min_bruteforce, min_objective_gap, twosat_min_zero, WeightMatrix};
use motlab::tensor::Shape;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn bruteforce_examples() {
    let s = Shape::new(3, 4).unwrap();
    let r = min_bruteforce(&CostOracle::constant(s, 0.0).unwrap(), &WeightMatrix::zeros(s)).unwrap();
    assert_eq!((r.value, r.witness.as_slice()), (0.0, &[0, 0, 0, 0][..]));

    let c = build_twosat_cost(&Cnf::new(2, vec![vec![1, 2]]).unwrap()).unwrap();
    let p = WeightMatrix::repeated(vec![0.0, -0.25], 2);
    let r = min_bruteforce(&c, &p).unwrap();
    assert_eq!(r.value, -0.75);
    // (0,1) and (1,0) tie; the lexicographically smaller one is reported
    let (_, ties) = argmin(&c, &p.p);
    assert_eq!(ties, vec![vec![0, 1], vec![1, 0]]);
    assert_eq!(r.witness.as_slice(), &[0, 1]);

    let v = Vertex::new;
    let g = KPartiteGraph::new(2, 3, [(v(0, 1), v(1, 1)), (v(1, 1), v(2, 1)), (v(0, 1), v(2, 1))]).unwrap();
    let (c, _) = build_clique_tensor(&g).unwrap();
    let r = min_bruteforce(&c, &WeightMatrix::zeros(c.shape())).unwrap();
    assert_eq!((r.value, r.witness.as_slice()), (-3.0, &[1, 1, 1][..]));
}

#[test]
fn twosat_polynomial_examples() {
    let sat = build_twosat_cost(&Cnf::new(2, vec![vec![1, 2]]).unwrap()).unwrap();
    assert_eq!(twosat_min_zero(&sat).unwrap().value, -1.0);
    let contradiction = build_twosat_cost(&Cnf::new(1, vec![vec![1], vec![-1]]).unwrap()).unwrap();
    assert_eq!(twosat_min_zero(&contradiction).unwrap().value, 0.0);
}

#[test]
fn twosat_polynomial_matches_bruteforce() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for i in 0..50 {
        let k = 1 + i % 12;
        let phi = random_two_cnf(k, rng.gen_range(1..=3 * k), &mut rng).unwrap();
        let c = build_twosat_cost(&phi).unwrap();
        let poly = twosat_min_zero(&c).unwrap();
        let brute = min_bruteforce(&c, &WeightMatrix::zeros(c.shape())).unwrap();
        assert_eq!(poly.value, brute.value, "formula {i}");
        let satisfiable = tuples(2, k).iter().any(|a| satisfies(&phi, a));
        assert_eq!(poly.value, if satisfiable { -1.0 } else { 0.0 });
        if satisfiable {
            assert!(satisfies(&phi, poly.witness.as_slice()));
        }
    }
}

#[test]
fn objective_gap_examples() {
    let c = build_twosat_cost(&Cnf::new(3, vec![vec![1, 2], vec![-3]]).unwrap()).unwrap();
    assert_eq!(min_objective_gap(&c, &WeightMatrix::zeros(c.shape())).unwrap(), 1.0);
    let flat = CostOracle::constant(Shape::new(3, 2).unwrap(), 4.0).unwrap();
    assert_eq!(min_objective_gap(&flat, &WeightMatrix::zeros(flat.shape())).unwrap(), f64::INFINITY);
    let g = KPartiteGraph::complete(2, 3).unwrap();
    let (c, _) = build_clique_tensor(&KPartiteGraph::new(2, 3, g.edges()[..5].to_vec()).unwrap()).unwrap();
    assert_eq!(min_objective_gap(&c, &WeightMatrix::zeros(c.shape())).unwrap(), 1.0);
}

#[test]
fn objective_gap_matches_sorted_values() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for family in Family::ALL {
        let c = if family.binary() { random_cost(family, 2, 4, &mut rng) } else { random_cost(family, 3, 3, &mut rng) }
            .unwrap();
        let s = c.shape();
        let p: Vec<Vec<f64>> = (0..s.k).map(|_| (0..s.n).map(|_| f64::from(rng.gen_range(-3..=3))).collect()).collect();
        let mut values: Vec<f64> = tuples(s.n, s.k).iter().map(|t| f(&c, &p, t)).collect();
        values.sort_by(f64::total_cmp);
        values.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0));
        let expect = values.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        let got = min_objective_gap(&c, &WeightMatrix::new(p, s).unwrap()).unwrap();
        assert!(got == expect || (got - expect).abs() <= 1e-9, "{family:?}: {got} vs {expect}");
    }
}

fn small_cost() -> impl Strategy<Value = (CostOracle, Vec<Vec<f64>>)> {
    (1usize..=4, 1usize..=4, any::<u64>(), prop::sample::select(Family::ALL.to_vec())).prop_map(
        |(n, k, seed, family)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = if family.binary() { 2 } else { n };
            let c = random_cost(family, n, k, &mut rng).unwrap();
            let s = c.shape();
            let p = (0..s.k).map(|_| (0..s.n).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
            (c, p)
        },
    )
}

fn values_are_integral(c: &CostOracle) -> bool {
    let s = c.shape();
    tuples(s.n, s.k).iter().all(|t| c.evaluate(t).fract() == 0.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn translation_covariance((c, _) in small_cost(), shift in -50i32..50) {
        let s = c.shape();
        let shift = f64::from(shift);
        let values: Vec<f64> = tuples(s.n, s.k).iter().map(|t| c.evaluate(t)).collect();
        let shifted = CostOracle::dense(s, values.iter().map(|v| v + shift).collect()).unwrap();
        let dense = CostOracle::dense(s, values).unwrap();
        let a = min_bruteforce(&dense, &WeightMatrix::zeros(s)).unwrap();
        let b = min_bruteforce(&shifted, &WeightMatrix::zeros(s)).unwrap();
        prop_assert!((b.value - (a.value + shift)).abs() <= 1e-9 * (1.0 + a.value.abs() + shift.abs()));
        let (_, before) = argmin(&dense, &zeros(s.n, s.k));
        let (_, after) = argmin(&shifted, &zeros(s.n, s.k));
        if values_are_integral(&dense) {
            prop_assert_eq!(before, after);
        }
        // the shifted witness is a minimizer of the original cost
        let slack = 1e-9 * (1.0 + a.value.abs() + shift.abs());
        prop_assert!(dense.evaluate(b.witness.as_slice()) <= a.value + slack);
    }

    #[test]
    fn minimum_bounds_every_tuple((c, p) in small_cost(), picks in prop::collection::vec(any::<u64>(), 100)) {
        let s = c.shape();
        let w = WeightMatrix::new(p.clone(), s).unwrap();
        let r = min_bruteforce(&c, &w).unwrap();
        prop_assert_eq!(r.value, f(&c, &p, r.witness.as_slice()));
        for pick in picks {
            let t: Vec<usize> = (0..s.k).map(|i| ((pick >> (4 * i)) as usize) % s.n).collect();
            prop_assert!(r.value <= f(&c, &p, &t));
        }
    }
}
