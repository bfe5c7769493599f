use super::{Check, Report};
use crate::cost::{
    build_clique_tensor, build_cut_cost, build_maxcut_cost, build_pairwise_from_graph, build_twosat_cost, Cnf,
    CostOracle, DeterminantVariant, Graph, IonSystem, KPartiteGraph, Vertex,
};
use crate::error::{Error, Result};
use crate::io::dimacs::{write_cnf, write_graph, write_kpartite};
use crate::io::{digest, Instance};
use crate::min::{min_bruteforce, twosat_min_zero, WeightMatrix};
use crate::mot::{solve_submodular, MotLp};
use crate::reduction::{lipschitz_bound, min_via_mot_approx, min_via_mot_exact, AnnealConfig, LpOracle};
use crate::tensor::{for_each_tuple, MarginalSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Dirichlet, Distribution};

const REAL_TOL: f64 = 1e-6;

fn instance_digest(cost: &CostOracle) -> Result<String> {
    let json = Instance::new(cost.clone()).to_json()?;
    Ok(digest([json.as_bytes()]))
}

/// Clique tensor: rank bound, three-way optimum agreement, clique flag.
pub fn verify_clique_encoding(g: &KPartiteGraph) -> Result<Report> {
    let (n, k) = (g.n(), g.k());
    let mut report = Report::new("clique", digest([write_kpartite(g).as_bytes()]), None);
    let (cost, r) = build_clique_tensor(g)?;
    report.push(Check::le("rank_bound", r as f64, "build_clique_tensor", (n * n * k * k) as f64, "n^2 k^2", 0.0));
    report.push(Check::eq("rank_is_edge_count", r as f64, "build_clique_tensor", g.edges().len() as f64, "graph", 0.0));

    let mut best = 0usize;
    let mut clique = false;
    let full = k * (k - 1) / 2;
    for_each_tuple(cost.shape(), |_, t| {
        // count adjacent pairs directly from the adjacency structure
        let mut edges = 0;
        for a in 0..k {
            for b in a + 1..k {
                if g.has_edge(Vertex::new(a, t[a]), Vertex::new(b, t[b])) {
                    edges += 1;
                }
            }
        }
        best = best.max(edges);
        clique |= edges == full;
    });
    let p = WeightMatrix::zeros(cost.shape());
    let brute = min_bruteforce(&cost, &p)?;
    let exact = min_via_mot_exact(&cost, &p)?;
    let optimum = -(best as f64);
    report.push(Check::eq("min_bruteforce", brute.value, "min_bruteforce", optimum, "adjacency_enumeration", 0.0));
    report.push(Check::eq(
        "min_via_mot_exact",
        exact.result.value,
        "min_via_mot_exact",
        optimum,
        "adjacency_enumeration",
        0.0,
    ));
    let flag = brute.value == -(full as f64);
    report.push(Check::holds("clique_flag", flag == clique, "min_bruteforce vs adjacency_enumeration"));
    report.real("optimum", brute.value);
    report.value("clique", flag);
    report.value("rank", r);
    report.value("queries", exact.queries);
    Ok(report)
}

/// Pairwise and low-rank encodings of the same graph agree entrywise and under the reduction.
pub fn verify_pairwise_equivalence(g: &KPartiteGraph) -> Result<Report> {
    let mut report = Report::new("pairwise", digest([write_kpartite(g).as_bytes()]), None);
    let (low, _) = build_clique_tensor(g)?;
    let pair = build_pairwise_from_graph(g)?;
    let (a, b) = (low.materialize()?, pair.materialize()?);
    let diff = a.data.iter().zip(&b.data).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    report.push(Check::eq("entrywise_max_diff", diff, "materialize", 0.0, "expected", 0.0));
    let p = WeightMatrix::zeros(low.shape());
    let (bl, bp) = (min_bruteforce(&low, &p)?, min_bruteforce(&pair, &p)?);
    report.push(Check::eq("min_bruteforce", bp.value, "pairwise", bl.value, "low_rank", 0.0));
    let (el, ep) = (min_via_mot_exact(&low, &p)?, min_via_mot_exact(&pair, &p)?);
    report.push(Check::eq("min_via_mot_exact", ep.result.value, "pairwise", el.result.value, "low_rank", 0.0));
    report.push(Check::eq("reduction_vs_brute", ep.result.value, "min_via_mot_exact", bl.value, "min_bruteforce", 0.0));
    report.real("optimum", bl.value);
    Ok(report)
}

/// Determinant costs: brute force vs the exact and the zeroth-order reductions.
pub fn verify_determinant_min(points: Vec<Vec<f64>>, variant: DeterminantVariant, seed: u64) -> Result<Report> {
    let cost = CostOracle::determinant(points, variant)?;
    let mut report = Report::new("determinant", instance_digest(&cost)?, Some(seed));
    let p = WeightMatrix::zeros(cost.shape());
    let brute = min_bruteforce(&cost, &p)?;
    let exact = min_via_mot_exact(&cost, &p)?;
    report.push(Check::eq(
        "min_via_mot_exact",
        exact.result.value,
        "min_via_mot_exact",
        brute.value,
        "min_bruteforce",
        REAL_TOL,
    ));
    let oracle = LpOracle::new(&cost)?;
    let cfg = AnnealConfig { seed, ..AnnealConfig::default() };
    let approx = min_via_mot_approx(&oracle, &p, 0.0, &cfg)?;
    report.push(Check::eq(
        "min_via_mot_approx",
        approx.value,
        "min_via_mot_approx(eps=0)",
        brute.value,
        "min_bruteforce",
        REAL_TOL,
    ));
    report.real("optimum", brute.value);
    report.value("approximate", exact.approximate);
    report.value("witness", brute.witness.one_based());
    Ok(report)
}

/// Max-cut through the supermodular reduction, and the submodular chain solver against the LP.
pub fn verify_supermodular_dichotomy(g: &Graph, seed: u64) -> Result<Report> {
    let mut report = Report::new("supermodular", digest([write_graph(g).as_bytes()]), Some(seed));
    let k = g.vertices();
    if k > 20 {
        return Err(Error::CapExceeded { entries: 2f64.powi(k as i32), cap: 1 << 20 });
    }
    let maxcut = (0..1u64 << k).map(|m| g.cut_value(m)).max().unwrap_or(0) as f64;
    let neg = build_maxcut_cost(g)?;
    let p = WeightMatrix::zeros(neg.shape());
    let exact = min_via_mot_exact(&neg, &p)?;
    report.push(Check::eq(
        "maxcut_via_reduction",
        -exact.result.value,
        "min_via_mot_exact",
        maxcut,
        "subset_enumeration",
        0.0,
    ));

    let cut = build_cut_cost(g)?;
    report.push(Check::holds("cut_is_submodular", cut.is_submodular()?, "local_exchange"));
    report.push(Check::holds("negated_cut_is_supermodular", neg.is_supermodular()?, "local_exchange"));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lp = MotLp::new(&cut)?;
    for t in 0..3 {
        let x: Vec<f64> = (0..k).map(|_| rng.gen::<f64>()).collect();
        let chain = solve_submodular(&cut, &x, true)?;
        let exact = lp.solve(&MarginalSpec::bernoulli(&x)?)?;
        report.push(Check::eq(
            &format!("submodular_vs_lp[{t}]"),
            chain.value,
            "solve_submodular",
            exact.value,
            "solve_lp",
            1e-8,
        ));
    }
    report.real("maxcut", maxcut);
    report.value("queries", exact.queries);
    Ok(report)
}

fn balanced_subset_optimum(system: &IonSystem, k: usize) -> Option<(f64, Vec<usize>)> {
    let n = system.n();
    if k > n {
        return None;
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut subset: Vec<usize> = (0..k).collect();
    loop {
        if subset.iter().map(|&j| i32::from(system.charges[j])).sum::<i32>() == 0 {
            let mut energy = 0.0;
            for a in 0..k {
                for b in a + 1..k {
                    let (x, y) = (subset[a], subset[b]);
                    let r = system.distance(x, y);
                    energy += if r == 0.0 {
                        system.penalty
                    } else {
                        match system.variant {
                            crate::cost::IonVariant::Coulomb => f64::from(system.charges[x] * system.charges[y]) / r,
                            crate::cost::IonVariant::Buckingham => {
                                system.params.energy(r, system.charges[x], system.charges[y])
                            }
                        }
                    };
                }
            }
            if best.as_ref().map_or(true, |(b, _)| energy < *b) {
                best = Some((energy, subset.clone()));
            }
        }
        // next k-combination in lexicographic order
        let mut i = k;
        while i > 0 && subset[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        subset[i - 1] += 1;
        for j in i..k {
            subset[j] = subset[j - 1] + 1;
        }
    }
    best
}

/// Ion selection: charge-balanced subset enumeration vs the tuple cost.
pub fn verify_buckingham(system: &IonSystem, k: usize) -> Result<Report> {
    let cost = CostOracle::ions(system.clone(), k)?;
    let mut report = Report::new("buckingham", instance_digest(&cost)?, None);
    report.push(Check::le("separation_at_least_one", 1.0, "required", system.min_separation(), "positions", 0.0));
    if system.variant == crate::cost::IonVariant::Buckingham {
        report.push(Check::le(
            "penalty_regime",
            system.params.min_penalty(k),
            "2k^2(2+A+ +A- +C+ +C-)",
            system.penalty,
            "M",
            0.0,
        ));
    }
    let subset = balanced_subset_optimum(system, k);
    let expected = subset.as_ref().map_or(system.penalty, |(e, _)| e.min(system.penalty));
    let p = WeightMatrix::zeros(cost.shape());
    let brute = min_bruteforce(&cost, &p)?;
    let exact = min_via_mot_exact(&cost, &p)?;
    report.push(Check::eq("min_bruteforce", brute.value, "min_bruteforce", expected, "subset_enumeration", REAL_TOL));
    report.push(Check::eq(
        "min_via_mot_exact",
        exact.result.value,
        "min_via_mot_exact",
        expected,
        "subset_enumeration",
        REAL_TOL,
    ));
    report.real("optimum", expected);
    report.value("balanced_subset", subset.map(|(_, s)| s.iter().map(|j| j + 1).collect::<Vec<_>>()));
    Ok(report)
}

/// `MIN_C(0)` by implication-graph SCCs vs brute force, and the NP-hard weighted case.
pub fn verify_twosat_dichotomy(phi: &Cnf) -> Result<Report> {
    phi.check_two_sat()?;
    let mut report = Report::new("twosat", digest([write_cnf(phi).as_bytes()]), None);
    let cost = build_twosat_cost(phi)?;
    let k = phi.num_vars();
    let zero = WeightMatrix::zeros(cost.shape());
    let poly = twosat_min_zero(&cost)?;
    let brute0 = min_bruteforce(&cost, &zero)?;
    report.push(Check::eq("min_zero_scc_vs_brute", poly.value, "twosat_min_zero", brute0.value, "min_bruteforce", 0.0));

    let w = 1.0 / (2 * k) as f64;
    let p = WeightMatrix::repeated(vec![0.0, -w], k);
    // -max_j [phi(j) - |j|/(2k)] by direct clause evaluation
    let mut best = f64::NEG_INFINITY;
    for_each_tuple(cost.shape(), |_, t| {
        let ones = t.iter().filter(|&&b| b == 1).count();
        let v = f64::from(u8::from(phi.eval(t))) - ones as f64 * w;
        best = best.max(v);
    });
    let expected = -best;
    let brute = min_bruteforce(&cost, &p)?;
    let exact = min_via_mot_exact(&cost, &p)?;
    report.push(Check::eq(
        "min_weight_brute",
        brute.value,
        "min_bruteforce",
        expected,
        "assignment_enumeration",
        1e-12,
    ));
    report.push(Check::eq(
        "min_weight_reduction",
        exact.result.value,
        "min_via_mot_exact",
        expected,
        "assignment_enumeration",
        1e-12,
    ));
    report.real("min_zero", poly.value);
    report.real("min_weighted", exact.result.value);
    report.value("satisfiable", poly.value < 0.0);
    report.value("queries", exact.queries);
    Ok(report)
}

/// Samples marginal pairs and records the largest `|ΔMOT| / ||Δmu||_1`.
pub fn lipschitz_experiment(cost: &CostOracle, trials: usize, seed: u64) -> Result<Report> {
    let mut report = Report::new("lipschitz", instance_digest(cost)?, Some(seed));
    let shape = cost.shape();
    let (n, k) = (shape.n, shape.k);
    let lp = MotLp::new(cost)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dir = (n > 1).then(|| Dirichlet::new(&vec![0.5; n])).transpose().map_err(|e| Error::Internal(e.to_string()))?;
    let sample = |rng: &mut ChaCha8Rng| -> Vec<Vec<f64>> {
        (0..k)
            .map(|_| match &dir {
                Some(d) => d.sample(rng),
                None => vec![1.0],
            })
            .collect()
    };
    let mut max_ratio: f64 = 0.0;
    let mut used = 0usize;
    for t in 0..trials {
        let a = sample(&mut rng);
        let b: Vec<Vec<f64>> = if t % 2 == 0 {
            sample(&mut rng)
        } else {
            // a nearby point: small convex step toward a fresh sample
            let lambda = rng.gen_range(1e-3..0.1);
            a.iter()
                .zip(sample(&mut rng))
                .map(|(x, y)| x.iter().zip(&y).map(|(u, v)| (1.0 - lambda) * u + lambda * v).collect())
                .collect()
        };
        let (sa, sb) = (crate::reduction::normalized_spec(a)?, crate::reduction::normalized_spec(b)?);
        let dist = sa.l1_distance(&sb)?;
        if dist < 1e-12 {
            continue;
        }
        let (va, vb) = (lp.solve(&sa)?.value, lp.solve(&sb)?.value);
        max_ratio = max_ratio.max((va - vb).abs() / dist);
        used += 1;
    }
    let bound = lipschitz_bound(cost);
    report.push(Check::le("max_ratio", max_ratio, "solve_lp sampling", bound, "2 * cost_upper_bound", 1e-6));
    report.real("max_ratio", max_ratio);
    report.real("bound", bound);
    report.value("pairs", used);
    Ok(report)
}
