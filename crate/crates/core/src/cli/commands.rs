use super::{BackendArg, Command, SolveMinArgs, SolveMotArgs, VerifyArgs, ViaArg};
use super::{EXIT_CHECK_FAILED, EXIT_NOT_CONVERGED, EXIT_OK};
use crate::cost::{BuckinghamParams, CostFamily};
use crate::error::{Error, Result};
use crate::io::dimacs::{parse_cnf, parse_graph};
use crate::io::{digest, Instance, Real};
use crate::lab::{self, Report};
use crate::min::min_bruteforce;
use crate::mot::{sinkhorn, solve_lp, solve_submodular, MotSolution, SinkhornConfig};
use crate::reduction::{min_via_mot_approx, min_via_mot_exact, AnnealConfig, LpOracle, MotOracle, NoisyOracle};
use serde::Deserialize;
use serde_json::{json, Value};
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    ChecksFailed,
    NotConverged,
}

/// A finished command: its report plus the figures the batch summary needs.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Value,
    pub value: Option<f64>,
    pub queries: Option<usize>,
    pub status: Status,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => EXIT_OK,
            Status::ChecksFailed => EXIT_CHECK_FAILED,
            Status::NotConverged => EXIT_NOT_CONVERGED,
        }
    }
}

pub fn execute(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::SolveMot(a) => solve_mot(a),
        Command::SolveMin(a) => solve_min(a),
        Command::Verify(a) => verify(a),
        Command::Batch(_) => Err(Error::InvalidInput("batch manifests cannot nest batch runs".into())),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<(Instance, String)> {
    let text = read(path)?;
    let inst = Instance::from_json(&text)?;
    Ok((inst, digest([text.as_bytes()])))
}

fn r(v: f64) -> Value {
    json!(Real::format(v))
}

fn coupling_json(sol: &MotSolution) -> Value {
    let mut entries = Vec::new();
    sol.coupling.for_each_entry(|t, w| {
        if w > 0.0 {
            entries.push(json!({"index": t.iter().map(|j| j + 1).collect::<Vec<_>>(), "mass": r(w)}));
        }
    });
    Value::Array(entries)
}

fn solve_mot(a: &SolveMotArgs) -> Result<Outcome> {
    let (inst, dig) = load_instance(&a.instance)?;
    let spec = inst.spec.clone().ok_or_else(|| Error::InvalidMarginal("instance has no `marginals` block".into()))?;
    if a.round && !spec.is_fully_fixed() {
        return Err(Error::InvalidMarginal("--round needs every marginal fixed".into()));
    }
    let mut sol = match a.backend {
        BackendArg::Lp => solve_lp(&inst.cost, &spec)?,
        BackendArg::Sinkhorn => sinkhorn(&inst.cost, &spec, &SinkhornConfig::new(a.eta, a.tol, a.max_iters)?)?,
        BackendArg::Submodular => {
            if !spec.is_fully_fixed() {
                return Err(Error::InvalidMarginal("the submodular backend needs every marginal fixed".into()));
            }
            let x: Vec<f64> = spec.marginals().iter().map(|m| m[1]).collect();
            solve_submodular(&inst.cost, &x, true)?
        }
    };
    let unrounded = sol.value;
    if a.round {
        sol.coupling = sol.coupling.round_to_polytope(&spec)?.to_sparse();
        sol.value = sol.coupling.inner_product(&inst.cost)?;
        sol.marginal_error = crate::mot::marginal_error(&sol.coupling, &spec)?;
    }
    let mut report = json!({
        "command": "solve-mot",
        "instance_digest": dig,
        "backend": sol.backend.name(),
        "value": r(sol.value),
        "converged": sol.converged,
        "iterations": sol.iterations,
        "marginal_error": r(sol.marginal_error),
        "rounded": a.round,
        "coupling": coupling_json(&sol),
    });
    if a.round {
        report["unrounded_value"] = r(unrounded);
    }
    if let Some(reg) = sol.regularized_value {
        report["regularized_value"] = r(reg);
        report["eta"] = r(a.eta);
        report["tol"] = r(a.tol);
    }
    if let Some(d) = &sol.duals {
        report["duals"] =
            json!(d.p.iter().map(|row| row.iter().map(|v| r(*v)).collect::<Vec<_>>()).collect::<Vec<_>>());
        report["dual_value"] = r(d.objective(&spec));
    }
    Ok(Outcome {
        report,
        value: Some(sol.value),
        queries: None,
        status: if sol.converged { Status::Ok } else { Status::NotConverged },
    })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

fn solve_min(a: &SolveMinArgs) -> Result<Outcome> {
    let (inst, dig) = load_instance(&a.instance)?;
    let p = inst.weights_or_zero();
    let mut report = json!({
        "command": "solve-min",
        "instance_digest": dig,
        "via": match a.via { ViaArg::Bruteforce => "bruteforce", ViaArg::MotExact => "mot-exact", ViaArg::MotApprox => "mot-approx" },
        "seed": a.seed,
    });
    let (value, queries, status) = match a.via {
        ViaArg::Bruteforce => {
            let m = min_bruteforce(&inst.cost, &p)?;
            report["witness"] = json!(m.witness.one_based());
            (m.value, 0, Status::Ok)
        }
        ViaArg::MotExact => {
            let m = min_via_mot_exact(&inst.cost, &p)?;
            report["witness"] = json!(m.result.witness.one_based());
            report["certified"] = json!(m.certified);
            report["approximate"] = json!(m.approximate);
            report["target_gap"] = r(m.target_gap);
            report["envelope_value"] = r(m.envelope_value);
            report["lower_bound"] = r(m.lower_bound);
            report["iterations"] = json!(m.iterations);
            let status = if m.certified { Status::Ok } else { Status::NotConverged };
            (m.result.value, m.queries, status)
        }
        ViaArg::MotApprox => {
            if a.trials == 0 {
                return Err(Error::InvalidInput("--trials must be at least 1".into()));
            }
            let mut values = Vec::with_capacity(a.trials);
            let mut queries = 0;
            for t in 0..a.trials as u64 {
                let seed = a.seed.wrapping_add(t);
                let oracle = NoisyOracle::new(LpOracle::new(&inst.cost)?, a.eps, seed ^ 0x9e37_79b9_7f4a_7c15)?;
                let cfg = AnnealConfig { seed, ..AnnealConfig::default() };
                let res = min_via_mot_approx(&oracle, &p, a.eps, &cfg)?;
                queries += oracle.queries();
                values.push(res.value);
            }
            report["eps"] = r(a.eps);
            report["values"] = json!(values.iter().map(|v| r(*v)).collect::<Vec<_>>());
            (median(&mut values), queries, Status::Ok)
        }
    };
    report["value"] = r(value);
    report["queries"] = json!(queries);
    Ok(Outcome { report, value: Some(value), queries: Some(queries), status })
}

#[derive(Deserialize)]
struct GapParamsDoc {
    a_plus: Real,
    a_minus: Real,
    b_plus: Real,
    b_minus: Real,
    c_plus: Real,
    c_minus: Real,
}

pub(crate) fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidInput(format!("bad range `{s}`; expected `a..b`"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (lo, hi.trim_start_matches('=')),
        None => (s, s),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad())?;
    let hi: usize = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

fn verify(a: &VerifyArgs) -> Result<Outcome> {
    let text = read(&a.inputs[0])?;
    let report: Report = match a.construction.as_str() {
        "clique" => lab::verify_clique_encoding(&parse_graph(&text)?.to_kpartite()?)?,
        "pairwise" => lab::verify_pairwise_equivalence(&parse_graph(&text)?.to_kpartite()?)?,
        "twosat" => lab::verify_twosat_dichotomy(&parse_cnf(&text)?)?,
        "supermodular" | "maxcut" => lab::verify_supermodular_dichotomy(&parse_graph(&text)?.to_graph()?, a.seed)?,
        "determinant" => {
            let inst = Instance::from_json(&text)?;
            match inst.cost.family() {
                CostFamily::Determinant(d) => lab::verify_determinant_min(d.points.clone(), d.variant, a.seed)?,
                _ => return Err(Error::WrongFamily { expected: "determinant", found: inst.cost.family_name() }),
            }
        }
        "buckingham" => {
            let inst = Instance::from_json(&text)?;
            match inst.cost.family() {
                CostFamily::Ions(s) => lab::verify_buckingham(s, inst.shape().k)?,
                _ => return Err(Error::WrongFamily { expected: "coulomb_buckingham", found: inst.cost.family_name() }),
            }
        }
        "gap" => {
            let doc: GapParamsDoc =
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("gap parameters: {e}")))?;
            let params = BuckinghamParams {
                a_plus: doc.a_plus.0,
                a_minus: doc.a_minus.0,
                b_plus: doc.b_plus.0,
                b_minus: doc.b_minus.0,
                c_plus: doc.c_plus.0,
                c_minus: doc.c_minus.0,
            };
            let range = parse_range(a.n.as_deref().ok_or_else(|| Error::InvalidInput("gap needs --n a..b".into()))?)?;
            lab::check_gap_inequalities(&params, range)?
        }
        "lipschitz" => {
            let inst = Instance::from_json(&text)?;
            lab::lipschitz_experiment(&inst.cost, a.trials, a.seed)?
        }
        other => return Err(Error::InvalidInput(format!("unknown construction `{other}`"))),
    };
    let headline = ["optimum", "maxcut", "max_ratio", "min_weighted"]
        .iter()
        .find_map(|k| report.values.get(*k))
        .and_then(|v| v.as_str())
        .and_then(Real::parse);
    let status = if report.passed() { Status::Ok } else { Status::ChecksFailed };
    Ok(Outcome {
        report: serde_json::to_value(&report)?,
        value: headline,
        queries: report.values.get("queries").and_then(|v| v.as_u64()).map(|v| v as usize),
        status,
    })
}
