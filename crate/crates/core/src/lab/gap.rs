//! Numerical check of the three Buckingham gap inequalities, each with a
//! `1/n^10` slack, for caller-supplied constants.

use super::{Check, Report};
use crate::cost::BuckinghamParams;
use crate::error::{Error, Result};
use crate::io::{digest, Real};
use serde::Serialize;
use std::ops::RangeInclusive;

pub const GAP_GRID_POINTS: usize = 1000;
const REFINE_POINTS: usize = 200;

/// `g(r) = A+ e^{-B+ r} - C+/r^6 + 1/r + A- e^{-B- s} - C-/s^6 - 1/s`, `s = sqrt(1 + r^2)`.
pub fn gap_expression(p: &BuckinghamParams, r: f64) -> f64 {
    let s2 = 1.0 + r * r;
    let s = s2.sqrt();
    p.a_plus / (p.b_plus * r).exp() - p.c_plus / r.powi(6) + 1.0 / r + p.a_minus / (p.b_minus * s).exp()
        - p.c_minus / s2.powi(3)
        - 1.0 / s
}

fn baseline(p: &BuckinghamParams) -> f64 {
    (p.a_minus / p.b_minus.exp() - p.c_minus - 1.0).abs()
}

/// Worst case of one inequality at one `n`. `margin` is how far the
/// inequality holds (negative means violated); `margin_no_slack` is the same
/// with the `1/n^10` term replaced by zero.
#[derive(Clone, Debug, Serialize)]
pub struct GapEvaluation {
    pub n: usize,
    pub inequality: u8,
    pub worst_r: Real,
    pub lhs: Real,
    pub rhs: Real,
    pub margin: Real,
    pub margin_no_slack: Real,
    pub pass: bool,
    pub pass_no_slack: bool,
    pub points: usize,
    pub failing_points: usize,
}

struct Side {
    lhs: f64,
    rhs: f64,
    margin: f64,
    margin0: f64,
}

fn ineq(which: u8, p: &BuckinghamParams, n: usize, r: f64) -> Side {
    let nf = n as f64;
    let slack = nf.powi(-10);
    let g = gap_expression(p, r);
    let b = baseline(p);
    match which {
        1 => Side { lhs: g, rhs: b + slack, margin: g - b - slack, margin0: g - b },
        2 => {
            let lhs = nf * nf * g.abs();
            Side { lhs, rhs: b - slack, margin: b - slack - lhs, margin0: b - lhs }
        }
        _ => Side { lhs: g, rhs: slack, margin: g - slack, margin0: g },
    }
}

fn holds(which: u8, margin: f64) -> bool {
    // the third inequality is strict
    if which == 3 {
        margin > 0.0
    } else {
        margin >= 0.0
    }
}

/// Geometric grid on `[sqrt(2n), n^2]` plus `n` and `sqrt(1 + n^2)` when they fall in range.
fn grid(n: usize) -> Vec<f64> {
    let nf = n as f64;
    let lo = (2.0 * nf).sqrt();
    let hi = (nf * nf).max(lo);
    let mut r: Vec<f64> = if hi > lo {
        let ratio = (hi / lo).ln() / (GAP_GRID_POINTS - 1) as f64;
        (0..GAP_GRID_POINTS).map(|i| lo * (ratio * i as f64).exp()).collect()
    } else {
        vec![lo]
    };
    for extra in [nf, (1.0 + nf * nf).sqrt()] {
        if extra >= lo && extra <= hi {
            r.push(extra);
        }
    }
    r.sort_by(f64::total_cmp);
    r
}

fn evaluate(which: u8, p: &BuckinghamParams, n: usize) -> GapEvaluation {
    let points = if which == 1 { vec![n as f64] } else { grid(n) };
    let sides: Vec<Side> = points.iter().map(|&r| ineq(which, p, n, r)).collect();
    let failing_points = sides.iter().filter(|s| !holds(which, s.margin)).count();
    let worst_idx =
        (0..sides.len()).min_by(|&a, &b| sides[a].margin.total_cmp(&sides[b].margin)).expect("nonempty grid");
    let mut worst_r = points[worst_idx];
    let mut worst = ineq(which, p, n, worst_r);
    // refine between the neighbours of the worst grid point
    if points.len() > 1 {
        let a = points[worst_idx.saturating_sub(1)];
        let b = points[(worst_idx + 1).min(points.len() - 1)];
        for i in 0..=REFINE_POINTS {
            let r = a + (b - a) * i as f64 / REFINE_POINTS as f64;
            let s = ineq(which, p, n, r);
            if s.margin < worst.margin {
                worst = s;
                worst_r = r;
            }
        }
    }
    let worst0 = sides.iter().map(|s| s.margin0).fold(ineq(which, p, n, worst_r).margin0, f64::min);
    GapEvaluation {
        n,
        inequality: which,
        worst_r: Real(worst_r),
        lhs: Real(worst.lhs),
        rhs: Real(worst.rhs),
        margin: Real(worst.margin),
        margin_no_slack: Real(worst0),
        pass: holds(which, worst.margin),
        pass_no_slack: holds(which, worst0),
        points: points.len(),
        failing_points,
    }
}

/// Evaluates the three inequalities for every `n` in `ns`. The evaluations
/// are report-only; the checks assert that each evaluation is finite and
/// that dropping the slack never turns a pass into a failure.
pub fn check_gap_inequalities(params: &BuckinghamParams, ns: RangeInclusive<usize>) -> Result<Report> {
    let all = [params.a_plus, params.a_minus, params.b_plus, params.b_minus, params.c_plus, params.c_minus];
    if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::InvalidInput("gap constants must be finite and nonnegative".into()));
    }
    if *ns.start() == 0 || ns.is_empty() {
        return Err(Error::InvalidInput("n range must be nonempty and start at 1 or more".into()));
    }
    let json = serde_json::to_vec(params)?;
    let mut report = Report::new("gap", digest([json.as_slice()]), None);
    let mut pass_by_n = Vec::new();
    for n in ns.clone() {
        let mut all_pass = true;
        for which in 1..=3u8 {
            let e = evaluate(which, params, n);
            report.push(Check::holds(
                &format!("evaluated n={n} ineq={which}"),
                e.margin.0.is_finite() && e.margin_no_slack.0.is_finite(),
                "gap_expression",
            ));
            report.push(Check::holds(
                &format!("monotone_slack n={n} ineq={which}"),
                !e.pass || e.pass_no_slack,
                "gap_expression",
            ));
            all_pass &= e.pass;
            report.evaluations.push(e);
        }
        pass_by_n.push((n, all_pass));
    }
    // smallest n from which every larger n in range passes
    let threshold = pass_by_n.iter().rev().take_while(|(_, ok)| *ok).last().map(|(n, _)| *n);
    report.value("threshold_n", threshold);
    report.value("all_pass", pass_by_n.iter().all(|(_, ok)| *ok));
    report.value("n_min", *ns.start());
    report.value("n_max", *ns.end());
    Ok(report)
}
