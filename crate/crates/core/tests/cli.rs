use motlab::io::Real;
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

fn motlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_motlab")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn real(v: &Value) -> f64 {
    Real::parse(v.as_str().expect("real string")).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "{e}: stdout {:?} stderr {:?}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

// non-separable, so Sinkhorn cannot finish in a single sweep
const MOT: &str = r#"{"n":3,"k":3,
 "cost":{"family":"dense","values":[5,2,3,4,0,6,7,1,9,1,8,3,4,5,2,7,8,0,1,2,6,4,9,6,3,8,9]},
 "marginals":{"constrained":[1,2,3],"values":[[0.2,0.3,0.5],[0.3,0.3,0.4],[0.1,0.1,0.8]]}}"#;

const OR_CLAUSE: &str = r#"{"n":2,"k":2,
 "cost":{"family":"two_sat","num_vars":2,"clauses":[[1,2]]},
 "weights_p":[["0","-0.25"],["0","-0.25"]]}"#;

#[test]
fn solve_mot_lp_report() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "mot.json", MOT);
    let out = motlab(&["solve-mot", inst.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    assert_eq!(r["command"], "solve-mot");
    assert_eq!(r["backend"], "lp");
    assert_eq!(r["converged"], true);
    assert_eq!(r["instance_digest"].as_str().unwrap().len(), 64);
    let value = real(&r["value"]);
    assert!((value - real(&r["dual_value"])).abs() <= 1e-9);

    // recompute ⟨P, C⟩ and the marginals from the reported coupling
    let costs: Vec<f64> = [5, 2, 3, 4, 0, 6, 7, 1, 9, 1, 8, 3, 4, 5, 2, 7, 8, 0, 1, 2, 6, 4, 9, 6, 3, 8, 9]
        .iter()
        .map(|&c| f64::from(c))
        .collect();
    let mut total = 0.0;
    let mut first = [0.0; 3];
    for e in r["coupling"].as_array().unwrap() {
        let idx: Vec<usize> = serde_json::from_value(e["index"].clone()).unwrap();
        let w = real(&e["mass"]);
        assert!(w > 0.0);
        total += w * costs[(idx[0] - 1) * 9 + (idx[1] - 1) * 3 + (idx[2] - 1)];
        first[idx[0] - 1] += w;
    }
    assert!((total - value).abs() <= 1e-12);
    for (got, want) in first.iter().zip([0.2, 0.3, 0.5]) {
        assert!((got - want).abs() <= 1e-12);
    }
}

#[test]
fn solve_mot_sinkhorn_with_rounding() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "mot.json", MOT);
    let out_file = dir.path().join("report.json");
    let out = motlab(&[
        "solve-mot",
        inst.to_str().unwrap(),
        "--backend",
        "sinkhorn",
        "--eta",
        "50",
        "--tol",
        "1e-10",
        "--round",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out_file).unwrap()).unwrap();
    assert_eq!(r["rounded"], true);
    assert!(real(&r["marginal_error"]) <= 1e-12);
    let lp = stdout_json(&motlab(&["solve-mot", inst.to_str().unwrap()]));
    let gap = real(&r["value"]) - real(&lp["value"]);
    assert!(gap >= -1e-9 && gap <= 3.0 * 3f64.ln() / 50.0 + 1e-6, "gap {gap}");
}

#[test]
fn solve_min_routes_agree() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "sat.json", OR_CLAUSE);
    let path = inst.to_str().unwrap();
    let brute = stdout_json(&motlab(&["solve-min", path]));
    assert_eq!(real(&brute["value"]), -0.75);
    assert_eq!(brute["witness"], serde_json::json!([1, 2]));
    assert_eq!(brute["queries"], 0);

    let out = motlab(&["solve-min", path, "--via", "mot-exact"]);
    assert_eq!(code(&out), 0);
    let exact = stdout_json(&out);
    assert_eq!(real(&exact["value"]), -0.75);
    assert_eq!(exact["certified"], true);
    assert!(exact["queries"].as_u64().unwrap() >= 1);

    let approx = stdout_json(&motlab(&["solve-min", path, "--via", "mot-approx", "--eps", "0", "--trials", "3"]));
    assert!((real(&approx["value"]) + 0.75).abs() <= 1e-4);
    assert_eq!(approx["values"].as_array().unwrap().len(), 3);
}

#[test]
fn schema_and_input_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let short = write(dir.path(), "short.json", r#"{"n":2,"k":2,"cost":{"family":"dense","values":[1,2,3]}}"#);
    let unknown =
        write(dir.path(), "unknown.json", r#"{"n":1,"k":1,"cost":{"family":"dense","values":[1]},"extra":1}"#);
    let garbage = write(dir.path(), "garbage.json", "not json");
    for path in [&short, &unknown, &garbage] {
        let out = motlab(&["solve-min", path.to_str().unwrap()]);
        assert_eq!(code(&out), 2, "{}", path.display());
        assert!(!out.stderr.is_empty());
    }
    assert_eq!(code(&motlab(&["solve-min", dir.path().join("missing.json").to_str().unwrap()])), 2);
    assert_eq!(code(&motlab(&["frobnicate"])), 2);
    assert_eq!(code(&motlab(&["verify", "no-such-construction", short.to_str().unwrap()])), 2);
    // --round on a partially constrained instance
    let partial = write(
        dir.path(),
        "partial.json",
        r#"{"n":2,"k":2,"cost":{"family":"dense","values":[0,1,1,0]},"marginals":{"constrained":[1],"values":[[0.5,0.5]]}}"#,
    );
    assert_eq!(code(&motlab(&["solve-mot", partial.to_str().unwrap(), "--round"])), 2);
    assert_eq!(code(&motlab(&["solve-mot", partial.to_str().unwrap()])), 0);
}

#[test]
fn size_cap_exits_3() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "mot.json", MOT);
    for cmd in ["solve-mot", "solve-min"] {
        let out = Command::new(env!("CARGO_BIN_EXE_motlab"))
            .args([cmd, inst.to_str().unwrap()])
            .env("MOTLAB_DENSE_CAP", "10")
            .output()
            .unwrap();
        assert_eq!(code(&out), 3, "{cmd}");
        assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
    }
}

#[test]
fn sinkhorn_non_convergence_exits_4() {
    let dir = TempDir::new().unwrap();
    let inst = write(dir.path(), "mot.json", MOT);
    let out = motlab(&["solve-mot", inst.to_str().unwrap(), "--backend", "sinkhorn", "--max-iters", "1"]);
    assert_eq!(code(&out), 4);
    // the report is still written
    let r = stdout_json(&out);
    assert_eq!(r["converged"], false);
    assert_eq!(r["iterations"], 1);
}

#[test]
fn verify_commands() {
    let dir = TempDir::new().unwrap();
    let cnf = write(dir.path(), "or.cnf", "c or clause\np cnf 2 1\n1 2 0\n");
    let out = motlab(&["verify", "twosat", cnf.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    assert_eq!(r["construction"], "twosat");
    assert_eq!(real(&r["values"]["min_weighted"]), -0.75);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));

    let params = write(
        dir.path(),
        "gap.json",
        r#"{"a_plus":"1","a_minus":"1","b_plus":"1","b_minus":"1","c_plus":"1","c_minus":"1"}"#,
    );
    let out = motlab(&["verify", "gap", params.to_str().unwrap(), "--n", "2..5"]);
    assert_eq!(code(&out), 0);
    let r = stdout_json(&out);
    assert_eq!(r["evaluations"].as_array().unwrap().len(), 12);
    assert_eq!((r["values"]["n_min"].as_u64(), r["values"]["n_max"].as_u64()), (Some(2), Some(5)));
    assert_eq!(code(&motlab(&["verify", "gap", params.to_str().unwrap()])), 2);
}

const MANIFEST: &str = r#"{"runs":[
 {"instance":"sat.json","command":"solve-min","args":["--via","mot-exact"]},
 {"instance":"sat.json","command":"solve-min","args":["--via","mot-approx","--eps","0.01","--seed","4","--trials","3"],"reference_value":"-0.75","tol":"0.04"},
 {"instance":"mot.json","command":"solve-mot"},
 {"instance":"mot.json","command":"solve-mot","args":["--backend","sinkhorn","--eta","20"]},
 {"instance":"or.cnf","command":"verify","construction":"twosat"}
]}"#;

fn run_batch(dir: &Path, jobs: &str, out_dir: &str) -> (i32, String) {
    let out = motlab(&[
        "batch",
        dir.join("manifest.json").to_str().unwrap(),
        "--jobs",
        jobs,
        "--out-dir",
        dir.join(out_dir).to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(dir.join(out_dir).join("summary.csv")).unwrap();
    (code(&out), csv)
}

fn without_wall_ms(csv: &str) -> Vec<Vec<String>> {
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let wall = headers.iter().position(|h| h == "wall_ms").unwrap();
    reader
        .records()
        .map(|r| r.unwrap().iter().enumerate().filter(|(i, _)| *i != wall).map(|(_, f)| f.to_string()).collect())
        .collect()
}

#[test]
fn batch_summary_is_deterministic_across_job_counts() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "sat.json", OR_CLAUSE);
    write(dir.path(), "mot.json", MOT);
    write(dir.path(), "or.cnf", "p cnf 2 1\n1 2 0\n");
    write(dir.path(), "manifest.json", MANIFEST);

    let (c1, serial) = run_batch(dir.path(), "1", "serial");
    let (c3, parallel) = run_batch(dir.path(), "3", "parallel");
    assert_eq!((c1, c3), (0, 0), "{serial}");
    assert!(serial.starts_with("instance,command,value,reference_value,abs_err,queries,wall_ms,pass"));
    let rows = without_wall_ms(&serial);
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.last().unwrap() == "true"));
    assert_eq!(rows, without_wall_ms(&parallel));
    // one report per run
    let reports = std::fs::read_dir(dir.path().join("serial")).unwrap().count();
    assert_eq!(reports, 6);
}

#[test]
fn batch_reference_mismatch_exits_1() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "sat.json", OR_CLAUSE);
    write(dir.path(), "short.json", r#"{"n":2,"k":2,"cost":{"family":"dense","values":[1]}}"#);
    write(
        dir.path(),
        "manifest.json",
        r#"[{"instance":"sat.json","command":"solve-min","reference_value":"-1"},
            {"instance":"short.json","command":"solve-min"}]"#,
    );
    let (status, csv) = run_batch(dir.path(), "2", "out");
    assert_eq!(status, 1);
    let rows = without_wall_ms(&csv);
    assert_eq!(rows[0].last().unwrap(), "false");
    assert_eq!(real(&Value::String(rows[0][4].clone())), 0.25);
    assert_eq!(rows[1].last().unwrap(), "false");
    let err: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("out/0001-solve-min-short.json")).unwrap())
            .unwrap();
    assert_eq!(err["exit_code"], 2);

    write(dir.path(), "manifest.json", r#"{"runs":[{"instance":"sat.json","command":"batch"}]}"#);
    let out = motlab(&[
        "batch",
        dir.path().join("manifest.json").to_str().unwrap(),
        "--out-dir",
        dir.path().join("o2").to_str().unwrap(),
    ]);
    assert_ne!(code(&out), 0);
}
