use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_shiftlab"));
    c.env_remove("SHIFTLAB_DIGITS");
    c
}

fn write_scenario(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(format!("{name}.json"));
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(args: &[&Path]) -> Output {
    bin().arg("run").args(args).output().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn classic_p1_certify_exits_zero_with_threshold() {
    let tmp = TempDir::new().unwrap();
    let sc = write_scenario(
        tmp.path(),
        "c",
        &json!({
            "space": {"kind": "classic_bargmann", "p": 1},
            "task": {"type": "certify", "hypotheses": ["Hyp1", "Hyp2", "Hyp3"],
                     "gamma": {"name": "sqrt_n_log_n"}, "lambda_abs": ["1", "2"]},
            "output": "out"
        }),
    );
    let o = run(&[&sc]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = tmp.path().join("out");
    for l in ["1", "2"] {
        let c = read_json(&out.join(format!("hyp3_lambda_{l}.cert.json")));
        assert_eq!(c["verdict"], "pass");
        assert!(c["threshold_n0"].as_u64().is_some());
    }
    let s = read_json(&out.join("scenario.json"));
    assert_eq!(s["precision"]["digits"], 50);
    assert!(s["artifact_version"].is_string());
    assert_eq!(s["scenario"]["space"]["p"], 1);
}

#[test]
fn theta_chaos_certificate_cites_closed_form_threshold() {
    let tmp = TempDir::new().unwrap();
    let sc = write_scenario(
        tmp.path(),
        "t",
        &json!({
            "space": {"kind": "theta_fock_bargmann", "nu": "2pi", "alpha": "0", "p": 0},
            "task": {"type": "certify", "gamma": {"name": "theta_geometric", "beta_prime": "3"}, "lambda_abs": ["1"]},
            "output": "out"
        }),
    );
    let o = run(&[&sc]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let c = read_json(&tmp.path().join("out/hyp3_lambda_1.cert.json"));
    let t = &c["details"]["theta_closed_form"];
    assert_eq!(t["holds"], true);
    assert!(t["first_index"].as_u64().unwrap() >= 2);
}

#[test]
fn malformed_space_kind_is_a_parse_error() {
    let tmp = TempDir::new().unwrap();
    let p = tmp.path().join("bad.json");
    fs::write(&p, "{\n  \"space\": {\"kind\": \"hilbert_space\", \"p\": 0},\n  \"task\": {\"type\": \"weights\", \"n_max\": 5}\n}\n").unwrap();
    let o = run(&[&p]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:2:"), "{err}");
    assert!(err.contains("space"), "{err}");
}

#[test]
fn unknown_task_field_names_the_path() {
    let tmp = TempDir::new().unwrap();
    let p = write_scenario(
        tmp.path(),
        "typo",
        &json!({"space": {"kind": "classic_bargmann"}, "task": {"type": "weights", "n_max": 5, "nmin": 2}}),
    );
    let o = run(&[&p]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nmin"));
}

fn certify_hyp12(kind: Value, p: u32) -> Value {
    let mut space = kind;
    space["p"] = p.into();
    json!({
        "space": space,
        "task": {"type": "certify", "hypotheses": ["Hyp1", "Hyp2"], "hyp1_n_max": 2000, "hyp2_range": [2, 2000]},
        "digits": 30
    })
}

#[test]
fn report_covers_four_spaces_three_orders_two_hypotheses() {
    let tmp = TempDir::new().unwrap();
    let kinds = [
        json!({"kind": "classic_bargmann"}),
        json!({"kind": "generalized_bargmann", "beta": "3"}),
        json!({"kind": "theta_fock_bargmann", "nu": "2pi", "alpha": "1/4"}),
        json!({"kind": "poincare_disk", "nu": "3/2"}),
    ];
    let mut files = Vec::new();
    for (i, k) in kinds.iter().enumerate() {
        for p in 0..3 {
            let mut v = certify_hyp12(k.clone(), p);
            v["output"] = format!("runs/s{i}p{p}").into();
            files.push(write_scenario(tmp.path(), &format!("s{i}p{p}"), &v));
        }
    }
    let refs: Vec<&Path> = files.iter().map(PathBuf::as_path).collect();
    let o = run(&refs);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = tmp.path().join("table.csv");
    let r = bin()
        .arg("report")
        .arg(tmp.path().join("runs"))
        .arg("--csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert_eq!(code(&r), 1);
    let table = String::from_utf8_lossy(&r.stdout);
    assert_eq!(table.lines().count(), 25, "{table}");
    assert!(table.lines().next().unwrap().starts_with("space"));
    let rows = fs::read_to_string(&csv).unwrap();
    assert_eq!(rows.lines().count(), 25);
    for kind in [
        "classic_bargmann",
        "generalized_bargmann",
        "theta_fock_bargmann",
        "poincare_disk",
    ] {
        assert_eq!(
            table.lines().filter(|l| l.starts_with(kind)).count(),
            6,
            "{kind}"
        );
    }
    // Σ 1/ω_{n,p} diverges when ω_{n,p} grows no faster than n: classic and disk at p = 0,
    // β = 3 (growth n^{(2p+1)/3}) at p = 0 and 1
    let failing: Vec<(String, String, String)> = table
        .lines()
        .map(|l| l.split_whitespace().map(String::from).collect::<Vec<_>>())
        .filter(|c| c[3] == "fail")
        .map(|c| (c[0].clone(), c[1].clone(), c[2].clone()))
        .collect();
    let expect = [
        ("classic_bargmann", "0"),
        ("generalized_bargmann", "0"),
        ("generalized_bargmann", "1"),
        ("poincare_disk", "0"),
    ];
    assert_eq!(failing.len(), expect.len(), "{table}");
    for ((k, p, h), (ek, ep)) in failing.iter().zip(expect) {
        assert_eq!((k.as_str(), p.as_str(), h.as_str()), (ek, ep, "Hyp1"));
    }
}

#[test]
fn empty_report_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let r = bin().arg("report").arg(tmp.path()).output().unwrap();
    assert_eq!(code(&r), 0);
    assert_eq!(String::from_utf8_lossy(&r.stdout).lines().count(), 1);
}

/// Classic p = 0 has `ω_n = √(n+1)`, too slow for the Hyp3 damping bound.
fn failing_and_passing(tmp: &Path) -> (PathBuf, PathBuf) {
    let fail = write_scenario(
        tmp,
        "fail",
        &json!({"space": {"kind": "classic_bargmann", "p": 0},
                "task": {"type": "certify", "hypotheses": ["Hyp3"], "lambda_abs": ["1"], "hyp3_range": [3, 2000]},
                "digits": 30, "output": "runs/fail"}),
    );
    let pass = write_scenario(tmp, "pass", &{
        let mut v = certify_hyp12(json!({"kind": "classic_bargmann"}), 1);
        v["output"] = "runs/pass".into();
        v
    });
    (fail, pass)
}

#[test]
fn mixed_verdicts_report_the_worst() {
    let tmp = TempDir::new().unwrap();
    let (fail, pass) = failing_and_passing(tmp.path());
    let o = run(&[&fail]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("hyp3"));
    assert_eq!(code(&run(&[&pass])), 0);
    let r = bin()
        .arg("report")
        .arg(tmp.path().join("runs"))
        .output()
        .unwrap();
    assert_eq!(code(&r), 1);
    let table = String::from_utf8_lossy(&r.stdout);
    assert!(table.contains("fail") && table.contains("pass"));

    // an inconclusive certificate ranks between the two
    let only_pass = tmp.path().join("runs/pass");
    let c = only_pass.join("hyp2.cert.json");
    let mut v = read_json(&c);
    v["verdict"] = "inconclusive".into();
    fs::write(&c, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    assert_eq!(
        code(&bin().arg("report").arg(&only_pass).output().unwrap()),
        2
    );
}

#[test]
fn report_refuses_mixed_artifact_versions() {
    let tmp = TempDir::new().unwrap();
    let (_, pass) = failing_and_passing(tmp.path());
    assert_eq!(code(&run(&[&pass])), 0);
    let dir = tmp.path().join("runs/pass");
    let mut v = read_json(&dir.join("hyp1.cert.json"));
    v["artifact_version"] = "0.0.0-other".into();
    fs::write(
        dir.join("old.cert.json"),
        serde_json::to_string_pretty(&v).unwrap(),
    )
    .unwrap();
    let r = bin().arg("report").arg(&dir).output().unwrap();
    assert_eq!(code(&r), 1);
    assert!(String::from_utf8_lossy(&r.stderr).contains("refusing to merge"));
}

#[test]
fn certificates_are_byte_identical_across_runs() {
    let tmp = TempDir::new().unwrap();
    let mut v = certify_hyp12(json!({"kind": "generalized_bargmann", "beta": "5/2"}), 1);
    v["task"]["hypotheses"] = json!(["Hyp1", "Hyp2", "Hyp3"]);
    v["task"]["hyp3_range"] = json!([3, 3000]);
    v["output"] = "out".into();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    for d in [&a, &b] {
        fs::create_dir(d).unwrap();
        run(&[&write_scenario(d, "det", &v)]);
    }
    let (a, b) = (a.join("out"), b.join("out"));
    let mut names: Vec<_> = fs::read_dir(&a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert!(names
        .iter()
        .any(|n| n.to_string_lossy().ends_with(".cert.json")));
    for n in names {
        if n == "run_info.json" {
            continue;
        }
        assert_eq!(
            fs::read(a.join(&n)).unwrap(),
            fs::read(b.join(&n)).unwrap(),
            "{n:?}"
        );
    }
}

#[test]
fn flag_commands_and_precision_env() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("w");
    let o = bin()
        .env("SHIFTLAB_DIGITS", "30")
        .args([
            "weights", "--space", "disk", "--nu", "3/2", "--p", "2", "--n-max", "40", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        read_json(&out.join("scenario.json"))["precision"]["digits"],
        30
    );
    let csv = fs::read_to_string(out.join("weights.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "n,omega,composed,ulps");
    assert_eq!(csv.lines().count(), 40);

    let out = tmp.path().join("ph");
    let o = bin()
        .args(["periodic", "--p", "1", "--s", "2", "--period", "3", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    assert!(out.join("periodic_hp.csv").exists());

    let o = bin().args(["periodic", "--p", "1"]).output().unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn orbit_annihilates_basis_vector() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    let o = bin()
        .args([
            "orbit", "--space", "theta", "--nu", "2pi", "--alpha", "0", "--p", "2", "--basis", "6",
            "--steps", "6", "--out",
        ])
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let s = read_json(&out.join("summary.json"));
    let checks = s["checks"].as_array().unwrap();
    assert!(
        checks
            .iter()
            .any(|c| c["name"] == "H_p^5 P_6 = 0" && c["verdict"] == "pass"),
        "{checks:?}"
    );
}
