use std::process::{Command, Output};

fn edcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_edcheck"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn report(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON report on stdout")
}

fn check_names(r: &serde_json::Value) -> Vec<String> {
    r["suites"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| {
            s["checks"]
                .as_array()
                .unwrap()
                .iter()
                .map(|c| c["name"].as_str().unwrap().to_string())
        })
        .collect()
}

#[test]
fn verify_clifford_passes() {
    let o = edcheck(&["verify", "clifford", "--seed", "7"]);
    assert_eq!(code(&o), 0);
    let r = report(&o);
    let names = check_names(&r);
    for id in [
        "relation",
        "adjoint",
        "real_part",
        "inner_product",
        "double_product",
        "square",
    ] {
        assert!(names.iter().any(|n| n.ends_with(id)), "{id} missing");
    }
    assert_eq!(r["summary"]["failed"], 0);
}

#[test]
fn report_is_byte_identical_across_runs() {
    let dir = std::env::temp_dir().join(format!("edcheck-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let paths: Vec<_> = (0..2).map(|k| dir.join(format!("r{k}.json"))).collect();
    for p in &paths {
        let o = edcheck(&["verify", "geometry", "--points", "6", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&o), 0);
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fixture_filter_restricts_checks() {
    let o = edcheck(&["verify", "warped", "--fixture", "T2xR_exp", "--points", "4"]);
    let names = check_names(&report(&o));
    assert!(!names.is_empty());
    assert!(names.iter().all(|n| n.starts_with("warped.T2xR_exp.")), "{names:?}");
}

#[test]
fn config_errors_exit_2() {
    assert_eq!(code(&edcheck(&["verify", "clifford", "--points", "0"])), 2);
    assert_eq!(code(&edcheck(&["verify", "clifford", "--order", "1"])), 2);
    assert_eq!(code(&edcheck(&["verify", "nonsense"])), 2);
    assert_eq!(code(&edcheck(&["verify", "warped", "--fixture", "nope"])), 2);
    assert_eq!(code(&edcheck(&["frobnicate"])), 2);
}

#[test]
fn pipeline_reports_failures_with_exit_1() {
    // the final CL-ED-II stage does not hold for the transported spinor
    let o = edcheck(&["pipeline", "--points", "6"]);
    assert_eq!(code(&o), 1);
    let names = check_names(&report(&o));
    assert!(names.iter().any(|n| n == "pipeline.rwp.equation"));
    assert!(names.iter().any(|n| n == "pipeline.cled2.einstein"));
}

#[test]
fn lorentzian_pipeline_has_signature_probe() {
    let o = edcheck(&["pipeline", "T2xR_exp_lorentz", "--points", "6"]);
    let r = report(&o);
    let diags = r["diagnostics"].as_array().unwrap();
    assert!(diags
        .iter()
        .any(|d| d["name"].as_str().unwrap().contains("signature_probe")));
}

#[test]
fn pipeline_input_errors_exit_2() {
    assert_eq!(code(&edcheck(&["pipeline", "nope"])), 2);
    assert_eq!(code(&edcheck(&["pipeline", "T2_flat"])), 2);
    assert_eq!(code(&edcheck(&["pipeline", "T2xR_wk"])), 2);
}

#[test]
fn fixtures_list_and_show() {
    let o = edcheck(&["fixtures", "list"]);
    assert_eq!(code(&o), 0);
    let list = String::from_utf8(o.stdout).unwrap();
    for name in ["T2_flat", "S3_hopf", "H3", "Mink4", "T2xR_exp", "T3xR_wk_lorentz"] {
        assert!(list.contains(name), "{name} not listed");
    }
    let o = edcheck(&["fixtures", "show", "T2_flat"]);
    assert_eq!(code(&o), 0);
    let show = String::from_utf8(o.stdout).unwrap();
    assert!(show.contains("n:      2") && show.contains("r:      0"), "{show}");
    assert!(show.contains("dx1^2"));
    assert_eq!(code(&edcheck(&["fixtures", "show", "nope"])), 2);
}

#[test]
fn registry_file_adds_fixtures() {
    let path = std::env::temp_dir().join(format!("edcheck-registry-{}.json", std::process::id()));
    std::fs::write(&path, r#"{"name": "T4_flat", "kind": "torus", "n": 4, "r": 0}"#).unwrap();
    let o = edcheck(&["fixtures", "show", "T4_flat", "--registry", path.to_str().unwrap()]);
    std::fs::remove_file(&path).unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stdout).unwrap().contains("n:      4"));
}
