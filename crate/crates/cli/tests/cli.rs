use std::io::Write;
use std::process::{Command, Output};

fn fixture(rel: &str) -> String {
    format!("{}/../../fixtures/{rel}", env!("CARGO_MANIFEST_DIR"))
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weilforge")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited")
}

#[test]
fn validate_good_algebras() {
    for (file, dim) in [("so3", 3), ("abelian3", 3), ("so4", 6)] {
        let o = run(&["validate", &fixture(&format!("algebras/{file}.toml"))]);
        assert_eq!(code(&o), 0, "{file}");
        let out = stdout(&o);
        assert!(out.contains(&format!("dim: {dim}")), "{out}");
        assert!(out.contains("CHECK algebra.valid: OK"));
    }
}

#[test]
fn validate_broken_algebras_cite_counterexamples() {
    let o = run(&["validate", &fixture("algebras/broken_jacobi.toml")]);
    assert_eq!(code(&o), 1);
    let out = stdout(&o);
    assert!(out.contains("CHECK algebra.jacobi: FAIL detail="), "{out}");
    assert!(out.contains("(a,b,c,d)=(1,2,3,3)"), "{out}");
    let o = run(&["validate", &fixture("algebras/broken_invariance.toml")]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("CHECK algebra.invariance: FAIL detail="));
}

#[test]
fn input_errors_exit_two() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "dim = \"three\"").unwrap();
    let path = f.path().to_str().unwrap().to_owned();
    assert_eq!(code(&run(&["validate", &path])), 2);
    assert_eq!(code(&run(&["validate", "/nonexistent/alg.toml"])), 2);
    assert_eq!(code(&run(&["no-such-verb"])), 2);
    let so3 = fixture("algebras/so3.toml");
    assert_eq!(code(&run(&["gdiff-check", &so3, "--space", "V", "--max-degree", "2"])), 2);
    assert_eq!(code(&run(&["verify-main", &so3, "--max-degree", "99"])), 2);
    assert_eq!(code(&run(&["quantize", &so3, "--expr", "v1*", "--trunc", "2"])), 2);
    assert_eq!(code(&run(&["verify-invariants", &so3, "--expr", "v1", "--powers", "2"])), 2);
    assert_eq!(code(&run(&["wheeling", &fixture("algebras/scaled_so3.toml"), "--max-degree", "2"])), 2);
}

#[test]
fn quantize_and_duflo_values() {
    let so3 = fixture("algebras/so3.toml");
    let o = run(&["quantize", &so3, "--expr", "th1*th2", "--trunc", "2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("Q: xi1*xi2"), "{}", stdout(&o));
    let o = run(&["quantize", &so3, "--expr", "v1^2 + v2^2 + v3^2"]);
    assert!(stdout(&o).contains("Q: -1/4 + u1^2 + u2^2 + u3^2"), "{}", stdout(&o));
    let o = run(&["duflo", &so3, "--expr", "e1^2 + e2^2 + e3^2"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("duflo: -1/4 + u1^2 + u2^2 + u3^2"));
}

#[test]
fn verification_verbs_pass() {
    let so3 = fixture("algebras/so3.toml");
    let so4 = fixture("algebras/so4.toml");
    let cases: Vec<Vec<&str>> = vec![
        vec!["verify-main", &so3, "--max-degree", "4"],
        vec!["verify-chainmap", &so3, "--max-degree", "3"],
        vec!["verify-invariants", &so3, "--expr", "v1^2+v2^2+v3^2", "--powers", "2,3"],
        vec!["gdiff-check", &so4, "--space", "NW", "--max-degree", "2"],
        vec!["acyclicity", &so3, "--max-degree", "4"],
        vec!["supertrace", &so4, "--kmax", "6"],
        vec!["spin-factorize", "--dim", "4", "--seed", "3"],
        vec!["wheeling", &so3, "--max-degree", "2"],
        vec!["wheeling", &so3, "--max-degree", "2", "--tilde"],
    ];
    for args in cases {
        let o = run(&args);
        assert_eq!(code(&o), 0, "{args:?}: {}", stdout(&o));
        assert!(!stdout(&o).contains("FAIL"));
    }
}

#[test]
fn odd_spin_dimension_needs_extension() {
    let o = run(&["spin-factorize", "--dim", "3", "--seed", "1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("odd"));
    assert_eq!(code(&run(&["spin-factorize", "--dim", "3", "--seed", "1", "--extend"])), 0);
}

#[test]
fn diagram_eval_and_check() {
    let so3 = fixture("algebras/so3.toml");
    let o = run(&["diagram", "eval", &fixture("diagrams/w2.toml"), &so3]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("value: -2*e1^2 - 2*e2^2 - 2*e3^2"), "{}", stdout(&o));
    let o = run(&["diagram", "eval", &fixture("diagrams/fork.toml"), &so3]);
    assert!(stdout(&o).contains("value: 0"));
    for d in ["w2", "w4", "fork_odd", "w2_super", "w4_based"] {
        let o = run(&["diagram", "check", &fixture(&format!("diagrams/{d}.toml")), &so3]);
        assert_eq!(code(&o), 0, "{d}: {}", stdout(&o));
    }
    let o = run(&["diagram", "check", &fixture("diagrams/w4_based.toml"), &so3]);
    assert!(stdout(&o).contains("CHECK relation.STU: OK"));
}

#[test]
fn structured_output_is_deterministic_json() {
    let so3 = fixture("algebras/so3.toml");
    let args = ["--structured", "verify-chainmap", so3.as_str(), "--max-degree", "2"];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    let mut ids = Vec::new();
    for line in text.lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("one JSON record per line");
        if v["kind"] == "check" {
            assert_eq!(v["ok"], true);
            ids.push(v["id"].as_str().unwrap().to_owned());
        }
    }
    let mut sorted = ids.clone();
    sorted.sort();
    assert_eq!(ids, sorted);
    assert_eq!(ids.len(), 7);
}
