use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_sle-euler"));
    c.env_remove("SLE_EULER_THREADS").current_dir(env!("CARGO_MANIFEST_DIR"));
    c
}

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn run(args: &[&str]) -> Run {
    run_with(bin(), args)
}

fn run_with(mut cmd: Command, args: &[&str]) -> Run {
    let out = cmd.args(args).output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

/// Expected output for each case lives in tests/golden/<name>.out.
/// Regenerate with UPDATE_GOLDEN=1.
const GOLDEN: &[(&str, &[&str])] = &[
    ("crossing_kappa2", &["crossing", "--r", "0.5", "--kappa", "2"]),
    ("crossing_cardy", &["crossing", "--r", "0.3", "--kappa", "6"]),
    ("pairings_count", &["pairings", "--n", "3", "--count"]),
    ("pairings_list_csv", &["--format", "csv", "pairings", "--n", "3"]),
    ("hexagon_regular", &["hexagon"]),
    ("hexagon_csv", &["hexagon", "--theta", "40", "--format", "csv"]),
    ("fomin", &["fomin", "--x", "-1,0", "--y", "3,2"]),
    ("euler_psi", &["euler", "--kappa", "2.5", "--x", "0,1,2,3"]),
    ("euler_nested", &["euler", "--kappa", "2", "--x", "0,1,2,4", "--cycle", "nested"]),
    ("kappa_inf", &["verify", "kappa-inf", "--n", "5"]),
    ("kappa_inf_csv", &["--format", "csv", "verify", "kappa-inf", "--n", "3"]),
    ("annihilation_kappa2_det", &["verify", "annihilation", "--case", "kappa2-det", "--n", "2"]),
    ("mc_percolation_file", &["mc", "percolation", "--domain", "tests/data/hexagon.json", "--n-samples", "500", "--seed", "7"]),
    ("mc_percolation_csv", &["--format", "csv", "mc", "percolation", "--domain", "lozenge:0.1", "--n-samples", "300", "--seed", "1"]),
    ("mc_fomin", &["mc", "fomin", "--domain", "square:12", "--x", "0.08", "--y", "0.15", "--n-samples", "2000", "--seed", "4"]),
];

#[test]
fn golden_outputs() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden");
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let mut mismatches = Vec::new();
    for (name, args) in GOLDEN {
        let r = run(args);
        assert_eq!(r.code, 0, "{name}: {}", r.stderr);
        let path = dir.join(format!("{name}.out"));
        if update {
            std::fs::write(&path, &r.stdout).unwrap();
            continue;
        }
        let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        if want != r.stdout {
            mismatches.push(format!("{name}:\n  want {want}  got  {}", r.stdout));
        }
    }
    assert!(mismatches.is_empty(), "{}", mismatches.join("\n"));
}

#[test]
fn documented_examples() {
    assert_eq!(run(&["crossing", "--r", "0.5", "--kappa", "2"]).stdout, "{\"psi\":0.75}\n");
    assert_eq!(run(&["pairings", "--n", "3", "--count"]).stdout, "{\"catalan\":5}\n");
    let r = run(&["verify", "annihilation", "--case", "kappa2-det", "--n", "2"]);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert!((v["order"].as_f64().unwrap() - 2.0).abs() < 0.1);
}

#[test]
fn unknown_flag_prints_usage() {
    let r = run(&["crossing", "--r", "0.5", "--kappa", "2", "--bogus"]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.is_empty());
    assert!(r.stderr.contains("Usage:"), "{}", r.stderr);
    assert_eq!(run(&["nonsense"]).code, 2);
    assert_eq!(run(&[]).code, 2);
}

#[test]
fn help_and_version_succeed() {
    let r = run(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.contains("crossing") && r.stdout.contains("pairings"));
    assert_eq!(run(&["--version"]).code, 0);
}

#[test]
fn validation_errors_exit_2() {
    for args in [
        &["crossing", "--r", "1.5", "--kappa", "2"][..],
        &["crossing", "--r", "0.5", "--kappa", "abc"],
        &["euler", "--kappa", "2.5", "--x", "0,2,1,3"],
        &["euler", "--kappa", "2.5", "--x", "0,1,2,3", "--pairing", "1-3,2-4"],
        &["fomin", "--x", "0", "--y", "0"],
        &["hexagon", "--theta", "130"],
        &["verify", "annihilation", "--case", "kappa2-det", "--n", "2", "--kappa", "3"],
        &["verify", "annihilation", "--case", "euler"],
        &["mc", "percolation", "--domain", "no/such/file.json"],
        &["mc", "percolation", "--domain", "lozenge:0.1", "--n-samples", "0"],
        &["mc", "fomin", "--domain", "lozenge:0.1", "--x", "0.1", "--y", "0.2"],
        &["pairings", "--n", "40", "--count"],
    ] {
        let r = run(args);
        assert_eq!(r.code, 2, "{args:?}: {}", r.stderr);
        assert!(r.stdout.is_empty());
        assert!(r.stderr.starts_with("error:"), "{args:?}: {}", r.stderr);
    }
}

#[test]
fn failed_check_exits_3_with_report() {
    // A step this small leaves only rounding noise in the difference quotient.
    let r = run(&["ust", "--x", "0,1,2.2,3,4.1,5", "--h", "1e-11"]);
    assert_eq!(r.code, 3);
    let v: serde_json::Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(v["recursion"]["pass"], false);
}

#[test]
fn thread_cap_does_not_change_results() {
    let args = ["mc", "percolation", "--domain", "hexagon:0.1", "--n-samples", "2000", "--seed", "3"];
    let mut one = bin();
    one.env("SLE_EULER_THREADS", "1");
    let mut three = bin();
    three.env("SLE_EULER_THREADS", "3");
    let (a, b) = (run_with(one, &args), run_with(three, &args));
    assert_eq!(a.code, 0);
    assert_eq!(a.stdout, b.stdout);
    let mut bad = bin();
    bad.env("SLE_EULER_THREADS", "0");
    assert_eq!(run_with(bad, &args).code, 2);
}

#[test]
fn csv_tables_have_one_row_per_entry() {
    let r = run(&["--format", "csv", "hexagon"]);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "blocks,probability");
    assert_eq!(lines.len(), 6);
    let r = run(&["--format", "csv", "crossing", "--r", "0.5", "--kappa", "2"]);
    assert_eq!(r.stdout, "key,value\npsi,0.75\n");
}

#[test]
fn outputs_are_deterministic() {
    let args = ["mc", "fomin", "--domain", "square:10", "--x", "0.1", "--y", "0.15", "--n-samples", "1000", "--seed", "9"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}
