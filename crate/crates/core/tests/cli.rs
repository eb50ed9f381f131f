use std::process::{Command, Output};

fn verify(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_verify")).args(args).output().expect("binary runs")
}

#[test]
fn json_lines_are_deterministic() {
    let args = ["series-identities", "--p", "3", "--trials", "5", "--format", "json-lines"];
    let a = verify(&args);
    let b = verify(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    let mut lines = text.lines();
    let header: serde_json::Value = serde_json::from_str(lines.next().unwrap()).unwrap();
    assert_eq!(header["passed"], true);
    assert_eq!(header["config"]["primes"], "3");
    for line in lines {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["status"], "pass");
        assert!(rec.get("elapsed_ms").is_none());
    }
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["nope"],
        vec!["series-identities", "--p", "4"],
        vec!["heckesurnul", "--p", "3", "--r", "5"],
        vec!["heckesurnul", "--p", "3", "--r", "0", "--cases", "2"],
        vec!["series-identities", "--set", "unknown=1"],
    ] {
        let out = verify(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn out_file_and_config_file() {
    let dir = std::env::temp_dir().join(format!("verify-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.cfg");
    std::fs::write(&cfg, "# small run\np = 3\ntrials = 3\nseed = 7\n").unwrap();
    let out = dir.join("report.txt");
    let status = verify(&["yon-consistency", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(status.status.code(), Some(0));
    assert!(status.stdout.is_empty());
    let report = std::fs::read_to_string(&out).unwrap();
    assert!(report.starts_with("suite yon-consistency : PASS"));
    assert!(report.contains("config seed = 7"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn window_suite_runs_from_the_command_line() {
    let out = verify(&[
        "heckesurnul", "--p", "3", "--r", "1", "--s", "0", "--lambda", "gen", "--trials", "4", "--format", "json-lines",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("surnul/p=3/r=1/s=0/lambda=gen/case3-combination"));
}
