use std::fs;

use pnc_cli::cli_main;
use pnc_core::harness::parse_csv;

fn run(args: &[&str]) -> i32 {
    cli_main(std::iter::once("pnc-sim").chain(args.iter().copied()))
}

const SMALL: [&str; 10] = ["--code-n", "48", "--code-k", "24", "--max-frames", "20", "--max-iters", "20", "--no-timing", "--threads"];

#[test]
fn run_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let out_s = out.to_str().unwrap();
    let mut args = vec!["run", "--scheme", "xor-cd", "--snr", "0:2:1", "--out", out_s];
    args.extend(SMALL);
    args.push("2");
    assert_eq!(run(&args), 0);
    let text = fs::read_to_string(&out).unwrap();
    let rows = parse_csv(&text).unwrap();
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![0.0, 1.0, 2.0]);
    let sidecar: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("r.csv.json")).unwrap()).unwrap();
    assert_eq!(sidecar["config"]["scheme"], "xor-cd");
    assert_eq!(sidecar["master_seed"], 1);
    assert_eq!(sidecar["config_hash"].as_str().unwrap().len(), 64);

    // rerun with another worker count gives the same bytes
    let again = dir.path().join("s.csv");
    let mut args2 = args.clone();
    let i = args2.iter().position(|a| *a == out_s).unwrap();
    args2[i] = again.to_str().unwrap();
    *args2.last_mut().unwrap() = "1";
    assert_eq!(run(&args2), 0);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn noiseless_fading_run_has_zero_fer() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let mut args = vec![
        "run", "--scheme", "cd-nc", "--mod", "pam", "--M", "4", "--channel", "block-rayleigh", "--blocks", "4", "--snr", "5",
        "--noiseless", "--out", out.to_str().unwrap(),
    ];
    args.extend(SMALL);
    args.push("1");
    assert_eq!(run(&args), 0);
    let rows = parse_csv(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!(rows.iter().all(|r| r[5] == 0.0));
}

#[test]
fn inspect_rotated_8psk_has_64_rows() {
    let dir = tempfile::tempdir().unwrap();
    let (set, report) = (dir.path().join("set.csv"), dir.path().join("rep.csv"));
    let code = run(&[
        "inspect-constellation", "--mod", "psk", "--M", "8", "--rotation-b", "0.3926990817", "--out", set.to_str().unwrap(),
        "--report", report.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(fs::read_to_string(&set).unwrap().lines().count(), 65);
    let rep = fs::read_to_string(&report).unwrap();
    assert!(rep.lines().nth(1).unwrap().starts_with("xor,64,true,true,0,"));
}

#[test]
fn exit_codes() {
    // contradictory scheme and alphabet
    assert_eq!(run(&["run", "--scheme", "nc-cd", "--alphabet", "gf4"]), 2);
    assert_eq!(run(&["run", "--scheme", "xor-cd", "--alphabet", "gf8"]), 2);
    assert_eq!(run(&["run", "--scheme", "mud-xor", "--rotation-b", "0"]), 2);
    assert_eq!(run(&["run", "--scheme", "nope"]), 2);
    assert_eq!(run(&["run", "--scheme", "xor-cd", "--snr", "3:1:1"]), 2);
    assert_eq!(run(&["frobnicate"]), 2);
    assert_eq!(run(&["run", "--scheme", "xor-cd", "--bogus"]), 2);
    assert_eq!(run(&["--help"]), 0);
    // unwritable output is a runtime failure
    let mut args = vec!["run", "--scheme", "xor-cd", "--snr", "0", "--out", "/nonexistent/dir/r.csv"];
    args.extend(SMALL);
    args.push("1");
    assert_eq!(run(&args), 1);
}
