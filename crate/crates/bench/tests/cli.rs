use std::path::Path;
use std::process::Command;
use std::time::Instant;

use clap::Parser;
use pimhe_bench::report::{write_csv, write_json};
use pimhe_bench::run::COLUMNS;
use pimhe_bench::{run, BenchError, BenchSpec, Cli, Format, Mode};

fn spec(args: &[&str]) -> pimhe_bench::Result<BenchSpec> {
    let cli = Cli::try_parse_from(std::iter::once("pimhe").chain(args.iter().copied())).unwrap();
    BenchSpec::resolve(cli, None)
}

fn csv_bytes(o: &pimhe_bench::Outcome) -> Vec<u8> {
    let mut buf = Vec::new();
    write_csv(o, &mut buf).unwrap();
    buf
}

fn data_rows(csv: &[u8]) -> usize {
    let text = String::from_utf8(csv.to_vec()).unwrap();
    text.lines().filter(|l| !l.starts_with('#')).count() - 1
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pimhe"));
    c.env_remove("PIMHE_CONFIG");
    c
}

#[test]
fn functional_sweep_is_verified() {
    let s = spec(&[
        "--mode",
        "microbench-add",
        "--security",
        "27",
        "--items",
        "1024,2048",
    ])
    .unwrap();
    let o = run(&s).unwrap();
    assert_eq!(o.rows.len(), 2);
    assert!(o.rows.iter().all(|r| r.verified && !r.cost_only));
    assert_eq!(data_rows(&csv_bytes(&o)), 2);

    let s = spec(&["--mode", "microbench-mul", "--items", "3", "--cores", "2"]).unwrap();
    let o = run(&s).unwrap();
    assert!(o.rows[0].verified && o.rows[0].muls32 > 0);
}

#[test]
fn full_scale_sweeps_route_to_the_cost_model() {
    let start = Instant::now();
    for mode in ["microbench-add", "microbench-mul"] {
        for sec in ["27", "54", "109"] {
            let o = run(&spec(&["--mode", mode, "--security", sec]).unwrap()).unwrap();
            assert_eq!(o.rows.len(), 5);
            assert!(o.rows.iter().all(|r| r.cost_only));
            assert!(!o.warnings.is_empty());
            for w in o.rows.windows(2) {
                assert!(w[1].elapsed_ms >= w[0].elapsed_ms, "{mode} {sec}");
                assert!(w[1].items > w[0].items);
            }
        }
    }
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn reports_are_deterministic_and_consistent() {
    let s = spec(&["--mode", "microbench-add", "--cost-only", "--seed", "9"]).unwrap();
    let a = run(&s).unwrap();
    let b = run(&s).unwrap();
    assert_eq!(csv_bytes(&a), csv_bytes(&b));
    let text = String::from_utf8(csv_bytes(&a)).unwrap();
    for key in [
        "# schema=bench_v1",
        "# seed=9",
        "# params=",
        "# cost_table=",
        "# version=",
    ] {
        assert!(text.contains(key), "{key}");
    }
    assert!(text.contains(&COLUMNS.join(",")));

    let mut json = Vec::new();
    write_json(&a, &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(
        v["rows"].as_array().unwrap().len(),
        data_rows(&csv_bytes(&a))
    );
    assert_eq!(v["spec"]["seed"], 9);
    assert_eq!(v["params"]["t"], 5);

    let mut empty = a.clone();
    empty.rows.clear();
    let text = String::from_utf8(csv_bytes(&empty)).unwrap();
    assert_eq!(text.lines().last().unwrap(), COLUMNS.join(","));
}

#[test]
fn precedence_cli_over_config_over_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"mode": "workload-mean", "users": 12, "seed": 5, "pim": {"num_cores": 64, "tasklets": 4}}"#,
    );
    let s = spec(&["--config", &cfg, "--seed", "6", "--tasklets", "8"]).unwrap();
    assert_eq!((s.mode, s.users, s.seed), (Mode::WorkloadMean, 12, 6));
    assert_eq!((s.pim.num_cores, s.pim.tasklets), (64, 8));
    assert_eq!(
        (s.security, s.cts_per_user, s.format),
        (27, 32, Format::Csv)
    );

    let cli = Cli::try_parse_from(["pimhe", "--users", "3"]).unwrap();
    let s = BenchSpec::resolve(cli, Some(cfg.clone().into())).unwrap();
    assert_eq!((s.mode, s.users), (Mode::WorkloadMean, 3));

    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"mode": "workload-mean", "colour": 1}"#,
    );
    assert!(matches!(
        spec(&["--config", &bad]),
        Err(BenchError::Usage(_))
    ));
}

#[test]
fn invalid_fields_are_named() {
    for (args, field) in [
        (vec!["--mode", "workload-mean", "--users", "0"], "--users"),
        (
            vec!["--mode", "microbench-add", "--items", "5,0"],
            "--items",
        ),
        (
            vec!["--mode", "microbench-add", "--security", "64"],
            "--security",
        ),
        (
            vec!["--mode", "workload-mean", "--reduction", "sideways"],
            "--reduction",
        ),
        (vec!["--users", "4"], "--mode"),
    ] {
        match spec(&args) {
            Err(e @ BenchError::Usage(_)) => {
                assert!(e.to_string().starts_with(field), "{e}");
                assert_eq!(e.exit_code(), 2);
            }
            other => panic!("{args:?}: {other:?}"),
        }
    }
}

#[test]
fn exit_codes_and_output_path() {
    let dir = tempfile::tempdir().unwrap();
    let status = bin().args(["--mode", "nonsense"]).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let data = write(dir.path(), "big.csv", "4\n4\n");
    let out = dir.path().join("never.csv");
    let status = bin()
        .args(["--mode", "workload-mean", "--data", &data, "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
    assert!(!out.exists());

    let cfg = write(
        dir.path(),
        "env.json",
        r#"{"mode": "microbench-mul", "cost_only": true, "format": "json"}"#,
    );
    let out = dir.path().join("r.json");
    let status = bin()
        .env("PIMHE_CONFIG", &cfg)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(v["spec"]["mode"], "microbench-mul");
    assert_eq!(v["rows"].as_array().unwrap().len(), 5);

    assert_eq!(BenchError::OracleMismatch("x".into()).exit_code(), 3);
    assert_eq!(
        BenchError::Engine(pimhe::Error::Depth("x".into())).exit_code(),
        4
    );
}

#[test]
fn variance_of_constant_data_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "ones.csv", "value\n1\n1\n1\n1\n");
    let o = run(&spec(&["--mode", "workload-variance", "--data", &data]).unwrap()).unwrap();
    let r = o.result.unwrap();
    assert_eq!(r.answers, vec![0.into()]);
    assert_eq!(o.rows.last().unwrap().label, "total");
    assert_eq!(o.rows.len(), r.stages.len() + 1);
}

#[test]
fn mean_at_640_users_and_109_bits() {
    let s = spec(&[
        "--mode",
        "workload-mean",
        "--users",
        "640",
        "--security",
        "109",
        "--plain-modulus",
        "65521",
        "--format",
        "json",
    ])
    .unwrap();
    let o = run(&s).unwrap();
    let r = o.result.as_ref().unwrap();
    assert!(!r.cost_only && r.users == 640);
    let mut json = Vec::new();
    write_json(&o, &mut json).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v["result"]["stages"][0]["name"], "mean/sum/pass1");
    assert_eq!(v["result"]["stages"][0]["report"]["items"], 320);
}

#[test]
fn linreg_scales_with_samples_per_user() {
    let cycles = |c: &str| {
        let s = spec(&[
            "--mode",
            "workload-linreg",
            "--security",
            "109",
            "--cts-per-user",
            c,
        ])
        .unwrap();
        let o = run(&s).unwrap();
        assert!(o.rows.iter().all(|r| r.cost_only));
        o.rows.last().unwrap().cycles as f64
    };
    let ratio = cycles("64") / cycles("32");
    assert!((ratio - 2.0).abs() <= 0.1, "{ratio}");
}

#[test]
fn small_functional_linreg_and_plain_weights() {
    for weights in ["encrypted", "plain"] {
        let s = spec(&[
            "--mode",
            "workload-linreg",
            "--users",
            "2",
            "--cts-per-user",
            "2",
            "--weights",
            weights,
        ])
        .unwrap();
        let o = run(&s).unwrap();
        let r = o.result.unwrap();
        assert_eq!(r.answers.len(), 4);
        assert!(!r.cost_only);
    }
}
