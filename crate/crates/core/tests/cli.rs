use std::path::Path;
use std::process::{Command, Output};

use skdescent::cli_io::{read_cells_csv, read_fits_csv};

fn skdescent(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skdescent"))
        .args(args)
        .env_remove("SKDESCENT_OUT_DIR")
        .env_remove("SKDESCENT_WORKERS")
        .output()
        .unwrap()
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

const SMALL: &[&str] = &[
    "run",
    "--sizes",
    "10,12,14",
    "--lambdas",
    "1,10",
    "--nreal",
    "3",
    "--starts",
    "4",
    "--seed",
    "5",
];

fn small(extra: &[&str]) -> Output {
    let args: Vec<&str> = SMALL.iter().chain(extra).copied().collect();
    skdescent(&args)
}

#[test]
fn csv_has_one_row_per_cell_and_a_fit_table() {
    let text = ok(&small(&[]));
    let cells = read_cells_csv(text.as_bytes()).unwrap();
    assert_eq!(cells.len(), 6);
    let fits = read_fits_csv(text.as_bytes()).unwrap();
    assert_eq!(fits.len(), 2);
    assert!(text.starts_with(
        "protocol,n,lambda,nreal,starts_or_budget,runs,tau,tau_stderr,h_n,h_n_stderr\n"
    ));
}

#[test]
fn single_cell_gives_single_row_and_no_fit() {
    let out = skdescent(&[
        "run",
        "--sizes",
        "16",
        "--lambdas",
        "3",
        "--nreal",
        "2",
        "--starts",
        "2",
    ]);
    let text = ok(&out);
    assert_eq!(read_cells_csv(text.as_bytes()).unwrap().len(), 1);
    assert!(read_fits_csv(text.as_bytes()).unwrap().is_empty());
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));
}

#[test]
fn json_matches_csv() {
    let csv = ok(&small(&[]));
    let json: serde_json::Value = serde_json::from_str(&ok(&small(&["--format", "json"]))).unwrap();
    let cells = read_cells_csv(csv.as_bytes()).unwrap();
    let jcells = json["cells"].as_array().unwrap();
    assert_eq!(jcells.len(), cells.len());
    for (c, j) in cells.iter().zip(jcells) {
        assert_eq!(j["n"].as_u64().unwrap() as usize, c.n);
        assert_eq!(j["lambda"].as_f64().unwrap(), c.lambda);
        assert_eq!(j["tau"].as_f64(), c.tau);
        assert_eq!(j["h_n"].as_f64(), c.h_n);
    }
    let fits = read_fits_csv(csv.as_bytes()).unwrap();
    let jfits = json["fits"].as_array().unwrap();
    assert_eq!(jfits.len(), fits.len());
    for (f, j) in fits.iter().zip(jfits) {
        assert_eq!(j["exponent"].as_f64().unwrap(), f.exponent);
    }
    let manifest = &json["manifest"];
    assert_eq!(manifest["generator_version"], skdescent::GENERATOR_VERSION);
    assert_eq!(manifest["config_echo"]["master_seed"], 5);
    assert!(json["failures"].as_array().unwrap().is_empty());
}

#[test]
fn file_output_writes_manifest_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    ok(&small(&["--out", path.to_str().unwrap()]));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert_eq!(read_cells_csv(csv.as_bytes()).unwrap().len(), 6);
    let sidecar = dir.path().join("out.csv.manifest.json");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(sidecar).unwrap()).unwrap();
    assert!(manifest["started_at"].is_string());

    let jpath = dir.path().join("out.json");
    ok(&small(&["--out", jpath.to_str().unwrap()]));
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(jpath).unwrap()).unwrap();
    assert_eq!(json["cells"].as_array().unwrap().len(), 6);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let args: Vec<&str> = SMALL.iter().chain(&["--out", "env.csv"]).copied().collect();
    let out = Command::new(env!("CARGO_BIN_EXE_skdescent"))
        .args(&args)
        .env("SKDESCENT_OUT_DIR", dir.path())
        .output()
        .unwrap();
    ok(&out);
    assert!(dir.path().join("env.csv").exists());
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(
        &cfg,
        "sizes = [10, 12, 14]\nlambdas = [2.0]\nnreal = 2\nstarts_per_realization = 3\nmaster_seed = 11\n",
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    let base = read_cells_csv(ok(&skdescent(&["run", "--config", cfg])).as_bytes()).unwrap();
    assert_eq!(base.len(), 3);
    assert!(base.iter().all(|c| c.lambda == 2.0 && c.nreal == 2));
    let over = read_cells_csv(ok(&skdescent(&["run", "--config", cfg, "--nreal", "4"])).as_bytes())
        .unwrap();
    assert!(over.iter().all(|c| c.nreal == 4));

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "sizez = [10]\n").unwrap();
    let out = skdescent(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sizez"));
}

#[test]
fn usage_errors_exit_with_code_2() {
    for args in [
        &["run", "--lambdas", "0"][..],
        &["run", "--lambdas", "-1"],
        &["run", "--protocol", "fixed-budget", "--sizes", "10"],
        &["run", "--protocol", "sideways"],
        &["run", "--nreal", "0"],
        &["run", "--bogus"],
        &["sample-depth", "--lambda", "0"],
    ] {
        let out = skdescent(args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(out.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn fixed_budget_run_reports_budget() {
    let text = ok(&skdescent(&[
        "run",
        "--protocol",
        "fixed-budget",
        "--budget-flips",
        "500",
        "--sizes",
        "12",
        "--lambdas",
        "1,100",
        "--nreal",
        "3",
    ]));
    let cells = read_cells_csv(text.as_bytes()).unwrap();
    assert_eq!(cells.len(), 2);
    assert!(cells
        .iter()
        .all(|c| c.protocol == skdescent::Protocol::FixedBudget && c.starts_or_budget == 500));
}

#[test]
fn fit_subcommand_refits_with_exclusions() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.csv");
    std::fs::write(
        &path,
        ok(&skdescent(&[
            "run",
            "--sizes",
            "10,12,14,16",
            "--lambdas",
            "1,10",
            "--nreal",
            "2",
            "--starts",
            "3",
        ])),
    )
    .unwrap();
    let p = path.to_str().unwrap();
    let all = read_fits_csv(ok(&skdescent(&["fit", "--input", p])).as_bytes()).unwrap();
    assert_eq!(all.len(), 2);
    let some = read_fits_csv(
        ok(&skdescent(&[
            "fit",
            "--input",
            p,
            "--exclude",
            "10",
            "--lambdas",
            "10",
        ]))
        .as_bytes(),
    )
    .unwrap();
    assert_eq!(some.len(), 1);
    assert_eq!(some[0].lambda, 10.0);
    assert_eq!(some[0].sizes_used, vec![12, 14, 16]);
    assert_eq!(some[0].sizes_excluded, vec![10]);
}

#[test]
fn oracle_subcommand_and_instance_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("inst.txt");
    let a: serde_json::Value = serde_json::from_str(&ok(&skdescent(&[
        "oracle",
        "--n",
        "8",
        "--seed",
        "3",
        "--dump",
        dump.to_str().unwrap(),
    ])))
    .unwrap();
    let j = skdescent::generate_couplings(8, 3).unwrap();
    let expect = skdescent::brute_force_ground_state(&j).unwrap();
    assert_eq!(
        a["energy_per_spin"].as_f64().unwrap(),
        expect.energy_per_spin
    );
    assert_eq!(
        a["n_stable_states"].as_u64().unwrap(),
        expect.n_stable_states
    );

    let b: serde_json::Value = serde_json::from_str(&ok(&skdescent(&[
        "oracle",
        "--instance",
        dump.to_str().unwrap(),
    ])))
    .unwrap();
    assert_eq!(a["energy_per_spin"], b["energy_per_spin"]);

    let out = skdescent(&["oracle", "--n", "40"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sample_depth_prints_nonpositive_draws() {
    let text = ok(&skdescent(&[
        "sample-depth",
        "--lambda",
        "4",
        "--count",
        "2000",
        "--seed",
        "9",
    ]));
    let draws: Vec<f64> = text.lines().map(|l| l.parse().unwrap()).collect();
    assert_eq!(draws.len(), 2000);
    assert!(draws.iter().all(|&d| d <= 0.0));
    let mean = draws.iter().sum::<f64>() / draws.len() as f64;
    assert!((mean + 0.25).abs() < 0.03, "{mean}");
    assert_eq!(
        text,
        ok(&skdescent(&[
            "sample-depth",
            "--lambda",
            "4",
            "--count",
            "2000",
            "--seed",
            "9"
        ]))
    );
}

#[test]
fn help_lists_subcommands() {
    let text = ok(&skdescent(&["--help"]));
    for sub in ["run", "fit", "oracle", "sample-depth"] {
        assert!(text.contains(sub));
    }
    assert!(Path::new(env!("CARGO_BIN_EXE_skdescent")).exists());
}
