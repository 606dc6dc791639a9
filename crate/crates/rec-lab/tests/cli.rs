//! End-to-end tests of the installed binary: exit codes, JSON shapes,
//! seed precedence, and dump determinism, all exercised through a real
//! process boundary.

use std::process::{Command, Output};

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rec-lab"));
    // Tests control the seed explicitly; scrub any ambient value.
    cmd.env_remove("REC_LAB_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["symbol", "--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_sixty_four() {
    assert_eq!(run(&["nope"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "--p", "4"]).status.code(), Some(64));
    assert_eq!(run(&["verify", "--m", "9"]).status.code(), Some(64));
    assert_eq!(
        run(&["symbol", "-N", "4", "--x", "P + * 3"]).status.code(),
        Some(64)
    );
    assert_eq!(
        run(&["symbol", "-N", "4", "--t", "0", "--x", "P^3"])
            .status
            .code(),
        Some(64)
    );
    assert_eq!(run(&["symbol"]).status.code(), Some(64));
}

#[test]
fn symbol_valid_input_agrees_with_exit_zero() {
    let out = run(&["symbol", "--p", "3", "-N", "6", "--x", "P^3 + P^4"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("verdict: agree"), "{text}");
    assert!(
        text.contains("direct") && text.contains("borevich"),
        "{text}"
    );
}

#[test]
fn symbol_invalid_input_rejected_with_exit_two() {
    let out = run(&["symbol", "--p", "3", "-N", "6", "--x", "P", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    let doc = stdout_json(&out);
    assert_eq!(doc["report"]["verdict"], "rejected_consistently");
    assert_eq!(doc["report"]["routes"].as_array().unwrap().len(), 4);
    for route in doc["report"]["routes"].as_array().unwrap() {
        assert_eq!(route["rejection"], true, "{route}");
    }
}

#[test]
fn first_argument_valuation_scales_the_symbol() {
    let gamma_for = |t: &str| -> (u64, u64) {
        let out = run(&[
            "symbol",
            "--p",
            "3",
            "-N",
            "6",
            "--t",
            t,
            "--x",
            "P^3 + P^4",
            "--json",
        ]);
        assert_eq!(out.status.code(), Some(0), "t = {t}");
        let doc = stdout_json(&out);
        (
            doc["report"]["gamma"].as_u64().expect("agreed gamma"),
            doc["exponent_factor"].as_u64().unwrap(),
        )
    };
    let (g1, k1) = gamma_for("P");
    let (g2, k2) = gamma_for("P^2");
    let (gu, ku) = gamma_for("1 + P");
    assert_eq!(k1, 1);
    assert_eq!(k2, 2);
    assert_eq!(ku, 0);
    assert_ne!(g1, 0, "reference input must have a nonzero exponent");
    assert_eq!(g2, g1 * 2 % 3);
    assert_eq!(gu, 0);
}

#[test]
fn seed_priority_is_flag_env_default() {
    let seed_of = |cmd: &mut Command| -> u64 {
        let out = cmd.output().expect("binary runs");
        assert_eq!(out.status.code(), Some(0));
        stdout_json(&out)["seed"].as_u64().unwrap()
    };
    let args = [
        "verify", "--suite", "symbol", "--p", "3", "-N", "6", "--trials", "2", "--json",
    ];

    // Default: 0.
    assert_eq!(seed_of(bin().args(args)), 0);
    // Environment variable overrides the default.
    assert_eq!(seed_of(bin().args(args).env("REC_LAB_SEED", "7")), 7);
    // Explicit flag beats the environment.
    assert_eq!(
        seed_of(
            bin()
                .args(args)
                .env("REC_LAB_SEED", "7")
                .args(["--seed", "9"])
        ),
        9
    );
}

#[test]
fn verify_json_reports_every_row() {
    let out = run(&["verify", "--suite", "basis", "--p", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["all_passed"], true);
    assert_eq!(doc["suite"], "basis");
    let rows = doc["rows"].as_array().unwrap();
    assert!(!rows.is_empty());
    for row in rows {
        assert_eq!(row["passed"], true, "{row}");
        assert!(row["check"].is_string() && row["detail"].is_string());
    }
    assert_eq!(doc["checks_total"].as_u64().unwrap() as usize, rows.len());
}

#[test]
fn verify_symbol_suite_with_explicit_trials() {
    let out = run(&[
        "verify", "--suite", "symbol", "--p", "3", "-N", "6", "--trials", "4", "--seed", "42",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("4/4 trials agree"), "{text}");
}

#[test]
fn generators_dump_is_deterministic_and_certified() {
    let args = ["generators", "--p", "3", "--m", "1", "-N", "6"];
    let first = run(&args);
    let second = run(&args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout, "reruns must be byte-identical");

    let doc = stdout_json(&first);
    assert_eq!(doc["relation_residual_is_zero"], true);
    assert_eq!(doc["config"]["p"], 3);
    let checks = doc["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    for check in checks {
        assert_eq!(check["result"], "PASS", "{check}");
    }
    assert!(
        checks
            .iter()
            .any(|c| c["name"] == "lambda_Omega_congruence"),
        "certificate must include the λΩ congruence row"
    );
    // The snapshot carries the full system.
    for key in ["chi", "xi", "omega", "thetas", "zeta", "big_omega"] {
        assert!(doc["system"].get(key).is_some(), "missing system.{key}");
    }
}
