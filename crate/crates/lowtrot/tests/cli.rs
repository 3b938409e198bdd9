//! Binary-level checks of the command-line contract: exit codes (0 = all
//! bounds satisfied, 1 = usage/runtime error, 2 = bound violation), the
//! documented example invocations, artifact determinism through the CLI,
//! the dump formats, and the LOWTROT_NMAX override.

use std::process::Command;

use tempfile::tempdir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lowtrot"))
}

#[test]
fn no_arguments_shows_usage_and_exits_1() {
    let out = bin().output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "expected usage text, got: {text}");
}

#[test]
fn help_exits_0() {
    let out = bin().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("lowtrot"));
}

#[test]
fn unknown_flag_exits_1() {
    let out = bin().args(["leakage", "--bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn leakage_example_exits_0() {
    let out = bin()
        .args([
            "leakage", "--model", "heisenberg_chain", "--n", "6", "--s", "0.2", "--lo", "E0+1J",
            "--hi", "+6J",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("leakage"), "got: {text}");
    assert!(text.contains("true"), "record should be satisfied: {text}");
}

#[test]
fn plan_with_spec_file_reports_s1_null_at_zero_gap() {
    let dir = tempdir().unwrap();
    let spec_path = dir.path().join("spec.json");
    let out = bin()
        .args(["model", "--name", "heisenberg_chain", "--n", "6", "--out"])
        .arg(&spec_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(spec_path.exists());

    let out = bin()
        .args(["plan", "--spec"])
        .arg(&spec_path)
        .args(["--t", "1", "--eps", "0.1", "--p", "1", "--delta", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(doc["pieces"]["s1"].is_null(), "Δ = 0 must disable s1: {doc}");
    assert!(doc["certificate"]["ok"].as_bool().unwrap());
    assert!(doc["r"].as_f64().unwrap() >= 1.0);
}

#[test]
fn forced_bound_violation_exits_2() {
    let out = bin()
        .args([
            "error", "--model", "heisenberg_chain", "--n", "4", "--p", "1", "--s", "0.05",
            "--delta", "E0+0.5J", "--gamma-tilde", "1e-12",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("false"));
}

#[test]
fn sweep_artifacts_byte_identical_across_runs() {
    let dir = tempdir().unwrap();
    let cfg_path = dir.path().join("cfg.json");
    let cfg = serde_json::json!({
        "name": "clidemo",
        "items": [
            { "model": { "Gallery": { "name": "heisenberg_chain", "n": 4 } },
              "task": { "Leakage": { "layer": 0, "s": 0.2,
                         "lo": { "GroundPlusJ": 1.0 }, "hi": { "RelPlusJ": 1.0 } } } },
            { "model": { "Gallery": { "name": "tfim_chain", "n": 4 } },
              "task": { "Corollary": { "p": 1, "s": 0.05, "delta": { "GroundPlusJ": 0.5 },
                         "delta_leak": 0.1, "which": 4 } } }
        ]
    });
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();

    let run = |sub: &str| {
        let out_dir = dir.path().join(sub);
        let out = bin()
            .args(["sweep", "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&out_dir)
            .output()
            .unwrap();
        assert_eq!(
            out.status.code(),
            Some(0),
            "stderr: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        (
            std::fs::read(out_dir.join("clidemo.csv")).unwrap(),
            std::fs::read(out_dir.join("clidemo.json")).unwrap(),
        )
    };
    let (csv_a, json_a) = run("a");
    let (csv_b, json_b) = run("b");
    assert!(!csv_a.is_empty());
    assert_eq!(csv_a, csv_b, "CSV artifacts must be byte-identical");
    assert_eq!(json_a, json_b, "JSON artifacts must be byte-identical");
    let text = String::from_utf8(csv_a).unwrap();
    assert!(text.starts_with("kind,model,seed,N,p,s,delta,"));
}

#[test]
fn format_csv_only_writes_csv() {
    let dir = tempdir().unwrap();
    let out = bin()
        .args([
            "leakage", "--model", "heisenberg_chain", "--n", "4", "--s", "0.2", "--lo", "E0+1J",
            "--hi", "+1J", "--format", "csv", "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("leakage.csv").exists());
    assert!(!dir.path().join("leakage.json").exists());
}

#[test]
fn moment_variant_single_record() {
    let out = bin()
        .args([
            "leakage", "--model", "tfim_chain", "--n", "4", "--moment", "2", "--lo", "E0+1J",
            "--hi", "+1J",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).contains("moment_leakage"));
}

#[test]
fn dump_matrix_binary_format() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("h.bin");
    let out = bin()
        .args(["dump", "--model", "heisenberg_chain", "--n", "4", "--what", "matrix", "--out"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let bytes = std::fs::read(&path).unwrap();
    // u64 little-endian dimension header, then dim² complex entries as
    // interleaved (re, im) f64 pairs.
    assert_eq!(bytes.len(), 8 + 16 * 16 * 16);
    assert_eq!(u64::from_le_bytes(bytes[..8].try_into().unwrap()), 16);
    let first_re = f64::from_le_bytes(bytes[8..16].try_into().unwrap());
    assert!(first_re.is_finite());
}

#[test]
fn nmax_env_caps_and_raises_dimension() {
    let out = bin()
        .args([
            "leakage", "--model", "heisenberg_chain", "--n", "4", "--s", "0.1", "--lo", "E0+1J",
            "--hi", "+1J",
        ])
        .env("LOWTROT_NMAX", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("LOWTROT_NMAX"));

    let out = bin()
        .args([
            "leakage", "--model", "heisenberg_chain", "--n", "4", "--s", "0.1", "--lo", "E0+1J",
            "--hi", "+1J",
        ])
        .env("LOWTROT_NMAX", "12")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn spectrum_dump_is_sorted_json() {
    let out = bin()
        .args(["dump", "--model", "heisenberg_chain", "--n", "4", "--what", "spectrum"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let vals: Vec<f64> = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(vals.len(), 16);
    assert!(vals.windows(2).all(|w| w[0] <= w[1]), "spectrum must be ascending");
    assert!(vals[0] >= -1e-9, "shifted spectrum is nonnegative");
}
