//! End-to-end tests of the `finsler-hmx` binary: exit-code contract,
//! determinism of the machine format, and the check-id listing.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_finsler-hmx"))
}

fn workspace_config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn write_cfg(name: &str, text: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("hmx-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

#[test]
fn verify_core_on_the_minimal_config_exits_zero() {
    let cfg = write_cfg(
        "minimal.toml",
        r#"
        seed = 7
        [space]
        family = "euclidean"
        dim = 2
        [hvector]
        rho0 = 0.1
        c_const = [0.2, 0.0]
        [points]
        count = 5
        "#,
    );
    let out = run_ok(&[
        "verify-core",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "human",
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("-> pass") || text.contains("pass\n"),
        "{text}"
    );
    assert!(!text.contains("FAIL"));
}

#[test]
fn pole_configuration_exits_two_and_names_the_point() {
    let cfg = write_cfg(
        "pole.toml",
        r#"
        [space]
        family = "euclidean"
        dim = 2
        [hvector]
        rho0 = 1.0
        c_const = [0.0, 0.0]
        [points]
        [[points.list]]
        x = [0.0, 0.0]
        y = [3.0, 4.0]
        "#,
    );
    let out = run_ok(&["transform", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("pole"), "stderr: {err}");
    assert!(
        err.contains("[3.0, 4.0]"),
        "must name the offending point: {err}"
    );
}

#[test]
fn bad_config_exits_two() {
    let cfg = write_cfg(
        "bad.toml",
        "[space]\nfamily = \"euclidean\"\ndim = 2\nbogus = 1\n",
    );
    let out = run_ok(&["frame", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn failing_tolerance_exits_one() {
    // absurdly tight frame tolerance forces a genuine fail status
    let cfg = write_cfg(
        "tight.toml",
        r#"
        [space]
        family = "randers"
        dim = 2
        c_const = [0.1, 0.0]
        [points]
        count = 3
        [tolerances]
        frame = 1e-30
        "#,
    );
    let out = run_ok(&[
        "frame",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "human",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn machine_reports_are_byte_identical_across_runs() {
    let cfg = workspace_config("verify_chain.toml");
    let small = write_cfg(
        "chain_small.toml",
        &std::fs::read_to_string(&cfg)
            .unwrap()
            .replace("count = 100", "count = 8"),
    );
    let out1 = run_ok(&[
        "verify-chain",
        "--config",
        small.to_str().unwrap(),
        "--format",
        "machine",
    ]);
    let out2 = run_ok(&[
        "verify-chain",
        "--config",
        small.to_str().unwrap(),
        "--format",
        "machine",
    ]);
    assert_eq!(out1.status.code(), Some(0));
    assert_eq!(out1.stdout, out2.stdout);
    // a different seed changes the digest but stays deterministic
    let out3 = run_ok(&[
        "verify-chain",
        "--config",
        small.to_str().unwrap(),
        "--format",
        "machine",
        "--seed-override",
        "99",
    ]);
    let out4 = run_ok(&[
        "verify-chain",
        "--config",
        small.to_str().unwrap(),
        "--format",
        "machine",
        "--seed-override",
        "99",
    ]);
    assert_eq!(out3.stdout, out4.stdout);
    assert_ne!(out1.stdout, out3.stdout);
}

#[test]
fn human_and_machine_formats_print_identical_residual_digits() {
    let cfg = write_cfg(
        "digits.toml",
        r#"
        seed = 13
        [space]
        family = "randers"
        dim = 2
        c_const = [0.1, 0.0]
        [hvector]
        rho0 = 0.05
        c_const = [0.15, 0.0]
        [points]
        count = 4
        "#,
    );
    let machine = run_ok(&[
        "verify-core",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "machine",
    ]);
    let human = run_ok(&[
        "verify-core",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "human",
    ]);
    let mtext = String::from_utf8_lossy(&machine.stdout).to_string();
    let htext = String::from_utf8_lossy(&human.stdout).to_string();
    // every residual digit string in the machine output appears verbatim in
    // the human table (raw text comparison, no float round-trip)
    let mut seen = 0;
    for line in mtext.lines() {
        let Some(pos) = line.find("\"residual\":") else {
            continue;
        };
        let rest = &line[pos + 11..];
        let end = rest.find([',', '}']).unwrap();
        let digits = &rest[..end];
        if digits != "null" {
            assert!(
                htext.contains(digits),
                "residual {digits} missing from human output"
            );
            seen += 1;
        }
    }
    assert!(seen > 10, "expected many residuals, saw {seen}");
}

#[test]
fn list_checks_prints_the_registry() {
    let out = run_ok(&["frame", "--list-checks"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("frame.metricity"));
    assert!(text.contains("chain.<scenario>.d2.reduced"));
    assert!(text.contains("probe.connection_gap"));
}

#[test]
fn euclidean_hyperplane_classifies_as_third_kind_via_the_cli() {
    let cfg = write_cfg(
        "hs_plane.toml",
        r#"
        [space]
        family = "euclidean"
        dim = 3
        [hypersurface]
        family = "hyperplane"
        axis = 2
        offset = 0.0
        [[hypersurface.samples]]
        u = [0.1, 0.2]
        v = [1.0, 0.5]
        "#,
    );
    let out = run_ok(&[
        "hypersurface",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "human",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("kind=third"), "{text}");
}

#[test]
fn shipped_configs_run_clean() {
    for (cmd, cfg) in [
        ("frame", "frame_euclidean.toml"),
        ("verify-core", "verify_core_randers.toml"),
        ("hypersurface", "hypersurface_randers.toml"),
        ("hypersurface", "hypersurface_sphere.toml"),
        ("search-hvector", "search_randers.toml"),
    ] {
        let path = workspace_config(cfg);
        let out = run_ok(&[
            cmd,
            "--config",
            path.to_str().unwrap(),
            "--format",
            "machine",
        ]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{cmd} on {cfg}: stderr {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}
