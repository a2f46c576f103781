use nlfront::config::{parse_config, parse_config_with_env, ConfigError};
use nlfront::runner::{analyze, certify_cmd, simulate, ManifestStatus, RunManifest, MANIFEST};
use nlfront::{Error, Outcome};
use proptest::prelude::*;
use std::fs;
use std::path::Path;

const SMOKE: &str = "\
kernel.s = 0.5
reaction.beta = 1.5
run.t_end = 10
run.dx = 0.5
run.expand_tol = 1e-2
run.levels = 0.1, 0.5
";

fn files_in(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push(p.strip_prefix(dir).unwrap().to_string_lossy().replace('\\', "/"));
            }
        }
    }
    out.sort();
    out
}

fn check_manifest(dir: &Path) -> RunManifest {
    let m = RunManifest::load(dir).unwrap();
    let mut listed: Vec<String> = m.files.iter().map(|f| f.path.clone()).collect();
    for f in &m.files {
        let len = fs::metadata(dir.join(&f.path)).unwrap().len();
        assert!(len > 0, "{} is empty", f.path);
        assert_eq!(len, f.bytes, "{}", f.path);
    }
    listed.push(MANIFEST.to_string());
    listed.sort();
    let present: Vec<String> = files_in(dir).into_iter().filter(|f| !f.starts_with("analysis/")).collect();
    assert_eq!(present, listed, "manifest inventory differs from directory contents");
    let cfg = m.resolved_config().unwrap();
    assert_eq!(cfg.to_text(), m.config);
    m
}

#[test]
fn defaults_resolve() {
    let c = parse_config("kernel.kind = fractional\nkernel.s = 0.5\n").unwrap();
    assert_eq!((c.run.dt, c.run.dx, c.run.max_add), (0.01, 0.2, 150));
    assert_eq!((c.run.domain_left, c.run.domain_right), (-1000.0, 1000.0));
    assert_eq!(c.split_gamma, 1.5);
    let spec = c.run_spec().unwrap();
    assert_eq!(spec.initial_grid().unwrap().len(), 10001);
}

#[test]
fn out_of_range_beta_names_its_key() {
    let e = parse_config("kernel.s = 0.5\nreaction.beta = 0.5\n").unwrap_err();
    assert!(matches!(&e, ConfigError::Range { key, .. } if key == "reaction.beta"), "{e}");
    assert!(e.to_string().contains("reaction.beta"));
}

#[test]
fn malformed_and_unknown_documents() {
    let e = parse_config("kernel.s = 0.5\njust words\n").unwrap_err();
    assert_eq!(e, ConfigError::Malformed { line: 2, reason: "expected `key = value`, got `just words`".into() });
    let e = parse_config("kernel.s = 0.5\nkernel.colour = red\n").unwrap_err();
    assert_eq!(e.key(), Some("kernel.colour"));
    let e = parse_config("kernel.s = 0.5\noperator.split_gamma = 0.9\n").unwrap_err();
    assert_eq!(e.key(), Some("operator.split_gamma"));
    let e = parse_config("kernel.s = 0.5\nsubsolution.zones = blue, purple\n").unwrap_err();
    assert_eq!(e.key(), Some("subsolution.zones"));
    let e = parse_config("kernel.s = 0.5\nsubsolution.kappa = 2\n").unwrap_err();
    assert_eq!(e.key(), Some("subsolution.kappa"));
}

#[test]
fn environment_overrides_any_key() {
    let c = parse_config_with_env(SMOKE, |k| match k {
        "NLFRONT_REACTION_BETA" => Some("3".into()),
        "NLFRONT_SUBSOLUTION_ZONES" => Some("barrier".into()),
        _ => None,
    })
    .unwrap();
    assert_eq!(c.reaction.beta, 3.0);
    assert_eq!(c.subsolution.zones.len(), 1);
}

#[test]
fn simulate_smoke_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMOKE).unwrap();
    let rep = simulate(&cfg, dir.path()).unwrap();
    assert_eq!(rep.outcome, Outcome::Completed);
    let m = check_manifest(dir.path());
    assert_eq!(m.status, ManifestStatus::Completed);
    for f in ["levels.csv", "snapshots.csv", "tail_fits.csv", "flattening.csv", "exponents.csv", "regime.txt"] {
        assert!(m.files.iter().any(|e| e.path == f), "{f} missing");
    }
    assert!(m.config.contains("run.initial = indicator"));
}

#[test]
fn zero_end_time_writes_the_initial_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config("kernel.s = 0.5\nrun.t_end = 0\nrun.dx = 1\n").unwrap();
    simulate(&cfg, dir.path()).unwrap();
    let m = check_manifest(dir.path());
    let snaps: Vec<_> = m.files.iter().filter(|f| f.path.starts_with("snapshots/")).collect();
    assert_eq!(snaps.len(), 1);
    assert_eq!(m.status, ManifestStatus::Completed);
}

#[test]
fn reruns_are_byte_identical_and_analysis_matches() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = parse_config(SMOKE).unwrap();
    simulate(&cfg, a.path()).unwrap();
    simulate(&cfg, b.path()).unwrap();
    let m = RunManifest::load(a.path()).unwrap();
    for f in &m.files {
        assert_eq!(fs::read(a.path().join(&f.path)).unwrap(), fs::read(b.path().join(&f.path)).unwrap(), "{}", f.path);
    }

    let out = a.path().join("analysis");
    analyze(&cfg, a.path(), &out).unwrap();
    let am = check_manifest(&out);
    assert!(!am.files.is_empty());
    for f in &am.files {
        assert_eq!(fs::read(out.join(&f.path)).unwrap(), fs::read(a.path().join(&f.path)).unwrap(), "{}", f.path);
    }
}

#[test]
fn rerun_into_the_same_directory_replaces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMOKE).unwrap();
    simulate(&cfg, dir.path()).unwrap();
    let short = parse_config(&format!("{SMOKE}run.snapshot_every = 0\n")).unwrap();
    simulate(&short, dir.path()).unwrap();
    check_manifest(dir.path());

    let foreign = tempfile::tempdir().unwrap();
    fs::write(foreign.path().join("notes.txt"), "keep").unwrap();
    assert!(simulate(&cfg, foreign.path()).is_err());
}

#[test]
fn analyze_synthetic_levels() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("t,level_0.5\n");
    for i in 1..=40 {
        let t = i as f64 * 0.5;
        text += &format!("{t:.16e},{:.16e}\n", t.powf(1.5));
    }
    fs::write(dir.path().join("levels.csv"), text).unwrap();
    let cfg = parse_config(
        "kernel.s = 0.5\nreaction.beta = 3\ndiagnostics.tail_fits = false\ndiagnostics.flattening = false\n\
         diagnostics.exponent_window_lo = 1\ndiagnostics.exponent_window_hi = 20\n",
    )
    .unwrap();
    let out = dir.path().join("analysis");
    let rep = analyze(&cfg, dir.path(), &out).unwrap();
    let exps = fs::read_to_string(out.join("exponents.csv")).unwrap();
    let slope: f64 = exps.lines().nth(1).unwrap().split(',').nth(3).unwrap().parse().unwrap();
    assert!((slope - 1.5).abs() < 1e-12);
    let regime = fs::read_to_string(out.join("regime.txt")).unwrap();
    assert!(regime.contains("summary = accelerating, p=1.5"), "{regime}");
    assert!(rep.lines.iter().any(|l| l == "summary = accelerating, p=1.5"));
}

#[test]
fn corrupt_inputs_are_named() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(SMOKE).unwrap();
    simulate(&cfg, dir.path()).unwrap();
    let snap = dir.path().join("snapshots/u_0001.csv");
    let text = fs::read_to_string(&snap).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    lines[5] = "1.0,oops";
    fs::write(&snap, lines.join("\n") + "\n").unwrap();
    let e = analyze(&cfg, dir.path(), &dir.path().join("analysis")).unwrap_err();
    match &e {
        Error::Parse { path, line, .. } => {
            assert!(path.ends_with("u_0001.csv"), "{path}");
            assert_eq!(*line, 6);
        }
        other => panic!("unexpected {other}"),
    }

    let empty = tempfile::tempdir().unwrap();
    let e = analyze(&cfg, empty.path(), &empty.path().join("analysis")).unwrap_err();
    assert!(e.to_string().contains("levels.csv"), "{e}");
}

#[test]
fn node_cap_marks_the_manifest_aborted() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(&format!("{SMOKE}run.max_nodes = 500\nrun.domain_left = -100\nrun.domain_right = 100\n")).unwrap();
    let rep = simulate(&cfg, dir.path()).unwrap();
    assert!(matches!(rep.outcome, Outcome::Aborted { .. }));
    assert_eq!(rep.outcome.exit_code(), 2);
    let m = check_manifest(dir.path());
    assert_eq!(m.status, ManifestStatus::Aborted);
    assert!(m.abort_time.unwrap() < 10.0);
    assert!(m.abort_reason.unwrap().contains("500"));
}

#[test]
fn barrier_certification_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = parse_config("kernel.s = 0.5\nsubsolution.zones = barrier\nsubsolution.t_samples = 20\nsubsolution.x_samples = 20\n").unwrap();
    let rep = certify_cmd(&ok, dir.path()).unwrap();
    assert_eq!(rep.outcome, Outcome::Completed);
    let m = check_manifest(dir.path());
    assert!(m.files.iter().any(|f| f.path == "residuals.csv"));

    let bound = 1.0 / (2.0 * 0.5 * ok.kernel.j0);
    let bad = parse_config(&format!(
        "kernel.s = 0.5\nsubsolution.zones = barrier\nsubsolution.barrier_kappa = {:?}\n",
        10.0 * bound / 4.0
    ))
    .unwrap();
    let rep = certify_cmd(&bad, dir.path()).unwrap();
    assert_eq!(rep.outcome, Outcome::CertificationFailed);
    assert_eq!(rep.outcome.exit_code(), 3);
    let report = fs::read_to_string(dir.path().join("certify_report.txt")).unwrap();
    assert!(report.contains("barrier  FAIL"), "{report}");
    let line = report.lines().find(|l| l.contains("FAIL")).unwrap();
    assert!(line.contains("worst=") && line.contains("at (t="), "{line}");
    assert!(!line.contains("worst=-"));
}

#[test]
fn threshold_ladder_is_reported_as_a_measurement() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "kernel.s = 0.75\nsubsolution.eps = 0.2\nsubsolution.zones = blue, farfield\n\
         subsolution.x_samples = 16\nsubsolution.ladder = 100, 1000, 10000\n",
    )
    .unwrap();
    let rep = certify_cmd(&cfg, dir.path()).unwrap();
    assert_eq!(rep.outcome, Outcome::Completed, "{:#?}", rep.lines);
    check_manifest(dir.path());
    let report = fs::read_to_string(dir.path().join("certify_report.txt")).unwrap();
    assert!(report.contains("threshold:"), "{report}");
    assert!(report.contains("not a proven threshold"));
    assert!(dir.path().join("threshold.csv").exists());

    let early = parse_config(&cfg.to_text().replace("subsolution.ladder = 100", "subsolution.ladder = 5, 100")).unwrap();
    let rep = certify_cmd(&early, dir.path()).unwrap();
    assert!(matches!(&rep.outcome, Outcome::Aborted { reason, .. } if reason.contains("before the start time")));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn serialized_config_reparses_identically(
        s in 0.05f64..0.95,
        beta in 1.0f64..10.0,
        dt in 1e-4f64..0.1,
        levels in prop::collection::vec(0.01f64..0.99, 1..4),
        free in any::<bool>(),
        kappa in 0.01f64..10.0,
    ) {
        let lv: Vec<String> = levels.iter().map(|v| format!("{v:?}")).collect();
        let mut doc = format!(
            "kernel.s = {s:?}\nreaction.beta = {beta:?}\nrun.dt = {dt:?}\nrun.levels = {}\n",
            lv.join(", ")
        );
        if free {
            doc += &format!("subsolution.mode = free\nsubsolution.kappa = {kappa:?}\n");
        }
        let a = parse_config(&doc).unwrap();
        let b = parse_config(&a.to_text()).unwrap();
        prop_assert_eq!(a.to_text(), b.to_text());
        prop_assert_eq!(format!("{a:?}"), format!("{b:?}"));
    }
}

#[test]
fn printed_diagonal_tail_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let base = "kernel.s = 0.5\nrun.t_end = 0\nrun.dx = 1\n";
    let rep = simulate(&parse_config(base).unwrap(), dir.path()).unwrap();
    assert!(!rep.lines.iter().any(|l| l.starts_with("warning:")), "{:#?}", rep.lines);
    let printed = parse_config(&format!("{base}operator.diagonal_tail = printed\n")).unwrap();
    let rep = simulate(&printed, dir.path()).unwrap();
    assert!(rep.lines.iter().any(|l| l.starts_with("warning: printed diagonal tail")), "{:#?}", rep.lines);
}
