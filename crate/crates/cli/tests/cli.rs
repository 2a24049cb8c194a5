use postsel::linalg::rng_for;
use postsel_cli::commands::{decoder_curve, laa_curve};
use postsel_cli::config::log_grid;
use postsel_cli::spectra::{haar_spectrum, histogram, quantile, truncated_normal};
use postsel_cli::{build_config, commands, parse_config, CliError, Preset, SpectrumSource};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pairs(kv: &[(&str, &str)]) -> Vec<(String, String)> {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn postsel(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_postsel")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn config_file_parsing() {
    let text = "# fig4 on the desk sizes\nexperiment = fig4\n\nn_total=10   # trailing comment\nspectrum = 0.1, 0.4\n";
    assert_eq!(
        parse_config(text).unwrap(),
        pairs(&[("experiment", "fig4"), ("n_total", "10"), ("spectrum", "0.1, 0.4")])
    );
    let err = parse_config("seed = 1\nbogus = 2\n").unwrap_err().to_string();
    assert!(err.contains("line 2") && err.contains("bogus"), "{err}");
    assert!(parse_config("seed 1").unwrap_err().to_string().contains("line 1"));
}

#[test]
fn presets_and_overrides() {
    let cfg = build_config("fig4", Preset::Paper, &[]).unwrap();
    assert_eq!((cfg.n_total, cfg.n_mixed, cfg.n_measured), (14, 7, 8));
    let cfg = build_config("fig4", Preset::Desk, &[]).unwrap();
    assert_eq!((cfg.n_total, cfg.n_mixed, cfg.n_measured), (10, 5, 6));
    assert_eq!(cfg.p_star_grid.len(), 71);
    let cfg = build_config("fig4", Preset::Desk, &pairs(&[("seed", "3"), ("seed", "9"), ("n_measured", "4")])).unwrap();
    assert_eq!((cfg.seed, cfg.n_measured), (9, 4));
    let cfg = build_config("fig6", Preset::Desk, &pairs(&[("source", "explicit"), ("spectrum", "0.1,0.4")])).unwrap();
    assert!(matches!(cfg.source, SpectrumSource::Explicit(ref v) if v == &[0.1, 0.4]));
}

#[test]
fn invalid_configs_are_rejected() {
    assert!(matches!(build_config("fig5", Preset::Desk, &[]), Err(CliError::Usage(_))));
    assert!(matches!(build_config("fig4", Preset::Desk, &pairs(&[("frobnicate", "1")])), Err(CliError::Config(_))));
    assert!(build_config("fig4", Preset::Desk, &pairs(&[("seed", "x")])).is_err());
    assert!(build_config("fig4", Preset::Desk, &pairs(&[("grid_min", "0")])).is_err());
    assert!(build_config("fig4", Preset::Desk, &pairs(&[("source", "uniform")])).is_err());
    let err = build_config("fig4", Preset::Paper, &pairs(&[("n_total", "20")])).unwrap_err().to_string();
    assert!(err.contains("desk"), "{err}");
}

#[test]
fn log_grid_endpoints_are_exact() {
    let g = log_grid(1e-7, 1.0, 71).unwrap();
    assert_eq!((g[0], g[70]), (1e-7, 1.0));
    assert!(g.windows(2).all(|w| w[0] < w[1]));
    assert!(((g[10] / g[9]).log10() - 0.1).abs() < 1e-12);
    assert_eq!(log_grid(0.3, 0.3, 1).unwrap(), vec![0.3]);
}

#[test]
fn spectrum_helpers() {
    let values = truncated_normal(0.05, 0.015, 5000, &mut rng_for(1, 0)).unwrap();
    assert!(values.iter().all(|&v| v > 1e-6 && v < 1.0));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    assert!((mean - 0.05).abs() < 1e-3);
    assert!(truncated_normal(-5.0, 0.01, 1, &mut rng_for(1, 0)).is_err());

    let hist = histogram(&[0.0, 0.25, 0.5, 1.0], 4);
    assert_eq!(hist.iter().map(|b| b.2).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
    assert_eq!((hist[0].0, hist[3].1), (0.0, 1.0));
    let q = [0.5, 0.1, 0.4, 0.2, 0.3];
    assert_eq!((quantile(&q, 0.1), quantile(&q, 0.5), quantile(&q, 1.0)), (0.1, 0.3, 0.5));
}

#[test]
fn haar_spectrum_has_mixed_dimension_and_mean_p_m() {
    let (s, outcome) = haar_spectrum(6, 2, 3, &mut rng_for(5, 0)).unwrap();
    assert_eq!((s.values().len(), outcome.len()), (4, 3));
    let mean = s.values().iter().sum::<f64>() / 4.0;
    assert!((mean - s.p_m()).abs() < 1e-12);
    // Three of six qubits measured from two mixed ones leaves K 8x4: injective.
    assert!(s.p_min() > 1e-6);
}

#[test]
fn ideal_curves_on_two_branches() {
    let s = postsel::protocols::BranchSpectrum::new(vec![0.1, 0.4]).unwrap();
    let grid = [0.05, 0.1, 0.4, 1.0];
    let laa = laa_curve(&s, &grid).unwrap();
    assert!((laa[2].1.f_qsvt - 1.0).abs() < 1e-12 && (laa[2].1.p_qsvt - 0.625).abs() < 1e-12);
    assert!((laa[3].1.p_qsvt - s.p_m()).abs() < 1e-12);
    let dec = decoder_curve(&s, &grid).unwrap();
    assert!((dec[1].1.f_decoding - 1.0).abs() < 1e-12 && (dec[1].1.p_succ - 0.4).abs() < 1e-12);
    assert!((dec[0].1.p_succ - 0.2).abs() < 1e-12);
}

fn run_into(experiment: &str, extra: &[(&str, &str)], out: &Path) -> postsel_cli::RunSummary {
    let mut kv = pairs(extra);
    kv.push(("out".into(), out.display().to_string()));
    let cfg = build_config(experiment, Preset::Desk, &kv).unwrap();
    commands::run(&cfg).unwrap()
}

#[test]
fn commands_pass_their_assertions_on_desk() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [(&str, &[(&str, &str)]); 6] = [
        ("fig4", &[]),
        ("fig6", &[("n_measured", "4")]),
        ("fpaa", &[("fpaa_instances", "8")]),
        ("gadget-check", &[("gadget_circuits", "8")]),
        ("bounds", &[("bounds_trials", "100"), ("bounds_spectra", "20")]),
        ("protocol", &[]),
    ];
    for (experiment, extra) in runs {
        let summary = run_into(experiment, extra, dir.path());
        // The 10th-percentile fidelity on a Haar spectrum depends on the seed;
        // the acceptance suite reports it over many seeds.
        let failed: Vec<_> = summary
            .failures()
            .filter(|a| a.name != "a_high_fidelity_below_10th_percentile")
            .map(|a| a.name.clone())
            .collect();
        assert!(failed.is_empty(), "{experiment}: {failed:?}");
        assert!(summary.files.iter().all(|f| f.exists()));
    }
    let header = fs::read_to_string(dir.path().join("fig4a.csv")).unwrap();
    assert!(header.starts_with("p_star,"), "{}", header.lines().next().unwrap());
    assert!(fs::read_to_string(dir.path().join("fig6.svg")).unwrap().contains("<svg"));
}

#[test]
fn non_injective_haar_panel_is_capped_by_rank() {
    let dir = tempfile::tempdir().unwrap();
    let summary = run_into("fig6", &[], dir.path());
    let cap = summary.assertions.iter().find(|a| a.name == "a_non_injective_fidelity_capped_by_rank").unwrap();
    assert!(cap.passed && cap.measured <= 0.5 + 1e-12, "{cap:?}");
}

#[test]
fn same_seed_gives_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_into("fig4", &[("seed", "5")], &a);
    run_into("fig4", &[("seed", "5")], &b);
    run_into("fig4", &[("seed", "6")], &c);
    for name in ["fig4a.csv", "fig4b.csv", "fig4a_hist.csv", "fig4_assertions.csv"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    assert_ne!(fs::read(a.join("fig4a.csv")).unwrap(), fs::read(c.join("fig4a.csv")).unwrap());
}

#[test]
fn binary_runs_a_config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "experiment = fpaa\nfpaa_instances = 50\nseed = 2\n").unwrap();
    let out = dir.path().join("out");
    let o =
        postsel(&["run", "--config", cfg.to_str().unwrap(), "--fpaa_instances", "3", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("PASS fpaa_min_fidelity"));
    // Header plus the configured instance plus three random ones.
    assert_eq!(fs::read_to_string(out.join("fpaa.csv")).unwrap().lines().count(), 5);
}

#[test]
fn binary_reports_usage_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("fig4.cfg");
    fs::write(&cfg, "experiment = fig4\n").unwrap();
    let o = postsel(&["fig6", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("fig4"));

    let o = postsel(&["run", "--experiment", "fig5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown experiment"));

    let o = postsel(&["fig4", "--n_total", "20", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--preset desk"));

    assert!(!postsel(&["fig4", "--no_such_key", "1"]).status.success());
}
