use std::fs;
use std::path::{Path, PathBuf};

use neqdmft_core::experiment::{constant_hybridization, correction_comparison, run_experiment};
use neqdmft_core::io::{
    parse_config, parse_config_str, read_two_time, write_two_time, ExperimentConfig, ExperimentMode, TwoTimeRecord,
    TwoTimeRow, TWO_TIME_HEADER,
};
use neqdmft_core::{Component, Error, Spin, SpinGreens, TimeGrid, C64};
use proptest::prelude::*;

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("io_tests").join(name);
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn origin() -> &'static Path {
    Path::new("inline.cfg")
}

#[test]
fn empty_text_gives_defaults() {
    let cfg = parse_config_str("", origin()).unwrap();
    assert_eq!(cfg.to_text(), ExperimentConfig::default().to_text());
    assert_eq!(cfg.mode, ExperimentMode::Ed);
    assert_eq!(cfg.dt, 0.04);
    assert_eq!(cfg.t_q, 0.25);
    assert_eq!(cfg.sigma_1q, 1e-6);
    assert_eq!(cfg.realizations, 128);
    assert_eq!(cfg.delta_conv, 1e-5);
    assert_eq!(cfg.shots, 0);
}

#[test]
fn settings_comments_and_rates() {
    let text = "# noisy run\nmode = hybrid\nsigma_ms = 0.01   # one percent\n\ngamma = 0.2\nsigma_ms_list = 0.02, 0.05\n";
    let cfg = parse_config_str(text, origin()).unwrap();
    assert_eq!(cfg.mode, ExperimentMode::Hybrid);
    assert_eq!(cfg.sigma_ms, 0.01);
    assert_eq!((cfg.gamma_minus, cfg.gamma_plus), (0.2, 0.2));
    assert_eq!(cfg.sigma_ms_list, vec![0.02, 0.05]);
    assert_eq!(cfg.noise().sigma_ms, 0.01);
}

#[test]
fn unknown_key_is_named() {
    match parse_config_str("dt = 0.04\nbath_sites = 4\n", origin()) {
        Err(Error::UnknownKey(k)) => assert_eq!(k, "bath_sites"),
        other => panic!("expected unknown key, got {other:?}"),
    }
}

#[test]
fn negative_dt_names_the_field() {
    let err = parse_config_str("dt = -0.04", origin()).unwrap_err();
    assert!(matches!(err, Error::Config(_)));
    assert!(err.to_string().contains("dt must be positive"), "{err}");
}

#[test]
fn malformed_lines_report_their_position() {
    match parse_config_str("dt = 0.04\nrealizations 64\n", origin()) {
        Err(Error::Parse { line, path, .. }) => {
            assert_eq!(line, 2);
            assert_eq!(path, origin());
        }
        other => panic!("expected parse error, got {other:?}"),
    }
    assert!(parse_config_str("mode = qmc", origin()).is_err());
    assert!(parse_config_str("spin_symmetric = maybe", origin()).is_err());
    assert!(parse_config_str("realizations = 0", origin()).is_err());
}

#[test]
fn resolved_text_parses_back() {
    let mut cfg = ExperimentConfig::default();
    for (k, v) in [("mode", "lindblad-fit"), ("u", "0"), ("gamma_minus", "0.3"), ("seed", "99"), ("correction", "dissipative-fit")] {
        cfg.set(k, v).unwrap();
    }
    let back = parse_config_str(&cfg.to_text(), origin()).unwrap();
    assert_eq!(back.to_text(), cfg.to_text());
}

#[test]
fn missing_config_file_carries_its_path() {
    let dir = scratch("missing");
    match parse_config(&dir.join("nope.cfg")) {
        Err(Error::Io { path, .. }) => assert!(path.ends_with("nope.cfg")),
        other => panic!("expected io error, got {other:?}"),
    }
}

#[test]
fn empty_record_is_header_only() {
    let dir = scratch("empty");
    let path = dir.join("g.tsv");
    write_two_time(&TwoTimeRecord::default(), &path).unwrap();
    assert_eq!(fs::read_to_string(&path).unwrap(), format!("{TWO_TIME_HEADER}\n"));
    assert!(read_two_time(&path).unwrap().rows.is_empty());
}

#[test]
fn one_row_per_stored_pair() {
    let grid = TimeGrid::new(0.04, 6).unwrap();
    let rec = TwoTimeRecord::from_greens(&SpinGreens::zeros(grid.len()), &Component::ALL, &grid);
    let per_function = (grid.n_steps() + 1) * (grid.n_steps() + 2) / 2;
    assert_eq!(rec.rows.len(), 4 * per_function);
    assert!(rec.rows.iter().all(|r| r.m <= r.n));
}

#[test]
fn corrupt_records_are_rejected() {
    let p = origin();
    assert!(TwoTimeRecord::from_text("n\tm\n", p).is_err());
    let bad = format!("{TWO_TIME_HEADER}\nlesser\tup\t0\t0\t0\t0\t0\n");
    assert!(matches!(TwoTimeRecord::from_text(&bad, p), Err(Error::Parse { line: 2, .. })));
    let bad = format!("{TWO_TIME_HEADER}\nlesser\tsideways\t0\t0\t0\t0\t0\t0\n");
    assert!(TwoTimeRecord::from_text(&bad, p).is_err());
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn records_round_trip_bit_exactly(values in prop::collection::vec((finite(), finite(), finite()), 0..20)) {
        let rows: Vec<TwoTimeRow> = values
            .iter()
            .enumerate()
            .map(|(k, &(t, re, im))| TwoTimeRow {
                component: if k % 2 == 0 { Component::Lesser } else { Component::Greater },
                spin: if k % 3 == 0 { Spin::Up } else { Spin::Down },
                n: k,
                m: k / 2,
                t_n: t,
                t_m: -t,
                value: C64::new(re, im),
            })
            .collect();
        let rec = TwoTimeRecord { rows };
        let back = TwoTimeRecord::from_text(&rec.to_text(), origin()).unwrap();
        prop_assert_eq!(back.rows.len(), rec.rows.len());
        for (a, b) in rec.rows.iter().zip(&back.rows) {
            prop_assert_eq!(a.t_n.to_bits(), b.t_n.to_bits());
            prop_assert_eq!(a.t_m.to_bits(), b.t_m.to_bits());
            prop_assert_eq!(a.value.re.to_bits(), b.value.re.to_bits());
            prop_assert_eq!(a.value.im.to_bits(), b.value.im.to_bits());
            prop_assert_eq!((a.component, a.spin, a.n, a.m), (b.component, b.spin, b.n, b.m));
        }
    }
}

#[test]
fn decoupled_ed_run_writes_zero_double_occupancy() {
    let dir = scratch("ed_zero");
    let cfg = ExperimentConfig {
        v_final: 0.0,
        t_max: 0.2,
        ..ExperimentConfig::default()
    };
    let summary = run_experiment(&cfg, &dir).unwrap();
    assert!(summary.converged);
    let log = fs::read_to_string(dir.join("convergence.tsv")).unwrap();
    let stages: Vec<&str> = log.lines().skip(1).collect();
    assert_eq!(summary.iterations, stages.len());
    assert!(stages.iter().all(|l| l.split('\t').nth(1) == Some("1")));
    let text = fs::read_to_string(dir.join("double_occupancy.tsv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n\tt\td"));
    let d: Vec<f64> = lines.map(|l| l.split('\t').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(d.len(), cfg.grid().unwrap().len());
    assert!(d.iter().all(|x| *x == 0.0));
    let greens = read_two_time(&dir.join("greens.tsv")).unwrap();
    assert_eq!(greens.rows.len(), 4 * d.len() * (d.len() + 1) / 2);
    assert!(summary.files.iter().any(|f| f.ends_with("manifest.txt")));
}

#[test]
fn lindblad_fit_run_writes_comparison() {
    let dir = scratch("lindblad_fit");
    let mut cfg = ExperimentConfig {
        mode: ExperimentMode::LindbladFit,
        u: 0.0,
        t_max: 0.32,
        ..ExperimentConfig::default()
    };
    cfg.set("gamma", "0.2").unwrap();
    let summary = run_experiment(&cfg, &dir).unwrap();
    let cmp = summary.comparison.unwrap();
    assert!(cmp.naive_error > 0.0 && cmp.corrected_error.is_finite());
    for name in ["lambda_exact.tsv", "lambda_naive.tsv", "lambda_corrected.tsv", "comparison.tsv", "manifest.txt"] {
        assert!(dir.join(name).is_file(), "{name}");
    }
    let manifest = fs::read_to_string(dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("mode = lindblad-fit"));
    assert!(manifest.contains("error_ratio = "));
}

#[test]
fn correction_comparison_requires_free_impurity() {
    let cfg = ExperimentConfig::default();
    assert!(matches!(correction_comparison(&cfg), Err(Error::Interacting(_))));
}

#[test]
fn constant_couplings_pair_occupied_and_empty_sites() {
    let h = constant_hybridization(2, 5, 0.5);
    assert_eq!(h.n_bath(), 4);
    for spin in Spin::ALL {
        for p in 1..=4 {
            for n in 0..5 {
                assert_eq!(h.get(spin, p, n), C64::new(0.5, 0.0));
            }
        }
    }
}

#[test]
fn invalid_config_is_rejected_before_running() {
    let dir = scratch("invalid");
    let cfg = ExperimentConfig {
        dt: 0.0,
        ..ExperimentConfig::default()
    };
    assert!(matches!(run_experiment(&cfg, &dir), Err(Error::Config(_))));
    assert!(fs::read_dir(&dir).unwrap().next().is_none());
}
