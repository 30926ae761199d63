use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;

use gbsm::estimation::{synthesize_target, GridAxis, GridSpec, Param, StatisticKind, StatisticSettings, TargetCurve};
use gbsm::export::read_binary;
use gbsm::scenarios::{preset, PresetName};
use gbsm::stats::curve::Curve;
use gbsm_cli::{
    cmd_fit, cmd_simulate, cmd_stats, CliError, DumpFormat, FitArgs, RunManifest, Scenario, SimulateArgs,
};

fn simulate(dir: &Path, name: PresetName, seeds: Vec<u64>, duration: f64) -> RunManifest {
    cmd_simulate(&SimulateArgs {
        scenario: Scenario::Preset(name),
        seeds: Some(seeds),
        duration: Some(duration),
        dt: Some(1e-3),
        out: dir.to_path_buf(),
        format: DumpFormat::Binary,
    })
    .unwrap()
}

fn files_on_disk(dir: &Path) -> BTreeSet<String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect()
}

fn inventory(m: &RunManifest) -> BTreeSet<String> {
    m.files.iter().map(|f| f.path.clone()).collect()
}

fn gbsm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gbsm"))
}

#[test]
fn one_second_of_hst_gives_1000_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let m = simulate(dir.path(), PresetName::Hst3d, vec![5], 1.0);
    assert_eq!(m.dumps, vec!["realization_5.bin"]);
    let snaps = read_binary(&mut fs::File::open(dir.path().join(&m.dumps[0])).unwrap()).unwrap();
    assert_eq!(snaps.len(), 1000);
    assert_eq!(snaps[0].time, 0.0);
    assert!((snaps[999].time - 0.999).abs() < 1e-9);
    assert_eq!(inventory(&m), files_on_disk(dir.path()));
}

#[test]
fn reruns_reproduce_digests() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ma = simulate(a.path(), PresetName::Hst3d, vec![1, 2], 0.05);
    let mb = simulate(b.path(), PresetName::Hst3d, vec![1, 2], 0.05);
    assert_eq!(ma.files, mb.files);
    assert_ne!(ma.files[0].sha256, ma.files[1].sha256);
}

#[test]
fn eight_seeds_give_eight_dumps() {
    let dir = tempfile::tempdir().unwrap();
    let m = simulate(dir.path(), PresetName::Mmwave3d, (10..18).collect(), 0.01);
    assert_eq!(m.dumps.len(), 8);
    assert_eq!(files_on_disk(dir.path()).len(), 8);
    assert_eq!(inventory(&m), files_on_disk(dir.path()));
}

#[test]
fn duplicate_seeds_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let err = cmd_simulate(&SimulateArgs {
        scenario: Scenario::Preset(PresetName::Hst3d),
        seeds: Some(vec![3, 3]),
        duration: Some(0.01),
        dt: None,
        out: dir.path().to_path_buf(),
        format: DumpFormat::Binary,
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn text_dump_has_one_row_per_tap() {
    let dir = tempfile::tempdir().unwrap();
    let m = cmd_simulate(&SimulateArgs {
        scenario: Scenario::Preset(PresetName::Hst3d),
        seeds: Some(vec![2]),
        duration: Some(0.003),
        dt: Some(1e-3),
        out: dir.path().to_path_buf(),
        format: DumpFormat::Text,
    })
    .unwrap();
    let text = fs::read_to_string(dir.path().join(&m.dumps[0])).unwrap();
    let cfg = preset(PresetName::Hst3d);
    let snaps = gbsm::channel::run_realization(&cfg, 0.003, 1e-3, 2).unwrap();
    let taps: usize = snaps.iter().flat_map(|s| s.taps.iter().map(Vec::len)).sum();
    let rows = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty()).count();
    assert_eq!(rows, taps);
    // statistics refuse text dumps
    assert_eq!(cmd_stats(dir.path(), &["acf".into()]).unwrap_err().exit_code(), 2);
}

#[test]
fn stats_selection() {
    let dir = tempfile::tempdir().unwrap();
    let m = simulate(dir.path(), PresetName::Mmwave3d, vec![1, 2, 3], 0.05);
    let before = inventory(&m);

    let m = cmd_stats(dir.path(), &[]).unwrap();
    assert_eq!(inventory(&m), before);
    assert!(m.statistics.is_empty());

    let m = cmd_stats(dir.path(), &["rms-delay-ccdf".into()]).unwrap();
    let added: Vec<_> = inventory(&m).difference(&before).cloned().collect();
    assert_eq!(added, vec!["rms_delay_ccdf.txt"]);
    assert_eq!(m.statistics, vec!["rms-delay-ccdf"]);
    let c = Curve::from_text(&fs::read_to_string(dir.path().join("rms_delay_ccdf.txt")).unwrap()).unwrap();
    assert_eq!(c.statistic, "rms-delay-ccdf");
    assert_eq!(c.meta_value("scenario"), Some("mmwave_3d"));
    assert_eq!(c.meta_value("realizations"), Some("3"));
    assert!(c.y.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(inventory(&m), files_on_disk(dir.path()));

    let on_disk = RunManifest::load(dir.path()).unwrap();
    assert_eq!(on_disk, m);
}

#[test]
fn every_statistic_on_small_run() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), PresetName::Hst3d, vec![1, 2], 0.05);
    let sel: Vec<String> =
        ["acf", "space-ccf", "stationary-interval-ccdf", "coherence-bandwidth-cdf"].iter().map(|s| s.to_string()).collect();
    let m = cmd_stats(dir.path(), &sel).unwrap();
    for f in ["acf.txt", "space_ccf.txt", "stationary_interval_ccdf.txt", "coherence_bandwidth_cdf.txt"] {
        assert!(inventory(&m).contains(f), "{f}");
    }
    let acf = Curve::from_text(&fs::read_to_string(dir.path().join("acf.txt")).unwrap()).unwrap();
    assert!((acf.y[0] - 1.0).abs() < 1e-9);
    let ccf = Curve::from_text(&fs::read_to_string(dir.path().join("space_ccf.txt")).unwrap()).unwrap();
    assert_eq!(ccf.x, vec![0.0, 1.0]);
    assert_eq!(inventory(&m), files_on_disk(dir.path()));
}

#[test]
fn aps_windows_on_large_array() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), PresetName::MmwaveMassive2d, vec![4], 0.002);
    let m = cmd_stats(dir.path(), &["aps".into()]).unwrap();
    let aps: Vec<_> = m.files.iter().filter(|f| f.path.starts_with("aps_w")).collect();
    // 32 antennas, windows of 8 with stride 1
    assert_eq!(aps.len(), 25);
    let c = Curve::from_text(&fs::read_to_string(dir.path().join("aps_w00.txt")).unwrap()).unwrap();
    assert_eq!(c.x.len(), 361);
    let peak = c.y.iter().cloned().fold(0.0, f64::max);
    assert!((peak - 1.0).abs() < 1e-12);
    assert!(c.y.iter().all(|&v| v > 0.0));
}

fn write_fit_inputs(dir: &Path, values: Vec<f64>, threshold: f64) -> (std::path::PathBuf, std::path::PathBuf) {
    let cfg = preset(PresetName::Mmwave3d);
    let settings = StatisticSettings { duration: 0.05, dt: 1e-3, every: 10, max_separation: 8 };
    let seeds: Vec<u64> = (1..=6).collect();
    let target = synthesize_target(StatisticKind::RmsDelayCcdf, &cfg, &seeds, &settings).unwrap();
    let spec = GridSpec {
        threshold,
        seeds,
        settings,
        axes: vec![GridAxis { param: Param::VirtualLinkCoherence, values }],
    };
    let (t, g) = (dir.join("target.txt"), dir.join("grid.toml"));
    fs::write(&t, target.to_curve().to_text()).unwrap();
    fs::write(&g, spec.to_toml().unwrap()).unwrap();
    (t, g)
}

#[test]
fn fit_recovers_generating_value() {
    let dir = tempfile::tempdir().unwrap();
    let (target, grid) = write_fit_inputs(dir.path(), vec![2.0, 7.0, 20.0], 1e-12);
    let out = dir.path().join("fit");
    let report = cmd_fit(&FitArgs { scenario: Scenario::Preset(PresetName::Mmwave3d), target, grid, out: out.clone() })
        .unwrap();
    assert_eq!(report.best, vec![7.0]);
    assert_eq!(report.epsilon, 0.0);
    assert!(report.early_stopped);
    assert_eq!(report.table.len(), 2);
    let text = fs::read_to_string(out.join("fit_report.txt")).unwrap();
    assert!(text.contains("fitted.virtual_link_coherence: 7.000000000000e0"));
    assert!(text.contains("threshold_met: true"));
    let m = RunManifest::load(&out).unwrap();
    assert_eq!(inventory(&m), files_on_disk(&out));
}

#[test]
fn single_point_grid_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let (target, grid) = write_fit_inputs(dir.path(), vec![3.0], 1e-12);
    let out = dir.path().join("fit");
    let err = cmd_fit(&FitArgs { scenario: Scenario::Preset(PresetName::Mmwave3d), target, grid, out: out.clone() })
        .unwrap_err();
    assert!(matches!(err, CliError::ThresholdNotMet { .. }));
    assert_eq!(err.exit_code(), 4);
    let text = fs::read_to_string(out.join("fit_report.txt")).unwrap();
    let rows: Vec<&str> = text.lines().skip_while(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 1);
    assert!(text.contains("threshold_met: false"));
}

#[test]
fn target_without_header_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let (_, grid) = write_fit_inputs(dir.path(), vec![7.0], 1e-12);
    let target = dir.path().join("bad.txt");
    fs::write(&target, "\n1e-8 0.9\n2e-8 0.5\n").unwrap();
    let err = cmd_fit(&FitArgs {
        scenario: Scenario::Preset(PresetName::Mmwave3d),
        target,
        grid,
        out: dir.path().join("fit"),
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("line 2"), "{err}");
    assert!(TargetCurve::from_text("# statistic: rms-delay-ccdf\n1e-8 0.9\n1e-8 0.5\n").is_err());
}

#[test]
fn binary_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");

    let ok = gbsm().args(["presets"]).output().unwrap();
    assert!(ok.status.success());
    let listing = String::from_utf8(ok.stdout).unwrap();
    for p in PresetName::ALL {
        assert!(listing.contains(p.as_str()));
    }

    let s = gbsm().args(["simulate", "--preset", "nowhere", "--out"]).arg(&out).output().unwrap().status;
    assert_eq!(s.code(), Some(2));

    let s = gbsm()
        .args(["simulate", "--preset", "hst_3d", "--seeds", "1..3", "--duration", "0.01", "--out"])
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert_eq!(s.code(), Some(0));
    assert_eq!(RunManifest::load(&out).unwrap().seeds, vec![1, 2]);

    let s = gbsm().args(["stats", "--stats", "bogus", "--out"]).arg(&out).output().unwrap().status;
    assert_eq!(s.code(), Some(2));

    let s = gbsm().args(["stats", "--stats", "acf", "--out"]).arg(dir.path().join("missing")).output().unwrap().status;
    assert_eq!(s.code(), Some(3));

    let (target, grid) = write_fit_inputs(dir.path(), vec![3.0], 1e-12);
    let s = gbsm()
        .args(["fit", "--preset", "mmwave_3d", "--target"])
        .arg(&target)
        .arg("--grid")
        .arg(&grid)
        .arg("--out")
        .arg(dir.path().join("fit"))
        .output()
        .unwrap()
        .status;
    assert_eq!(s.code(), Some(4));

    let s = gbsm().args(["reproduce", "fig7", "--out"]).arg(dir.path().join("r")).output().unwrap().status;
    assert_eq!(s.code(), Some(2));
}

#[test]
fn config_file_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = preset(PresetName::V2v2d);
    cfg.duration = 0.004;
    let path = dir.path().join("v2v.toml");
    fs::write(&path, cfg.to_toml().unwrap()).unwrap();
    let out = dir.path().join("run");
    let m = cmd_simulate(&SimulateArgs {
        scenario: Scenario::File(path.clone()),
        seeds: None,
        duration: None,
        dt: None,
        out: out.clone(),
        format: DumpFormat::Binary,
    })
    .unwrap();
    assert_eq!(m.config_path.as_deref(), Some(path.to_str().unwrap()));
    assert_eq!(m.seeds, vec![cfg.seed]);
    assert_eq!(m.scenario_config().unwrap(), cfg);
    let snaps = read_binary(&mut fs::File::open(out.join(&m.dumps[0])).unwrap()).unwrap();
    assert_eq!(snaps.len(), 4);

    fs::write(&path, "carrier_frequency = -1\n").unwrap();
    let err = cmd_simulate(&SimulateArgs {
        scenario: Scenario::File(path),
        seeds: None,
        duration: None,
        dt: None,
        out,
        format: DumpFormat::Binary,
    })
    .unwrap_err();
    assert_eq!(err.exit_code(), 2);
}
