//! Commands behind the `gbsm` binary: batch simulation to snapshot dumps,
//! statistics over dumps, figure data and parameter fitting. Every command
//! leaves a `manifest.json` in its output directory listing the emitted
//! files with their SHA-256 digests.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use gbsm::channel::run_with;
use gbsm::estimation::{grid_search, FitReport, GridSpec, ParameterGrid, TargetCurve};
use gbsm::experiments::{
    acf_of_ensemble, aps_grid, coherence_bandwidths_of_ensemble, degrees, distribution_curve, reproduce,
    rms_delay_spreads_of_ensemble, space_ccf_of_ensemble, stationary_intervals_of_ensemble, ApsSetup, Figure, Sampling,
};
use gbsm::export;
use gbsm::scenarios::{preset, PresetName};
use gbsm::stats::{Curve, DistributionMode};
use gbsm::{CirSnapshot, GbsmError, ScenarioConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("fit threshold not met: epsilon {epsilon:e} > {threshold:e}")]
    ThresholdNotMet { epsilon: f64, threshold: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::ThresholdNotMet { .. } => 4,
        }
    }
}

impl From<GbsmError> for CliError {
    fn from(e: GbsmError) -> Self {
        match e {
            GbsmError::Io(io) => CliError::Io(io),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Config(format!("manifest: {e}"))
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// One emitted file, relative to the output directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Record of a run; together with the embedded configuration it fully
/// determines the emitted files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub scenario: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config_path: Option<String>,
    /// Scenario configuration as TOML.
    pub config: String,
    pub seeds: Vec<u64>,
    pub duration: f64,
    pub dt: f64,
    pub format: DumpFormat,
    pub statistics: Vec<String>,
    pub output_dir: String,
    /// Realization dump per seed, in seed order.
    pub dumps: Vec<String>,
    pub files: Vec<FileEntry>,
}

impl RunManifest {
    pub fn load(dir: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST))?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn scenario_config(&self) -> CliResult<ScenarioConfig> {
        Ok(ScenarioConfig::from_toml(&self.config)?)
    }

    fn save(&self, dir: &Path) -> CliResult<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        fs::write(dir.join(MANIFEST), text)?;
        Ok(())
    }

    fn record(&mut self, dir: &Path, rel: &str) -> CliResult<()> {
        let entry = digest(dir, rel)?;
        self.files.retain(|f| f.path != entry.path);
        self.files.push(entry);
        self.files.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DumpFormat {
    Binary,
    Text,
}

fn digest(dir: &Path, rel: &str) -> CliResult<FileEntry> {
    let bytes = fs::read(dir.join(rel))?;
    Ok(FileEntry { path: rel.to_string(), sha256: hex::encode(Sha256::digest(&bytes)), bytes: bytes.len() as u64 })
}

/// Where the scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Preset(PresetName),
    File(PathBuf),
}

impl Scenario {
    pub fn load(&self) -> CliResult<(ScenarioConfig, Option<String>)> {
        match self {
            Scenario::Preset(p) => Ok((preset(*p), None)),
            Scenario::File(path) => {
                let text = fs::read_to_string(path)?;
                Ok((ScenarioConfig::from_toml(&text)?, Some(path.display().to_string())))
            }
        }
    }
}

/// Parse `3`, `1,4,9` or the half-open range `0..8`.
pub fn parse_seeds(text: &str) -> CliResult<Vec<u64>> {
    let bad = || CliError::Config(format!("invalid seed list '{text}'"));
    let seeds: Vec<u64> = if let Some((a, b)) = text.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().parse().map_err(|_| bad())?;
        (a..b).collect()
    } else {
        text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect::<CliResult<_>>()?
    };
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub scenario: Scenario,
    pub seeds: Option<Vec<u64>>,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub out: PathBuf,
    pub format: DumpFormat,
}

fn dump_name(seed: u64, format: DumpFormat) -> String {
    match format {
        DumpFormat::Binary => format!("realization_{seed}.bin"),
        DumpFormat::Text => format!("realization_{seed}.txt"),
    }
}

fn write_dump(cfg: &ScenarioConfig, seed: u64, duration: f64, dt: f64, path: &Path, format: DumpFormat) -> CliResult<()> {
    let mut out = BufWriter::new(File::create(path)?);
    match format {
        DumpFormat::Binary => {
            export::write_header(&mut out)?;
            run_with(cfg, duration, dt, seed, |s| export::write_record(&mut out, &s.snapshot()?))?;
        }
        DumpFormat::Text => {
            let mut first = true;
            run_with(cfg, duration, dt, seed, |s| {
                let snap = s.snapshot()?;
                if first {
                    export::write_text(&mut out, std::slice::from_ref(&snap))?;
                    first = false;
                } else {
                    let mut buf = Vec::new();
                    export::write_text(&mut buf, std::slice::from_ref(&snap))?;
                    let body = buf.iter().position(|&b| b == b'\n').map_or(&buf[..], |i| &buf[i + 1..]);
                    out.write_all(body)?;
                }
                Ok(())
            })?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Run one realization per seed and dump its snapshots.
pub fn cmd_simulate(args: &SimulateArgs) -> CliResult<RunManifest> {
    let (cfg, config_path) = args.scenario.load()?;
    let seeds = args.seeds.clone().unwrap_or_else(|| vec![cfg.seed]);
    if (1..seeds.len()).any(|i| seeds[..i].contains(&seeds[i])) {
        return Err(CliError::Config("duplicate seed".into()));
    }
    let duration = args.duration.unwrap_or(cfg.duration);
    let dt = args.dt.unwrap_or(cfg.dt);
    gbsm::channel::sample_count(duration, dt)?;
    fs::create_dir_all(&args.out)?;
    let names: Vec<String> = seeds.iter().map(|&s| dump_name(s, args.format)).collect();
    {
        use rayon::prelude::*;
        seeds
            .par_iter()
            .zip(&names)
            .map(|(&seed, name)| write_dump(&cfg, seed, duration, dt, &args.out.join(name), args.format))
            .collect::<CliResult<Vec<()>>>()?;
    }
    let mut manifest = RunManifest {
        command: "simulate".into(),
        scenario: cfg.name.clone(),
        config_path,
        config: cfg.to_toml()?,
        seeds,
        duration,
        dt,
        format: args.format,
        statistics: Vec::new(),
        output_dir: args.out.display().to_string(),
        dumps: names.clone(),
        files: Vec::new(),
    };
    for n in &names {
        manifest.record(&args.out, n)?;
    }
    manifest.save(&args.out)?;
    Ok(manifest)
}

/// Statistics understood by [`cmd_stats`].
pub const STATISTICS: [&str; 6] =
    ["acf", "space-ccf", "stationary-interval-ccdf", "coherence-bandwidth-cdf", "rms-delay-ccdf", "aps"];

fn load_ensemble(dir: &Path, m: &RunManifest) -> CliResult<Vec<Vec<CirSnapshot>>> {
    if m.format != DumpFormat::Binary {
        return Err(CliError::Config("statistics need binary dumps".into()));
    }
    m.dumps
        .iter()
        .map(|d| {
            let mut r = BufReader::new(File::open(dir.join(d))?);
            Ok(export::read_binary(&mut r)?)
        })
        .collect()
}

fn censored_curve(statistic: &str, v: &[gbsm::stats::Censored], mode: DistributionMode) -> CliResult<Curve> {
    let x: Vec<f64> = v.iter().map(|c| c.value).collect();
    let censored = v.iter().filter(|c| c.censored).count();
    Ok(distribution_curve(statistic, &x, mode)?.with_meta("censored", censored))
}

fn write_curve(dir: &Path, m: &mut RunManifest, name: &str, curve: &Curve) -> CliResult<()> {
    fs::write(dir.join(name), curve.to_text())?;
    m.record(dir, name)
}

/// Compute the selected statistics over the dumps listed in the manifest
/// of `dir`, writing one curve file per statistic (one per antenna window
/// for `aps`).
pub fn cmd_stats(dir: &Path, selection: &[String]) -> CliResult<RunManifest> {
    for s in selection {
        if !STATISTICS.contains(&s.as_str()) {
            return Err(GbsmError::UnknownStatistic(s.clone()).into());
        }
    }
    let mut m = RunManifest::load(dir)?;
    let cfg = m.scenario_config()?;
    let ensemble = if selection.is_empty() { Vec::new() } else { load_ensemble(dir, &m)? };
    let scenario = m.scenario.clone();
    for stat in selection {
        let tag = |c: Curve| c.with_meta("scenario", &scenario).with_meta("realizations", ensemble.len());
        match stat.as_str() {
            "acf" => {
                let r = acf_of_ensemble(&ensemble, 0, 0)?;
                let c = tag(Curve::new("acf", r.lags.clone(), r.magnitudes()));
                write_curve(dir, &mut m, "acf.txt", &c)?;
            }
            "space-ccf" => {
                let m_r = ensemble[0][0].rx_elements;
                let max = (m_r - 1).min(16);
                let y = space_ccf_of_ensemble(&ensemble, 0, max)?;
                let c = tag(Curve::new("space-ccf", (0..=max).map(|s| s as f64).collect(), y));
                write_curve(dir, &mut m, "space_ccf.txt", &c)?;
            }
            "stationary-interval-ccdf" => {
                let v = stationary_intervals_of_ensemble(&ensemble, &cfg)?;
                let c = tag(censored_curve(stat, &v, DistributionMode::Ccdf)?);
                write_curve(dir, &mut m, "stationary_interval_ccdf.txt", &c)?;
            }
            "coherence-bandwidth-cdf" => {
                let v = coherence_bandwidths_of_ensemble(&ensemble, &cfg)?;
                let c = tag(censored_curve(stat, &v, DistributionMode::Cdf)?);
                write_curve(dir, &mut m, "coherence_bandwidth_cdf.txt", &c)?;
            }
            "rms-delay-ccdf" => {
                let v = rms_delay_spreads_of_ensemble(&ensemble)?;
                let c = tag(distribution_curve(stat, &v, DistributionMode::Ccdf)?);
                write_curve(dir, &mut m, "rms_delay_ccdf.txt", &c)?;
            }
            "aps" => {
                let setup = ApsSetup::default();
                let grid = aps_grid(&ensemble[0][0], &setup)?;
                let x = degrees(&setup.angles);
                for (w, spectrum) in grid.iter().enumerate() {
                    let c = tag(Curve::new("aps", x.clone(), spectrum.clone()))
                        .with_meta("window_start", w * setup.stride)
                        .with_meta("window", setup.window)
                        .with_meta("subarray", setup.subarray);
                    write_curve(dir, &mut m, &format!("aps_w{:02}.txt", w * setup.stride), &c)?;
                }
            }
            _ => unreachable!("checked above"),
        }
        if !m.statistics.contains(stat) {
            m.statistics.push(stat.clone());
        }
    }
    m.save(dir)?;
    Ok(m)
}

#[derive(Debug, Clone)]
pub struct FitArgs {
    pub scenario: Scenario,
    pub target: PathBuf,
    pub grid: PathBuf,
    pub out: PathBuf,
}

/// Grid search against a target curve. The report is always written; the
/// error [`CliError::ThresholdNotMet`] is returned afterwards when the best
/// error exceeds the threshold.
pub fn cmd_fit(args: &FitArgs) -> CliResult<FitReport> {
    let (cfg, config_path) = args.scenario.load()?;
    let target = TargetCurve::from_text(&fs::read_to_string(&args.target)?)?;
    let spec = GridSpec::from_toml(&fs::read_to_string(&args.grid)?)?;
    let grid = ParameterGrid::from_spec(spec, cfg.clone())?;
    let report = grid_search(&grid, &target)?;
    fs::create_dir_all(&args.out)?;
    fs::write(args.out.join("fit_report.txt"), report.to_text())?;
    let mut m = RunManifest {
        command: "fit".into(),
        scenario: cfg.name.clone(),
        config_path,
        config: cfg.to_toml()?,
        seeds: grid.seeds.clone(),
        duration: grid.settings.duration,
        dt: grid.settings.dt,
        format: DumpFormat::Text,
        statistics: vec![target.kind.as_str().to_string()],
        output_dir: args.out.display().to_string(),
        dumps: Vec::new(),
        files: Vec::new(),
    };
    m.record(&args.out, "fit_report.txt")?;
    m.save(&args.out)?;
    if !report.threshold_met() {
        return Err(CliError::ThresholdNotMet { epsilon: report.epsilon, threshold: report.threshold });
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct ReproduceArgs {
    pub figure: Figure,
    pub seeds: Option<Vec<u64>>,
    pub duration: Option<f64>,
    pub dt: Option<f64>,
    pub out: PathBuf,
}

/// Seeds used when none are given: `1..=n` for the figure's default
/// ensemble size.
pub fn default_seeds(figure: Figure) -> Vec<u64> {
    (1..=figure.default_realizations() as u64).collect()
}

/// Emit the data behind a figure as curve files.
pub fn cmd_reproduce(args: &ReproduceArgs) -> CliResult<RunManifest> {
    let seeds = args.seeds.clone().unwrap_or_else(|| default_seeds(args.figure));
    let mut sampling: Sampling = args.figure.default_sampling();
    if let Some(d) = args.duration {
        sampling.duration = d;
    }
    if let Some(dt) = args.dt {
        sampling.dt = dt;
    }
    let curves = reproduce(args.figure, &seeds, sampling)?;
    fs::create_dir_all(&args.out)?;
    let cfg = preset(args.figure.preset());
    let mut m = RunManifest {
        command: format!("reproduce {}", args.figure),
        scenario: cfg.name.clone(),
        config_path: None,
        config: cfg.to_toml()?,
        seeds,
        duration: sampling.duration,
        dt: sampling.dt,
        format: DumpFormat::Text,
        statistics: curves.iter().map(|(_, c)| c.statistic.clone()).collect::<std::collections::BTreeSet<_>>().into_iter().collect(),
        output_dir: args.out.display().to_string(),
        dumps: Vec::new(),
        files: Vec::new(),
    };
    for (name, curve) in &curves {
        write_curve(&args.out, &mut m, &format!("{name}.txt"), curve)?;
    }
    m.save(&args.out)?;
    Ok(m)
}

/// `name: description` lines for every preset.
pub fn preset_listing() -> CliResult<String> {
    let mut rows = BTreeMap::new();
    for p in PresetName::ALL {
        let c = preset(p);
        rows.insert(
            p.as_str(),
            format!(
                "{:.3} GHz, D = {} m, {}x{} elements{}",
                c.carrier_frequency / 1e9,
                c.distance,
                c.rx.elements,
                c.tx.elements,
                if c.planar { ", planar" } else { "" }
            ),
        );
    }
    Ok(rows.into_iter().map(|(k, v)| format!("{k}: {v}\n")).collect())
}
