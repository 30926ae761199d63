use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gbsm::experiments::Figure;
use gbsm_cli::{
    cmd_fit, cmd_reproduce, cmd_simulate, cmd_stats, parse_seeds, preset_listing, CliError, CliResult, DumpFormat,
    FitArgs, ReproduceArgs, Scenario, SimulateArgs,
};

#[derive(Parser)]
#[command(name = "gbsm", version, about = "Non-stationary MIMO channel simulator")]
struct Cli {
    /// Worker threads for realizations (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct ScenarioArg {
    /// Scenario TOML file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in preset name (see `gbsm presets`).
    #[arg(long)]
    preset: Option<String>,
}

impl ScenarioArg {
    fn resolve(&self) -> CliResult<Scenario> {
        match (&self.config, &self.preset) {
            (Some(p), _) => Ok(Scenario::File(p.clone())),
            (None, Some(name)) => Ok(Scenario::Preset(name.parse().map_err(|e: gbsm::GbsmError| CliError::Config(e.to_string()))?)),
            (None, None) => Err(CliError::Config("need --config or --preset".into())),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run realizations and dump their snapshots.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// `7`, `1,2,3` or `0..8`.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Write text dumps instead of binary ones.
        #[arg(long)]
        text: bool,
    },
    /// Compute statistics over the dumps of a simulate run.
    Stats {
        /// Directory holding the simulate manifest.
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated statistic names.
        #[arg(long, value_delimiter = ',')]
        stats: Vec<String>,
    },
    /// Fit parameters to a target curve by grid search.
    Fit {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Emit the data of one figure (fig4, fig5, fig6, fig8).
    Reproduce {
        figure: String,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        duration: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// List the built-in presets.
    Presets,
}

fn seeds(s: &Option<String>) -> CliResult<Option<Vec<u64>>> {
    s.as_deref().map(parse_seeds).transpose()
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate { scenario, seeds: s, duration, dt, out, text } => {
            let args = SimulateArgs {
                scenario: scenario.resolve()?,
                seeds: seeds(&s)?,
                duration,
                dt,
                out,
                format: if text { DumpFormat::Text } else { DumpFormat::Binary },
            };
            let m = cmd_simulate(&args)?;
            println!("{} realizations written to {}", m.dumps.len(), m.output_dir);
        }
        Command::Stats { out, stats } => {
            let selection: Vec<String> = stats.into_iter().filter(|s| !s.is_empty()).collect();
            let m = cmd_stats(&out, &selection)?;
            println!("{} files listed in {}/manifest.json", m.files.len(), m.output_dir);
        }
        Command::Fit { scenario, target, grid, out } => {
            let args = FitArgs { scenario: scenario.resolve()?, target, grid, out: out.clone() };
            let result = cmd_fit(&args);
            println!("report written to {}", out.join("fit_report.txt").display());
            let report = result?;
            print!("{}", report.to_text());
        }
        Command::Reproduce { figure, seeds: s, duration, dt, out } => {
            let figure: Figure = figure.parse().map_err(|e: gbsm::GbsmError| CliError::Config(e.to_string()))?;
            let m = cmd_reproduce(&ReproduceArgs { figure, seeds: seeds(&s)?, duration, dt, out })?;
            for f in &m.files {
                println!("{} {}", f.sha256, f.path);
            }
        }
        Command::Presets => print!("{}", preset_listing()?),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
