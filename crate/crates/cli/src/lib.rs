//! Command-line front end for the `ntpm` scenarios.
//!
//! Exit codes: 0 success, 1 invalid input or configuration, 2 a failed
//! verification.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ntpm_core::scenarios::figures::{
    fig2_config, fig_a3_config, monte_carlo_sweep, reproduce_fig2, reproduce_fig_a2, reproduce_fig_a3, sweep,
};
use ntpm_core::scenarios::{run_suite, CsvTable, ScenarioConfig};
use ntpm_core::Error;

#[derive(Parser, Debug)]
#[command(
    name = "ntpm",
    version,
    about = "Work statistics under non-ideal energy measurements"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a scenario with a single grid point.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate every point of a scenario grid.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Regenerate the data behind one of the driven-atom figures.
    Figure {
        which: Figure,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
    },
    /// Run the invariant suite.
    Verify {
        #[arg(long)]
        quick: bool,
    },
    /// Compare Monte-Carlo estimates with the analytic values.
    Mc {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        /// Overrides `mc.seed` from the config.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Figure {
    #[value(name = "fig2")]
    Fig2,
    #[value(name = "figA2")]
    FigA2,
    #[value(name = "figA3")]
    FigA3,
}

impl Figure {
    fn file_name(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2.csv",
            Figure::FigA2 => "figA2.csv",
            Figure::FigA3 => "figA3.csv",
        }
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::VerificationFailed(_) => 2,
        _ => 1,
    }
}

/// Writes to `--out` (a directory), else to `outputs.csv`, else to stdout.
fn emit(
    table: &CsvTable,
    out_dir: Option<&Path>,
    cfg_csv: Option<&Path>,
    default_name: &str,
) -> Result<Option<PathBuf>, Error> {
    let target = match (out_dir, cfg_csv) {
        (Some(dir), csv) => {
            std::fs::create_dir_all(dir)?;
            let name = csv
                .and_then(|p| p.file_name())
                .map(PathBuf::from)
                .unwrap_or_else(|| default_name.into());
            Some(dir.join(name))
        }
        (None, Some(csv)) => Some(csv.to_path_buf()),
        (None, None) => None,
    };
    match &target {
        Some(path) => table.write_atomic(path)?,
        None => std::io::stdout().write_all(table.render().as_bytes())?,
    }
    Ok(target)
}

fn run(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let points = cfg.grid().len();
            if points != 1 {
                return Err(Error::InvalidConfig(format!(
                    "run evaluates one grid point, the config has {points}; use sweep"
                )));
            }
            let table = sweep(&cfg, 1)?;
            report(emit(&table, out.as_deref(), cfg.outputs.csv.as_deref(), "run.csv")?);
        }
        Command::Sweep { config, out, parallel } => {
            let cfg = ScenarioConfig::from_file(&config)?;
            let table = sweep(&cfg, parallel)?;
            report(emit(&table, out.as_deref(), cfg.outputs.csv.as_deref(), "sweep.csv")?);
        }
        Command::Figure { which, out, parallel } => {
            let table = match which {
                Figure::Fig2 => reproduce_fig2(&fig2_config(), parallel)?,
                Figure::FigA2 => reproduce_fig_a2(&fig2_config(), parallel)?,
                Figure::FigA3 => reproduce_fig_a3(&fig_a3_config(), parallel)?,
            };
            report(emit(&table, Some(&out), None, which.file_name())?);
        }
        Command::Verify { quick } => {
            let results = run_suite(quick);
            let mut failed = 0;
            for r in &results {
                println!("{} {:<26} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
                failed += usize::from(!r.passed);
            }
            println!("{} of {} checks passed", results.len() - failed, results.len());
            if failed > 0 {
                return Ok(2);
            }
        }
        Command::Mc {
            config,
            out,
            parallel,
            seed,
        } => {
            let mut cfg = ScenarioConfig::from_file(&config)?;
            match (cfg.mc.as_mut(), seed) {
                (Some(mc), Some(s)) => mc.seed = s,
                (None, _) => return Err(Error::InvalidConfig("the mc section is required".into())),
                _ => {}
            }
            let table = monte_carlo_sweep(&cfg, parallel)?;
            report(emit(&table, out.as_deref(), cfg.outputs.csv.as_deref(), "mc.csv")?);
            let worst = ["w_z", "jarzynski_z"]
                .iter()
                .flat_map(|c| table.column(c).unwrap_or_default())
                .fold(0.0, f64::max);
            if worst.is_nan() || worst >= 4.0 {
                eprintln!("error: sampled estimate {worst:.2} standard errors from the analytic value");
                return Ok(2);
            }
        }
    }
    Ok(0)
}

fn report(path: Option<PathBuf>) {
    if let Some(p) = path {
        eprintln!("wrote {}", p.display());
    }
}

/// Parses `argv` (including the program name) and runs the command.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
