use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use phasefront_runner::compare::compare;
use phasefront_runner::error::{RunnerError, EXIT_INPUT};
use phasefront_runner::presets::{description, load_preset, PRESETS};
use phasefront_runner::run::{execute, output_dir, RunContext};
use phasefront_runner::{load_config, ScenarioConfig};

#[derive(Parser)]
#[command(name = "phasefront", version, about = "Moving-boundary models and their state estimators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a plant-only scenario.
    Simulate(RunArgs),
    /// Run an estimator scenario.
    Observe(RunArgs),
    /// Compare the metrics of two run directories.
    Compare {
        run_a: PathBuf,
        run_b: PathBuf,
        /// Also write comparison.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the bundled presets.
    ListPresets,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario TOML file.
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Bundled preset name.
    #[arg(long)]
    preset: Option<String>,
    /// Noise seed, replacing the config's.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Halt Stefan runs on the first temperature-sign violation.
    #[arg(long)]
    strict_validity: bool,
}

fn run(args: RunArgs, estimator: bool) -> Result<i32, RunnerError> {
    let (cfg, name): (ScenarioConfig, String) = match (&args.config, &args.preset) {
        (Some(path), _) => (load_config(path)?, path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned())),
        (None, Some(p)) => (load_preset(p)?, p.clone()),
        (None, None) => unreachable!("clap requires a source"),
    };
    if cfg.mode.is_estimator() != estimator {
        let want = if estimator { "observe" } else { "simulate" };
        return Err(RunnerError::Config(format!("mode `{}` does not belong to `{want}`", cfg.mode.name())));
    }
    let ctx = RunContext { preset: args.preset.clone(), seed: args.seed, strict_validity: args.strict_validity };
    let dir = output_dir(&cfg, args.out.as_deref(), &name);
    let out = execute(&cfg, &ctx)?;
    out.write(&dir)?;
    if let Some(h) = &out.summary.halt {
        eprintln!("halted at t = {} s: {}", h.time, h.reason);
    }
    println!("{} samples written to {}", out.records.len(), dir.display());
    Ok(out.exit_code())
}

fn dispatch(cmd: Command) -> Result<i32, RunnerError> {
    match cmd {
        Command::Simulate(a) => run(a, false),
        Command::Observe(a) => run(a, true),
        Command::Compare { run_a, run_b, out } => {
            let cmp = compare(&run_a, &run_b)?;
            print!("{}", cmp.table());
            if let Some(dir) = out {
                write_json(&dir, &cmp)?;
            }
            Ok(0)
        }
        Command::ListPresets => {
            for (name, text) in PRESETS {
                println!("{name:<26} {}", description(text));
            }
            Ok(0)
        }
    }
}

fn write_json(dir: &Path, value: &impl serde::Serialize) -> Result<(), RunnerError> {
    std::fs::create_dir_all(dir).map_err(|e| RunnerError::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join("comparison.json");
    let text = serde_json::to_string_pretty(value).map_err(|e| RunnerError::Records(e.to_string()))?;
    std::fs::write(&path, text + "\n").map_err(|e| RunnerError::Io(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Usage errors are input errors; help and version are not errors.
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT as u8 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
