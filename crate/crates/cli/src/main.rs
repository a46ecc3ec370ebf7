use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use holonomy_cli::config::{ConfigError, ConfigErrors};
use holonomy_cli::output::{report_json, write_outputs, Format};
use holonomy_cli::{apply_overrides, configure_threads, load_config, run_config, verify, CliError};
use holonomy_core::model::registered_families;

#[derive(Debug, Parser)]
#[command(name = "holonomy", version, about = "Geometric phases, holonomies and anyon charges from job files")]
struct Cli {
    /// Job file (TOML, one [[job]] table per computation).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.json and CSV tables; the report goes to stdout otherwise.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "both")]
    format: Format,
    /// Override the seed of every job.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the step count of holonomy and evolve jobs.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Only errors on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the registered Hamiltonian families.
    ListSystems,
    /// Run every job in a job file.
    Run {
        /// Job file; alternative to --config.
        path: Option<PathBuf>,
    },
    /// Run the built-in acceptance suite.
    Verify,
}

fn list_systems() {
    for f in registered_families() {
        println!("{}  (dimension {})", f.id, f.dimension);
        println!("    parameters: {}", f.parameters.join(", "));
        if !f.constants.is_empty() {
            let c: Vec<_> = f.constants.iter().map(|(n, v)| format!("{n} = {v}")).collect();
            println!("    constants:  {}", c.join(", "));
        }
        println!("    {}", f.description);
    }
}

fn run(cli: &Cli, path: Option<&PathBuf>) -> Result<(), CliError> {
    let Some(path) = path.or(cli.config.as_ref()) else {
        return Err(ConfigErrors(vec![ConfigError {
            path: "--config".into(),
            message: "no job file given".into(),
        }])
        .into());
    };
    let mut config = load_config(path)?;
    apply_overrides(&mut config, cli.seed, cli.steps)?;
    if cli.output.is_none() && cli.format == Format::Csv {
        return Err(ConfigErrors(vec![ConfigError {
            path: "--format".into(),
            message: "csv output needs --output <dir>".into(),
        }])
        .into());
    }
    log::info!("running {} job(s) from {}", config.jobs.len(), path.display());
    let reports = run_config(&config)?;
    for r in &reports {
        log::info!("job `{}` ({}) finished in {:.3} s", r.name, r.kind, r.wall_time_s);
    }
    match &cli.output {
        Some(dir) => {
            let written = write_outputs(dir, &reports, cli.format).map_err(|source| CliError::Io {
                path: dir.clone(),
                source,
            })?;
            for p in written {
                log::info!("wrote {}", p.display());
            }
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(report_json(&reports).as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })?;
        }
    }
    Ok(())
}

fn verify_all(quiet: bool) -> Result<(), CliError> {
    let mut failed = 0;
    for id in 1..=10 {
        let r = verify::run_criterion(id);
        if !r.passed {
            failed += 1;
        }
        if !quiet || !r.passed {
            println!("{}", r.line());
        }
    }
    if failed > 0 {
        return Err(CliError::Verify { failed, total: 10 });
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let result = configure_threads(std::env::var("HOLONOMY_THREADS").ok().as_deref())
        .map_err(CliError::from)
        .and_then(|()| match &cli.command {
            Command::ListSystems => {
                list_systems();
                Ok(())
            }
            Command::Run { path } => run(&cli, path.as_ref()),
            Command::Verify => verify_all(cli.quiet),
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprint!("error: {e}");
            if !matches!(e, CliError::Config(_)) {
                eprintln!();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
