use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expcli::config::parse_config_with;
use expcli::output::{write_recovery_csv, write_signal_csv, write_table_csv};
use expcli::runner::{build_model, graph_seed, rep_seed};
use expcli::{
    run_constructions, run_independent, run_misspec, run_recovery, run_signal_curves, ConfigError, Construction,
    ConstructionParams, ExperimentConfig, MethodSpec, RunError,
};
use klbss::semgen::write_model_text;

#[derive(Parser)]
#[command(name = "klbss", about = "Support-recovery experiments for Gaussian linear models with SEM designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Replaces the configured method list; `name` or `name@beta_min`.
    #[arg(long = "method")]
    methods: Vec<String>,
    /// Abort with exit code 3 on the first estimator failure.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Exact-recovery frequencies over the configured grid.
    Recover(Common),
    /// Full klBSS under a grid of assumed beta-min values.
    Misspec(Common),
    /// Empty graph with a high-variance non-support block.
    Independent(Common),
    /// Analytic signal curves on the two-layer example.
    Signals {
        #[arg(long, default_value_t = 12)]
        s: usize,
        #[arg(long, default_value_t = 0.1)]
        beta_min: f64,
        #[arg(long, default_value_t = 5.0)]
        beta_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report tables for the named constructions.
    Construct {
        /// prop43, thm51 or gpc_bound.
        which: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes the first replication's model in text form.
    Genmodel(Common),
}

fn load(common: &Common, base: ExperimentConfig) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &common.config {
        Some(path) => parse_config_with(path, base)?,
        None => base,
    };
    if let Some(seed) = common.seed {
        cfg.base_seed = seed;
    }
    if common.threads.is_some() {
        cfg.threads = common.threads;
    }
    if common.out.is_some() {
        cfg.output_path = common.out.clone();
    }
    if !common.methods.is_empty() {
        cfg.methods = common
            .methods
            .iter()
            .map(|m| {
                MethodSpec::parse(m)
                    .ok_or_else(|| ConfigError { line: 0, field: "method".into(), msg: format!("unknown method `{m}`") })
            })
            .collect::<Result<_, _>>()?;
    }
    cfg.strict |= common.strict;
    cfg.validate()?;
    Ok(cfg)
}

fn sink(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Recover(c) => {
            let cfg = load(&c, ExperimentConfig::default())?;
            let rows = run_recovery(&cfg)?;
            write_recovery_csv(sink(cfg.output_path.as_ref())?, &rows)?;
        }
        Command::Misspec(c) => {
            let cfg = load(&c, ExperimentConfig::misspec_defaults())?;
            let rows = run_misspec(&cfg)?;
            write_recovery_csv(sink(cfg.output_path.as_ref())?, &rows)?;
        }
        Command::Independent(c) => {
            let cfg = load(&c, ExperimentConfig::independent_defaults())?;
            let rows = run_independent(&cfg)?;
            write_recovery_csv(sink(cfg.output_path.as_ref())?, &rows)?;
        }
        Command::Signals { s, beta_min, beta_max, out } => {
            if s == 0 || !(beta_min > 0.0 && beta_max > 0.0) {
                return Err(ConfigError { line: 0, field: "s".into(), msg: "need s >= 1 and positive betas".into() }.into());
            }
            let rows = run_signal_curves(s, beta_min, beta_max)?;
            write_signal_csv(sink(out.as_ref())?, &rows)?;
        }
        Command::Construct { which, out } => {
            let which = Construction::parse(&which).ok_or_else(|| ConfigError {
                line: 0,
                field: "which".into(),
                msg: format!("unknown construction `{which}`"),
            })?;
            let table = run_constructions(which, &ConstructionParams::default())?;
            write_table_csv(sink(out.as_ref())?, &table)?;
        }
        Command::Genmodel(c) => {
            let cfg = load(&c, ExperimentConfig::default())?;
            let seed = rep_seed(&cfg, cfg.n_grid[0], 0);
            let (spec, model) = build_model(&cfg, graph_seed(&cfg, seed))?;
            let mut w = sink(cfg.output_path.as_ref())?;
            w.write_all(write_model_text(&spec, &model).as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
