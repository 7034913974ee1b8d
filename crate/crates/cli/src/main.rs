use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use leaper_cli::commands::CliError;
use leaper_cli::config::{apply_override, validate_table, ConfigErrors, ConfigIssue, ReproduceTarget};
use leaper_cli::run;
use toml::{Table, Value};

/// Planar pushing: planning, RL training with planned resets, baselines, and
/// reproduction runs.
#[derive(Parser, Debug)]
#[command(name = "leaper", version)]
struct Cli {
    /// Experiment config file (TOML). Flags and `--set` take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set agent.lr_actor=0.002`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Run directory (default: $LEAPER_OUTPUT_ROOT/<command>).
    #[arg(long, global = true)]
    output_dir: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan a rearrangement trajectory per seed.
    Plan(RunArgs),
    /// Train goal-conditioned DDPG with hindsight replay and planned resets.
    Train(RunArgs),
    /// Evaluate a saved policy checkpoint.
    Evaluate(RunArgs),
    /// Run the open-loop, velocity-feedback and iLQR tracking controllers.
    Baseline(RunArgs),
    /// Cart-pole reset-distribution study.
    CartpoleStudy(RunArgs),
    /// Desk-scale reproduction of a figure or table.
    Reproduce {
        target: ReproduceTarget,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Validate a config file without running it.
    Check,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// Built-in layout id (1, 2, 3, reduced) or layout file.
    #[arg(long)]
    layout: Option<String>,
    /// Planning model: quasistatic, weld or dynamic.
    #[arg(long)]
    model: Option<String>,
    /// Probability of resetting to a planned state.
    #[arg(long)]
    alpha: Option<f64>,
    /// Seeds: `7`, `1..5` or `1,3,9`.
    #[arg(long, alias = "seed")]
    seeds: Option<String>,
    /// Training episode budget.
    #[arg(long)]
    episodes: Option<i64>,
    /// Evaluation trials per seed and controller.
    #[arg(long)]
    trials: Option<i64>,
    /// Use this planned trajectory instead of planning.
    #[arg(long)]
    trajectory: Option<PathBuf>,
    /// Policy checkpoint to evaluate.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

fn config_error(path: &str, message: String) -> CliError {
    CliError::Config(ConfigErrors(vec![ConfigIssue {
        path: path.to_string(),
        message,
    }]))
}

fn build_table(cli: &Cli) -> Result<(Table, Vec<(String, String)>), CliError> {
    let mut table = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| config_error("", format!("{}: {e}", p.display())))?;
            text.parse::<Table>()
                .map_err(|e| config_error("", format!("{}: {}", p.display(), e.to_string().trim_end())))?
        }
        None => Table::new(),
    };
    let mut put = |k: &str, v: Value| {
        table.insert(k.to_string(), v);
    };
    let args = match &cli.command {
        Some(Command::Plan(a)) => {
            put("command", "plan".into());
            Some(a)
        }
        Some(Command::Train(a)) => {
            put("command", "train".into());
            Some(a)
        }
        Some(Command::Evaluate(a)) => {
            put("command", "evaluate".into());
            Some(a)
        }
        Some(Command::Baseline(a)) => {
            put("command", "baseline".into());
            Some(a)
        }
        Some(Command::CartpoleStudy(a)) => {
            put("command", "cartpole-study".into());
            Some(a)
        }
        Some(Command::Reproduce { target, args }) => {
            put("command", "reproduce".into());
            put("target", target.name().into());
            Some(args)
        }
        Some(Command::Check) | None => None,
    };
    if let Some(a) = args {
        let path_str = |p: &PathBuf| Value::String(p.to_string_lossy().into_owned());
        if let Some(v) = &a.layout {
            put("layout", v.as_str().into());
        }
        if let Some(v) = &a.model {
            put("model", v.as_str().into());
        }
        if let Some(v) = a.alpha {
            put("alpha", v.into());
        }
        if let Some(v) = &a.seeds {
            put("seeds", v.as_str().into());
        }
        if let Some(v) = a.episodes {
            put("episodes", v.into());
        }
        if let Some(v) = a.trials {
            put("trials", v.into());
        }
        if let Some(v) = &a.trajectory {
            put("trajectory", path_str(v));
        }
        if let Some(v) = &a.checkpoint {
            put("checkpoint", path_str(v));
        }
    }
    if let Some(v) = &cli.output_dir {
        put("output_dir", Value::String(v.to_string_lossy().into_owned()));
    }
    let mut overrides = Vec::new();
    let mut issues = Vec::new();
    for s in &cli.set {
        match s.split_once('=') {
            Some((k, v)) => match apply_override(&mut table, k.trim(), v.trim()) {
                Ok(()) => overrides.push((k.trim().to_string(), v.trim().to_string())),
                Err(e) => issues.push(e),
            },
            None => issues.push(ConfigIssue {
                path: s.clone(),
                message: "expected KEY=VALUE".into(),
            }),
        }
    }
    if !issues.is_empty() {
        return Err(CliError::Config(ConfigErrors(issues)));
    }
    Ok((table, overrides))
}

fn main_inner(cli: &Cli) -> Result<(), CliError> {
    let (table, overrides) = build_table(cli)?;
    let mut cfg = validate_table(table)?;
    cfg.overrides = overrides.into_iter().collect();
    if matches!(cli.command, Some(Command::Check)) {
        println!("config ok: {}", cfg.command.name());
        return Ok(());
    }
    let quiet = cli.quiet;
    let report = run(&cfg, &mut |m| {
        if !quiet {
            eprintln!("{m}");
        }
    })?;
    for f in &report.manifest.files {
        println!("{}", report.dir.join(&f.path).display());
    }
    println!("{}", report.dir.join(leaper_cli::output::MANIFEST_FILE).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match main_inner(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
