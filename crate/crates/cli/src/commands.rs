//! Command dispatch. Every command writes into one run directory and ends by
//! writing its manifest.

use std::path::PathBuf;
use std::time::Instant;

use leaper_core::baselines::{
    cartpole_ilqr, cartpole_oracle_distribution, ilqr_track_solve, tracking_trials, CartPoleOracleConfig,
    ControllerKind, IlqrTracker, OpenLoop, OracleDistribution, Reference, TrackingResult, VelocityFeedback,
};
use leaper_core::env::{CartPoleState, EnvConfig, Layout, RearrangeEnv};
use leaper_core::planner::{plan, PlannedTrajectory, PlannerConfig};
use leaper_core::rl::DdpgAgent;
use leaper_core::rng::{stream, Stream};
use leaper_core::trainer::{
    cartpole_train, episodes_to_threshold, evaluate, format_episodes, percentile, train, Controller, KlSeries,
    LearningCurve, ResetMix, TrainConfig, TrainOutput,
};
use leaper_core::{IlqrError, ModelKind, PlanError, RlError, TrainError};
use thiserror::Error;

use crate::config::{CommandKind, ConfigErrors, ExperimentConfig, NamedMix, ReproduceTarget};
use crate::output::{output_root, RunManifest, RunOutput};

/// Success rate that counts as "learned" in episode-to-threshold summaries.
pub const SUCCESS_THRESHOLD: f64 = 0.8;
/// Default early-stop level for the controller comparison's policy.
pub const TABLE1_STOP_AT: f64 = 0.9;
/// Fixed seed for the cart-pole oracle rollouts, so every training seed is
/// compared against the same reference distribution.
pub const ORACLE_SEED: u64 = 0;
/// Fraction of the KL series, counted from the end, averaged into the
/// fixed-budget score.
pub const KL_TAIL_FRACTION: f64 = 0.25;

pub const CURVE_SCHEMA: &str = "leaper.curve/1";
pub const TRAIN_SUMMARY_SCHEMA: &str = "leaper.train_summary/1";
pub const THRESHOLD_SCHEMA: &str = "leaper.threshold/1";
pub const PLAN_SCHEMA: &str = "leaper.plan/1";
pub const EVAL_SCHEMA: &str = "leaper.evaluate/1";
pub const BASELINE_SCHEMA: &str = "leaper.baseline/1";
pub const CONTROLLERS_SCHEMA: &str = "leaper.controllers/1";
pub const KL_SCHEMA: &str = "leaper.kl/1";
pub const KL_SUMMARY_SCHEMA: &str = "leaper.kl_summary/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n{0}")]
    Config(ConfigErrors),
    #[error("planning failed: {0}")]
    Plan(#[from] PlanError),
    #[error("training failed: {0}")]
    Train(#[from] TrainError),
    #[error("iLQR failed: {0}")]
    Ilqr(#[from] IlqrError),
    #[error("checkpoint: {0}")]
    Checkpoint(#[from] RlError),
    #[error("{0}")]
    Env(#[from] leaper_core::EnvError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Plan(_) => 3,
            CliError::Train(_) => 4,
            _ => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Plan(_) => "planner",
            CliError::Train(_) => "training",
            CliError::Ilqr(_) => "baseline",
            CliError::Checkpoint(_) => "checkpoint",
            CliError::Env(_) => "environment",
            CliError::Io(_) => "io",
        }
    }

    /// Machine-readable error record.
    pub fn to_json(&self) -> serde_json::Value {
        let issues: Vec<_> = match self {
            CliError::Config(e) => e
                .0
                .iter()
                .map(|i| serde_json::json!({ "path": i.path, "message": i.message }))
                .collect(),
            _ => Vec::new(),
        };
        serde_json::json!({
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
                "issues": issues,
            }
        })
    }
}

impl From<ConfigErrors> for CliError {
    fn from(e: ConfigErrors) -> Self {
        CliError::Config(e)
    }
}

/// Progress sink; the binary prints to stderr, tests may discard.
pub type Log<'a> = &'a mut dyn FnMut(&str);

#[derive(Debug)]
pub struct RunReport {
    pub dir: PathBuf,
    pub manifest: RunManifest,
}

/// Default run directory name under the output root.
pub fn run_name(cfg: &ExperimentConfig) -> String {
    match (cfg.command, cfg.target) {
        (CommandKind::Reproduce, Some(t)) => format!("reproduce-{}", t.name()),
        (c, _) => c.name().to_string(),
    }
}

pub fn run_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.output_dir
        .clone()
        .unwrap_or_else(|| output_root().join(run_name(cfg)))
}

/// Executes a validated configuration.
pub fn run(cfg: &ExperimentConfig, log: Log) -> Result<RunReport, CliError> {
    let dir = run_dir(cfg);
    let mut out = RunOutput::new(dir.clone())?;
    match cfg.command {
        CommandKind::Plan => cmd_plan(cfg, &mut out, log)?,
        CommandKind::Train => cmd_train(cfg, &mut out, log)?,
        CommandKind::Evaluate => cmd_evaluate(cfg, &mut out, log)?,
        CommandKind::Baseline => cmd_baseline(cfg, &mut out, log)?,
        CommandKind::CartpoleStudy => cmd_cartpole(cfg, &cfg.mixes, &mut out, log)?,
        CommandKind::Reproduce => match cfg.target {
            Some(ReproduceTarget::Fig6Desk) => reproduce_fig6(cfg, &mut out, log)?,
            Some(ReproduceTarget::Table1Desk) => reproduce_table1(cfg, &mut out, log)?,
            Some(ReproduceTarget::Fig3Desk) => cmd_cartpole(cfg, &cfg.mixes, &mut out, log)?,
            None => unreachable!("validated configs name a target"),
        },
    }
    let snapshot = serde_json::to_value(cfg).map_err(std::io::Error::other)?;
    let manifest = out.finish(&run_name(cfg), snapshot)?;
    Ok(RunReport { dir, manifest })
}

fn layout(cfg: &ExperimentConfig, fallback: &str) -> Result<Layout, CliError> {
    Ok(Layout::load(cfg.layout.as_deref().unwrap_or(fallback))?)
}

fn fmt_f(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else {
        format_episodes(v)
    }
}

/// Plans under `model` with the seed's planner stream.
fn plan_seed(
    layout: &Layout,
    cfg: &ExperimentConfig,
    model: ModelKind,
    seed: u64,
    out: &mut RunOutput,
) -> Result<PlannedTrajectory, CliError> {
    let pc = PlannerConfig {
        model,
        ..cfg.planner.clone()
    };
    let mut rng = stream(seed, Stream::Planner);
    let clock = Instant::now();
    let (traj, _) = plan(layout, &layout.start, &layout.goal, &pc, &layout.nominal_params(), seed, &mut rng)?;
    out.record_time(&format!("plan.{}", model.as_str()), clock.elapsed().as_secs_f64());
    out.record_rng(seed, &format!("planner.{}", model.as_str()), &rng);
    Ok(traj)
}

/// The configured trajectory file, or a fresh plan.
fn trajectory_for(
    layout: &Layout,
    cfg: &ExperimentConfig,
    model: ModelKind,
    seed: u64,
    out: &mut RunOutput,
) -> Result<PlannedTrajectory, CliError> {
    match &cfg.trajectory {
        Some(p) => Ok(PlannedTrajectory::read(p)?),
        None => plan_seed(layout, cfg, model, seed, out),
    }
}

fn cmd_plan(cfg: &ExperimentConfig, out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let layout = layout(cfg, "1")?;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let traj = plan_seed(&layout, cfg, cfg.model, seed, out)?;
        let last = traj.states.last().expect("trajectory has a start state");
        let [tx, ty] = layout.target_position(last);
        let [gx, gy] = layout.goal.center();
        let name = format!("trajectory-seed{seed}.json");
        out.write_bytes(&name, traj.to_json().as_bytes())?;
        log(&format!("seed {seed}: {} edges, {:.1} s of motion", traj.len(), traj.durations.iter().sum::<f64>()));
        rows.push(vec![
            seed.to_string(),
            cfg.model.as_str().to_string(),
            traj.len().to_string(),
            traj.durations.iter().sum::<f64>().to_string(),
            ((tx - gx).hypot(ty - gy)).to_string(),
            name,
        ]);
    }
    out.write_csv(
        "plan.csv",
        PLAN_SCHEMA,
        &["seed", "model", "edges", "duration_s", "goal_distance_m", "trajectory"],
        rows,
    )?;
    Ok(())
}

/// One training run per seed. Writes a curve CSV and a checkpoint per seed
/// under `prefix`, and returns the curves.
#[allow(clippy::too_many_arguments)]
fn train_seeds(
    cfg: &ExperimentConfig,
    layout: &Layout,
    model: ModelKind,
    alpha: f64,
    stop_at: Option<f64>,
    config_id: &str,
    prefix: &str,
    out: &mut RunOutput,
    log: Log,
) -> Result<Vec<(TrainOutput, u64)>, CliError> {
    let env = EnvConfig::for_layout(layout);
    let tc = TrainConfig {
        episodes: cfg.episodes,
        eval_interval: cfg.train.eval_interval,
        eval_episodes: cfg.train.eval_episodes,
        updates_per_episode: cfg.train.updates_per_episode,
        her_k: cfg.train.her_k,
        reset: ResetMix::planned(alpha),
        stop_at,
        agent: cfg.agent.clone(),
    };
    let mut results = Vec::new();
    for &seed in &cfg.seeds {
        let dense = if alpha > 0.0 {
            let traj = trajectory_for(layout, cfg, model, seed, out)?;
            out.write_bytes(&format!("{prefix}trajectory-seed{seed}.json"), traj.to_json().as_bytes())?;
            Some(traj.dense_states(&layout.scene, &layout.nominal_params())?)
        } else {
            None
        };
        let clock = Instant::now();
        let result = train(layout, &env, &tc, dense.as_deref(), seed, config_id, &mut |p| {
            log(&format!("{config_id} seed {seed}: episode {:>5} success {:.2}", p.episode, p.success_rate))
        })?;
        out.record_time(&format!("train.{config_id}"), clock.elapsed().as_secs_f64());
        out.record_rng(seed, &format!("agent.{config_id}"), &result.agent_rng);
        out.write_csv(
            &format!("{prefix}curve-seed{seed}.csv"),
            CURVE_SCHEMA,
            &["episode", "success_rate"],
            result
                .curve
                .points
                .iter()
                .map(|p| [p.episode.to_string(), p.success_rate.to_string()]),
        )?;
        let ckpt = format!("{prefix}agent-seed{seed}.json");
        result
            .agent
            .save_checkpoint(Some(&result.agent_rng), &out.dir().join(&ckpt))?;
        out.register(&ckpt)?;
        results.push((result, seed));
    }
    Ok(results)
}

fn threshold_row(config_id: &str, curves: &[LearningCurve]) -> Vec<String> {
    let s = episodes_to_threshold(curves, SUCCESS_THRESHOLD);
    let reached = curves
        .iter()
        .filter(|c| c.first_crossing(SUCCESS_THRESHOLD).is_some())
        .count();
    vec![
        config_id.to_string(),
        SUCCESS_THRESHOLD.to_string(),
        curves.len().to_string(),
        reached.to_string(),
        fmt_f(s.median),
        fmt_f(s.p20),
        fmt_f(s.p80),
    ]
}

const THRESHOLD_HEADER: [&str; 7] = ["config", "threshold", "seeds", "reached", "median", "p20", "p80"];

fn cmd_train(cfg: &ExperimentConfig, out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let layout = layout(cfg, "reduced")?;
    let id = if cfg.alpha > 0.0 {
        format!("{}-alpha{}", cfg.model.as_str(), cfg.alpha)
    } else {
        "her".to_string()
    };
    let results = train_seeds(cfg, &layout, cfg.model, cfg.alpha, cfg.train.stop_at, &id, "", out, log)?;
    out.write_csv(
        "summary.csv",
        TRAIN_SUMMARY_SCHEMA,
        &[
            "seed",
            "episodes_run",
            "episodes_to_threshold",
            "final_success_rate",
            "resets_start",
            "resets_uniform",
            "resets_planned",
            "resets_oracle",
        ],
        results.iter().map(|(r, seed)| {
            let mut row = vec![
                seed.to_string(),
                r.episodes_run.to_string(),
                r.curve
                    .first_crossing(SUCCESS_THRESHOLD)
                    .map_or("not reached".to_string(), |e| e.to_string()),
                r.curve.points.last().map_or(0.0, |p| p.success_rate).to_string(),
            ];
            row.extend(r.reset_counts.iter().map(|c| c.to_string()));
            row
        }),
    )?;
    let curves: Vec<_> = results.into_iter().map(|(r, _)| r.curve).collect();
    out.write_csv("aggregate.csv", THRESHOLD_SCHEMA, &THRESHOLD_HEADER, [threshold_row(&id, &curves)])?;
    Ok(())
}

fn cmd_evaluate(cfg: &ExperimentConfig, out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let layout = layout(cfg, "reduced")?;
    let path = cfg.checkpoint.as_ref().expect("validated configs name a checkpoint");
    let (agent, _) = DdpgAgent::load_checkpoint(path)?;
    let mut policy = agent.policy();
    let env_cfg = EnvConfig::for_layout(&layout);
    let mut env = RearrangeEnv::new(layout, env_cfg)?;
    let mut rows = Vec::new();
    for &seed in &cfg.seeds {
        let mut rng = stream(seed, Stream::Eval);
        let rate = evaluate(&mut policy, &mut env, cfg.trials, &mut rng);
        out.record_rng(seed, "eval", &rng);
        log(&format!("seed {seed}: success {rate:.3} over {} episodes", cfg.trials));
        let successes = (rate * cfg.trials as f64).round() as usize;
        rows.push([seed.to_string(), cfg.trials.to_string(), successes.to_string(), rate.to_string()]);
    }
    out.write_csv("evaluate.csv", EVAL_SCHEMA, &["seed", "trials", "successes", "success_rate"], rows)?;
    Ok(())
}

/// Tracking controllers around the seed's planned reference, evaluated
/// under randomized physics.
fn baseline_seed(
    cfg: &ExperimentConfig,
    layout: &Layout,
    seed: u64,
    out: &mut RunOutput,
    log: Log,
) -> Result<Vec<TrackingResult>, CliError> {
    let traj = trajectory_for(layout, cfg, cfg.model, seed, out)?;
    out.write_bytes(&format!("trajectory-seed{seed}.json"), traj.to_json().as_bytes())?;
    let reference = Reference::from_trajectory(&traj, layout, &layout.nominal_params())?;
    let env = EnvConfig::for_layout(layout);
    let clock = Instant::now();
    let solution = ilqr_track_solve(&reference, layout, &env, &cfg.tracking)?;
    out.record_time("ilqr", clock.elapsed().as_secs_f64());
    log(&format!(
        "seed {seed}: iLQR {} iterations, converged {}",
        solution.iterations, solution.converged
    ));
    let limits = env.action_limits;
    let mut open = OpenLoop {
        controls: reference.controls.clone(),
        limits,
    };
    let mut feedback = VelocityFeedback {
        reference: reference.clone(),
        gain: cfg.tracking.velocity_gain,
        limits,
    };
    let mut ilqr = IlqrTracker { solution, limits };
    let mut rng = stream(seed, Stream::Baseline);
    let mut results = Vec::new();
    for kind in ControllerKind::ALL {
        let ctrl: &mut dyn Controller = match kind {
            ControllerKind::OpenLoop => &mut open,
            ControllerKind::VelocityFeedback => &mut feedback,
            ControllerKind::Ilqr => &mut ilqr,
        };
        let r = tracking_trials(kind, ctrl, &reference, layout, &env, cfg.trials, &mut rng)?;
        log(&format!("seed {seed}: {} success {:.3}", kind.name(), r.success_rate()));
        results.push(r);
    }
    out.record_rng(seed, "baseline", &rng);
    Ok(results)
}

fn rate_row(seed: &str, name: &str, trials: usize, successes: usize) -> [String; 5] {
    [
        seed.to_string(),
        name.to_string(),
        trials.to_string(),
        successes.to_string(),
        (successes as f64 / trials as f64).to_string(),
    ]
}

const RATE_HEADER: [&str; 5] = ["seed", "controller", "trials", "successes", "success_rate"];

/// Per-controller totals pooled over seeds, in first-seen order.
fn pooled(rows: &[(String, usize, usize)]) -> Vec<[String; 5]> {
    let mut names: Vec<&str> = Vec::new();
    for (n, _, _) in rows {
        if !names.contains(&n.as_str()) {
            names.push(n);
        }
    }
    names
        .iter()
        .map(|&n| {
            let (t, s) = rows
                .iter()
                .filter(|r| r.0 == n)
                .fold((0, 0), |acc, r| (acc.0 + r.1, acc.1 + r.2));
            rate_row("all", n, t, s)
        })
        .collect()
}

fn cmd_baseline(cfg: &ExperimentConfig, out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let layout = layout(cfg, "reduced")?;
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    for &seed in &cfg.seeds {
        for r in baseline_seed(cfg, &layout, seed, out, log)? {
            rows.push(rate_row(&seed.to_string(), r.kind.name(), r.trials, r.successes));
            totals.push((r.kind.name().to_string(), r.trials, r.successes));
        }
    }
    rows.extend(pooled(&totals));
    out.write_csv("baseline.csv", BASELINE_SCHEMA, &RATE_HEADER, rows)?;
    Ok(())
}

fn oracle_distribution(cfg: &ExperimentConfig) -> Result<OracleDistribution, CliError> {
    let c = &cfg.cartpole;
    let oracle = cartpole_ilqr(&c.env, &CartPoleOracleConfig::default(), &CartPoleState::default())?;
    let mut rng = stream(ORACLE_SEED, Stream::Baseline);
    Ok(cartpole_oracle_distribution(&c.env, &oracle, &c.grid, c.oracle_rollouts, &mut rng))
}

/// Mean KL over the last [`KL_TAIL_FRACTION`] of the series; single
/// measurements are noisy at desk-scale rollout counts.
pub fn tail_kl(series: &KlSeries) -> f64 {
    let n = series.points.len();
    if n == 0 {
        return f64::NAN;
    }
    let k = ((n as f64 * KL_TAIL_FRACTION).ceil() as usize).clamp(1, n);
    series.points[n - k..].iter().map(|p| p.kl).sum::<f64>() / k as f64
}

fn cmd_cartpole(cfg: &ExperimentConfig, mixes: &[NamedMix], out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let clock = Instant::now();
    let oracle = oracle_distribution(cfg)?;
    out.record_time("oracle", clock.elapsed().as_secs_f64());
    let mut kl_rows = Vec::new();
    let mut summary = Vec::new();
    for m in mixes {
        let mut finals = Vec::new();
        for &seed in &cfg.seeds {
            let clock = Instant::now();
            let (_, series) = cartpole_train(&cfg.cartpole, &m.mix(), &oracle, seed, &m.id)?;
            out.record_time(&format!("cartpole.{}", m.id), clock.elapsed().as_secs_f64());
            let score = tail_kl(&series);
            log(&format!("{} seed {seed}: KL {score:.3}", m.id));
            for p in &series.points {
                kl_rows.push([m.id.clone(), seed.to_string(), p.episode.to_string(), p.kl.to_string()]);
            }
            finals.push(score);
        }
        finals.sort_by(f64::total_cmp);
        summary.push([
            m.id.clone(),
            m.start.to_string(),
            m.uniform.to_string(),
            m.oracle.to_string(),
            finals.len().to_string(),
            percentile(&finals, 0.5).to_string(),
            percentile(&finals, 0.2).to_string(),
            percentile(&finals, 0.8).to_string(),
        ]);
    }
    out.write_csv("kl.csv", KL_SCHEMA, &["mix", "seed", "episode", "kl"], kl_rows)?;
    out.write_csv(
        "kl_summary.csv",
        KL_SUMMARY_SCHEMA,
        &["mix", "start", "uniform", "oracle", "seeds", "median_kl", "p20_kl", "p80_kl"],
        summary,
    )?;
    Ok(())
}

/// Configurations compared in the episodes-to-threshold study.
pub const FIG6_CONFIGS: [(&str, ModelKind, bool); 3] = [
    ("her", ModelKind::Quasistatic, false),
    ("weld", ModelKind::Weld, true),
    ("quasistatic", ModelKind::Quasistatic, true),
];

fn reproduce_fig6(cfg: &ExperimentConfig, out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let layout = layout(cfg, "reduced")?;
    let stop_at = cfg.train.stop_at.or(Some(SUCCESS_THRESHOLD));
    let mut table = Vec::new();
    let mut per_seed = Vec::new();
    for (id, model, planned) in FIG6_CONFIGS {
        let alpha = if planned { cfg.alpha } else { 0.0 };
        let results = train_seeds(cfg, &layout, model, alpha, stop_at, id, &format!("{id}/"), out, log)?;
        let curves: Vec<_> = results.into_iter().map(|(r, _)| r.curve).collect();
        for c in &curves {
            per_seed.push([
                id.to_string(),
                c.seed.to_string(),
                c.first_crossing(SUCCESS_THRESHOLD)
                    .map_or("not reached".to_string(), |e| e.to_string()),
            ]);
        }
        table.push(threshold_row(id, &curves));
    }
    out.write_csv("episodes.csv", THRESHOLD_SCHEMA, &["config", "seed", "episodes_to_threshold"], per_seed)?;
    out.write_csv("fig6.csv", THRESHOLD_SCHEMA, &THRESHOLD_HEADER, table)?;
    Ok(())
}

fn reproduce_table1(cfg: &ExperimentConfig, out: &mut RunOutput, log: Log) -> Result<(), CliError> {
    let layout = layout(cfg, "reduced")?;
    let stop_at = cfg.train.stop_at.or(Some(TABLE1_STOP_AT));
    let env = EnvConfig::for_layout(&layout);
    let mut rows = Vec::new();
    let mut totals = Vec::new();
    for &seed in &cfg.seeds {
        let single = ExperimentConfig {
            seeds: vec![seed],
            ..cfg.clone()
        };
        for r in baseline_seed(&single, &layout, seed, out, log)? {
            rows.push(rate_row(&seed.to_string(), r.kind.name(), r.trials, r.successes));
            totals.push((r.kind.name().to_string(), r.trials, r.successes));
        }
        let trained = train_seeds(&single, &layout, cfg.model, cfg.alpha, stop_at, "leaper", "leaper/", out, log)?;
        let (result, _) = trained.into_iter().next().expect("one seed");
        let mut policy = result.agent.policy();
        let mut e = RearrangeEnv::new(layout.clone(), env.clone())?;
        let mut rng = stream(seed, Stream::Baseline);
        let rate = evaluate(&mut policy, &mut e, cfg.trials, &mut rng);
        let successes = (rate * cfg.trials as f64).round() as usize;
        log(&format!("seed {seed}: leaper success {rate:.3}"));
        rows.push(rate_row(&seed.to_string(), "leaper", cfg.trials, successes));
        totals.push(("leaper".to_string(), cfg.trials, successes));
    }
    rows.extend(pooled(&totals));
    out.write_csv("table1.csv", CONTROLLERS_SCHEMA, &RATE_HEADER, rows)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use leaper_core::trainer::KlPoint;

    #[test]
    fn tail_kl_averages_last_quarter() {
        let s = KlSeries {
            config_id: "x".into(),
            seed: 0,
            points: (0..8)
                .map(|i| KlPoint {
                    episode: i,
                    kl: i as f64,
                })
                .collect(),
        };
        assert_eq!(tail_kl(&s), 6.5);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config(ConfigErrors(vec![])).exit_code(), 2);
        assert_eq!(CliError::Plan(PlanError::Config("x".into())).exit_code(), 3);
        assert_eq!(CliError::Train(TrainError::MissingTrajectory).exit_code(), 4);
        let j = CliError::Train(TrainError::MissingTrajectory).to_json();
        assert_eq!(j["error"]["kind"], "training");
    }

    #[test]
    fn pooled_sums_per_controller() {
        let rows = vec![("a".into(), 10, 3), ("b".into(), 10, 5), ("a".into(), 10, 4)];
        let p = pooled(&rows);
        assert_eq!(p[0][1], "a");
        assert_eq!(p[0][3], "7");
        assert_eq!(p[1][2], "10");
    }
}
