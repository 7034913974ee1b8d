//! Experiment configuration: TOML schema, defaults and validation.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use clap::ValueEnum;
use leaper_core::baselines::TrackingConfig;
use leaper_core::env::Layout;
use leaper_core::planner::PlannerConfig;
use leaper_core::rl::DdpgConfig;
use leaper_core::trainer::{CartPoleStudyConfig, ResetMix};
use leaper_core::ModelKind;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use toml::{Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Plan,
    Train,
    Evaluate,
    Baseline,
    CartpoleStudy,
    Reproduce,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Plan => "plan",
            CommandKind::Train => "train",
            CommandKind::Evaluate => "evaluate",
            CommandKind::Baseline => "baseline",
            CommandKind::CartpoleStudy => "cartpole-study",
            CommandKind::Reproduce => "reproduce",
        }
    }

    fn needs_layout(self) -> bool {
        matches!(
            self,
            CommandKind::Plan | CommandKind::Train | CommandKind::Evaluate | CommandKind::Baseline
        )
    }
}

/// Desk-scale analogues of the paper's figures and tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ReproduceTarget {
    /// Episodes to 80% success per planning model.
    Fig6Desk,
    /// Controller success rates.
    Table1Desk,
    /// Cart-pole reset-mixing study.
    Fig3Desk,
}

impl ReproduceTarget {
    /// Seeds used when a reproduction config names none.
    pub fn default_seeds(self) -> Vec<u64> {
        match self {
            ReproduceTarget::Fig6Desk => (1..=10).collect(),
            ReproduceTarget::Table1Desk => vec![1],
            ReproduceTarget::Fig3Desk => (1..=5).collect(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ReproduceTarget::Fig6Desk => "fig6-desk",
            ReproduceTarget::Table1Desk => "table1-desk",
            ReproduceTarget::Fig3Desk => "fig3-desk",
        }
    }
}

/// Training-loop settings other than the reset mix and episode budget.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    pub eval_interval: usize,
    pub eval_episodes: usize,
    pub updates_per_episode: usize,
    pub her_k: usize,
    pub stop_at: Option<f64>,
}

impl Default for TrainSection {
    fn default() -> Self {
        Self {
            eval_interval: 50,
            eval_episodes: 20,
            updates_per_episode: 40,
            her_k: 4,
            stop_at: None,
        }
    }
}

/// A named cart-pole reset mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedMix {
    pub id: String,
    pub start: f64,
    pub uniform: f64,
    pub oracle: f64,
}

impl NamedMix {
    pub fn mix(&self) -> ResetMix {
        ResetMix {
            start: self.start,
            uniform: self.uniform,
            planned: 0.0,
            oracle: self.oracle,
        }
    }
}

/// Mixtures compared in the cart-pole study: start only, half uniform, half
/// oracle, and start half with the rest split between oracle and uniform.
pub fn default_mixes() -> Vec<NamedMix> {
    let m = |id: &str, start, uniform, oracle| NamedMix {
        id: id.to_string(),
        start,
        uniform,
        oracle,
    };
    vec![
        m("start", 1.0, 0.0, 0.0),
        m("uniform50", 0.5, 0.5, 0.0),
        m("oracle50", 0.5, 0.0, 0.5),
        m("oracle25-uniform25", 0.5, 0.25, 0.25),
    ]
}

/// Agent settings sized for single-core runs.
pub fn desk_agent() -> DdpgConfig {
    DdpgConfig {
        hidden: vec![64, 64],
        batch_size: 128,
        lr_actor: 1e-3,
        lr_critic: 1e-3,
        ..DdpgConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: CommandKind,
    pub target: Option<ReproduceTarget>,
    /// Built-in layout id or path to a layout file.
    pub layout: Option<String>,
    /// Planning model.
    pub model: ModelKind,
    /// Probability of a planned reset.
    pub alpha: f64,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    /// Trials per controller or evaluation.
    pub trials: usize,
    pub output_dir: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub train: TrainSection,
    pub agent: DdpgConfig,
    pub planner: PlannerConfig,
    pub tracking: TrackingConfig,
    pub cartpole: CartPoleStudyConfig,
    pub mixes: Vec<NamedMix>,
    /// `--set` overrides as given on the command line, kept for the manifest.
    pub overrides: BTreeMap<String, String>,
}

pub const DEFAULT_EPISODES: usize = 3000;
pub const DEFAULT_TRIALS: usize = 50;

impl ExperimentConfig {
    /// Configuration with every optional field at its default.
    pub fn with_defaults(command: CommandKind, seeds: Vec<u64>) -> Self {
        Self {
            command,
            target: None,
            layout: None,
            model: ModelKind::Quasistatic,
            alpha: 0.5,
            seeds,
            episodes: DEFAULT_EPISODES,
            trials: DEFAULT_TRIALS,
            output_dir: None,
            trajectory: None,
            checkpoint: None,
            train: TrainSection::default(),
            agent: desk_agent(),
            planner: PlannerConfig::default(),
            tracking: TrackingConfig::default(),
            cartpole: CartPoleStudyConfig::default(),
            mixes: default_mixes(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn load_layout(&self) -> Option<Layout> {
        self.layout.as_deref().and_then(|l| Layout::load(l).ok())
    }
}

/// One validation problem at a dotted key path.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigErrors(pub Vec<ConfigIssue>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            if issue.path.is_empty() {
                write!(f, "{}", issue.message)?;
            } else {
                write!(f, "{}: {}", issue.path, issue.message)?;
            }
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

const KNOWN_KEYS: &[&str] = &[
    "command",
    "target",
    "layout",
    "model",
    "alpha",
    "seeds",
    "episodes",
    "trials",
    "output_dir",
    "trajectory",
    "checkpoint",
    "train",
    "agent",
    "planner",
    "tracking",
    "cartpole",
    "mixes",
];

/// Parses and validates a configuration file.
pub fn validate_config(text: &str) -> Result<ExperimentConfig, ConfigErrors> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        ConfigErrors(vec![ConfigIssue {
            path: String::new(),
            message: e.to_string().trim_end().to_string(),
        }])
    })?;
    validate_table(table)
}

/// Parses a seed list: an integer, an array of integers, or a string holding
/// an inclusive range `a..b` or a comma-separated list.
pub fn parse_seeds(v: &Value) -> Result<Vec<u64>, String> {
    let int = |v: &Value| match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        other => Err(format!("expected a non-negative integer seed, found {other}")),
    };
    match v {
        Value::Integer(_) => Ok(vec![int(v)?]),
        Value::Array(a) => a.iter().map(int).collect(),
        Value::String(s) => parse_seed_str(s),
        other => Err(format!("expected seeds as integer, array or range string, found {other}")),
    }
}

pub fn parse_seed_str(s: &str) -> Result<Vec<u64>, String> {
    let num = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| format!("invalid seed `{}`", t.trim()))
    };
    if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(format!("empty seed range {s}"));
        }
        Ok((a..=b).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

fn take<T: DeserializeOwned>(
    table: &mut Table,
    key: &str,
    issues: &mut Vec<ConfigIssue>,
) -> Option<T> {
    let v = table.remove(key)?;
    match v.try_into::<T>() {
        Ok(t) => Some(t),
        Err(e) => {
            issues.push(ConfigIssue {
                path: key.to_string(),
                message: e.to_string().trim_end().to_string(),
            });
            None
        }
    }
}

/// Validates an already-parsed table (a config file merged with overrides).
/// Every problem found is reported, not just the first.
pub fn validate_table(mut table: Table) -> Result<ExperimentConfig, ConfigErrors> {
    let mut issues = Vec::new();
    let issue = |path: &str, message: String| ConfigIssue {
        path: path.to_string(),
        message,
    };
    for key in table.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            issues.push(issue(key, format!("unknown key (expected one of: {})", KNOWN_KEYS.join(", "))));
        }
    }

    let command: Option<CommandKind> = take(&mut table, "command", &mut issues);
    let seeds = match table.remove("seeds") {
        Some(v) => match parse_seeds(&v) {
            Ok(s) if s.is_empty() => {
                issues.push(issue("seeds", "at least one seed is required".into()));
                None
            }
            Ok(s) => Some(s),
            Err(e) => {
                issues.push(issue("seeds", e));
                None
            }
        },
        None => None,
    };
    if command.is_none() && !issues.iter().any(|i| i.path == "command") {
        issues.push(issue(
            "command",
            "missing required field (one of: plan, train, evaluate, baseline, cartpole-study, reproduce)".into(),
        ));
    }
    let reproduce = command == Some(CommandKind::Reproduce);
    if seeds.is_none() && !reproduce && !issues.iter().any(|i| i.path == "seeds") {
        issues.push(issue("seeds", "missing required field (e.g. seeds = [1, 2, 3] or \"1..5\")".into()));
    }

    let mut cfg = ExperimentConfig::with_defaults(command.unwrap_or(CommandKind::Plan), Vec::new());
    if let Some(v) = take(&mut table, "target", &mut issues) {
        cfg.target = Some(v);
    }
    cfg.seeds = match (seeds, cfg.target) {
        (Some(s), _) => s,
        (None, Some(t)) if reproduce => t.default_seeds(),
        (None, _) => Vec::new(),
    };
    if let Some(v) = take::<String>(&mut table, "layout", &mut issues) {
        if let Err(e) = Layout::load(&v) {
            issues.push(issue("layout", e.to_string()));
        }
        cfg.layout = Some(v);
    }
    if let Some(v) = take(&mut table, "model", &mut issues) {
        cfg.model = v;
    }
    if let Some(v) = take::<f64>(&mut table, "alpha", &mut issues) {
        if !(0.0..=1.0).contains(&v) {
            issues.push(issue("alpha", format!("must be within [0, 1], got {v}")));
        }
        cfg.alpha = v;
    }
    if let Some(v) = take::<i64>(&mut table, "episodes", &mut issues) {
        if v < 0 {
            issues.push(issue("episodes", format!("must be non-negative, got {v}")));
        }
        cfg.episodes = v.max(0) as usize;
    }
    if let Some(v) = take::<i64>(&mut table, "trials", &mut issues) {
        if v < 1 {
            issues.push(issue("trials", format!("must be at least 1, got {v}")));
        }
        cfg.trials = v.max(1) as usize;
    }
    cfg.output_dir = take(&mut table, "output_dir", &mut issues);
    for key in ["trajectory", "checkpoint"] {
        if let Some(p) = take::<PathBuf>(&mut table, key, &mut issues) {
            if !p.is_file() {
                issues.push(issue(key, format!("file not found: {}", p.display())));
            }
            if key == "trajectory" {
                cfg.trajectory = Some(p);
            } else {
                cfg.checkpoint = Some(p);
            }
        }
    }
    if let Some(v) = take::<TrainSection>(&mut table, "train", &mut issues) {
        if v.eval_interval == 0 || v.eval_episodes == 0 {
            issues.push(issue("train", "eval_interval and eval_episodes must be positive".into()));
        }
        if let Some(t) = v.stop_at {
            if !(0.0..=1.0).contains(&t) {
                issues.push(issue("train.stop_at", format!("must be within [0, 1], got {t}")));
            }
        }
        cfg.train = v;
    }
    if let Some(v) = take::<DdpgConfig>(&mut table, "agent", &mut issues) {
        if let Err(e) = v.validate() {
            issues.push(issue("agent", e));
        }
        cfg.agent = v;
    }
    if let Some(v) = take::<PlannerConfig>(&mut table, "planner", &mut issues) {
        if let Err(e) = v.validate() {
            issues.push(issue("planner", e.to_string()));
        }
        cfg.planner = v;
    }
    if let Some(v) = take(&mut table, "tracking", &mut issues) {
        cfg.tracking = v;
    }
    if let Some(v) = take::<CartPoleStudyConfig>(&mut table, "cartpole", &mut issues) {
        if let Err(e) = v.agent.validate() {
            issues.push(issue("cartpole.agent", e));
        }
        if v.eval_interval == 0 || v.eval_rollouts == 0 || v.oracle_rollouts == 0 {
            issues.push(issue(
                "cartpole",
                "eval_interval, eval_rollouts and oracle_rollouts must be positive".into(),
            ));
        }
        cfg.cartpole = v;
    }
    if let Some(v) = take::<Vec<NamedMix>>(&mut table, "mixes", &mut issues) {
        if v.is_empty() {
            issues.push(issue("mixes", "at least one mixture is required".into()));
        }
        for (i, m) in v.iter().enumerate() {
            if let Err(e) = m.mix().validate() {
                issues.push(issue(&format!("mixes[{i}]"), e.to_string()));
            }
        }
        cfg.mixes = v;
    }

    if let Some(c) = command {
        if c.needs_layout() && cfg.layout.is_none() && !issues.iter().any(|i| i.path == "layout") {
            issues.push(issue("layout", format!("required for `{}`", c.name())));
        }
        if c == CommandKind::Reproduce && cfg.target.is_none() && !issues.iter().any(|i| i.path == "target") {
            issues.push(issue(
                "target",
                "required for `reproduce` (one of: fig6-desk, table1-desk, fig3-desk)".into(),
            ));
        }
        if c == CommandKind::Evaluate && cfg.checkpoint.is_none() && !issues.iter().any(|i| i.path == "checkpoint") {
            issues.push(issue("checkpoint", "required for `evaluate`".into()));
        }
    }

    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigErrors(issues))
    }
}

/// Sets a dotted `key` in `table`. `value` is read as a TOML value when it
/// parses as one and as a bare string otherwise.
pub fn apply_override(table: &mut Table, key: &str, value: &str) -> Result<(), ConfigIssue> {
    let parsed = format!("v = {value}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(value.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(ConfigIssue {
            path: key.to_string(),
            message: "empty key segment".into(),
        });
    }
    let mut t = table;
    for (i, part) in parts[..parts.len() - 1].iter().enumerate() {
        let entry = t
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        t = match entry {
            Value::Table(inner) => inner,
            _ => {
                return Err(ConfigIssue {
                    path: parts[..=i].join("."),
                    message: "not a table".into(),
                })
            }
        };
    }
    t.insert(parts[parts.len() - 1].to_string(), parsed);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_syntax() {
        assert_eq!(parse_seed_str("1..5").unwrap(), vec![1, 2, 3, 4, 5]);
        assert_eq!(parse_seed_str("1..=3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seed_str("7, 9").unwrap(), vec![7, 9]);
        assert!(parse_seed_str("5..1").is_err());
        assert!(parse_seed_str("x").is_err());
        assert_eq!(parse_seeds(&Value::Integer(4)).unwrap(), vec![4]);
    }

    #[test]
    fn overrides_nest_and_type() {
        let mut t = Table::new();
        apply_override(&mut t, "agent.lr_actor", "0.002").unwrap();
        apply_override(&mut t, "layout", "reduced").unwrap();
        apply_override(&mut t, "seeds", "[1, 2]").unwrap();
        assert_eq!(t["agent"]["lr_actor"].as_float(), Some(0.002));
        assert_eq!(t["layout"].as_str(), Some("reduced"));
        assert_eq!(t["seeds"].as_array().map(|a| a.len()), Some(2));
        assert!(apply_override(&mut t, "layout.x", "1").is_err());
    }

    #[test]
    fn errors_render_one_per_line() {
        let e = ConfigErrors(vec![
            ConfigIssue {
                path: "a".into(),
                message: "bad".into(),
            },
            ConfigIssue {
                path: "b".into(),
                message: "worse".into(),
            },
        ]);
        assert_eq!(e.to_string(), "a: bad\nb: worse");
    }
}
