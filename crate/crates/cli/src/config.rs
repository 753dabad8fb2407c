//! Command-line flags and their validated, resolved form.

use crate::CliError;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use spo_core::schedule::{default_iterations, default_representation};
use spo_core::{DistributionSpec, InjectiveKind, InjectiveSpec, Representation, ScanStage};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPO_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "spo",
    version,
    about = "Amplitude amplification with a subdivided phase oracle"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fixed-k run; writes the trace and a run descriptor.
    Run(RunArgs),
    /// Peak probability over a grid of k values, optionally refined in stages.
    ScanK(ScanArgs),
    /// Per-step greedy choice of k from a grid.
    Greedy(GreedyArgs),
    /// Alternating +k, -k schedule.
    Alternate(RunArgs),
    /// Fixed-k runs of an injective family over several sizes.
    StudySize(StudyArgs),
    /// Amplitude table after a given iteration.
    Snapshot(SnapshotArgs),
    /// Expected-query report from a trace file or a fresh run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObjectiveKind {
    Normal,
    SkewNormal,
    Exponential,
    Linear,
    Quadratic,
    Cubic,
    Exp10,
    File,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ReprArg {
    Dense,
    Compressed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SnapshotStage {
    /// After the oracle of the last iteration, before its diffusion.
    Oracle,
    /// After the full last iteration.
    Diffusion,
}

#[derive(Debug, Clone, Args)]
pub struct ObjectiveArgs {
    #[arg(long, value_enum)]
    pub objective: Option<ObjectiveKind>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub sigma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    /// Objective values, one per line.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Injective families map index x to x/m.
    #[arg(long)]
    pub scale_divisor: Option<u64>,
    /// Number of basis states, as an integer or `b^e`.
    #[arg(long)]
    pub n: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    #[arg(long, value_enum)]
    pub repr: Option<ReprArg>,
    /// Caps worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output file; defaults to `<command>.csv` under $SPO_OUT_DIR or the working directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// `0.001`, `pi/225` or `2*pi/3`.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ScanArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Defaults to pi/(4 f_max).
    #[arg(long, allow_hyphen_values = true)]
    pub k_min: Option<String>,
    /// Defaults to 3 pi/f_max.
    #[arg(long, allow_hyphen_values = true)]
    pub k_max: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Coarse-to-fine stages as `POINTSxITERS,...`, `g` prefix for golden-section;
    /// replaces --points and --iters.
    #[arg(long)]
    pub stages: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub iters: Option<usize>,
    /// Comma-separated k expressions; defaults to 0 plus a log grid up to pi/f_max.
    #[arg(long, allow_hyphen_values = true)]
    pub k_grid: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct StudyArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated sizes, e.g. `2^14,2^16`.
    #[arg(long)]
    pub sizes: String,
    /// k = c * pi / f_max(N).
    #[arg(long, allow_hyphen_values = true)]
    pub k_scale: Option<f64>,
    /// Iterations = ceil(c * sqrt(N)).
    #[arg(long)]
    pub iters_scale: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct SnapshotArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
    #[arg(long, value_enum)]
    pub stage: Option<SnapshotStage>,
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trace written by `run`, `greedy` or `alternate`; replaces the objective flags.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long)]
    pub iters: Option<usize>,
}

/// Where the objective table comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum ObjectiveConfig {
    Distribution { spec: DistributionSpec, n: usize },
    Injective { spec: InjectiveSpec },
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Run {
        k: f64,
        iterations: usize,
    },
    ScanK {
        k_min: Option<f64>,
        k_max: Option<f64>,
        stages: Vec<ScanStage>,
    },
    Greedy {
        iterations: usize,
        k_grid: Option<Vec<f64>>,
    },
    Alternate {
        k: f64,
        iterations: usize,
    },
    StudySize {
        sizes: Vec<usize>,
        k_scale: f64,
        iters_scale: f64,
    },
    Snapshot {
        k: f64,
        iterations: usize,
        stage: SnapshotStage,
    },
    Report {
        trace: Option<PathBuf>,
        k: Option<f64>,
        iterations: Option<usize>,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Run { .. } => "run",
            Self::ScanK { .. } => "scan-k",
            Self::Greedy { .. } => "greedy",
            Self::Alternate { .. } => "alternate",
            Self::StudySize { .. } => "study-size",
            Self::Snapshot { .. } => "snapshot",
            Self::Report { .. } => "report",
        }
    }
}

/// Fully resolved experiment; everything here except `threads` is echoed into
/// output headers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: CommandConfig,
    pub objective: Option<ObjectiveConfig>,
    /// `None` picks the default for the table size.
    pub representation: Option<Representation>,
    pub out: PathBuf,
    #[serde(skip)]
    pub threads: Option<usize>,
}

fn config_err(flag: &str, message: impl Into<String>) -> CliError {
    CliError::Config {
        flag: flag.to_string(),
        message: message.into(),
    }
}

/// Evaluates `<decimal>`, `pi/<decimal>` or `<decimal>*pi/<decimal>` (also
/// `pi` and `<decimal>*pi`).
pub fn parse_k_expression(text: &str) -> Option<f64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let decimal = |t: &str| -> Option<f64> {
        let v: f64 = t.parse().ok()?;
        v.is_finite().then_some(v)
    };
    let Some(pi_at) = s.find("pi") else {
        return decimal(&s);
    };
    let (head, tail) = (&s[..pi_at], &s[pi_at + 2..]);
    let coef = match head {
        "" => 1.0,
        "-" => -1.0,
        h => decimal(h.strip_suffix('*')?)?,
    };
    let den = match tail {
        "" => 1.0,
        t => decimal(t.strip_prefix('/')?)?,
    };
    if den == 0.0 {
        return None;
    }
    let v = coef * PI / den;
    v.is_finite().then_some(v)
}

/// `2^20`, `10^3` or a plain integer.
pub fn parse_size(text: &str) -> Option<usize> {
    let s = text.trim();
    match s.split_once('^') {
        Some((b, e)) => {
            let base: usize = b.trim().parse().ok()?;
            let exp: u32 = e.trim().parse().ok()?;
            base.checked_pow(exp)
        }
        None => s.parse().ok(),
    }
}

fn k_flag(flag: &str, text: Option<&String>) -> Result<Option<f64>, CliError> {
    text.map(|t| {
        parse_k_expression(t)
            .ok_or_else(|| config_err(flag, format!("cannot parse `{t}`; expected 0.001, pi/225 or 2*pi/3")))
    })
    .transpose()
}

fn required<T>(flag: &str, value: Option<T>) -> Result<T, CliError> {
    value.ok_or_else(|| config_err(flag, "is required"))
}

fn positive_iters(flag: &str, iters: usize) -> Result<usize, CliError> {
    if iters == 0 {
        return Err(config_err(flag, "must be at least 1"));
    }
    Ok(iters)
}

fn parse_n(text: &str) -> Result<usize, CliError> {
    let n =
        parse_size(text).ok_or_else(|| config_err("--n", format!("cannot parse `{text}`; expected 2^20 or 1000")))?;
    if n < 2 {
        return Err(config_err("--n", format!("needs at least 2 states, got {n}")));
    }
    Ok(n)
}

fn finite(flag: &str, v: f64) -> Result<f64, CliError> {
    if !v.is_finite() {
        return Err(config_err(flag, format!("must be finite, got {v}")));
    }
    Ok(v)
}

fn positive(flag: &str, v: f64) -> Result<f64, CliError> {
    if !(v.is_finite() && v > 0.0) {
        return Err(config_err(flag, format!("must be positive and finite, got {v}")));
    }
    Ok(v)
}

/// Rejects flags the chosen objective does not use.
fn unused(flags: &[(&str, bool)]) -> Result<(), CliError> {
    match flags.iter().find(|(_, given)| *given) {
        Some((flag, _)) => Err(config_err(flag, "does not apply to this objective")),
        None => Ok(()),
    }
}

/// Validates the objective flags. `sized` is false for commands that take
/// their sizes elsewhere (`study-size`).
pub fn resolve_objective(a: &ObjectiveArgs, sized: bool) -> Result<ObjectiveConfig, CliError> {
    let kind = required("--objective", a.objective)?;
    let n = if sized && kind != ObjectiveKind::File {
        Some(parse_n(required("--n", a.n.as_deref())?)?)
    } else {
        if a.n.is_some() {
            return Err(config_err("--n", "does not apply here"));
        }
        None
    };
    let is_dist = matches!(
        kind,
        ObjectiveKind::Normal | ObjectiveKind::SkewNormal | ObjectiveKind::Exponential
    );
    if kind != ObjectiveKind::File {
        unused(&[("--file", a.file.is_some())])?;
    }
    if !is_dist {
        unused(&[
            ("--mu", a.mu.is_some()),
            ("--sigma", a.sigma.is_some()),
            ("--alpha", a.alpha.is_some()),
            ("--lambda", a.lambda.is_some()),
            ("--seed", a.seed.is_some()),
        ])?;
    }
    let seed = a.seed.unwrap_or(0);
    let injective = |kind: InjectiveKind| -> Result<ObjectiveConfig, CliError> {
        let scale_divisor = match a.scale_divisor {
            Some(0) => return Err(config_err("--scale-divisor", "must be a positive integer")),
            d => d,
        };
        Ok(ObjectiveConfig::Injective {
            spec: InjectiveSpec {
                kind,
                n_states: n.unwrap_or(0),
                scale_divisor,
            },
        })
    };
    if is_dist || kind == ObjectiveKind::File {
        unused(&[("--scale-divisor", a.scale_divisor.is_some())])?;
    }
    match kind {
        ObjectiveKind::Normal => {
            unused(&[("--alpha", a.alpha.is_some()), ("--lambda", a.lambda.is_some())])?;
            let mu = finite("--mu", a.mu.unwrap_or(0.0))?;
            let sigma = positive("--sigma", a.sigma.unwrap_or(1.0))?;
            Ok(ObjectiveConfig::Distribution {
                spec: DistributionSpec::normal(mu, sigma, seed),
                n: n.unwrap_or(0),
            })
        }
        ObjectiveKind::SkewNormal => {
            unused(&[("--lambda", a.lambda.is_some())])?;
            let mu = finite("--mu", a.mu.unwrap_or(0.0))?;
            let sigma = positive("--sigma", a.sigma.unwrap_or(1.0))?;
            let alpha = finite("--alpha", required("--alpha", a.alpha)?)?;
            Ok(ObjectiveConfig::Distribution {
                spec: DistributionSpec::skew_normal(mu, sigma, alpha, seed),
                n: n.unwrap_or(0),
            })
        }
        ObjectiveKind::Exponential => {
            unused(&[
                ("--mu", a.mu.is_some()),
                ("--sigma", a.sigma.is_some()),
                ("--alpha", a.alpha.is_some()),
            ])?;
            let lambda = positive("--lambda", a.lambda.unwrap_or(1.0))?;
            Ok(ObjectiveConfig::Distribution {
                spec: DistributionSpec::exponential(lambda, seed),
                n: n.unwrap_or(0),
            })
        }
        ObjectiveKind::Linear => injective(InjectiveKind::Linear),
        ObjectiveKind::Quadratic => injective(InjectiveKind::Quadratic),
        ObjectiveKind::Cubic => injective(InjectiveKind::Cubic),
        ObjectiveKind::Exp10 => injective(InjectiveKind::Exp10),
        ObjectiveKind::File => {
            let path = required("--file", a.file.clone())?;
            Ok(ObjectiveConfig::File { path })
        }
    }
}

/// `POINTSxITERS,...`; a leading `g` makes a stage a golden-section search
/// with POINTS evaluations instead of a grid.
pub fn parse_stages(text: &str) -> Result<Vec<ScanStage>, CliError> {
    let bad = || {
        config_err(
            "--stages",
            format!("cannot parse `{text}`; expected e.g. 64x16,17x128,g8x1536"),
        )
    };
    let mut stages = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        let (golden, spec) = match part.strip_prefix('g') {
            Some(rest) => (true, rest),
            None => (false, part),
        };
        let (p, i) = spec.split_once('x').ok_or_else(bad)?;
        let points: usize = p.trim().parse().map_err(|_| bad())?;
        let iterations: usize = i.trim().parse().map_err(|_| bad())?;
        if points < 2 || iterations == 0 {
            return Err(config_err(
                "--stages",
                "each stage needs at least 2 points and 1 iteration",
            ));
        }
        stages.push(if golden {
            ScanStage::golden(points, iterations)
        } else {
            ScanStage::grid(points, iterations)
        });
    }
    Ok(stages)
}

fn default_out(name: &str, ext: &str) -> PathBuf {
    let dir = std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{name}.{ext}"))
}

/// Iteration default `⌈3√N⌉` when `--n` is known.
fn default_iters(objective: &ObjectiveConfig) -> Option<usize> {
    match objective {
        ObjectiveConfig::Distribution { n, .. } => Some(default_iterations(*n)),
        ObjectiveConfig::Injective { spec } => Some(default_iterations(spec.n_states)),
        ObjectiveConfig::File { .. } => None,
    }
}

fn iters_or_default(flag: &str, given: Option<usize>, objective: &ObjectiveConfig) -> Result<usize, CliError> {
    positive_iters(flag, required(flag, given.or_else(|| default_iters(objective)))?)
}

impl ExperimentConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let (command, objective, common) = match &cli.command {
            Command::Run(a) | Command::Alternate(a) => {
                let objective = resolve_objective(&a.objective, true)?;
                let k = finite("--k", required("--k", k_flag("--k", a.k.as_ref())?)?)?;
                let iterations = iters_or_default("--iters", a.iters, &objective)?;
                let command = match &cli.command {
                    Command::Run(_) => CommandConfig::Run { k, iterations },
                    _ => {
                        if iterations < 2 {
                            return Err(config_err(
                                "--iters",
                                "alternating schedules need at least 2 iterations",
                            ));
                        }
                        CommandConfig::Alternate { k, iterations }
                    }
                };
                (command, Some(objective), &a.common)
            }
            Command::ScanK(a) => {
                let objective = resolve_objective(&a.objective, true)?;
                let k_min = k_flag("--k-min", a.k_min.as_ref())?;
                let k_max = k_flag("--k-max", a.k_max.as_ref())?;
                if let (Some(lo), Some(hi)) = (k_min, k_max) {
                    if lo >= hi {
                        return Err(config_err("--k-max", format!("must exceed --k-min ({hi} <= {lo})")));
                    }
                }
                let stages = match &a.stages {
                    Some(text) => {
                        unused(&[("--points", a.points.is_some()), ("--iters", a.iters.is_some())])
                            .map_err(|_| config_err("--stages", "cannot be combined with --points or --iters"))?;
                        parse_stages(text)?
                    }
                    None => {
                        let points = a.points.unwrap_or(64);
                        if points < 2 {
                            return Err(config_err("--points", "needs at least 2 grid points"));
                        }
                        vec![ScanStage::grid(
                            points,
                            iters_or_default("--iters", a.iters, &objective)?,
                        )]
                    }
                };
                (
                    CommandConfig::ScanK { k_min, k_max, stages },
                    Some(objective),
                    &a.common,
                )
            }
            Command::Greedy(a) => {
                let objective = resolve_objective(&a.objective, true)?;
                let iterations = iters_or_default("--iters", a.iters, &objective)?;
                let k_grid = match &a.k_grid {
                    Some(text) => {
                        let grid = text
                            .split(',')
                            .map(|t| {
                                parse_k_expression(t)
                                    .ok_or_else(|| config_err("--k-grid", format!("cannot parse `{}`", t.trim())))
                            })
                            .collect::<Result<Vec<f64>, _>>()?;
                        Some(grid)
                    }
                    None => None,
                };
                (CommandConfig::Greedy { iterations, k_grid }, Some(objective), &a.common)
            }
            Command::StudySize(a) => {
                let objective = resolve_objective(&a.objective, false)?;
                if a.common.repr.is_some() {
                    return Err(config_err("--repr", "does not apply to study-size"));
                }
                if !matches!(objective, ObjectiveConfig::Injective { .. }) {
                    return Err(config_err("--objective", "study-size needs an injective family"));
                }
                let sizes = a
                    .sizes
                    .split(',')
                    .map(|t| {
                        let n = parse_size(t)
                            .ok_or_else(|| config_err("--sizes", format!("cannot parse `{}`", t.trim())))?;
                        if n < 2 {
                            return Err(config_err("--sizes", format!("sizes need at least 2 states, got {n}")));
                        }
                        Ok(n)
                    })
                    .collect::<Result<Vec<usize>, _>>()?;
                if sizes.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(config_err("--sizes", "sizes must be strictly ascending"));
                }
                let k_scale = finite("--k-scale", a.k_scale.unwrap_or(1.0))?;
                let iters_scale = positive("--iters-scale", a.iters_scale.unwrap_or(3.0))?;
                (
                    CommandConfig::StudySize {
                        sizes,
                        k_scale,
                        iters_scale,
                    },
                    Some(objective),
                    &a.common,
                )
            }
            Command::Snapshot(a) => {
                let objective = resolve_objective(&a.objective, true)?;
                let k = finite("--k", required("--k", k_flag("--k", a.k.as_ref())?)?)?;
                let iterations = iters_or_default("--iters", a.iters, &objective)?;
                let stage = a.stage.unwrap_or(SnapshotStage::Oracle);
                (
                    CommandConfig::Snapshot { k, iterations, stage },
                    Some(objective),
                    &a.common,
                )
            }
            Command::Report(a) => {
                let k = k_flag("--k", a.k.as_ref())?;
                match &a.trace {
                    Some(trace) => {
                        let o = &a.objective;
                        unused(&[
                            ("--objective", o.objective.is_some()),
                            ("--n", o.n.is_some()),
                            ("--k", k.is_some()),
                            ("--iters", a.iters.is_some()),
                            ("--repr", a.common.repr.is_some()),
                        ])
                        .map_err(|e| match e {
                            CliError::Config { flag, .. } => config_err(&flag, "cannot be combined with --trace"),
                            other => other,
                        })?;
                        let command = CommandConfig::Report {
                            trace: Some(trace.clone()),
                            k: None,
                            iterations: None,
                        };
                        (command, None, &a.common)
                    }
                    None => {
                        let objective = resolve_objective(&a.objective, true)?;
                        let k = finite("--k", required("--k", k)?)?;
                        let iterations = iters_or_default("--iters", a.iters, &objective)?;
                        let command = CommandConfig::Report {
                            trace: None,
                            k: Some(k),
                            iterations: Some(iterations),
                        };
                        (command, Some(objective), &a.common)
                    }
                }
            }
        };
        if common.threads == Some(0) {
            return Err(config_err("--threads", "must be at least 1"));
        }
        let representation = common.repr.map(|r| match r {
            ReprArg::Dense => Representation::Dense,
            ReprArg::Compressed => Representation::Compressed,
        });
        let ext = if matches!(command, CommandConfig::Report { .. }) {
            "json"
        } else {
            "csv"
        };
        let out = common.out.clone().unwrap_or_else(|| default_out(command.name(), ext));
        Ok(Self {
            command,
            objective,
            representation,
            out,
            threads: common.threads,
        })
    }

    /// Representation for a table of `n` states.
    pub fn representation_for(&self, n: usize) -> Representation {
        self.representation.unwrap_or_else(|| default_representation(n))
    }

    /// Sibling of the main output file: `dir/stem<suffix>.<ext>`.
    pub fn sibling(&self, suffix: &str, ext: &str) -> PathBuf {
        sibling(&self.out, suffix, ext)
    }
}

pub fn sibling(path: &Path, suffix: &str, ext: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}
