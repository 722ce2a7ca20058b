//! Experiment files: a TOML document with nested sections, validated into
//! an [`ExperimentSpec`] with every violation reported at once.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{OracleOptions, ReAggregation};
use crate::engine::{
    Mode, OperatorConfig, Parallelism, PilotConfig, Rated, RunConfig, TraceConfig, WarmStart,
};
use crate::error::{Error, Result};
use crate::moves::{CrossoverKind, MutationKind, SelectionTemps};
use crate::problems::{Component, Space};
use crate::schedules::{DesiredProbability, GainSchedule, Partition, TemperatureLadder, TruncationBounds};
use crate::target::Normalization;

pub const DEFAULT_LAMBDA: f64 = 0.1;
pub const DEFAULT_BETA: f64 = 0.55;
pub const DEFAULT_N_GAMMA: u64 = 100_000;

/// Which benchmark energy an experiment uses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Quadratic {
        dim: usize,
        lower: f64,
        upper: f64,
    },
    Mixture {
        /// Inline components; the built-in twenty-mode set when absent.
        components: Option<Vec<Component>>,
        variance: f64,
        lower: f64,
        upper: f64,
    },
    Rastrigin {
        dim: usize,
        rotation_seed: u64,
    },
    Ab {
        /// Explicit `A`/`B` string; a Fibonacci sequence of `length` when
        /// absent.
        sequence: Option<String>,
        length: Option<usize>,
        space: Space,
    },
    Ising {
        image: PathBuf,
        a: f64,
        b: f64,
        count_pairs_twice: bool,
        threshold: u8,
    },
}

impl ProblemSpec {
    /// Short identifier used in seeds and file names.
    pub fn id(&self) -> String {
        match self {
            ProblemSpec::Quadratic { dim, .. } => format!("quadratic-{dim}d"),
            ProblemSpec::Mixture { .. } => "mixture-2d".into(),
            ProblemSpec::Rastrigin { dim, .. } => format!("rastrigin-{dim}d"),
            ProblemSpec::Ab { space, sequence, length } => {
                let n = sequence.as_ref().map_or(length.unwrap_or(0), |s| s.len());
                let s = match space {
                    Space::Two => "2d",
                    Space::Three => "3d",
                };
                format!("ab{s}-{n}")
            }
            ProblemSpec::Ising { .. } => "ising".into(),
        }
    }
}

/// How the iteration count scales with the population size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Budget {
    /// Every cell runs `iterations` iterations.
    #[default]
    FixedIterations,
    /// A cell with population `kappa` runs `floor(iterations / kappa)`.
    FixedCost,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub tau: f64,
    pub options: OracleOptions,
}

/// A validated experiment: a run template swept over population sizes and
/// gain exponents, replicated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub problem: ProblemSpec,
    pub template: RunConfig,
    pub replicates: usize,
    pub kappas: Vec<usize>,
    pub betas: Vec<f64>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Replicates run at once; 0 means one per core.
    pub replicate_threads: usize,
    pub budget: Budget,
    pub oracle: Option<OracleSpec>,
    pub re_aggregation: ReAggregation,
    /// Iterations between checkpoints; 0 disables them.
    pub checkpoint_every: u64,
}

impl ExperimentSpec {
    /// Iterations of a cell with population `kappa`.
    pub fn iterations_for(&self, kappa: usize) -> u64 {
        match self.budget {
            Budget::FixedIterations => self.template.iterations,
            Budget::FixedCost => self.template.iterations / kappa as u64,
        }
    }

    /// The concrete run configuration of one cell, seed excluded.
    pub fn cell_config(&self, kappa: usize, beta: f64, seed: u64) -> RunConfig {
        let mut cfg = self.template.clone();
        cfg.kappa = kappa;
        cfg.gain.beta = beta;
        cfg.iterations = self.iterations_for(kappa);
        cfg.seed = seed;
        cfg
    }
}

// Raw file layout. Everything is optional here so missing fields can be
// reported together.

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    experiment: Option<RawExperiment>,
    problem: Option<toml::Table>,
    run: Option<RawRun>,
    partition: Option<RawPartition>,
    desired: Option<RawDesired>,
    gain: Option<RawGain>,
    temperature: Option<RawTemperature>,
    truncation: Option<RawTruncation>,
    operators: Option<RawOperators>,
    pilot: Option<RawPilot>,
    trace: Option<RawTrace>,
    warm_start: Option<RawWarmStart>,
    oracle: Option<RawOracle>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    replicates: Option<i64>,
    kappa: Option<Vec<i64>>,
    beta: Option<Vec<f64>>,
    seed: Option<u64>,
    output: Option<PathBuf>,
    replicate_threads: Option<i64>,
    budget: Option<Budget>,
    re_aggregation: Option<ReAggregation>,
    checkpoint_every: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    mode: Option<Mode>,
    iterations: Option<i64>,
    normalization: Option<Normalization>,
    parallelism: Option<Parallelism>,
    theta_reset: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartition {
    grid: Option<Vec<f64>>,
    u_min: Option<f64>,
    u_max: Option<f64>,
    m: Option<i64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDesired {
    lambda: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGain {
    n_gamma: Option<u64>,
    beta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTemperature {
    tau_h: Option<f64>,
    n_tau: Option<u64>,
    tau_star: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTruncation {
    m0: Option<f64>,
    growth: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOperators {
    metropolis: Option<f64>,
    hit_and_run: Option<f64>,
    kpoint_mutation: Option<f64>,
    gibbs: Option<f64>,
    kpoint_crossover: Option<f64>,
    snooker: Option<f64>,
    linear: Option<f64>,
    k_mutation: Option<usize>,
    k_crossover: Option<usize>,
    initial_variance: Option<f64>,
    region_scaling: Option<bool>,
    literal_partner: Option<bool>,
    tau_kc: Option<f64>,
    tau_sc: Option<f64>,
    tau_lc: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPilot {
    enabled: Option<bool>,
    fraction: Option<f64>,
    cap: Option<u64>,
    batch: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTrace {
    stride: Option<u64>,
    theta_stride: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWarmStart {
    tau0: f64,
    sweeps: u64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    tau: Option<f64>,
    lower: Option<Vec<f64>>,
    upper: Option<Vec<f64>>,
    gate: Option<f64>,
    max_depth: Option<u32>,
}

/// Parse and validate a TOML experiment. `base` resolves relative paths in
/// the file (image inputs).
pub fn parse_experiment(text: &str, base: Option<&Path>) -> Result<ExperimentSpec> {
    let raw: RawFile = toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string()]))?;
    build(raw, base)
}

/// Read, parse and validate an experiment file.
pub fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_experiment(&text, path.parent())
}

fn non_negative(errs: &mut Vec<String>, name: &str, v: i64) -> usize {
    if v < 0 {
        errs.push(format!("{name} must be non-negative, got {v}"));
        0
    } else {
        v as usize
    }
}

fn problem_spec(errs: &mut Vec<String>, table: toml::Table, base: Option<&Path>) -> Option<ProblemSpec> {
    if !table.contains_key("kind") {
        errs.push("problem.kind is required (quadratic, mixture, rastrigin, ab, ising)".into());
        return None;
    }
    let mut table = table;
    // Fill per-kind defaults before strict deserialization.
    let kind = table.get("kind").and_then(|k| k.as_str()).unwrap_or_default().to_string();
    let defaults: &[(&str, toml::Value)] = match kind.as_str() {
        "quadratic" => &[("lower", toml::Value::Float(-1.0)), ("upper", toml::Value::Float(1.0))],
        "mixture" => &[
            ("variance", toml::Value::Float(0.001)),
            ("lower", toml::Value::Float(-1e10)),
            ("upper", toml::Value::Float(1e10)),
        ],
        "rastrigin" => &[("rotation_seed", toml::Value::Integer(0))],
        "ab" => &[("space", toml::Value::String("two".into()))],
        "ising" => &[
            ("a", toml::Value::Float(1.0)),
            ("b", toml::Value::Float(1.0)),
            ("count_pairs_twice", toml::Value::Boolean(false)),
            ("threshold", toml::Value::Integer(128)),
        ],
        _ => &[],
    };
    for (k, v) in defaults {
        table.entry(k.to_string()).or_insert_with(|| v.clone());
    }
    let spec: ProblemSpec = match toml::Value::Table(table).try_into() {
        Ok(s) => s,
        Err(e) => {
            errs.push(format!("problem: {e}"));
            return None;
        }
    };
    let spec = match spec {
        ProblemSpec::Ising { image, a, b, count_pairs_twice, threshold } => {
            let image = match base {
                Some(dir) if image.is_relative() => dir.join(image),
                _ => image,
            };
            ProblemSpec::Ising { image, a, b, count_pairs_twice, threshold }
        }
        other => other,
    };
    match &spec {
        ProblemSpec::Quadratic { dim, lower, upper } => {
            if *dim == 0 {
                errs.push("problem.dim must be at least 1".into());
            }
            if !(lower < upper) {
                errs.push("problem.lower must be below problem.upper".into());
            }
        }
        ProblemSpec::Mixture { variance, lower, upper, components } => {
            if !(*variance > 0.0) {
                errs.push("problem.variance must be positive".into());
            }
            if !(lower < upper) {
                errs.push("problem.lower must be below problem.upper".into());
            }
            if let Some(c) = components {
                if c.is_empty() {
                    errs.push("problem.components must not be empty".into());
                }
            }
        }
        ProblemSpec::Rastrigin { dim, .. } => {
            if *dim == 0 {
                errs.push("problem.dim must be at least 1".into());
            }
        }
        ProblemSpec::Ab { sequence, length, .. } => match (sequence, length) {
            (None, None) => errs.push("problem.sequence or problem.length is required for the AB model".into()),
            (Some(s), _) if s.len() < 3 || s.chars().any(|c| c != 'A' && c != 'B') => {
                errs.push("problem.sequence must be at least three letters from {A, B}".into())
            }
            (None, Some(n)) if *n < 3 => errs.push("problem.length must be at least 3".into()),
            _ => {}
        },
        ProblemSpec::Ising { .. } => {}
    }
    Some(spec)
}

fn build(raw: RawFile, base: Option<&Path>) -> Result<ExperimentSpec> {
    let mut errs = Vec::new();
    let exp = raw.experiment.unwrap_or_default();
    let run = raw.run.unwrap_or_default();

    let problem = match raw.problem {
        Some(t) => problem_spec(&mut errs, t, base),
        None => {
            errs.push("[problem] section with problem.kind is required".into());
            None
        }
    };

    let iterations = match run.iterations {
        Some(n) if n >= 1 => n as u64,
        Some(n) => {
            errs.push(format!("run.iterations must be at least 1, got {n}"));
            1
        }
        None => {
            errs.push("run.iterations is required".into());
            1
        }
    };

    let partition = match raw.partition {
        None => {
            errs.push("[partition] is required: give either grid = [...] or u_min, u_max and m".into());
            None
        }
        Some(p) => {
            let built = match (p.grid, p.u_min, p.u_max, p.m) {
                (Some(grid), None, None, None) => Partition::new(grid),
                (None, Some(lo), Some(hi), Some(m)) if m >= 2 => Partition::uniform(lo, hi, m as usize),
                (None, Some(_), Some(_), Some(m)) => {
                    Err(Error::InvalidPartition(format!("partition.m must be at least 2, got {m}")))
                }
                _ => Err(Error::InvalidPartition(
                    "give either partition.grid or all of partition.u_min, u_max, m".into(),
                )),
            };
            match built {
                Ok(p) => Some(p),
                Err(e) => {
                    errs.push(e.to_string());
                    None
                }
            }
        }
    };
    let m = partition.as_ref().map_or(2, Partition::len);

    let lambda = raw.desired.and_then(|d| d.lambda).unwrap_or(DEFAULT_LAMBDA);
    let desired = match DesiredProbability::geometric(lambda, m) {
        Ok(d) => Some(d),
        Err(e) => {
            errs.push(format!("desired.lambda: {e}"));
            None
        }
    };

    let gain_raw = raw.gain.unwrap_or_default();
    let n_gamma = gain_raw.n_gamma.unwrap_or(DEFAULT_N_GAMMA);
    let template_beta = gain_raw.beta.unwrap_or(DEFAULT_BETA);
    let betas = exp.beta.clone().unwrap_or_else(|| vec![template_beta]);
    if betas.is_empty() {
        errs.push("experiment.beta must list at least one value".into());
    }
    for &b in betas.iter().chain(gain_raw.beta.iter()) {
        if let Err(e) = GainSchedule::new(n_gamma, b) {
            errs.push(format!("gain: {e}"));
        }
    }

    let t = raw.temperature.unwrap_or_default();
    let temperature = TemperatureLadder {
        tau_h: t.tau_h.unwrap_or(1.0),
        n_tau: t.n_tau.unwrap_or(1),
        tau_star: t.tau_star.unwrap_or(0.01),
    };
    if let Err(e) = TemperatureLadder::new(temperature.tau_h, temperature.n_tau, temperature.tau_star) {
        errs.push(format!("temperature: {e}"));
    }

    let tr = raw.truncation.unwrap_or_default();
    let truncation = match TruncationBounds::new(tr.m0.unwrap_or(1e100), tr.growth.unwrap_or(1e10)) {
        Ok(b) => b,
        Err(e) => {
            errs.push(format!("truncation: {e}"));
            TruncationBounds::default()
        }
    };

    let problem_is_binary = matches!(problem, Some(ProblemSpec::Ising { .. }));
    let ops = raw.operators.unwrap_or_default();
    let operators = {
        let defaults = if problem_is_binary {
            [0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]
        } else {
            [1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 1.0]
        };
        let rate = |v: Option<f64>, k: usize| v.unwrap_or(defaults[k]);
        let mutations: Vec<Rated<MutationKind>> = [
            (MutationKind::Metropolis, rate(ops.metropolis, 0)),
            (MutationKind::HitAndRun, rate(ops.hit_and_run, 1)),
            (MutationKind::KPoint, rate(ops.kpoint_mutation, 2)),
            (MutationKind::Gibbs, rate(ops.gibbs, 3)),
        ]
        .into_iter()
        .filter(|(_, r)| *r != 0.0)
        .map(|(kind, rate)| Rated { kind, rate })
        .collect();
        let crossovers: Vec<Rated<CrossoverKind>> = [
            (CrossoverKind::KPoint, rate(ops.kpoint_crossover, 4)),
            (CrossoverKind::Snooker, rate(ops.snooker, 5)),
            (CrossoverKind::Linear, rate(ops.linear, 6)),
        ]
        .into_iter()
        .filter(|(_, r)| *r != 0.0)
        .map(|(kind, rate)| Rated { kind, rate })
        .collect();
        let sel = SelectionTemps::default();
        OperatorConfig {
            mutations,
            crossovers,
            k_mutation: ops.k_mutation.unwrap_or(1),
            k_crossover: ops.k_crossover.unwrap_or(1),
            initial_variance: ops.initial_variance.unwrap_or(1.0),
            selection: SelectionTemps {
                tau_kc: ops.tau_kc.unwrap_or(sel.tau_kc),
                tau_sc: ops.tau_sc.unwrap_or(sel.tau_sc),
                tau_lc: ops.tau_lc.unwrap_or(sel.tau_lc),
            },
            region_scaling: ops.region_scaling.unwrap_or(false),
            literal_partner: ops.literal_partner.unwrap_or(false),
        }
    };

    let pd = PilotConfig::default();
    let pilot = raw.pilot.map_or(pd, |p| PilotConfig {
        enabled: p.enabled.unwrap_or(pd.enabled),
        fraction: p.fraction.unwrap_or(pd.fraction),
        cap: p.cap.unwrap_or(pd.cap),
        batch: p.batch.unwrap_or(pd.batch),
    });
    let td = TraceConfig::default();
    let trace = raw.trace.map_or(td, |t| TraceConfig {
        stride: t.stride.unwrap_or(td.stride),
        theta_stride: t.theta_stride.unwrap_or(td.theta_stride),
    });

    let replicates = match exp.replicates {
        Some(r) if r >= 1 => r as usize,
        Some(r) => {
            errs.push(format!("experiment.replicates must be at least 1, got {r}"));
            1
        }
        None => 1,
    };
    let kappas: Vec<usize> = exp.kappa.clone().unwrap_or_else(|| vec![1]).into_iter().map(|k| {
        if k < 1 {
            errs.push(format!("kappa must be at least 1, got {k}"));
        }
        k.max(1) as usize
    }).collect();
    if kappas.is_empty() {
        errs.push("experiment.kappa must list at least one population size".into());
    }
    let mut seen = kappas.clone();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != kappas.len() {
        errs.push("experiment.kappa lists a population size twice".into());
    }
    let replicate_threads = non_negative(&mut errs, "experiment.replicate_threads", exp.replicate_threads.unwrap_or(0));

    let mode = run.mode.unwrap_or_default();
    let oracle = raw.oracle.map(|o| {
        let mut options = OracleOptions::default();
        if let (Some(l), Some(u)) = (o.lower.clone(), o.upper.clone()) {
            options.domain = Some((l, u));
        } else if o.lower.is_some() || o.upper.is_some() {
            errs.push("oracle.lower and oracle.upper go together".into());
        }
        if let Some(g) = o.gate {
            options.gate = g;
        }
        if let Some(dm) = o.max_depth {
            options.max_depth = dm;
        }
        let tau = o.tau.unwrap_or(temperature.tau_star);
        if !(tau > 0.0) {
            errs.push("oracle.tau must be positive".into());
        }
        OracleSpec { tau, options }
    });

    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let (Some(problem), Some(partition), Some(desired)) = (problem, partition, desired) else {
        unreachable!("missing pieces are reported as errors above");
    };
    let template = RunConfig {
        mode,
        kappa: kappas[0],
        iterations,
        seed: 0,
        partition,
        desired,
        gain: GainSchedule { n_gamma, beta: template_beta },
        temperature,
        truncation,
        theta_reset: run.theta_reset,
        normalization: run.normalization.unwrap_or_default(),
        operators,
        pilot,
        trace,
        warm_start: raw.warm_start.map(|w| WarmStart { tau0: w.tau0, sweeps: w.sweeps }),
        parallelism: run.parallelism.unwrap_or_default(),
    };
    Ok(ExperimentSpec {
        name: exp.name.unwrap_or_else(|| problem.id()),
        problem,
        template,
        replicates,
        kappas,
        betas,
        seed: exp.seed.unwrap_or(0),
        output: exp.output,
        replicate_threads,
        budget: exp.budget.unwrap_or_default(),
        oracle,
        re_aggregation: exp.re_aggregation.unwrap_or_default(),
        checkpoint_every: exp.checkpoint_every.unwrap_or(0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[problem]
kind = "rastrigin"
dim = 2

[run]
iterations = 100

[partition]
u_min = -0.01
u_max = 40.0
m = 400
"#;

    #[test]
    fn empty_file_lists_required_fields() {
        let Err(Error::Config(msgs)) = parse_experiment("", None) else { panic!("expected config error") };
        let text = msgs.join("\n");
        assert!(text.contains("problem"));
        assert!(text.contains("run.iterations"));
        assert!(text.contains("partition"));
        assert_eq!(msgs.len(), 3, "{msgs:?}");
    }

    #[test]
    fn omitted_values_take_defaults() {
        let spec = parse_experiment(MINIMAL, None).unwrap();
        assert_eq!(spec.template.desired.lambda(), 0.1);
        assert_eq!(spec.template.gain.beta, 0.55);
        assert_eq!(spec.template.truncation, TruncationBounds::default());
        assert_eq!(spec.template.partition.len(), 400);
        assert_eq!(spec.kappas, vec![1]);
        assert_eq!(spec.replicates, 1);
        assert_eq!(spec.template.operators.mutations.len(), 3);
        assert_eq!(spec.template.operators.crossovers.len(), 3);
        assert_eq!(spec.name, "rastrigin-2d");
    }

    #[test]
    fn out_of_range_values_each_get_a_message() {
        let text = format!(
            "{MINIMAL}\n[gain]\nbeta = 0.3\n[desired]\nlambda = -1.0\n[experiment]\nkappa = [0, 4]\n"
        );
        let Err(Error::Config(msgs)) = parse_experiment(&text, None) else { panic!("expected config error") };
        assert!(msgs.iter().any(|m| m.contains("beta") && m.contains("(0.5, 1]")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("lambda")), "{msgs:?}");
        assert!(msgs.iter().any(|m| m.contains("kappa")), "{msgs:?}");
    }

    #[test]
    fn unsorted_grid_is_rejected() {
        let text = MINIMAL.replace("u_min = -0.01\nu_max = 40.0\nm = 400", "grid = [1.0, 0.5, 2.0]");
        let Err(Error::Config(msgs)) = parse_experiment(&text, None) else { panic!("expected config error") };
        assert!(msgs[0].contains("increasing"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = format!("{MINIMAL}\n[pilot]\nbatchsize = 3\n");
        assert!(matches!(parse_experiment(&text, None), Err(Error::Config(_))));
    }

    #[test]
    fn fixed_cost_budget_divides_iterations() {
        let text = format!("{MINIMAL}\n[experiment]\nkappa = [1, 3]\nbudget = \"fixed-cost\"\n");
        let spec = parse_experiment(&text, None).unwrap();
        assert_eq!(spec.iterations_for(1), 100);
        assert_eq!(spec.iterations_for(3), 33);
        let cell = spec.cell_config(3, 0.75, 9);
        assert_eq!((cell.kappa, cell.iterations, cell.seed, cell.gain.beta), (3, 33, 9, 0.75));
    }

    #[test]
    fn ising_defaults_to_gibbs_and_resolves_paths() {
        let text = r#"
[problem]
kind = "ising"
image = "img.pgm"
[run]
iterations = 10
[partition]
grid = [0.0]
"#;
        let spec = parse_experiment(text, Some(Path::new("/data"))).unwrap();
        let ops = &spec.template.operators;
        assert_eq!(ops.mutations.len(), 1);
        assert_eq!(ops.mutations[0].kind, MutationKind::Gibbs);
        assert_eq!(ops.crossovers[0].kind, CrossoverKind::KPoint);
        let ProblemSpec::Ising { image, .. } = &spec.problem else { panic!() };
        assert_eq!(image, Path::new("/data/img.pgm"));
    }
}
