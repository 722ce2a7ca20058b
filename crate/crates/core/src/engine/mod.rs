//! The annealing recursion.
//!
//! One iteration runs a sampling update (a parallel mutation phase followed
//! by a serial crossover phase) against the frozen bias weights, then the
//! weight update and the truncation check. The same engine runs plain
//! simulated annealing when the mode switches the bias machinery off, and
//! the independent-parallel mode is a set of single-chain engines.

mod checkpoint;
mod rng;
mod trace;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use checkpoint::{load_checkpoint, peek_checkpoint, save_checkpoint, CHECKPOINT_VERSION};
pub use rng::{derive_seed, stream, CROSSOVER_STREAM};
pub use trace::{Trace, TraceRecord};

use crate::error::{Error, Result};
use crate::moves::{
    CrossoverKind, CrossoverParams, Discovery, Gene, Individual, MutationKind, MutationParams,
    ProposalScale, SelectionTemps,
};
use crate::problems::Problem;
use crate::schedules::{DesiredProbability, GainSchedule, Partition, TemperatureLadder, TruncationBounds};
use crate::target::{Normalization, Target, ThetaState};

/// Which algorithm a run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Interacting population sharing one set of bias weights.
    #[default]
    Pisaa,
    /// Independent single-chain runs, one per population member.
    Psaa,
    /// Simulated annealing on the plain Boltzmann target.
    Sa,
}

/// Whether the mutation phase fans out over threads. The trajectory is the
/// same either way.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parallelism {
    #[default]
    Auto,
    Serial,
    Parallel,
}

/// An operator with its selection rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rated<K> {
    pub kind: K,
    pub rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorConfig {
    pub mutations: Vec<Rated<MutationKind>>,
    pub crossovers: Vec<Rated<CrossoverKind>>,
    pub k_mutation: usize,
    pub k_crossover: usize,
    /// Starting `sigma^2` of every scaled operator.
    pub initial_variance: f64,
    pub selection: SelectionTemps,
    /// Multiply mutation steps by `(j + 1) / (m + 1)` for an individual in
    /// subregion `j` (0-based).
    pub region_scaling: bool,
    pub literal_partner: bool,
}

impl OperatorConfig {
    /// Only the given mutations, each at rate 1, no crossovers.
    pub fn mutations_only(kinds: &[MutationKind]) -> Self {
        Self {
            mutations: kinds.iter().map(|&kind| Rated { kind, rate: 1.0 }).collect(),
            crossovers: Vec::new(),
            k_mutation: 1,
            k_crossover: 1,
            initial_variance: 1.0,
            selection: SelectionTemps::default(),
            region_scaling: false,
            literal_partner: false,
        }
    }

    /// Every continuous mutation and crossover at equal rates.
    pub fn continuous_all() -> Self {
        Self {
            crossovers: [CrossoverKind::KPoint, CrossoverKind::Snooker, CrossoverKind::Linear]
                .into_iter()
                .map(|kind| Rated { kind, rate: 1.0 })
                .collect(),
            ..Self::mutations_only(&[MutationKind::Metropolis, MutationKind::HitAndRun, MutationKind::KPoint])
        }
    }
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self::mutations_only(&[MutationKind::Metropolis])
    }
}

/// Adaptation of proposal scales during the first iterations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConfig {
    pub enabled: bool,
    /// Share of the run used for adaptation.
    pub fraction: f64,
    /// Upper bound on the adaptation window, in iterations.
    pub cap: u64,
    /// Iterations per adaptation step.
    pub batch: u64,
}

impl Default for PilotConfig {
    fn default() -> Self {
        Self { enabled: true, fraction: 0.05, cap: 10_000, batch: 50 }
    }
}

impl PilotConfig {
    /// Number of leading iterations during which scales adapt.
    pub fn window(&self, iterations: u64) -> u64 {
        if !self.enabled {
            return 0;
        }
        ((self.fraction * iterations as f64).ceil() as u64).min(self.cap)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceConfig {
    /// Iterations between trace rows.
    pub stride: u64,
    /// Iterations between rows carrying visit and theta columns.
    pub theta_stride: u64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        Self { stride: 1, theta_stride: 100 }
    }
}

/// Short random-walk prelude at a high temperature before the first
/// iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WarmStart {
    pub tau0: f64,
    pub sweeps: u64,
}

/// Everything a single run needs besides the problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub mode: Mode,
    pub kappa: usize,
    pub iterations: u64,
    pub seed: u64,
    pub partition: Partition,
    pub desired: DesiredProbability,
    pub gain: GainSchedule,
    pub temperature: TemperatureLadder,
    pub truncation: TruncationBounds,
    pub theta_reset: Option<Vec<f64>>,
    pub normalization: Normalization,
    pub operators: OperatorConfig,
    pub pilot: PilotConfig,
    pub trace: TraceConfig,
    pub warm_start: Option<WarmStart>,
    pub parallelism: Parallelism,
}

impl RunConfig {
    /// Single-chain configuration over `partition` with the default
    /// schedules; callers override what they need.
    pub fn new(partition: Partition, desired: DesiredProbability) -> Self {
        Self {
            mode: Mode::Pisaa,
            kappa: 1,
            iterations: 1000,
            seed: 0,
            partition,
            desired,
            gain: GainSchedule { n_gamma: 100_000, beta: 0.55 },
            temperature: TemperatureLadder { tau_h: 1.0, n_tau: 1, tau_star: 0.01 },
            truncation: TruncationBounds::default(),
            theta_reset: None,
            normalization: Normalization::UnitSum,
            operators: OperatorConfig::default(),
            pilot: PilotConfig::default(),
            trace: TraceConfig::default(),
            warm_start: None,
            parallelism: Parallelism::Auto,
        }
    }

    /// Check the configuration against a problem, reporting every problem
    /// found.
    pub fn validate<P: Problem>(&self, problem: &P) -> Result<()> {
        let mut errs = Vec::new();
        let d = problem.dim();
        if self.kappa < 1 {
            errs.push("kappa must be at least 1".to_string());
        }
        if self.partition.len() != self.desired.len() {
            errs.push(format!(
                "partition has {} subregions but the desired probability has {}",
                self.partition.len(),
                self.desired.len()
            ));
        }
        if let Some(r) = &self.theta_reset {
            if r.len() != self.partition.len() {
                errs.push(format!("theta_reset has {} entries, expected {}", r.len(), self.partition.len()));
            }
            if r.iter().any(|v| !v.is_finite()) {
                errs.push("theta_reset entries must be finite".into());
            }
        }
        let ops = &self.operators;
        if !ops.mutations.iter().any(|m| m.rate > 0.0) {
            errs.push("at least one mutation operator needs a positive rate".into());
        }
        for m in &ops.mutations {
            if !(m.rate >= 0.0) || !m.rate.is_finite() {
                errs.push(format!("rate of {} must be finite and non-negative", m.kind.name()));
            }
            if !P::Gene::supports_mutation(m.kind) {
                errs.push(format!("{} does not apply to this sample space", m.kind.name()));
            }
            if m.kind == MutationKind::KPoint && m.rate > 0.0 && !(ops.k_mutation >= 1 && ops.k_mutation < d) {
                errs.push(format!("k-point mutation needs 1 <= k < d, got k = {}, d = {d}", ops.k_mutation));
            }
        }
        for c in &ops.crossovers {
            if !(c.rate >= 0.0) || !c.rate.is_finite() {
                errs.push(format!("rate of {} must be finite and non-negative", c.kind.name()));
            }
            if !P::Gene::supports_crossover(c.kind) {
                errs.push(format!("{} does not apply to this sample space", c.kind.name()));
            }
            if c.kind == CrossoverKind::KPoint && c.rate > 0.0 && !(ops.k_crossover >= 1 && ops.k_crossover < d) {
                errs.push(format!("k-point crossover needs 1 <= k <= d - 1, got k = {}, d = {d}", ops.k_crossover));
            }
        }
        if !(ops.initial_variance > 0.0) || !ops.initial_variance.is_finite() {
            errs.push("initial_variance must be positive".into());
        }
        let t = ops.selection;
        if !(t.tau_kc > 0.0 && t.tau_sc > 0.0 && t.tau_lc > 0.0) {
            errs.push("selection temperatures must be positive".into());
        }
        if self.trace.stride == 0 || self.trace.theta_stride == 0 {
            errs.push("trace strides must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.pilot.fraction) || self.pilot.batch == 0 {
            errs.push("pilot fraction must lie in [0, 1] and pilot batch must be positive".into());
        }
        if let Some(w) = self.warm_start {
            if !(w.tau0 > 0.0) {
                errs.push("warm start temperature must be positive".into());
            }
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    fn operator_names(&self) -> Vec<String> {
        let ops = &self.operators;
        ops.mutations
            .iter()
            .map(|m| m.kind.name().to_string())
            .chain(ops.crossovers.iter().map(|c| c.kind.name().to_string()))
            .collect()
    }
}

/// Everything that evolves during a run; enough to resume it exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "G: Gene")]
pub struct EngineState<G> {
    pub t: u64,
    pub population: Vec<Individual<G>>,
    pub theta: ThetaState,
    pub rngs: Vec<ChaCha8Rng>,
    pub crossover_rng: ChaCha8Rng,
    /// Proposal scales, mutations first then crossovers.
    pub scales: Vec<ProposalScale>,
    /// `(attempts, accepts)` per operator over the whole run.
    pub totals: Vec<(u64, u64)>,
    window: Vec<(u64, u64)>,
    batch: Vec<(u64, u64)>,
    pub best_energy: f64,
    pub best_point: Vec<G>,
    pub visits: Vec<u64>,
    pub evaluations: u64,
    pub trace: Trace,
}

/// Result of a completed run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput<G> {
    pub trace: Trace,
    pub best_energy: f64,
    pub best_point: Vec<G>,
    /// Gauge-fixed bias weights at the end of the run.
    pub theta: Option<Vec<f64>>,
    pub theta_state: Option<ThetaState>,
    pub evaluations: u64,
    pub scales: Vec<ProposalScale>,
    pub totals: Vec<(u64, u64)>,
    pub population: Vec<Individual<G>>,
}

/// A single interacting population (or a set of annealing chains in SA
/// mode) stepping through the recursion.
pub struct Engine<'p, P: Problem> {
    problem: &'p P,
    cfg: RunConfig,
    state: EngineState<P::Gene>,
    logs: Vec<Discovery<P::Gene>>,
    outcomes: Vec<(usize, bool)>,
    cross_log: Discovery<P::Gene>,
}

fn pick<K, R: Rng + ?Sized>(ops: &[Rated<K>], total: f64, rng: &mut R) -> usize {
    if ops.len() == 1 {
        return 0;
    }
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (k, op) in ops.iter().enumerate() {
        if op.rate > 0.0 {
            if u < op.rate {
                return k;
            }
            u -= op.rate;
            last = k;
        }
    }
    last
}

impl<'p, P: Problem> Engine<'p, P> {
    /// Validate, seed the streams and draw the initial population.
    pub fn new(problem: &'p P, cfg: RunConfig) -> Result<Self> {
        cfg.validate(problem)?;
        if cfg.mode == Mode::Psaa {
            return Err(Error::config("independent-parallel mode runs through `run`, not a single engine"));
        }
        let kappa = cfg.kappa;
        let mut rngs: Vec<ChaCha8Rng> = (0..kappa as u64).map(|i| stream(cfg.seed, i)).collect();
        let biased = cfg.mode != Mode::Sa;
        let m = if biased { cfg.partition.len() } else { 1 };
        let reset = cfg.theta_reset.clone().filter(|_| biased).unwrap_or_else(|| vec![0.0; m]);
        let mut theta = ThetaState::with_reset(reset);
        let population: Vec<Individual<P::Gene>> = {
            let zero = vec![0.0; m];
            let target = Self::target_for(&cfg, 1.0, &zero);
            rngs.iter_mut()
                .map(|rng| Individual::evaluate(problem, problem.random_point(rng), &target))
                .collect()
        };
        if biased {
            for ind in &population {
                if ind.energy.is_finite() {
                    theta.mark_nonempty(ind.region);
                }
            }
        }
        let (best_energy, best_point) = population
            .iter()
            .min_by(|a, b| a.energy.total_cmp(&b.energy))
            .map(|b| (b.energy, b.x.clone()))
            .expect("population is non-empty");
        let n_ops = cfg.operators.mutations.len() + cfg.operators.crossovers.len();
        let trace = Trace::new(cfg.operator_names(), if biased { m } else { 0 });
        let state = EngineState {
            t: 0,
            evaluations: kappa as u64,
            population,
            theta,
            rngs,
            crossover_rng: stream(cfg.seed, CROSSOVER_STREAM),
            scales: vec![ProposalScale::new(cfg.operators.initial_variance); n_ops],
            totals: vec![(0, 0); n_ops],
            window: vec![(0, 0); n_ops],
            batch: vec![(0, 0); n_ops],
            best_energy,
            best_point,
            visits: vec![0; m],
            trace,
        };
        let mut engine = Self::assemble(problem, cfg, state);
        if let Some(w) = engine.cfg.warm_start {
            engine.warm_start(w);
        }
        engine.record_row(true);
        Ok(engine)
    }

    /// Continue from a saved state.
    pub fn resume(problem: &'p P, cfg: RunConfig, state: EngineState<P::Gene>) -> Result<Self> {
        cfg.validate(problem)?;
        let n_ops = cfg.operators.mutations.len() + cfg.operators.crossovers.len();
        if state.population.len() != cfg.kappa || state.rngs.len() != cfg.kappa || state.scales.len() != n_ops {
            return Err(Error::Checkpoint("saved state does not match the configuration".into()));
        }
        if state.population.iter().any(|p| p.x.len() != problem.dim()) {
            return Err(Error::Checkpoint("saved population has the wrong dimension".into()));
        }
        Ok(Self::assemble(problem, cfg, state))
    }

    fn assemble(problem: &'p P, cfg: RunConfig, state: EngineState<P::Gene>) -> Self {
        let kappa = cfg.kappa;
        Self {
            problem,
            cfg,
            state,
            logs: (0..kappa).map(|_| Discovery::default()).collect(),
            outcomes: vec![(0, false); kappa],
            cross_log: Discovery::default(),
        }
    }

    fn target_for<'a>(cfg: &'a RunConfig, tau: f64, theta: &'a [f64]) -> Target<'a> {
        if cfg.mode == Mode::Sa {
            Target::boltzmann(tau)
        } else {
            Target::biased(tau, &cfg.partition, theta)
        }
    }

    fn biased(&self) -> bool {
        self.cfg.mode != Mode::Sa
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EngineState<P::Gene> {
        &self.state
    }

    pub fn into_state(self) -> EngineState<P::Gene> {
        self.state
    }

    pub fn t(&self) -> u64 {
        self.state.t
    }

    pub fn population(&self) -> &[Individual<P::Gene>] {
        &self.state.population
    }

    pub fn theta(&self) -> &ThetaState {
        &self.state.theta
    }

    pub fn evaluations(&self) -> u64 {
        self.state.evaluations
    }

    pub fn best(&self) -> (f64, &[P::Gene]) {
        (self.state.best_energy, &self.state.best_point)
    }

    pub fn scales(&self) -> &[ProposalScale] {
        &self.state.scales
    }

    /// Cumulative `(attempts, accepts)` per operator.
    pub fn acceptance_totals(&self) -> &[(u64, u64)] {
        &self.state.totals
    }

    fn use_threads(&self) -> bool {
        match self.cfg.parallelism {
            Parallelism::Serial => false,
            Parallelism::Parallel => true,
            Parallelism::Auto => self.cfg.kappa >= 2 && self.cfg.kappa * self.problem.dim() >= 4096,
        }
    }

    /// One sampling update against `theta` (ignored in SA mode) at
    /// temperature `tau`. When `track` is set, proposed subregions join the
    /// non-empty set.
    fn sampling_update(&mut self, tau: f64, theta: &[f64], track: bool) {
        let threads = self.use_threads();
        let Self { problem, cfg, state, logs, outcomes, cross_log } = self;
        let problem: &P = problem;
        let target = Self::target_for(cfg, tau, theta);
        let ops = &cfg.operators;
        let n_mut = ops.mutations.len();
        let mut_total: f64 = ops.mutations.iter().map(|m| m.rate).sum();
        let m_plus_one = (cfg.partition.len() + 1) as f64;
        let scales = &state.scales;
        let mutate_one = |ind: &mut Individual<P::Gene>, rng: &mut ChaCha8Rng, log: &mut Discovery<P::Gene>| {
            let op = pick(&ops.mutations, mut_total, rng);
            let mut step = scales[op].variance();
            if ops.region_scaling {
                step *= (ind.region + 1) as f64 / m_plus_one;
            }
            let params = MutationParams { step, k: ops.k_mutation };
            let accepted = P::Gene::mutate(problem, ops.mutations[op].kind, &params, ind, &target, rng, log);
            (op, accepted)
        };
        if threads {
            state
                .population
                .par_iter_mut()
                .zip(state.rngs.par_iter_mut())
                .zip(logs.par_iter_mut())
                .zip(outcomes.par_iter_mut())
                .for_each(|(((ind, rng), log), out)| *out = mutate_one(ind, rng, log));
        } else {
            for (((ind, rng), log), out) in
                state.population.iter_mut().zip(state.rngs.iter_mut()).zip(logs.iter_mut()).zip(outcomes.iter_mut())
            {
                *out = mutate_one(ind, rng, log);
            }
        }
        for &(op, acc) in outcomes.iter() {
            Self::count(state, op, acc);
        }

        let cross_total: f64 = ops.crossovers.iter().map(|c| c.rate).sum();
        if cfg.kappa >= 2 && cross_total > 0.0 {
            let expected = cfg.kappa as f64 * cross_total / mut_total;
            let mut count = expected.floor() as u64;
            let frac = expected - expected.floor();
            if frac > 0.0 && state.crossover_rng.random::<f64>() < frac {
                count += 1;
            }
            for _ in 0..count {
                let op = pick(&ops.crossovers, cross_total, &mut state.crossover_rng);
                let params = CrossoverParams {
                    snooker_step: state.scales[n_mut + op].variance(),
                    k: ops.k_crossover,
                    temps: ops.selection,
                    literal_partner: ops.literal_partner,
                };
                let accepted = P::Gene::crossover(
                    problem,
                    ops.crossovers[op].kind,
                    &params,
                    &mut state.population,
                    &target,
                    &mut state.crossover_rng,
                    cross_log,
                );
                Self::count(state, n_mut + op, accepted);
            }
        }

        let track = track && cfg.mode != Mode::Sa;
        for log in logs.iter_mut().chain(std::iter::once(cross_log)) {
            state.evaluations += log.evaluations;
            if track {
                for &j in &log.regions {
                    state.theta.mark_nonempty(j);
                }
            }
            if let Some((e, x)) = log.best.take() {
                if e < state.best_energy {
                    state.best_energy = e;
                    state.best_point = x;
                }
            }
            log.clear();
        }
    }

    fn count(state: &mut EngineState<P::Gene>, op: usize, accepted: bool) {
        let acc = u64::from(accepted);
        for c in [&mut state.totals[op], &mut state.window[op], &mut state.batch[op]] {
            c.0 += 1;
            c.1 += acc;
        }
    }

    fn warm_start(&mut self, w: WarmStart) {
        let sa = RunConfig { mode: Mode::Sa, ..self.cfg.clone() };
        let original = std::mem::replace(&mut self.cfg, sa);
        for _ in 0..w.sweeps {
            self.sampling_update(w.tau0, &[], false);
        }
        self.cfg = original;
        for ind in &mut self.state.population {
            ind.region = self.cfg.partition.locate(ind.energy);
        }
        if self.biased() {
            for ind in &self.state.population {
                if ind.energy.is_finite() {
                    self.state.theta.mark_nonempty(ind.region);
                }
            }
        }
        for c in self.state.totals.iter_mut().chain(&mut self.state.window).chain(&mut self.state.batch) {
            *c = (0, 0);
        }
    }

    /// One full iteration: sampling update, weight update, truncation.
    pub fn step(&mut self) {
        let t = self.state.t + 1;
        let tau = self.cfg.temperature.temperature_at(t);
        let theta = self.state.theta.theta().to_vec();
        self.sampling_update(tau, &theta, true);
        if self.biased() {
            let indices: Vec<usize> = self.state.population.iter().map(|p| p.region).collect();
            let gamma = self.cfg.gain.gain_at(t);
            self.state.theta.weight_update(&indices, &self.cfg.desired, gamma);
            self.state.theta.truncate(&self.cfg.truncation);
            for j in indices {
                self.state.visits[j] += 1;
            }
        }
        self.state.t = t;
        self.adapt(t);
        let n = self.cfg.iterations;
        let tc = self.cfg.trace;
        if t % tc.stride == 0 || t % tc.theta_stride == 0 || t == n {
            self.record_row(t % tc.theta_stride == 0 || t == n);
        }
    }

    fn adapt(&mut self, t: u64) {
        let window = self.cfg.pilot.window(self.cfg.iterations);
        if t > window {
            return;
        }
        if t % self.cfg.pilot.batch == 0 || t == window {
            let n_mut = self.cfg.operators.mutations.len();
            let scaled = self
                .cfg
                .operators
                .mutations
                .iter()
                .map(|m| m.kind.has_scale())
                .chain(self.cfg.operators.crossovers.iter().map(|c| c.kind.has_scale()));
            for (op, has_scale) in scaled.enumerate() {
                let (n, a) = self.state.batch[op];
                if has_scale && n > 0 {
                    self.state.scales[op].adapt(a as f64 / n as f64);
                }
                self.state.batch[op] = (0, 0);
            }
            let _ = n_mut;
        }
        if t == window {
            for s in &mut self.state.scales {
                s.frozen = true;
            }
        }
    }

    fn record_row(&mut self, with_theta: bool) {
        let t = self.state.t;
        let tt = t.max(1);
        let biased = self.biased();
        let rec = TraceRecord {
            t,
            tau: self.cfg.temperature.temperature_at(tt),
            gamma: if biased { self.cfg.gain.gain_at(tt) } else { f64::NAN },
            best_energy: self.state.best_energy,
            accept: std::mem::replace(&mut self.state.window, vec![(0, 0); self.state.totals.len()]),
            visits: (biased && with_theta).then(|| self.state.visits.clone()),
            theta: (biased && with_theta).then(|| self.state.theta.theta().to_vec()),
        };
        self.state.trace.records.push(rec);
    }

    /// Step until iteration `t_end` (or the configured end, whichever comes
    /// first).
    pub fn run_until(&mut self, t_end: u64) {
        let end = t_end.min(self.cfg.iterations);
        while self.state.t < end {
            self.step();
        }
    }

    /// A sampling update against fixed bias weights and temperature. The
    /// weights, the non-empty set and the iteration counter are untouched.
    pub fn sweep_frozen(&mut self, theta: &[f64], tau: f64) {
        assert_eq!(theta.len(), self.cfg.partition.len(), "theta length must match the partition");
        self.sampling_update(tau, theta, false);
    }

    /// Run to the configured number of iterations and gauge-fix theta.
    pub fn run(mut self) -> RunOutput<P::Gene> {
        self.run_until(self.cfg.iterations);
        self.finish()
    }

    /// Package the current state as a result.
    pub fn finish(self) -> RunOutput<P::Gene> {
        let biased = self.biased();
        let s = self.state;
        let theta = biased.then(|| s.theta.normalized(self.cfg.normalization, &self.cfg.desired));
        RunOutput {
            trace: s.trace,
            best_energy: s.best_energy,
            best_point: s.best_point,
            theta,
            theta_state: biased.then_some(s.theta),
            evaluations: s.evaluations,
            scales: s.scales,
            totals: s.totals,
            population: s.population,
        }
    }
}

/// Run a configuration in its declared mode.
pub fn run<P: Problem>(problem: &P, cfg: &RunConfig) -> Result<RunOutput<P::Gene>> {
    match cfg.mode {
        Mode::Psaa => run_independent(problem, cfg),
        _ => Ok(Engine::new(problem, cfg.clone())?.run()),
    }
}

/// Simulated annealing baseline; `cfg.mode` must be [`Mode::Sa`].
pub fn sa_run<P: Problem>(problem: &P, cfg: &RunConfig) -> Result<RunOutput<P::Gene>> {
    if cfg.mode != Mode::Sa {
        return Err(Error::config("sa_run needs mode = sa"));
    }
    Ok(Engine::new(problem, cfg.clone())?.run())
}

/// Seed of chain `chain` in the independent-parallel mode.
pub fn chain_seed(seed: u64, chain: u64) -> u64 {
    derive_seed("chain", &[&seed.to_le_bytes(), &chain.to_le_bytes()])
}

/// `kappa` single-chain runs with their own seeds and bias weights. The
/// merged trace takes the best energy over chains; the reported theta is
/// the average of the chains' gauge-fixed weights.
fn run_independent<P: Problem>(problem: &P, cfg: &RunConfig) -> Result<RunOutput<P::Gene>> {
    let chain_cfg = |c: usize| RunConfig {
        mode: Mode::Pisaa,
        kappa: 1,
        seed: chain_seed(cfg.seed, c as u64),
        ..cfg.clone()
    };
    chain_cfg(0).validate(problem)?;
    let one = |c: usize| Engine::new(problem, chain_cfg(c)).map(Engine::run);
    let outs: Vec<RunOutput<P::Gene>> = if cfg.parallelism == Parallelism::Serial {
        (0..cfg.kappa).map(one).collect::<Result<_>>()?
    } else {
        (0..cfg.kappa).into_par_iter().map(one).collect::<Result<_>>()?
    };
    let traces: Vec<Trace> = outs.iter().map(|o| o.trace.clone()).collect();
    let trace = Trace::merge_independent(&traces).expect("at least one chain");
    let best = outs
        .iter()
        .min_by(|a, b| a.best_energy.total_cmp(&b.best_energy))
        .expect("at least one chain");
    let m = cfg.partition.len();
    let theta = (0..m)
        .map(|j| outs.iter().map(|o| o.theta.as_ref().map_or(0.0, |t| t[j])).sum::<f64>() / outs.len() as f64)
        .collect();
    let n_ops = best.totals.len();
    let totals = (0..n_ops)
        .map(|k| outs.iter().fold((0, 0), |(n, a), o| (n + o.totals[k].0, a + o.totals[k].1)))
        .collect();
    Ok(RunOutput {
        trace,
        best_energy: best.best_energy,
        best_point: best.best_point.clone(),
        theta: Some(theta),
        theta_state: None,
        evaluations: outs.iter().map(|o| o.evaluations).sum(),
        scales: best.scales.clone(),
        totals,
        population: outs.iter().flat_map(|o| o.population.iter().cloned()).collect(),
    })
}
