//! Mutation and crossover kernels, partner selection and scale adaptation.
//!
//! Every operator leaves the biased target it is handed invariant. Mutations
//! touch one individual and may run concurrently; crossovers need the whole
//! population.

mod crossover;
mod mutation;
mod selection;

use std::fmt::Debug;

use rand::Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub use crossover::{kpoint_crossover, linear_crossover, segment_swap, snooker_crossover};
pub use mutation::{
    gibbs_conditional, gibbs_pixel_mutation, hit_and_run_mutation, kpoint_mutation,
    metropolis_mutation, unit_direction,
};
pub use selection::{pair_probability, select_pair, select_partner, softmax};

use crate::diagnostics::{enumerate_log_masses, quadrature_log_masses, LogMasses, OracleOptions};
use crate::error::Result;
use crate::problems::Problem;
use crate::schedules::Partition;
use crate::target::{log_ratio, Target};

/// Mutation kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationKind {
    Metropolis,
    HitAndRun,
    KPoint,
    Gibbs,
}

/// Crossover kernels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossoverKind {
    KPoint,
    Snooker,
    Linear,
}

impl MutationKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Metropolis => "metropolis",
            Self::HitAndRun => "hit_and_run",
            Self::KPoint => "kpoint_mutation",
            Self::Gibbs => "gibbs",
        }
    }

    /// Whether the kernel has a proposal scale to adapt.
    pub fn has_scale(self) -> bool {
        self != Self::Gibbs
    }
}

impl CrossoverKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::KPoint => "kpoint_crossover",
            Self::Snooker => "snooker",
            Self::Linear => "linear",
        }
    }

    pub fn has_scale(self) -> bool {
        self == Self::Snooker
    }
}

/// One member of the population with its cached energy and subregion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "G: Gene")]
pub struct Individual<G> {
    pub x: Vec<G>,
    pub energy: f64,
    pub region: usize,
}

impl<G: Gene> Individual<G> {
    pub fn evaluate<P: Problem<Gene = G>>(problem: &P, x: Vec<G>, target: &Target) -> Self {
        let energy = problem.energy(&x);
        Self { region: target.locate(energy), x, energy }
    }

    #[inline]
    pub fn log_density(&self, target: &Target) -> f64 {
        target.log_density(self.energy, self.region)
    }
}

/// What an operator learned while proposing: evaluation count, subregions
/// of proposed states and the lowest energy seen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "G: Gene")]
pub struct Discovery<G> {
    pub evaluations: u64,
    pub regions: Vec<usize>,
    pub best: Option<(f64, Vec<G>)>,
}

impl<G> Default for Discovery<G> {
    fn default() -> Self {
        Self { evaluations: 0, regions: Vec::new(), best: None }
    }
}

impl<G: Gene> Discovery<G> {
    /// Note one freshly evaluated state.
    #[inline]
    pub fn record(&mut self, energy: f64, region: usize, x: &[G]) {
        self.evaluations += 1;
        self.note(energy, region, x);
    }

    /// Note a state whose energy came for free with another evaluation.
    #[inline]
    pub fn note(&mut self, energy: f64, region: usize, x: &[G]) {
        if energy.is_finite() {
            self.regions.push(region);
        }
        if self.best.as_ref().is_none_or(|(e, _)| energy < *e) {
            self.best = Some((energy, x.to_vec()));
        }
    }

    pub fn clear(&mut self) {
        self.evaluations = 0;
        self.regions.clear();
        self.best = None;
    }
}

/// Log proposal variance of one operator, adapted toward a target
/// acceptance rate until frozen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProposalScale {
    pub log_var: f64,
    pub target_rate: f64,
    pub frozen: bool,
}

impl ProposalScale {
    pub fn new(variance: f64) -> Self {
        Self { log_var: variance.ln(), target_rate: 0.234, frozen: false }
    }

    /// The step multiplier `sigma^2`.
    pub fn variance(&self) -> f64 {
        self.log_var.exp()
    }

    /// `log sigma^2 += observed - target`, unless frozen.
    pub fn adapt(&mut self, observed_accept: f64) {
        if !self.frozen {
            self.log_var += observed_accept - self.target_rate;
        }
    }
}

/// Temperatures of the energy softmax used to pick crossover partners.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectionTemps {
    pub tau_kc: f64,
    pub tau_sc: f64,
    pub tau_lc: f64,
}

impl Default for SelectionTemps {
    fn default() -> Self {
        Self { tau_kc: 0.1, tau_sc: 0.1, tau_lc: 0.1 }
    }
}

/// Per-call settings of a mutation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationParams {
    /// Effective `sigma^2`, already multiplied by any state-dependent factor.
    pub step: f64,
    /// Coordinates touched by the k-point mutation.
    pub k: usize,
}

/// Per-call settings of a crossover.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrossoverParams {
    pub snooker_step: f64,
    pub k: usize,
    pub temps: SelectionTemps,
    /// Draw the second partner with the numerator printed in the original
    /// operator description, which does not depend on the candidate.
    pub literal_partner: bool,
}

/// Coordinate types an operator family can act on.
pub trait Gene:
    Copy + PartialEq + Debug + Send + Sync + Serialize + DeserializeOwned + 'static
{
    fn supports_mutation(kind: MutationKind) -> bool;
    fn supports_crossover(kind: CrossoverKind) -> bool;

    /// Apply one mutation to `ind`. Returns whether the state changed
    /// through an accepted move.
    fn mutate<P: Problem<Gene = Self>, R: Rng + ?Sized>(
        problem: &P,
        kind: MutationKind,
        params: &MutationParams,
        ind: &mut Individual<Self>,
        target: &Target,
        rng: &mut R,
        log: &mut Discovery<Self>,
    ) -> bool;

    /// Apply one crossover to the population. Returns acceptance.
    fn crossover<P: Problem<Gene = Self>, R: Rng + ?Sized>(
        problem: &P,
        kind: CrossoverKind,
        params: &CrossoverParams,
        pop: &mut [Individual<Self>],
        target: &Target,
        rng: &mut R,
        log: &mut Discovery<Self>,
    ) -> bool;

    /// Per-subregion `log ∫ exp(-U / tau)` for the oracle; `depth` is the
    /// quadrature refinement level where one applies.
    fn oracle_log_masses<P: Problem<Gene = Self>>(
        problem: &P,
        partition: &Partition,
        tau: f64,
        opts: &OracleOptions,
        depth: u32,
    ) -> Result<LogMasses>;
}

impl Gene for f64 {
    fn supports_mutation(kind: MutationKind) -> bool {
        kind != MutationKind::Gibbs
    }

    fn supports_crossover(_: CrossoverKind) -> bool {
        true
    }

    fn mutate<P: Problem<Gene = f64>, R: Rng + ?Sized>(
        problem: &P,
        kind: MutationKind,
        params: &MutationParams,
        ind: &mut Individual<f64>,
        target: &Target,
        rng: &mut R,
        log: &mut Discovery<f64>,
    ) -> bool {
        match kind {
            MutationKind::Metropolis => metropolis_mutation(problem, ind, params.step, target, rng, log),
            MutationKind::HitAndRun => hit_and_run_mutation(problem, ind, params.step, target, rng, log),
            MutationKind::KPoint => kpoint_mutation(problem, ind, params.k, params.step, target, rng, log),
            MutationKind::Gibbs => unreachable!("gibbs mutation on a continuous space"),
        }
    }

    fn crossover<P: Problem<Gene = f64>, R: Rng + ?Sized>(
        problem: &P,
        kind: CrossoverKind,
        params: &CrossoverParams,
        pop: &mut [Individual<f64>],
        target: &Target,
        rng: &mut R,
        log: &mut Discovery<f64>,
    ) -> bool {
        match kind {
            CrossoverKind::KPoint => kpoint_crossover(problem, pop, params, target, rng, log),
            CrossoverKind::Snooker => snooker_crossover(problem, pop, params, target, rng, log),
            CrossoverKind::Linear => linear_crossover(problem, pop, params, target, rng, log),
        }
    }

    fn oracle_log_masses<P: Problem<Gene = f64>>(
        problem: &P,
        partition: &Partition,
        tau: f64,
        opts: &OracleOptions,
        depth: u32,
    ) -> Result<LogMasses> {
        quadrature_log_masses(problem, partition, tau, opts, depth)
    }
}

impl Gene for u8 {
    fn supports_mutation(kind: MutationKind) -> bool {
        kind == MutationKind::Gibbs
    }

    fn supports_crossover(kind: CrossoverKind) -> bool {
        kind == CrossoverKind::KPoint
    }

    fn mutate<P: Problem<Gene = u8>, R: Rng + ?Sized>(
        problem: &P,
        kind: MutationKind,
        _params: &MutationParams,
        ind: &mut Individual<u8>,
        target: &Target,
        rng: &mut R,
        log: &mut Discovery<u8>,
    ) -> bool {
        match kind {
            MutationKind::Gibbs => gibbs_pixel_mutation(problem, ind, target, rng, log),
            other => unreachable!("{} mutation on a binary space", other.name()),
        }
    }

    fn crossover<P: Problem<Gene = u8>, R: Rng + ?Sized>(
        problem: &P,
        kind: CrossoverKind,
        params: &CrossoverParams,
        pop: &mut [Individual<u8>],
        target: &Target,
        rng: &mut R,
        log: &mut Discovery<u8>,
    ) -> bool {
        match kind {
            CrossoverKind::KPoint => kpoint_crossover(problem, pop, params, target, rng, log),
            other => unreachable!("{} crossover on a binary space", other.name()),
        }
    }

    fn oracle_log_masses<P: Problem<Gene = u8>>(
        problem: &P,
        partition: &Partition,
        tau: f64,
        _opts: &OracleOptions,
        _depth: u32,
    ) -> Result<LogMasses> {
        enumerate_log_masses(problem, partition, tau)
    }
}

/// Evaluate `proposal` and apply the Metropolis rule against `ind`.
/// Out-of-support proposals are rejected without evaluation or a uniform
/// draw.
pub(crate) fn metropolis_accept<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    ind: &mut Individual<P::Gene>,
    mut proposal: Vec<P::Gene>,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<P::Gene>,
) -> bool {
    if !problem.constrain(&mut proposal) {
        return false;
    }
    let energy = problem.energy(&proposal);
    let region = target.locate(energy);
    log.record(energy, region, &proposal);
    let lr = log_ratio(target.log_density(energy, region), ind.log_density(target));
    let u: f64 = rng.random();
    if lr >= 0.0 || u < lr.exp() {
        ind.x = proposal;
        ind.energy = energy;
        ind.region = region;
        true
    } else {
        false
    }
}
