//! The self-adjusting biased Boltzmann target.
//!
//! `ThetaState` carries the working log bias weights, the set of subregions
//! seen so far and the truncation counter. `Target` is the frozen view the
//! samplers evaluate densities against during one sampling update.

use serde::{Deserialize, Serialize};

use crate::schedules::{DesiredProbability, Partition, TruncationBounds};

/// Unnormalized log of the biased Boltzmann density for a point with energy
/// `energy` lying in subregion `j`.
#[inline]
pub fn biased_log_density(energy: f64, j: usize, theta: &[f64], tau: f64) -> f64 {
    -energy / tau - theta[j]
}

/// Log Metropolis ratio `log f(new) - log f(old)` with the conventions that an
/// impossible proposal is never accepted and any possible proposal leaves an
/// impossible current state.
#[inline]
pub fn log_ratio(new: f64, old: f64) -> f64 {
    if new == f64::NEG_INFINITY || new.is_nan() {
        f64::NEG_INFINITY
    } else if old == f64::NEG_INFINITY || old.is_nan() {
        f64::INFINITY
    } else {
        new - old
    }
}

/// Frozen density view used by the move operators.
#[derive(Debug, Clone, Copy)]
pub struct Target<'a> {
    pub tau: f64,
    bias: Option<(&'a Partition, &'a [f64])>,
}

impl<'a> Target<'a> {
    /// Plain Boltzmann density `exp(-U / tau)`; every point sits in subregion 0.
    pub fn boltzmann(tau: f64) -> Self {
        Self { tau, bias: None }
    }

    pub fn biased(tau: f64, partition: &'a Partition, theta: &'a [f64]) -> Self {
        debug_assert_eq!(partition.len(), theta.len());
        Self { tau, bias: Some((partition, theta)) }
    }

    #[inline]
    pub fn locate(&self, energy: f64) -> usize {
        match self.bias {
            Some((p, _)) => p.locate(energy),
            None => 0,
        }
    }

    #[inline]
    pub fn log_density(&self, energy: f64, region: usize) -> f64 {
        if !(energy < f64::INFINITY) {
            return f64::NEG_INFINITY;
        }
        match self.bias {
            Some((_, theta)) => biased_log_density(energy, region, theta, self.tau),
            None => -energy / self.tau,
        }
    }

    pub fn regions(&self) -> usize {
        self.bias.map_or(1, |(p, _)| p.len())
    }
}

/// Empirical subregion proportions of a population, `p_j = #{i : J_i = j} / kappa`.
#[derive(Debug, Clone, PartialEq)]
pub struct VisitProportion {
    p: Vec<f64>,
}

impl VisitProportion {
    pub fn from_indices(indices: &[usize], m: usize) -> Self {
        let mut counts = vec![0usize; m];
        for &j in indices {
            counts[j] += 1;
        }
        let kappa = indices.len().max(1) as f64;
        Self { p: counts.into_iter().map(|c| c as f64 / kappa).collect() }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.p
    }
}

/// How the additive gauge of theta is fixed at the end of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    /// `sum_j exp(theta_j) = 1`.
    #[default]
    UnitSum,
    /// `sum_j pi_j exp(theta_j) = 1`.
    PiWeighted,
}

fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Shift `theta` so the chosen normalization holds over the entries selected
/// by `mask` (all entries when `None`). Unselected entries are left as is.
pub fn normalize_theta(
    theta: &[f64],
    mask: Option<&[bool]>,
    mode: Normalization,
    pi: Option<&[f64]>,
) -> Vec<f64> {
    let selected = |j: usize| mask.is_none_or(|m| m[j]);
    let idx = (0..theta.len()).filter(|&j| selected(j));
    let z = match mode {
        Normalization::UnitSum => -log_sum_exp(idx.map(|j| theta[j])),
        Normalization::PiWeighted => {
            let pi = pi.expect("pi-weighted normalization needs the desired probability");
            -log_sum_exp(idx.map(|j| pi[j].ln() + theta[j]))
        }
    };
    if !z.is_finite() {
        return theta.to_vec();
    }
    theta
        .iter()
        .enumerate()
        .map(|(j, &v)| if selected(j) { v + z } else { v })
        .collect()
}

/// Working bias weights together with the non-empty subregion set and the
/// truncation counter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaState {
    theta: Vec<f64>,
    nonempty: Vec<bool>,
    trunc_count: u32,
    reset: Vec<f64>,
}

impl ThetaState {
    /// Zero weights, zero reset point, nothing visited.
    pub fn new(m: usize) -> Self {
        Self::with_reset(vec![0.0; m])
    }

    pub fn with_reset(reset: Vec<f64>) -> Self {
        Self {
            theta: reset.clone(),
            nonempty: vec![false; reset.len()],
            trunc_count: 0,
            reset,
        }
    }

    /// Fixed weights, every subregion marked non-empty. Used to freeze the
    /// target at known values.
    pub fn frozen(theta: Vec<f64>) -> Self {
        let m = theta.len();
        Self {
            reset: vec![0.0; m],
            nonempty: vec![true; m],
            trunc_count: 0,
            theta,
        }
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn truncations(&self) -> u32 {
        self.trunc_count
    }

    pub fn nonempty_mask(&self) -> &[bool] {
        &self.nonempty
    }

    pub fn nonempty(&self) -> impl Iterator<Item = usize> + '_ {
        self.nonempty.iter().enumerate().filter(|(_, &s)| s).map(|(j, _)| j)
    }

    #[inline]
    pub fn mark_nonempty(&mut self, j: usize) {
        self.nonempty[j] = true;
    }

    /// `theta_j += gamma * (p_j - pi_j)` for every subregion in `S_t`, with
    /// `p` the population proportions. The population's own subregions join
    /// `S_t` first.
    pub fn weight_update(&mut self, indices: &[usize], pi: &DesiredProbability, gamma: f64) {
        let m = self.theta.len();
        assert_eq!(pi.len(), m, "desired probability length must match theta");
        for &j in indices {
            self.nonempty[j] = true;
        }
        let p = VisitProportion::from_indices(indices, m);
        let pi = pi.as_slice();
        for j in 0..m {
            if self.nonempty[j] {
                self.theta[j] += gamma * (p.p[j] - pi[j]);
            }
        }
    }

    /// Euclidean norm of theta restricted to `S_t`.
    pub fn restricted_norm(&self) -> f64 {
        self.nonempty().map(|j| self.theta[j] * self.theta[j]).sum::<f64>().sqrt()
    }

    /// Reset to the initial point and bump the counter when the restricted
    /// norm exceeds the current bound. Returns whether a reset happened.
    pub fn truncate(&mut self, bounds: &TruncationBounds) -> bool {
        let norm = self.restricted_norm();
        if norm <= bounds.bound(self.trunc_count) {
            return false;
        }
        self.theta.clone_from(&self.reset);
        self.trunc_count += 1;
        true
    }

    /// Gauge-fixed copy of theta over `S_t`.
    pub fn normalized(&self, mode: Normalization, pi: &DesiredProbability) -> Vec<f64> {
        normalize_theta(&self.theta, Some(&self.nonempty), mode, Some(pi.as_slice()))
    }
}
