use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{metropolis_accept, pair_probability, select_pair, select_partner, CrossoverParams, Discovery, Individual};
use crate::problems::Problem;
use crate::target::{log_ratio, Target};

/// Swap the coordinate blocks `[p_1, p_2), [p_3, p_4), ...` between `a` and
/// `b`. With an odd number of points the last block runs to the end.
/// Points are sorted and lie in `1..d`.
pub fn segment_swap<G>(a: &mut [G], b: &mut [G], points: &[usize]) {
    let d = a.len();
    for pair in points.chunks(2) {
        let start = pair[0];
        let end = pair.get(1).copied().unwrap_or(d);
        a[start..end].swap_with_slice(&mut b[start..end]);
    }
}

/// Exchange `k` segments between two energy-selected parents and accept both
/// children jointly.
pub fn kpoint_crossover<P: Problem, R: Rng + ?Sized>(
    problem: &P,
    pop: &mut [Individual<P::Gene>],
    params: &CrossoverParams,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<P::Gene>,
) -> bool {
    let energies: Vec<f64> = pop.iter().map(|p| p.energy).collect();
    let temp = params.temps.tau_kc;
    let Ok((i, j, forward)) = select_pair(&energies, temp, params.literal_partner, rng) else {
        return false;
    };
    let d = pop[i].x.len();
    assert!(params.k >= 1 && params.k < d, "k-point crossover needs 1 <= k < d");
    let mut points: Vec<usize> = index::sample(rng, d - 1, params.k).into_iter().map(|p| p + 1).collect();
    points.sort_unstable();
    let mut child_i = pop[i].x.clone();
    let mut child_j = pop[j].x.clone();
    segment_swap(&mut child_i, &mut child_j, &points);
    if !problem.constrain(&mut child_i) || !problem.constrain(&mut child_j) {
        return false;
    }
    let (ei, ej) = (problem.energy(&child_i), problem.energy(&child_j));
    let (ri, rj) = (target.locate(ei), target.locate(ej));
    log.record(ei, ri, &child_i);
    log.record(ej, rj, &child_j);

    let mut new_energies = energies;
    new_energies[i] = ei;
    new_energies[j] = ej;
    let reverse = pair_probability(&new_energies, temp, i, j, params.literal_partner);
    let density = log_ratio(target.log_density(ei, ri), pop[i].log_density(target))
        + log_ratio(target.log_density(ej, rj), pop[j].log_density(target));
    let lr = density + reverse.ln() - forward.ln();
    let u: f64 = rng.random();
    if lr >= 0.0 || u < lr.exp() {
        pop[i] = Individual { x: child_i, energy: ei, region: ri };
        pop[j] = Individual { x: child_j, energy: ej, region: rj };
        true
    } else {
        false
    }
}

/// Move a uniformly chosen individual along the line toward an
/// energy-selected partner.
pub fn snooker_crossover<P: Problem<Gene = f64>, R: Rng + ?Sized>(
    problem: &P,
    pop: &mut [Individual<f64>],
    params: &CrossoverParams,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<f64>,
) -> bool {
    if pop.len() < 2 {
        return false;
    }
    let energies: Vec<f64> = pop.iter().map(|p| p.energy).collect();
    let i = rng.random_range(0..pop.len());
    let j = select_partner(&energies, i, params.temps.tau_sc, params.literal_partner, rng);
    let diff: Vec<f64> = pop[j].x.iter().zip(&pop[i].x).map(|(b, a)| b - a).collect();
    let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    let r: f64 = rng.sample(StandardNormal);
    let scale = params.snooker_step * r / norm;
    let proposal = pop[i].x.iter().zip(&diff).map(|(a, v)| a + scale * v).collect();
    metropolis_accept(problem, &mut pop[i], proposal, target, rng, log)
}

/// Propose `x_i + r x_j` with `r ~ U(-1, 1)` for a uniformly chosen `i` and
/// an energy-selected partner `j`.
pub fn linear_crossover<P: Problem<Gene = f64>, R: Rng + ?Sized>(
    problem: &P,
    pop: &mut [Individual<f64>],
    params: &CrossoverParams,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<f64>,
) -> bool {
    if pop.len() < 2 {
        return false;
    }
    let energies: Vec<f64> = pop.iter().map(|p| p.energy).collect();
    let i = rng.random_range(0..pop.len());
    let j = select_partner(&energies, i, params.temps.tau_lc, params.literal_partner, rng);
    let r = open_unit_interval(rng);
    let proposal = pop[i].x.iter().zip(&pop[j].x).map(|(a, b)| a + r * b).collect();
    metropolis_accept(problem, &mut pop[i], proposal, target, rng, log)
}

/// Uniform draw on the open interval `(-1, 1)`.
fn open_unit_interval<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let r = rng.random_range(-1.0..1.0);
        if r != -1.0 {
            return r;
        }
    }
}
