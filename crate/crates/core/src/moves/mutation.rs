use rand::seq::index;
use rand::Rng;
use rand_distr::StandardNormal;

use super::{metropolis_accept, Discovery, Individual};
use crate::problems::Problem;
use crate::target::Target;

/// Random-walk proposal `x + sigma^2 r`, `r ~ N(0, I)`.
pub fn metropolis_mutation<P: Problem<Gene = f64>, R: Rng + ?Sized>(
    problem: &P,
    ind: &mut Individual<f64>,
    step: f64,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<f64>,
) -> bool {
    let proposal: Vec<f64> = ind
        .x
        .iter()
        .map(|v| v + step * rng.sample::<f64, _>(StandardNormal))
        .collect();
    metropolis_accept(problem, ind, proposal, target, rng, log)
}

/// Uniform direction on the unit sphere in `d` dimensions.
pub fn unit_direction<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Line proposal `x + sigma^2 r e`, `r ~ N(0, 1)`, `e` uniform on the sphere.
pub fn hit_and_run_mutation<P: Problem<Gene = f64>, R: Rng + ?Sized>(
    problem: &P,
    ind: &mut Individual<f64>,
    step: f64,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<f64>,
) -> bool {
    let r: f64 = rng.sample(StandardNormal);
    let e = unit_direction(ind.x.len(), rng);
    let proposal = ind.x.iter().zip(&e).map(|(v, e)| v + step * r * e).collect();
    metropolis_accept(problem, ind, proposal, target, rng, log)
}

/// Move exactly `k` randomly chosen coordinates by a common `sigma^2 r`.
pub fn kpoint_mutation<P: Problem<Gene = f64>, R: Rng + ?Sized>(
    problem: &P,
    ind: &mut Individual<f64>,
    k: usize,
    step: f64,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<f64>,
) -> bool {
    let d = ind.x.len();
    assert!(k >= 1 && k < d, "k-point mutation needs 1 <= k < d (k={k}, d={d})");
    let chosen = index::sample(rng, d, k);
    let r: f64 = rng.sample(StandardNormal);
    let mut proposal = ind.x.clone();
    for i in chosen.iter() {
        proposal[i] += step * r;
    }
    metropolis_accept(problem, ind, proposal, target, rng, log)
}

/// Probability of setting the pixel to 1 given the log densities of the two
/// completions, `1 / (1 + f0 / f1)`.
pub fn gibbs_conditional(log_f0: f64, log_f1: f64) -> f64 {
    if log_f1 == f64::NEG_INFINITY {
        return if log_f0 == f64::NEG_INFINITY { 0.5 } else { 0.0 };
    }
    let z = log_f0 - log_f1;
    if z > 0.0 {
        let e = (-z).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + z.exp())
    }
}

/// Resample one uniformly chosen pixel from its full conditional.
pub fn gibbs_pixel_mutation<P: Problem<Gene = u8>, R: Rng + ?Sized>(
    problem: &P,
    ind: &mut Individual<u8>,
    target: &Target,
    rng: &mut R,
    log: &mut Discovery<u8>,
) -> bool {
    let site = rng.random_range(0..ind.x.len());
    let current = ind.x[site];
    let flipped_energy = match problem.flip_delta(&ind.x, site) {
        Some(delta) => ind.energy + delta,
        None => {
            ind.x[site] ^= 1;
            let e = problem.energy(&ind.x);
            ind.x[site] ^= 1;
            e
        }
    };
    let flipped_region = target.locate(flipped_energy);
    let (e0, j0, e1, j1) = if current == 0 {
        (ind.energy, ind.region, flipped_energy, flipped_region)
    } else {
        (flipped_energy, flipped_region, ind.energy, ind.region)
    };
    let p1 = gibbs_conditional(target.log_density(e0, j0), target.log_density(e1, j1));
    let u: f64 = rng.random();
    let new = u8::from(u < p1);
    let changed = new != current;
    if changed {
        ind.x[site] = new;
        ind.energy = flipped_energy;
        ind.region = flipped_region;
        log.record(ind.energy, ind.region, &ind.x);
    } else {
        log.evaluations += 1;
        ind.x[site] ^= 1;
        log.note(flipped_energy, flipped_region, &ind.x);
        ind.x[site] ^= 1;
    }
    changed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::{BoxSpace, Quadratic};
    use crate::schedules::Partition;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn direction_has_unit_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for d in [1usize, 2, 10, 105] {
            for _ in 0..50 {
                let e = unit_direction(d, &mut rng);
                let n = e.iter().map(|a| a * a).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-12);
                if d == 1 {
                    assert!(e[0] == 1.0 || e[0] == -1.0);
                }
            }
        }
    }

    #[test]
    fn kpoint_touches_exactly_k_coordinates() {
        let q = Quadratic::new(BoxSpace::cube(6, -1e6, 1e6).unwrap());
        let target = Target::boltzmann(1e12);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in 1..6 {
            for _ in 0..200 {
                let x0: Vec<f64> = (0..6).map(|i| i as f64 * 0.1).collect();
                let mut ind = Individual::evaluate(&q, x0.clone(), &target);
                let mut log = Discovery::default();
                if kpoint_mutation(&q, &mut ind, k, 0.5, &target, &mut rng, &mut log) {
                    let changed = ind.x.iter().zip(&x0).filter(|(a, b)| a != b).count();
                    // the other d - k coordinates compare equal bit for bit
                    assert_eq!(changed, k);
                }
            }
        }
    }

    #[test]
    #[should_panic]
    fn kpoint_rejects_k_equal_d() {
        let q = Quadratic::new(BoxSpace::cube(1, -1.0, 1.0).unwrap());
        let target = Target::boltzmann(1.0);
        let mut ind = Individual::evaluate(&q, vec![0.0], &target);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        kpoint_mutation(&q, &mut ind, 1, 0.1, &target, &mut rng, &mut Discovery::default());
    }

    #[test]
    fn conditional_examples() {
        assert_eq!(gibbs_conditional(-3.0, -3.0), 0.5);
        assert_eq!(gibbs_conditional(-800.0, 0.0), 1.0);
        assert!(gibbs_conditional(0.0, -800.0) < 1e-300);
        let p = gibbs_conditional(-1.0, 0.0);
        assert!((p - 1.0 / (1.0 + (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn flat_energy_always_accepts() {
        let q = Quadratic::new(BoxSpace::cube(1, -10.0, 10.0).unwrap());
        let target = Target::boltzmann(1e300);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut ind = Individual::evaluate(&q, vec![0.0], &target);
        let mut log = Discovery::default();
        for _ in 0..200 {
            assert!(metropolis_mutation(&q, &mut ind, 0.1, &target, &mut rng, &mut log));
        }
    }

    #[test]
    fn acceptance_follows_theta_difference() {
        // the temperature is so high that only theta matters
        let q = Quadratic::new(BoxSpace::cube(1, -1.0, 1.0).unwrap());
        let part = Partition::new(vec![0.25]).unwrap();
        let theta = [0.0, 0.7];
        let target = Target::biased(1e300, &part, &theta);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut accepted = 0usize;
        let trials = 200_000;
        for _ in 0..trials {
            let mut ind = Individual::evaluate(&q, vec![0.4], &target);
            let mut log = Discovery::default();
            if crate::moves::metropolis_accept(&q, &mut ind, vec![0.3], &target, &mut rng, &mut log) {
                accepted += 1;
            }
        }
        assert_eq!(accepted, trials);
        let mut accepted = 0usize;
        for _ in 0..trials {
            let mut ind = Individual::evaluate(&q, vec![0.1], &target);
            let mut log = Discovery::default();
            if crate::moves::metropolis_accept(&q, &mut ind, vec![0.9], &target, &mut rng, &mut log) {
                accepted += 1;
            }
        }
        let rate = accepted as f64 / trials as f64;
        assert!((rate - (-0.7f64).exp()).abs() < 0.005, "{rate}");
    }

    #[test]
    fn rejection_leaves_state_untouched() {
        let q = Quadratic::new(BoxSpace::cube(3, -1.0, 1.0).unwrap());
        let target = Target::boltzmann(0.01);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut rejections = 0;
        for _ in 0..500 {
            let mut ind = Individual::evaluate(&q, vec![0.0, 0.0, 0.0], &target);
            let before = ind.clone();
            let mut log = Discovery::default();
            if !hit_and_run_mutation(&q, &mut ind, 1.0, &target, &mut rng, &mut log) {
                assert_eq!(ind, before);
                rejections += 1;
            }
        }
        assert!(rejections > 400);
    }
}
