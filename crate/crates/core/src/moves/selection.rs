use rand::Rng;

use crate::error::{Error, Result};

/// `exp(-U_l / temp)` normalized over the individuals selected by `keep`.
/// Individuals with infinite energy get weight zero unless every kept
/// individual does, in which case the weights are uniform.
fn masked_softmax(energies: &[f64], temp: f64, keep: impl Fn(usize) -> bool) -> Vec<f64> {
    let min = energies
        .iter()
        .enumerate()
        .filter(|(l, _)| keep(*l))
        .map(|(_, e)| *e)
        .fold(f64::INFINITY, f64::min);
    let raw: Vec<f64> = energies
        .iter()
        .enumerate()
        .map(|(l, &e)| {
            if !keep(l) {
                0.0
            } else if min == f64::INFINITY {
                1.0
            } else {
                (-(e - min) / temp).exp()
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// First-partner probabilities `exp(-U_i / temp) / sum_l exp(-U_l / temp)`.
pub fn softmax(energies: &[f64], temp: f64) -> Vec<f64> {
    masked_softmax(energies, temp, |_| true)
}

/// Second-partner probabilities given the first partner `i`. With `literal`
/// the numerator uses `U_i`, as printed in the original operator
/// description; the resulting weights are constant over candidates, so the
/// sampling distribution is uniform and only the reported value differs.
fn partner_weights(energies: &[f64], i: usize, temp: f64, literal: bool) -> Vec<f64> {
    if literal {
        let n = energies.len();
        let min = (0..n).filter(|&l| l != i).map(|l| energies[l]).fold(f64::INFINITY, f64::min);
        let value = if min == f64::INFINITY {
            1.0 / (n - 1) as f64
        } else {
            let raw_sum: f64 = (0..n)
                .filter(|&l| l != i)
                .map(|l| (-(energies[l] - min) / temp).exp())
                .sum();
            (-(energies[i] - min) / temp).exp() / raw_sum
        };
        (0..n).map(|l| if l == i { 0.0 } else { value }).collect()
    } else {
        masked_softmax(energies, temp, |l| l != i)
    }
}

fn draw<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            if u < w {
                return k;
            }
            u -= w;
            last = k;
        }
    }
    last
}

/// Draw a partner `j != i`: from the energy softmax, or uniformly when
/// `literal` is set.
pub fn select_partner<R: Rng + ?Sized>(
    energies: &[f64],
    i: usize,
    temp: f64,
    literal: bool,
    rng: &mut R,
) -> usize {
    if literal {
        let j = rng.random_range(0..energies.len() - 1);
        if j >= i {
            j + 1
        } else {
            j
        }
    } else {
        draw(&partner_weights(energies, i, temp, false), rng)
    }
}

/// `w1(i) w2(j | i) + w1(j) w2(i | j)` for the population `energies`.
pub fn pair_probability(energies: &[f64], temp: f64, i: usize, j: usize, literal: bool) -> f64 {
    let first = softmax(energies, temp);
    first[i] * partner_weights(energies, i, temp, literal)[j]
        + first[j] * partner_weights(energies, j, temp, literal)[i]
}

/// Draw `(i, j)` with `i` from the energy softmax and `j != i` given `i`.
/// Also returns the symmetrized selection probability of the pair.
pub fn select_pair<R: Rng + ?Sized>(
    energies: &[f64],
    temp: f64,
    literal: bool,
    rng: &mut R,
) -> Result<(usize, usize, f64)> {
    if energies.len() < 2 {
        return Err(Error::CrossoverUnavailable(energies.len()));
    }
    let i = draw(&softmax(energies, temp), rng);
    let j = select_partner(energies, i, temp, literal, rng);
    Ok((i, j, pair_probability(energies, temp, i, j, literal)))
}
