//! Convergence and efficiency measurements: oracle bias weights, weight
//! error, relative efficiency, log-log slopes and replicate summaries.

mod oracle;

use serde::{Deserialize, Serialize};

pub use oracle::{enumerate_log_masses, quadrature_log_masses, LogMasses, OracleOptions, MAX_ENUMERATION_BITS};

use crate::engine::Trace;
use crate::error::{Error, Result};
use crate::moves::Gene;
use crate::problems::Problem;
use crate::schedules::{DesiredProbability, Partition};
use crate::target::{normalize_theta, Normalization};

/// How the oracle obtained its masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "method")]
pub enum OracleMethod {
    Enumeration,
    Quadrature { depth: u32, gate_change: f64 },
}

/// True bias weights at one temperature, gauge-fixed like a run's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleWeights {
    pub w: Vec<f64>,
    pub nonempty: Vec<bool>,
    pub log_mass: Vec<f64>,
    pub tau: f64,
    pub normalization: Normalization,
    pub method: OracleMethod,
}

impl OracleWeights {
    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// Desired probability redistributed over the non-empty subregions:
/// `pi_j + pi_e` on non-empty entries, zero elsewhere.
pub fn effective_frequencies(pi: &[f64], nonempty: &[bool]) -> Vec<f64> {
    let count = nonempty.iter().filter(|&&b| b).count();
    if count == 0 {
        return vec![0.0; pi.len()];
    }
    let lost: f64 = pi.iter().zip(nonempty).filter(|(_, &ne)| !ne).map(|(p, _)| p).sum();
    let extra = lost / count as f64;
    pi.iter().zip(nonempty).map(|(&p, &ne)| if ne { p + extra } else { 0.0 }).collect()
}

/// Weights from log masses: `log_mass_j - log(pi_j + pi_e)` on non-empty
/// entries, then normalized over them. Empty entries are zero.
pub fn weights_from_masses(log_mass: &[f64], pi: &[f64], mode: Normalization) -> (Vec<f64>, Vec<bool>) {
    let nonempty: Vec<bool> = log_mass.iter().map(|v| v.is_finite()).collect();
    let eff = effective_frequencies(pi, &nonempty);
    let raw: Vec<f64> = (0..log_mass.len())
        .map(|j| if nonempty[j] { log_mass[j] - eff[j].ln() } else { 0.0 })
        .collect();
    (normalize_theta(&raw, Some(&nonempty), mode, Some(pi)), nonempty)
}

fn max_change(a: &[f64], b: &[f64], mask_a: &[bool], mask_b: &[bool]) -> f64 {
    if mask_a != mask_b {
        return f64::INFINITY;
    }
    a.iter()
        .zip(b)
        .zip(mask_a)
        .filter(|(_, &ne)| ne)
        .map(|((x, y), _)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Oracle bias weights for `problem` at temperature `tau`. Quadrature is
/// refined until one more level moves every weight by less than
/// `opts.gate`; exhausting `opts.max_depth` is an error, never a silent
/// approximation.
pub fn oracle_weights<P: Problem>(
    problem: &P,
    partition: &Partition,
    pi: &DesiredProbability,
    tau: f64,
    mode: Normalization,
    opts: &OracleOptions,
) -> Result<OracleWeights> {
    if pi.len() != partition.len() {
        return Err(Error::config(format!(
            "desired probability has {} entries, partition has {} subregions",
            pi.len(),
            partition.len()
        )));
    }
    if !(tau > 0.0) {
        return Err(Error::config("oracle temperature must be positive"));
    }
    let pis = pi.as_slice();
    let first = P::Gene::oracle_log_masses(problem, partition, tau, opts, opts.start_depth)?;
    if first.exact {
        let (w, nonempty) = weights_from_masses(&first.log_mass, pis, mode);
        return Ok(OracleWeights {
            w,
            nonempty,
            log_mass: first.log_mass,
            tau,
            normalization: mode,
            method: OracleMethod::Enumeration,
        });
    }
    let (mut w, mut nonempty) = weights_from_masses(&first.log_mass, pis, mode);
    let mut last_change = f64::INFINITY;
    for depth in opts.start_depth + 1..=opts.max_depth {
        let next = P::Gene::oracle_log_masses(problem, partition, tau, opts, depth)?;
        let (w_next, ne_next) = weights_from_masses(&next.log_mass, pis, mode);
        last_change = max_change(&w, &w_next, &nonempty, &ne_next);
        if last_change < opts.gate {
            return Ok(OracleWeights {
                w: w_next,
                nonempty: ne_next,
                log_mass: next.log_mass,
                tau,
                normalization: mode,
                method: OracleMethod::Quadrature { depth, gate_change: last_change },
            });
        }
        w = w_next;
        nonempty = ne_next;
    }
    Err(Error::Undefined(format!(
        "quadrature did not settle below {} by depth {} (last change {last_change:e})",
        opts.gate, opts.max_depth
    )))
}

/// `||theta - w||` over the oracle's non-empty subregions. Both vectors are
/// taken as given.
pub fn theta_mse(theta: &[f64], oracle: &OracleWeights) -> Result<f64> {
    if theta.len() != oracle.len() {
        return Err(Error::config(format!(
            "theta has {} entries, oracle has {}",
            theta.len(),
            oracle.len()
        )));
    }
    Ok(theta
        .iter()
        .zip(&oracle.w)
        .zip(&oracle.nonempty)
        .filter(|(_, &ne)| ne)
        .map(|((t, w), _)| (t - w) * (t - w))
        .sum::<f64>()
        .sqrt())
}

/// [`theta_mse`] after re-normalizing `theta` over the oracle's non-empty
/// set with the oracle's mode, which removes any additive offset.
pub fn normalized_theta_mse(theta: &[f64], oracle: &OracleWeights, pi: &DesiredProbability) -> Result<f64> {
    if theta.len() != oracle.len() {
        return theta_mse(theta, oracle);
    }
    let fixed = normalize_theta(theta, Some(&oracle.nonempty), oracle.normalization, Some(pi.as_slice()));
    theta_mse(&fixed, oracle)
}

/// How per-replicate errors combine into one efficiency figure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReAggregation {
    /// `mean(err_kappa) / mean(err_single)`.
    #[default]
    RatioOfMeans,
    /// `mean(err_kappa[r] / err_single[r])` over paired replicates.
    MeanOfRatios,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Error of the population estimator at budget `n / kappa` relative to the
/// single chain at budget `n`.
pub fn relative_efficiency(errors_kappa: &[f64], errors_single: &[f64], how: ReAggregation) -> Result<f64> {
    if errors_kappa.is_empty() || errors_single.is_empty() {
        return Err(Error::Undefined("relative efficiency of an empty replicate set".into()));
    }
    match how {
        ReAggregation::RatioOfMeans => {
            let den = mean(errors_single);
            if den == 0.0 {
                return Err(Error::Undefined("single-chain error is zero".into()));
            }
            Ok(mean(errors_kappa) / den)
        }
        ReAggregation::MeanOfRatios => {
            if errors_kappa.len() != errors_single.len() {
                return Err(Error::config("mean of ratios needs paired replicates"));
            }
            if errors_single.contains(&0.0) {
                return Err(Error::Undefined("single-chain error is zero".into()));
            }
            Ok(mean(&errors_kappa.iter().zip(errors_single).map(|(a, b)| a / b).collect::<Vec<_>>()))
        }
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Undefined("slope needs at least two paired points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Undefined("log-log slope needs positive values".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::Undefined("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    Ok(sxy / sxx)
}

/// Mean, standard error and range of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    /// `None` below two observations.
    pub std_err: Option<f64>,
    pub min: f64,
    pub max: f64,
}

impl SampleStats {
    pub fn of(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Undefined("statistics of an empty sample".into()));
        }
        let n = values.len();
        let mu = mean(values);
        let std_err = (n >= 2).then(|| {
            let var = values.iter().map(|v| (v - mu) * (v - mu)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        });
        Ok(Self {
            n,
            mean: mu,
            std_err,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

/// Pointwise best-energy statistics across replicate traces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub t: Vec<u64>,
    pub best: Vec<SampleStats>,
}

impl ReplicateSummary {
    pub fn replicates(&self) -> usize {
        self.best.first().map_or(0, |s| s.n)
    }

    pub fn terminal(&self) -> Option<&SampleStats> {
        self.best.last()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "replicates", "mean", "std_err", "min", "max"])?;
        for (t, s) in self.t.iter().zip(&self.best) {
            w.write_record([
                t.to_string(),
                s.n.to_string(),
                s.mean.to_string(),
                s.std_err.map_or(String::new(), |v| v.to_string()),
                s.min.to_string(),
                s.max.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Combine the best-energy columns of replicate traces sharing the same
/// recording times.
pub fn summarize_replicates(traces: &[Trace]) -> Result<ReplicateSummary> {
    let first = traces.first().ok_or_else(|| Error::Trace("no traces to summarize".into()))?;
    let t: Vec<u64> = first.records.iter().map(|r| r.t).collect();
    for (k, tr) in traces.iter().enumerate() {
        if tr.records.len() != t.len() || tr.records.iter().zip(&t).any(|(r, &tt)| r.t != tt) {
            return Err(Error::Trace(format!("trace {k} does not share the recording times of trace 0")));
        }
    }
    let best = (0..t.len())
        .map(|i| {
            let column: Vec<f64> = traces.iter().map(|tr| tr.records[i].best_energy).collect();
            SampleStats::of(&column)
        })
        .collect::<Result<_>>()?;
    Ok(ReplicateSummary { t, best })
}
