//! Brute-force region masses `log ∫_{E_j} exp(-U / tau)`: adaptive tensor
//! quadrature for boxes of dimension one or two, exact enumeration for
//! binary spaces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problems::Problem;
use crate::schedules::Partition;

/// Largest binary dimension the enumeration oracle accepts.
pub const MAX_ENUMERATION_BITS: usize = 20;

/// Knobs of the quadrature oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOptions {
    /// Integration box; the problem's own bounds when absent. Mass outside
    /// an explicit box is ignored.
    pub domain: Option<(Vec<f64>, Vec<f64>)>,
    /// Base grid cells per axis.
    pub base_cells: usize,
    /// First refinement depth tried.
    pub start_depth: u32,
    /// Refinement depth at which the oracle gives up.
    pub max_depth: u32,
    /// Largest allowed change of any weight when the depth grows by one.
    pub gate: f64,
    /// Per-region relative tolerance of the smooth-cell test.
    pub rtol: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { domain: None, base_cells: 64, start_depth: 4, max_depth: 18, gate: 1e-4, rtol: 1e-8 }
    }
}

/// Log masses per subregion, `-inf` for subregions the oracle never saw.
#[derive(Debug, Clone, PartialEq)]
pub struct LogMasses {
    pub log_mass: Vec<f64>,
    /// Whether the masses are exact (no resolution to refine).
    pub exact: bool,
}

/// Sum of `exp(-U / tau)` over all binary configurations, split by
/// subregion.
pub fn enumerate_log_masses<P: Problem<Gene = u8>>(problem: &P, partition: &Partition, tau: f64) -> Result<LogMasses> {
    let d = problem.dim();
    if d > MAX_ENUMERATION_BITS {
        return Err(Error::OracleUnsupported(format!(
            "{d} binary sites; enumeration is limited to {MAX_ENUMERATION_BITS}"
        )));
    }
    let m = partition.len();
    let mut x = vec![0u8; d];
    let mut scaled: Vec<(usize, f64)> = Vec::with_capacity(1 << d);
    for code in 0u64..(1u64 << d) {
        for (k, bit) in x.iter_mut().enumerate() {
            *bit = ((code >> k) & 1) as u8;
        }
        let u = problem.energy(&x);
        if u.is_finite() {
            scaled.push((partition.locate(u), -u / tau));
        }
    }
    let mut max = vec![f64::NEG_INFINITY; m];
    for &(j, v) in &scaled {
        max[j] = max[j].max(v);
    }
    let mut sums = vec![0.0; m];
    for &(j, v) in &scaled {
        sums[j] += (v - max[j]).exp();
    }
    let log_mass = (0..m)
        .map(|j| if sums[j] > 0.0 { max[j] + sums[j].ln() } else { f64::NEG_INFINITY })
        .collect();
    Ok(LogMasses { log_mass, exact: true })
}

struct Quadrature<'a, P> {
    problem: &'a P,
    partition: &'a Partition,
    tau: f64,
    /// Energy offset keeping the integrand in range.
    shift: f64,
    dim: usize,
    max_level: u32,
    rtol: f64,
    /// Tolerance per unit volume for each subregion.
    density_tol: Vec<f64>,
    mass: Vec<f64>,
    point: Vec<f64>,
}

/// Per-axis weights on five equally spaced nodes: one Simpson panel over
/// the whole cell and the composite rule over its two halves.
const PARENT: [f64; 5] = [1.0 / 6.0, 0.0, 4.0 / 6.0, 0.0, 1.0 / 6.0];
const CHILDREN: [f64; 5] = [1.0 / 12.0, 4.0 / 12.0, 2.0 / 12.0, 4.0 / 12.0, 1.0 / 12.0];
const MAX_NODES: usize = 25;

impl<P: Problem<Gene = f64>> Quadrature<'_, P> {
    fn integrand(&mut self, lo: &[f64], h: &[f64], node: usize) -> (f64, usize) {
        let mut code = node;
        for a in 0..self.dim {
            self.point[a] = lo[a] + h[a] * 0.25 * (code % 5) as f64;
            code /= 5;
        }
        let u = self.problem.energy(&self.point);
        if u.is_finite() {
            (((self.shift - u) / self.tau).exp(), self.partition.locate(u))
        } else {
            (0.0, usize::MAX)
        }
    }

    fn weight(&self, node: usize, rule: &[f64; 5]) -> f64 {
        let mut code = node;
        let mut w = 1.0;
        for _ in 0..self.dim {
            w *= rule[code % 5];
            code /= 5;
        }
        w
    }

    fn cell(&mut self, lo: &[f64], h: &[f64], level: u32) {
        let nodes = 5usize.pow(self.dim as u32);
        let volume: f64 = h.iter().product();
        let mut vals = [(0.0, 0usize); MAX_NODES];
        for (n, v) in vals.iter_mut().enumerate().take(nodes) {
            *v = self.integrand(lo, h, n);
        }
        let region = vals[0].1;
        let uniform = vals[..nodes].iter().all(|v| v.1 == region);
        if uniform {
            if region == usize::MAX {
                return;
            }
            let coarse: f64 = (0..nodes).map(|n| self.weight(n, &PARENT) * vals[n].0).sum::<f64>() * volume;
            let fine: f64 = (0..nodes).map(|n| self.weight(n, &CHILDREN) * vals[n].0).sum::<f64>() * volume;
            let tol = self.rtol * fine.abs() + self.density_tol[region] * volume;
            if (fine - coarse).abs() <= tol || level >= self.max_level {
                self.mass[region] += fine;
                return;
            }
        } else if level >= self.max_level {
            for (n, &(f, j)) in vals[..nodes].iter().enumerate() {
                if j != usize::MAX {
                    self.mass[j] += self.weight(n, &CHILDREN) * f * volume;
                }
            }
            return;
        }
        let half: Vec<f64> = h.iter().map(|v| v * 0.5).collect();
        let mut child = lo.to_vec();
        for c in 0..(1usize << self.dim) {
            for a in 0..self.dim {
                child[a] = lo[a] + if (c >> a) & 1 == 1 { half[a] } else { 0.0 };
            }
            self.cell(&child.clone(), &half, level + 1);
        }
    }
}

/// Adaptive quadrature at a fixed refinement depth. `reference` holds log
/// masses from a coarser pass, used to scale the per-cell tolerance.
pub fn quadrature_log_masses<P: Problem<Gene = f64>>(
    problem: &P,
    partition: &Partition,
    tau: f64,
    opts: &OracleOptions,
    depth: u32,
) -> Result<LogMasses> {
    let d = problem.dim();
    if d > 2 {
        return Err(Error::OracleUnsupported(format!("quadrature covers d <= 2, problem has d = {d}")));
    }
    let (lower, upper) = match &opts.domain {
        Some((l, u)) => (l.clone(), u.clone()),
        None => match problem.bounds() {
            Some((l, u)) => (l.to_vec(), u.to_vec()),
            None => return Err(Error::OracleUnsupported("problem has no bounded domain".into())),
        },
    };
    if lower.len() != d || upper.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: lower.len() });
    }
    if lower.iter().zip(&upper).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite()) {
        return Err(Error::OracleUnsupported("integration box must be finite and non-degenerate".into()));
    }
    let cells = opts.base_cells.max(1);
    let h: Vec<f64> = lower.iter().zip(&upper).map(|(l, u)| (u - l) / cells as f64).collect();
    let base_cells: Vec<Vec<f64>> = (0..cells.pow(d as u32))
        .map(|c| {
            let mut code = c;
            (0..d)
                .map(|a| {
                    let k = code % cells;
                    code /= cells;
                    lower[a] + h[a] * k as f64
                })
                .collect()
        })
        .collect();

    // Energy offset from the base-grid nodes.
    let mut shift = f64::INFINITY;
    for lo in &base_cells {
        for node in 0..3usize.pow(d as u32) {
            let mut code = node;
            let p: Vec<f64> = (0..d)
                .map(|a| {
                    let v = lo[a] + h[a] * 0.5 * (code % 3) as f64;
                    code /= 3;
                    v
                })
                .collect();
            shift = shift.min(problem.energy(&p));
        }
    }
    if !shift.is_finite() {
        return Err(Error::Undefined("energy is infinite on every quadrature node".into()));
    }

    let m = partition.len();
    let total_volume: f64 = lower.iter().zip(&upper).map(|(l, u)| u - l).product();
    let mut quad = Quadrature {
        problem,
        partition,
        tau,
        shift,
        dim: d,
        max_level: 0,
        rtol: opts.rtol,
        density_tol: vec![0.0; m],
        mass: vec![0.0; m],
        point: vec![0.0; d],
    };
    // Coarse pass fixes the per-region tolerance scale.
    for lo in &base_cells {
        quad.cell(lo, &h, 0);
    }
    quad.density_tol = quad.mass.iter().map(|&mj| opts.rtol * mj / total_volume).collect();
    quad.mass = vec![0.0; m];
    quad.max_level = depth;
    for lo in &base_cells {
        quad.cell(lo, &h, 0);
    }
    let log_mass = quad
        .mass
        .iter()
        .map(|&v| if v > 0.0 { v.ln() - shift / tau } else { f64::NEG_INFINITY })
        .collect();
    Ok(LogMasses { log_mass, exact: false })
}
