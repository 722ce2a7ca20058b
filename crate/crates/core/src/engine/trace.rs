use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of the progression record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: u64,
    pub tau: f64,
    pub gamma: f64,
    pub best_energy: f64,
    /// `(attempts, accepts)` per operator since the previous row.
    pub accept: Vec<(u64, u64)>,
    /// Cumulative population visits per subregion, on theta-stride rows.
    pub visits: Option<Vec<u64>>,
    /// Working theta, on theta-stride rows.
    pub theta: Option<Vec<f64>>,
}

/// Progression record of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub operators: Vec<String>,
    /// Number of subregions; zero when the run has no partition.
    pub regions: usize,
    pub records: Vec<TraceRecord>,
}

fn fmt(v: f64) -> String {
    format!("{v}")
}

impl Trace {
    pub fn new(operators: Vec<String>, regions: usize) -> Self {
        Self { operators, regions, records: Vec::new() }
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = ["t", "tau", "gamma", "best_energy"].iter().map(|s| s.to_string()).collect();
        h.extend(self.operators.iter().map(|o| format!("accept_{o}")));
        h.extend((1..=self.regions).map(|j| format!("visit_{j}")));
        h.extend((1..=self.regions).map(|j| format!("theta_{j}")));
        h
    }

    /// Best energy column.
    pub fn best_energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.best_energy).collect()
    }

    /// Write the trace as CSV. Acceptance columns hold the rate over the
    /// rows' window and stay blank when an operator had no attempts; visit
    /// and theta columns are filled only on theta-stride rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.header())?;
        for r in &self.records {
            let mut row = vec![r.t.to_string(), fmt(r.tau), fmt(r.gamma), fmt(r.best_energy)];
            row.extend(r.accept.iter().map(|&(n, a)| {
                if n == 0 {
                    String::new()
                } else {
                    fmt(a as f64 / n as f64)
                }
            }));
            match &r.visits {
                Some(v) => {
                    let total: u64 = v.iter().sum();
                    row.extend(v.iter().map(|&c| fmt(if total == 0 { 0.0 } else { c as f64 / total as f64 })));
                }
                None => row.extend(std::iter::repeat_n(String::new(), self.regions)),
            }
            match &r.theta {
                Some(th) => row.extend(th.iter().map(|&v| fmt(v))),
                None => row.extend(std::iter::repeat_n(String::new(), self.regions)),
            }
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    /// Merge traces of independent runs sharing one schedule: best energies
    /// take the minimum, acceptance and visit counts add up and theta is
    /// averaged.
    pub fn merge_independent(traces: &[Trace]) -> Option<Trace> {
        let first = traces.first()?;
        let mut out = Trace::new(first.operators.clone(), first.regions);
        for (k, r0) in first.records.iter().enumerate() {
            let rows: Vec<&TraceRecord> = traces.iter().map(|t| &t.records[k]).collect();
            let best = rows.iter().map(|r| r.best_energy).fold(f64::INFINITY, f64::min);
            let accept = (0..r0.accept.len())
                .map(|o| rows.iter().fold((0, 0), |(n, a), r| (n + r.accept[o].0, a + r.accept[o].1)))
                .collect();
            let visits = r0.visits.as_ref().map(|v| {
                (0..v.len()).map(|j| rows.iter().map(|r| r.visits.as_ref().map_or(0, |v| v[j])).sum()).collect()
            });
            let theta = r0.theta.as_ref().map(|th| {
                (0..th.len())
                    .map(|j| rows.iter().map(|r| r.theta.as_ref().map_or(0.0, |t| t[j])).sum::<f64>() / rows.len() as f64)
                    .collect()
            });
            out.records.push(TraceRecord { t: r0.t, tau: r0.tau, gamma: r0.gamma, best_energy: best, accept, visits, theta });
        }
        Some(out)
    }
}
