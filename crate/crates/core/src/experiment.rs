//! Replicated experiment sweeps: deterministic seeding, replicate
//! orchestration, CSV outputs, manifests and checkpoint resume.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentSpec, ProblemSpec};
use crate::diagnostics::{
    loglog_slope, normalized_theta_mse, oracle_weights, relative_efficiency, summarize_replicates, OracleWeights,
    SampleStats,
};
use crate::engine::{
    derive_seed, load_checkpoint, peek_checkpoint, run, save_checkpoint, Engine, EngineState, Mode, RunOutput,
    Trace,
};
use crate::error::{Error, Result};
use crate::problems::{
    load_pgm, load_text_grid, AbModel, BoxSpace, GaussianMixture, IsingRestoration, Monomer, Problem, Quadratic,
    RotatedRastrigin,
};

pub const MANIFEST_FORMAT: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// Something to do with a concrete problem instance.
pub trait ProblemVisitor {
    type Output;
    fn visit<P: Problem>(self, problem: &P) -> Self::Output;
}

/// Build the problem described by `spec` and hand it to `visitor`.
pub fn with_problem<V: ProblemVisitor>(spec: &ProblemSpec, visitor: V) -> Result<V::Output> {
    Ok(match spec {
        ProblemSpec::Quadratic { dim, lower, upper } => visitor.visit(&Quadratic::new(BoxSpace::cube(*dim, *lower, *upper)?)),
        ProblemSpec::Mixture { components, variance, lower, upper } => {
            let comps = components.clone().unwrap_or_else(GaussianMixture::twenty_mode_components);
            let d = comps.first().map_or(0, |c| c.mean.len());
            visitor.visit(&GaussianMixture::new(comps, *variance, BoxSpace::cube(d, *lower, *upper)?)?)
        }
        ProblemSpec::Rastrigin { dim, rotation_seed } => visitor.visit(&RotatedRastrigin::with_seed(*dim, *rotation_seed)?),
        ProblemSpec::Ab { sequence, length, space } => {
            let model = match sequence {
                Some(s) => AbModel::new(
                    s.chars().map(|c| if c == 'A' { Monomer::A } else { Monomer::B }).collect(),
                    *space,
                )?,
                None => AbModel::fibonacci(length.unwrap_or(0), *space)?,
            };
            visitor.visit(&model)
        }
        ProblemSpec::Ising { image, a, b, count_pairs_twice, threshold } => {
            let pgm = image.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
            let observed = if pgm { load_pgm(image, *threshold)? } else { load_text_grid(image)? };
            visitor.visit(&IsingRestoration::new(observed, *a, *b, *count_pairs_twice)?)
        }
    })
}

/// Seed of one experiment cell, from the master seed, the problem id, the
/// population size, the gain exponent and the replicate index.
pub fn cell_seed(master: u64, problem_id: &str, kappa: usize, beta: f64, replicate: usize) -> u64 {
    derive_seed(
        "cell",
        &[
            &master.to_le_bytes(),
            problem_id.as_bytes(),
            &(kappa as u64).to_le_bytes(),
            &beta.to_bits().to_le_bytes(),
            &(replicate as u64).to_le_bytes(),
        ],
    )
}

/// One `(kappa, beta, replicate)` run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub kappa: usize,
    pub beta: f64,
    pub replicate: usize,
    pub seed: u64,
}

impl Cell {
    pub fn stem(&self) -> String {
        format!("k{}_b{}_r{:03}", self.kappa, self.beta, self.replicate)
    }
}

/// All cells of a sweep, in output order.
pub fn cells(spec: &ExperimentSpec) -> Vec<Cell> {
    let id = spec.problem.id();
    let mut out = Vec::new();
    for &beta in &spec.betas {
        for &kappa in &spec.kappas {
            for replicate in 0..spec.replicates {
                out.push(Cell { kappa, beta, replicate, seed: cell_seed(spec.seed, &id, kappa, beta, replicate) });
            }
        }
    }
    out
}

/// Manifest row for one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub kappa: usize,
    pub beta: f64,
    pub replicate: usize,
    pub seed: u64,
    pub iterations: u64,
    pub trace: Option<String>,
    pub status: String,
    pub error: Option<String>,
    pub best_energy: Option<f64>,
    pub evaluations: Option<u64>,
}

/// Everything needed to reproduce an experiment's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: u32,
    pub code_version: String,
    pub config_hash: String,
    pub spec: ExperimentSpec,
    pub runs: Vec<RunRecord>,
}

/// SHA-256 of the experiment description with its output location removed.
pub fn config_hash(spec: &ExperimentSpec) -> String {
    let mut s = spec.clone();
    s.output = None;
    let bytes = serde_json::to_vec(&s).expect("spec serializes");
    Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let m: Manifest = serde_json::from_slice(&fs::read(path)?)?;
    if m.format != MANIFEST_FORMAT {
        return Err(Error::config(format!("manifest format {} is not supported", m.format)));
    }
    Ok(m)
}

/// Outcome of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub dir: PathBuf,
    pub manifest: Manifest,
    pub failed_replicates: usize,
    /// Cells (kappa, beta) in which every replicate failed.
    pub failed_cells: usize,
    pub total_cells: usize,
}

impl ExperimentReport {
    /// 0 when every (kappa, beta) cell has at least one finished replicate,
    /// 3 when some but not all cells failed entirely, 2 when all did.
    pub fn exit_code(&self) -> i32 {
        if self.failed_cells == 0 {
            0
        } else if self.failed_cells < self.total_cells {
            3
        } else {
            2
        }
    }
}

struct Finished {
    trace: Trace,
    best_energy: f64,
    evaluations: u64,
    mse: Option<f64>,
    mse_curve: Vec<(u64, f64)>,
}

/// Header stored in front of an engine state in a checkpoint file. The
/// spec travels as JSON because its tagged enums need a self-describing
/// format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub spec_json: String,
    pub cell: Cell,
}

impl CheckpointHeader {
    pub fn new(spec: &ExperimentSpec, cell: Cell) -> Result<Self> {
        Ok(Self { spec_json: serde_json::to_string(spec)?, cell })
    }

    pub fn spec(&self) -> Result<ExperimentSpec> {
        Ok(serde_json::from_str(&self.spec_json)?)
    }
}

struct ReplicateRunner<'a> {
    spec: &'a ExperimentSpec,
    cells: &'a [Cell],
    oracle: Option<&'a OracleWeights>,
    checkpoint_dir: Option<PathBuf>,
    threads: usize,
}

fn mse_of<G>(out: &RunOutput<G>, oracle: Option<&OracleWeights>, spec: &ExperimentSpec) -> Result<Option<f64>> {
    let Some(o) = oracle else { return Ok(None) };
    let theta = match (&out.theta_state, &out.theta) {
        (Some(state), _) => state.theta().to_vec(),
        (None, Some(t)) => t.clone(),
        (None, None) => return Ok(None),
    };
    normalized_theta_mse(&theta, o, &spec.template.desired).map(Some)
}

fn run_cell<P: Problem>(
    problem: &P,
    spec: &ExperimentSpec,
    cell: &Cell,
    oracle: Option<&OracleWeights>,
    checkpoint_dir: Option<&Path>,
) -> Result<Finished> {
    let cfg = spec.cell_config(cell.kappa, cell.beta, cell.seed);
    let out = match (checkpoint_dir, spec.checkpoint_every) {
        (Some(dir), every) if every > 0 => {
            let mut engine = Engine::new(problem, cfg)?;
            let header = CheckpointHeader::new(spec, *cell)?;
            let path = dir.join(format!("{}.ckpt", cell.stem()));
            let end = engine.config().iterations;
            while engine.t() < end {
                engine.run_until(engine.t() + every);
                save_checkpoint(&path, &(&header, engine.state()))?;
            }
            engine.finish()
        }
        _ => run(problem, &cfg)?,
    };
    let mse = mse_of(&out, oracle, spec)?;
    let mut mse_curve = Vec::new();
    if let Some(o) = oracle {
        for rec in &out.trace.records {
            if let Some(theta) = &rec.theta {
                mse_curve.push((rec.t, normalized_theta_mse(theta, o, &spec.template.desired)?));
            }
        }
    }
    Ok(Finished { best_energy: out.best_energy, evaluations: out.evaluations, trace: out.trace, mse, mse_curve })
}

impl ProblemVisitor for ReplicateRunner<'_> {
    type Output = Result<Vec<Result<Finished>>>;

    fn visit<P: Problem>(self, problem: &P) -> Self::Output {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::config(format!("thread pool: {e}")))?;
        let dir = self.checkpoint_dir.as_deref();
        Ok(pool.install(|| {
            self.cells
                .par_iter()
                .map(|cell| run_cell(problem, self.spec, cell, self.oracle, dir))
                .collect()
        }))
    }
}

struct OracleVisitor<'a>(&'a ExperimentSpec);

impl ProblemVisitor for OracleVisitor<'_> {
    type Output = Result<OracleWeights>;

    fn visit<P: Problem>(self, problem: &P) -> Self::Output {
        let spec = self.0;
        let o = spec.oracle.as_ref().ok_or_else(|| Error::config("no [oracle] section in the experiment"))?;
        let t = &spec.template;
        oracle_weights(problem, &t.partition, &t.desired, o.tau, t.normalization, &o.options)
    }
}

/// Oracle weights for the experiment's problem and partition.
pub fn compute_oracle(spec: &ExperimentSpec) -> Result<OracleWeights> {
    with_problem(&spec.problem, OracleVisitor(spec))?
}

/// Check everything that can be checked without running: the problem
/// loads and every cell configuration validates against it.
pub fn validate_experiment(spec: &ExperimentSpec) -> Result<()> {
    struct Check<'a>(&'a ExperimentSpec);
    impl ProblemVisitor for Check<'_> {
        type Output = Result<()>;
        fn visit<P: Problem>(self, problem: &P) -> Result<()> {
            let mut errs = Vec::new();
            for &beta in &self.0.betas {
                for &kappa in &self.0.kappas {
                    if let Err(Error::Config(msgs)) = self.0.cell_config(kappa, beta, 0).validate(problem) {
                        for m in msgs {
                            if !errs.contains(&m) {
                                errs.push(m);
                            }
                        }
                    }
                    if self.0.iterations_for(kappa) == 0 {
                        errs.push(format!("kappa = {kappa} leaves no iterations under the fixed-cost budget"));
                    }
                }
            }
            if self.0.checkpoint_every > 0 && self.0.template.mode == Mode::Psaa {
                errs.push("checkpoints are not available in psaa mode".into());
            }
            if errs.is_empty() {
                Ok(())
            } else {
                Err(Error::Config(errs))
            }
        }
    }
    with_problem(&spec.problem, Check(spec))?
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Run every cell of `spec`, writing outputs below `dir`.
pub fn run_experiment(spec: &ExperimentSpec, dir: &Path) -> Result<ExperimentReport> {
    validate_experiment(spec)?;
    fs::create_dir_all(dir)?;
    let oracle = match &spec.oracle {
        Some(_) => Some(compute_oracle(spec)?),
        None => None,
    };
    let all = cells(spec);
    let checkpoint_dir = (spec.checkpoint_every > 0).then(|| dir.join("checkpoints"));
    if let Some(d) = &checkpoint_dir {
        fs::create_dir_all(d)?;
    }
    let runner = ReplicateRunner {
        spec,
        cells: &all,
        oracle: oracle.as_ref(),
        checkpoint_dir,
        threads: spec.replicate_threads,
    };
    let results = with_problem(&spec.problem, runner)??;

    // Single collector: everything below runs in cell order.
    let problem_id = spec.problem.id();
    let mut runs = Vec::with_capacity(all.len());
    for (cell, res) in all.iter().zip(&results) {
        let iterations = spec.iterations_for(cell.kappa);
        runs.push(match res {
            Ok(f) => {
                let rel = format!("traces/{}.csv", cell.stem());
                write_file(&dir.join(&rel), f.trace.to_csv_string()?.as_bytes())?;
                RunRecord {
                    kappa: cell.kappa,
                    beta: cell.beta,
                    replicate: cell.replicate,
                    seed: cell.seed,
                    iterations,
                    trace: Some(rel),
                    status: "ok".into(),
                    error: None,
                    best_energy: Some(f.best_energy),
                    evaluations: Some(f.evaluations),
                }
            }
            Err(e) => RunRecord {
                kappa: cell.kappa,
                beta: cell.beta,
                replicate: cell.replicate,
                seed: cell.seed,
                iterations,
                trace: None,
                status: "failed".into(),
                error: Some(e.to_string()),
                best_energy: None,
                evaluations: None,
            },
        });
    }

    let mut summary = csv::Writer::from_writer(Vec::new());
    summary.write_record(["problem", "kappa", "beta", "t", "replicates", "mean", "std_err", "min", "max"])?;
    let mut terminal = csv::Writer::from_writer(Vec::new());
    terminal.write_record(["problem", "kappa", "beta", "replicates", "mean", "std_err", "min", "max"])?;
    let mut diag = csv::Writer::from_writer(Vec::new());
    diag.write_record(["problem", "kappa", "beta", "replicate", "iterations", "mse"])?;
    let mut curve = csv::Writer::from_writer(Vec::new());
    curve.write_record(["problem", "kappa", "beta", "t", "replicates", "mean", "std_err"])?;
    let mut eff = csv::Writer::from_writer(Vec::new());
    eff.write_record(["problem", "beta", "kappa", "mean_mse", "re"])?;
    let mut slopes = csv::Writer::from_writer(Vec::new());
    slopes.write_record(["problem", "beta", "slope", "reference_slope"])?;

    let mut failed_cells = 0;
    let mut total_cells = 0;
    for &beta in &spec.betas {
        let mut mse_by_kappa: Vec<(usize, Vec<f64>)> = Vec::new();
        for &kappa in &spec.kappas {
            total_cells += 1;
            let ok: Vec<(&Cell, &Finished)> = all
                .iter()
                .zip(&results)
                .filter(|(c, _)| c.kappa == kappa && c.beta == beta)
                .filter_map(|(c, r)| r.as_ref().ok().map(|f| (c, f)))
                .collect();
            if ok.is_empty() {
                failed_cells += 1;
                continue;
            }
            let traces: Vec<Trace> = ok.iter().map(|(_, f)| f.trace.clone()).collect();
            let s = summarize_replicates(&traces)?;
            for (t, st) in s.t.iter().zip(&s.best) {
                summary.write_record([
                    problem_id.clone(),
                    kappa.to_string(),
                    beta.to_string(),
                    t.to_string(),
                    st.n.to_string(),
                    st.mean.to_string(),
                    opt(st.std_err),
                    st.min.to_string(),
                    st.max.to_string(),
                ])?;
            }
            let finals: Vec<f64> = ok.iter().map(|(_, f)| f.best_energy).collect();
            let st = SampleStats::of(&finals)?;
            terminal.write_record([
                problem_id.clone(),
                kappa.to_string(),
                beta.to_string(),
                st.n.to_string(),
                st.mean.to_string(),
                opt(st.std_err),
                st.min.to_string(),
                st.max.to_string(),
            ])?;
            if oracle.is_some() {
                let mut mses = Vec::new();
                for (c, f) in &ok {
                    if let Some(v) = f.mse {
                        mses.push(v);
                        diag.write_record([
                            problem_id.clone(),
                            kappa.to_string(),
                            beta.to_string(),
                            c.replicate.to_string(),
                            spec.iterations_for(kappa).to_string(),
                            v.to_string(),
                        ])?;
                    }
                }
                let first = &ok[0].1.mse_curve;
                for (k, &(t, _)) in first.iter().enumerate() {
                    let column: Vec<f64> = ok.iter().filter_map(|(_, f)| f.mse_curve.get(k).map(|p| p.1)).collect();
                    let st = SampleStats::of(&column)?;
                    curve.write_record([
                        problem_id.clone(),
                        kappa.to_string(),
                        beta.to_string(),
                        t.to_string(),
                        st.n.to_string(),
                        st.mean.to_string(),
                        opt(st.std_err),
                    ])?;
                }
                if !mses.is_empty() {
                    mse_by_kappa.push((kappa, mses));
                }
            }
        }
        if let Some((_, single)) = mse_by_kappa.iter().find(|(k, _)| *k == 1) {
            let mut ks = Vec::new();
            let mut res = Vec::new();
            for (kappa, mses) in &mse_by_kappa {
                let re = relative_efficiency(mses, single, spec.re_aggregation).ok();
                let mean = mses.iter().sum::<f64>() / mses.len() as f64;
                eff.write_record([problem_id.clone(), beta.to_string(), kappa.to_string(), mean.to_string(), opt(re)])?;
                if let (Some(r), true) = (re, *kappa > 1) {
                    ks.push(*kappa as f64);
                    res.push(r);
                }
            }
            if let Ok(slope) = loglog_slope(&ks, &res) {
                slopes.write_record([problem_id.clone(), beta.to_string(), slope.to_string(), (beta - 1.0).to_string()])?;
            }
        }
    }
    let finish = |w: csv::Writer<Vec<u8>>| -> Result<Vec<u8>> {
        w.into_inner().map_err(|e| Error::Io(e.into_error()))
    };
    write_file(&dir.join("summary.csv"), &finish(summary)?)?;
    write_file(&dir.join("terminal.csv"), &finish(terminal)?)?;
    if let Some(o) = &oracle {
        write_file(&dir.join("oracle.json"), &serde_json::to_vec_pretty(o)?)?;
        write_file(&dir.join("diagnostics.csv"), &finish(diag)?)?;
        write_file(&dir.join("mse_curve.csv"), &finish(curve)?)?;
        write_file(&dir.join("efficiency.csv"), &finish(eff)?)?;
        write_file(&dir.join("slopes.csv"), &finish(slopes)?)?;
    }
    let manifest = Manifest {
        format: MANIFEST_FORMAT,
        code_version: env!("CARGO_PKG_VERSION").into(),
        config_hash: config_hash(spec),
        spec: spec.clone(),
        runs,
    };
    write_file(&dir.join(MANIFEST_FILE), &serde_json::to_vec_pretty(&manifest)?)?;
    let failed_replicates = manifest.runs.iter().filter(|r| r.status != "ok").count();
    Ok(ExperimentReport { dir: dir.to_path_buf(), manifest, failed_replicates, failed_cells, total_cells })
}

/// Finish a checkpointed replicate and write its trace below `dir`.
/// Returns the trace path.
pub fn resume_checkpoint(path: &Path, dir: &Path) -> Result<PathBuf> {
    let header: CheckpointHeader = peek_checkpoint(path)?;
    let spec = header.spec()?;
    struct Resume<'a> {
        path: &'a Path,
        spec: &'a ExperimentSpec,
        cell: Cell,
    }
    impl ProblemVisitor for Resume<'_> {
        type Output = Result<Trace>;
        fn visit<P: Problem>(self, problem: &P) -> Result<Trace> {
            let (_, state): (CheckpointHeader, EngineState<P::Gene>) = load_checkpoint(self.path)?;
            let c = &self.cell;
            let cfg = self.spec.cell_config(c.kappa, c.beta, c.seed);
            Ok(Engine::resume(problem, cfg, state)?.run().trace)
        }
    }
    let trace = with_problem(&spec.problem, Resume { path, spec: &spec, cell: header.cell })??;
    let out = dir.join("traces").join(format!("{}.csv", header.cell.stem()));
    write_file(&out, trace.to_csv_string()?.as_bytes())?;
    Ok(out)
}

/// Rebuild the best-energy summary of an output directory from its trace
/// files.
pub fn summarize_directory(dir: &Path) -> Result<Vec<(String, SampleStats)>> {
    let manifest = load_manifest(&dir.join(MANIFEST_FILE))?;
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for r in manifest.runs.iter().filter(|r| r.status == "ok") {
        let key = format!("k{}_b{}", r.kappa, r.beta);
        let path = dir.join(r.trace.as_deref().unwrap_or_default());
        let mut rdr = csv::Reader::from_path(&path)?;
        let headers = rdr.headers()?.clone();
        let col = headers
            .iter()
            .position(|h| h == "best_energy")
            .ok_or_else(|| Error::Trace(format!("{} has no best_energy column", path.display())))?;
        let mut last = None;
        for rec in rdr.records() {
            last = Some(rec?[col].parse::<f64>().map_err(|e| Error::Trace(e.to_string()))?);
        }
        let v = last.ok_or_else(|| Error::Trace(format!("{} is empty", path.display())))?;
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, vs)) => vs.push(v),
            None => groups.push((key, vec![v])),
        }
    }
    groups.into_iter().map(|(k, vs)| SampleStats::of(&vs).map(|s| (k, s))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cell_seeds_are_distinct_across_a_sweep() {
        let mut seeds = Vec::new();
        for &beta in &[0.55, 0.75, 1.0] {
            for &kappa in &[1, 2, 4, 5, 8, 14, 16, 30] {
                for r in 0..48 {
                    seeds.push(cell_seed(7, "rastrigin-10d", kappa, beta, r));
                }
            }
        }
        let n = seeds.len();
        seeds.sort_unstable();
        seeds.dedup();
        assert_eq!(seeds.len(), n);
        assert_ne!(cell_seed(7, "a", 1, 0.55, 0), cell_seed(7, "b", 1, 0.55, 0));
    }

    #[test]
    fn exit_codes() {
        let spec = crate::config::parse_experiment(
            "[problem]\nkind = \"quadratic\"\ndim = 1\n[run]\niterations = 1\n[partition]\ngrid = [0.5]\n",
            None,
        )
        .unwrap();
        let manifest = Manifest {
            format: MANIFEST_FORMAT,
            code_version: String::new(),
            config_hash: String::new(),
            spec,
            runs: Vec::new(),
        };
        let report = |failed_cells| ExperimentReport {
            dir: PathBuf::new(),
            manifest: manifest.clone(),
            failed_replicates: 0,
            failed_cells,
            total_cells: 4,
        };
        assert_eq!(report(0).exit_code(), 0);
        assert_eq!(report(1).exit_code(), 3);
        assert_eq!(report(4).exit_code(), 2);
    }
}
