//! Parameter sweeps and the results CSV.
//!
//! Columns, in order:
//!
//! ```text
//! row_type,n,m,p,q,s_u,s_a,algo,epsilon,tau,x,y,z,l,eta,seed,trial,success,
//! failure_kind,anchors,runtime_ms,thm1_feasible,thm2_feasible,coord_x,coord_y
//! ```
//!
//! Trial rows carry the trial's stream key in `seed`, its index in `trial`,
//! `success` as 0/1 and the raw anchor count and runtime. Each cell ends with
//! an `aggregate` row where `seed` is the master seed, `trial` is the number
//! of trials, `success` the success rate, and `anchors` / `runtime_ms` are
//! means. Thresholds a cell did not use are left empty.

use std::io::Write;

use crate::error::Result;
use crate::harness::config::SweepConfig;
use crate::harness::region::RegionClass;
use crate::harness::trial::Algorithm;
use crate::harness::trial::{run_trial, TrialRecord, UsedThresholds};
use crate::model::ModelParams;

pub const CSV_HEADER: [&str; 25] = [
    "row_type",
    "n",
    "m",
    "p",
    "q",
    "s_u",
    "s_a",
    "algo",
    "epsilon",
    "tau",
    "x",
    "y",
    "z",
    "l",
    "eta",
    "seed",
    "trial",
    "success",
    "failure_kind",
    "anchors",
    "runtime_ms",
    "thm1_feasible",
    "thm2_feasible",
    "coord_x",
    "coord_y",
];

/// Summary of one cell's trials.
#[derive(Debug, Clone, PartialEq)]
pub struct CellAggregate {
    pub params: ModelParams,
    pub algo: Algorithm,
    pub epsilon: f64,
    pub tau: f64,
    pub thresholds: UsedThresholds,
    pub master_seed: u64,
    pub trials: u32,
    pub success_rate: f64,
    pub mean_anchors: f64,
    pub mean_runtime_ms: f64,
    pub region: Option<RegionClass>,
}

impl CellAggregate {
    fn from_records(records: &[TrialRecord], master_seed: u64) -> Self {
        let first = &records[0];
        let k = records.len() as f64;
        CellAggregate {
            params: first.params,
            algo: first.algo,
            epsilon: first.epsilon,
            tau: first.tau,
            thresholds: first.thresholds,
            master_seed,
            trials: records.len() as u32,
            success_rate: records.iter().filter(|r| r.success).count() as f64 / k,
            mean_anchors: records.iter().map(|r| r.anchors as f64).sum::<f64>() / k,
            mean_runtime_ms: records.iter().map(|r| r.runtime_ms).sum::<f64>() / k,
            region: first.region,
        }
    }
}

/// All records of a sweep in canonical (cell, trial) order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResults {
    pub cells: Vec<(Vec<TrialRecord>, CellAggregate)>,
}

impl SweepResults {
    pub fn trial_count(&self) -> usize {
        self.cells.iter().map(|(t, _)| t.len()).sum()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER)?;
        for (trials, agg) in &self.cells {
            for r in trials {
                out.write_record(trial_row(r))?;
            }
            out.write_record(aggregate_row(agg))?;
        }
        out.flush()
            .map_err(|e| crate::error::Error::io("flushing CSV", e))?;
        Ok(())
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

fn common_prefix(
    row_type: &str,
    params: &ModelParams,
    algo: Algorithm,
    epsilon: f64,
    tau: f64,
    t: &UsedThresholds,
) -> Vec<String> {
    vec![
        row_type.to_string(),
        params.n.to_string(),
        params.m.to_string(),
        params.p.to_string(),
        params.q.to_string(),
        params.s_u.to_string(),
        params.s_a.to_string(),
        algo.as_str().to_string(),
        epsilon.to_string(),
        tau.to_string(),
        opt(t.x),
        opt(t.y),
        opt(t.z),
        opt(t.l.or(t.d)),
        opt(t.eta),
    ]
}

fn region_suffix(region: &Option<RegionClass>) -> [String; 4] {
    match region {
        Some(r) => [
            flag(r.thm1_feasible),
            flag(r.thm2_feasible),
            r.coord_x.to_string(),
            r.coord_y.to_string(),
        ],
        None => Default::default(),
    }
}

fn trial_row(r: &TrialRecord) -> Vec<String> {
    let mut row = common_prefix("trial", &r.params, r.algo, r.epsilon, r.tau, &r.thresholds);
    row.extend([
        r.seed.to_string(),
        r.trial.to_string(),
        flag(r.success),
        r.failure_kind.clone().unwrap_or_default(),
        r.anchors.to_string(),
        r.runtime_ms.to_string(),
    ]);
    row.extend(region_suffix(&r.region));
    row
}

fn aggregate_row(a: &CellAggregate) -> Vec<String> {
    let mut row = common_prefix(
        "aggregate",
        &a.params,
        a.algo,
        a.epsilon,
        a.tau,
        &a.thresholds,
    );
    row.extend([
        a.master_seed.to_string(),
        a.trials.to_string(),
        a.success_rate.to_string(),
        String::new(),
        a.mean_anchors.to_string(),
        a.mean_runtime_ms.to_string(),
    ]);
    row.extend(region_suffix(&a.region));
    row
}

/// Runs every (cell, trial) job on up to `workers` threads. Trials run their
/// own kernels sequentially; parallelism is across jobs only.
pub fn run_sweep(cfg: &SweepConfig, workers: usize) -> Result<SweepResults> {
    cfg.validate()?;
    let cells = cfg.cells();
    let jobs: Vec<(usize, u32)> = (0..cells.len())
        .flat_map(|c| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let run = |&(c, t): &(usize, u32)| run_trial(&cells[c], cfg.seed, c as u32, t);
    let records = run_jobs(&jobs, workers, run)?;

    let per_cell = cfg.trials as usize;
    let cells = records
        .chunks(per_cell)
        .map(|chunk| (chunk.to_vec(), CellAggregate::from_records(chunk, cfg.seed)))
        .collect();
    Ok(SweepResults { cells })
}

#[cfg(feature = "parallel")]
fn run_jobs<F>(jobs: &[(usize, u32)], workers: usize, f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(&(usize, u32)) -> TrialRecord + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 {
        return Ok(jobs.iter().map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| {
            crate::error::Error::InvalidParameter(format!("cannot start {workers} workers: {e}"))
        })?;
    // collect() on an indexed iterator keeps job order.
    Ok(pool.install(|| jobs.par_iter().map(f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_jobs<F>(jobs: &[(usize, u32)], _workers: usize, f: F) -> Result<Vec<TrialRecord>>
where
    F: Fn(&(usize, u32)) -> TrialRecord,
{
    Ok(jobs.iter().map(f).collect())
}

/// [`run_sweep`] followed by [`SweepResults::write_csv`].
pub fn sweep<W: Write>(cfg: &SweepConfig, workers: usize, w: W) -> Result<SweepResults> {
    let res = run_sweep(cfg, workers)?;
    res.write_csv(w)?;
    Ok(res)
}
