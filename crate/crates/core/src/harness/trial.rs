use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::align::attr_rich::{
    align_attr_rich_with, min_delta_x, threshold_x_with_delta, threshold_y_with_delta, DELTA_Y,
};
use crate::align::attr_sparse::{
    align_attr_sparse_with, plan_dispatch, threshold_z, AttrSparseConfig, DispatchPlan,
    PlanOverrides,
};
use crate::align::seeded::RemovalSearch;
use crate::align::AlignmentResult;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::region::{classify_region, RegionClass};
use crate::model::{generate_pair, trial_rng, trial_seed, ModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    AttrRich,
    AttrSparse,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::AttrRich => "attr_rich",
            Algorithm::AttrSparse => "attr_sparse",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "attr_rich" => Ok(Algorithm::AttrRich),
            "attr_sparse" => Ok(Algorithm::AttrSparse),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?} (expected attr_rich or attr_sparse)"
            ))),
        }
    }
}

/// Constants the thresholds and the region classifier depend on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub epsilon: f64,
    pub tau: f64,
    /// `None` uses `max(1, 3 ln n / (m q s_a^2))`.
    pub delta_x: Option<f64>,
    /// `None` uses 2.
    pub delta_y: Option<f64>,
}

/// Direct threshold overrides; each replaces the computed value.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub l: Option<usize>,
    pub eta: Option<f64>,
    pub d: Option<usize>,
}

/// Everything needed to run one trial except its index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSpec {
    pub params: ModelParams,
    pub algo: Algorithm,
    pub constants: Constants,
    pub overrides: Overrides,
    pub search: RemovalSearch,
    /// Policy for the kernels inside the algorithm call.
    pub exec: Execution,
}

/// Threshold values a trial actually used.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct UsedThresholds {
    pub x: Option<f64>,
    pub y: Option<f64>,
    pub z: Option<f64>,
    pub l: Option<usize>,
    pub eta: Option<f64>,
    pub d: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub params: ModelParams,
    pub algo: Algorithm,
    pub epsilon: f64,
    pub tau: f64,
    pub thresholds: UsedThresholds,
    /// Stream key of this trial.
    pub seed: u64,
    pub trial: u32,
    /// True only when the estimate equals the ground truth everywhere.
    pub success: bool,
    /// Empty on success; otherwise the algorithm's failure kind,
    /// `WrongPermutation`, or `ParameterError`.
    pub failure_kind: Option<String>,
    pub failure_context: Option<String>,
    pub anchors: usize,
    /// Wall time of the algorithm call alone.
    pub runtime_ms: f64,
    pub region: Option<RegionClass>,
}

enum Prepared {
    Rich { x: f64, y: f64 },
    Sparse(AttrSparseConfig),
}

fn prepare(spec: &TrialSpec) -> Result<(Prepared, UsedThresholds)> {
    let p = &spec.params;
    let o = &spec.overrides;
    match spec.algo {
        Algorithm::AttrRich => {
            let x = match o.x {
                Some(x) => x,
                None => {
                    let dx = match spec.constants.delta_x {
                        Some(d) => d,
                        None => min_delta_x(p)?,
                    };
                    threshold_x_with_delta(p, dx)?
                }
            };
            let y = match o.y {
                Some(y) => y,
                None => threshold_y_with_delta(p, spec.constants.delta_y.unwrap_or(DELTA_Y))?,
            };
            Ok((
                Prepared::Rich { x, y },
                UsedThresholds {
                    x: Some(x),
                    y: Some(y),
                    ..Default::default()
                },
            ))
        }
        Algorithm::AttrSparse => {
            let z = match o.z {
                Some(z) => z,
                None => threshold_z(p, spec.constants.tau)?,
            };
            let plan = plan_dispatch(
                p.n,
                p.p,
                p.s_u,
                PlanOverrides {
                    d: o.d,
                    l: o.l,
                    eta: o.eta,
                },
            )?;
            let used = match plan {
                DispatchPlan::Dense { d, .. } => UsedThresholds {
                    z: Some(z),
                    d: Some(d),
                    ..Default::default()
                },
                DispatchPlan::Sparse { l, eta } => UsedThresholds {
                    z: Some(z),
                    l: Some(l),
                    eta: Some(eta),
                    ..Default::default()
                },
            };
            Ok((
                Prepared::Sparse(AttrSparseConfig {
                    z,
                    plan,
                    n_model: p.n,
                    search: spec.search,
                }),
                used,
            ))
        }
    }
}

/// Runs one trial: generate from the trial's stream, align, and check the
/// estimate against the ground truth. Failures of any kind are recorded,
/// never returned as errors.
pub fn run_trial(spec: &TrialSpec, master_seed: u64, cell: u32, trial: u32) -> TrialRecord {
    let seed = trial_seed(master_seed, cell, trial);
    let mut rec = TrialRecord {
        params: spec.params,
        algo: spec.algo,
        epsilon: spec.constants.epsilon,
        tau: spec.constants.tau,
        thresholds: UsedThresholds::default(),
        seed,
        trial,
        success: false,
        failure_kind: None,
        failure_context: None,
        anchors: 0,
        runtime_ms: 0.0,
        region: classify_region(&spec.params, spec.constants.epsilon, spec.constants.tau).ok(),
    };
    let param_error = |rec: &mut TrialRecord, e: Error| {
        rec.failure_kind = Some("ParameterError".into());
        rec.failure_context = Some(e.to_string());
    };

    let (prepared, used) = match spec.params.validate().and_then(|_| prepare(spec)) {
        Ok(v) => v,
        Err(e) => {
            param_error(&mut rec, e);
            return rec;
        }
    };
    rec.thresholds = used;

    let mut rng = trial_rng(seed);
    let inst = match generate_pair(&spec.params, &mut rng) {
        Ok(i) => i,
        Err(e) => {
            param_error(&mut rec, e);
            return rec;
        }
    };

    let start = Instant::now();
    let outcome = match &prepared {
        Prepared::Rich { x, y } => align_attr_rich_with(&inst.g1, &inst.g2_anon, *x, *y, spec.exec)
            .map(|o| (o.result, o.anchors.len())),
        Prepared::Sparse(cfg) => align_attr_sparse_with(&inst.g1, &inst.g2_anon, cfg, spec.exec)
            .map(|o| (o.result, o.anchors.len())),
    };
    rec.runtime_ms = start.elapsed().as_secs_f64() * 1e3;

    let (result, anchors) = match outcome {
        Ok(v) => v,
        Err(e) => {
            param_error(&mut rec, e);
            return rec;
        }
    };
    rec.anchors = anchors;
    match result {
        AlignmentResult::Success(pi_hat) => {
            if pi_hat == inst.ground_truth {
                rec.success = true;
            } else {
                let wrong = pi_hat
                    .as_slice()
                    .iter()
                    .zip(inst.ground_truth.as_slice())
                    .filter(|(a, b)| a != b)
                    .count();
                rec.failure_kind = Some("WrongPermutation".into());
                rec.failure_context = Some(format!("{wrong} users mismatched"));
            }
        }
        AlignmentResult::Failure(f) => {
            rec.failure_kind = Some(f.kind.as_str().into());
            rec.failure_context = Some(f.context);
        }
    }
    rec
}
