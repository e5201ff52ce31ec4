//! Alignment for the attribute-sparse regime.
//!
//! Step 1 anchors pairs whose common attribute count exceeds
//! `z = (1 + tau) m q s_a^2`. Step 2 hands the anchors as seeds to one of
//! the seeded routines on the user-only graphs: the dense routine when
//! `np > n^(1/7)`, the sparse routine otherwise.

use crate::align::counting::build_anchors_with;
use crate::align::seeded::{
    seeded_dense_align_with, seeded_sparse_align_with, RemovalSearch, SparseParams,
};
use crate::align::{check_same_shape, AlignmentResult, AnchorSet};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::AttributedGraph;
use crate::model::ModelParams;

pub fn threshold_z(params: &ModelParams, tau: f64) -> Result<f64> {
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} must be positive"
        )));
    }
    Ok((1.0 + tau) * params.attr_signal())
}

/// Largest admissible `b` in `np = b n^a`: `s_u / (16 (2 - s_u)^2)`.
pub fn b_cap(s_u: f64) -> f64 {
    s_u / (16.0 * (2.0 - s_u).powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DispatchPlan {
    Dense { d: usize, a: f64, b: f64 },
    Sparse { l: usize, eta: f64 },
}

impl DispatchPlan {
    pub fn is_dense(&self) -> bool {
        matches!(self, DispatchPlan::Dense { .. })
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PlanOverrides {
    pub d: Option<usize>,
    pub l: Option<usize>,
    pub eta: Option<f64>,
}

/// Picks the seeded routine and its parameters.
///
/// Dense branch: `b` is fixed at [`b_cap`] and `a = ln(np / b) / ln n`,
/// giving `d = floor(1/a) + 1`. Sparse branch:
/// `l = floor((6/7) ln n / ln(np))` and `eta = 4^(2l+2) n^(-2/7)`.
pub fn plan_dispatch(n: usize, p: f64, s_u: f64, overrides: PlanOverrides) -> Result<DispatchPlan> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "dispatch needs n >= 2, got {n}"
        )));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dispatch needs 0 < p < 1, got {p}"
        )));
    }
    if !(s_u > 0.0 && s_u <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "dispatch needs 0 < s_u <= 1, got {s_u}"
        )));
    }
    let nf = n as f64;
    let np = nf * p;
    if np > nf.powf(1.0 / 7.0) {
        let b = b_cap(s_u);
        let a = (np / b).ln() / nf.ln();
        if !(a > 0.0 && a <= 1.0) {
            return Err(Error::Infeasible(format!(
                "np = {np} exceeds {b} n (exponent a = {a} outside (0, 1])"
            )));
        }
        let d = overrides.d.unwrap_or((1.0 / a).floor() as usize + 1);
        if d == 0 {
            return Err(Error::InvalidParameter("depth d must be at least 1".into()));
        }
        Ok(DispatchPlan::Dense { d, a, b })
    } else {
        let l = match overrides.l {
            Some(l) => l,
            None => {
                let raw = (6.0 / 7.0) * nf.ln() / np.ln();
                if !(raw.is_finite() && raw >= 1.0) {
                    return Err(Error::Infeasible(format!(
                        "np = {np} gives no usable radius l ({raw})"
                    )));
                }
                raw.floor() as usize
            }
        };
        if l == 0 {
            return Err(Error::InvalidParameter(
                "radius l must be at least 1".into(),
            ));
        }
        let eta = overrides
            .eta
            .unwrap_or_else(|| 4f64.powi(2 * l as i32 + 2) * nf.powf(-2.0 / 7.0));
        if eta.is_nan() || eta <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "eta = {eta} must be positive"
            )));
        }
        Ok(DispatchPlan::Sparse { l, eta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttrSparseConfig {
    pub z: f64,
    pub plan: DispatchPlan,
    /// User count passed to the sparse routine's high-degree cutoff.
    pub n_model: usize,
    pub search: RemovalSearch,
}

impl AttrSparseConfig {
    pub fn from_params(params: &ModelParams, tau: f64, overrides: PlanOverrides) -> Result<Self> {
        Ok(AttrSparseConfig {
            z: threshold_z(params, tau)?,
            plan: plan_dispatch(params.n, params.p, params.s_u, overrides)?,
            n_model: params.n,
            search: RemovalSearch::Exhaustive,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrSparseOutcome {
    pub result: AlignmentResult,
    /// The step-1 anchors; empty when step 1 found a conflict.
    pub anchors: AnchorSet,
    pub plan: DispatchPlan,
}

pub fn align_attr_sparse(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    params: &ModelParams,
    tau: f64,
    overrides: PlanOverrides,
) -> Result<AttrSparseOutcome> {
    let cfg = AttrSparseConfig::from_params(params, tau, overrides)?;
    align_attr_sparse_with(g1, g2, &cfg, Execution::default())
}

pub fn align_attr_sparse_with(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    cfg: &AttrSparseConfig,
    exec: Execution,
) -> Result<AttrSparseOutcome> {
    check_same_shape(g1, g2)?;
    let anchors = match build_anchors_with(g1, g2, cfg.z, exec)? {
        Ok(a) => a,
        Err(f) => {
            return Ok(AttrSparseOutcome {
                result: f.into(),
                anchors: AnchorSet::default(),
                plan: cfg.plan,
            })
        }
    };
    let u1 = g1.users_only();
    let u2 = g2.users_only();
    let result = match cfg.plan {
        DispatchPlan::Dense { d, .. } => seeded_dense_align_with(&u1, &u2, &anchors, d, exec)?,
        DispatchPlan::Sparse { l, eta } => {
            let sp = SparseParams {
                radius: l,
                eta,
                n_model: cfg.n_model,
                search: cfg.search,
            };
            seeded_sparse_align_with(&u1, &u2, &anchors, &sp, exec)?
        }
    };
    Ok(AttrSparseOutcome {
        result,
        anchors,
        plan: cfg.plan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::FailureKind;
    use crate::graph::{AttrId, Permutation, UserId};

    fn params(n: usize, m: usize, p: f64, q: f64, s_u: f64, s_a: f64) -> ModelParams {
        ModelParams {
            n,
            m,
            p,
            q,
            s_u,
            s_a,
        }
    }

    #[test]
    fn z_threshold_values() {
        let pr = params(10, 1000, 0.1, 0.001, 0.9, 0.9);
        assert!((threshold_z(&pr, 0.5).unwrap() - 1.215).abs() < 1e-12);
        assert!((threshold_z(&pr, 1e-12).unwrap() - pr.attr_signal()).abs() < 1e-9);
        let double = params(10, 2000, 0.1, 0.001, 0.9, 0.9);
        assert!((threshold_z(&double, 0.5).unwrap() - 2.0 * 1.215).abs() < 1e-12);
        assert!(threshold_z(&pr, 0.0).is_err());
        assert!(threshold_z(&pr, -1.0).is_err());
    }

    #[test]
    fn dense_dispatch_hand_values() {
        let plan =
            plan_dispatch(100_000, 1000.0 / 100_000.0, 0.9, PlanOverrides::default()).unwrap();
        let DispatchPlan::Dense { d, a, b } = plan else {
            panic!("expected dense, got {plan:?}")
        };
        assert!((b - 0.046488).abs() < 1e-6, "b = {b}");
        assert!((a - 0.8665).abs() < 1e-4, "a = {a}");
        assert_eq!(d, 2);
        let np = b * 100_000f64.powf(a);
        assert!((np - 1000.0).abs() / 1000.0 < 1e-9);
    }

    #[test]
    fn sparse_dispatch_hand_values() {
        let plan = plan_dispatch(100_000, 3.0 / 100_000.0, 0.9, PlanOverrides::default()).unwrap();
        let DispatchPlan::Sparse { l, eta } = plan else {
            panic!("expected sparse, got {plan:?}")
        };
        assert_eq!(l, 8);
        assert!((eta / 2.56e9 - 1.0).abs() < 0.01, "eta = {eta}");
        let o = PlanOverrides {
            l: Some(2),
            eta: Some(0.1),
            d: None,
        };
        assert_eq!(
            plan_dispatch(100_000, 3.0 / 100_000.0, 0.9, o).unwrap(),
            DispatchPlan::Sparse { l: 2, eta: 0.1 }
        );
    }

    #[test]
    fn dispatch_rejects_infeasible() {
        assert!(plan_dispatch(1000, 1.0, 0.9, PlanOverrides::default()).is_err());
        assert!(matches!(
            plan_dispatch(1000, 0.5, 0.9, PlanOverrides::default()),
            Err(Error::Infeasible(_))
        ));
        assert!(plan_dispatch(1, 0.5, 0.9, PlanOverrides::default()).is_err());
    }

    fn u(i: u32) -> UserId {
        UserId(i)
    }

    #[test]
    fn unique_signatures_pass_through() {
        // Each user owns two private attributes; z = 1.5 keeps every true pair.
        let n = 6;
        let attrs: Vec<_> = (0..n as u32)
            .flat_map(|i| [(u(i), AttrId(2 * i)), (u(i), AttrId(2 * i + 1))])
            .collect();
        let g = AttributedGraph::from_edges(n, 2 * n, [(u(0), u(1)), (u(2), u(3))], attrs).unwrap();
        let pi = Permutation::from_vec(vec![5, 4, 3, 2, 1, 0]).unwrap();
        let h = g.apply_permutation(&pi).unwrap();
        for plan in [
            DispatchPlan::Dense {
                d: 2,
                a: 0.5,
                b: 0.01,
            },
            DispatchPlan::Sparse { l: 1, eta: 0.5 },
        ] {
            let cfg = AttrSparseConfig {
                z: 1.5,
                plan,
                n_model: n,
                search: RemovalSearch::Exhaustive,
            };
            let out = align_attr_sparse_with(&g, &h, &cfg, Execution::Sequential).unwrap();
            assert_eq!(out.anchors.len(), n);
            assert_eq!(out.result.permutation(), Some(&pi), "{plan:?}");
        }
    }

    #[test]
    fn identical_signatures_conflict() {
        let g = AttributedGraph::from_edges(
            3,
            2,
            [],
            [
                (u(0), AttrId(0)),
                (u(0), AttrId(1)),
                (u(1), AttrId(0)),
                (u(1), AttrId(1)),
            ],
        )
        .unwrap();
        let cfg = AttrSparseConfig {
            z: 1.5,
            plan: DispatchPlan::Dense {
                d: 2,
                a: 0.5,
                b: 0.01,
            },
            n_model: 3,
            search: RemovalSearch::Exhaustive,
        };
        let out = align_attr_sparse_with(&g, &g, &cfg, Execution::Sequential).unwrap();
        assert_eq!(
            out.result.failure().unwrap().kind,
            FailureKind::AnchorConflict
        );
        assert!(out.anchors.is_empty());
    }

    #[test]
    fn unreachable_z_leaves_subroutine_without_seeds() {
        let g = AttributedGraph::from_edges(3, 1, [(u(0), u(1))], [(u(0), AttrId(0))]).unwrap();
        let cfg = AttrSparseConfig {
            z: 5.0,
            plan: DispatchPlan::Dense {
                d: 2,
                a: 0.5,
                b: 0.01,
            },
            n_model: 3,
            search: RemovalSearch::Exhaustive,
        };
        let out = align_attr_sparse_with(&g, &g, &cfg, Execution::Sequential).unwrap();
        assert!(out.anchors.is_empty());
        assert!(!out.result.is_success());
    }
}
