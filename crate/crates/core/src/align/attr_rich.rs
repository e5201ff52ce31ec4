//! Alignment for the attribute-rich regime.
//!
//! Step 1 anchors every pair whose common attribute count exceeds `x`.
//! Step 2 matches each remaining user `i` of the first graph to the unique
//! unmatched `j` whose neighbors pair up with more than `y * |anchors|` of
//! `i`'s neighbors through the anchor set.
//!
//! Thresholds use natural logarithms throughout.

use crate::align::counting::build_anchors_with;
use crate::align::{
    check_same_shape, finalize, AlignFailure, AlignmentResult, AnchorSet, FailureKind,
};
use crate::error::{Error, Result};
use crate::exec::{map_slice, Execution};
use crate::graph::AttributedGraph;
use crate::model::ModelParams;

/// The smallest admissible `Delta_x`: `max(1, 3 ln n / (m q s_a^2))`.
pub fn min_delta_x(params: &ModelParams) -> Result<f64> {
    let signal = attr_signal_checked(params)?;
    Ok(f64::max(1.0, 3.0 * (params.n as f64).ln() / signal))
}

fn attr_signal_checked(params: &ModelParams) -> Result<f64> {
    if !(params.q > 0.0 && params.q < 1.0) {
        return Err(Error::DegenerateParameter(format!(
            "attribute threshold needs 0 < q < 1, got q = {}",
            params.q
        )));
    }
    if params.m == 0 {
        return Err(Error::DegenerateParameter(
            "attribute threshold needs at least one attribute".into(),
        ));
    }
    let signal = params.attr_signal();
    if signal <= 0.0 {
        return Err(Error::DegenerateParameter(format!(
            "m q s_a^2 = {signal} leaves no attribute signal"
        )));
    }
    Ok(signal)
}

/// `x = Delta_x / ln(1/q) * m q s_a^2` with `Delta_x` at its minimum.
pub fn threshold_x(params: &ModelParams) -> Result<f64> {
    threshold_x_with_delta(params, min_delta_x(params)?)
}

pub fn threshold_x_with_delta(params: &ModelParams, delta_x: f64) -> Result<f64> {
    let signal = attr_signal_checked(params)?;
    Ok(delta_x / (1.0 / params.q).ln() * signal)
}

/// Default `Delta_y`.
pub const DELTA_Y: f64 = 2.0;

/// `y = Delta_y / ln(1/p) * p s_u^2` with `Delta_y = 2`.
pub fn threshold_y(params: &ModelParams) -> Result<f64> {
    threshold_y_with_delta(params, DELTA_Y)
}

pub fn threshold_y_with_delta(params: &ModelParams, delta_y: f64) -> Result<f64> {
    if !(params.p > 0.0 && params.p < 1.0) {
        return Err(Error::DegenerateParameter(format!(
            "user threshold needs 0 < p < 1, got p = {}",
            params.p
        )));
    }
    Ok(delta_y / (1.0 / params.p).ln() * params.p * params.s_u * params.s_u)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttrRichOutcome {
    pub result: AlignmentResult,
    /// The step-1 anchors; empty when step 1 found a conflict.
    pub anchors: AnchorSet,
}

pub fn align_attr_rich(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    x: f64,
    y: f64,
) -> Result<AttrRichOutcome> {
    align_attr_rich_with(g1, g2, x, y, Execution::default())
}

enum RowVerdict {
    Unique(u32),
    NoCandidate { best: u32 },
    Several(usize),
}

pub fn align_attr_rich_with(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    x: f64,
    y: f64,
    exec: Execution,
) -> Result<AttrRichOutcome> {
    check_same_shape(g1, g2)?;
    let n = g1.n();
    let anchors = match build_anchors_with(g1, g2, x, exec)? {
        Ok(a) => a,
        Err(f) => {
            return Ok(AttrRichOutcome {
                result: f.into(),
                anchors: AnchorSet::default(),
            })
        }
    };
    let (fwd, back) = anchors.lookup(n, n);
    let unmatched1: Vec<u32> = (0..n as u32)
        .filter(|&i| fwd[i as usize].is_none())
        .collect();
    let unmatched2: Vec<u32> = (0..n as u32)
        .filter(|&j| back[j as usize].is_none())
        .collect();
    let bar = y * anchors.len() as f64;

    // W(i, j) counts anchors (k, l) with k ~ i in g1 and l ~ j in g2. The
    // neighborhoods contain i and j themselves, but neither can be anchored.
    let verdicts = map_slice(exec, &unmatched1, |&i| {
        let mut w = vec![0u32; n];
        for &k in g1.user_adj(i as usize) {
            if let Some(l) = fwd[k as usize] {
                for &j in g2.user_adj(l as usize) {
                    w[j as usize] += 1;
                }
            }
        }
        let mut hit = None;
        let mut hits = 0usize;
        let mut best = 0u32;
        for &j in &unmatched2 {
            let c = w[j as usize];
            best = best.max(c);
            if f64::from(c) > bar {
                hits += 1;
                hit = Some(j);
            }
        }
        match (hits, hit) {
            (1, Some(j)) => RowVerdict::Unique(j),
            (0, _) => RowVerdict::NoCandidate { best },
            _ => RowVerdict::Several(hits),
        }
    });

    let mut assign = fwd;
    for (&i, verdict) in unmatched1.iter().zip(verdicts) {
        match verdict {
            RowVerdict::Unique(j) => assign[i as usize] = Some(j),
            RowVerdict::NoCandidate { best } => {
                return Ok(AttrRichOutcome {
                    result: AlignFailure::new(
                        FailureKind::NonUniqueMatch,
                        format!(
                            "user {}: no candidate exceeds {bar} (best count {best})",
                            i + 1
                        ),
                    )
                    .into(),
                    anchors,
                })
            }
            RowVerdict::Several(k) => {
                return Ok(AttrRichOutcome {
                    result: AlignFailure::new(
                        FailureKind::NonUniqueMatch,
                        format!("user {}: {k} candidates exceed {bar}", i + 1),
                    )
                    .into(),
                    anchors,
                })
            }
        }
    }
    Ok(AttrRichOutcome {
        result: finalize(&assign),
        anchors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn x_threshold_hand_value() {
        let pr = params(1000, 1000, 0.01, 0.01, 0.9, 0.9);
        let dx = min_delta_x(&pr).unwrap();
        assert!((dx - 3.0 * 1000f64.ln() / 8.1).abs() < 1e-12);
        assert!((dx - 2.5584).abs() < 1e-4);
        let x = threshold_x(&pr).unwrap();
        assert!((x - 4.50).abs() < 5e-3, "x = {x}");
    }

    #[test]
    fn x_threshold_branch_boundary() {
        // m q s_a^2 = 3 ln n exactly puts Delta_x on the max branch boundary.
        let q = 3.0 * 100f64.ln() / 1000.0;
        let pr = params(100, 1000, 0.1, q, 1.0, 1.0);
        assert!((min_delta_x(&pr).unwrap() - 1.0).abs() < 1e-12);
        let x = threshold_x(&pr).unwrap();
        assert!((x - pr.attr_signal() / (1.0 / q).ln()).abs() < 1e-9);
    }

    #[test]
    fn x_is_linear_in_m_when_delta_is_one() {
        let a = params(100, 2000, 0.1, 0.05, 1.0, 1.0);
        let b = ModelParams { m: 4000, ..a };
        assert_eq!(min_delta_x(&a).unwrap(), 1.0);
        let ratio = threshold_x(&b).unwrap() / threshold_x(&a).unwrap();
        assert!((ratio - 2.0).abs() < 1e-12);
    }

    #[test]
    fn y_threshold_values() {
        let y = threshold_y(&params(10, 1, 0.01, 0.1, 0.9, 0.9)).unwrap();
        assert!((y - 0.003518).abs() < 1e-6, "y = {y}");
        let p = (-2.0f64).exp();
        let y = threshold_y(&params(10, 1, p, 0.1, 0.7, 0.9)).unwrap();
        assert!((y - p * 0.49).abs() < 1e-15);
        let y1 = threshold_y(&params(10, 1, 0.01, 0.1, 1.0, 1.0)).unwrap();
        let y2 = threshold_y_with_delta(&params(10, 1, 0.001, 0.1, 1.0, 1.0), 2.0).unwrap() * 10.0;
        assert!(y2 < y1);
    }

    #[test]
    fn degenerate_probabilities_rejected() {
        assert!(threshold_x(&params(10, 5, 0.1, 0.0, 1.0, 1.0)).is_err());
        assert!(threshold_x(&params(10, 5, 0.1, 1.0, 1.0, 1.0)).is_err());
        assert!(threshold_x(&params(10, 0, 0.1, 0.5, 1.0, 1.0)).is_err());
        assert!(threshold_x(&params(10, 5, 0.1, 0.5, 1.0, 0.0)).is_err());
        assert!(threshold_y(&params(10, 5, 0.0, 0.5, 1.0, 1.0)).is_err());
        assert!(threshold_y(&params(10, 5, 1.0, 0.5, 1.0, 1.0)).is_err());
    }

    fn u(i: u32) -> UserId {
        UserId(i)
    }

    #[test]
    fn all_anchored_skips_step_two() {
        let g = AttributedGraph::from_edges(
            3,
            3,
            [],
            [(u(0), AttrId(0)), (u(1), AttrId(1)), (u(2), AttrId(2))],
        )
        .unwrap();
        let pi = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        let h = g.apply_permutation(&pi).unwrap();
        let out = align_attr_rich(&g, &h, 0.5, 0.1).unwrap();
        assert_eq!(out.result.permutation(), Some(&pi));
        assert_eq!(out.anchors.len(), 3);
    }

    #[test]
    fn hand_trace_fails_on_isolated_vertex() {
        // Users 1 and 2 anchor through private attributes; user 3 touches
        // both anchors; user 4 is isolated.
        let g = AttributedGraph::from_edges(
            4,
            2,
            [(u(2), u(0)), (u(2), u(1))],
            [(u(0), AttrId(0)), (u(1), AttrId(1))],
        )
        .unwrap();
        let out = align_attr_rich(&g, &g, 0.5, 0.5).unwrap();
        assert_eq!(out.anchors.len(), 2);
        let f = out.result.failure().unwrap();
        assert_eq!(f.kind, FailureKind::NonUniqueMatch);
        assert!(f.context.starts_with("user 4"), "{}", f.context);
    }

    #[test]
    fn empty_anchor_set_cannot_match() {
        let g = AttributedGraph::from_edges(2, 1, [(u(0), u(1))], []).unwrap();
        let out = align_attr_rich(&g, &g, 5.0, 0.1).unwrap();
        assert!(out.anchors.is_empty());
        assert_eq!(
            out.result.failure().unwrap().kind,
            FailureKind::NonUniqueMatch
        );
    }

    #[test]
    fn step_two_recovers_unanchored_user() {
        // Users 1..3 anchored; user 4 adjacent to 1 and 2, user 5 adjacent to 3.
        let g = AttributedGraph::from_edges(
            5,
            3,
            [(u(3), u(0)), (u(3), u(1)), (u(4), u(2))],
            [(u(0), AttrId(0)), (u(1), AttrId(1)), (u(2), AttrId(2))],
        )
        .unwrap();
        let pi = Permutation::from_vec(vec![4, 3, 2, 1, 0]).unwrap();
        let h = g.apply_permutation(&pi).unwrap();
        let out = align_attr_rich(&g, &h, 0.5, 0.1).unwrap();
        assert_eq!(out.result.permutation(), Some(&pi));
    }
}
