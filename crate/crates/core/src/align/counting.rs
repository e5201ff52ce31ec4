//! Common-attribute counting.
//!
//! `C(i, j)` is the number of attributes adjacent to user `i` in the first
//! graph and to user `j` in the second. The pairwise routine intersects two
//! sorted lists. The bulk routines walk an inverted index (attribute to
//! users of the second graph), so each row costs the number of
//! attribute-sharing partners rather than `n * m`.

use crate::align::{check_same_shape, AlignFailure, AnchorSet, FailureKind};
use crate::error::Result;
use crate::exec::{map_range, Execution};
use crate::graph::{check_user, AttributedGraph, UserId};

/// Size of the intersection of two sorted slices.
pub(crate) fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

pub fn common_attribute_count(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    i: UserId,
    j: UserId,
) -> Result<usize> {
    check_user(i, g1.n())?;
    check_user(j, g2.n())?;
    Ok(sorted_intersection_len(
        g1.attr_adj(i.index()),
        g2.attr_adj(j.index()),
    ))
}

/// Visits the nonzero entries of row `i`: `visit(j, C(i, j))`.
fn for_each_nonzero(
    g1: &AttributedGraph,
    members2: &[Vec<u32>],
    i: usize,
    counts: &mut [u32],
    touched: &mut Vec<u32>,
    mut visit: impl FnMut(u32, u32),
) {
    touched.clear();
    for &a in g1.attr_adj(i) {
        for &j in &members2[a as usize] {
            if counts[j as usize] == 0 {
                touched.push(j);
            }
            counts[j as usize] += 1;
        }
    }
    for &j in touched.iter() {
        visit(j, counts[j as usize]);
        counts[j as usize] = 0;
    }
}

/// The full `n x n` matrix of common attribute counts.
pub fn common_count_matrix(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    exec: Execution,
) -> Result<Vec<Vec<u32>>> {
    check_same_shape(g1, g2)?;
    let n = g1.n();
    let members2 = g2.attribute_members();
    Ok(map_range(exec, n, |i| {
        let mut row = vec![0u32; n];
        let mut counts = vec![0u32; n];
        let mut touched = Vec::new();
        for_each_nonzero(g1, &members2, i, &mut counts, &mut touched, |j, c| {
            row[j as usize] = c;
        });
        row
    }))
}

/// All pairs with `C(i, j) > threshold`, sorted.
pub fn anchor_candidates(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    threshold: f64,
    exec: Execution,
) -> Result<Vec<(UserId, UserId)>> {
    check_same_shape(g1, g2)?;
    let n = g1.n();
    if threshold < 0.0 {
        // Zero counts qualify too: every pair is a candidate.
        return Ok((0..n as u32)
            .flat_map(|i| (0..n as u32).map(move |j| (UserId(i), UserId(j))))
            .collect());
    }
    let members2 = g2.attribute_members();
    // Rows are processed in blocks so scratch buffers are reused.
    const BLOCK: usize = 64;
    let blocks = n.div_ceil(BLOCK);
    let per_block = map_range(exec, blocks, |b| {
        let mut counts = vec![0u32; n];
        let mut touched = Vec::new();
        let mut out = Vec::new();
        for i in b * BLOCK..((b + 1) * BLOCK).min(n) {
            let start = out.len();
            for_each_nonzero(g1, &members2, i, &mut counts, &mut touched, |j, c| {
                if f64::from(c) > threshold {
                    out.push((UserId(i as u32), UserId(j)));
                }
            });
            out[start..].sort_unstable();
        }
        out
    });
    Ok(per_block.into_iter().flatten().collect())
}

/// Step 1 of both attributed algorithms: keep every pair whose common
/// attribute count strictly exceeds `threshold`, and fail on any conflict.
pub fn build_anchors(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    threshold: f64,
) -> Result<std::result::Result<AnchorSet, AlignFailure>> {
    build_anchors_with(g1, g2, threshold, Execution::default())
}

pub fn build_anchors_with(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    threshold: f64,
    exec: Execution,
) -> Result<std::result::Result<AnchorSet, AlignFailure>> {
    let cands = anchor_candidates(g1, g2, threshold, exec)?;
    Ok(AnchorSet::new(cands).map_err(|c| {
        AlignFailure::new(
            FailureKind::AnchorConflict,
            format!("attribute threshold {threshold}: {c}"),
        )
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttrId;

    fn g(n: usize, m: usize, attrs: &[(u32, u32)]) -> AttributedGraph {
        AttributedGraph::from_edges(n, m, [], attrs.iter().map(|&(u, a)| (UserId(u), AttrId(a))))
            .unwrap()
    }

    #[test]
    fn pairwise_counts() {
        // N1(0) = {0, 1}, N2(0) = {1, 2}.
        let g1 = g(2, 3, &[(0, 0), (0, 1)]);
        let g2 = g(2, 3, &[(0, 1), (0, 2)]);
        assert_eq!(
            common_attribute_count(&g1, &g2, UserId(0), UserId(0)).unwrap(),
            1
        );
        assert_eq!(
            common_attribute_count(&g1, &g2, UserId(1), UserId(0)).unwrap(),
            0
        );
        assert!(common_attribute_count(&g1, &g2, UserId(2), UserId(0)).is_err());
    }

    #[test]
    fn matrix_matches_pairwise() {
        let g1 = g(3, 4, &[(0, 0), (0, 1), (1, 1), (1, 3), (2, 2)]);
        let g2 = g(3, 4, &[(0, 1), (1, 0), (1, 1), (2, 3), (2, 1)]);
        let c = common_count_matrix(&g1, &g2, Execution::Sequential).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = common_attribute_count(&g1, &g2, UserId(i), UserId(j)).unwrap();
                assert_eq!(c[i as usize][j as usize] as usize, want);
            }
        }
        assert_eq!(
            c,
            common_count_matrix(&g1, &g2, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn unreachable_threshold_gives_empty_set() {
        let g1 = g(3, 2, &[(0, 0), (0, 1), (1, 0)]);
        let a = build_anchors(&g1, &g1, 2.0).unwrap().unwrap();
        assert!(a.is_empty());
    }

    #[test]
    fn unique_signatures_anchor_identity() {
        let g1 = g(4, 4, &[(0, 0), (1, 1), (2, 2), (3, 3)]);
        let a = build_anchors(&g1, &g1, 0.5).unwrap().unwrap();
        let want: Vec<_> = (0..4).map(|i| (UserId(i), UserId(i))).collect();
        assert_eq!(a.pairs(), want.as_slice());
    }

    #[test]
    fn shared_second_coordinate_conflicts() {
        let g1 = g(2, 1, &[(0, 0), (1, 0)]);
        let g2 = g(2, 1, &[(0, 0)]);
        let r = build_anchors(&g1, &g2, 0.5).unwrap();
        assert_eq!(r.unwrap_err().kind, FailureKind::AnchorConflict);
    }

    #[test]
    fn negative_threshold_takes_every_pair() {
        let g1 = g(2, 1, &[(0, 0)]);
        let c = anchor_candidates(&g1, &g1, -1.0, Execution::Sequential).unwrap();
        assert_eq!(c.len(), 4);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let g1 = g(2, 1, &[]);
        let g2 = g(3, 1, &[]);
        assert!(build_anchors(&g1, &g2, 0.0).is_err());
    }
}
