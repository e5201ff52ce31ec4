//! Seeded alignment on user-only graphs.
//!
//! Two routines consume a conflict-free seed set:
//!
//! * [`seeded_dense_align`] scores each unseeded pair `(u, v)` by the number
//!   of seed pairs lying in the `(d-1)`-hop balls of `u` and `v`, and maps
//!   `u` to the best-scoring `v`. A tie for the best score is a failure.
//! * [`seeded_sparse_align`] first matches high-degree vertices through
//!   robust seed counts around their neighbors, then extends the match set
//!   one hop to low-degree vertices.
//!
//! Attribute edges of the input graphs are ignored.

use crate::align::{finalize, AlignFailure, AlignmentResult, AnchorSet, FailureKind};
use crate::error::{Error, Result};
use crate::exec::{map_range, Execution};
use crate::graph::{AttributedGraph, Bfs, UserId};

/// A seed set: pairs `(v, pi(v))` believed to be correct.
pub type SeedSet = AnchorSet;

fn check_inputs(g1: &AttributedGraph, g2: &AttributedGraph, seeds: &SeedSet) -> Result<()> {
    if g1.n() != g2.n() {
        return Err(Error::ContractViolation(format!(
            "seeded alignment needs equal user counts, got {} and {}",
            g1.n(),
            g2.n()
        )));
    }
    seeds.check_bounds(g1.n(), g2.n())
}

/// Balls of radius `radius` around the second coordinate of every seed,
/// indexed by seed position. By symmetry of hop distance, `v` lies in
/// `balls[s]` exactly when seed `s`'s second vertex is within `radius` of
/// `v`.
fn seed_balls_g2(g2: &AttributedGraph, seeds: &SeedSet, radius: usize) -> Vec<Vec<u32>> {
    let mut bfs = Bfs::new(g2.n());
    seeds
        .pairs()
        .iter()
        .map(|&(_, j)| {
            let mut out = Vec::new();
            bfs.ball(g2, j.0, radius, |_| false, &mut out);
            out
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn dense_row(
    g1: &AttributedGraph,
    u: u32,
    radius: usize,
    seed_pos1: &[Option<u32>],
    balls2: &[Vec<u32>],
    bfs: &mut Bfs,
    ball: &mut Vec<u32>,
    row: &mut [u32],
) {
    row.fill(0);
    bfs.ball(g1, u, radius, |_| false, ball);
    for &i in ball.iter() {
        if let Some(s) = seed_pos1[i as usize] {
            for &v in &balls2[s as usize] {
                row[v as usize] += 1;
            }
        }
    }
}

fn seed_positions(seeds: &SeedSet, n: usize) -> Vec<Option<u32>> {
    let mut pos = vec![None; n];
    for (s, &(i, _)) in seeds.pairs().iter().enumerate() {
        pos[i.index()] = Some(s as u32);
    }
    pos
}

/// The full matrix of common-seed counts `lambda(u, v)` over `(d-1)`-hop
/// balls, for every pair of vertices (seeded or not).
pub fn dense_scores(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    d: usize,
    exec: Execution,
) -> Result<Vec<Vec<u32>>> {
    check_inputs(g1, g2, seeds)?;
    if d == 0 {
        return Err(Error::InvalidParameter("depth d must be at least 1".into()));
    }
    let n = g1.n();
    let pos1 = seed_positions(seeds, n);
    let balls2 = seed_balls_g2(g2, seeds, d - 1);
    Ok(map_range(exec, n, |u| {
        let mut bfs = Bfs::new(n);
        let mut ball = Vec::new();
        let mut row = vec![0u32; n];
        dense_row(
            g1,
            u as u32,
            d - 1,
            &pos1,
            &balls2,
            &mut bfs,
            &mut ball,
            &mut row,
        );
        row
    }))
}

pub fn seeded_dense_align(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    d: usize,
) -> Result<AlignmentResult> {
    seeded_dense_align_with(g1, g2, seeds, d, Execution::default())
}

enum Argmax {
    Unique(u32),
    Tie { score: u32, count: usize },
    Empty,
}

pub fn seeded_dense_align_with(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    d: usize,
    exec: Execution,
) -> Result<AlignmentResult> {
    check_inputs(g1, g2, seeds)?;
    if d == 0 {
        return Err(Error::InvalidParameter("depth d must be at least 1".into()));
    }
    let n = g1.n();
    let (fwd, back) = seeds.lookup(n, n);
    let pos1 = seed_positions(seeds, n);
    let balls2 = seed_balls_g2(g2, seeds, d - 1);
    let unseeded1: Vec<u32> = (0..n as u32)
        .filter(|&u| fwd[u as usize].is_none())
        .collect();
    let unseeded2: Vec<u32> = (0..n as u32)
        .filter(|&v| back[v as usize].is_none())
        .collect();

    const BLOCK: usize = 32;
    let picks: Vec<Argmax> = map_range(exec, unseeded1.len().div_ceil(BLOCK), |b| {
        let mut bfs = Bfs::new(n);
        let mut ball = Vec::new();
        let mut row = vec![0u32; n];
        let rows = &unseeded1[b * BLOCK..((b + 1) * BLOCK).min(unseeded1.len())];
        rows.iter()
            .map(|&u| {
                dense_row(g1, u, d - 1, &pos1, &balls2, &mut bfs, &mut ball, &mut row);
                let mut best: Option<(u32, u32)> = None;
                let mut ties = 0usize;
                for &v in &unseeded2 {
                    let s = row[v as usize];
                    match best {
                        Some((bs, _)) if s < bs => {}
                        Some((bs, _)) if s == bs => ties += 1,
                        _ => {
                            best = Some((s, v));
                            ties = 1;
                        }
                    }
                }
                match best {
                    None => Argmax::Empty,
                    Some((_, v)) if ties == 1 => Argmax::Unique(v),
                    Some((score, _)) => Argmax::Tie { score, count: ties },
                }
            })
            .collect::<Vec<_>>()
    })
    .into_iter()
    .flatten()
    .collect();

    let mut assign = fwd;
    for (&u, pick) in unseeded1.iter().zip(picks) {
        match pick {
            Argmax::Unique(v) => assign[u as usize] = Some(v),
            Argmax::Tie { score, count } => {
                return Ok(AlignFailure::new(
                    FailureKind::NonUniqueMatch,
                    format!("user {}: {count} candidates tie at score {score}", u + 1),
                )
                .into())
            }
            Argmax::Empty => {
                return Ok(AlignFailure::new(
                    FailureKind::NotBijection,
                    format!("user {}: no unseeded vertex left to map to", u + 1),
                )
                .into())
            }
        }
    }
    Ok(finalize(&assign))
}

/// How the sparse routine searches the extra removed vertex `x` (and `y`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RemovalSearch {
    /// Every vertex other than the ball center, one BFS per candidate.
    #[default]
    Exhaustive,
    /// Only vertices inside the ball, plus one vertex outside it. Removing a
    /// vertex outside the ball leaves the ball unchanged, so the minimum is
    /// the same as [`RemovalSearch::Exhaustive`].
    BallOnly,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SparseParams {
    /// Ball radius `l`.
    pub radius: usize,
    /// Fraction `eta` of the seed count a neighbor pair must reach.
    pub eta: f64,
    /// User count of the model, used in the high-degree cutoff.
    pub n_model: usize,
    pub search: RemovalSearch,
}

/// `ln n / ln ln n - 1`: the number of robust neighbor pairs a high-degree
/// match needs.
pub fn high_degree_cutoff(n_model: usize) -> f64 {
    let ln = (n_model as f64).ln();
    ln / ln.ln() - 1.0
}

type Bits = Vec<u64>;

fn popcount_and(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}

/// Seed-membership bitsets of the balls around `center` (radius `radius`)
/// in `g` with `{excluded, x}` removed, over every admissible `x`.
/// Duplicates are dropped; the minimum over the family is unaffected.
#[allow(clippy::too_many_arguments)]
fn removal_family(
    g: &AttributedGraph,
    excluded: u32,
    center: u32,
    radius: usize,
    seed_pos: &[Option<u32>],
    words: usize,
    search: RemovalSearch,
    bfs: &mut Bfs,
    ball: &mut Vec<u32>,
) -> Vec<Bits> {
    let to_bits = |ball: &[u32]| {
        let mut bits = vec![0u64; words];
        for &v in ball {
            if let Some(s) = seed_pos[v as usize] {
                bits[s as usize / 64] |= 1 << (s % 64);
            }
        }
        bits
    };
    let mut family = Vec::new();
    match search {
        RemovalSearch::Exhaustive => {
            for x in 0..g.n() as u32 {
                if x == center {
                    continue;
                }
                bfs.ball(g, center, radius, |w| w == excluded || w == x, ball);
                family.push(to_bits(ball));
            }
        }
        RemovalSearch::BallOnly => {
            // x = excluded (or any vertex outside the ball) gives the base ball.
            bfs.ball(g, center, radius, |w| w == excluded, ball);
            let base: Vec<u32> = ball.clone();
            family.push(to_bits(&base));
            for &x in &base {
                if x == center {
                    continue;
                }
                bfs.ball(g, center, radius, |w| w == excluded || w == x, ball);
                family.push(to_bits(ball));
            }
        }
    }
    family.sort_unstable();
    family.dedup();
    family
}

fn min_over_families(a: &[Bits], b: &[Bits]) -> u32 {
    let mut best = u32::MAX;
    for x in a {
        for y in b {
            best = best.min(popcount_and(x, y));
            if best == 0 {
                return 0;
            }
        }
    }
    best
}

/// Families for every (center vertex, neighbor) pair of the unseeded
/// vertices: `out[u][k]` belongs to the `k`-th neighbor of `u`.
fn neighbor_families(
    g: &AttributedGraph,
    unseeded: &[u32],
    seed_pos: &[Option<u32>],
    words: usize,
    p: &SparseParams,
    exec: Execution,
) -> Vec<Vec<Vec<Bits>>> {
    let n = g.n();
    let per: Vec<Vec<Vec<Bits>>> = map_range(exec, unseeded.len(), |idx| {
        let u = unseeded[idx];
        let mut bfs = Bfs::new(n);
        let mut ball = Vec::new();
        g.user_adj(u as usize)
            .iter()
            .map(|&i| {
                removal_family(
                    g, u, i, p.radius, seed_pos, words, p.search, &mut bfs, &mut ball,
                )
            })
            .collect()
    });
    let mut out = vec![Vec::new(); n];
    for (&u, f) in unseeded.iter().zip(per) {
        out[u as usize] = f;
    }
    out
}

/// Phase-one statistics and the resulting high-degree match set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePhaseState {
    /// High-degree matches together with the seeds.
    pub matched: AnchorSet,
    /// `z[u][v]` for unseeded `u`, `v`; zero elsewhere.
    pub z: Vec<Vec<u32>>,
}

struct Prepared {
    n: usize,
    unseeded1: Vec<u32>,
    unseeded2: Vec<u32>,
    fam1: Vec<Vec<Vec<Bits>>>,
    fam2: Vec<Vec<Vec<Bits>>>,
}

fn prepare(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    p: &SparseParams,
    exec: Execution,
) -> Result<Prepared> {
    check_inputs(g1, g2, seeds)?;
    if p.radius == 0 {
        return Err(Error::InvalidParameter(
            "radius l must be at least 1".into(),
        ));
    }
    if p.eta.is_nan() || p.eta < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "eta = {} must be >= 0",
            p.eta
        )));
    }
    let n = g1.n();
    let (fwd, back) = seeds.lookup(n, n);
    let words = seeds.len().div_ceil(64);
    let mut pos2 = vec![None; n];
    for (s, &(_, j)) in seeds.pairs().iter().enumerate() {
        pos2[j.index()] = Some(s as u32);
    }
    let pos1 = seed_positions(seeds, n);
    let unseeded1: Vec<u32> = (0..n as u32)
        .filter(|&u| fwd[u as usize].is_none())
        .collect();
    let unseeded2: Vec<u32> = (0..n as u32)
        .filter(|&v| back[v as usize].is_none())
        .collect();
    let fam1 = neighbor_families(g1, &unseeded1, &pos1, words, p, exec);
    let fam2 = neighbor_families(g2, &unseeded2, &pos2, words, p, exec);
    Ok(Prepared {
        n,
        unseeded1,
        unseeded2,
        fam1,
        fam2,
    })
}

/// `lambda^{u,v}_{i,j}`: the smallest common-seed count between the
/// `l`-balls of `i` in `g1 - {u, x}` and of `j` in `g2 - {v, y}` over all
/// extra removals `x != i`, `y != j`.
///
/// `u`, `v` must be unseeded and `i`, `j` neighbors of them.
pub fn sparse_lambda(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    p: &SparseParams,
    (u, v): (UserId, UserId),
    (i, j): (UserId, UserId),
) -> Result<u32> {
    check_inputs(g1, g2, seeds)?;
    if !g1.has_user_edge(u.index(), i.index()) || !g2.has_user_edge(v.index(), j.index()) {
        return Err(Error::ContractViolation(format!(
            "({}, {}) is not a neighbor pair of ({}, {})",
            i.label(),
            j.label(),
            u.label(),
            v.label()
        )));
    }
    let n = g1.n();
    let words = seeds.len().div_ceil(64);
    let pos1 = seed_positions(seeds, n);
    let mut pos2 = vec![None; n];
    for (s, &(_, b)) in seeds.pairs().iter().enumerate() {
        pos2[b.index()] = Some(s as u32);
    }
    let mut bfs = Bfs::new(n);
    let mut ball = Vec::new();
    let a = removal_family(
        g1, u.0, i.0, p.radius, &pos1, words, p.search, &mut bfs, &mut ball,
    );
    let b = removal_family(
        g2, v.0, j.0, p.radius, &pos2, words, p.search, &mut bfs, &mut ball,
    );
    Ok(min_over_families(&a, &b))
}

fn z_rows(prep: &Prepared, seeds: &SeedSet, eta: f64, exec: Execution) -> Vec<Vec<u32>> {
    let bar = eta * seeds.len() as f64;
    let rows = map_range(exec, prep.unseeded1.len(), |idx| {
        let u = prep.unseeded1[idx] as usize;
        let mut row = vec![0u32; prep.n];
        for &v in &prep.unseeded2 {
            let mut z = 0u32;
            for fi in &prep.fam1[u] {
                for fj in &prep.fam2[v as usize] {
                    if f64::from(min_over_families(fi, fj)) >= bar {
                        z += 1;
                    }
                }
            }
            row[v as usize] = z;
        }
        row
    });
    let mut z = vec![vec![0u32; prep.n]; prep.n];
    for (&u, row) in prep.unseeded1.iter().zip(rows) {
        z[u as usize] = row;
    }
    z
}

/// The full `Z` matrix for unseeded pairs; seeded rows and columns are 0.
pub fn sparse_z_matrix(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    p: &SparseParams,
    exec: Execution,
) -> Result<Vec<Vec<u32>>> {
    let prep = prepare(g1, g2, seeds, p, exec)?;
    Ok(z_rows(&prep, seeds, p.eta, exec))
}

/// Phase one: builds `z` and the match set (seeds plus every unseeded pair
/// with `z >= high_degree_cutoff(n_model)`), failing on conflicts.
pub fn sparse_high_degree_phase(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    p: &SparseParams,
    exec: Execution,
) -> Result<std::result::Result<SparsePhaseState, AlignFailure>> {
    let prep = prepare(g1, g2, seeds, p, exec)?;
    let z = z_rows(&prep, seeds, p.eta, exec);
    let cutoff = high_degree_cutoff(p.n_model);
    let mut pairs: Vec<(UserId, UserId)> = seeds.pairs().to_vec();
    for &u in &prep.unseeded1 {
        for &v in &prep.unseeded2 {
            if f64::from(z[u as usize][v as usize]) >= cutoff {
                pairs.push((UserId(u), UserId(v)));
            }
        }
    }
    Ok(match AnchorSet::new(pairs) {
        Ok(matched) => Ok(SparsePhaseState { matched, z }),
        Err(c) => Err(AlignFailure::new(
            FailureKind::AnchorConflict,
            format!("high-degree matches (cutoff {cutoff:.4}): {c}"),
        )),
    })
}

pub fn seeded_sparse_align(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    p: &SparseParams,
) -> Result<AlignmentResult> {
    seeded_sparse_align_with(g1, g2, seeds, p, Execution::default())
}

pub fn seeded_sparse_align_with(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &SeedSet,
    p: &SparseParams,
    exec: Execution,
) -> Result<AlignmentResult> {
    let state = match sparse_high_degree_phase(g1, g2, seeds, p, exec)? {
        Ok(s) => s,
        Err(f) => return Ok(f.into()),
    };
    Ok(extend_low_degree(g1, g2, &state.matched))
}

/// Phase two: every vertex left unmatched that is adjacent to a matched
/// vertex whose partner is adjacent to exactly one unmatched vertex of the
/// other graph inherits that vertex. More than one candidate is reported as
/// a failure rather than resolved arbitrarily.
pub fn extend_low_degree(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    matched: &AnchorSet,
) -> AlignmentResult {
    let n = g1.n();
    let (fwd, back) = matched.lookup(n, n);
    let mut assign = fwd.clone();
    for i1 in 0..n {
        if fwd[i1].is_some() {
            continue;
        }
        let mut cands: Vec<u32> = Vec::new();
        for &j1 in g1.user_adj(i1) {
            if let Some(j2) = fwd[j1 as usize] {
                cands.extend(
                    g2.user_adj(j2 as usize)
                        .iter()
                        .copied()
                        .filter(|&i2| back[i2 as usize].is_none()),
                );
            }
        }
        cands.sort_unstable();
        cands.dedup();
        match cands.as_slice() {
            [] => {}
            [i2] => assign[i1] = Some(*i2),
            many => {
                return AlignFailure::new(
                    FailureKind::NotBijection,
                    format!(
                        "user {}: low-degree step implies {} different partners",
                        i1 + 1,
                        many.len()
                    ),
                )
                .into()
            }
        }
    }
    finalize(&assign)
}
