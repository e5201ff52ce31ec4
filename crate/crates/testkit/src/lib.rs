//! Brute-force reference implementations for tests.
//!
//! Everything here reads graphs only through their edge iterators and
//! rebuilds dense adjacency matrices, so none of the library's kernels
//! (sorted merges, inverted indexes, CSR BFS, seed bitsets) are reused.
//! Costs are cubic or worse; keep inputs tiny.

use std::collections::VecDeque;

use attralign::AttributedGraph;

/// `adj[i][j]` for user-user edges.
pub fn user_matrix(g: &AttributedGraph) -> Vec<Vec<bool>> {
    let n = g.n();
    let mut adj = vec![vec![false; n]; n];
    for (a, b) in g.user_edges() {
        adj[a.index()][b.index()] = true;
        adj[b.index()][a.index()] = true;
    }
    adj
}

/// `has[i][a]` for user-attribute edges.
pub fn attr_matrix(g: &AttributedGraph) -> Vec<Vec<bool>> {
    let mut has = vec![vec![false; g.m()]; g.n()];
    for (u, a) in g.attr_edges() {
        has[u.index()][a.index()] = true;
    }
    has
}

/// `C[i][j]`: attributes held by user `i` in `g1` and user `j` in `g2`,
/// found by testing every attribute against both users.
pub fn oracle_common_count(g1: &AttributedGraph, g2: &AttributedGraph) -> Vec<Vec<usize>> {
    assert_eq!((g1.n(), g1.m()), (g2.n(), g2.m()), "shape mismatch");
    let (h1, h2) = (attr_matrix(g1), attr_matrix(g2));
    (0..g1.n())
        .map(|i| {
            (0..g2.n())
                .map(|j| (0..g1.m()).filter(|&a| h1[i][a] && h2[j][a]).count())
                .collect()
        })
        .collect()
}

/// All-pairs hop distances; `None` is infinity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    pub d: Vec<Vec<Option<u32>>>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn get(&self, i: usize, j: usize) -> Option<u32> {
        self.d[i][j]
    }

    /// `{j : d(i, j) <= l}`, ascending.
    pub fn within(&self, i: usize, l: u32) -> Vec<u32> {
        (0..self.n())
            .filter(|&j| matches!(self.d[i][j], Some(x) if x <= l))
            .map(|j| j as u32)
            .collect()
    }

    /// Zero diagonal, symmetry and the triangle inequality.
    pub fn check_metric(&self) -> Result<(), String> {
        let n = self.n();
        for i in 0..n {
            if self.d[i][i] != Some(0) {
                return Err(format!("d({i},{i}) = {:?}", self.d[i][i]));
            }
            for j in 0..n {
                if self.d[i][j] != self.d[j][i] {
                    return Err(format!("asymmetric at ({i},{j})"));
                }
                for k in 0..n {
                    if let (Some(a), Some(b)) = (self.d[i][k], self.d[k][j]) {
                        match self.d[i][j] {
                            Some(c) if c <= a + b => {}
                            other => {
                                return Err(format!("d({i},{j}) = {other:?} > {a} + {b} via {k}"))
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Floyd-Warshall over the user-user edges.
pub fn oracle_distances(g: &AttributedGraph) -> DistanceMatrix {
    let n = g.n();
    let adj = user_matrix(g);
    let mut d: Vec<Vec<Option<u32>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| match () {
                    _ if i == j => Some(0),
                    _ if adj[i][j] => Some(1),
                    _ => None,
                })
                .collect()
        })
        .collect();
    for k in 0..n {
        for i in 0..n {
            let Some(ik) = d[i][k] else { continue };
            let via_k = d[k].clone();
            for (j, kj) in via_k.into_iter().enumerate() {
                if let Some(kj) = kj {
                    if d[i][j].is_none_or(|ij| ik + kj < ij) {
                        d[i][j] = Some(ik + kj);
                    }
                }
            }
        }
    }
    DistanceMatrix { d }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorVerdict {
    /// Qualifying pairs, sorted.
    Anchors(Vec<(u32, u32)>),
    /// Two qualifying pairs share a coordinate.
    Conflict,
}

/// Every pair with `C > threshold`, or a conflict if two of them share a
/// user on either side.
pub fn oracle_exhaustive_anchor_check(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    threshold: f64,
) -> AnchorVerdict {
    let c = oracle_common_count(g1, g2);
    let mut pairs = Vec::new();
    for (i, row) in c.iter().enumerate() {
        for (j, &cij) in row.iter().enumerate() {
            if cij as f64 > threshold {
                pairs.push((i as u32, j as u32));
            }
        }
    }
    for (a, p) in pairs.iter().enumerate() {
        for q in &pairs[a + 1..] {
            if p.0 == q.0 || p.1 == q.1 {
                return AnchorVerdict::Conflict;
            }
        }
    }
    AnchorVerdict::Anchors(pairs)
}

/// Outcome of a naive aligner: the estimate as `pi[i]`, or the failure kind
/// name (`AnchorConflict`, `NonUniqueMatch`, `NotBijection`).
pub type NaiveOutcome = Result<Vec<u32>, &'static str>;

fn naive_finalize(assign: &[Option<u32>]) -> NaiveOutcome {
    let n = assign.len();
    let mut hit = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for a in assign {
        match a {
            Some(j) if !hit[*j as usize] => {
                hit[*j as usize] = true;
                out.push(*j);
            }
            _ => return Err("NotBijection"),
        }
    }
    Ok(out)
}

/// Two-step attribute-rich alignment straight from the definitions:
/// anchors with `C > x`, then each unanchored `i` takes the unique
/// unanchored `j` with `W(i, j) > y * |anchors|`.
pub fn naive_attr_rich(g1: &AttributedGraph, g2: &AttributedGraph, x: f64, y: f64) -> NaiveOutcome {
    let anchors = match oracle_exhaustive_anchor_check(g1, g2, x) {
        AnchorVerdict::Anchors(a) => a,
        AnchorVerdict::Conflict => return Err("AnchorConflict"),
    };
    let n = g1.n();
    let (a1, a2) = (user_matrix(g1), user_matrix(g2));
    let mut assign: Vec<Option<u32>> = vec![None; n];
    for &(i, j) in &anchors {
        assign[i as usize] = Some(j);
    }
    let taken2: Vec<bool> = (0..n as u32)
        .map(|j| anchors.iter().any(|p| p.1 == j))
        .collect();
    let bar = y * anchors.len() as f64;
    for i in 0..n {
        if assign[i].is_some() {
            continue;
        }
        let cands: Vec<u32> = (0..n)
            .filter(|&j| !taken2[j])
            .filter(|&j| {
                let w = anchors
                    .iter()
                    .filter(|&&(k, l)| a1[i][k as usize] && a2[j][l as usize])
                    .count();
                w as f64 > bar
            })
            .map(|j| j as u32)
            .collect();
        match cands.as_slice() {
            [j] => assign[i] = Some(*j),
            _ => return Err("NonUniqueMatch"),
        }
    }
    naive_finalize(&assign)
}

/// `lambda(u, v)` for every pair: seeds `(a, b)` with `d1(u, a) <= d-1` and
/// `d2(v, b) <= d-1`.
pub fn naive_dense_scores(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &[(u32, u32)],
    d: u32,
) -> Vec<Vec<u32>> {
    let (d1, d2) = (oracle_distances(g1), oracle_distances(g2));
    let n = g1.n();
    let close = |dm: &DistanceMatrix, a: usize, b: usize| matches!(dm.get(a, b), Some(x) if x < d);
    (0..n)
        .map(|u| {
            (0..n)
                .map(|v| {
                    seeds
                        .iter()
                        .filter(|&&(a, b)| close(&d1, u, a as usize) && close(&d2, v, b as usize))
                        .count() as u32
                })
                .collect()
        })
        .collect()
}

/// Seeded argmax alignment; ties fail.
pub fn naive_dense_align(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &[(u32, u32)],
    d: u32,
) -> NaiveOutcome {
    let n = g1.n();
    let lam = naive_dense_scores(g1, g2, seeds, d);
    let mut assign: Vec<Option<u32>> = vec![None; n];
    for &(a, b) in seeds {
        assign[a as usize] = Some(b);
    }
    let free2: Vec<usize> = (0..n)
        .filter(|&v| !seeds.iter().any(|s| s.1 as usize == v))
        .collect();
    for u in 0..n {
        if assign[u].is_some() {
            continue;
        }
        let Some(best) = free2.iter().map(|&v| lam[u][v]).max() else {
            return Err("NotBijection");
        };
        let winners: Vec<usize> = free2
            .iter()
            .copied()
            .filter(|&v| lam[u][v] == best)
            .collect();
        if winners.len() != 1 {
            return Err("NonUniqueMatch");
        }
        assign[u] = Some(winners[0] as u32);
    }
    naive_finalize(&assign)
}

/// Vertices within `l` hops of `src` once `removed` is deleted, by plain
/// queue BFS over the adjacency matrix.
pub fn naive_ball(adj: &[Vec<bool>], src: usize, l: u32, removed: &[usize]) -> Vec<bool> {
    let n = adj.len();
    let mut dist = vec![u32::MAX; n];
    let mut inside = vec![false; n];
    if removed.contains(&src) {
        return inside;
    }
    dist[src] = 0;
    let mut queue = VecDeque::from([src]);
    while let Some(a) = queue.pop_front() {
        inside[a] = true;
        if dist[a] == l {
            continue;
        }
        for b in 0..n {
            if adj[a][b] && dist[b] == u32::MAX && !removed.contains(&b) {
                dist[b] = dist[a] + 1;
                queue.push_back(b);
            }
        }
    }
    inside
}

/// `lambda^{u,v}_{i,j}` by trying every removal pair `(x, y)` with
/// `x != i`, `y != j` and counting seeds inside both balls.
pub fn brute_sparse_lambda(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &[(u32, u32)],
    l: u32,
    (u, v): (usize, usize),
    (i, j): (usize, usize),
) -> u32 {
    let (a1, a2) = (user_matrix(g1), user_matrix(g2));
    brute_lambda_with(&a1, &a2, seeds, l, (u, v), (i, j))
}

fn brute_lambda_with(
    a1: &[Vec<bool>],
    a2: &[Vec<bool>],
    seeds: &[(u32, u32)],
    l: u32,
    (u, v): (usize, usize),
    (i, j): (usize, usize),
) -> u32 {
    let n = a1.len();
    let mut best = u32::MAX;
    for x in (0..n).filter(|&x| x != i) {
        let b1 = naive_ball(a1, i, l, &[u, x]);
        for y in (0..n).filter(|&y| y != j) {
            let b2 = naive_ball(a2, j, l, &[v, y]);
            let count = seeds
                .iter()
                .filter(|&&(s1, s2)| b1[s1 as usize] && b2[s2 as usize])
                .count() as u32;
            best = best.min(count);
        }
    }
    best
}

/// `Z(u, v)` for unseeded pairs (zero elsewhere): neighbor pairs `(i, j)`
/// with `lambda^{u,v}_{i,j} >= eta * |seeds|`.
pub fn brute_sparse_z(
    g1: &AttributedGraph,
    g2: &AttributedGraph,
    seeds: &[(u32, u32)],
    l: u32,
    eta: f64,
) -> Vec<Vec<u32>> {
    let n = g1.n();
    let (a1, a2) = (user_matrix(g1), user_matrix(g2));
    let bar = eta * seeds.len() as f64;
    let mut z = vec![vec![0u32; n]; n];
    for u in (0..n).filter(|&u| !seeds.iter().any(|s| s.0 as usize == u)) {
        for v in (0..n).filter(|&v| !seeds.iter().any(|s| s.1 as usize == v)) {
            let mut count = 0;
            for i in (0..n).filter(|&i| a1[u][i]) {
                for j in (0..n).filter(|&j| a2[v][j]) {
                    if f64::from(brute_lambda_with(&a1, &a2, seeds, l, (u, v), (i, j))) >= bar {
                        count += 1;
                    }
                }
            }
            z[u][v] = count;
        }
    }
    z
}

/// The high-degree match set: seeds plus unseeded pairs with
/// `Z >= cutoff`, sorted; `None` on a shared coordinate.
pub fn brute_sparse_matches(
    z: &[Vec<u32>],
    seeds: &[(u32, u32)],
    cutoff: f64,
) -> Option<Vec<(u32, u32)>> {
    let n = z.len();
    let mut pairs: Vec<(u32, u32)> = seeds.to_vec();
    for u in (0..n).filter(|&u| !seeds.iter().any(|s| s.0 as usize == u)) {
        for v in (0..n).filter(|&v| !seeds.iter().any(|s| s.1 as usize == v)) {
            if f64::from(z[u][v]) >= cutoff {
                pairs.push((u as u32, v as u32));
            }
        }
    }
    pairs.sort_unstable();
    for (a, p) in pairs.iter().enumerate() {
        if pairs[a + 1..].iter().any(|q| q.0 == p.0 || q.1 == p.1) {
            return None;
        }
    }
    Some(pairs)
}
