//! Attributed graph storage and neighborhood queries.
//!
//! Users and attributes are stored as dense zero-based indices. The external
//! label convention (users `1..=n`, attributes `n+1..=n+m`) is only applied at
//! the text-format boundary through [`UserId::label`] and [`AttrId::label`].

use std::fmt;

use crate::error::{Error, Result};

/// A user vertex, stored as a zero-based index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UserId(pub u32);

/// An attribute vertex, stored as a zero-based index into the attribute range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AttrId(pub u32);

impl UserId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// External label in `1..=n`.
    pub fn label(self) -> u64 {
        u64::from(self.0) + 1
    }

    pub fn from_label(label: u64, n: usize) -> Result<Self> {
        if label == 0 || label > n as u64 {
            return Err(Error::LabelOutOfRange {
                kind: "user",
                label,
                lo: 1,
                hi: n as u64,
            });
        }
        Ok(UserId((label - 1) as u32))
    }
}

impl AttrId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// External label in `n+1..=n+m`.
    pub fn label(self, n: usize) -> u64 {
        n as u64 + u64::from(self.0) + 1
    }

    pub fn from_label(label: u64, n: usize, m: usize) -> Result<Self> {
        let lo = n as u64 + 1;
        let hi = (n + m) as u64;
        if label < lo || label > hi {
            return Err(Error::LabelOutOfRange {
                kind: "attribute",
                label,
                lo,
                hi,
            });
        }
        Ok(AttrId((label - lo) as u32))
    }
}

impl fmt::Display for UserId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "user {}", self.label())
    }
}

/// Compressed sparse rows with sorted, deduplicated targets.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    fn from_rows(rows: usize, pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut lists = vec![Vec::new(); rows];
        for (r, t) in pairs {
            lists[r as usize].push(t);
        }
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            l.dedup();
            targets.extend_from_slice(&l);
            offsets.push(targets.len());
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, r: usize) -> &[u32] {
        &self.targets[self.offsets[r]..self.offsets[r + 1]]
    }
}

/// A graph on `n` users and `m` attributes with user-user and user-attribute
/// edges. Attribute-attribute edges cannot be represented.
///
/// The user-user relation is symmetric and irreflexive. Graphs are immutable
/// once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AttributedGraph {
    n: usize,
    m: usize,
    users: Csr,
    attrs: Csr,
}

impl AttributedGraph {
    /// Builds a graph from edge lists, validating every endpoint.
    ///
    /// Duplicate edges are merged; a user-user edge may be given in either
    /// orientation. Self-loops are rejected.
    pub fn from_edges(
        n: usize,
        m: usize,
        user_edges: impl IntoIterator<Item = (UserId, UserId)>,
        attr_edges: impl IntoIterator<Item = (UserId, AttrId)>,
    ) -> Result<Self> {
        check_size(n, m)?;
        let mut uu = Vec::new();
        for (a, b) in user_edges {
            check_user(a, n)?;
            check_user(b, n)?;
            if a == b {
                return Err(Error::ContractViolation(format!("self-loop at {a}")));
            }
            uu.push((a.0, b.0));
        }
        let mut ua = Vec::new();
        for (u, a) in attr_edges {
            check_user(u, n)?;
            if a.index() >= m {
                return Err(Error::LabelOutOfRange {
                    kind: "attribute",
                    label: a.label(n),
                    lo: n as u64 + 1,
                    hi: (n + m) as u64,
                });
            }
            ua.push((u.0, a.0));
        }
        Ok(Self::from_raw(n, m, &uu, &ua))
    }

    /// Builds from pre-validated zero-based index pairs.
    pub(crate) fn from_raw(n: usize, m: usize, uu: &[(u32, u32)], ua: &[(u32, u32)]) -> Self {
        debug_assert!(uu
            .iter()
            .all(|&(a, b)| a != b && (a as usize) < n && (b as usize) < n));
        debug_assert!(ua
            .iter()
            .all(|&(u, a)| (u as usize) < n && (a as usize) < m));
        let users = Csr::from_rows(n, uu.iter().flat_map(|&(a, b)| [(a, b), (b, a)]));
        let attrs = Csr::from_rows(n, ua.iter().copied());
        AttributedGraph { n, m, users, attrs }
    }

    pub fn empty(n: usize, m: usize) -> Self {
        Self::from_raw(n, m, &[], &[])
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    /// Sorted user-neighbor indices of user `i`.
    #[inline]
    pub fn user_adj(&self, i: usize) -> &[u32] {
        self.users.row(i)
    }

    /// Sorted attribute indices adjacent to user `i`.
    #[inline]
    pub fn attr_adj(&self, i: usize) -> &[u32] {
        self.attrs.row(i)
    }

    pub fn user_degree(&self, i: usize) -> usize {
        self.user_adj(i).len()
    }

    pub fn user_edge_count(&self) -> usize {
        self.users.targets.len() / 2
    }

    pub fn attr_edge_count(&self) -> usize {
        self.attrs.targets.len()
    }

    /// User-user edges with `i < j`, in lexicographic order.
    pub fn user_edges(&self) -> impl Iterator<Item = (UserId, UserId)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.user_adj(i)
                .iter()
                .filter(move |&&j| (j as usize) > i)
                .map(move |&j| (UserId(i as u32), UserId(j)))
        })
    }

    /// User-attribute edges in (user, attribute) lexicographic order.
    pub fn attr_edges(&self) -> impl Iterator<Item = (UserId, AttrId)> + '_ {
        (0..self.n).flat_map(move |i| {
            self.attr_adj(i)
                .iter()
                .map(move |&a| (UserId(i as u32), AttrId(a)))
        })
    }

    pub fn has_user_edge(&self, i: usize, j: usize) -> bool {
        self.user_adj(i).binary_search(&(j as u32)).is_ok()
    }

    /// The attributes adjacent to user `i`, in increasing order.
    pub fn attribute_neighbors(&self, i: UserId) -> Result<Vec<AttrId>> {
        check_user(i, self.n)?;
        Ok(self
            .attr_adj(i.index())
            .iter()
            .map(|&a| AttrId(a))
            .collect())
    }

    /// Users within `l` hops of `i` over user-user edges, after deleting the
    /// vertices in `removed`. The result contains `i` itself and is sorted.
    pub fn user_neighbors_within(
        &self,
        i: UserId,
        l: usize,
        removed: &[UserId],
    ) -> Result<Vec<UserId>> {
        check_user(i, self.n)?;
        for &r in removed {
            check_user(r, self.n)?;
        }
        if removed.contains(&i) {
            return Err(Error::ContractViolation(format!(
                "BFS source {i} is in the removed set"
            )));
        }
        let mut mask = vec![false; self.n];
        for &r in removed {
            mask[r.index()] = true;
        }
        let mut bfs = Bfs::new(self.n);
        let mut out = Vec::new();
        bfs.ball(self, i.0, l, |v| mask[v as usize], &mut out);
        out.sort_unstable();
        Ok(out.into_iter().map(UserId).collect())
    }

    /// Relabels users: user `i` of `self` becomes user `pi(i)` of the result.
    /// Attribute labels are untouched.
    pub fn apply_permutation(&self, pi: &Permutation) -> Result<Self> {
        if pi.len() != self.n {
            return Err(Error::ContractViolation(format!(
                "permutation on {} users applied to a graph with {} users",
                pi.len(),
                self.n
            )));
        }
        let map = pi.as_slice();
        let uu: Vec<(u32, u32)> = self
            .user_edges()
            .map(|(a, b)| (map[a.index()], map[b.index()]))
            .collect();
        let ua: Vec<(u32, u32)> = self
            .attr_edges()
            .map(|(u, a)| (map[u.index()], a.0))
            .collect();
        Ok(Self::from_raw(self.n, self.m, &uu, &ua))
    }

    /// The induced subgraph on the user vertices (all attributes dropped).
    pub fn users_only(&self) -> Self {
        AttributedGraph {
            n: self.n,
            m: 0,
            users: self.users.clone(),
            attrs: Csr::from_rows(self.n, std::iter::empty()),
        }
    }

    /// Reinterprets attributes as extra users `n..n+m`, each user-attribute
    /// edge becoming a user-user edge. The result has no attributes and no
    /// edges among the former attribute vertices.
    pub fn attributes_as_users(&self) -> Self {
        let n = self.n as u32;
        let uu: Vec<(u32, u32)> = self
            .user_edges()
            .map(|(a, b)| (a.0, b.0))
            .chain(self.attr_edges().map(|(u, a)| (u.0, n + a.0)))
            .collect();
        Self::from_raw(self.n + self.m, 0, &uu, &[])
    }

    /// Users adjacent to each attribute; the transpose of the attribute
    /// adjacency.
    pub fn attribute_members(&self) -> Vec<Vec<u32>> {
        let mut members = vec![Vec::new(); self.m];
        for i in 0..self.n {
            for &a in self.attr_adj(i) {
                members[a as usize].push(i as u32);
            }
        }
        members
    }
}

fn check_size(n: usize, m: usize) -> Result<()> {
    if n.checked_add(m).is_none_or(|t| t > u32::MAX as usize) {
        return Err(Error::InvalidParameter(format!(
            "graph with {n} users and {m} attributes exceeds the 32-bit label space"
        )));
    }
    Ok(())
}

pub(crate) fn check_user(i: UserId, n: usize) -> Result<()> {
    if i.index() >= n {
        return Err(Error::LabelOutOfRange {
            kind: "user",
            label: i.label(),
            lo: 1,
            hi: n as u64,
        });
    }
    Ok(())
}

/// Reusable breadth-first search state. Visits are tracked by generation
/// stamps so consecutive searches do not clear the whole array.
#[derive(Debug, Clone)]
pub(crate) struct Bfs {
    stamp: Vec<u32>,
    depth: Vec<u32>,
    generation: u32,
    queue: Vec<u32>,
}

impl Bfs {
    pub(crate) fn new(n: usize) -> Self {
        Bfs {
            stamp: vec![0; n],
            depth: vec![0; n],
            generation: 0,
            queue: Vec::new(),
        }
    }

    /// Writes every vertex within `l` hops of `src` into `out` (unsorted,
    /// `src` first), skipping vertices for which `removed` is true.
    pub(crate) fn ball(
        &mut self,
        g: &AttributedGraph,
        src: u32,
        l: usize,
        removed: impl Fn(u32) -> bool,
        out: &mut Vec<u32>,
    ) {
        self.generation = self.generation.wrapping_add(1);
        if self.generation == 0 {
            self.stamp.fill(0);
            self.generation = 1;
        }
        let gen = self.generation;
        out.clear();
        self.queue.clear();
        self.stamp[src as usize] = gen;
        self.depth[src as usize] = 0;
        self.queue.push(src);
        out.push(src);
        let mut head = 0;
        while head < self.queue.len() {
            let v = self.queue[head];
            head += 1;
            let dv = self.depth[v as usize];
            if dv as usize >= l {
                continue;
            }
            for &w in g.user_adj(v as usize) {
                if self.stamp[w as usize] == gen || removed(w) {
                    continue;
                }
                self.stamp[w as usize] = gen;
                self.depth[w as usize] = dv + 1;
                self.queue.push(w);
                out.push(w);
            }
        }
    }
}

/// A bijection on the user indices `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<u32>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n as u32).collect(),
        }
    }

    /// Validates that `map` is a bijection on `0..map.len()`.
    pub fn from_vec(map: Vec<u32>) -> Result<Self> {
        let mut seen = vec![false; map.len()];
        for (i, &v) in map.iter().enumerate() {
            let slot = seen.get_mut(v as usize).ok_or_else(|| {
                Error::ContractViolation(format!(
                    "image {} of index {i} outside 0..{}",
                    v,
                    map.len()
                ))
            })?;
            if *slot {
                return Err(Error::ContractViolation(format!(
                    "index {v} hit twice; not a bijection"
                )));
            }
            *slot = true;
        }
        Ok(Permutation { map })
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: UserId) -> UserId {
        UserId(self.map[i.index()])
    }

    pub fn as_slice(&self) -> &[u32] {
        &self.map
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u32; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v as usize] = i as u32;
        }
        Permutation { map: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().enumerate().all(|(i, &v)| i as u32 == v)
    }

    /// Extends to `0..n+extra` by fixing the appended indices.
    pub fn extend_identity(&self, extra: usize) -> Self {
        let n = self.map.len() as u32;
        let mut map = self.map.clone();
        map.extend(n..n + extra as u32);
        Permutation { map }
    }
}
