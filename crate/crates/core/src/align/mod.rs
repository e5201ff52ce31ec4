//! Alignment algorithms and the types they share.

pub mod attr_rich;
pub mod attr_sparse;
pub mod counting;
pub mod seeded;

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, Permutation, UserId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureKind {
    AnchorConflict,
    NonUniqueMatch,
    NotBijection,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::AnchorConflict => "AnchorConflict",
            FailureKind::NonUniqueMatch => "NonUniqueMatch",
            FailureKind::NotBijection => "NotBijection",
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A declared failure of an alignment algorithm. This is an outcome, not an
/// error: the algorithm ran to completion and refused to commit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignFailure {
    pub kind: FailureKind,
    pub context: String,
}

impl AlignFailure {
    pub fn new(kind: FailureKind, context: impl Into<String>) -> Self {
        AlignFailure {
            kind,
            context: context.into(),
        }
    }
}

impl fmt::Display for AlignFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind, self.context)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AlignmentResult {
    Success(Permutation),
    Failure(AlignFailure),
}

impl AlignmentResult {
    pub fn is_success(&self) -> bool {
        matches!(self, AlignmentResult::Success(_))
    }

    pub fn permutation(&self) -> Option<&Permutation> {
        match self {
            AlignmentResult::Success(p) => Some(p),
            AlignmentResult::Failure(_) => None,
        }
    }

    pub fn failure(&self) -> Option<&AlignFailure> {
        match self {
            AlignmentResult::Success(_) => None,
            AlignmentResult::Failure(f) => Some(f),
        }
    }
}

impl From<AlignFailure> for AlignmentResult {
    fn from(f: AlignFailure) -> Self {
        AlignmentResult::Failure(f)
    }
}

/// A conflict-free set of cross-graph user pairs: no two pairs share a
/// first coordinate and no two share a second coordinate.
///
/// Used for anchors, seed sets and the high-degree match set of the sparse
/// seeded routine.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AnchorSet {
    pairs: Vec<(UserId, UserId)>,
}

/// Two distinct pairs sharing a coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairConflict {
    pub first: (UserId, UserId),
    pub second: (UserId, UserId),
}

impl fmt::Display for PairConflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "pairs ({}, {}) and ({}, {}) share a coordinate",
            self.first.0.label(),
            self.first.1.label(),
            self.second.0.label(),
            self.second.1.label()
        )
    }
}

impl AnchorSet {
    pub fn new(
        pairs: impl IntoIterator<Item = (UserId, UserId)>,
    ) -> std::result::Result<Self, PairConflict> {
        let mut pairs: Vec<_> = pairs.into_iter().collect();
        pairs.sort_unstable();
        pairs.dedup();
        for w in pairs.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(PairConflict {
                    first: w[0],
                    second: w[1],
                });
            }
        }
        let mut by_second = pairs.clone();
        by_second.sort_unstable_by_key(|&(a, b)| (b, a));
        for w in by_second.windows(2) {
            if w[0].1 == w[1].1 {
                return Err(PairConflict {
                    first: w[0],
                    second: w[1],
                });
            }
        }
        Ok(AnchorSet { pairs })
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs sorted by first coordinate.
    pub fn pairs(&self) -> &[(UserId, UserId)] {
        &self.pairs
    }

    pub fn contains(&self, pair: (UserId, UserId)) -> bool {
        self.pairs.binary_search(&pair).is_ok()
    }

    /// Checks every pair against graphs with `n1` and `n2` users.
    pub(crate) fn check_bounds(&self, n1: usize, n2: usize) -> Result<()> {
        for &(a, b) in &self.pairs {
            if a.index() >= n1 || b.index() >= n2 {
                return Err(Error::ContractViolation(format!(
                    "pair ({}, {}) outside graphs with {n1} and {n2} users",
                    a.label(),
                    b.label()
                )));
            }
        }
        Ok(())
    }

    /// Forward and backward lookup tables.
    pub(crate) fn lookup(&self, n1: usize, n2: usize) -> (Vec<Option<u32>>, Vec<Option<u32>>) {
        let mut fwd = vec![None; n1];
        let mut back = vec![None; n2];
        for &(a, b) in &self.pairs {
            fwd[a.index()] = Some(b.0);
            back[b.index()] = Some(a.0);
        }
        (fwd, back)
    }
}

pub(crate) fn check_same_shape(g1: &AttributedGraph, g2: &AttributedGraph) -> Result<()> {
    if g1.n() != g2.n() || g1.m() != g2.m() {
        return Err(Error::ContractViolation(format!(
            "graphs differ in shape: ({}, {}) vs ({}, {})",
            g1.n(),
            g1.m(),
            g2.n(),
            g2.m()
        )));
    }
    Ok(())
}

/// Turns a partial assignment into a permutation, or reports why it is not
/// a bijection.
pub(crate) fn finalize(assign: &[Option<u32>]) -> AlignmentResult {
    let n = assign.len();
    let mut owner: Vec<Option<u32>> = vec![None; n];
    for (i, a) in assign.iter().enumerate() {
        let Some(j) = *a else {
            return AlignFailure::new(
                FailureKind::NotBijection,
                format!("user {} left unassigned", i + 1),
            )
            .into();
        };
        if let Some(prev) = owner[j as usize] {
            return AlignFailure::new(
                FailureKind::NotBijection,
                format!("users {} and {} both mapped to {}", prev + 1, i + 1, j + 1),
            )
            .into();
        }
        owner[j as usize] = Some(i as u32);
    }
    let map = assign.iter().map(|a| a.expect("checked above")).collect();
    AlignmentResult::Success(Permutation::from_vec(map).expect("injective on 0..n"))
}
