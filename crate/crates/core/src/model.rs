//! Sampling from the attributed Erdős–Rényi pair model.
//!
//! A base graph on `n` users and `m` attributes draws each user-user edge
//! with probability `p` and each user-attribute edge with probability `q`.
//! Two copies keep each base edge independently (user-user edges with
//! probability `s_u`, user-attribute edges with `s_a`). The second copy then
//! has its users relabeled by a uniformly random permutation.
//!
//! # Randomness
//!
//! Trials are driven by [`ChaCha8Rng`]. A trial's stream is keyed by
//! [`trial_seed`]: the master seed XOR `(cell << 32) | trial`. Within one
//! trial, draws happen in a fixed order: base user edges, base attribute
//! edges, the first copy, the second copy, then the permutation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, Permutation};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: usize,
    pub m: usize,
    pub p: f64,
    pub q: f64,
    pub s_u: f64,
    pub s_a: f64,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        for (name, v) in [
            ("p", self.p),
            ("q", self.q),
            ("s_u", self.s_u),
            ("s_a", self.s_a),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} is not a probability"
                )));
            }
        }
        Ok(())
    }

    /// Expected number of common attributes of a true pair, `m q s_a^2`.
    pub fn attr_signal(&self) -> f64 {
        self.m as f64 * self.q * self.s_a * self.s_a
    }

    /// Expected number of common user neighbors of a true pair, `n p s_u^2`.
    pub fn user_signal(&self) -> f64 {
        self.n as f64 * self.p * self.s_u * self.s_u
    }
}

/// An observable pair plus the permutation that relabeled the second graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPairInstance {
    pub g1: AttributedGraph,
    pub g2_anon: AttributedGraph,
    /// User `i` of `g1` is user `ground_truth(i)` of `g2_anon`.
    pub ground_truth: Permutation,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct GenerateOptions {
    /// Skip the random relabeling and use the identity permutation.
    pub identity_permutation: bool,
}

/// Calls `emit` for each index in `0..total` selected independently with
/// probability `p`, using geometric skips so the cost is proportional to
/// the number of selected indices.
fn bernoulli_indices<R: Rng + ?Sized>(total: u64, p: f64, rng: &mut R, mut emit: impl FnMut(u64)) {
    if total == 0 || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        (0..total).for_each(emit);
        return;
    }
    let skips = Geometric::new(p).expect("p checked to lie in (0,1)");
    let mut next: u64 = 0;
    loop {
        let gap = skips.sample(rng);
        next = match next.checked_add(gap) {
            Some(k) if k < total => k,
            _ => break,
        };
        emit(next);
        next += 1;
    }
}

pub fn sample_base_graph<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<AttributedGraph> {
    params.validate()?;
    let n = params.n;
    let m = params.m;

    let pairs = (n as u64) * (n as u64 - 1) / 2;
    let mut uu = Vec::new();
    // Walk the upper triangle row by row as the selected index increases.
    let mut row: u64 = 0;
    let mut row_start: u64 = 0;
    bernoulli_indices(pairs, params.p, rng, |k| {
        while k >= row_start + (n as u64 - 1 - row) {
            row_start += n as u64 - 1 - row;
            row += 1;
        }
        let col = row + 1 + (k - row_start);
        uu.push((row as u32, col as u32));
    });

    let mut ua = Vec::new();
    if m > 0 {
        bernoulli_indices(n as u64 * m as u64, params.q, rng, |k| {
            ua.push(((k / m as u64) as u32, (k % m as u64) as u32));
        });
    }
    Ok(AttributedGraph::from_raw(n, m, &uu, &ua))
}

/// Keeps each user-user edge with probability `s_u` and each user-attribute
/// edge with probability `s_a`, independently.
pub fn subsample<R: Rng + ?Sized>(
    g: &AttributedGraph,
    s_u: f64,
    s_a: f64,
    rng: &mut R,
) -> Result<AttributedGraph> {
    for (name, v) in [("s_u", s_u), ("s_a", s_a)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} is not a probability"
            )));
        }
    }
    let uu: Vec<(u32, u32)> = g
        .user_edges()
        .filter(|_| rng.random_bool(s_u))
        .map(|(a, b)| (a.0, b.0))
        .collect();
    let ua: Vec<(u32, u32)> = g
        .attr_edges()
        .filter(|_| rng.random_bool(s_a))
        .map(|(u, a)| (u.0, a.0))
        .collect();
    Ok(AttributedGraph::from_raw(g.n(), g.m(), &uu, &ua))
}

/// Uniform permutation of `0..n` by Fisher–Yates.
pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut map: Vec<u32> = (0..n as u32).collect();
    map.shuffle(rng);
    Permutation::from_vec(map).expect("a shuffle of 0..n is a bijection")
}

pub fn generate_pair<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
) -> Result<GraphPairInstance> {
    generate_pair_with(params, rng, GenerateOptions::default())
}

pub fn generate_pair_with<R: Rng + ?Sized>(
    params: &ModelParams,
    rng: &mut R,
    opts: GenerateOptions,
) -> Result<GraphPairInstance> {
    let base = sample_base_graph(params, rng)?;
    let g1 = subsample(&base, params.s_u, params.s_a, rng)?;
    let g2 = subsample(&base, params.s_u, params.s_a, rng)?;
    let ground_truth = if opts.identity_permutation {
        Permutation::identity(params.n)
    } else {
        random_permutation(params.n, rng)
    };
    let g2_anon = g2.apply_permutation(&ground_truth)?;
    Ok(GraphPairInstance {
        g1,
        g2_anon,
        ground_truth,
    })
}

/// Parameters of the attributed model that stand in for a seeded pair on
/// `total` vertices with seed fraction `alpha`: `m = floor(total * alpha)`
/// attributes play the seeds, `n = total - m` users remain, `q = p` and
/// `s_a = s_u = s`.
pub fn seeded_params(total: usize, alpha: f64, p: f64, s: f64) -> Result<ModelParams> {
    if total == 0 {
        return Err(Error::InvalidParameter(
            "vertex count must be at least 1".into(),
        ));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!(
            "seed fraction {alpha} outside [0, 1)"
        )));
    }
    let m = (total as f64 * alpha).floor() as usize;
    let params = ModelParams {
        n: total - m,
        m,
        p,
        q: p,
        s_u: s,
        s_a: s,
    };
    params.validate()?;
    Ok(params)
}

/// Per-trial stream key derived from the master seed.
pub fn trial_seed(master: u64, cell: u32, trial: u32) -> u64 {
    master ^ ((u64::from(cell) << 32) | u64::from(trial))
}

pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
