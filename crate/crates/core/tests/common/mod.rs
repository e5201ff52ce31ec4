#![allow(dead_code)]

use attralign::model::{generate_pair, trial_rng};
use attralign::{GraphPairInstance, ModelParams};
use proptest::prelude::*;

pub fn params(n: usize, m: usize, p: f64, q: f64, s_u: f64, s_a: f64) -> ModelParams {
    ModelParams {
        n,
        m,
        p,
        q,
        s_u,
        s_a,
    }
}

pub fn instance(p: &ModelParams, seed: u64) -> GraphPairInstance {
    generate_pair(p, &mut trial_rng(seed)).expect("valid parameters")
}

/// Small correlated pairs with `n, m <= 32`.
pub fn tiny_pair() -> impl Strategy<Value = (ModelParams, u64)> {
    (
        1usize..=32,
        0usize..=32,
        0.0f64..0.6,
        0.0f64..0.6,
        0.3f64..=1.0,
        0.3f64..=1.0,
        any::<u64>(),
    )
        .prop_map(|(n, m, p, q, su, sa, seed)| (params(n, m, p, q, su, sa), seed))
}
