//! Finite-n reading of the feasibility conditions of both algorithms.
//!
//! Asymptotic conditions are replaced by fixed surrogates at the given `n`:
//!
//! | condition                    | surrogate                      |
//! |------------------------------|--------------------------------|
//! | `m q s_a^2 = Omega(log n)`   | `m q s_a^2 >= ln n`            |
//! | `m q s_a^2 = o(log n)`       | `m q s_a^2 < ln n`             |
//! | `n p s_u^2 - log n = omega(1)` | `n p s_u^2 - ln n >= 3`      |
//!
//! The remaining inequalities are evaluated as written.

use crate::align::attr_sparse::b_cap;
use crate::error::{Error, Result};
use crate::model::ModelParams;

/// Margin standing in for `omega(1)`.
pub const OMEGA_ONE_MARGIN: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionClass {
    /// `m q s_a^2 >= ln n` (surrogate).
    pub attr_rich: bool,
    /// `m q s_a^2 + n p s_u^2 >= (1 + epsilon) ln n`.
    pub combined_signal: bool,
    /// `m q s_a^2 < ln n` (surrogate).
    pub attr_sparse: bool,
    /// `n p s_u^2 - ln n >= 3` (surrogate).
    pub user_signal: bool,
    /// `n p <= s_u / (16 (2 - s_u)^2) n`.
    pub density_cap: bool,
    /// `m q s_a^2 >= 2 ln n / (tau ln(1/q))`.
    pub attr_floor: bool,
    pub thm1_feasible: bool,
    pub thm2_feasible: bool,
    /// `n p s_u^2 / ln n`.
    pub coord_x: f64,
    /// `m q s_a^2 / ln n`.
    pub coord_y: f64,
}

pub fn classify_region(params: &ModelParams, epsilon: f64, tau: f64) -> Result<RegionClass> {
    params.validate()?;
    if params.n < 2 {
        return Err(Error::InvalidParameter(
            "region classification needs n >= 2 (ln n > 0)".into(),
        ));
    }
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "epsilon = {epsilon} must be positive"
        )));
    }
    if tau.is_nan() || tau <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tau = {tau} must be positive"
        )));
    }
    let ln_n = (params.n as f64).ln();
    let attr = params.attr_signal();
    let user = params.user_signal();
    let n = params.n as f64;

    let attr_rich = attr >= ln_n;
    let combined_signal = attr + user >= (1.0 + epsilon) * ln_n;
    let attr_sparse = attr < ln_n;
    let user_signal = user - ln_n >= OMEGA_ONE_MARGIN;
    let density_cap = n * params.p <= b_cap(params.s_u) * n;
    // q = 0 sends ln(1/q) to infinity and the floor to zero.
    let attr_floor = attr >= 2.0 * ln_n / (tau * (1.0 / params.q).ln());

    Ok(RegionClass {
        attr_rich,
        combined_signal,
        attr_sparse,
        user_signal,
        density_cap,
        attr_floor,
        thm1_feasible: attr_rich && combined_signal,
        thm2_feasible: attr_sparse && user_signal && density_cap && attr_floor,
        coord_x: user / ln_n,
        coord_y: attr / ln_n,
    })
}
