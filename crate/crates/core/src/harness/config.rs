//! Sweep configuration files.
//!
//! Flat `key = value` lines; `#` starts a comment. Grid keys take
//! comma-separated lists and the sweep runs their Cartesian product.
//!
//! | key              | kind        | required | notes                                 |
//! |------------------|-------------|----------|---------------------------------------|
//! | `n`, `m`         | int list    | yes      | users, attributes                     |
//! | `p`, `q`         | float list  | yes      | edge probabilities                    |
//! | `s_u`, `s_a`     | float list  | yes      | subsampling probabilities             |
//! | `algo`           | list        | no       | `attr_rich` (default), `attr_sparse`  |
//! | `trials`         | int         | yes      | trials per cell, at least 1           |
//! | `epsilon`, `tau` | float       | yes      | classifier / threshold constants      |
//! | `seed`           | int         | yes      | master seed                           |
//! | `delta_x`, `delta_y` | float   | no       | threshold constants                   |
//! | `x`, `y`, `z`, `eta` | float   | no       | direct threshold overrides            |
//! | `l`, `d`         | int         | no       | radius / depth overrides              |
//! | `removal_search` | word        | no       | `exhaustive` (default) or `ball_only` |
//!
//! Cells are enumerated with `n` varying slowest and `algo` fastest.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use crate::align::seeded::RemovalSearch;
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::trial::{Algorithm, Constants, Overrides, TrialSpec};
use crate::model::ModelParams;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: Vec<usize>,
    pub m: Vec<usize>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub s_u: Vec<f64>,
    pub s_a: Vec<f64>,
    pub algos: Vec<Algorithm>,
    pub trials: u32,
    pub constants: Constants,
    pub overrides: Overrides,
    pub search: RemovalSearch,
    pub seed: u64,
}

const KNOWN_KEYS: &[&str] = &[
    "n",
    "m",
    "p",
    "q",
    "s_u",
    "s_a",
    "algo",
    "trials",
    "epsilon",
    "tau",
    "seed",
    "delta_x",
    "delta_y",
    "x",
    "y",
    "z",
    "l",
    "eta",
    "d",
    "removal_search",
];

fn parse_one<T: FromStr>(key: &str, raw: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    raw.trim()
        .parse::<T>()
        .map_err(|e| Error::InvalidParameter(format!("key {key}: cannot parse {raw:?}: {e}")))
}

fn parse_list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    let items: Vec<T> = raw
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_one(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::InvalidParameter(format!("key {key}: empty list")));
    }
    Ok(items)
}

impl FromStr for RemovalSearch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "exhaustive" => Ok(RemovalSearch::Exhaustive),
            "ball_only" => Ok(RemovalSearch::BallOnly),
            other => Err(Error::InvalidParameter(format!(
                "unknown removal search {other:?} (expected exhaustive or ball_only)"
            ))),
        }
    }
}

impl SweepConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: idx + 1,
                msg: "expected `key = value`".into(),
            })?;
            let k = k.trim().to_string();
            if !KNOWN_KEYS.contains(&k.as_str()) {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("unknown key {k:?}"),
                });
            }
            if kv.insert(k.clone(), v.trim().to_string()).is_some() {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("key {k:?} given twice"),
                });
            }
        }
        let required = |k: &str| -> Result<&str> {
            kv.get(k)
                .map(String::as_str)
                .ok_or_else(|| Error::InvalidParameter(format!("missing required key {k:?}")))
        };
        let optional = |k: &str| kv.get(k).map(String::as_str);

        let cfg = SweepConfig {
            n: parse_list("n", required("n")?)?,
            m: parse_list("m", required("m")?)?,
            p: parse_list("p", required("p")?)?,
            q: parse_list("q", required("q")?)?,
            s_u: parse_list("s_u", required("s_u")?)?,
            s_a: parse_list("s_a", required("s_a")?)?,
            algos: match optional("algo") {
                Some(v) => parse_list("algo", v)?,
                None => vec![Algorithm::AttrRich],
            },
            trials: parse_one("trials", required("trials")?)?,
            constants: Constants {
                epsilon: parse_one("epsilon", required("epsilon")?)?,
                tau: parse_one("tau", required("tau")?)?,
                delta_x: optional("delta_x")
                    .map(|v| parse_one("delta_x", v))
                    .transpose()?,
                delta_y: optional("delta_y")
                    .map(|v| parse_one("delta_y", v))
                    .transpose()?,
            },
            overrides: Overrides {
                x: optional("x").map(|v| parse_one("x", v)).transpose()?,
                y: optional("y").map(|v| parse_one("y", v)).transpose()?,
                z: optional("z").map(|v| parse_one("z", v)).transpose()?,
                l: optional("l").map(|v| parse_one("l", v)).transpose()?,
                eta: optional("eta").map(|v| parse_one("eta", v)).transpose()?,
                d: optional("d").map(|v| parse_one("d", v)).transpose()?,
            },
            search: match optional("removal_search") {
                Some(v) => v.parse()?,
                None => RemovalSearch::Exhaustive,
            },
            seed: parse_one("seed", required("seed")?)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        for (name, grid) in [
            ("p", &self.p),
            ("q", &self.q),
            ("s_u", &self.s_u),
            ("s_a", &self.s_a),
        ] {
            if let Some(v) = grid.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::InvalidParameter(format!(
                    "{name} grid value {v} is not a probability"
                )));
            }
        }
        if let Some(0) = self.n.iter().copied().find(|&n| n == 0) {
            return Err(Error::InvalidParameter("n grid contains 0".into()));
        }
        if self.constants.epsilon.is_nan() || self.constants.epsilon <= 0.0 {
            return Err(Error::InvalidParameter("epsilon must be positive".into()));
        }
        if self.constants.tau.is_nan() || self.constants.tau <= 0.0 {
            return Err(Error::InvalidParameter("tau must be positive".into()));
        }
        Ok(())
    }

    /// Every cell in canonical order.
    pub fn cells(&self) -> Vec<TrialSpec> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &m in &self.m {
                for &p in &self.p {
                    for &q in &self.q {
                        for &s_u in &self.s_u {
                            for &s_a in &self.s_a {
                                for &algo in &self.algos {
                                    out.push(TrialSpec {
                                        params: ModelParams {
                                            n,
                                            m,
                                            p,
                                            q,
                                            s_u,
                                            s_a,
                                        },
                                        algo,
                                        constants: self.constants,
                                        overrides: self.overrides,
                                        search: self.search,
                                        exec: Execution::Sequential,
                                    });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}
