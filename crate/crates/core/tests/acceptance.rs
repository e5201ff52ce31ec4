//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

#![allow(clippy::needless_range_loop)]

use std::time::{Duration, Instant};

use attralign::align::attr_rich::threshold_x;
use attralign::align::counting::{build_anchors_with, common_attribute_count};
use attralign::align::seeded::{
    dense_scores, high_degree_cutoff, seeded_dense_align_with, sparse_high_degree_phase,
    sparse_lambda, sparse_z_matrix, RemovalSearch, SparseParams,
};
use attralign::align::FailureKind;
use attralign::harness::{
    run_trial, sweep, Algorithm, Constants, Overrides, SweepConfig, TrialSpec, CSV_HEADER,
};
use attralign::model::{generate_pair, seeded_params, trial_rng};
use attralign::{AnchorSet, AttributedGraph, Execution, ModelParams, Permutation, UserId};
use attralign_testkit::{
    brute_sparse_lambda, brute_sparse_matches, brute_sparse_z, oracle_common_count,
    oracle_distances, oracle_exhaustive_anchor_check, AnchorVerdict,
};
use rand::Rng;

type Criterion = (&'static str, fn() -> Verdict, Duration);

struct Verdict {
    pass: bool,
    detail: String,
}

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

fn rich_spec(p: ModelParams, epsilon: f64) -> TrialSpec {
    TrialSpec {
        params: p,
        algo: Algorithm::AttrRich,
        constants: Constants {
            epsilon,
            tau: 0.5,
            delta_x: None,
            delta_y: None,
        },
        overrides: Overrides::default(),
        search: RemovalSearch::Exhaustive,
        exec: Execution::default(),
    }
}

fn success_rate(spec: &TrialSpec, master: u64, trials: u32) -> (usize, Vec<String>) {
    let recs: Vec<_> = (0..trials).map(|t| run_trial(spec, master, 0, t)).collect();
    let ok = recs.iter().filter(|r| r.success).count();
    let mut kinds: Vec<String> = recs.iter().filter_map(|r| r.failure_kind.clone()).collect();
    kinds.sort();
    kinds.dedup();
    (ok, kinds)
}

fn oracle_equivalence() -> Verdict {
    let mut rng = trial_rng(0xACCE);
    let instances = 250;
    let mut mismatches = Vec::new();
    for k in 0..instances {
        let p = params(
            rng.random_range(1..=32),
            rng.random_range(0..=32),
            rng.random_range(0.0..0.5),
            rng.random_range(0.0..0.5),
            rng.random_range(0.3..=1.0),
            rng.random_range(0.3..=1.0),
        );
        let inst = generate_pair(&p, &mut trial_rng(rng.random())).unwrap();
        let (g1, g2) = (&inst.g1, &inst.g2_anon);

        let c = oracle_common_count(g1, g2);
        for i in 0..p.n {
            for j in 0..p.n {
                if common_attribute_count(g1, g2, UserId(i as u32), UserId(j as u32)).unwrap()
                    != c[i][j]
                {
                    mismatches.push(format!("instance {k}: C({i},{j})"));
                }
            }
        }

        let d = oracle_distances(g1);
        if d.check_metric().is_err() {
            mismatches.push(format!("instance {k}: distance oracle not a metric"));
        }
        for i in 0..p.n {
            for l in 0..5 {
                let got: Vec<u32> = g1
                    .user_neighbors_within(UserId(i as u32), l, &[])
                    .unwrap()
                    .into_iter()
                    .map(|u| u.0)
                    .collect();
                if got != d.within(i, l as u32) {
                    mismatches.push(format!("instance {k}: ball({i},{l})"));
                }
            }
        }

        let thr = rng.random_range(-1.0..4.0);
        let got = build_anchors_with(g1, g2, thr, Execution::default()).unwrap();
        let agree = match (&got, oracle_exhaustive_anchor_check(g1, g2, thr)) {
            (Ok(a), AnchorVerdict::Anchors(b)) => a.pairs().iter().map(|&(i, j)| (i.0, j.0)).eq(b),
            (Err(_), AnchorVerdict::Conflict) => true,
            _ => false,
        };
        if !agree {
            mismatches.push(format!("instance {k}: anchors at threshold {thr}"));
        }
    }
    Verdict {
        pass: mismatches.is_empty(),
        detail: format!(
            "{instances} instances, {} mismatches {:?}",
            mismatches.len(),
            mismatches.iter().take(3).collect::<Vec<_>>()
        ),
    }
}

fn noiseless_recovery() -> Verdict {
    let spec = rich_spec(params(200, 2000, 0.05, 0.05, 1.0, 1.0), 0.1);
    let (ok, kinds) = success_rate(&spec, 101, 100);
    Verdict {
        pass: ok >= 99,
        detail: format!("{ok}/100 exact recoveries, failure kinds {kinds:?}"),
    }
}

fn deep_feasible() -> Verdict {
    let spec = rich_spec(params(500, 3000, 0.05, 0.02, 0.9, 0.9), 0.1);
    let (ok, kinds) = success_rate(&spec, 202, 50);
    let rate = ok as f64 / 50.0;
    Verdict {
        pass: rate >= 0.8,
        detail: format!("rate {rate:.2} ({ok}/50), failure kinds {kinds:?}"),
    }
}

fn deep_infeasible() -> Verdict {
    let p = params(500, 500, 0.0015, 0.0015, 0.9, 0.9);
    let signal = p.attr_signal() + p.user_signal();
    let bound = 0.2 * (500f64).ln();
    let (ok, kinds) = success_rate(&rich_spec(p, 0.1), 303, 50);
    let rate = ok as f64 / 50.0;
    Verdict {
        pass: signal <= bound && rate <= 0.05,
        detail: format!(
            "signal {signal:.4} <= {bound:.4}; rate {rate:.2} ({ok}/50), failure kinds {kinds:?}"
        ),
    }
}

/// Attributes become seed vertices `n + a` mapped to themselves.
fn seeded_view(inst_g: &AttributedGraph) -> AttributedGraph {
    inst_g.attributes_as_users()
}

fn seeded_dense() -> Verdict {
    // Hand trace: seeds 1->1, 2->2; user 3 adjacent to both, user 4 isolated.
    let g = AttributedGraph::from_edges(4, 0, [(UserId(0), UserId(2)), (UserId(1), UserId(2))], [])
        .unwrap();
    let seeds = AnchorSet::new([(UserId(0), UserId(0)), (UserId(1), UserId(1))]).unwrap();
    let lam = dense_scores(&g, &g, &seeds, 2, Execution::Sequential).unwrap();
    let res = seeded_dense_align_with(&g, &g, &seeds, 2, Execution::Sequential).unwrap();
    let trace_ok = (lam[2][2], lam[2][3], lam[3][2], lam[3][3]) == (2, 0, 0, 0)
        && res.failure().is_some_and(|f| {
            f.kind == FailureKind::NonUniqueMatch && f.context.starts_with("user 4:")
        });

    let p = seeded_params(400, 0.2, 0.2, 0.9).unwrap();
    let trials = 30;
    let mut ok = 0;
    let mut wrong_users = Vec::new();
    for t in 0..trials {
        let inst = generate_pair(&p, &mut trial_rng(404 + t)).unwrap();
        let (h1, h2) = (seeded_view(&inst.g1), seeded_view(&inst.g2_anon));
        let seeds = AnchorSet::new((0..p.m as u32).map(|a| {
            let v = UserId(p.n as u32 + a);
            (v, v)
        }))
        .unwrap();
        let truth = inst.ground_truth.extend_identity(p.m);
        let res = seeded_dense_align_with(&h1, &h2, &seeds, 2, Execution::default()).unwrap();
        if res.permutation() == Some(&truth) {
            ok += 1;
        }
        // Users whose unique-argmax would be wrong or tied, for the report.
        let lam = dense_scores(&h1, &h2, &seeds, 2, Execution::default()).unwrap();
        let bad = (0..p.n)
            .filter(|&u| {
                let own = lam[u][truth.as_slice()[u] as usize];
                (0..p.n).any(|v| v != truth.as_slice()[u] as usize && lam[u][v] >= own)
            })
            .count();
        wrong_users.push(bad);
    }
    let rate = ok as f64 / trials as f64;
    let mean_bad = wrong_users.iter().sum::<usize>() as f64 / trials as f64;
    Verdict {
        pass: trace_ok && rate >= 0.8,
        detail: format!(
            "hand trace {}; N=400 rate {rate:.2} ({ok}/{trials}), mean {mean_bad:.1} of {} users not strict argmax",
            if trace_ok { "reproduced" } else { "MISMATCH" },
            p.n
        ),
    }
}

fn sparse_mechanics() -> Verdict {
    // Two triangles joined by two edges; g2 is g1 relabeled by a reversal.
    let edges = [
        (0, 1),
        (0, 2),
        (1, 2),
        (3, 4),
        (3, 5),
        (4, 5),
        (2, 3),
        (1, 4),
    ];
    let g1 =
        AttributedGraph::from_edges(6, 0, edges.iter().map(|&(a, b)| (UserId(a), UserId(b))), [])
            .unwrap();
    let pi = Permutation::from_vec(vec![5, 4, 3, 2, 1, 0]).unwrap();
    let g2 = g1.apply_permutation(&pi).unwrap();
    let pairs = [(0u32, 5u32), (5, 0)];
    let seeds = AnchorSet::new(pairs.iter().map(|&(a, b)| (UserId(a), UserId(b)))).unwrap();
    let (l, eta) = (1usize, 0.5);
    let cutoff = high_degree_cutoff(6);

    let mut checked = 0;
    let mut bad = Vec::new();
    for search in [RemovalSearch::Exhaustive, RemovalSearch::BallOnly] {
        let sp = SparseParams {
            radius: l,
            eta,
            n_model: 6,
            search,
        };
        for u in 1..5usize {
            for v in 1..5usize {
                for &i in g1.user_adj(u) {
                    for &j in g2.user_adj(v) {
                        let got = sparse_lambda(
                            &g1,
                            &g2,
                            &seeds,
                            &sp,
                            (UserId(u as u32), UserId(v as u32)),
                            (UserId(i), UserId(j)),
                        )
                        .unwrap();
                        let want = brute_sparse_lambda(
                            &g1,
                            &g2,
                            &pairs,
                            l as u32,
                            (u, v),
                            (i as usize, j as usize),
                        );
                        checked += 1;
                        if got != want {
                            bad.push(format!("lambda^({u},{v})_({i},{j}) {got} vs {want}"));
                        }
                    }
                }
            }
        }
        let z = sparse_z_matrix(&g1, &g2, &seeds, &sp, Execution::Sequential).unwrap();
        let brute_z = brute_sparse_z(&g1, &g2, &pairs, l as u32, eta);
        if z != brute_z {
            bad.push(format!("{search:?}: Z differs"));
        }
        let t = sparse_high_degree_phase(&g1, &g2, &seeds, &sp, Execution::Sequential)
            .unwrap()
            .ok()
            .map(|s| {
                s.matched
                    .pairs()
                    .iter()
                    .map(|&(a, b)| (a.0, b.0))
                    .collect::<Vec<_>>()
            });
        if t != brute_sparse_matches(&brute_z, &pairs, cutoff) {
            bad.push(format!("{search:?}: T differs ({t:?})"));
        }
    }
    Verdict {
        pass: bad.is_empty() && checked > 0,
        detail: format!(
            "{checked} lambda values, Z and T under both removal searches; {} mismatches {bad:?}",
            bad.len()
        ),
    }
}

fn determinism() -> Verdict {
    let cfg = SweepConfig::parse(
        "n = 40\nm = 100, 300, 900\np = 0.1\nq = 0.05\ns_u = 0.9\ns_a = 0.9\n\
         trials = 5\nepsilon = 0.1\ntau = 0.5\nseed = 777\n",
    )
    .unwrap();
    let runtime = CSV_HEADER.iter().position(|&c| c == "runtime_ms").unwrap();
    let strip = |workers: usize| {
        let mut buf = Vec::new();
        sweep(&cfg, workers, &mut buf).unwrap();
        String::from_utf8(buf)
            .unwrap()
            .lines()
            .map(|line| {
                let mut f: Vec<&str> = line.split(',').collect();
                f.remove(runtime);
                f.join(",")
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let (a, b, c) = (strip(1), strip(1), strip(4));
    let rows = a.lines().count() - 1;
    Verdict {
        pass: a == b && a == c && rows == 18,
        detail: format!(
            "{rows} rows; repeat identical {}, 4 workers identical {}",
            a == b,
            a == c
        ),
    }
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn complexity() -> Verdict {
    let sizes = [250usize, 500, 1000];
    let mut medians = Vec::new();
    for &n in &sizes {
        let p = params(n, 1000, 0.05, 0.02, 0.9, 0.9);
        let x = threshold_x(&p).unwrap();
        let times: Vec<Duration> = (0..5)
            .map(|t| {
                let inst = generate_pair(&p, &mut trial_rng(900 + t)).unwrap();
                let start = Instant::now();
                let out =
                    build_anchors_with(&inst.g1, &inst.g2_anon, x, Execution::Sequential).unwrap();
                let el = start.elapsed();
                std::hint::black_box(out.is_ok());
                el
            })
            .collect();
        medians.push(median(times));
    }
    let ratios: Vec<f64> = medians
        .windows(2)
        .map(|w| w[1].as_secs_f64() / w[0].as_secs_f64())
        .collect();
    Verdict {
        pass: ratios.iter().all(|&r| r <= 2.5),
        detail: format!(
            "medians {:?} at n = {sizes:?}; doubling ratios {:.2?} (limit 2.5)",
            medians
                .iter()
                .map(|d| format!("{:.2}ms", d.as_secs_f64() * 1e3))
                .collect::<Vec<_>>(),
            ratios
        ),
    }
}

fn main() {
    let criteria: [Criterion; 8] = [
        (
            "oracle equivalence",
            oracle_equivalence,
            Duration::from_secs(60),
        ),
        (
            "noiseless recovery",
            noiseless_recovery,
            Duration::from_secs(120),
        ),
        (
            "deep-feasible regime",
            deep_feasible,
            Duration::from_secs(600),
        ),
        (
            "deep-infeasible regime",
            deep_infeasible,
            Duration::from_secs(300),
        ),
        (
            "seeded dense subroutine",
            seeded_dense,
            Duration::from_secs(300),
        ),
        (
            "sparse subroutine mechanics",
            sparse_mechanics,
            Duration::from_secs(1),
        ),
        ("sweep determinism", determinism, Duration::MAX),
        ("step-1 complexity smoke", complexity, Duration::MAX),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let v = run();
        let took = start.elapsed();
        let in_budget = took <= budget;
        let pass = v.pass && in_budget;
        failed += usize::from(!pass);
        let budget_note = if budget == Duration::MAX {
            String::new()
        } else {
            format!(
                ", budget {}s{}",
                budget.as_secs(),
                if in_budget { "" } else { " EXCEEDED" }
            )
        };
        println!(
            "{} {name}: {} [{:.2}s{budget_note}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            took.as_secs_f64()
        );
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
