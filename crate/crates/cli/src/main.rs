use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use attralign::align::attr_sparse::{plan_dispatch, threshold_z, DispatchPlan, PlanOverrides};
use attralign::align::counting::{build_anchors_with, common_count_matrix};
use attralign::align::seeded::{dense_scores, sparse_z_matrix, RemovalSearch, SparseParams};
use attralign::harness::{
    classify_region, run_trial, sweep, Algorithm, Constants, Overrides, SweepConfig, TrialRecord,
    TrialSpec,
};
use attralign::io::{write_edge_list_file, write_matrix_csv, write_permutation_file};
use attralign::model::{generate_pair_with, trial_rng, trial_seed, GenerateOptions};
use attralign::{Execution, GraphPairInstance, ModelParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(
    name = "attralign",
    version,
    about = "Attributed graph alignment experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one graph pair and write it as edge lists.
    Generate(GenerateArgs),
    /// Run one alignment trial and print its record.
    Align(AlignArgs),
    /// Run a parameter sweep and write the results CSV.
    Sweep(SweepArgs),
    /// Print the region classification of a parameter point.
    Classify(ClassifyArgs),
}

#[derive(Args)]
struct ModelArgs {
    /// Number of users.
    #[arg(long)]
    n: usize,
    /// Number of attributes.
    #[arg(long)]
    m: usize,
    /// User-user edge probability.
    #[arg(long)]
    p: f64,
    /// User-attribute edge probability.
    #[arg(long)]
    q: f64,
    /// User-user subsampling probability.
    #[arg(long = "su")]
    s_u: f64,
    /// User-attribute subsampling probability.
    #[arg(long = "sa")]
    s_a: f64,
}

impl ModelArgs {
    fn params(&self) -> ModelParams {
        ModelParams {
            n: self.n,
            m: self.m,
            p: self.p,
            q: self.q,
            s_u: self.s_u,
            s_a: self.s_a,
        }
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory; receives g1.txt, g2.txt, g2_anon.txt and perm.txt.
    #[arg(long)]
    out: PathBuf,
    /// Use the identity permutation.
    #[arg(long)]
    identity: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgoArg {
    #[value(name = "attr_rich", alias = "attr-rich")]
    AttrRich,
    #[value(name = "attr_sparse", alias = "attr-sparse")]
    AttrSparse,
}

#[derive(Clone, Copy, ValueEnum)]
enum SearchArg {
    Exhaustive,
    #[value(name = "ball_only", alias = "ball-only")]
    BallOnly,
}

#[derive(Args)]
struct AlignArgs {
    #[arg(long, value_enum)]
    algo: AlgoArg,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "delta-x")]
    delta_x: Option<f64>,
    #[arg(long = "delta-y")]
    delta_y: Option<f64>,
    /// Anchor threshold override (attr_rich).
    #[arg(long)]
    x: Option<f64>,
    /// Neighbor-count threshold override (attr_rich).
    #[arg(long)]
    y: Option<f64>,
    /// Anchor threshold override (attr_sparse).
    #[arg(long)]
    z: Option<f64>,
    /// Ball radius override (attr_sparse, sparse branch).
    #[arg(long)]
    l: Option<usize>,
    /// Seed fraction override (attr_sparse, sparse branch).
    #[arg(long)]
    eta: Option<f64>,
    /// Depth override (attr_sparse, dense branch).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "removal-search", value_enum, default_value = "exhaustive")]
    removal_search: SearchArg,
    /// Run kernels on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write the common attribute count matrix as CSV.
    #[arg(long = "dump-c")]
    dump_c: Option<PathBuf>,
    /// Write the seeded-stage score matrix (lambda or Z) as CSV (attr_sparse).
    #[arg(long = "dump-scores")]
    dump_scores: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let params = a.model.params();
    let inst = generate_pair_with(
        &params,
        &mut trial_rng(a.seed),
        GenerateOptions {
            identity_permutation: a.identity,
        },
    )?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let g2 = inst
        .g2_anon
        .apply_permutation(&inst.ground_truth.inverse())?;
    write_edge_list_file(&inst.g1, &a.out.join("g1.txt"))?;
    write_edge_list_file(&g2, &a.out.join("g2.txt"))?;
    write_edge_list_file(&inst.g2_anon, &a.out.join("g2_anon.txt"))?;
    write_permutation_file(&inst.ground_truth, &a.out.join("perm.txt"))?;
    println!(
        "wrote {} (n = {}, m = {}, user edges {} / {}, attribute edges {} / {})",
        a.out.display(),
        params.n,
        params.m,
        inst.g1.user_edge_count(),
        inst.g2_anon.user_edge_count(),
        inst.g1.attr_edge_count(),
        inst.g2_anon.attr_edge_count()
    );
    Ok(())
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
}

fn print_record(r: &TrialRecord) {
    println!("algo: {}", r.algo);
    println!("seed: {}", r.seed);
    println!("success: {}", r.success);
    println!("failure_kind: {}", opt(r.failure_kind.as_deref()));
    println!("failure_context: {}", opt(r.failure_context.as_deref()));
    println!("anchors: {}", r.anchors);
    let t = &r.thresholds;
    println!(
        "thresholds: x={} y={} z={} l={} eta={} d={}",
        opt(t.x),
        opt(t.y),
        opt(t.z),
        opt(t.l),
        opt(t.eta),
        opt(t.d)
    );
    println!("runtime_ms: {:.3}", r.runtime_ms);
    if let Some(c) = &r.region {
        println!("thm1_feasible: {}", c.thm1_feasible);
        println!("thm2_feasible: {}", c.thm2_feasible);
    }
}

fn write_csv_file<T: std::fmt::Display>(rows: &[Vec<T>], path: &Path) -> Result<()> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(f);
    write_matrix_csv(rows, &mut w)?;
    w.flush()?;
    Ok(())
}

fn dump_scores(
    a: &AlignArgs,
    inst: &GraphPairInstance,
    exec: Execution,
    path: &Path,
) -> Result<()> {
    let params = a.model.params();
    let z = match a.z {
        Some(z) => z,
        None => threshold_z(&params, a.tau)?,
    };
    let anchors = match build_anchors_with(&inst.g1, &inst.g2_anon, z, exec)? {
        Ok(s) => s,
        Err(f) => bail!(
            "no scores to dump: step 1 failed ({}: {})",
            f.kind,
            f.context
        ),
    };
    let plan = plan_dispatch(
        params.n,
        params.p,
        params.s_u,
        PlanOverrides {
            d: a.d,
            l: a.l,
            eta: a.eta,
        },
    )?;
    let (u1, u2) = (inst.g1.users_only(), inst.g2_anon.users_only());
    let rows = match plan {
        DispatchPlan::Dense { d, .. } => dense_scores(&u1, &u2, &anchors, d, exec)?,
        DispatchPlan::Sparse { l, eta } => {
            let sp = SparseParams {
                radius: l,
                eta,
                n_model: params.n,
                search: search(a.removal_search),
            };
            sparse_z_matrix(&u1, &u2, &anchors, &sp, exec)?
        }
    };
    write_csv_file(&rows, path)
}

fn search(s: SearchArg) -> RemovalSearch {
    match s {
        SearchArg::Exhaustive => RemovalSearch::Exhaustive,
        SearchArg::BallOnly => RemovalSearch::BallOnly,
    }
}

fn align(a: &AlignArgs) -> Result<()> {
    let exec = if a.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let algo = match a.algo {
        AlgoArg::AttrRich => Algorithm::AttrRich,
        AlgoArg::AttrSparse => Algorithm::AttrSparse,
    };
    if a.dump_scores.is_some() && algo != Algorithm::AttrSparse {
        bail!("--dump-scores applies to --algo attr_sparse only");
    }
    let spec = TrialSpec {
        params: a.model.params(),
        algo,
        constants: Constants {
            epsilon: a.epsilon,
            tau: a.tau,
            delta_x: a.delta_x,
            delta_y: a.delta_y,
        },
        overrides: Overrides {
            x: a.x,
            y: a.y,
            z: a.z,
            l: a.l,
            eta: a.eta,
            d: a.d,
        },
        search: search(a.removal_search),
        exec,
    };
    let rec = run_trial(&spec, a.seed, 0, 0);
    print_record(&rec);

    if a.dump_c.is_some() || a.dump_scores.is_some() {
        // Same stream as the trial above.
        let inst = generate_pair_with(
            &spec.params,
            &mut trial_rng(trial_seed(a.seed, 0, 0)),
            GenerateOptions::default(),
        )?;
        if let Some(path) = &a.dump_c {
            write_csv_file(&common_count_matrix(&inst.g1, &inst.g2_anon, exec)?, path)?;
        }
        if let Some(path) = &a.dump_scores {
            dump_scores(a, &inst, exec, path)?;
        }
    }
    Ok(())
}

fn run_sweep_cmd(a: &SweepArgs) -> Result<()> {
    let cfg = SweepConfig::from_file(&a.config)?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    if workers == 0 {
        bail!("--workers must be at least 1");
    }
    let f = File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let res = sweep(&cfg, workers, BufWriter::new(f))?;
    println!(
        "{} cells, {} trials -> {}",
        res.cells.len(),
        res.trial_count(),
        a.out.display()
    );
    Ok(())
}

fn classify(a: &ClassifyArgs) -> Result<()> {
    let params = a.model.params();
    let r = classify_region(&params, a.epsilon, a.tau)?;
    println!("attr_signal: {}", params.attr_signal());
    println!("user_signal: {}", params.user_signal());
    println!("attr_rich: {}", r.attr_rich);
    println!("combined_signal: {}", r.combined_signal);
    println!("attr_sparse: {}", r.attr_sparse);
    println!("user_signal_ok: {}", r.user_signal);
    println!("density_cap: {}", r.density_cap);
    println!("attr_floor: {}", r.attr_floor);
    println!("thm1_feasible: {}", r.thm1_feasible);
    println!("thm2_feasible: {}", r.thm2_feasible);
    println!("coord_x: {}", r.coord_x);
    println!("coord_y: {}", r.coord_y);
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate(a) => generate(&a),
        Command::Align(a) => align(&a),
        Command::Sweep(a) => run_sweep_cmd(&a),
        Command::Classify(a) => classify(&a),
    }
}
