use attralign::harness::{run_sweep, sweep, SweepConfig, CSV_HEADER};

fn config(grid: &str, trials: u32) -> SweepConfig {
    SweepConfig::parse(&format!(
        "{grid}\ntrials = {trials}\nepsilon = 0.1\ntau = 0.5\nseed = 42\n"
    ))
    .unwrap()
}

fn rows(cfg: &SweepConfig, workers: usize) -> Vec<csv::StringRecord> {
    let mut buf = Vec::new();
    sweep(cfg, workers, &mut buf).unwrap();
    let mut rd = csv::Reader::from_reader(buf.as_slice());
    assert_eq!(rd.headers().unwrap().iter().collect::<Vec<_>>(), CSV_HEADER);
    rd.records().map(Result::unwrap).collect()
}

fn col(name: &str) -> usize {
    CSV_HEADER.iter().position(|&c| c == name).unwrap()
}

#[test]
fn one_cell_one_trial_two_rows() {
    let cfg = config("n = 20\nm = 200\np = 0.1\nq = 0.1\ns_u = 1\ns_a = 1", 1);
    let r = rows(&cfg, 1);
    assert_eq!(r.len(), 2);
    assert_eq!(&r[0][0], "trial");
    assert_eq!(&r[1][0], "aggregate");
}

#[test]
fn three_by_three_grid_cardinality() {
    let cfg = config(
        "n = 20, 30, 40\nm = 100\np = 0.1\nq = 0.05, 0.1, 0.2\ns_u = 0.9\ns_a = 0.9",
        10,
    );
    let r = rows(&cfg, 4);
    let trials = r.iter().filter(|x| &x[0] == "trial").count();
    let aggs = r.iter().filter(|x| &x[0] == "aggregate").count();
    assert_eq!((trials, aggs), (90, 9));

    // Canonical order: each cell's trials 0..9, then its aggregate.
    for (c, block) in r.chunks(11).enumerate() {
        for (t, row) in block[..10].iter().enumerate() {
            assert_eq!(&row[0], "trial");
            assert_eq!(row[col("trial")].parse::<usize>().unwrap(), t, "cell {c}");
        }
        assert_eq!(&block[10][col("trial")], "10");
        assert_eq!(&block[10][col("seed")], "42");
    }
}

#[test]
fn aggregates_are_means_of_trials() {
    let cfg = config(
        "n = 30\nm = 150, 600\np = 0.1\nq = 0.1\ns_u = 0.9\ns_a = 0.9",
        7,
    );
    let r = rows(&cfg, 2);
    for block in r.chunks(8) {
        let (trials, agg) = block.split_at(7);
        let mean = |name: &str| {
            trials
                .iter()
                .map(|t| t[col(name)].parse::<f64>().unwrap())
                .sum::<f64>()
                / trials.len() as f64
        };
        let got = |name: &str| agg[0][col(name)].parse::<f64>().unwrap();
        assert!((got("success") - mean("success")).abs() < 1e-12);
        assert!((got("anchors") - mean("anchors")).abs() < 1e-9);
        assert!((got("runtime_ms") - mean("runtime_ms")).abs() < 1e-9);
        for name in [
            "n",
            "m",
            "p",
            "q",
            "x",
            "y",
            "thm1_feasible",
            "coord_x",
            "coord_y",
        ] {
            assert_eq!(&agg[0][col(name)], &trials[0][col(name)], "{name}");
        }
    }
}

#[test]
fn success_rate_rises_with_attribute_count() {
    // Fixed n, p, q: more attributes means more signal.
    let cfg = config(
        "n = 60\nm = 20, 100, 800\np = 0.05\nq = 0.1\ns_u = 0.9\ns_a = 0.9",
        12,
    );
    let res = run_sweep(&cfg, 4).unwrap();
    let rates: Vec<f64> = res.cells.iter().map(|(_, a)| a.success_rate).collect();
    assert!(rates[0] <= rates[1] && rates[1] <= rates[2], "{rates:?}");
    assert!(rates[2] > rates[0], "{rates:?}");
}

#[test]
fn sparse_cells_leave_rich_thresholds_empty() {
    let cfg = config(
        "n = 40\nm = 400\np = 0.02\nq = 0.1\ns_u = 1\ns_a = 1\nalgo = attr_rich, attr_sparse\nl = 1\neta = 0.5\nz = 20",
        2,
    );
    let r = rows(&cfg, 1);
    let sparse: Vec<_> = r
        .iter()
        .filter(|x| &x[col("algo")] == "attr_sparse")
        .collect();
    assert_eq!(sparse.len(), 3);
    for row in sparse {
        assert_eq!((&row[col("x")], &row[col("y")]), ("", ""));
        assert_eq!(
            (&row[col("z")], &row[col("l")], &row[col("eta")]),
            ("20", "1", "0.5")
        );
    }
}
