use std::path::Path;

use proptest::prelude::*;
use sfde::alloc_audit::peak_since;
use sfde::bench::{run_bench, soe_check, BenchConfig};
use sfde::gridfile::{format_grid, parse_grid, read_grid, write_grid};
use sfde::study::{fill_orders, observed_order, run_compare, run_convergence, solve, ConvergenceRow, GridSpec, Steps, Study};
use sfde::table::{convergence_csv, fmt_fixed, fmt_sci, parse_convergence, CONVERGENCE_HEADER};
use sfde::HarnessError;
use sfde_core::march::Method;
use sfde_core::StaggeredGrid;
use tempfile::tempdir;

fn here() -> &'static Path {
    Path::new("<test>")
}

fn row(m: usize, error_u: f64, error_p: f64) -> ConvergenceRow {
    ConvergenceRow {
        m,
        n: 2 * m,
        error_u,
        order_u: None,
        error_p,
        order_p: None,
        cpu_ms: None,
        avg_iters: Some(3.5),
        converged: true,
    }
}

#[test]
fn scientific_format() {
    assert_eq!(fmt_sci(3.0553e-3), "3.0553e-03");
    assert_eq!(fmt_sci(4.58614e-5), "4.5861e-05");
    assert_eq!(fmt_sci(0.0), "0.0000e+00");
    assert_eq!(fmt_sci(12345.0), "1.2345e+04");
    assert_eq!(fmt_sci(-2.5e-120), "-2.5000e-120");
    assert_eq!(fmt_fixed(2.01329), "2.0133");
}

#[test]
fn empty_table_is_just_the_header() {
    let text = convergence_csv(&[]);
    assert_eq!(text, format!("{}\n", CONVERGENCE_HEADER.join(",")));
    assert!(parse_convergence(&text, here()).unwrap().is_empty());
}

#[test]
fn single_row_round_trip() {
    let mut rows = vec![row(32, 3.0553e-3, 2.3359e-3)];
    rows[0].cpu_ms = Some(12.5);
    fill_orders(&mut rows);
    let text = convergence_csv(&rows);
    assert_eq!(text.lines().nth(1), Some("32,64,3.0553e-03,,2.3359e-03,,12.5,3.50,true"));
    assert_eq!(parse_convergence(&text, here()).unwrap(), rows);
}

#[test]
fn malformed_tables_are_rejected() {
    let bad = [
        "M,N\n1,2\n",
        "M,N,error_u,order_u,error_p,order_p,cpu_ms,avg_iters,converged\nx,1,1,,1,,,,true\n",
        "M,N,error_u,order_u,error_p,order_p,cpu_ms,avg_iters,converged\n1,1,1,,1,,,,maybe\n",
    ];
    for text in bad {
        assert!(matches!(parse_convergence(text, here()), Err(HarnessError::Format { .. })), "{text}");
    }
}

#[test]
fn order_definition() {
    assert!((observed_order(32, 4.0e-3, 64, 1.0e-3) - 2.0).abs() < 1e-15);
    assert!((observed_order(10, 1.0, 1000, 1e-2) - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn orders_are_recomputable_from_errors(errs in prop::collection::vec((1e-9..1.0f64, 1e-9..1.0f64), 1..7), m0 in 4usize..64) {
        let mut rows: Vec<_> = errs.iter().enumerate().map(|(k, &(u, p))| row(m0 << k, u, p)).collect();
        fill_orders(&mut rows);
        let parsed = parse_convergence(&convergence_csv(&rows), here()).unwrap();
        prop_assert!(parsed[0].order_u.is_none() && parsed[0].order_p.is_none());
        for k in 1..parsed.len() {
            let (c, f) = (&parsed[k - 1], &parsed[k]);
            let ou = (c.error_u / f.error_u).log2();
            let op = (c.error_p / f.error_p).log2();
            // five-digit errors shift log2 by at most 2·5e-5/ln 2, plus order rounding
            prop_assert!((f.order_u.unwrap() - ou).abs() <= 2e-4);
            prop_assert!((f.order_p.unwrap() - op).abs() <= 2e-4);
        }
    }

    #[test]
    fn grid_files_round_trip_bit_for_bit(m in 3usize..60, xi in 0.0..0.9f64, seed in any::<u64>(), a in -5.0..5.0f64, len in 0.1..10.0f64) {
        let grid = StaggeredGrid::perturbed(a, a + len, m, xi, seed).unwrap();
        let back = parse_grid(&format_grid(&grid), here()).unwrap();
        prop_assert_eq!(back.edges(), grid.edges());
    }
}

#[test]
fn grid_file_on_disk() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("g.txt");
    let grid = StaggeredGrid::graded(0.0, 1.0, 10, 0.5, 1.5).unwrap();
    write_grid(&grid, &path).unwrap();
    assert_eq!(read_grid(&path).unwrap(), grid);
    assert!(matches!(read_grid(dir.path().join("missing.txt")), Err(HarnessError::Io { .. })));
}

#[test]
fn malformed_grid_files() {
    let cases = [
        "",
        "0\n0.5\n1\n",
        "# edges a=0 b=1\n0\n1\n",
        "# edges M=3 a=0 b=1\n0\n0.5\n1\n",
        "# edges M=3 a=0 b=1\n0\nhalf\n0.7\n1\n",
        "# edges M=3 a=0 b=1\n0\n0.5\n0.7\n0.9\n",
    ];
    for text in cases {
        assert!(matches!(parse_grid(text, here()), Err(HarnessError::Format { .. })), "{text:?}");
    }
    // well-formed but not increasing
    let text = "# edges M=3 a=0 b=1\n0\n0.6\n0.5\n1\n";
    assert!(matches!(parse_grid(text, here()), Err(HarnessError::Core(_))));
    let text = "\n# edges M=3 a=0 b=1\n\n0\n0.25\n0.5\n\n1\n";
    assert_eq!(parse_grid(text, here()).unwrap().edges(), &[0.0, 0.25, 0.5, 1.0]);
}

fn small(problem: &str) -> Study {
    let mut s = Study::for_problem(problem).unwrap();
    s.steps = Steps::Fixed(16);
    s
}

#[test]
fn problem_defaults() {
    let ex1 = Study::for_problem("ex1").unwrap();
    assert_eq!((ex1.alpha, ex1.steps), (1.8, Steps::EqualToM));
    assert_eq!(ex1.grid, GridSpec::perturbed(1.0 / 3.0, 0));
    let ex2 = Study::for_problem("ex2").unwrap();
    assert_eq!((ex2.alpha, ex2.gamma, ex2.steps), (1.5, 0.5, Steps::Fixed(4096)));
    assert_eq!(ex2.grid, GridSpec::graded(1.5));
    assert_eq!(Study::for_problem("ex3").unwrap().alpha, 1.4);
    assert_eq!(Study::for_problem("ex4").unwrap().grid, GridSpec::uniform());
    assert!(matches!(Study::for_problem("ex5"), Err(HarnessError::Usage(_))));
}

#[test]
fn perturbed_grids_differ_per_resolution_but_not_per_run() {
    let s = Study::for_problem("ex1").unwrap();
    assert_eq!(s.build_grid(32).unwrap(), s.build_grid(32).unwrap());
    let mut other = s.clone();
    other.grid.seed = 1;
    assert_ne!(s.build_grid(32).unwrap(), other.build_grid(32).unwrap());
}

#[test]
fn convergence_rows_and_determinism() {
    let s = small("ex4");
    let rows = run_convergence(&s, &[8, 16, 32]).unwrap();
    assert_eq!(rows, run_convergence(&s, &[8, 16, 32]).unwrap());
    assert_eq!(rows.iter().map(|r| (r.m, r.n)).collect::<Vec<_>>(), vec![(8, 16), (16, 16), (32, 16)]);
    assert!(rows.iter().all(|r| r.converged && r.cpu_ms.is_none() && r.avg_iters.unwrap() > 0.0));
    assert!(rows[0].order_u.is_none());
    let o = observed_order(8, rows[0].error_u, 16, rows[1].error_u);
    assert_eq!(rows[1].order_u, Some(o));
    assert!(matches!(run_convergence(&s, &[16, 16]), Err(HarnessError::Usage(_))));
    assert!(matches!(run_convergence(&s, &[]), Err(HarnessError::Usage(_))));

    let mut timed = s.clone();
    timed.timing = true;
    assert!(run_convergence(&timed, &[8]).unwrap()[0].cpu_ms.is_some());
}

#[test]
fn comparison_uses_one_grid_for_all_methods() {
    let mut s = small("ex1");
    s.tol = 1e-12;
    let methods = [Method::DenseGe, Method::DenseBicgstab, Method::FastBicgstab];
    let rows = run_compare(&s, 32, &methods).unwrap();
    assert_eq!(rows, run_compare(&s, 32, &methods).unwrap());
    assert_eq!(rows[0].max_diff, 0.0);
    assert_eq!(rows[0].avg_iters, None);
    for r in &rows[1..] {
        assert!(r.max_diff <= 1e-9, "{r:?}");
        assert!((r.error_u - rows[0].error_u).abs() <= 1e-9);
    }
}

#[test]
fn dense_cap() {
    let mut s = small("ex2");
    s.cap_dense_m = 16;
    assert!(matches!(solve(&s, Method::DenseGe, 32), Err(HarnessError::DenseCap { m: 32, cap: 16 })));
    assert!(matches!(
        run_compare(&s, 32, &[Method::FastBicgstab, Method::DenseBicgstab]),
        Err(HarnessError::DenseCap { .. })
    ));
    assert!(solve(&s, Method::FastBicgstab, 32).is_ok());
    assert!(solve(&s, Method::DenseGe, 16).is_ok());
}

#[test]
fn small_bench() {
    let rows = run_bench(&BenchConfig {
        alpha: 1.5,
        gamma: 0.5,
        soe_eps: 1e-10,
        ms: vec![64, 128, 256],
        dense_max_m: 128,
        reps: 2,
    })
    .unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.nexp == rows[0].nexp && r.nexp > 0));
    assert!(rows.iter().all(|r| r.peak_bytes >= r.table_bytes && r.table_bytes > 0));
    assert!(rows.windows(2).all(|w| w[1].table_bytes > w[0].table_bytes));
    assert!(rows[0].fast_ratio.is_none() && rows[1].fast_ratio.is_some());
    assert!(rows[2].dense_seconds.is_none() && rows[1].dense_ratio.is_some());
}

#[test]
fn soe_check_reports_its_error() {
    let c = soe_check(1.5, 1e-10, 1e-4, 2.0).unwrap();
    assert!(c.max_error <= 1e-10);
    assert_eq!(c.max_error, c.soe.max_sampled_error(10_000));
    assert!(soe_check(2.5, 1e-10, 1e-4, 2.0).is_err());
}

#[test]
fn allocation_peak_covers_the_allocation() {
    let (v, peak) = peak_since(|| vec![0u8; 1 << 20]);
    assert_eq!(v.len(), 1 << 20);
    assert!(peak >= 1 << 20, "{peak}");
}
