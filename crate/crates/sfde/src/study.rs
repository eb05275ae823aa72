//! Convergence studies and solver comparisons on the manufactured problems.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use sfde_core::march::{cn_march, MarchResult, Method, SolveConfig};
use sfde_core::problems::{self, ManufacturedProblem};
use sfde_core::StaggeredGrid;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GridKind {
    Uniform,
    Perturbed,
    Graded,
}

/// How to build the grid for a given `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub kind: GridKind,
    /// Perturbation amplitude for [`GridKind::Perturbed`].
    pub xi: f64,
    /// Grading exponent for [`GridKind::Graded`].
    pub kappa: f64,
    /// Base seed; the grid for `M` uses `seed + M` so every resolution gets
    /// its own draw.
    pub seed: u64,
}

impl GridSpec {
    pub fn uniform() -> Self {
        Self {
            kind: GridKind::Uniform,
            xi: 0.0,
            kappa: 1.0,
            seed: 0,
        }
    }

    pub fn perturbed(xi: f64, seed: u64) -> Self {
        Self {
            kind: GridKind::Perturbed,
            xi,
            seed,
            ..Self::uniform()
        }
    }

    pub fn graded(kappa: f64) -> Self {
        Self {
            kind: GridKind::Graded,
            kappa,
            ..Self::uniform()
        }
    }

    /// Graded grids split the domain at its midpoint and cluster toward both
    /// ends.
    pub fn build(&self, a: f64, b: f64, m: usize) -> Result<StaggeredGrid> {
        Ok(match self.kind {
            GridKind::Uniform => StaggeredGrid::uniform(a, b, m)?,
            GridKind::Perturbed => StaggeredGrid::perturbed(a, b, m, self.xi, self.seed.wrapping_add(m as u64))?,
            GridKind::Graded => StaggeredGrid::graded(a, b, m, 0.5, self.kappa)?,
        })
    }
}

/// Number of time steps as a function of `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Steps {
    EqualToM,
    Fixed(usize),
}

impl Steps {
    pub fn for_cells(self, m: usize) -> usize {
        match self {
            Steps::EqualToM => m,
            Steps::Fixed(n) => n,
        }
    }
}

/// Everything needed to run one problem at any resolution.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub problem: String,
    pub alpha: f64,
    pub gamma: f64,
    pub grid: GridSpec,
    pub steps: Steps,
    pub method: Method,
    pub tol: f64,
    pub soe_eps: f64,
    pub max_iters: Option<usize>,
    pub cap_dense_m: usize,
    /// Record wall time in result rows. Off by default so that repeated
    /// runs give byte-identical output.
    pub timing: bool,
}

pub const DEFAULT_DENSE_CAP: usize = 1 << 10;

impl Study {
    /// Default settings of the published experiments for each problem.
    pub fn for_problem(name: &str) -> Result<Self> {
        let base = Self {
            problem: name.to_string(),
            alpha: 1.5,
            gamma: 0.5,
            grid: GridSpec::uniform(),
            steps: Steps::Fixed(1 << 12),
            method: Method::FastBicgstab,
            tol: 1e-10,
            soe_eps: 1e-10,
            max_iters: None,
            cap_dense_m: DEFAULT_DENSE_CAP,
            timing: false,
        };
        Ok(match name {
            "ex1" => Self {
                alpha: 1.8,
                grid: GridSpec::perturbed(1.0 / 3.0, 0),
                steps: Steps::EqualToM,
                ..base
            },
            "ex2" => Self {
                grid: GridSpec::graded(1.5),
                ..base
            },
            "ex3" => Self {
                alpha: 1.4,
                grid: GridSpec::graded(1.5),
                ..base
            },
            "ex4" => Self { alpha: 1.8, ..base },
            _ => return Err(HarnessError::Usage(format!("unknown problem {name:?}; expected one of {:?}", problems::NAMES))),
        })
    }

    pub fn manufactured(&self) -> Result<ManufacturedProblem> {
        Ok(problems::by_name(&self.problem, self.alpha, self.gamma)?)
    }

    pub fn build_grid(&self, m: usize) -> Result<StaggeredGrid> {
        let p = self.manufactured()?;
        self.grid.build(p.a, p.b, m)
    }

    pub fn solve_config(&self, method: Method, m: usize) -> SolveConfig {
        SolveConfig {
            method,
            steps: self.steps.for_cells(m),
            rel_tol: self.tol,
            max_iters: self.max_iters,
            soe_eps: self.soe_eps,
        }
    }
}

/// One solve with its errors against the exact solution at `T`.
#[derive(Debug, Clone)]
pub struct Solved {
    pub grid: StaggeredGrid,
    pub steps: usize,
    pub result: MarchResult,
    pub error_u: f64,
    pub error_p: f64,
    pub elapsed: Duration,
}

/// Max-norm errors at `T`: `u` over cell centers, `p` over the interior
/// edges `1..M−1` (the end values are imposed data).
pub fn max_errors(grid: &StaggeredGrid, problem: &ManufacturedProblem, result: &MarchResult) -> (f64, f64) {
    let t = problem.spec.final_time;
    let eu = problem.spec.exact_u.as_ref().expect("manufactured problems carry exact u");
    let ep = problem.spec.exact_p.as_ref().expect("manufactured problems carry exact p");
    let error_u = grid
        .centers()
        .iter()
        .zip(&result.u_final)
        .map(|(&x, u)| (u - eu(x, t)).abs())
        .fold(0.0, f64::max);
    let m = grid.cells();
    let error_p = (1..m).map(|i| (result.p_final[i] - ep(grid.edges()[i], t)).abs()).fold(0.0, f64::max);
    (error_u, error_p)
}

fn check_cap(study: &Study, method: Method, m: usize) -> Result<()> {
    if method.is_dense() && m > study.cap_dense_m {
        return Err(HarnessError::DenseCap { m, cap: study.cap_dense_m });
    }
    Ok(())
}

/// Solves `study` on an explicit grid.
pub fn solve_on(study: &Study, method: Method, grid: StaggeredGrid) -> Result<Solved> {
    let m = grid.cells();
    check_cap(study, method, m)?;
    let problem = study.manufactured()?;
    if (grid.a() - problem.a).abs() > 1e-12 || (grid.b() - problem.b).abs() > 1e-12 {
        return Err(HarnessError::Usage(format!(
            "grid covers [{}, {}] but {} lives on [{}, {}]",
            grid.a(),
            grid.b(),
            problem.name,
            problem.a,
            problem.b
        )));
    }
    let config = study.solve_config(method, m);
    let start = Instant::now();
    let result = cn_march(&grid, &problem.spec, &config)?;
    let elapsed = start.elapsed();
    let (error_u, error_p) = max_errors(&grid, &problem, &result);
    Ok(Solved {
        grid,
        steps: config.steps,
        result,
        error_u,
        error_p,
        elapsed,
    })
}

pub fn solve(study: &Study, method: Method, m: usize) -> Result<Solved> {
    check_cap(study, method, m)?;
    solve_on(study, method, study.build_grid(m)?)
}

/// `log(e_coarse / e_fine) / log(M_fine / M_coarse)`; `log₂` of the error
/// ratio when `M` doubles.
pub fn observed_order(m_coarse: usize, e_coarse: f64, m_fine: usize, e_fine: f64) -> f64 {
    (e_coarse / e_fine).ln() / (m_fine as f64 / m_coarse as f64).ln()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub m: usize,
    pub n: usize,
    pub error_u: f64,
    pub order_u: Option<f64>,
    pub error_p: f64,
    pub order_p: Option<f64>,
    pub cpu_ms: Option<f64>,
    /// Mean BiCGSTAB iterations per level; `None` for the LU path.
    pub avg_iters: Option<f64>,
    pub converged: bool,
}

/// Fills the order columns from the error columns of consecutive rows.
pub fn fill_orders(rows: &mut [ConvergenceRow]) {
    for k in 0..rows.len() {
        if k == 0 {
            rows[k].order_u = None;
            rows[k].order_p = None;
        } else {
            let (c, f) = (&rows[k - 1], &rows[k]);
            let ou = observed_order(c.m, c.error_u, f.m, f.error_u);
            let op = observed_order(c.m, c.error_p, f.m, f.error_p);
            rows[k].order_u = Some(ou);
            rows[k].order_p = Some(op);
        }
    }
}

fn row_from(study: &Study, method: Method, s: &Solved) -> ConvergenceRow {
    ConvergenceRow {
        m: s.grid.cells(),
        n: s.steps,
        error_u: s.error_u,
        order_u: None,
        error_p: s.error_p,
        order_p: None,
        cpu_ms: study.timing.then(|| s.elapsed.as_secs_f64() * 1e3),
        avg_iters: (method != Method::DenseGe).then(|| s.result.average_iterations()),
        converged: s.result.converged(),
    }
}

/// One row per entry of `ms`, solved with `study.method`.
pub fn run_convergence(study: &Study, ms: &[usize]) -> Result<Vec<ConvergenceRow>> {
    if ms.is_empty() || ms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Usage("the M list must be non-empty and strictly increasing".into()));
    }
    let mut rows = Vec::with_capacity(ms.len());
    for &m in ms {
        let s = solve(study, study.method, m)?;
        rows.push(row_from(study, study.method, &s));
    }
    fill_orders(&mut rows);
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub method: Method,
    pub m: usize,
    pub n: usize,
    pub error_u: f64,
    pub error_p: f64,
    pub cpu_ms: Option<f64>,
    pub avg_iters: Option<f64>,
    /// `‖u − u_ref‖∞` against the first method in the comparison.
    pub max_diff: f64,
    pub converged: bool,
}

/// Runs every method in `methods` on the same grid and time steps.
pub fn run_compare(study: &Study, m: usize, methods: &[Method]) -> Result<Vec<CompareRow>> {
    for &method in methods {
        check_cap(study, method, m)?;
    }
    let grid = study.build_grid(m)?;
    let mut reference: Option<Vec<f64>> = None;
    let mut rows = Vec::with_capacity(methods.len());
    for &method in methods {
        let s = solve_on(study, method, grid.clone())?;
        let max_diff = match &reference {
            None => 0.0,
            Some(r) => r.iter().zip(&s.result.u_final).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        };
        if reference.is_none() {
            reference = Some(s.result.u_final.clone());
        }
        let row = row_from(study, method, &s);
        rows.push(CompareRow {
            method,
            m,
            n: s.steps,
            error_u: s.error_u,
            error_p: s.error_p,
            cpu_ms: row.cpu_ms,
            avg_iters: row.avg_iters,
            max_diff,
            converged: row.converged,
        });
    }
    Ok(rows)
}
