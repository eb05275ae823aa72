//! Scaling benchmarks for the fast and dense operators and the SOE check.

use std::hint::black_box;
use std::time::{Duration, Instant};

use sfde_core::dense::{assemble_with_scaling, DenseMatrix, ScalingVectors};
use sfde_core::fast::{FastOperator, FastScratch};
use sfde_core::quadrature::DirectCoefficients;
use sfde_core::soe::{build_soe, SoeApproximation, CHECK_SAMPLES};
use sfde_core::{ProblemSpec, StaggeredGrid};

use crate::alloc_audit::peak_since;
use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub soe_eps: f64,
    pub ms: Vec<usize>,
    /// Dense matvecs are timed only up to this `M`.
    pub dense_max_m: usize,
    /// Timings are the minimum over this many repetitions.
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    pub nexp: usize,
    pub fast_seconds: f64,
    /// Time relative to the previous row.
    pub fast_ratio: Option<f64>,
    pub dense_seconds: Option<f64>,
    pub dense_ratio: Option<f64>,
    /// Bytes held by the fast operator's precomputed tables.
    pub table_bytes: usize,
    /// Heap high-water mark while building the fast operator and applying it
    /// once, grid and SOE included.
    pub peak_bytes: usize,
}

fn min_time(reps: usize, mut f: impl FnMut()) -> Duration {
    (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            f();
            start.elapsed()
        })
        .min()
        .expect("at least one repetition")
}

fn test_vector(m: usize) -> Vec<f64> {
    (0..m).map(|i| ((i * 7919) % 1000) as f64 / 1000.0 - 0.5).collect()
}

/// Unit-coefficient problem used for timing; the operator's cost does not
/// depend on the coefficient values.
fn timing_problem(alpha: f64, gamma: f64) -> ProblemSpec {
    ProblemSpec::homogeneous(alpha, gamma, 1.0)
}

/// Builds the SOE shared by every `M` in a benchmark: its cutoff is the
/// smallest interior staggered width among the grids, so `N_exp` is the
/// same for all rows.
pub fn shared_soe(alpha: f64, eps: f64, ms: &[usize]) -> Result<SoeApproximation> {
    let m_max = *ms.iter().max().ok_or_else(|| HarnessError::Usage("empty M list".into()))?;
    let grid = StaggeredGrid::uniform(0.0, 1.0, m_max)?;
    Ok(build_soe(alpha, eps, grid.min_interior_stag_width(), grid.length())?)
}

/// Fast operator on the uniform grid of `[0, 1]` with `m` cells.
pub struct FastBench {
    pub table_bytes: usize,
    pub peak_bytes: usize,
    pub nexp: usize,
    op: FastOperator,
    scaling: ScalingVectors,
    scratch: FastScratch,
    gamma: f64,
}

impl FastBench {
    pub fn new(alpha: f64, gamma: f64, soe: &SoeApproximation, m: usize) -> Result<Self> {
        let problem = timing_problem(alpha, gamma);
        let (built, peak_bytes) = peak_since(|| -> Result<_> {
            let grid = StaggeredGrid::uniform(0.0, 1.0, m)?;
            let op = FastOperator::precompute(&grid, alpha, soe)?;
            let scaling = ScalingVectors::at_time(&grid, &problem, 1.0)?;
            let mut scratch = FastScratch::new(&op);
            let v = test_vector(m);
            let mut out = vec![0.0; m];
            op.apply_into(&scaling, gamma, &v, &mut out, &mut scratch);
            black_box(&out);
            Ok((op, scaling, scratch))
        });
        let (op, scaling, scratch) = built?;
        Ok(Self {
            table_bytes: op.table_bytes(),
            peak_bytes,
            nexp: op.nexp(),
            op,
            scaling,
            scratch,
            gamma,
        })
    }

    pub fn time_apply(&mut self, reps: usize) -> Duration {
        let m = self.op.cells();
        let v = test_vector(m);
        let mut out = vec![0.0; m];
        min_time(reps, || {
            self.op.apply_into(&self.scaling, self.gamma, black_box(&v), &mut out, &mut self.scratch);
            black_box(&out);
        })
    }
}

/// Assembled dense stiffness on the uniform grid of `[0, 1]`.
pub fn dense_stiffness(alpha: f64, gamma: f64, m: usize) -> Result<DenseMatrix> {
    let grid = StaggeredGrid::uniform(0.0, 1.0, m)?;
    let problem = timing_problem(alpha, gamma);
    let coeffs = DirectCoefficients::new(&grid, alpha)?;
    let scaling = ScalingVectors::at_time(&grid, &problem, 1.0)?;
    Ok(assemble_with_scaling(&coeffs, &scaling, gamma))
}

pub fn time_dense_matvec(a: &DenseMatrix, reps: usize) -> Duration {
    let v = test_vector(a.order());
    let mut out = vec![0.0; a.order()];
    min_time(reps, || {
        a.mul_vec_into(black_box(&v), &mut out);
        black_box(&out);
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.ms.is_empty() || cfg.ms.windows(2).any(|w| w[0] >= w[1]) {
        return Err(HarnessError::Usage("the M list must be non-empty and strictly increasing".into()));
    }
    let soe = shared_soe(cfg.alpha, cfg.soe_eps, &cfg.ms)?;
    let mut rows: Vec<BenchRow> = Vec::with_capacity(cfg.ms.len());
    for &m in &cfg.ms {
        let mut fb = FastBench::new(cfg.alpha, cfg.gamma, &soe, m)?;
        let fast_seconds = fb.time_apply(cfg.reps).as_secs_f64();
        let (table_bytes, peak_bytes, nexp) = (fb.table_bytes, fb.peak_bytes, fb.nexp);
        drop(fb);
        let dense_seconds = if m <= cfg.dense_max_m {
            let a = dense_stiffness(cfg.alpha, cfg.gamma, m)?;
            Some(time_dense_matvec(&a, cfg.reps).as_secs_f64())
        } else {
            None
        };
        let prev = rows.last();
        rows.push(BenchRow {
            m,
            nexp,
            fast_seconds,
            fast_ratio: prev.map(|p| fast_seconds / p.fast_seconds),
            dense_seconds,
            dense_ratio: match (prev.and_then(|p| p.dense_seconds), dense_seconds) {
                (Some(a), Some(b)) => Some(b / a),
                _ => None,
            },
            table_bytes,
            peak_bytes,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct SoeCheck {
    pub soe: SoeApproximation,
    /// Largest absolute kernel error over the check samples.
    pub max_error: f64,
    pub elapsed: Duration,
}

/// Builds an SOE and re-runs the sampled kernel check on it.
pub fn soe_check(alpha: f64, eps: f64, dx: f64, x_max: f64) -> Result<SoeCheck> {
    let start = Instant::now();
    let soe = build_soe(alpha, eps, dx, x_max)?;
    let max_error = soe.max_sampled_error(CHECK_SAMPLES);
    Ok(SoeCheck {
        soe,
        max_error,
        elapsed: start.elapsed(),
    })
}
