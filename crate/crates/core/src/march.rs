//! Crank–Nicolson time marching
//!
//! ```text
//! (I − τ/2·A^n) u^n = (I + τ/2·A^{n−1}) u^{n−1} + τ F^{n−1/2}
//! ```
//!
//! with `A^n` either assembled densely or applied matrix-free.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{assemble_with_scaling, cn_system_matrices, recover_flux, DenseMatrix, LuFactors, ScalingVectors};
use crate::error::{Error, Result};
use crate::fast::{FastOperator, FastScratch};
use crate::grid::StaggeredGrid;
use crate::krylov::bicgstab;
use crate::problem::ProblemSpec;
use crate::quadrature::DirectCoefficients;
use crate::soe::build_soe;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Dense stiffness, LU with partial pivoting at every level.
    DenseGe,
    /// Dense stiffness, BiCGSTAB.
    DenseBicgstab,
    /// Matrix-free SOE operator, BiCGSTAB.
    FastBicgstab,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::DenseGe, Method::DenseBicgstab, Method::FastBicgstab];

    pub fn name(self) -> &'static str {
        match self {
            Method::DenseGe => "dense-ge",
            Method::DenseBicgstab => "dense-bicgstab",
            Method::FastBicgstab => "fast-bicgstab",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }

    pub fn is_dense(self) -> bool {
        self != Method::FastBicgstab
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig {
    pub method: Method,
    /// Number of time steps `N`; `τ = T/N`.
    pub steps: usize,
    pub rel_tol: f64,
    /// Defaults to `M` when `None`.
    pub max_iters: Option<usize>,
    pub soe_eps: f64,
}

impl SolveConfig {
    pub fn new(method: Method, steps: usize) -> Self {
        Self {
            method,
            steps,
            rel_tol: 1e-10,
            max_iters: None,
            soe_eps: 1e-10,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::InvalidConfig("need at least one time step"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig("rel_tol must be positive"));
        }
        if self.max_iters == Some(0) {
            return Err(Error::InvalidConfig("max_iters must be at least 1"));
        }
        if !(self.soe_eps > 0.0) {
            return Err(Error::InvalidConfig("soe_eps must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarchResult {
    pub u_final: Vec<f64>,
    /// Edge fluxes at `T`; the two ends are the boundary data.
    pub p_final: Vec<f64>,
    /// BiCGSTAB iterations per level (empty for the LU path).
    pub iterations: Vec<usize>,
    /// Operator applications, right-hand sides included (iterative paths).
    pub operator_applies: usize,
    /// Levels (1-based) where BiCGSTAB stopped short of the tolerance.
    pub unconverged_levels: Vec<usize>,
    /// Number of exponentials (fast path only).
    pub nexp: Option<usize>,
}

impl MarchResult {
    pub fn converged(&self) -> bool {
        self.unconverged_levels.is_empty()
    }

    pub fn average_iterations(&self) -> f64 {
        if self.iterations.is_empty() {
            0.0
        } else {
            self.iterations.iter().sum::<usize>() as f64 / self.iterations.len() as f64
        }
    }
}

enum Operator {
    Dense { coeffs: DirectCoefficients, prev: DenseMatrix },
    Fast { op: FastOperator, scratch: FastScratch, prev: ScalingVectors },
}

/// Marches from `u°` to `T` in `config.steps` uniform steps.
pub fn cn_march(grid: &StaggeredGrid, problem: &ProblemSpec, config: &SolveConfig) -> Result<MarchResult> {
    problem.validate()?;
    config.validate()?;
    let m = grid.cells();
    let n_steps = config.steps;
    let tau = problem.final_time / n_steps as f64;
    let gamma = problem.gamma;
    let max_iters = config.max_iters.unwrap_or(m);

    let scaling0 = ScalingVectors::at_time(grid, problem, 0.0)?;
    let mut operator = if config.method.is_dense() {
        let coeffs = DirectCoefficients::new(grid, problem.alpha)?;
        let prev = assemble_with_scaling(&coeffs, &scaling0, gamma);
        Operator::Dense { coeffs, prev }
    } else {
        let soe = build_soe(problem.alpha, config.soe_eps, grid.min_interior_stag_width(), grid.length())?;
        let op = FastOperator::precompute(grid, problem.alpha, &soe)?;
        let scratch = FastScratch::new(&op);
        Operator::Fast { op, scratch, prev: scaling0 }
    };

    let mut u: Vec<f64> = grid.centers().iter().map(|&x| (problem.u0)(x)).collect();
    let mut rhs = vec![0.0; m];
    let mut work = vec![0.0; m];
    let mut result = MarchResult {
        u_final: Vec::new(),
        p_final: Vec::new(),
        iterations: Vec::with_capacity(if config.method == Method::DenseGe { 0 } else { n_steps }),
        operator_applies: 0,
        unconverged_levels: Vec::new(),
        nexp: match &operator {
            Operator::Fast { op, .. } => Some(op.nexp()),
            Operator::Dense { .. } => None,
        },
    };

    for level in 1..=n_steps {
        let t_prev = (level - 1) as f64 * tau;
        let t_next = level as f64 * tau;
        let load = problem.load_vector(grid, t_prev, t_next);
        let scaling = ScalingVectors::at_time(grid, problem, t_next)?;

        match &mut operator {
            Operator::Dense { coeffs, prev } => {
                let a_next = assemble_with_scaling(coeffs, &scaling, gamma);
                if config.method == Method::DenseGe {
                    let (lhs, rhs_mat) = cn_system_matrices(&a_next, prev, tau)?;
                    rhs_mat.mul_vec_into(&u, &mut rhs);
                    for (r, f) in rhs.iter_mut().zip(&load) {
                        *r += tau * f;
                    }
                    u = LuFactors::factor(lhs)?.solve(&rhs)?;
                } else {
                    prev.mul_vec_into(&u, &mut work);
                    result.operator_applies += 1;
                    for i in 0..m {
                        rhs[i] = u[i] + 0.5 * tau * work[i] + tau * load[i];
                    }
                    let solve = bicgstab(
                        |v, out| {
                            a_next.mul_vec_into(v, out);
                            for (o, x) in out.iter_mut().zip(v) {
                                *o = x - 0.5 * tau * *o;
                            }
                        },
                        &rhs,
                        &u,
                        config.rel_tol,
                        max_iters,
                    )?;
                    record(&mut result, level, solve.iterations, solve.applies, solve.converged);
                    u = solve.x;
                }
                *prev = a_next;
            }
            Operator::Fast { op, scratch, prev } => {
                op.apply_into(prev, gamma, &u, &mut work, scratch);
                result.operator_applies += 1;
                for i in 0..m {
                    rhs[i] = u[i] + 0.5 * tau * work[i] + tau * load[i];
                }
                let solve = bicgstab(
                    |v, out| {
                        op.apply_into(&scaling, gamma, v, out, scratch);
                        for (o, x) in out.iter_mut().zip(v) {
                            *o = x - 0.5 * tau * *o;
                        }
                    },
                    &rhs,
                    &u,
                    config.rel_tol,
                    max_iters,
                )?;
                record(&mut result, level, solve.iterations, solve.applies, solve.converged);
                u = solve.x;
                *prev = scaling;
            }
        }
    }

    let t_final = n_steps as f64 * tau;
    result.p_final = match &operator {
        Operator::Dense { coeffs, .. } => recover_flux(grid, coeffs, problem, &u, t_final)?,
        Operator::Fast { op, .. } => op.recover_flux(grid, problem, &u, t_final)?,
    };
    result.u_final = u;
    Ok(result)
}

fn record(result: &mut MarchResult, level: usize, iterations: usize, applies: usize, converged: bool) {
    result.iterations.push(iterations);
    result.operator_applies += applies;
    if !converged {
        result.unconverged_levels.push(level);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::boxed::Box;

    fn smooth_problem() -> ProblemSpec {
        let mut p = ProblemSpec::homogeneous(1.6, 0.4, 0.5);
        p.k_left = Box::new(|x, t| 1.0 + t + x);
        p.k_right = Box::new(|x, _| 2.0 - 0.5 * x);
        p.source = Box::new(|x, t| libm::sin(3.0 * x) * (1.0 + t));
        p.phi = Box::new(|t| 0.1 * t);
        p.varphi = Box::new(|t| -0.2 * t);
        p.u0 = Box::new(|x| x * (2.0 - x));
        p
    }

    #[test]
    fn zero_data_stays_zero() {
        let grid = StaggeredGrid::graded(0.0, 2.0, 24, 0.5, 1.5).unwrap();
        let p = ProblemSpec::homogeneous(1.5, 0.5, 1.0);
        for method in Method::ALL {
            let r = cn_march(&grid, &p, &SolveConfig::new(method, 10)).unwrap();
            assert!(r.u_final.iter().all(|&u| u == 0.0), "{method:?}");
            assert!(r.p_final.iter().all(|&u| u == 0.0));
            assert!(r.converged());
        }
    }

    #[test]
    fn methods_agree() {
        let grid = StaggeredGrid::perturbed(0.0, 2.0, 40, 0.5, 2).unwrap();
        let p = smooth_problem();
        let runs: Vec<MarchResult> = Method::ALL
            .iter()
            .map(|&m| cn_march(&grid, &p, &SolveConfig::new(m, 20)).unwrap())
            .collect();
        let scale = runs[0].u_final.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for r in &runs[1..] {
            let d = r.u_final.iter().zip(&runs[0].u_final).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(d <= 1e-7 * scale, "{d:e}");
            for (a, b) in r.p_final.iter().zip(&runs[0].p_final) {
                assert!((a - b).abs() <= 1e-5 * (1.0 + b.abs()));
            }
        }
        assert_eq!(runs[2].p_final[0], 0.05);
        assert_eq!(runs[2].p_final[40], -0.1);
    }

    #[test]
    fn apply_accounting() {
        let grid = StaggeredGrid::uniform(0.0, 2.0, 32).unwrap();
        let p = smooth_problem();
        for method in [Method::DenseBicgstab, Method::FastBicgstab] {
            let r = cn_march(&grid, &p, &SolveConfig::new(method, 8)).unwrap();
            assert_eq!(r.iterations.len(), 8);
            let its: usize = r.iterations.iter().sum();
            // Per level: one RHS apply, one initial residual, two per
            // iteration, minus one for each half-step exit.
            assert!(r.operator_applies <= 8 * 2 + 2 * its);
            assert!(r.operator_applies >= 8 * 2 + 2 * its - 8);
            assert!(r.average_iterations() > 0.0);
        }
        let r = cn_march(&grid, &p, &SolveConfig::new(Method::DenseGe, 8)).unwrap();
        assert!(r.iterations.is_empty());
        assert_eq!(r.operator_applies, 0);
    }

    #[test]
    fn deterministic() {
        let grid = StaggeredGrid::graded(0.0, 2.0, 30, 0.5, 2.0).unwrap();
        let p = smooth_problem();
        let cfg = SolveConfig::new(Method::FastBicgstab, 12);
        assert_eq!(cn_march(&grid, &p, &cfg).unwrap(), cn_march(&grid, &p, &cfg).unwrap());
    }

    #[test]
    fn config_errors() {
        let grid = StaggeredGrid::uniform(0.0, 1.0, 8).unwrap();
        let p = smooth_problem();
        let mut cfg = SolveConfig::new(Method::DenseGe, 0);
        assert!(cn_march(&grid, &p, &cfg).is_err());
        cfg.steps = 4;
        cfg.max_iters = Some(0);
        assert!(cn_march(&grid, &p, &cfg).is_err());
        let mut bad = smooth_problem();
        bad.k_left = Box::new(|_, t| 0.1 - t);
        assert!(matches!(
            cn_march(&grid, &bad, &SolveConfig::new(Method::FastBicgstab, 4)),
            Err(Error::InvalidCoefficient { .. })
        ));
        assert_eq!(Method::from_name("fast-bicgstab"), Some(Method::FastBicgstab));
        assert_eq!(Method::from_name("lu"), None);
    }

    #[test]
    fn tight_iteration_cap_is_reported() {
        let grid = StaggeredGrid::graded(0.0, 2.0, 64, 0.5, 2.0).unwrap();
        let p = smooth_problem();
        let mut cfg = SolveConfig::new(Method::FastBicgstab, 4);
        cfg.max_iters = Some(1);
        cfg.rel_tol = 1e-14;
        let r = cn_march(&grid, &p, &cfg).unwrap();
        assert!(!r.converged());
        assert_eq!(r.unconverged_levels, vec![1, 2, 3, 4]);
    }
}
