//! Matrix-free stiffness operator in `O(M·N_exp)` work and memory.
//!
//! Each fractional integral at `x_i` is split into the element adjacent to
//! `x_i` (integrated exactly) and the history, whose kernel is replaced by the
//! sum of exponentials. The history sums `S_{i,s}` then obey one-step
//! recurrences: sweeping left to right for `g^L`,
//!
//! ```text
//! S^L_{i,s} = e^{−λ_s h_{i−1/2}} S^L_{i−1,s} + ρ^L_{i,s} u_{i−2} + σ^L_{i,s} u_{i−1}
//! ```
//!
//! and mirrored right to left for `g^R`. The rows next to the boundary fold in
//! the extrapolated end values.

use alloc::vec;
use alloc::vec::Vec;

use crate::dense::{flux_from_g, ScalingVectors};
use crate::error::{check_alpha, check_len, Error, Result};
use crate::grid::StaggeredGrid;
use crate::problem::{EdgeCoefficients, ProblemSpec};
use crate::quadrature::{left_row, right_row, GammaFactors};
use crate::soe::SoeApproximation;
use crate::special::{element_moments, exp, powf};

/// Precomputed tables for one grid, order and SOE. Only the scalings built
/// from `K` change between time levels.
#[derive(Debug, Clone)]
pub struct FastOperator {
    cells: usize,
    nexp: usize,
    alpha: f64,
    /// `θ_s/Γ(2−α)`.
    weights: Vec<f64>,
    mu_left: Vec<f64>,
    nu_left: Vec<f64>,
    mu_right: Vec<f64>,
    nu_right: Vec<f64>,
    /// `(qL[0,0], qL[0,1])`: the first left row is entirely local.
    first_left: [f64; 2],
    /// `(qR[M−1,M−2], qR[M−1,M−1])`.
    last_right: [f64; 2],
    /// `e^{−λ_s h_{k+1/2}}` for edges `k = 0..=M`, row-major `k × s`.
    decay: Vec<f64>,
    rho_left: Vec<f64>,
    sigma_left: Vec<f64>,
    rho_right: Vec<f64>,
    sigma_right: Vec<f64>,
}

/// Per-call work space for [`FastOperator::apply_into`].
#[derive(Debug, Clone, Default)]
pub struct FastScratch {
    history: Vec<f64>,
    g_left: Vec<f64>,
    g_right: Vec<f64>,
}

impl FastScratch {
    pub fn new(op: &FastOperator) -> Self {
        Self {
            history: vec![0.0; op.nexp],
            g_left: vec![0.0; op.cells],
            g_right: vec![0.0; op.cells],
        }
    }

    fn fit(&mut self, op: &FastOperator) {
        self.history.resize(op.nexp, 0.0);
        self.g_left.resize(op.cells, 0.0);
        self.g_right.resize(op.cells, 0.0);
    }
}

impl FastOperator {
    /// Builds the tables. The SOE must be valid on
    /// `[min interior h_{i+1/2}, b − a]`, the range of history distances.
    pub fn precompute(grid: &StaggeredGrid, alpha: f64, soe: &SoeApproximation) -> Result<Self> {
        check_alpha(alpha)?;
        if soe.alpha != alpha {
            return Err(Error::InvalidSoeParameters("SOE was built for a different alpha"));
        }
        let need_min = grid.min_interior_stag_width();
        let need_max = grid.length();
        if !soe.covers(need_min, need_max) {
            return Err(Error::SoeRange {
                have_min: soe.dx_cut,
                have_max: soe.x_max,
                need_min,
                need_max,
            });
        }

        let m = grid.cells();
        let nexp = soe.len();
        let s = grid.stag_widths();
        let gf = GammaFactors::new(alpha);
        let p2 = 2.0 - alpha;

        let weights = soe.thetas.iter().map(|t| t * gf.inv_gamma2).collect();
        // Local element of width D: ∫₀^D y^{1−α}(y/D) dy/Γ(2−α) and
        // ∫₀^D y^{1−α}(1 − y/D) dy/Γ(2−α).
        let far = |d: f64| (gf.inv_gamma3 - gf.inv_gamma4) * powf(d, p2);
        let near = |d: f64| powf(d, p2) * gf.inv_gamma4;
        let mut mu_left = vec![0.0; m];
        let mut nu_left = vec![0.0; m];
        let mut mu_right = vec![0.0; m];
        let mut nu_right = vec![0.0; m];
        for i in 1..m {
            mu_left[i] = far(s[i]);
            nu_left[i] = near(s[i]);
        }
        for i in 0..m - 1 {
            mu_right[i] = far(s[i + 1]);
            nu_right[i] = near(s[i + 1]);
        }

        let (mut w, mut q) = (Vec::new(), Vec::new());
        left_row(grid, alpha, &gf, 0, &mut w, &mut q);
        let first_left = [q[0], q[1]];
        right_row(grid, alpha, &gf, m - 1, &mut w, &mut q);
        let last_right = [q[0], q[1]];

        let mut decay = vec![0.0; (m + 1) * nexp];
        for k in 0..=m {
            for (d, lam) in decay[k * nexp..(k + 1) * nexp].iter_mut().zip(&soe.lambdas) {
                *d = exp(-lam * s[k]);
            }
        }

        // η = e^{−λD}·H·E(λH) weighs the far end of a history element of
        // width H seen at distance D, ζ = e^{−λD}·H·Z(λH) the near end.
        // Element k (width h_k) is the history of left row k + 1 and of
        // right row k − 2, so its moments are needed only once.
        let mut rho_left = vec![0.0; m * nexp];
        let mut sigma_left = vec![0.0; m * nexp];
        let mut rho_right = vec![0.0; m * nexp];
        let mut sigma_right = vec![0.0; m * nexp];
        let [l1, l2] = grid.left_extrapolation();
        let [r1, r2] = grid.right_extrapolation();
        let mut mom_far = vec![0.0; nexp];
        let mut mom_near = vec![0.0; nexp];
        for k in 0..=m {
            for ((lam, e), z) in soe.lambdas.iter().zip(&mut mom_far).zip(&mut mom_near) {
                let (ee, zz) = element_moments(lam * s[k]);
                *e = s[k] * ee;
                *z = s[k] * zz;
            }
            // Left row i = k + 1: element [x_{i−2}, x_{i−1}] (or [a, x_0]
            // when i = 1) at distance D = h_{i−1/2}.
            let i = k + 1;
            if i < m {
                for j in 0..nexp {
                    let dec = decay[i * nexp + j];
                    let (eta, zeta) = (dec * mom_far[j], dec * mom_near[j]);
                    let (rho, sigma) = if i == 1 { (l1 * eta + zeta, l2 * eta) } else { (eta, zeta) };
                    rho_left[i * nexp + j] = rho;
                    sigma_left[i * nexp + j] = sigma;
                }
            }
            // Right row i = k − 2: element [x_{i+1}, x_{i+2}] (or
            // [x_{M−1}, b]) at distance D = h_{i+3/2}.
            if k >= 2 && k - 2 < m - 1 {
                let i = k - 2;
                for j in 0..nexp {
                    let dec = decay[(i + 1) * nexp + j];
                    let (eta, zeta) = (dec * mom_far[j], dec * mom_near[j]);
                    // ρ multiplies the far value, σ the near one; at the last
                    // row the far value is the extrapolation r1·u_{M−1} + r2·u_{M−2}.
                    let (rho, sigma) = if i == m - 2 { (r2 * eta, r1 * eta + zeta) } else { (eta, zeta) };
                    rho_right[i * nexp + j] = rho;
                    sigma_right[i * nexp + j] = sigma;
                }
            }
        }

        Ok(Self {
            cells: m,
            nexp,
            alpha,
            weights,
            mu_left,
            nu_left,
            mu_right,
            nu_right,
            first_left,
            last_right,
            decay,
            rho_left,
            sigma_left,
            rho_right,
            sigma_right,
        })
    }

    pub fn cells(&self) -> usize {
        self.cells
    }

    pub fn nexp(&self) -> usize {
        self.nexp
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Bytes held by the tables.
    pub fn table_bytes(&self) -> usize {
        let f = core::mem::size_of::<f64>();
        f * (self.weights.len()
            + 4 * self.cells
            + self.decay.len()
            + self.rho_left.len()
            + self.sigma_left.len()
            + self.rho_right.len()
            + self.sigma_right.len())
    }

    pub fn mu_left(&self) -> &[f64] {
        &self.mu_left
    }

    pub fn nu_left(&self) -> &[f64] {
        &self.nu_left
    }

    pub fn mu_right(&self) -> &[f64] {
        &self.mu_right
    }

    pub fn nu_right(&self) -> &[f64] {
        &self.nu_right
    }

    /// `(ρ^L_{i,·}, σ^L_{i,·})`; row 0 is unused.
    pub fn left_history_row(&self, i: usize) -> (&[f64], &[f64]) {
        let r = i * self.nexp..(i + 1) * self.nexp;
        (&self.rho_left[r.clone()], &self.sigma_left[r])
    }

    /// `(ρ^R_{i,·}, σ^R_{i,·})`; row M−1 is unused.
    pub fn right_history_row(&self, i: usize) -> (&[f64], &[f64]) {
        let r = i * self.nexp..(i + 1) * self.nexp;
        (&self.rho_right[r.clone()], &self.sigma_right[r])
    }

    /// `e^{−λ_s h_{k+1/2}}` for edge `k` (0-based, `k = 0..=M`).
    pub fn decay_row(&self, k: usize) -> &[f64] {
        &self.decay[k * self.nexp..(k + 1) * self.nexp]
    }

    fn sweep_left(&self, u: &[f64], hist: &mut [f64], g: &mut [f64]) {
        let m = self.cells;
        let n = self.nexp;
        g[0] = self.first_left[0] * u[0] + self.first_left[1] * u[1];
        hist.fill(0.0);
        for i in 1..m {
            let dec = &self.decay[i * n..(i + 1) * n];
            let rho = &self.rho_left[i * n..(i + 1) * n];
            let sig = &self.sigma_left[i * n..(i + 1) * n];
            // Row 1 couples u_0, u_1 through the extrapolated end value.
            let (ua, ub) = if i == 1 { (u[0], u[1]) } else { (u[i - 2], u[i - 1]) };
            let mut acc = 0.0;
            for j in 0..n {
                let v = dec[j] * hist[j] + rho[j] * ua + sig[j] * ub;
                hist[j] = v;
                acc += self.weights[j] * v;
            }
            g[i] = acc + self.mu_left[i] * u[i - 1] + self.nu_left[i] * u[i];
        }
    }

    fn sweep_right(&self, u: &[f64], hist: &mut [f64], g: &mut [f64]) {
        let m = self.cells;
        let n = self.nexp;
        g[m - 1] = self.last_right[0] * u[m - 2] + self.last_right[1] * u[m - 1];
        hist.fill(0.0);
        for i in (0..m - 1).rev() {
            let dec = &self.decay[(i + 1) * n..(i + 2) * n];
            let rho = &self.rho_right[i * n..(i + 1) * n];
            let sig = &self.sigma_right[i * n..(i + 1) * n];
            let (far, near) = if i == m - 2 { (u[m - 2], u[m - 1]) } else { (u[i + 2], u[i + 1]) };
            let mut acc = 0.0;
            for j in 0..n {
                let v = dec[j] * hist[j] + rho[j] * far + sig[j] * near;
                hist[j] = v;
                acc += self.weights[j] * v;
            }
            g[i] = acc + self.mu_right[i] * u[i + 1] + self.nu_right[i] * u[i];
        }
    }

    /// Fast `g^L` at every cell center.
    pub fn fast_g_left(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cells, u.len())?;
        let mut g = vec![0.0; self.cells];
        self.sweep_left(u, &mut vec![0.0; self.nexp], &mut g);
        Ok(g)
    }

    /// Fast `g^R` at every cell center.
    pub fn fast_g_right(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cells, u.len())?;
        let mut g = vec![0.0; self.cells];
        self.sweep_right(u, &mut vec![0.0; self.nexp], &mut g);
        Ok(g)
    }

    /// `out = B v` with the scalings of one time level. A side whose weight
    /// (`γ` or `1 − γ`) is zero is skipped entirely.
    pub fn apply_into(&self, scaling: &ScalingVectors, gamma: f64, v: &[f64], out: &mut [f64], scratch: &mut FastScratch) {
        let m = self.cells;
        scratch.fit(self);
        out[..m].fill(0.0);
        let FastScratch { history, g_left, g_right } = scratch;
        if gamma != 0.0 {
            self.sweep_left(v, history, g_left);
            add_divergence(out, g_left, gamma, &scaling.plus_left, &scaling.minus_left);
        }
        if gamma != 1.0 {
            self.sweep_right(v, history, g_right);
            add_divergence(out, g_right, 1.0 - gamma, &scaling.plus_right, &scaling.minus_right);
        }
    }

    /// `B^n v` with `K` sampled at time `t`.
    pub fn apply(&self, problem: &ProblemSpec, grid: &StaggeredGrid, t: f64, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cells, v.len())?;
        let scaling = ScalingVectors::at_time(grid, problem, t)?;
        let mut out = vec![0.0; self.cells];
        self.apply_into(&scaling, problem.gamma, v, &mut out, &mut FastScratch::new(self));
        Ok(out)
    }

    /// Edge fluxes from the fast `g` values; boundary entries are the data.
    pub fn recover_flux(&self, grid: &StaggeredGrid, problem: &ProblemSpec, u: &[f64], t: f64) -> Result<Vec<f64>> {
        check_len(self.cells, u.len())?;
        let k = problem.edge_coefficients(grid, t)?;
        self.flux_with(grid, &k, problem.gamma, u, (problem.phi)(t), (problem.varphi)(t))
    }

    fn flux_with(&self, grid: &StaggeredGrid, k: &EdgeCoefficients, gamma: f64, u: &[f64], lf: f64, rf: f64) -> Result<Vec<f64>> {
        let gl = self.fast_g_left(u)?;
        let gr = self.fast_g_right(u)?;
        Ok(flux_from_g(grid, k, gamma, &gl, &gr, lf, rf))
    }
}

/// `out[i] += w·(plus[i](g[i+1] − g[i]) − minus[i](g[i] − g[i−1]))`.
fn add_divergence(out: &mut [f64], g: &[f64], w: f64, plus: &[f64], minus: &[f64]) {
    let m = g.len();
    for i in 0..m {
        let fwd = if i + 1 < m { plus[i] * (g[i + 1] - g[i]) } else { 0.0 };
        let bwd = if i > 0 { minus[i] * (g[i] - g[i - 1]) } else { 0.0 };
        out[i] += w * (fwd - bwd);
    }
}
