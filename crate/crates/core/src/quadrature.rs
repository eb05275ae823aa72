//! Quadrature of the left and right Riemann–Liouville integrals of order
//! `2 − α` applied to the piecewise-linear interpolant of cell-center values.
//!
//! The interpolant runs through `(x_i, u_i)` and is closed off at `a` and `b`
//! by two-point extrapolation, so
//!
//! ```text
//! g^L_i = Σ_j qL[i, j] u_j   ≈ (1/Γ(2−α)) ∫_a^{x_i} (x_i − ξ)^{1−α} u(ξ) dξ
//! g^R_i = Σ_j qR[i, j] u_j   ≈ (1/Γ(2−α)) ∫_{x_i}^b (ξ − x_i)^{1−α} u(ξ) dξ
//! ```
//!
//! Row `i` of `qL` covers columns `0..=max(i, 1)`; row `i` of `qR` covers
//! `min(i, M−2)..M`. The extra column in the first (last) row comes from the
//! boundary extrapolation.

use alloc::vec::Vec;

use crate::error::{check_alpha, check_len, Result};
use crate::grid::StaggeredGrid;
use crate::special::{gamma, pow_diff, powf};

/// Rows with one contiguous band of stored columns each.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedRows {
    first_col: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl BandedRows {
    fn with_rows(rows: usize) -> Self {
        Self {
            first_col: Vec::with_capacity(rows),
            offsets: {
                let mut v = Vec::with_capacity(rows + 1);
                v.push(0);
                v
            },
            data: Vec::new(),
        }
    }

    fn push_row(&mut self, first_col: usize, values: impl IntoIterator<Item = f64>) {
        self.first_col.push(first_col);
        self.data.extend(values);
        self.offsets.push(self.data.len());
    }

    pub fn rows(&self) -> usize {
        self.first_col.len()
    }

    /// First stored column of `row` and the stored values.
    pub fn row(&self, row: usize) -> (usize, &[f64]) {
        (self.first_col[row], &self.data[self.offsets[row]..self.offsets[row + 1]])
    }

    /// Entry `(row, col)`, zero outside the stored band.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (first, values) = self.row(row);
        if col < first {
            return 0.0;
        }
        values.get(col - first).copied().unwrap_or(0.0)
    }

    pub fn row_dot(&self, row: usize, u: &[f64]) -> f64 {
        let (first, values) = self.row(row);
        values.iter().zip(&u[first..]).map(|(q, x)| q * x).sum()
    }

    pub fn row_sum(&self, row: usize) -> f64 {
        self.row(row).1.iter().sum()
    }
}

/// Gamma-function constants shared by the quadrature and the fast operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct GammaFactors {
    pub inv_gamma2: f64,
    pub inv_gamma3: f64,
    pub inv_gamma4: f64,
}

impl GammaFactors {
    pub fn new(alpha: f64) -> Self {
        Self {
            inv_gamma2: 1.0 / gamma(2.0 - alpha),
            inv_gamma3: 1.0 / gamma(3.0 - alpha),
            inv_gamma4: 1.0 / gamma(4.0 - alpha),
        }
    }
}

/// Coefficient tables for one side.
#[derive(Debug, Clone, PartialEq)]
pub struct SideCoefficients {
    pub alpha: f64,
    /// `q[i, j]`, the weight of `u_j` in `g_i`.
    pub q: BandedRows,
    /// The auxiliary `ω[i, j]` tables the `q` entries are built from.
    pub omega: BandedRows,
}

impl SideCoefficients {
    pub fn cells(&self) -> usize {
        self.q.rows()
    }

    /// `g_i = Σ_j q[i, j] u_j` for every row; `O(M²)`.
    pub fn eval(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cells(), u.len())?;
        Ok((0..self.cells()).map(|i| self.q.row_dot(i, u)).collect())
    }
}

/// Left and right tables for one grid and order.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectCoefficients {
    pub left: SideCoefficients,
    pub right: SideCoefficients,
}

impl DirectCoefficients {
    pub fn new(grid: &StaggeredGrid, alpha: f64) -> Result<Self> {
        Ok(Self {
            left: build_left_coefficients(grid, alpha)?,
            right: build_right_coefficients(grid, alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.left.alpha
    }

    pub fn cells(&self) -> usize {
        self.left.cells()
    }
}

/// Row `i` of the left tables: `ω` into `w` (columns `0..=i`), `q` into `q`
/// (columns `0..=max(i, 1)`).
pub(crate) fn left_row(grid: &StaggeredGrid, alpha: f64, gf: &GammaFactors, i: usize, w: &mut Vec<f64>, q: &mut Vec<f64>) {
    let x = grid.centers();
    let h = grid.widths();
    let s = grid.stag_widths();
    let a = grid.a();
    let p3 = 3.0 - alpha;
    let c2 = h[0] / (h[0] + h[1]);
    let c1 = (2.0 * h[0] + h[1]) / (h[0] + h[1]);

    // ω[i, 0] spans [a, x_0]; ω[i, j] spans [x_{j-1}, x_j] for 1 ≤ j ≤ i.
    w.clear();
    w.push(-pow_diff(x[i] - a, x[i] - x[0], p3) * gf.inv_gamma4 / s[0]);
    for j in 1..=i {
        w.push(-pow_diff(x[i] - x[j - 1], x[i] - x[j], p3) * gf.inv_gamma4 / s[j]);
    }
    let wj = |j: usize| w.get(j).copied().unwrap_or(0.0);
    let edge = powf(x[i] - a, 2.0 - alpha) * gf.inv_gamma3;
    q.clear();
    q.extend((0..=i.max(1)).map(|j| match j {
        0 => c1 * edge + c2 * wj(0) + wj(1),
        1 => -c2 * edge - c2 * wj(0) - wj(1) + wj(2),
        _ => wj(j + 1) - wj(j),
    }));
}

/// Row `i` of the right tables: `ω` into `w` (columns `i..M`), `q` into `q`
/// (columns `min(i, M−2)..M`). Returns the first `q` column.
pub(crate) fn right_row(grid: &StaggeredGrid, alpha: f64, gf: &GammaFactors, i: usize, w: &mut Vec<f64>, q: &mut Vec<f64>) -> usize {
    let m = grid.cells();
    let x = grid.centers();
    let h = grid.widths();
    let s = grid.stag_widths();
    let b = grid.b();
    let p3 = 3.0 - alpha;
    let c2 = h[m - 1] / (h[m - 2] + h[m - 1]);
    let c1 = (2.0 * h[m - 1] + h[m - 2]) / (h[m - 2] + h[m - 1]);

    // ω[i, j] spans [x_j, x_{j+1}] for i ≤ j ≤ M−2, ω[i, M−1] spans [x_{M−1}, b].
    w.clear();
    for j in i..m - 1 {
        w.push(pow_diff(x[j + 1] - x[i], x[j] - x[i], p3) * gf.inv_gamma4 / s[j + 1]);
    }
    w.push(pow_diff(b - x[i], x[m - 1] - x[i], p3) * gf.inv_gamma4 / s[m]);
    let wj = |j: usize| if j < i { 0.0 } else { w[j - i] };
    let before = |j: usize| if j == 0 { 0.0 } else { wj(j - 1) };
    let edge = powf(b - x[i], 2.0 - alpha) * gf.inv_gamma3;
    let first = i.min(m - 2);
    q.clear();
    q.extend((first..m).map(|j| {
        if j + 2 < m {
            wj(j) - before(j)
        } else if j + 2 == m {
            -c2 * edge - before(j) + wj(j) + c2 * wj(m - 1)
        } else {
            c1 * edge - wj(m - 2) - c2 * wj(m - 1)
        }
    }));
    first
}

/// Left-sided tables `qL`, `ωL`.
pub fn build_left_coefficients(grid: &StaggeredGrid, alpha: f64) -> Result<SideCoefficients> {
    check_alpha(alpha)?;
    let m = grid.cells();
    let gf = GammaFactors::new(alpha);
    let mut omega = BandedRows::with_rows(m);
    let mut q = BandedRows::with_rows(m);
    let (mut w, mut row) = (Vec::with_capacity(m + 1), Vec::with_capacity(m));
    for i in 0..m {
        left_row(grid, alpha, &gf, i, &mut w, &mut row);
        q.push_row(0, row.iter().copied());
        omega.push_row(0, w.iter().copied());
    }
    Ok(SideCoefficients { alpha, q, omega })
}

/// Right-sided tables `qR`, `ωR`.
pub fn build_right_coefficients(grid: &StaggeredGrid, alpha: f64) -> Result<SideCoefficients> {
    check_alpha(alpha)?;
    let m = grid.cells();
    let gf = GammaFactors::new(alpha);
    let mut omega = BandedRows::with_rows(m);
    let mut q = BandedRows::with_rows(m);
    let (mut w, mut row) = (Vec::with_capacity(m), Vec::with_capacity(m));
    for i in 0..m {
        let first = right_row(grid, alpha, &gf, i, &mut w, &mut row);
        q.push_row(first, row.iter().copied());
        omega.push_row(i, w.iter().copied());
    }
    Ok(SideCoefficients { alpha, q, omega })
}

/// `g^L` at every cell center.
pub fn eval_g_left(coeffs: &DirectCoefficients, u: &[f64]) -> Result<Vec<f64>> {
    coeffs.left.eval(u)
}

/// `g^R` at every cell center.
pub fn eval_g_right(coeffs: &DirectCoefficients, u: &[f64]) -> Result<Vec<f64>> {
    coeffs.right.eval(u)
}
