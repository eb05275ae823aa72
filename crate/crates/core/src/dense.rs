//! Explicitly assembled stiffness matrix, Crank–Nicolson system matrices and
//! a dense LU solver. This is the `O(M²)` reference path.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, Error, Result};
use crate::grid::StaggeredGrid;
use crate::problem::{EdgeCoefficients, ProblemSpec};
use crate::quadrature::{BandedRows, DirectCoefficients};

/// Row-major square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        check_len(n * n, data.len())?;
        Ok(Self { n, data })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec_into(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            *o = self.row(i).iter().zip(v).map(|(a, b)| a * b).sum();
        }
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(v, &mut out);
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

impl core::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.n + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.n + j]
    }
}

/// The diagonal scalings `D±^{L,n}`, `D±^{R,n}`:
/// `plus[i] = K_{i+1/2}/(h_{i+1/2} h_i)` and `minus[i] = K_{i−1/2}/(h_{i−1/2} h_i)`
/// in 1-based edge notation, with `minus[0] = plus[M−1] = 0` because the
/// boundary fluxes are data.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingVectors {
    pub plus_left: Vec<f64>,
    pub minus_left: Vec<f64>,
    pub plus_right: Vec<f64>,
    pub minus_right: Vec<f64>,
}

impl ScalingVectors {
    pub fn new(grid: &StaggeredGrid, k: &EdgeCoefficients) -> Self {
        let m = grid.cells();
        let h = grid.widths();
        let s = grid.stag_widths();
        let plus = |kk: &[f64]| -> Vec<f64> {
            (0..m).map(|i| if i + 1 < m { kk[i + 1] / (s[i + 1] * h[i]) } else { 0.0 }).collect()
        };
        let minus = |kk: &[f64]| -> Vec<f64> {
            (0..m).map(|i| if i > 0 { kk[i] / (s[i] * h[i]) } else { 0.0 }).collect()
        };
        Self {
            plus_left: plus(&k.left),
            minus_left: minus(&k.left),
            plus_right: plus(&k.right),
            minus_right: minus(&k.right),
        }
    }

    pub fn at_time(grid: &StaggeredGrid, problem: &ProblemSpec, t: f64) -> Result<Self> {
        Ok(Self::new(grid, &problem.edge_coefficients(grid, t)?))
    }
}

/// `A^n` together with the scalings it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStiffness {
    pub a: DenseMatrix,
    pub scaling: ScalingVectors,
}

fn add_row(dst: &mut [f64], table: &BandedRows, row: usize, scale: f64) {
    if scale == 0.0 {
        return;
    }
    let (first, values) = table.row(row);
    for (d, q) in dst[first..].iter_mut().zip(values) {
        *d += scale * q;
    }
}

/// Adds `plus[i]·(q_{i+1} − q_i) − minus[i]·(q_i − q_{i−1})` to `dst`.
fn add_side(dst: &mut [f64], q: &BandedRows, i: usize, plus: f64, minus: f64) {
    let m = q.rows();
    if i + 1 < m {
        add_row(dst, q, i + 1, plus);
    }
    add_row(dst, q, i, -plus - minus);
    if i > 0 {
        add_row(dst, q, i - 1, minus);
    }
}

/// Assembles `A^n = γ[D+^L A+^L − D−^L A−^L] + (1−γ)[D+^R A+^R − D−^R A−^R]`
/// with `K` sampled at the grid edges at time `t`.
pub fn assemble_stiffness(
    grid: &StaggeredGrid,
    coeffs: &DirectCoefficients,
    problem: &ProblemSpec,
    t: f64,
) -> Result<DenseStiffness> {
    check_len(grid.cells(), coeffs.cells())?;
    let scaling = ScalingVectors::at_time(grid, problem, t)?;
    Ok(DenseStiffness {
        a: assemble_with_scaling(coeffs, &scaling, problem.gamma),
        scaling,
    })
}

pub fn assemble_with_scaling(coeffs: &DirectCoefficients, sc: &ScalingVectors, gamma: f64) -> DenseMatrix {
    let m = coeffs.cells();
    let mut a = DenseMatrix::zeros(m);
    for i in 0..m {
        let row = a.row_mut(i);
        add_side(row, &coeffs.left.q, i, gamma * sc.plus_left[i], gamma * sc.minus_left[i]);
        let g = 1.0 - gamma;
        add_side(row, &coeffs.right.q, i, g * sc.plus_right[i], g * sc.minus_right[i]);
    }
    a
}

/// `(I − τ/2·A^n, I + τ/2·A^{n−1})`.
pub fn cn_system_matrices(a_n: &DenseMatrix, a_nm1: &DenseMatrix, tau: f64) -> Result<(DenseMatrix, DenseMatrix)> {
    let n = a_n.order();
    check_len(n, a_nm1.order())?;
    let mut lhs = a_n.clone();
    let mut rhs = a_nm1.clone();
    for (l, r) in lhs.data.iter_mut().zip(rhs.data.iter_mut()) {
        *l *= -0.5 * tau;
        *r *= 0.5 * tau;
    }
    for i in 0..n {
        lhs[(i, i)] += 1.0;
        rhs[(i, i)] += 1.0;
    }
    Ok((lhs, rhs))
}

/// LU factors with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(mut a: DenseMatrix) -> Result<Self> {
        let n = a.order();
        let tiny = a.max_abs() * f64::EPSILON;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, a[(i, k)].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pivot <= tiny || !pivot.is_finite() {
                return Err(Error::SingularPivot(k));
            }
            if p != k {
                perm.swap(p, k);
                for j in 0..n {
                    a.data.swap(p * n + j, k * n + j);
                }
            }
            let (upper, lower) = a.data.split_at_mut((k + 1) * n);
            let pivot_row = &upper[k * n..];
            let inv = 1.0 / pivot_row[k];
            for row in lower.chunks_exact_mut(n) {
                let l = row[k] * inv;
                row[k] = l;
                if l != 0.0 {
                    for (x, u) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.order();
        check_len(n, rhs.len())?;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let s: f64 = row[i + 1..].iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }
}

/// Solves `lhs · x = rhs` by Gaussian elimination with partial pivoting.
pub fn dense_lu_solve(lhs: &DenseMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_len(lhs.order(), rhs.len())?;
    LuFactors::factor(lhs.clone())?.solve(rhs)
}

/// Edge fluxes `p_{i+1/2}` at time `t` from the direct `g` evaluation.
/// The two boundary entries are the prescribed data.
pub fn recover_flux(
    grid: &StaggeredGrid,
    coeffs: &DirectCoefficients,
    problem: &ProblemSpec,
    u: &[f64],
    t: f64,
) -> Result<Vec<f64>> {
    let gl = coeffs.left.eval(u)?;
    let gr = coeffs.right.eval(u)?;
    let k = problem.edge_coefficients(grid, t)?;
    Ok(flux_from_g(grid, &k, problem.gamma, &gl, &gr, (problem.phi)(t), (problem.varphi)(t)))
}

pub(crate) fn flux_from_g(
    grid: &StaggeredGrid,
    k: &EdgeCoefficients,
    gamma: f64,
    gl: &[f64],
    gr: &[f64],
    left_flux: f64,
    right_flux: f64,
) -> Vec<f64> {
    let m = grid.cells();
    let s = grid.stag_widths();
    let mut p = vec![0.0; m + 1];
    p[0] = left_flux;
    p[m] = right_flux;
    for e in 1..m {
        p[e] = (gamma * k.left[e] * (gl[e] - gl[e - 1]) + (1.0 - gamma) * k.right[e] * (gr[e] - gr[e - 1])) / s[e];
    }
    p
}
