//! Nonuniform staggered meshes.
//!
//! Cell `i` (0-based) spans `[edges[i], edges[i + 1]]`, has center
//! `centers[i]` and width `widths[i]`. `stag_widths[k]` is the distance
//! between the centers on either side of edge `k`, with half cells at the
//! two domain ends.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::special::{floor, powf};

/// Cells narrower than this fraction of the domain length are rejected.
pub const COLLAPSE_FRACTION: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct StaggeredGrid {
    a: f64,
    b: f64,
    edges: Vec<f64>,
    centers: Vec<f64>,
    widths: Vec<f64>,
    stag_widths: Vec<f64>,
}

impl StaggeredGrid {
    /// Builds a grid from `M + 1` edges, validating every invariant.
    pub fn from_edges(edges: Vec<f64>) -> Result<Self> {
        if edges.len() < 4 {
            return Err(Error::TooFewCells(edges.len().saturating_sub(1)));
        }
        let a = edges[0];
        let b = edges[edges.len() - 1];
        if !(a < b) {
            return Err(Error::DegenerateDomain { a, b });
        }
        let m = edges.len() - 1;
        let mut widths = Vec::with_capacity(m);
        for i in 0..m {
            let w = edges[i + 1] - edges[i];
            if !(w > 0.0) {
                return Err(Error::NonMonotoneEdges(i + 1));
            }
            if w < COLLAPSE_FRACTION * (b - a) {
                return Err(Error::CollapsedCell { index: i, width: w });
            }
            widths.push(w);
        }
        let centers = (0..m).map(|i| 0.5 * (edges[i] + edges[i + 1])).collect();
        let mut stag_widths = Vec::with_capacity(m + 1);
        stag_widths.push(0.5 * widths[0]);
        for i in 1..m {
            stag_widths.push(0.5 * (widths[i - 1] + widths[i]));
        }
        stag_widths.push(0.5 * widths[m - 1]);
        Ok(Self {
            a,
            b,
            edges,
            centers,
            widths,
            stag_widths,
        })
    }

    /// Equally spaced cells of width `(b − a)/M`.
    pub fn uniform(a: f64, b: f64, cells: usize) -> Result<Self> {
        check_domain(a, b, cells)?;
        Self::from_edges(uniform_edges(a, b, cells))
    }

    /// Uniform edges with each interior edge shifted by `h·xi·(λ_i − 1/2)`,
    /// `λ_i` uniform on (0, 1).
    ///
    /// The `λ_i` come from ChaCha8 seeded with `seed` (`seed_from_u64`); each
    /// 64-bit output `r` maps to `((r >> 11) + 1/2)·2⁻⁵³`. Both are stable
    /// across platforms, so a `(a, b, M, xi, seed)` tuple always yields the
    /// same grid.
    pub fn perturbed(a: f64, b: f64, cells: usize, xi: f64, seed: u64) -> Result<Self> {
        check_domain(a, b, cells)?;
        if !(0.0..=1.0).contains(&xi) {
            return Err(Error::PerturbationOutOfRange(xi));
        }
        let h = (b - a) / cells as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges = uniform_edges(a, b, cells);
        for edge in &mut edges[1..cells] {
            let lambda = ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64);
            *edge += h * xi * (lambda - 0.5);
        }
        Self::from_edges(edges)
    }

    /// Two-piece power-law grid clustered at both ends.
    ///
    /// With `m = ⌊split·M⌋`, edge `i ≤ m` sits at `a + split·(b−a)·(i/m)^κ`
    /// and edge `i > m` at `b − (1−split)·(b−a)·((M−i)/(M−m))^κ`.
    /// `kappa = 1` gives the uniform grid.
    pub fn graded(a: f64, b: f64, cells: usize, split: f64, kappa: f64) -> Result<Self> {
        check_domain(a, b, cells)?;
        if !(kappa >= 1.0) {
            return Err(Error::GradingExponent(kappa));
        }
        if !(0.0..=1.0).contains(&split) {
            return Err(Error::GradingSplit(split));
        }
        let len = b - a;
        let m = split_index(split, cells);
        let edges = (0..=cells)
            .map(|i| {
                if i == 0 {
                    a
                } else if i == cells {
                    b
                } else if i <= m {
                    a + split * len * powf(i as f64 / m as f64, kappa)
                } else {
                    let r = (cells - i) as f64 / (cells - m) as f64;
                    b - (1.0 - split) * len * powf(r, kappa)
                }
            })
            .collect();
        Self::from_edges(edges)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Number of cells `M`.
    pub fn cells(&self) -> usize {
        self.widths.len()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn widths(&self) -> &[f64] {
        &self.widths
    }

    pub fn stag_widths(&self) -> &[f64] {
        &self.stag_widths
    }

    /// Largest cell width `h`.
    pub fn max_width(&self) -> f64 {
        self.widths.iter().copied().fold(0.0, f64::max)
    }

    /// Smallest distance between adjacent cell centers.
    pub fn min_interior_stag_width(&self) -> f64 {
        let m = self.cells();
        self.stag_widths[1..m].iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Two-point extrapolation weights `(w_1, w_2)` with `ū(a) = w_1 u_1 + w_2 u_2`.
    pub fn left_extrapolation(&self) -> [f64; 2] {
        let (h1, h2) = (self.widths[0], self.widths[1]);
        [(2.0 * h1 + h2) / (h1 + h2), -h1 / (h1 + h2)]
    }

    /// Two-point extrapolation weights `(w_M, w_{M−1})` with
    /// `ū(b) = w_M u_M + w_{M−1} u_{M−1}`.
    pub fn right_extrapolation(&self) -> [f64; 2] {
        let m = self.cells();
        let (hm, hm1) = (self.widths[m - 1], self.widths[m - 2]);
        [(2.0 * hm + hm1) / (hm1 + hm), -hm / (hm1 + hm)]
    }

    /// Whether the edges are symmetric about the domain midpoint to `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.edges.len();
        (0..n).all(|i| ((self.edges[i] - self.a) - (self.b - self.edges[n - 1 - i])).abs() <= tol)
    }
}

fn check_domain(a: f64, b: f64, cells: usize) -> Result<()> {
    if !(a < b) {
        return Err(Error::DegenerateDomain { a, b });
    }
    if cells < 3 {
        return Err(Error::TooFewCells(cells));
    }
    Ok(())
}

/// `⌊split·M⌋`, taken as the largest `m` with `m/M ≤ split` so that a split
/// written as `k/M` lands exactly on `k` despite rounding in the product.
fn split_index(split: f64, cells: usize) -> usize {
    let n = cells as f64;
    let mut m = (floor(split * n) as usize).min(cells);
    while m < cells && (m + 1) as f64 / n <= split {
        m += 1;
    }
    while m > 0 && m as f64 / n > split {
        m -= 1;
    }
    m
}

fn uniform_edges(a: f64, b: f64, cells: usize) -> Vec<f64> {
    let len = b - a;
    (0..=cells)
        .map(|i| if i == cells { b } else { a + len * (i as f64) / (cells as f64) })
        .collect()
}
