//! Gauss–Legendre and Gauss–Jacobi rules via Golub–Welsch.

use alloc::vec;
use alloc::vec::Vec;

use crate::special::{gamma, powf, sqrt};

/// Nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point Gauss–Legendre rule.
    pub fn legendre(n: usize) -> Self {
        Self::jacobi(n, 0.0, 0.0)
    }

    /// `n`-point Gauss–Jacobi rule for the weight `(1 − s)^a (1 + s)^b`,
    /// `a, b > −1`.
    pub fn jacobi(n: usize, a: f64, b: f64) -> Self {
        assert!(n >= 1 && a > -1.0 && b > -1.0);
        let ab = a + b;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        diag[0] = (b - a) / (ab + 2.0);
        for (k, d) in diag.iter_mut().enumerate().skip(1) {
            let kk = 2.0 * k as f64 + ab;
            *d = (b * b - a * a) / (kk * (kk + 2.0));
        }
        for (k, o) in off.iter_mut().enumerate().take(n).skip(1) {
            let kf = k as f64;
            let kk = 2.0 * kf + ab;
            *o = sqrt(4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (kk * kk * (kk + 1.0) * (kk - 1.0)));
        }
        // off[k] couples rows k-1 and k; shift so off[k] couples k and k+1.
        off.rotate_left(1);
        off[n - 1] = 0.0;
        let mu0 = powf(2.0, ab + 1.0) * gamma(a + 1.0) * gamma(b + 1.0) / gamma(ab + 2.0);
        let (nodes, first) = symmetric_tridiagonal_eigen(diag, off);
        let weights = first.iter().map(|z| mu0 * z * z).collect();
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_lo^hi f` with the rule mapped affinely onto `[lo, hi]`
    /// (meaningful for the Legendre rule).
    pub fn integrate(&self, lo: f64, hi: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(s, w)| w * f(mid + half * s))
            .sum::<f64>()
    }
}

/// Implicit QL on a symmetric tridiagonal matrix. Returns ascending
/// eigenvalues and the first component of each normalized eigenvector.
fn symmetric_tridiagonal_eigen(mut d: Vec<f64>, mut e: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = d.len();
    let mut z = vec![0.0; n];
    z[0] = 1.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            assert!(iter <= 100, "tridiagonal QL failed to converge");
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r } else { -r });
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                let zf = z[i + 1];
                z[i + 1] = s * z[i] + c * zf;
                z[i] = c * z[i] - s * zf;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    (order.iter().map(|&i| d[i]).collect(), order.iter().map(|&i| z[i]).collect())
}
