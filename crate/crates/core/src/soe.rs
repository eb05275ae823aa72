//! Sum-of-exponentials approximation of the kernel `x^{1−α}` on `[Δx, X]`.
//!
//! With `β = α − 1 ∈ (0, 1)`,
//!
//! ```text
//! x^{−β} = (1/Γ(β)) ∫₀^∞ e^{−x t} t^{β−1} dt .
//! ```
//!
//! The `t` axis is cut at `T` where the tail drops below `ε/20` for every
//! `x ≥ Δx`, and `[0, T]` is split into the panel `[0, 2^{j₀}]` with
//! `2^{j₀} ≤ 1/X` (Gauss–Jacobi, absorbing `t^{β−1}`) followed by dyadic
//! panels `[2^j, 2^{j+1}]` (Gauss–Legendre). Each panel gets the fewest nodes
//! that keep its error within its share of `ε/2`, and a final pass drops the
//! smallest terms while their summed worst-case size stays below `ε/10`.

use alloc::vec::Vec;

use crate::error::{check_alpha, Error, Result};
use crate::gauss::GaussRule;
use crate::special::{exp, floor, gamma, powf};

/// Largest number of exponentials [`build_soe`] will return.
pub const MAX_NODES: usize = 4096;

/// Points in the geometric sample used to certify the tolerance.
pub const CHECK_SAMPLES: usize = 10_000;

const REFERENCE_NODES: usize = 96;
const MAX_PANEL_NODES: usize = 64;
const LATTICE_PER_OCTAVE: f64 = 16.0;

/// `x^{1−α} ≈ Σ_s θ_s e^{−λ_s x}` for `x ∈ [dx_cut, x_max]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoeApproximation {
    pub alpha: f64,
    pub eps: f64,
    pub dx_cut: f64,
    pub x_max: f64,
    pub lambdas: Vec<f64>,
    pub thetas: Vec<f64>,
}

impl SoeApproximation {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `Σ_s θ_s e^{−λ_s x}`.
    pub fn eval(&self, x: f64) -> f64 {
        sum_exponentials(&self.lambdas, &self.thetas, x)
    }

    /// Largest `|x^{1−α} − eval(x)|` over `samples` geometric points of
    /// `[dx_cut, x_max]`.
    pub fn max_sampled_error(&self, samples: usize) -> f64 {
        max_error(&self.lambdas, &self.thetas, 1.0 - self.alpha, self.dx_cut, self.x_max, samples)
    }

    /// Whether the approximation is valid on `[lo, hi]`.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        self.dx_cut <= lo && hi <= self.x_max
    }
}

/// Evaluates `Σ_s θ_s e^{−λ_s x}`; same as [`SoeApproximation::eval`].
pub fn eval_soe(soe: &SoeApproximation, x: f64) -> f64 {
    soe.eval(x)
}

fn sum_exponentials(lambdas: &[f64], thetas: &[f64], x: f64) -> f64 {
    lambdas.iter().zip(thetas).map(|(l, t)| t * exp(-l * x)).sum()
}

fn geometric(lo: f64, hi: f64, k: usize, n: usize) -> f64 {
    if k + 1 == n {
        hi
    } else {
        lo * powf(hi / lo, k as f64 / (n - 1) as f64)
    }
}

fn max_error(lambdas: &[f64], thetas: &[f64], p: f64, lo: f64, hi: f64, samples: usize) -> f64 {
    (0..samples)
        .map(|k| {
            let x = geometric(lo, hi, k, samples);
            (powf(x, p) - sum_exponentials(lambdas, thetas, x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Sample points for sizing panels: the endpoints plus a fixed global
/// lattice `2^{k/16}`, so enlarging the range only adds points.
fn sizing_points(lo: f64, hi: f64) -> Vec<f64> {
    let k0 = libm::ceil(libm::log2(lo) * LATTICE_PER_OCTAVE) as i64;
    let k1 = floor(libm::log2(hi) * LATTICE_PER_OCTAVE) as i64;
    let mut xs = Vec::with_capacity((k1 - k0 + 3).max(2) as usize);
    xs.push(lo);
    xs.extend((k0..=k1).map(|k| powf(2.0, k as f64 / LATTICE_PER_OCTAVE)).filter(|&x| x > lo && x < hi));
    xs.push(hi);
    xs
}

struct Panel {
    lo: f64,
    hi: f64,
}

impl Panel {
    /// Nodes and weights of `(1/Γ(β)) ∫_lo^hi e^{−xt} t^{β−1} dt` for an
    /// `n`-point rule.
    fn nodes(&self, n: usize, beta: f64, inv_gamma_beta: f64, rules: &mut RuleCache) -> (Vec<f64>, Vec<f64>) {
        if self.lo == 0.0 {
            let rule = rules.jacobi(n, beta - 1.0);
            let half = 0.5 * self.hi;
            let scale = powf(half, beta) * inv_gamma_beta;
            rule.nodes.iter().zip(&rule.weights).map(|(s, w)| (half * (1.0 + s), scale * w)).unzip()
        } else {
            let rule = rules.legendre(n);
            let mid = 0.5 * (self.lo + self.hi);
            let half = 0.5 * (self.hi - self.lo);
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(|(s, w)| {
                    let t = mid + half * s;
                    (t, half * w * powf(t, beta - 1.0) * inv_gamma_beta)
                })
                .unzip()
        }
    }
}

#[derive(Default)]
struct RuleCache {
    legendre: Vec<Option<GaussRule>>,
    jacobi: Vec<Option<GaussRule>>,
}

impl RuleCache {
    fn get(cache: &mut Vec<Option<GaussRule>>, n: usize, make: impl FnOnce() -> GaussRule) -> &GaussRule {
        if cache.len() <= n {
            cache.resize(n + 1, None);
        }
        cache[n].get_or_insert_with(make)
    }

    fn legendre(&mut self, n: usize) -> &GaussRule {
        Self::get(&mut self.legendre, n, || GaussRule::legendre(n))
    }

    fn jacobi(&mut self, n: usize, b: f64) -> &GaussRule {
        Self::get(&mut self.jacobi, n, || GaussRule::jacobi(n, 0.0, b))
    }
}

/// Builds an approximation of `x^{1−α}` on `[dx_cut, x_max]` with absolute
/// error at most `eps`, certified on [`CHECK_SAMPLES`] geometric points.
pub fn build_soe(alpha: f64, eps: f64, dx_cut: f64, x_max: f64) -> Result<SoeApproximation> {
    check_alpha(alpha)?;
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::InvalidSoeParameters("eps must be positive"));
    }
    if !(dx_cut > 0.0 && dx_cut < x_max && x_max.is_finite()) {
        return Err(Error::InvalidSoeParameters("need 0 < dx_cut < x_max"));
    }
    // Rounding in the sum can exceed the budget near Δx, where the kernel is
    // largest; tighten the construction a few times before giving up.
    let mut target = eps;
    let mut achieved = f64::INFINITY;
    for _ in 0..4 {
        let (lambdas, thetas) = construct(alpha, target, dx_cut, x_max)?;
        if lambdas.len() > MAX_NODES {
            return Err(Error::SoeNodeCap { cap: MAX_NODES, eps });
        }
        let err = max_error(&lambdas, &thetas, 1.0 - alpha, dx_cut, x_max, CHECK_SAMPLES);
        if err <= eps {
            return Ok(SoeApproximation { alpha, eps, dx_cut, x_max, lambdas, thetas });
        }
        achieved = achieved.min(err);
        target *= 0.25;
    }
    Err(Error::SoePrecision { eps, achieved })
}

fn construct(alpha: f64, eps: f64, dx: f64, x_max: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let beta = alpha - 1.0;
    let inv_gamma_beta = 1.0 / gamma(beta);

    // Tail ∫_T^∞ e^{−xt} t^{β−1} dt / Γ(β) ≤ T^{β−1} e^{−Δx T} / (Δx Γ(β)).
    let j0 = floor(-libm::log2(x_max)) as i32;
    let mut j_end = j0 + 1;
    loop {
        let t = powf(2.0, j_end as f64);
        if powf(t, beta - 1.0) * exp(-dx * t) * inv_gamma_beta / dx <= eps / 20.0 {
            break;
        }
        j_end += 1;
        if j_end > j0 + 1100 {
            return Err(Error::InvalidSoeParameters("tail cutoff out of range"));
        }
    }

    let mut panels = Vec::with_capacity((j_end - j0) as usize);
    panels.push(Panel { lo: 0.0, hi: powf(2.0, j0 as f64) });
    for j in j0..j_end {
        panels.push(Panel { lo: powf(2.0, j as f64), hi: powf(2.0, (j + 1) as f64) });
    }

    let xs = sizing_points(dx, x_max);
    let budget = 0.5 * eps / panels.len() as f64;
    let mut rules = RuleCache::default();
    let mut lambdas = Vec::new();
    let mut thetas = Vec::new();
    for panel in &panels {
        let (rl, rt) = panel.nodes(REFERENCE_NODES, beta, inv_gamma_beta, &mut rules);
        let reference: Vec<f64> = xs.iter().map(|&x| sum_exponentials(&rl, &rt, x)).collect();
        let mut chosen = None;
        for n in 1..=MAX_PANEL_NODES {
            let (l, t) = panel.nodes(n, beta, inv_gamma_beta, &mut rules);
            let err = xs
                .iter()
                .zip(&reference)
                .map(|(&x, r)| (sum_exponentials(&l, &t, x) - r).abs())
                .fold(0.0, f64::max);
            if err <= budget {
                chosen = Some((l, t));
                break;
            }
        }
        let (l, t) = chosen.unwrap_or((rl, rt));
        lambdas.extend(l);
        thetas.extend(t);
    }

    // Drop the terms with the smallest worst-case contribution θ e^{−λΔx}.
    let mut order: Vec<usize> = (0..lambdas.len()).collect();
    let size = |k: usize| thetas[k] * exp(-lambdas[k] * dx);
    order.sort_by(|&i, &j| size(i).total_cmp(&size(j)).then(i.cmp(&j)));
    let mut dropped = 0.0;
    let mut keep = alloc::vec![true; lambdas.len()];
    for &k in &order {
        dropped += size(k);
        if dropped > 0.1 * eps {
            break;
        }
        keep[k] = false;
    }
    let mut terms: Vec<(f64, f64)> = lambdas
        .into_iter()
        .zip(thetas)
        .zip(keep)
        .filter_map(|(lt, k)| k.then_some(lt))
        .collect();
    terms.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(terms.into_iter().unzip())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_case_meets_tolerance() {
        let soe = build_soe(1.5, 1e-10, 1e-4, 2.0).unwrap();
        assert!(soe.max_sampled_error(CHECK_SAMPLES) <= 1e-10);
        assert!(soe.len() >= 10 && soe.len() <= 300, "N_exp = {}", soe.len());
        assert!(soe.lambdas.iter().all(|&l| l > 0.0));
        assert!(soe.thetas.iter().all(|&t| t > 0.0));
        assert!((soe.eval(1.0) - 1.0).abs() <= 1e-10);
        assert!((soe.eval(1e-4) - 100.0).abs() <= 1e-10);
    }

    #[test]
    fn random_points_in_range() {
        let soe = build_soe(1.3, 1e-8, 1e-3, 3.0).unwrap();
        let mut s = 0x1234_5678_u64;
        for _ in 0..2000 {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            let u = (s >> 11) as f64 / (1u64 << 53) as f64;
            let x = 1e-3 * powf(3000.0, u);
            assert!((eval_soe(&soe, x) - powf(x, -0.3)).abs() <= 1e-8);
        }
    }

    #[test]
    fn decays_beyond_range() {
        let soe = build_soe(1.7, 1e-9, 1e-3, 1.0).unwrap();
        let mut prev = soe.eval(1.0);
        for k in 1..60 {
            let v = soe.eval(1.0 + k as f64 * 0.5);
            assert!(v < prev && v > 0.0);
            prev = v;
        }
        assert!(soe.eval(1e6) < 1e-12);
    }

    #[test]
    fn deterministic() {
        let a = build_soe(1.8, 1e-10, 5e-5, 2.0).unwrap();
        let b = build_soe(1.8, 1e-10, 5e-5, 2.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn widening_range_never_shrinks() {
        for &alpha in &[1.2, 1.5, 1.8] {
            let mut prev = 0;
            for &(lo, hi) in &[(1e-2, 1.0), (1e-3, 1.0), (1e-3, 2.0), (1e-4, 2.0), (1e-4, 4.0), (1e-5, 4.0)] {
                let n = build_soe(alpha, 1e-10, lo, hi).unwrap().len();
                assert!(n >= prev, "alpha={alpha} [{lo}, {hi}]: {n} < {prev}");
                prev = n;
            }
        }
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(build_soe(1.5, 0.0, 1e-3, 1.0), Err(Error::InvalidSoeParameters(_))));
        assert!(matches!(build_soe(1.5, 1e-8, 1.0, 1.0), Err(Error::InvalidSoeParameters(_))));
        assert_eq!(build_soe(2.5, 1e-8, 1e-3, 1.0), Err(Error::AlphaOutOfRange(2.5)));
        // x^{−0.9} ≈ 2.5e8 at the cutoff: an absolute 1e−10 is below rounding.
        assert!(matches!(build_soe(1.9, 1e-10, 1e-9, 1.0), Err(Error::SoePrecision { .. })));
    }
}
