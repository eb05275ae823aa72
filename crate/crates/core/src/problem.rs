//! Problem data for the two-sided fractional diffusion model.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{check_alpha, Error, Result};
use crate::grid::StaggeredGrid;

pub type SpaceTimeFn = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type TimeFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;
pub type SpaceFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Coefficients, source, boundary fluxes and initial data.
///
/// `phi` and `varphi` are the prescribed fluxes `p(a, t)` and `p(b, t)`.
pub struct ProblemSpec {
    pub alpha: f64,
    pub gamma: f64,
    pub k_left: SpaceTimeFn,
    pub k_right: SpaceTimeFn,
    pub source: SpaceTimeFn,
    pub phi: TimeFn,
    pub varphi: TimeFn,
    pub u0: SpaceFn,
    pub exact_u: Option<SpaceTimeFn>,
    pub exact_p: Option<SpaceTimeFn>,
    pub final_time: f64,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("alpha", &self.alpha)
            .field("gamma", &self.gamma)
            .field("final_time", &self.final_time)
            .field("has_exact_u", &self.exact_u.is_some())
            .field("has_exact_p", &self.exact_p.is_some())
            .finish_non_exhaustive()
    }
}

/// `K^L` and `K^R` sampled at the `M + 1` grid edges.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCoefficients {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl ProblemSpec {
    /// Problem with zero source, zero fluxes, zero initial data and
    /// unit diffusion coefficients.
    pub fn homogeneous(alpha: f64, gamma: f64, final_time: f64) -> Self {
        Self {
            alpha,
            gamma,
            k_left: Box::new(|_, _| 1.0),
            k_right: Box::new(|_, _| 1.0),
            source: Box::new(|_, _| 0.0),
            phi: Box::new(|_| 0.0),
            varphi: Box::new(|_| 0.0),
            u0: Box::new(|_| 0.0),
            exact_u: None,
            exact_p: None,
            final_time,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::WeightOutOfRange(self.gamma));
        }
        if !(self.final_time > 0.0 && self.final_time.is_finite()) {
            return Err(Error::InvalidConfig("final time must be positive and finite"));
        }
        Ok(())
    }

    /// Samples both diffusion coefficients at every edge at time `t`.
    ///
    /// Zero is accepted (the coefficients of several test problems vanish at
    /// `t = 0` or at the boundary); negative or non-finite values are not.
    pub fn edge_coefficients(&self, grid: &StaggeredGrid, t: f64) -> Result<EdgeCoefficients> {
        let sample = |k: &SpaceTimeFn, side: &'static str| {
            grid.edges()
                .iter()
                .map(|&x| {
                    let value = k(x, t);
                    if value >= 0.0 && value.is_finite() {
                        Ok(value)
                    } else {
                        Err(Error::InvalidCoefficient { side, x, t, value })
                    }
                })
                .collect::<Result<Vec<f64>>>()
        };
        Ok(EdgeCoefficients {
            left: sample(&self.k_left, "K^L")?,
            right: sample(&self.k_right, "K^R")?,
        })
    }

    /// Load vector `F^{n−1/2}`: the source at the cell
    /// centers and mid-level time, with the boundary fluxes folded into the
    /// first and last rows.
    pub fn load_vector(&self, grid: &StaggeredGrid, t_prev: f64, t_next: f64) -> Vec<f64> {
        let t_half = 0.5 * (t_prev + t_next);
        let h = grid.widths();
        let m = grid.cells();
        let mut f: Vec<f64> = grid.centers().iter().map(|&x| (self.source)(x, t_half)).collect();
        f[0] -= 0.5 * ((self.phi)(t_next) + (self.phi)(t_prev)) / h[0];
        f[m - 1] += 0.5 * ((self.varphi)(t_next) + (self.varphi)(t_prev)) / h[m - 1];
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(ProblemSpec::homogeneous(1.5, 0.5, 1.0).validate().is_ok());
        assert_eq!(
            ProblemSpec::homogeneous(1.0, 0.5, 1.0).validate(),
            Err(Error::AlphaOutOfRange(1.0))
        );
        assert_eq!(
            ProblemSpec::homogeneous(1.5, 1.5, 1.0).validate(),
            Err(Error::WeightOutOfRange(1.5))
        );
        assert!(ProblemSpec::homogeneous(1.5, 0.5, 0.0).validate().is_err());
    }

    #[test]
    fn negative_coefficient_is_rejected() {
        let mut p = ProblemSpec::homogeneous(1.5, 0.5, 1.0);
        p.k_right = Box::new(|x, _| 0.5 - x);
        let grid = StaggeredGrid::uniform(0.0, 1.0, 4).unwrap();
        match p.edge_coefficients(&grid, 0.3) {
            Err(Error::InvalidCoefficient { side, x, .. }) => {
                assert_eq!(side, "K^R");
                assert_eq!(x, 0.75);
            }
            other => panic!("{other:?}"),
        }
        p.k_right = Box::new(|_, t| t);
        assert!(p.edge_coefficients(&grid, 0.0).is_ok());
    }

    #[test]
    fn load_vector_boundary_rows() {
        let mut p = ProblemSpec::homogeneous(1.5, 0.5, 1.0);
        p.source = Box::new(|x, t| x + t);
        p.phi = Box::new(|t| t);
        p.varphi = Box::new(|t| 2.0 * t);
        let grid = StaggeredGrid::uniform(0.0, 1.0, 4).unwrap();
        let f = p.load_vector(&grid, 0.2, 0.4);
        assert!((f[1] - (0.375 + 0.3)).abs() < 1e-15);
        assert!((f[0] - (0.125 + 0.3 - 0.3 / 0.25)).abs() < 1e-14);
        assert!((f[3] - (0.875 + 0.3 + 0.6 / 0.25)).abs() < 1e-14);
    }
}
