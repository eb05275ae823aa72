use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate domain: a = {a} is not below b = {b}")]
    DegenerateDomain { a: f64, b: f64 },
    #[error("a grid needs at least 3 cells, got {0}")]
    TooFewCells(usize),
    #[error("perturbation amplitude xi = {0} is outside [0, 1]")]
    PerturbationOutOfRange(f64),
    #[error("grading exponent kappa = {0} is below 1")]
    GradingExponent(f64),
    #[error("grading split fraction {0} is outside [0, 1]")]
    GradingSplit(f64),
    #[error("edges are not strictly increasing at index {0}")]
    NonMonotoneEdges(usize),
    #[error("cell {index} has collapsed (width {width:e})")]
    CollapsedCell { index: usize, width: f64 },
    #[error("fractional order alpha = {0} is outside (1, 2)")]
    AlphaOutOfRange(f64),
    #[error("weight gamma = {0} is outside [0, 1]")]
    WeightOutOfRange(f64),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("diffusion coefficient {side} = {value} at x = {x}, t = {t} is negative or not finite")]
    InvalidCoefficient {
        side: &'static str,
        x: f64,
        t: f64,
        value: f64,
    },
    #[error("matrix is singular to working precision at column {0}")]
    SingularPivot(usize),
    #[error("invalid SOE parameters: {0}")]
    InvalidSoeParameters(&'static str),
    #[error("SOE needs more than {cap} exponentials to reach tolerance {eps:e}")]
    SoeNodeCap { cap: usize, eps: f64 },
    #[error("SOE error {achieved:e} cannot reach {eps:e} in double precision; raise the tolerance or the cutoff")]
    SoePrecision { eps: f64, achieved: f64 },
    #[error("SOE covers [{have_min:e}, {have_max:e}] but the grid needs [{need_min:e}, {need_max:e}]")]
    SoeRange {
        have_min: f64,
        have_max: f64,
        need_min: f64,
        need_max: f64,
    },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("problem {name} does not support {reason}")]
    UnsupportedParameters {
        name: &'static str,
        reason: &'static str,
    },
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 1.0 && alpha < 2.0 {
        Ok(())
    } else {
        Err(Error::AlphaOutOfRange(alpha))
    }
}

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}
