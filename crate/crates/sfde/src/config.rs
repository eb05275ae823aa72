//! Study settings shared by the CLI flags and the optional TOML file.
//!
//! Every field is optional. Flags win over the file, the file wins over the
//! problem's defaults.
//!
//! ```toml
//! problem = "ex2"
//! alpha = 1.5
//! grid = "graded"
//! kappa = 1.5
//! M = [32, 64, 128, 256]
//! N = 4096          # or "M" for N = M
//! method = "fast-bicgstab"
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;
use sfde_core::march::Method;

use crate::error::{HarnessError, Result};
use crate::study::{GridKind, Steps, Study};

#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyArgs {
    /// TOML file with any of these settings.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// ex1 | ex2 | ex3 | ex4
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, value_enum)]
    pub grid: Option<GridKind>,
    /// Perturbation amplitude of perturbed grids.
    #[arg(long)]
    pub xi: Option<f64>,
    /// Grading exponent of graded grids.
    #[arg(long)]
    pub kappa: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cells; a comma-separated increasing list for `convergence`.
    #[arg(long = "M", value_delimiter = ',')]
    #[serde(rename = "M")]
    pub m: Option<Vec<usize>>,
    /// Time steps, or `M` to tie them to the cell count.
    #[arg(long = "N")]
    #[serde(rename = "N", default, deserialize_with = "steps_from_toml")]
    pub n: Option<String>,
    /// dense-ge | dense-bicgstab | fast-bicgstab
    #[arg(long)]
    pub method: Option<String>,
    /// Relative residual tolerance of BiCGSTAB.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long = "soe-eps")]
    pub soe_eps: Option<f64>,
    /// BiCGSTAB iteration cap per level (default M).
    #[arg(long = "max-iters")]
    pub max_iters: Option<usize>,
    /// Largest M the dense methods accept.
    #[arg(long = "cap-dense-M")]
    #[serde(rename = "cap_dense_M")]
    pub cap_dense_m: Option<usize>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Fill the cpu_ms column with wall-clock times.
    #[arg(long)]
    #[serde(default)]
    pub timing: bool,
}

fn steps_from_toml<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<String>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Int(u64),
        Text(String),
    }
    Ok(Some(match Raw::deserialize(d)? {
        Raw::Int(n) => n.to_string(),
        Raw::Text(s) => s,
    }))
}

pub fn parse_steps(s: &str) -> Result<Steps> {
    if s == "M" {
        return Ok(Steps::EqualToM);
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(Steps::Fixed(n)),
        _ => Err(HarnessError::Usage(format!("N must be a positive integer or `M`, got {s:?}"))),
    }
}

pub fn parse_method(s: &str) -> Result<Method> {
    Method::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
        HarnessError::Usage(format!("unknown method {s:?}; expected one of {names:?}"))
    })
}

pub fn parse_config(text: &str, path: &Path) -> Result<StudyArgs> {
    toml::from_str(text).map_err(|e| HarnessError::Config {
        path: path.to_path_buf(),
        source: Box::new(e),
    })
}

impl StudyArgs {
    /// Loads `--config` if given and lets the flags override it.
    pub fn resolve(self) -> Result<StudyArgs> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = fs::read_to_string(&path).map_err(|e| HarnessError::io(&path, e))?;
        Ok(self.over(parse_config(&text, &path)?))
    }

    /// Field-wise `self` if set, else `base`.
    pub fn over(self, base: StudyArgs) -> StudyArgs {
        StudyArgs {
            config: self.config.or(base.config),
            problem: self.problem.or(base.problem),
            alpha: self.alpha.or(base.alpha),
            gamma: self.gamma.or(base.gamma),
            grid: self.grid.or(base.grid),
            xi: self.xi.or(base.xi),
            kappa: self.kappa.or(base.kappa),
            seed: self.seed.or(base.seed),
            m: self.m.or(base.m),
            n: self.n.or(base.n),
            method: self.method.or(base.method),
            tol: self.tol.or(base.tol),
            soe_eps: self.soe_eps.or(base.soe_eps),
            max_iters: self.max_iters.or(base.max_iters),
            cap_dense_m: self.cap_dense_m.or(base.cap_dense_m),
            out: self.out.or(base.out),
            timing: self.timing || base.timing,
        }
    }

    pub fn study(&self) -> Result<Study> {
        let name = self.problem.as_deref().ok_or_else(|| HarnessError::Usage("--problem is required".into()))?;
        let mut s = Study::for_problem(name)?;
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.gamma {
            s.gamma = v;
        }
        if let Some(v) = self.grid {
            s.grid.kind = v;
        }
        if let Some(v) = self.xi {
            s.grid.xi = v;
        }
        if let Some(v) = self.kappa {
            s.grid.kappa = v;
        }
        if let Some(v) = self.seed {
            s.grid.seed = v;
        }
        if let Some(v) = &self.n {
            s.steps = parse_steps(v)?;
        }
        if let Some(v) = &self.method {
            s.method = parse_method(v)?;
        }
        if let Some(v) = self.tol {
            s.tol = v;
        }
        if let Some(v) = self.soe_eps {
            s.soe_eps = v;
        }
        s.max_iters = self.max_iters.or(s.max_iters);
        if let Some(v) = self.cap_dense_m {
            s.cap_dense_m = v;
        }
        s.timing = self.timing;
        Ok(s)
    }

    pub fn cells(&self) -> Result<&[usize]> {
        self.m.as_deref().filter(|m| !m.is_empty()).ok_or_else(|| HarnessError::Usage("--M is required".into()))
    }

    pub fn single_cells(&self) -> Result<usize> {
        match self.cells()? {
            [m] => Ok(*m),
            _ => Err(HarnessError::Usage("this command takes a single --M".into())),
        }
    }
}
