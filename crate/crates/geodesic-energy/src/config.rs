//! Problem configuration: the JSON schema consumed by the CLI and by any
//! script driving the library. Parsing and validation are separated so that
//! config errors are reported before any numerics run.
//!
//! ```json
//! {
//!   "metric": {"kind": "conformal_cos"},
//!   "x0": {"kind": "point", "p": [0.0, 0.0]},
//!   "x1": {"kind": "point", "p": [12.566370614359172, 0.0]},
//!   "rule": "trapezoidal",
//!   "functional": "energy",
//!   "n_segments": 64,
//!   "d_g": 25.132741228718345,
//!   "solver": {"max_iters": 5000, "grad_tol": 1e-8, "memory": 10, "seed": 0}
//! }
//! ```

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::energy::{Functional, QuadratureRule};
use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::sets::{validate_pair, EndpointSet};
use crate::solver::SolveConfig;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricConfig {
    Euclidean {
        #[serde(skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    ConformalCos,
    /// Conformal factor `e^{2 phi}` with a Gaussian bump
    /// `phi(x) = amplitude * exp(-|x - center|^2 / (2 sigma^2))`.
    ConformalPhi {
        amplitude: f64,
        center: Vec<f64>,
        sigma: f64,
    },
    /// Reserved for library users; not constructible from JSON alone.
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SetConfig {
    Point { p: Vec<f64> },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    HalfSpace { normal: Vec<f64>, offset: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOverrides {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grad_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub memory: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multi_start: Option<bool>,
}

/// One problem instance as described on disk.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub metric: MetricConfig,
    pub x0: SetConfig,
    pub x1: SetConfig,
    #[serde(default = "default_rule")]
    pub rule: QuadratureRule,
    #[serde(default = "default_functional")]
    pub functional: Functional,
    #[serde(default = "default_n_segments")]
    pub n_segments: usize,
    /// Known minimal distance between the endpoint sets, when available;
    /// studies otherwise estimate it from the finest solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d_g: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver: Option<SolverOverrides>,
}

fn default_rule() -> QuadratureRule {
    QuadratureRule::Trapezoidal
}

fn default_functional() -> Functional {
    Functional::Energy
}

fn default_n_segments() -> usize {
    64
}

/// A validated, ready-to-solve problem.
#[derive(Debug)]
pub struct Problem {
    pub metric: MetricField,
    pub x0: EndpointSet,
    pub x1: EndpointSet,
    pub rule: QuadratureRule,
    pub functional: Functional,
    pub n_segments: usize,
    pub d_g: Option<f64>,
    pub solve_config: SolveConfig,
}

/// Parse a config JSON string.
pub fn parse_config(json: &str) -> Result<ProblemConfig> {
    serde_json::from_str(json).map_err(|e| Error::config(e.to_string()))
}

fn finite_vec(field: &str, v: &[f64]) -> Result<DVector<f64>> {
    if v.is_empty() {
        return Err(Error::config(format!(
            "{field}: coordinate list must be nonempty"
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::config(format!(
            "{field}: coordinates must be finite"
        )));
    }
    Ok(DVector::from_column_slice(v))
}

fn build_set(field: &str, cfg: &SetConfig) -> Result<EndpointSet> {
    let tag = |e: Error| match e {
        Error::Config(msg) => Error::config(format!("{field}: {msg}")),
        other => other,
    };
    match cfg {
        SetConfig::Point { p } => EndpointSet::point(finite_vec(field, p)?).map_err(tag),
        SetConfig::Ball { center, radius } => {
            EndpointSet::ball(finite_vec(field, center)?, *radius).map_err(tag)
        }
        SetConfig::Box { lo, hi } => {
            EndpointSet::bounding_box(finite_vec(field, lo)?, finite_vec(field, hi)?).map_err(tag)
        }
        SetConfig::HalfSpace { normal, offset } => {
            EndpointSet::half_space(finite_vec(field, normal)?, *offset).map_err(tag)
        }
    }
}

impl ProblemConfig {
    pub fn build(&self) -> Result<Problem> {
        let x0 = build_set("x0", &self.x0)?;
        let x1 = build_set("x1", &self.x1)?;
        validate_pair(&x0, &x1)?;

        let metric = match &self.metric {
            MetricConfig::Euclidean { dim } => {
                let d = dim.unwrap_or(x0.dim());
                if d == 0 {
                    return Err(Error::config("metric: dim must be positive"));
                }
                MetricField::euclidean(d)
            }
            MetricConfig::ConformalCos => MetricField::conformal_cos(),
            MetricConfig::ConformalPhi {
                amplitude,
                center,
                sigma,
            } => MetricField::conformal_gaussian(
                *amplitude,
                finite_vec("metric.center", center)?,
                *sigma,
            )
            .map_err(|e| match e {
                Error::Config(msg) => Error::config(format!("metric: {msg}")),
                other => other,
            })?,
            MetricConfig::Custom => {
                return Err(Error::config(
                    "metric: custom metrics are only available through the library API",
                ))
            }
        };

        if metric.dim() != x0.dim() {
            return Err(Error::config(format!(
                "metric dimension {} does not match endpoint dimension {}",
                metric.dim(),
                x0.dim()
            )));
        }
        if self.n_segments < 1 {
            return Err(Error::config("n_segments must be at least 1"));
        }
        if let Some(d) = self.d_g {
            if !d.is_finite() || d <= 0.0 {
                return Err(Error::config("d_g must be positive and finite"));
            }
        }

        let mut solve_config = SolveConfig::default();
        if let Some(o) = &self.solver {
            if let Some(v) = o.max_iters {
                solve_config.max_iters = v;
            }
            if let Some(v) = o.grad_tol {
                solve_config.grad_tol = v;
            }
            if let Some(v) = o.memory {
                solve_config.memory = v;
            }
            if let Some(v) = o.seed {
                solve_config.seed = v;
            }
            if let Some(v) = o.multi_start {
                solve_config.multi_start = v;
            }
        }
        solve_config.validate()?;

        Ok(Problem {
            metric,
            x0,
            x1,
            rule: self.rule,
            functional: self.functional,
            n_segments: self.n_segments,
            d_g: self.d_g,
            solve_config,
        })
    }
}

/// Parse a comma-separated ladder like `8,16,32` into segment counts.
pub fn parse_n_list(text: &str) -> Result<Vec<usize>> {
    let values = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::config(format!("n-list: `{part}` is not a positive integer")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() || values.contains(&0) {
        return Err(Error::config("n-list: entries must be positive"));
    }
    Ok(values)
}

/// The counterexample instance: conformal-cos metric between (0,0) and (4 pi, 0).
pub fn counterexample_config() -> ProblemConfig {
    ProblemConfig {
        metric: MetricConfig::ConformalCos,
        x0: SetConfig::Point { p: vec![0.0, 0.0] },
        x1: SetConfig::Point {
            p: vec![4.0 * std::f64::consts::PI, 0.0],
        },
        rule: QuadratureRule::Trapezoidal,
        functional: Functional::Energy,
        n_segments: 64,
        d_g: Some(8.0 * std::f64::consts::PI),
        solver: None,
    }
}
