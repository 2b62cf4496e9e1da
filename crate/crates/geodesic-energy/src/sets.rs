//! Closed convex endpoint sets with membership tests and exact Euclidean
//! projections. Only kinds with closed-form projections are supported; the
//! two-point problem uses `Point` sets so that one code path covers both the
//! fixed-endpoint and set-constrained problems.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Membership slack: sets are closed, so boundary points count.
const CONTAINS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum EndpointSet {
    /// The singleton {p}.
    Point(DVector<f64>),
    /// Closed ball of radius `radius` around `center`.
    Ball { center: DVector<f64>, radius: f64 },
    /// Axis-aligned closed box [lo, hi].
    Box { lo: DVector<f64>, hi: DVector<f64> },
    /// Closed half-space { x : normal . x <= offset }.
    HalfSpace { normal: DVector<f64>, offset: f64 },
}

impl EndpointSet {
    pub fn point(p: DVector<f64>) -> Result<Self> {
        Self::check_finite(p.iter(), "point coordinates")?;
        Ok(EndpointSet::Point(p))
    }

    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        Self::check_finite(center.iter(), "ball center")?;
        if !radius.is_finite() || radius <= 0.0 {
            return Err(Error::config("ball radius must be positive and finite"));
        }
        Ok(EndpointSet::Ball { center, radius })
    }

    pub fn bounding_box(lo: DVector<f64>, hi: DVector<f64>) -> Result<Self> {
        Self::check_finite(lo.iter().chain(hi.iter()), "box bounds")?;
        if lo.len() != hi.len() {
            return Err(Error::config("box bounds have mismatched dimensions"));
        }
        if lo.iter().zip(hi.iter()).any(|(a, b)| a > b) {
            return Err(Error::config("box requires lo <= hi componentwise"));
        }
        Ok(EndpointSet::Box { lo, hi })
    }

    pub fn half_space(normal: DVector<f64>, offset: f64) -> Result<Self> {
        Self::check_finite(normal.iter(), "half-space normal")?;
        if !offset.is_finite() {
            return Err(Error::config("half-space offset must be finite"));
        }
        if normal.norm() == 0.0 {
            return Err(Error::config("half-space normal must be nonzero"));
        }
        Ok(EndpointSet::HalfSpace { normal, offset })
    }

    fn check_finite<'a>(vals: impl Iterator<Item = &'a f64>, what: &str) -> Result<()> {
        for v in vals {
            if !v.is_finite() {
                return Err(Error::config(format!("{what} must be finite")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        match self {
            EndpointSet::Point(p) => p.len(),
            EndpointSet::Ball { center, .. } => center.len(),
            EndpointSet::Box { lo, .. } => lo.len(),
            EndpointSet::HalfSpace { normal, .. } => normal.len(),
        }
    }

    /// Half-spaces are the only unbounded kind.
    pub fn bounded(&self) -> bool {
        !matches!(self, EndpointSet::HalfSpace { .. })
    }

    /// Closed membership up to a 1e-12 slack.
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        match self {
            EndpointSet::Point(p) => (x - p).amax() <= CONTAINS_TOL * p.amax().max(1.0),
            EndpointSet::Ball { center, radius } => {
                (x - center).norm() <= radius * (1.0 + CONTAINS_TOL) + CONTAINS_TOL
            }
            EndpointSet::Box { lo, hi } => {
                let slack = CONTAINS_TOL * lo.amax().max(hi.amax()).max(1.0);
                x.iter()
                    .zip(lo.iter().zip(hi.iter()))
                    .all(|(v, (a, b))| *v >= a - slack && *v <= b + slack)
            }
            EndpointSet::HalfSpace { normal, offset } => {
                normal.dot(x)
                    <= offset + CONTAINS_TOL * (offset.abs().max(normal.norm() * x.norm()).max(1.0))
            }
        }
    }

    /// Euclidean nearest point of the set (exact closed forms).
    pub fn project(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            EndpointSet::Point(p) => p.clone(),
            EndpointSet::Ball { center, radius } => {
                let diff = x - center;
                let dist = diff.norm();
                if dist <= *radius {
                    x.clone()
                } else {
                    center + diff * *radius / dist
                }
            }
            EndpointSet::Box { lo, hi } => {
                DVector::from_fn(lo.len(), |i, _| x[i].clamp(lo[i], hi[i]))
            }
            EndpointSet::HalfSpace { normal, offset } => {
                let excess = normal.dot(x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x - normal * (excess / normal.norm_squared())
                }
            }
        }
    }

    /// A representative point used to seed initial guesses: the point itself,
    /// the ball center, the box center, or the half-space's projection of the
    /// origin.
    pub fn representative(&self) -> DVector<f64> {
        match self {
            EndpointSet::Point(p) => p.clone(),
            EndpointSet::Ball { center, .. } => center.clone(),
            EndpointSet::Box { lo, hi } => (lo + hi) * 0.5,
            EndpointSet::HalfSpace { normal, .. } => self.project(&DVector::zeros(normal.len())),
        }
    }
}

/// Hypothesis of the two-set problem: both sets share a dimension and at
/// least one is bounded (otherwise no minimal pair need exist).
pub fn validate_pair(x0: &EndpointSet, x1: &EndpointSet) -> Result<()> {
    if x0.dim() != x1.dim() {
        return Err(Error::config(format!(
            "endpoint sets have mismatched dimensions {} and {}",
            x0.dim(),
            x1.dim()
        )));
    }
    if !x0.bounded() && !x1.bounded() {
        return Err(Error::config("at least one endpoint set must be bounded"));
    }
    Ok(())
}
