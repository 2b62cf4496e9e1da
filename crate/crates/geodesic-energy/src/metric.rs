//! Riemannian metrics on R^D as fields of symmetric positive-definite matrices.
//!
//! A [`MetricField`] evaluates `H(x)`, its coordinate derivatives, and the
//! Christoffel symbols of the Levi-Civita connection. Every field carries
//! user-declared bound metadata: eigenvalue bounds `c1`, `c2` with
//! `c1 |u|^2 <= u' H(x) u <= c2 |u|^2`, and an operator-norm Lipschitz
//! constant `l_h` with `|H(x) - H(y)| <= l_h |x - y|`. Declarations are spot
//! checked by sampling ([`MetricField::validate_bounds`]), not estimated.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

type HFn = Arc<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;
type DhFn = Arc<dyn Fn(&DVector<f64>, usize) -> DMatrix<f64> + Send + Sync>;

#[derive(Clone)]
enum Field {
    Euclidean,
    /// Conformal metric (2 - cos x1)^2 * I on R^2.
    ConformalCos,
    /// Conformal metric e^{2 phi} * I with a Gaussian bump phi.
    ConformalGaussian {
        amplitude: f64,
        center: DVector<f64>,
        sigma: f64,
    },
    Custom {
        h: HFn,
        dh: Option<DhFn>,
    },
}

/// A Riemannian metric `g_x(u, v) = u' H(x) v` on R^D with declared bounds.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    c1: f64,
    c2: f64,
    l_h: f64,
    field: Field,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.field {
            Field::Euclidean => "euclidean",
            Field::ConformalCos => "conformal_cos",
            Field::ConformalGaussian { .. } => "conformal_phi",
            Field::Custom { .. } => "custom",
        };
        f.debug_struct("MetricField")
            .field("kind", &kind)
            .field("dim", &self.dim)
            .field("c1", &self.c1)
            .field("c2", &self.c2)
            .field("l_h", &self.l_h)
            .finish()
    }
}

/// `f(x1) = 2 - cos x1`, the conformal factor of the counterexample metric.
pub(crate) fn cos_factor(x1: f64) -> f64 {
    2.0 - x1.cos()
}

impl MetricField {
    /// The flat metric `H = I`.
    pub fn euclidean(dim: usize) -> Self {
        MetricField {
            dim,
            c1: 1.0,
            c2: 1.0,
            l_h: 0.0,
            field: Field::Euclidean,
        }
    }

    /// The counterexample metric `(2 - cos x1)^2 * I` on R^2.
    ///
    /// The factor ranges over [1, 3], so c1 = 1 and c2 = 9; the sharp
    /// Lipschitz constant of `H` is sup |d(f^2)/dx1| = 2 sup |f f'| < 4.5,
    /// declared as 12 with a safety margin.
    pub fn conformal_cos() -> Self {
        MetricField {
            dim: 2,
            c1: 1.0,
            c2: 9.0,
            l_h: 12.0,
            field: Field::ConformalCos,
        }
    }

    /// Conformal metric `e^{2 phi} * I` with `phi(x) = a exp(-|x - c|^2 / (2 sigma^2))`.
    pub fn conformal_gaussian(amplitude: f64, center: DVector<f64>, sigma: f64) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 0.0 || !amplitude.is_finite() {
            return Err(Error::config(
                "conformal_phi requires sigma > 0 and finite amplitude",
            ));
        }
        let a = amplitude.abs();
        // |grad phi| <= a e^{-1/2} / sigma, attained at radius sigma.
        let grad_phi_sup = a / (sigma * std::f64::consts::E.sqrt());
        let l_h = 2.0 * grad_phi_sup * (2.0 * a).exp();
        Ok(MetricField {
            dim: center.len(),
            c1: (-2.0 * a).exp(),
            c2: (2.0 * a).exp(),
            l_h,
            field: Field::ConformalGaussian {
                amplitude,
                center,
                sigma,
            },
        })
    }

    /// User-defined SPD field with declared bounds and optional analytic derivative.
    pub fn custom(
        dim: usize,
        c1: f64,
        c2: f64,
        l_h: f64,
        h: impl Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync + 'static,
        dh: Option<DhFn>,
    ) -> Result<Self> {
        if !(c1 > 0.0 && c2 >= c1 && l_h >= 0.0) {
            return Err(Error::config(
                "metric bounds must satisfy 0 < c1 <= c2, l_h >= 0",
            ));
        }
        Ok(MetricField {
            dim,
            c1,
            c2,
            l_h,
            field: Field::Custom { h: Arc::new(h), dh },
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Declared lower eigenvalue bound.
    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// Declared upper eigenvalue bound.
    pub fn c2(&self) -> f64 {
        self.c2
    }

    /// Declared operator-norm Lipschitz constant of `H`.
    pub fn l_h(&self) -> f64 {
        self.l_h
    }

    pub fn has_analytic_derivative(&self) -> bool {
        match &self.field {
            Field::Euclidean | Field::ConformalCos | Field::ConformalGaussian { .. } => true,
            Field::Custom { dh, .. } => dh.is_some(),
        }
    }

    fn check_point(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::usage(format!(
                "point has dimension {}, metric expects {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// Evaluate `H(x)`.
    pub fn h(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        Ok(match &self.field {
            Field::Euclidean => DMatrix::identity(self.dim, self.dim),
            Field::ConformalCos => {
                let f = cos_factor(x[0]);
                DMatrix::identity(2, 2) * (f * f)
            }
            Field::ConformalGaussian {
                amplitude,
                center,
                sigma,
            } => {
                let r2 = (x - center).norm_squared();
                let phi = amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
                DMatrix::identity(self.dim, self.dim) * (2.0 * phi).exp()
            }
            Field::Custom { h, .. } => h(x),
        })
    }

    /// The quadratic form `g_x(u, u) = u' H(x) u`.
    pub fn quadratic_form(&self, x: &DVector<f64>, u: &DVector<f64>) -> Result<f64> {
        self.check_point(x)?;
        if u.len() != self.dim {
            return Err(Error::usage(format!(
                "vector has dimension {}, metric expects {}",
                u.len(),
                self.dim
            )));
        }
        // Built-in conformal fields avoid the matrix round trip.
        Ok(match &self.field {
            Field::Euclidean => u.norm_squared(),
            Field::ConformalCos => {
                let f = cos_factor(x[0]);
                f * f * u.norm_squared()
            }
            Field::ConformalGaussian {
                amplitude,
                center,
                sigma,
            } => {
                let r2 = (x - center).norm_squared();
                let phi = amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
                (2.0 * phi).exp() * u.norm_squared()
            }
            Field::Custom { h, .. } => {
                let hm = h(x);
                (u.transpose() * hm * u)[(0, 0)]
            }
        })
    }

    /// `dH/dx_ell(x)`: analytic when available, otherwise central finite
    /// differences with step `max(1, |x|_inf) * eps^(1/3)`.
    pub fn metric_derivative(&self, x: &DVector<f64>, ell: usize) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        if ell >= self.dim {
            return Err(Error::usage(format!(
                "axis index {ell} out of range for dimension {}",
                self.dim
            )));
        }
        match &self.field {
            Field::Euclidean => Ok(DMatrix::zeros(self.dim, self.dim)),
            Field::ConformalCos => {
                if ell == 0 {
                    // d(f^2)/dx1 = 2 f sin(x1)
                    let f = cos_factor(x[0]);
                    Ok(DMatrix::identity(2, 2) * (2.0 * f * x[0].sin()))
                } else {
                    Ok(DMatrix::zeros(2, 2))
                }
            }
            Field::ConformalGaussian {
                amplitude,
                center,
                sigma,
            } => {
                let r2 = (x - center).norm_squared();
                let phi = amplitude * (-r2 / (2.0 * sigma * sigma)).exp();
                let dphi = -phi * (x[ell] - center[ell]) / (sigma * sigma);
                Ok(DMatrix::identity(self.dim, self.dim) * (2.0 * dphi * (2.0 * phi).exp()))
            }
            Field::Custom { dh: Some(dh), .. } => Ok(dh(x, ell)),
            Field::Custom { dh: None, .. } => self.metric_derivative_fd(x, ell),
        }
    }

    /// Central finite-difference derivative, always available; used as the
    /// fallback above and as an oracle against analytic derivatives.
    pub fn metric_derivative_fd(&self, x: &DVector<f64>, ell: usize) -> Result<DMatrix<f64>> {
        self.check_point(x)?;
        if ell >= self.dim {
            return Err(Error::usage(format!(
                "axis index {ell} out of range for dimension {}",
                self.dim
            )));
        }
        let step = x.amax().max(1.0) * f64::EPSILON.cbrt();
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[ell] += step;
        xm[ell] -= step;
        Ok((self.h(&xp)? - self.h(&xm)?) / (2.0 * step))
    }

    /// Christoffel symbols of the second kind at `x`.
    pub fn christoffel(&self, x: &DVector<f64>) -> Result<ChristoffelTensor> {
        self.check_point(x)?;
        let d = self.dim;
        let h = self.h(x)?;
        let inv = h
            .clone()
            .cholesky()
            .map(|c| c.inverse())
            .or_else(|| h.try_inverse())
            .ok_or_else(|| Error::numeric("metric matrix is singular"))?;
        let dh: Vec<DMatrix<f64>> = (0..d)
            .map(|ell| self.metric_derivative(x, ell))
            .collect::<Result<_>>()?;
        let mut gamma = vec![0.0; d * d * d];
        for k in 0..d {
            for i in 0..d {
                for j in i..d {
                    let mut sum = 0.0;
                    for ell in 0..d {
                        sum +=
                            inv[(k, ell)] * (dh[i][(ell, j)] + dh[j][(i, ell)] - dh[ell][(i, j)]);
                    }
                    let v = 0.5 * sum;
                    gamma[(k * d + i) * d + j] = v;
                    gamma[(k * d + j) * d + i] = v;
                }
            }
        }
        Ok(ChristoffelTensor { dim: d, gamma })
    }

    /// The a-priori sup bound `3 l_h sqrt(D) / (2 c1)` on every |Gamma^k_ij|.
    pub fn christoffel_sup_bound(&self) -> f64 {
        3.0 * self.l_h * (self.dim as f64).sqrt() / (2.0 * self.c1)
    }

    /// Spot-check the declared bounds by sampling points in the box
    /// `[lo, hi]^D`. Checks symmetry of `H`, the eigenvalue range `[c1, c2]`,
    /// and the Lipschitz declaration on sampled pairs.
    pub fn validate_bounds(&self, lo: f64, hi: f64, samples: usize, seed: u64) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim;
        let rel = 1e-9;
        let mut prev: Option<(DVector<f64>, DMatrix<f64>)> = None;
        for _ in 0..samples {
            let x = DVector::from_fn(d, |_, _| rng.gen_range(lo..hi));
            let h = self.h(&x)?;
            let scale = h.amax().max(1.0);
            for i in 0..d {
                for j in 0..d {
                    if (h[(i, j)] - h[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::config(format!(
                            "H is not symmetric at sampled point (entry {i},{j})"
                        )));
                    }
                }
            }
            let eigs = h.clone().symmetric_eigen().eigenvalues;
            let (mut emin, mut emax) = (f64::INFINITY, f64::NEG_INFINITY);
            for &e in eigs.iter() {
                emin = emin.min(e);
                emax = emax.max(e);
            }
            if emin < self.c1 * (1.0 - rel) - rel || emax > self.c2 * (1.0 + rel) + rel {
                return Err(Error::config(format!(
                    "eigenvalues [{emin:.6e}, {emax:.6e}] escape declared [c1, c2] = [{}, {}]",
                    self.c1, self.c2
                )));
            }
            if let Some((y, hy)) = &prev {
                let diff = &h - hy;
                let op = diff
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .fold(0.0f64, |m, &e| m.max(e.abs()));
                let dist = (&x - y).norm();
                if op > self.l_h * dist * (1.0 + rel) + rel {
                    return Err(Error::config(format!(
                        "Lipschitz violation: |H(x)-H(y)| = {op:.6e} > l_h |x-y| = {:.6e}",
                        self.l_h * dist
                    )));
                }
            }
            prev = Some((x, h));
        }
        Ok(())
    }
}

/// Christoffel symbols `Gamma^k_ij` at a point, symmetric in the lower indices.
#[derive(Debug, Clone)]
pub struct ChristoffelTensor {
    dim: usize,
    gamma: Vec<f64>,
}

impl ChristoffelTensor {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `Gamma^k_ij`.
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[(k * self.dim + i) * self.dim + j]
    }

    /// The geodesic-equation contraction `(sum_ij Gamma^k_ij u_i v_j)_k`.
    pub fn contract(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let d = self.dim;
        DVector::from_fn(d, |k, _| {
            let mut acc = 0.0;
            for i in 0..d {
                for j in 0..d {
                    acc += self.get(k, i, j) * u[i] * v[j];
                }
            }
            acc
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.gamma.iter().fold(0.0f64, |m, &g| m.max(g.abs()))
    }
}
