//! A-priori constants and error envelopes for the discrete energy optimum.
//!
//! From the metric bounds (c1, c2, l_h), the ambient dimension, and the
//! minimal distance d between the endpoint sets, the following quantities are
//! assembled exactly as in the underlying analysis:
//!
//! - `k1 = d / sqrt(c1)` bounds the L2 norm of a minimal geodesic's velocity;
//! - `k2 = (3 l_h D^2 / (2 c1)) k1^2` bounds the L2 norm of its acceleration;
//! - `c_of_n(N) = l_h (k1^3 + k1^2 k2)/N + 4 c2 k1 k2 / N + 4 c2 k2^2 / N^2`
//!   bounds the quadrature error of the energy on curves with those norms;
//! - `k3(N)^2 = (d^2 + c_of_n(N)) / c1` bounds the mean squared discrete
//!   velocity of near-optimal sequences, and `k4(N)` is its left-rule variant
//!   with the extra `l_h k3^3 / (2 sqrt N)` term inside the radicand.
//!
//! Two envelope flavors are exposed: the proof-chain envelopes, whose sides
//! use the N-dependent constants above and are therefore as tight as the
//! analysis allows, and the theorem-level envelope `[min E - C/sqrt(N),
//! min E + C/N]` with the single N-free constant `C` obtained by taking the
//! proof constants at their worst rung (N = 1). The latter is at least as
//! wide as the former at every N, so both are safe sandwich checks.

use crate::metric::MetricField;

/// Explicit constants for one problem instance (metric bounds + distance).
#[derive(Debug, Clone)]
pub struct TheoryConstants {
    c1: f64,
    c2: f64,
    l_h: f64,
    dim: usize,
    d_g: f64,
    k1: f64,
    k2: f64,
}

impl TheoryConstants {
    /// Assemble the constants from a metric's declared bounds and the minimal
    /// distance `d_g` between the endpoint sets.
    pub fn new(metric: &MetricField, d_g: f64) -> Self {
        Self::from_parts(metric.c1(), metric.c2(), metric.l_h(), metric.dim(), d_g)
    }

    pub fn from_parts(c1: f64, c2: f64, l_h: f64, dim: usize, d_g: f64) -> Self {
        assert!(
            c1 > 0.0 && c2 >= c1 && l_h >= 0.0 && d_g > 0.0,
            "invalid constant inputs"
        );
        let k1 = d_g / c1.sqrt();
        let k2 = 3.0 * l_h * (dim as f64).powi(2) / (2.0 * c1) * k1 * k1;
        TheoryConstants {
            c1,
            c2,
            l_h,
            dim,
            d_g,
            k1,
            k2,
        }
    }

    pub fn d_g(&self) -> f64 {
        self.d_g
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Velocity bound `K1`.
    pub fn k1(&self) -> f64 {
        self.k1
    }

    /// Acceleration bound `K2`.
    pub fn k2(&self) -> f64 {
        self.k2
    }

    /// Energy quadrature error bound `C(K1, K2, N)`.
    pub fn c_of_n(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.l_h * (self.k1.powi(3) + self.k1 * self.k1 * self.k2) / nf
            + 4.0 * self.c2 * self.k1 * self.k2 / nf
            + 4.0 * self.c2 * self.k2 * self.k2 / (nf * nf)
    }

    /// Discrete velocity bound `K3(N)` for near-optimal sequences.
    pub fn k3(&self, n: usize) -> f64 {
        ((self.d_g * self.d_g + self.c_of_n(n)) / self.c1).sqrt()
    }

    /// Left-rule variant `K4(N)`.
    pub fn k4(&self, n: usize) -> f64 {
        let extra = 0.5 * self.l_h * self.k3(n).powi(3) / (n as f64).sqrt();
        ((self.d_g * self.d_g + self.c_of_n(n) + extra) / self.c1).sqrt()
    }

    /// Proof-chain admissible interval for the trapezoidal discrete optimum:
    /// `[min_e - l_h k3(N)^3 / (4 sqrt N), min_e + c_of_n(N)]`.
    pub fn trapezoidal_envelope(&self, n: usize, min_energy: f64) -> (f64, f64) {
        assert!(min_energy >= 0.0);
        let lower = min_energy - self.l_h * self.k3(n).powi(3) / (4.0 * (n as f64).sqrt());
        let upper = min_energy + self.c_of_n(n);
        (lower, upper)
    }

    /// Proof-chain admissible interval for the left-endpoint discrete optimum:
    /// the upper side gains the rule-gap term `l_h k3(N)^3 / (2 sqrt N)` and
    /// the lower side uses `k4`.
    pub fn left_envelope(&self, n: usize, min_energy: f64) -> (f64, f64) {
        assert!(min_energy >= 0.0);
        let sqrt_n = (n as f64).sqrt();
        let lower = min_energy - self.l_h * self.k4(n).powi(3) / (2.0 * sqrt_n);
        let upper = min_energy + self.c_of_n(n) + self.l_h * self.k3(n).powi(3) / (2.0 * sqrt_n);
        (lower, upper)
    }

    /// The single N-free constant of the two-sided convergence statement,
    /// realized as the worst rung of the proof chain: both
    /// `c_of_n(N) <= C / N` and `l_h k3(N)^3 / 4 <= C` hold for every N >= 1.
    pub fn theorem_constant(&self) -> f64 {
        let upper_branch = self.c_of_n(1);
        let lower_branch = self.l_h * self.k3(1).powi(3) / 4.0;
        upper_branch.max(lower_branch)
    }

    /// Theorem-level envelope `[min_e - C/sqrt(N), min_e + C/N]`; at least as
    /// wide as [`Self::trapezoidal_envelope`] at every N, with width shrinking
    /// exactly like `N^{-1/2}`.
    pub fn theorem_envelope(&self, n: usize, min_energy: f64) -> (f64, f64) {
        assert!(min_energy >= 0.0);
        let c = self.theorem_constant();
        let nf = n as f64;
        (min_energy - c / nf.sqrt(), min_energy + c / nf)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn conformal_constants() -> TheoryConstants {
        TheoryConstants::new(&MetricField::conformal_cos(), 8.0 * PI)
    }

    #[test]
    fn conformal_cos_constants_match_hand_arithmetic() {
        // c1 = 1, l_h = 12, D = 2, d = 8 pi:
        //   k1 = 8 pi
        //   k2 = (3 * 12 * 4 / 2) * (8 pi)^2 = 72 * 64 pi^2
        let tc = conformal_constants();
        assert_relative_eq!(tc.k1(), 8.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(tc.k2(), 72.0 * 64.0 * PI * PI, max_relative = 1e-15);
        // c_of_n(1) term by term: 12 (k1^3 + k1^2 k2) + 36 k1 k2 + 36 k2^2
        let k1 = 8.0 * PI;
        let k2 = 72.0 * 64.0 * PI * PI;
        let by_hand = 12.0 * (k1.powi(3) + k1 * k1 * k2) + 36.0 * k1 * k2 + 36.0 * k2 * k2;
        assert_relative_eq!(tc.c_of_n(1), by_hand, max_relative = 1e-14);
    }

    #[test]
    fn euclidean_constants_vanish() {
        let tc = TheoryConstants::new(&MetricField::euclidean(2), 2.0f64.sqrt());
        assert_eq!(tc.k2(), 0.0);
        for n in [1usize, 7, 64, 1024] {
            assert_eq!(tc.c_of_n(n), 0.0);
        }
        let (lo, hi) = tc.trapezoidal_envelope(16, 2.0);
        assert_eq!((lo, hi), (2.0, 2.0));
        let (lo, hi) = tc.left_envelope(16, 2.0);
        assert_eq!((lo, hi), (2.0, 2.0));
    }

    #[test]
    fn quadrature_error_bound_is_strictly_decreasing() {
        let tc = conformal_constants();
        for n in 1..=1024usize {
            assert!(tc.c_of_n(2 * n) < tc.c_of_n(n));
        }
    }

    #[test]
    fn k_constants_are_ordered_and_positive() {
        let tc = conformal_constants();
        for n in [1usize, 8, 64, 512] {
            assert!(tc.k3(n) >= tc.k1());
            assert!(tc.k4(n) >= tc.k3(n));
        }
    }

    #[test]
    fn envelope_widens_with_distance() {
        let near = TheoryConstants::from_parts(1.0, 9.0, 12.0, 2, 4.0 * PI);
        let far = TheoryConstants::from_parts(1.0, 9.0, 12.0, 2, 8.0 * PI);
        let w = |tc: &TheoryConstants| {
            let (lo, hi) = tc.trapezoidal_envelope(64, 1.0);
            hi - lo
        };
        assert!(w(&far) > w(&near));
    }

    #[test]
    fn proof_chain_width_times_sqrt_n_is_bounded_and_nonvanishing() {
        // Dominant-term check in the asymptotic regime where c_of_n << d^2:
        // width * sqrt(N) approaches l_h (d^2/c1)^{3/2} / 4 from above.
        let tc = conformal_constants();
        let limit = 12.0 * (8.0 * PI).powi(3) / 4.0;
        let mut prev = f64::INFINITY;
        for k in 20..=26 {
            let n = 1usize << k;
            let (lo, hi) = tc.trapezoidal_envelope(n, 0.0);
            let scaled = (hi - lo) * (n as f64).sqrt();
            assert!(scaled.is_finite() && scaled > limit);
            assert!(scaled <= prev);
            prev = scaled;
        }
        // nonvanishing: within a factor 4 of the limit by N = 2^26
        assert!(prev < 4.0 * limit);
    }

    #[test]
    fn theorem_envelope_is_at_least_as_wide_as_proof_chain() {
        let tc = conformal_constants();
        for n in [1usize, 8, 32, 256, 4096] {
            let (plo, phi) = tc.trapezoidal_envelope(n, 100.0);
            let (tlo, thi) = tc.theorem_envelope(n, 100.0);
            assert!(tlo <= plo + 1e-9);
            assert!(thi >= phi - 1e-9);
        }
    }

    #[test]
    fn theorem_envelope_width_scales_like_inverse_sqrt_n() {
        let tc = conformal_constants();
        let scaled: Vec<f64> = [8usize, 16, 32, 64, 128, 256]
            .iter()
            .map(|&n| {
                let (lo, hi) = tc.theorem_envelope(n, 0.0);
                (hi - lo) * (n as f64).sqrt()
            })
            .collect();
        let max = scaled.iter().cloned().fold(f64::MIN, f64::max);
        let min = scaled.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 4.0);
    }
}
