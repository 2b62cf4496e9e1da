//! Discrete point sequences on the uniform grid t_n = n/N, their
//! piecewise-linear interpolants, and high-accuracy continuous energy and
//! length of those interpolants.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricField;
use crate::quad::GaussLegendre;

/// `gamma^p`: N+1 points in R^D indexed by t_n = n/N.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSequence {
    points: Vec<DVector<f64>>,
}

impl PointSequence {
    /// Wrap `points` (length N+1, N >= 1, all finite, equal dimensions).
    pub fn new(points: Vec<DVector<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::usage("a point sequence needs at least two points"));
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::usage("points must have positive dimension"));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::usage(format!(
                    "point {i} has dimension {}, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::usage(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        Ok(PointSequence { points })
    }

    /// The uniform chord from `a` to `b` with `n` segments.
    pub fn uniform_chord(a: &DVector<f64>, b: &DVector<f64>, n: usize) -> Result<Self> {
        if n < 1 {
            return Err(Error::usage("segment count must be at least 1"));
        }
        if a.len() != b.len() {
            return Err(Error::usage("chord endpoints have mismatched dimensions"));
        }
        let points = (0..=n)
            .map(|k| {
                let t = k as f64 / n as f64;
                a * (1.0 - t) + b * t
            })
            .collect();
        PointSequence::new(points)
    }

    pub fn n_segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn point(&self, n: usize) -> &DVector<f64> {
        &self.points[n]
    }

    pub fn first(&self) -> &DVector<f64> {
        &self.points[0]
    }

    pub fn last(&self) -> &DVector<f64> {
        &self.points[self.points.len() - 1]
    }

    /// The finite difference `beta^p(t_n) = N (p_{n+1} - p_n)`.
    pub fn finite_difference(&self, n: usize) -> Result<DVector<f64>> {
        if n >= self.n_segments() {
            return Err(Error::usage(format!(
                "segment index {n} out of range for N = {}",
                self.n_segments()
            )));
        }
        Ok((&self.points[n + 1] - &self.points[n]) * self.n_segments() as f64)
    }

    /// `K3^2 = (1/N) sum |beta_n|^2`, the discrete velocity L2 norm squared.
    pub fn mean_squared_velocity(&self) -> f64 {
        let n = self.n_segments() as f64;
        let mut acc = 0.0;
        for s in 0..self.n_segments() {
            acc += (&self.points[s + 1] - &self.points[s]).norm_squared();
        }
        acc * n
    }

    pub fn interpolant(&self) -> LinearInterpolant<'_> {
        LinearInterpolant { base: self }
    }

    /// Insert segment midpoints: 2N segments, pointwise-identical interpolant.
    pub fn refine(&self) -> PointSequence {
        let n = self.n_segments();
        let mut points = Vec::with_capacity(2 * n + 1);
        for s in 0..n {
            points.push(self.points[s].clone());
            points.push((&self.points[s] + &self.points[s + 1]) * 0.5);
        }
        points.push(self.points[n].clone());
        PointSequence { points }
    }

    /// Resample the interpolant on a finer uniform grid. When `new_n` is a
    /// multiple of N the interpolant is unchanged.
    pub fn resample(&self, new_n: usize) -> Result<PointSequence> {
        let interp = self.interpolant();
        let points = (0..=new_n)
            .map(|k| interp.evaluate(k as f64 / new_n as f64))
            .collect::<Result<_>>()?;
        PointSequence::new(points)
    }

    /// Serialize as the curve dump format `{"n_segments": N, "points": [[...], ...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&CurveDump::from(self)).expect("curve serialization cannot fail")
    }

    /// Parse the curve dump format, validating the segment count and finiteness.
    pub fn from_json(s: &str) -> Result<Self> {
        let dump: CurveDump =
            serde_json::from_str(s).map_err(|e| Error::config(format!("curve json: {e}")))?;
        dump.try_into()
    }

    /// Write CSV with header `t,x_1,..,x_D` and one row per grid point.
    pub fn write_csv<W: std::io::Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "t")?;
        for d in 1..=self.dim() {
            write!(w, ",x_{d}")?;
        }
        writeln!(w)?;
        let n = self.n_segments();
        for (k, p) in self.points.iter().enumerate() {
            write!(w, "{:.16e}", k as f64 / n as f64)?;
            for v in p.iter() {
                write!(w, ",{v:.16e}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct CurveDump {
    n_segments: usize,
    points: Vec<Vec<f64>>,
}

impl From<&PointSequence> for CurveDump {
    fn from(seq: &PointSequence) -> Self {
        CurveDump {
            n_segments: seq.n_segments(),
            points: seq
                .points
                .iter()
                .map(|p| p.iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<CurveDump> for PointSequence {
    type Error = Error;

    fn try_from(dump: CurveDump) -> Result<Self> {
        if dump.points.len() != dump.n_segments + 1 {
            return Err(Error::config(format!(
                "curve json: n_segments = {} but {} points given",
                dump.n_segments,
                dump.points.len()
            )));
        }
        PointSequence::new(dump.points.into_iter().map(DVector::from_vec).collect())
            .map_err(|e| Error::config(format!("curve json: {e}")))
    }
}

/// `gamma^pl`: the piecewise-linear curve through a point sequence.
#[derive(Debug, Clone, Copy)]
pub struct LinearInterpolant<'a> {
    base: &'a PointSequence,
}

impl<'a> LinearInterpolant<'a> {
    pub fn base(&self) -> &'a PointSequence {
        self.base
    }

    /// Evaluate at `t` in [0, 1]. At grid points where the local fraction
    /// computes to zero this returns the stored point bit-exactly.
    pub fn evaluate(&self, t: f64) -> Result<DVector<f64>> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::usage(format!("time {t} outside [0, 1]")));
        }
        let n = self.base.n_segments();
        let scaled = t * n as f64;
        let seg = (scaled.floor() as usize).min(n - 1);
        let s = scaled - seg as f64;
        Ok(&self.base.points[seg] * (1.0 - s) + &self.base.points[seg + 1] * s)
    }

    /// `E^g(gamma^pl)` by per-segment Gauss-Legendre quadrature of the metric
    /// factor; the velocity is the constant finite difference on each segment.
    pub fn continuous_energy(&self, metric: &MetricField, quad_order: usize) -> Result<f64> {
        self.integrate_segments(metric, quad_order, |q| q)
    }

    /// `L^g(gamma^pl)`, same quadrature with the square-root integrand.
    pub fn continuous_length(&self, metric: &MetricField, quad_order: usize) -> Result<f64> {
        self.integrate_segments(metric, quad_order, f64::sqrt)
    }

    fn integrate_segments(
        &self,
        metric: &MetricField,
        quad_order: usize,
        transform: impl Fn(f64) -> f64,
    ) -> Result<f64> {
        if quad_order < 2 {
            return Err(Error::usage("quadrature order must be at least 2"));
        }
        let rule = GaussLegendre::new(quad_order);
        let n = self.base.n_segments();
        let mut total = 0.0;
        for seg in 0..n {
            let beta = self.base.finite_difference(seg)?;
            let a = &self.base.points[seg];
            let b = &self.base.points[seg + 1];
            let mut failure = None;
            // Parametrize the segment by its local fraction; dt = ds / N.
            let contribution = rule.integrate(0.0, 1.0, |s| {
                let x = a * (1.0 - s) + b * s;
                match metric.quadratic_form(&x, &beta) {
                    Ok(q) => transform(q),
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
            total += contribution / n as f64;
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::REFERENCE_ORDER;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn v2(a: f64, b: f64) -> DVector<f64> {
        DVector::from_vec(vec![a, b])
    }

    fn seq(points: Vec<DVector<f64>>) -> PointSequence {
        PointSequence::new(points).unwrap()
    }

    #[test]
    fn finite_difference_is_scaled_increment() {
        let s = seq(vec![
            v2(5.0, 5.0),
            v2(0.0, 0.0),
            v2(1.0, 0.0),
            v2(1.0, 1.0),
            v2(2.0, 2.0),
        ]);
        assert_eq!(s.finite_difference(1).unwrap(), v2(4.0, 0.0));
    }

    #[test]
    fn finite_difference_of_constant_sequence_is_zero() {
        let s = seq(vec![v2(1.5, -2.0); 5]);
        for n in 0..4 {
            assert_eq!(s.finite_difference(n).unwrap().norm(), 0.0);
        }
    }

    #[test]
    fn finite_difference_quadratic_grid_value() {
        // p_n = n^2 / N^2 in 1-D with N = 10: beta_3 = (2*3 + 1)/10 = 0.7
        let n = 10usize;
        let s = seq((0..=n)
            .map(|k| DVector::from_vec(vec![(k * k) as f64 / (n * n) as f64]))
            .collect());
        assert_relative_eq!(
            s.finite_difference(3).unwrap()[0],
            0.7,
            max_relative = 1e-12
        );
    }

    #[test]
    fn finite_difference_index_out_of_range_errors() {
        let s = seq(vec![v2(0.0, 0.0), v2(1.0, 0.0)]);
        assert!(matches!(s.finite_difference(1), Err(Error::Usage(_))));
    }

    #[test]
    fn interpolant_hits_grid_points_bit_exactly() {
        let s = seq(vec![
            v2(0.3, -1.7),
            v2(2.0, 0.25),
            v2(-4.0, 9.0),
            v2(0.0, 0.0),
        ]);
        let c = s.interpolant();
        assert_eq!(c.evaluate(0.0).unwrap(), *s.point(0));
        assert_eq!(c.evaluate(1.0).unwrap(), *s.point(3));
        for n in 0..=3 {
            let t = n as f64 / 3.0;
            let p = c.evaluate(t).unwrap();
            assert_relative_eq!((p - s.point(n)).norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn interpolant_midpoint_is_affine_midpoint() {
        let s = seq(vec![v2(0.0, 0.0), v2(2.0, -4.0), v2(6.0, 6.0)]);
        let c = s.interpolant();
        let mid = c.evaluate(0.25).unwrap();
        assert_eq!(mid, (s.point(0) + s.point(1)) * 0.5);
    }

    #[test]
    fn interpolant_example_three_quarters() {
        let s = seq(vec![v2(0.0, 0.0), v2(1.0, 0.0), v2(1.0, 1.0)]);
        assert_eq!(s.interpolant().evaluate(0.75).unwrap(), v2(1.0, 0.5));
    }

    #[test]
    fn interpolant_rejects_out_of_range_time() {
        let s = seq(vec![v2(0.0, 0.0), v2(1.0, 0.0)]);
        assert!(matches!(
            s.interpolant().evaluate(-0.1),
            Err(Error::Usage(_))
        ));
        assert!(matches!(
            s.interpolant().evaluate(1.1),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn euclidean_energy_of_straight_chord() {
        let m = MetricField::euclidean(2);
        for n in [1usize, 4, 7] {
            let s = PointSequence::uniform_chord(&v2(0.0, 0.0), &v2(4.0 * PI, 0.0), n).unwrap();
            let e = s
                .interpolant()
                .continuous_energy(&m, REFERENCE_ORDER)
                .unwrap();
            assert_relative_eq!(e, 16.0 * PI * PI, max_relative = 1e-12);
        }
    }

    #[test]
    fn conformal_cos_energy_of_chord_matches_closed_form() {
        // E = (4 pi)^2 * (1 / 4 pi) * \int_0^{4 pi} (2 - cos x)^2 dx
        //   = 4 pi * 18 pi = 72 pi^2
        let m = MetricField::conformal_cos();
        let s = PointSequence::uniform_chord(&v2(0.0, 0.0), &v2(4.0 * PI, 0.0), 1).unwrap();
        let e = s.interpolant().continuous_energy(&m, 20).unwrap();
        assert_relative_eq!(e, 72.0 * PI * PI, max_relative = 1e-12);
    }

    #[test]
    fn zero_length_curve_has_zero_energy_and_length() {
        let m = MetricField::conformal_cos();
        let s = seq(vec![v2(1.0, 1.0); 4]);
        assert_eq!(s.interpolant().continuous_energy(&m, 16).unwrap(), 0.0);
        assert_eq!(s.interpolant().continuous_length(&m, 16).unwrap(), 0.0);
    }

    #[test]
    fn euclidean_length_of_chord() {
        let m = MetricField::euclidean(2);
        let s = PointSequence::uniform_chord(&v2(0.0, 0.0), &v2(4.0 * PI, 0.0), 5).unwrap();
        let l = s
            .interpolant()
            .continuous_length(&m, REFERENCE_ORDER)
            .unwrap();
        assert_relative_eq!(l, 4.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn conformal_cos_length_of_chord_is_minimal_length() {
        // \int_0^{4 pi} (2 - cos x) dx = 8 pi
        let m = MetricField::conformal_cos();
        let s = PointSequence::uniform_chord(&v2(0.0, 0.0), &v2(4.0 * PI, 0.0), 8).unwrap();
        let l = s
            .interpolant()
            .continuous_length(&m, REFERENCE_ORDER)
            .unwrap();
        assert_relative_eq!(l, 8.0 * PI, max_relative = 1e-12);
    }

    #[test]
    fn refine_inserts_midpoints_and_preserves_energy() {
        let m = MetricField::conformal_cos();
        let s = seq(vec![v2(0.0, 0.0), v2(2.0, 1.0), v2(5.0, -1.0)]);
        let r = s.refine();
        assert_eq!(r.n_segments(), 4);
        assert_eq!(*r.point(1), (s.point(0) + s.point(1)) * 0.5);
        let e0 = s
            .interpolant()
            .continuous_energy(&m, REFERENCE_ORDER)
            .unwrap();
        let e1 = r
            .interpolant()
            .continuous_energy(&m, REFERENCE_ORDER)
            .unwrap();
        assert_relative_eq!(e0, e1, max_relative = 1e-10);
        assert_eq!(r.refine().n_segments(), 8);
    }

    #[test]
    fn refine_single_segment_example() {
        let s = seq(vec![v2(0.0, 0.0), v2(2.0, 0.0)]);
        let r = s.refine();
        assert_eq!(r.points(), &[v2(0.0, 0.0), v2(1.0, 0.0), v2(2.0, 0.0)]);
    }

    #[test]
    fn quadrature_order_is_saturated_at_reference() {
        let m = MetricField::conformal_cos();
        let s = seq(vec![
            v2(0.0, 0.0),
            v2(1.3, 0.7),
            v2(2.9, -0.4),
            v2(4.0 * PI, 0.0),
        ]);
        let e16 = s.interpolant().continuous_energy(&m, 16).unwrap();
        let e32 = s.interpolant().continuous_energy(&m, 32).unwrap();
        assert!((e16 - e32).abs() <= 1e-9 * e32.abs());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = seq(vec![v2(0.0, 1.0), v2(2.0, 3.0)]);
        let json = s.to_json();
        let back = PointSequence::from_json(&json).unwrap();
        assert_eq!(back, s);
        assert!(PointSequence::from_json("{\"n_segments\":3,\"points\":[[0,0],[1,1]]}").is_err());
        assert!(PointSequence::from_json("not json").is_err());
    }

    #[test]
    fn csv_export_has_expected_header() {
        let s = seq(vec![v2(0.0, 1.0), v2(2.0, 3.0)]);
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("t,x_1,x_2\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
