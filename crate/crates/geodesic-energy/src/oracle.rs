//! Independent verification path: integrate the geodesic equation
//! `ddot(gamma)^k = -Gamma^k_ij dot(gamma)^i dot(gamma)^j` with classic RK4
//! and solve the two-point boundary value problem by damped-Newton shooting
//! on the initial velocity. This is a test fixture, not a user-facing solver.

use nalgebra::{DMatrix, DVector};

use crate::curve::PointSequence;
use crate::error::{Error, Result};
use crate::metric::MetricField;

/// Position and velocity along a geodesic.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub position: DVector<f64>,
    pub velocity: DVector<f64>,
}

fn acceleration(m: &MetricField, q: &DVector<f64>, v: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(-m.christoffel(q)?.contract(v, v))
}

/// RK4 on the first-order system (position, velocity) over t in [0, 1] with
/// uniform step 1/steps; returns the full trajectory (steps + 1 states).
pub fn integrate_geodesic(
    m: &MetricField,
    init: &GeodesicState,
    steps: usize,
) -> Result<Vec<GeodesicState>> {
    if steps < 1 {
        return Err(Error::usage("integration needs at least one step"));
    }
    if init.position.len() != m.dim() || init.velocity.len() != m.dim() {
        return Err(Error::usage("state dimension does not match the metric"));
    }
    let h = 1.0 / steps as f64;
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(init.clone());
    let mut q = init.position.clone();
    let mut v = init.velocity.clone();
    for step in 0..steps {
        let a1 = acceleration(m, &q, &v)?;
        let q2 = &q + &v * (0.5 * h);
        let v2 = &v + &a1 * (0.5 * h);
        let a2 = acceleration(m, &q2, &v2)?;
        let q3 = &q + &v2 * (0.5 * h);
        let v3 = &v + &a2 * (0.5 * h);
        let a3 = acceleration(m, &q3, &v3)?;
        let q4 = &q + &v3 * h;
        let v4 = &v + &a3 * h;
        let a4 = acceleration(m, &q4, &v4)?;

        q += (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        v += (&a1 + &a2 * 2.0 + &a3 * 2.0 + &a4) * (h / 6.0);
        if q.iter().chain(v.iter()).any(|x| !x.is_finite()) {
            return Err(Error::numeric(format!(
                "geodesic integration diverged at step {step}"
            )));
        }
        traj.push(GeodesicState {
            position: q.clone(),
            velocity: v.clone(),
        });
    }
    Ok(traj)
}

/// `g(dot gamma, dot gamma)` at a state; constant along exact geodesics.
pub fn metric_speed_squared(m: &MetricField, state: &GeodesicState) -> Result<f64> {
    m.quadratic_form(&state.position, &state.velocity)
}

/// Length of an integrated trajectory by the composite trapezoid over
/// `sqrt(g(dot gamma, dot gamma))` at the stored states.
pub fn trajectory_length(m: &MetricField, traj: &[GeodesicState]) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::usage("trajectory needs at least two states"));
    }
    let h = 1.0 / (traj.len() - 1) as f64;
    let mut acc = 0.0;
    for (i, s) in traj.iter().enumerate() {
        let w = if i == 0 || i == traj.len() - 1 {
            0.5
        } else {
            1.0
        };
        acc += w * metric_speed_squared(m, s)?.max(0.0).sqrt();
    }
    Ok(acc * h)
}

/// Downsample a trajectory to a point sequence with `n` segments
/// (the step count must be a multiple of `n`).
pub fn trajectory_to_sequence(traj: &[GeodesicState], n: usize) -> Result<PointSequence> {
    let steps = traj.len() - 1;
    if n < 1 || !steps.is_multiple_of(n) {
        return Err(Error::usage(format!(
            "cannot downsample {steps} steps to {n} segments"
        )));
    }
    let stride = steps / n;
    PointSequence::new((0..=n).map(|k| traj[k * stride].position.clone()).collect())
}

/// Find an initial velocity whose geodesic lands within `tol` of `x1` at
/// t = 1: damped Newton on the endpoint map with a forward-difference
/// Jacobian, starting from the chord velocity `x1 - x0`.
pub fn shoot(
    m: &MetricField,
    x0: &DVector<f64>,
    x1: &DVector<f64>,
    steps: usize,
    tol: f64,
) -> Result<GeodesicState> {
    if x0 == x1 {
        return Err(Error::usage("shooting requires distinct endpoints"));
    }
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::usage("shooting tolerance must be positive"));
    }
    let d = m.dim();
    let endpoint = |v: &DVector<f64>| -> Result<DVector<f64>> {
        let traj = integrate_geodesic(
            m,
            &GeodesicState {
                position: x0.clone(),
                velocity: v.clone(),
            },
            steps,
        )?;
        Ok(traj
            .last()
            .expect("trajectory is nonempty")
            .position
            .clone())
    };

    let mut v = x1 - x0;
    let mut residual = endpoint(&v)? - x1;
    for _ in 0..100 {
        if residual.norm() <= tol {
            return Ok(GeodesicState {
                position: x0.clone(),
                velocity: v,
            });
        }
        // Forward-difference Jacobian of the endpoint map.
        let fd = 1e-6 * v.norm().max(1.0);
        let mut jac = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut vj = v.clone();
            vj[j] += fd;
            let col = (endpoint(&vj)? - x1 - &residual) / fd;
            jac.set_column(j, &col);
        }
        let delta = jac
            .lu()
            .solve(&(-&residual))
            .ok_or_else(|| Error::OracleFailure("singular shooting Jacobian".into()))?;

        // Damping: halve until the residual actually shrinks.
        let mut lambda = 1.0;
        let mut improved = None;
        for _ in 0..30 {
            let v_trial = &v + &delta * lambda;
            let r_trial = endpoint(&v_trial)? - x1;
            if r_trial.norm() < residual.norm() {
                improved = Some((v_trial, r_trial));
                break;
            }
            lambda *= 0.5;
        }
        match improved {
            Some((v_new, r_new)) => {
                v = v_new;
                residual = r_new;
            }
            None => {
                return Err(Error::OracleFailure(
                    "damped Newton stalled without reducing the endpoint residual".into(),
                ))
            }
        }
    }
    Err(Error::OracleFailure(format!(
        "no convergence in 100 Newton iterations (residual {:.3e})",
        residual.norm()
    )))
}

/// Symmetric point-set Hausdorff distance between two sampled curves; a
/// practical proximity proxy between oracle trajectories and minimizers.
pub fn hausdorff_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    let one_sided = |from: &[DVector<f64>], to: &[DVector<f64>]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| (p - q).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}
