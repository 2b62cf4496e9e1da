//! Minimization of a discrete objective over point sequences with endpoint
//! constraints.
//!
//! Point-to-point energy problems freeze the endpoints and run limited-memory
//! quasi-Newton (two-loop recursion) with Armijo backtracking over the
//! interior points. Problems with set constraints run projected gradient with
//! a Barzilai-Borwein step and an Armijo safeguard, projecting the endpoint
//! variables after every step. Length-functional problems run plain
//! projected gradient with a small fixed step; they exist to reproduce the
//! degenerate behavior of direct length discretization and are expected to
//! stagnate near its flat minimizer sets.

use std::collections::VecDeque;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::curve::PointSequence;
use crate::energy::{DiscreteObjective, Functional};
use crate::error::{Error, Result};
use crate::quad::REFERENCE_ORDER;
use crate::sets::{validate_pair, EndpointSet};

/// Stopping and line-search parameters.
#[derive(Debug, Clone, Serialize)]
pub struct SolveConfig {
    pub max_iters: usize,
    /// Stop when the (projected) gradient infinity norm drops below
    /// `grad_tol * max(1, initial objective)`.
    pub grad_tol: f64,
    /// Quasi-Newton history length.
    pub memory: usize,
    pub armijo_c: f64,
    pub backtrack: f64,
    pub max_backtracks: usize,
    /// Seed for the optional randomized multi-start.
    pub seed: u64,
    /// Run 4 extra solves from perturbed initial chords and keep the best.
    pub multi_start: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            max_iters: 5000,
            grad_tol: 1e-8,
            memory: 10,
            armijo_c: 1e-4,
            backtrack: 0.5,
            max_backtracks: 40,
            seed: 0,
            multi_start: false,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.memory == 0 {
            return Err(Error::config("max_iters and memory must be positive"));
        }
        if !(self.grad_tol > 0.0 && self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::config("grad_tol and armijo_c must be in (0, 1)"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(Error::config("backtrack factor must be in (0, 1)"));
        }
        Ok(())
    }
}

/// Result of one solve.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub minimizer: PointSequence,
    /// Value of the discrete objective at the minimizer.
    pub objective_value: f64,
    /// `E^g` of the linear interpolant at reference quadrature.
    pub continuous_energy: f64,
    /// `L^g` of the linear interpolant at reference quadrature.
    pub continuous_length: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value at every accepted iterate, starting with the initial one.
    pub trace: Vec<f64>,
    pub diagnostic: Option<String>,
}

impl SolveReport {
    pub fn to_json(&self) -> String {
        let minimizer: serde_json::Value =
            serde_json::from_str(&self.minimizer.to_json()).expect("curve json is valid");
        serde_json::to_string_pretty(&serde_json::json!({
            "minimizer": minimizer,
            "objective_value": self.objective_value,
            "continuous_energy": self.continuous_energy,
            "continuous_length": self.continuous_length,
            "iterations": self.iterations,
            "converged": self.converged,
            "trace": self.trace,
            "diagnostic": self.diagnostic,
        }))
        .expect("report serialization cannot fail")
    }
}

/// Representative endpoints (5 rounds of alternating projection between the
/// sets), then the uniform chord between them.
pub fn initial_guess(x0: &EndpointSet, x1: &EndpointSet, n: usize) -> Result<PointSequence> {
    validate_pair(x0, x1)?;
    if n < 1 {
        return Err(Error::usage("segment count must be at least 1"));
    }
    let mut a = x0.representative();
    let mut b = x1.representative();
    for _ in 0..5 {
        a = x0.project(&b);
        b = x1.project(&a);
    }
    PointSequence::uniform_chord(&a, &b, n)
}

/// Minimize `obj` over sequences with `n` segments and endpoints constrained
/// to `x0` and `x1`, starting from [`initial_guess`].
pub fn minimize(
    obj: &DiscreteObjective,
    x0: &EndpointSet,
    x1: &EndpointSet,
    n: usize,
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    let init = initial_guess(x0, x1, n)?;
    minimize_from(obj, x0, x1, init, cfg)
}

/// As [`minimize`], but warm-started from `init` (endpoints are projected
/// onto their sets before iterating).
pub fn minimize_from(
    obj: &DiscreteObjective,
    x0: &EndpointSet,
    x1: &EndpointSet,
    init: PointSequence,
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    validate_pair(x0, x1)?;
    if init.dim() != obj.metric.dim() || init.dim() != x0.dim() {
        return Err(Error::usage(
            "metric, endpoint sets, and sequence dimensions must agree",
        ));
    }

    if !cfg.multi_start {
        return minimize_single(obj, x0, x1, init, cfg);
    }

    let chord_scale = (init.last() - init.first()).norm().max(1.0);
    let mut best: Option<SolveReport> = None;
    for restart in 0..5u64 {
        let start = if restart == 0 {
            init.clone()
        } else {
            perturb_interior(&init, 1e-2 * chord_scale, cfg.seed.wrapping_add(restart))?
        };
        let report = minimize_single(obj, x0, x1, start, cfg)?;
        let better = match &best {
            None => true,
            Some(b) => {
                (report.converged, -report.objective_value) > (b.converged, -b.objective_value)
            }
        };
        if better {
            best = Some(report);
        }
    }
    Ok(best.expect("at least one restart ran"))
}

fn perturb_interior(seq: &PointSequence, magnitude: f64, seed: u64) -> Result<PointSequence> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = seq.n_segments();
    let points = seq
        .points()
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if k == 0 || k == n {
                p.clone()
            } else {
                p + DVector::from_fn(p.len(), |_, _| rng.gen_range(-magnitude..magnitude))
            }
        })
        .collect();
    PointSequence::new(points)
}

fn minimize_single(
    obj: &DiscreteObjective,
    x0: &EndpointSet,
    x1: &EndpointSet,
    mut init: PointSequence,
    cfg: &SolveConfig,
) -> Result<SolveReport> {
    // Restore endpoint feasibility without touching interior points.
    {
        let mut pts = init.points().to_vec();
        let n = init.n_segments();
        pts[0] = x0.project(&pts[0]);
        pts[n] = x1.project(&pts[n]);
        init = PointSequence::new(pts)?;
    }

    let fixed_endpoints =
        matches!(x0, EndpointSet::Point(_)) && matches!(x1, EndpointSet::Point(_));

    let outcome = match obj.functional {
        Functional::Length => fixed_step_descent(obj, x0, x1, init, cfg)?,
        Functional::Energy if fixed_endpoints => lbfgs_interior(obj, init, cfg)?,
        Functional::Energy => projected_bb(obj, x0, x1, init, cfg)?,
    };
    finish_report(obj, outcome)
}

struct RawOutcome {
    seq: PointSequence,
    objective: f64,
    iterations: usize,
    converged: bool,
    trace: Vec<f64>,
    diagnostic: Option<String>,
}

fn finish_report(obj: &DiscreteObjective, raw: RawOutcome) -> Result<SolveReport> {
    let interp = raw.seq.interpolant();
    let continuous_energy = interp.continuous_energy(obj.metric, REFERENCE_ORDER)?;
    let continuous_length = interp.continuous_length(obj.metric, REFERENCE_ORDER)?;
    Ok(SolveReport {
        minimizer: raw.seq,
        objective_value: raw.objective,
        continuous_energy,
        continuous_length,
        iterations: raw.iterations,
        converged: raw.converged,
        trace: raw.trace,
        diagnostic: raw.diagnostic,
    })
}

// ---------------------------------------------------------------------------
// flattening helpers

fn flatten(points: &[DVector<f64>], range: std::ops::Range<usize>) -> Vec<f64> {
    let mut z = Vec::with_capacity(range.len() * points[0].len());
    for p in &points[range] {
        z.extend(p.iter());
    }
    z
}

fn write_back(points: &mut [DVector<f64>], range: std::ops::Range<usize>, z: &[f64]) {
    let d = points[0].len();
    for (slot, k) in range.enumerate() {
        for a in 0..d {
            points[k][a] = z[slot * d + a];
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------------------
// L-BFGS over interior points (both endpoints fixed)

fn lbfgs_interior(
    obj: &DiscreteObjective,
    init: PointSequence,
    cfg: &SolveConfig,
) -> Result<RawOutcome> {
    let n = init.n_segments();
    let mut points = init.points().to_vec();

    if n == 1 {
        // No interior degrees of freedom: the chord is the minimizer.
        let objective = obj.value(&init)?;
        return Ok(RawOutcome {
            seq: init,
            objective,
            iterations: 0,
            converged: true,
            trace: vec![objective],
            diagnostic: None,
        });
    }

    let eval = |points: &mut Vec<DVector<f64>>, z: &[f64]| -> Result<(f64, Vec<f64>)> {
        write_back(points, 1..n, z);
        let seq = PointSequence::new(points.clone())?;
        let f = obj.value(&seq)?;
        let grad = obj.gradient(&seq)?;
        Ok((f, flatten(&grad, 1..n)))
    };

    let mut z = flatten(&points, 1..n);
    let (mut f, mut g) = eval(&mut points, &z)?;
    let tol = cfg.grad_tol * f.abs().max(1.0);
    let mut trace = vec![f];
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(cfg.memory);
    let mut gamma = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    let mut diagnostic = None;

    for _ in 0..cfg.max_iters {
        if inf_norm(&g) < tol {
            converged = true;
            break;
        }
        let mut d = two_loop(&g, &hist, gamma);
        for v in &mut d {
            *v = -*v;
        }
        let mut gd = dot(&g, &d);
        if gd >= 0.0 || gd.is_nan() {
            // Not a descent direction; fall back to steepest descent.
            d = g.iter().map(|v| -v).collect();
            gd = -dot(&g, &g);
            hist.clear();
        }

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let z_new: Vec<f64> = z.iter().zip(&d).map(|(zi, di)| zi + alpha * di).collect();
            let (f_new, g_new) = eval(&mut points, &z_new)?;
            if f_new <= f + cfg.armijo_c * alpha * gd {
                accepted = Some((z_new, f_new, g_new));
                break;
            }
            alpha *= cfg.backtrack;
        }
        let Some((z_new, f_new, g_new)) = accepted else {
            diagnostic = Some(format!(
                "line search failed after {} backtracks at iteration {}",
                cfg.max_backtracks, iterations
            ));
            break;
        };

        let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        let yy = dot(&y, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * yy.sqrt() {
            if hist.len() == cfg.memory {
                hist.pop_front();
            }
            gamma = sy / yy;
            hist.push_back((s, y, 1.0 / sy));
        }
        z = z_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        trace.push(f);
    }

    write_back(&mut points, 1..n, &z);
    Ok(RawOutcome {
        seq: PointSequence::new(points)?,
        objective: f,
        iterations,
        converged,
        trace,
        diagnostic,
    })
}

fn two_loop(g: &[f64], hist: &VecDeque<(Vec<f64>, Vec<f64>, f64)>, gamma: f64) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(hist.len());
    for (s, y, rho) in hist.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    for qi in &mut q {
        *qi *= gamma;
    }
    for ((s, y, rho), a) in hist.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &q);
        for (qi, si) in q.iter_mut().zip(s) {
            *qi += (a - b) * si;
        }
    }
    q
}

// ---------------------------------------------------------------------------
// Projected gradient with Barzilai-Borwein step (set-constrained endpoints)

fn projected_bb(
    obj: &DiscreteObjective,
    x0: &EndpointSet,
    x1: &EndpointSet,
    init: PointSequence,
    cfg: &SolveConfig,
) -> Result<RawOutcome> {
    let n = init.n_segments();
    let d = init.dim();
    let mut points = init.points().to_vec();

    let project = |z: &mut Vec<f64>| {
        let p0 = x0.project(&DVector::from_column_slice(&z[0..d]));
        let p1 = x1.project(&DVector::from_column_slice(&z[n * d..(n + 1) * d]));
        z[0..d].copy_from_slice(p0.as_slice());
        z[n * d..(n + 1) * d].copy_from_slice(p1.as_slice());
    };
    let eval = |points: &mut Vec<DVector<f64>>, z: &[f64]| -> Result<(f64, Vec<f64>)> {
        write_back(points, 0..n + 1, z);
        let seq = PointSequence::new(points.clone())?;
        let f = obj.value(&seq)?;
        let grad = obj.gradient(&seq)?;
        Ok((f, flatten(&grad, 0..n + 1)))
    };

    let mut z = flatten(&points, 0..n + 1);
    project(&mut z);
    let (mut f, mut g) = eval(&mut points, &z)?;
    let tol = cfg.grad_tol * f.abs().max(1.0);
    let mut trace = vec![f];
    let mut alpha = 1.0 / inf_norm(&g).max(1e-12);
    let mut iterations = 0;
    let mut converged = false;
    let mut diagnostic = None;

    for _ in 0..cfg.max_iters {
        // Unit-step projected gradient mapping as the stationarity measure.
        let mut mapped: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - gi).collect();
        project(&mut mapped);
        let pg_norm = z
            .iter()
            .zip(&mapped)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if pg_norm < tol {
            converged = true;
            break;
        }

        let mut accepted = None;
        for _ in 0..=cfg.max_backtracks {
            let mut z_trial: Vec<f64> = z.iter().zip(&g).map(|(zi, gi)| zi - alpha * gi).collect();
            project(&mut z_trial);
            let step_sq: f64 = z_trial.iter().zip(&z).map(|(a, b)| (a - b) * (a - b)).sum();
            if step_sq == 0.0 {
                break;
            }
            let (f_trial, g_trial) = eval(&mut points, &z_trial)?;
            if f_trial <= f - (cfg.armijo_c / alpha) * step_sq {
                accepted = Some((z_trial, f_trial, g_trial));
                break;
            }
            alpha *= cfg.backtrack;
        }
        let Some((z_new, f_new, g_new)) = accepted else {
            diagnostic = Some(format!(
                "projected line search made no progress at iteration {iterations}"
            ));
            break;
        };

        let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        alpha = if sy > 0.0 {
            (dot(&s, &s) / sy).clamp(1e-12, 1e12)
        } else {
            (alpha * 2.0).min(1e12)
        };

        z = z_new;
        f = f_new;
        g = g_new;
        iterations += 1;
        trace.push(f);
    }

    write_back(&mut points, 0..n + 1, &z);
    Ok(RawOutcome {
        seq: PointSequence::new(points)?,
        objective: f,
        iterations,
        converged,
        trace,
        diagnostic,
    })
}

// ---------------------------------------------------------------------------
// Plain fixed-step projected gradient for length functionals

fn fixed_step_descent(
    obj: &DiscreteObjective,
    x0: &EndpointSet,
    x1: &EndpointSet,
    init: PointSequence,
    cfg: &SolveConfig,
) -> Result<RawOutcome> {
    let n = init.n_segments();
    let d = init.dim();
    let mut points = init.points().to_vec();
    let step = 1e-3 * (init.last() - init.first()).norm().max(1.0);

    let mut seq = PointSequence::new(points.clone())?;
    let mut f = obj.value(&seq)?;
    let tol = cfg.grad_tol * f.abs().max(1.0);
    let mut trace = vec![f];
    let mut iterations = 0;
    let mut converged = false;
    let mut diagnostic = None;

    for _ in 0..cfg.max_iters {
        let grad = match obj.gradient(&seq) {
            Ok(g) => g,
            Err(Error::NondifferentiablePoint { segment }) => {
                diagnostic = Some(format!(
                    "stopped at nondifferentiable point (zero-velocity segment {segment})"
                ));
                break;
            }
            Err(e) => return Err(e),
        };
        let gnorm = grad.iter().map(|g| g.amax()).fold(0.0f64, f64::max);
        if gnorm < tol {
            converged = true;
            break;
        }
        for (k, p) in points.iter_mut().enumerate() {
            *p -= &grad[k] * step;
        }
        points[0] = x0.project(&points[0]);
        points[n] = x1.project(&points[n]);
        let _ = d;
        seq = PointSequence::new(points.clone())?;
        let f_new = obj.value(&seq)?;
        f = f_new;
        iterations += 1;
        trace.push(f);
    }

    Ok(RawOutcome {
        seq,
        objective: f,
        iterations,
        converged,
        trace,
        diagnostic,
    })
}

// ---------------------------------------------------------------------------
// Warm-started ladder over increasing N

/// Solve along `n_list` (strictly increasing, each dividing the next),
/// warm-starting each solve from the previous minimizer: a midpoint
/// refinement when the ratio is 2, a uniform resampling of the interpolant
/// otherwise.
pub fn solve_ladder(
    obj: &DiscreteObjective,
    x0: &EndpointSet,
    x1: &EndpointSet,
    n_list: &[usize],
    cfg: &SolveConfig,
) -> Result<Vec<SolveReport>> {
    if n_list.is_empty() {
        return Err(Error::usage("n_list must be nonempty"));
    }
    for w in n_list.windows(2) {
        if w[1] <= w[0] || w[1] % w[0] != 0 {
            return Err(Error::usage(
                "n_list must be strictly increasing with each entry dividing the next",
            ));
        }
    }
    let mut reports = Vec::with_capacity(n_list.len());
    let mut prev: Option<PointSequence> = None;
    for &n in n_list {
        let start = match &prev {
            None => initial_guess(x0, x1, n)?,
            Some(seq) if n == 2 * seq.n_segments() => seq.refine(),
            Some(seq) => seq.resample(n)?,
        };
        let report = minimize_from(obj, x0, x1, start, cfg)?;
        prev = Some(report.minimizer.clone());
        reports.push(report);
    }
    Ok(reports)
}
