//! Study driver: convergence ladders, CSV emission, log-log slope fits, the
//! degenerate length-discretization table, and randomized gradient checks.
//!
//! Output is deterministic for a fixed config and seed: rules run on separate
//! threads but records are assembled in rule order, segment sums use a fixed
//! reduction order, and the only time-dependent column is `wall_seconds`.

use std::time::Instant;

use nalgebra::DVector;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::TheoryConstants;
use crate::config::Problem;
use crate::curve::PointSequence;
use crate::energy::{
    gradient_fd, length_left, length_trapezoidal, DiscreteObjective, Functional, QuadratureRule,
};
use crate::error::{Error, Result};
use crate::solver::{solve_ladder, SolveReport};

/// Default ladder: large enough to fit a slope, small enough for seconds-scale runs.
pub const DEFAULT_N_LADDER: [usize; 6] = [8, 16, 32, 64, 128, 256];

/// One row of a convergence study.
#[derive(Debug, Clone)]
pub struct StudyRecord {
    pub n: usize,
    pub rule: QuadratureRule,
    pub discrete_objective: f64,
    pub continuous_energy: f64,
    pub continuous_length: f64,
    /// |discrete objective - reference minimal energy|
    pub energy_error: f64,
    /// |continuous length - reference minimal length|
    pub length_error: f64,
    /// A-priori admissible interval for the discrete optimum around the
    /// reference minimal energy, from the rule's error envelope.
    pub envelope_lower: f64,
    pub envelope_upper: f64,
    pub iterations: usize,
    pub wall_seconds: f64,
}

impl StudyRecord {
    /// |L^2 - d^2|, the quantity whose decay the length convergence bounds control.
    pub fn length_sq_error(&self, d_ref: f64) -> f64 {
        (self.continuous_length * self.continuous_length - d_ref * d_ref).abs()
    }
}

/// Fitted convergence order of an error column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SlopeFit {
    /// All errors at machine scale; there is nothing to fit.
    Exact,
    /// Least-squares slope of log(error) against log(N).
    Fitted(f64),
    /// Too few usable points.
    Insufficient,
}

impl std::fmt::Display for SlopeFit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SlopeFit::Exact => write!(f, "exact"),
            SlopeFit::Fitted(s) => write!(f, "{s:.6}"),
            SlopeFit::Insufficient => write!(f, "insufficient"),
        }
    }
}

/// Ladder results for one rule.
#[derive(Debug, Clone)]
pub struct RuleStudy {
    pub rule: QuadratureRule,
    pub records: Vec<StudyRecord>,
    pub reports: Vec<SolveReport>,
    /// Reference distance used for the error columns (configured or estimated).
    pub d_ref: f64,
    /// A-priori constants assembled from the metric bounds and `d_ref`.
    pub constants: TheoryConstants,
    pub energy_slope: SlopeFit,
    pub length_sq_slope: SlopeFit,
    pub all_converged: bool,
}

/// Least-squares slope of log(err) vs log(N). Errors below
/// `1e-10 * max(1, scale)` are treated as exactly converged.
pub fn fit_log_log_slope(ns: &[usize], errs: &[f64], scale: f64) -> SlopeFit {
    assert_eq!(ns.len(), errs.len());
    let tol = 1e-10 * scale.max(1.0);
    if errs.iter().all(|&e| e < tol) {
        return SlopeFit::Exact;
    }
    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(errs)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&n, &e)| ((n as f64).ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return SlopeFit::Insufficient;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return SlopeFit::Insufficient;
    }
    SlopeFit::Fitted((n * sxy - sx * sy) / denom)
}

fn run_rule_ladder(problem: &Problem, rule: QuadratureRule, n_list: &[usize]) -> Result<RuleStudy> {
    let obj = DiscreteObjective::new(&problem.metric, rule, problem.functional);
    let mut reports = Vec::with_capacity(n_list.len());
    let mut walls = Vec::with_capacity(n_list.len());
    {
        // The same warm-start ladder as solve_ladder, timed rung by rung.
        let mut prev: Option<PointSequence> = None;
        for &n in n_list {
            let start = Instant::now();
            let warm = match &prev {
                None => crate::solver::initial_guess(&problem.x0, &problem.x1, n)?,
                Some(seq) if n == 2 * seq.n_segments() => seq.refine(),
                Some(seq) => seq.resample(n)?,
            };
            let report = crate::solver::minimize_from(
                &obj,
                &problem.x0,
                &problem.x1,
                warm,
                &problem.solve_config,
            )?;
            walls.push(start.elapsed().as_secs_f64());
            prev = Some(report.minimizer.clone());
            reports.push(report);
        }
    }

    let d_ref = problem.d_g.unwrap_or_else(|| {
        reports
            .last()
            .map(|r| r.continuous_length)
            .expect("ladder is nonempty")
    });
    let min_e_ref = d_ref * d_ref;
    let constants = TheoryConstants::new(&problem.metric, d_ref);

    let records: Vec<StudyRecord> = n_list
        .iter()
        .zip(reports.iter().zip(&walls))
        .map(|(&n, (r, &wall))| {
            let (envelope_lower, envelope_upper) = match rule {
                QuadratureRule::Trapezoidal => constants.trapezoidal_envelope(n, min_e_ref),
                QuadratureRule::LeftEndpoint => constants.left_envelope(n, min_e_ref),
            };
            StudyRecord {
                n,
                rule,
                discrete_objective: r.objective_value,
                continuous_energy: r.continuous_energy,
                continuous_length: r.continuous_length,
                energy_error: (r.objective_value - min_e_ref).abs(),
                length_error: (r.continuous_length - d_ref).abs(),
                envelope_lower,
                envelope_upper,
                iterations: r.iterations,
                wall_seconds: wall,
            }
        })
        .collect();

    let ns: Vec<usize> = records.iter().map(|r| r.n).collect();
    let e_errs: Vec<f64> = records.iter().map(|r| r.energy_error).collect();
    let l_errs: Vec<f64> = records.iter().map(|r| r.length_sq_error(d_ref)).collect();
    let energy_slope = fit_log_log_slope(&ns, &e_errs, min_e_ref);
    let length_sq_slope = fit_log_log_slope(&ns, &l_errs, min_e_ref);
    let all_converged = reports.iter().all(|r| r.converged);

    Ok(RuleStudy {
        rule,
        records,
        reports,
        d_ref,
        constants,
        energy_slope,
        length_sq_slope,
        all_converged,
    })
}

/// Run a convergence study: one warm-started ladder per rule, rules in
/// parallel, assembled in the order given.
pub fn run_study(
    problem: &Problem,
    n_list: &[usize],
    rules: &[QuadratureRule],
) -> Result<Vec<RuleStudy>> {
    if n_list.len() < 3 {
        return Err(Error::usage(
            "a study needs at least 3 ladder rungs to fit a slope",
        ));
    }
    for w in n_list.windows(2) {
        if w[1] <= w[0] || w[1] % w[0] != 0 {
            return Err(Error::usage(
                "n_list must be strictly increasing with each entry dividing the next",
            ));
        }
    }
    if rules.is_empty() {
        return Err(Error::usage("no rules selected"));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = rules
            .iter()
            .map(|&rule| scope.spawn(move || run_rule_ladder(problem, rule, n_list)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("study thread panicked"))
            .collect()
    })
}

/// Emit the study CSV: fixed header, one row per (rule, N), slope footer
/// lines per rule. All numeric columns carry 17 significant digits.
pub fn write_study_csv<W: std::io::Write>(studies: &[RuleStudy], w: &mut W) -> std::io::Result<()> {
    writeln!(
        w,
        "n,rule,discrete_objective,continuous_energy,continuous_length,energy_error,length_error,envelope_lower,envelope_upper,iterations,wall_seconds"
    )?;
    for study in studies {
        for r in &study.records {
            writeln!(
                w,
                "{},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{:.6e}",
                r.n,
                r.rule,
                r.discrete_objective,
                r.continuous_energy,
                r.continuous_length,
                r.energy_error,
                r.length_error,
                r.envelope_lower,
                r.envelope_upper,
                r.iterations,
                r.wall_seconds
            )?;
        }
    }
    for study in studies {
        writeln!(
            w,
            "# energy_error_slope,{},{}",
            study.rule, study.energy_slope
        )?;
        writeln!(
            w,
            "# length_sq_error_slope,{},{}",
            study.rule, study.length_sq_slope
        )?;
        writeln!(w, "# d_ref,{},{:.16e}", study.rule, study.d_ref)?;
        writeln!(w, "# k1,{},{:.16e}", study.rule, study.constants.k1())?;
        writeln!(w, "# k2,{},{:.16e}", study.rule, study.constants.k2())?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// The degenerate length-discretization table

/// Monotone sequence with values in {0, 2 pi, 4 pi} x {0}: every left
/// endpoint sees a unit conformal factor, so the left-rule length is exactly
/// the Euclidean total variation 4 pi.
pub fn degenerate_left_sequence(n: usize) -> PointSequence {
    let two_pi = 2.0 * std::f64::consts::PI;
    let points = (0..=n)
        .map(|k| {
            let x = if 3 * k <= n {
                0.0
            } else if 3 * k <= 2 * n {
                two_pi
            } else {
                2.0 * two_pi
            };
            DVector::from_vec(vec![x, 0.0])
        })
        .collect();
    PointSequence::new(points).expect("degenerate sequence is valid")
}

/// Monotone sequence with values in {0, 4 pi} x {0}: the single occupied
/// midpoint is 2 pi, where the conformal factor is 1.
pub fn degenerate_trapezoidal_sequence(n: usize) -> PointSequence {
    let four_pi = 4.0 * std::f64::consts::PI;
    let points = (0..=n)
        .map(|k| {
            let x = if 2 * k <= n { 0.0 } else { four_pi };
            DVector::from_vec(vec![x, 0.0])
        })
        .collect();
    PointSequence::new(points).expect("degenerate sequence is valid")
}

/// One row of the counterexample table.
#[derive(Debug, Clone)]
pub struct CounterexampleRow {
    pub n: usize,
    /// L_{l,N} at the degenerate left-rule sequence (exactly 4 pi).
    pub length_left_degenerate: f64,
    /// L_{tra,N} at the degenerate trapezoidal sequence (exactly 4 pi).
    pub length_trapezoidal_degenerate: f64,
    /// Infimum of both discrete lengths over admissible sequences.
    pub discrete_length_infimum: f64,
    /// Continuous length of the trapezoidal energy-route minimizer.
    pub energy_route_continuous_length: f64,
}

/// Reproduce the failure of direct length discretization on the conformal-cos
/// instance: both discrete lengths are pinned at 4 pi at every N while the
/// energy route recovers the true minimal length 8 pi.
pub fn run_counterexample(n_list: &[usize]) -> Result<Vec<CounterexampleRow>> {
    let problem = crate::config::counterexample_config().build()?;
    let metric = &problem.metric;
    let obj = DiscreteObjective::new(metric, QuadratureRule::Trapezoidal, Functional::Energy);
    let reports = solve_ladder(
        &obj,
        &problem.x0,
        &problem.x1,
        n_list,
        &problem.solve_config,
    )?;
    n_list
        .iter()
        .zip(reports)
        .map(|(&n, report)| {
            Ok(CounterexampleRow {
                n,
                length_left_degenerate: length_left(metric, &degenerate_left_sequence(n))?,
                length_trapezoidal_degenerate: length_trapezoidal(
                    metric,
                    &degenerate_trapezoidal_sequence(n),
                )?,
                discrete_length_infimum: 4.0 * std::f64::consts::PI,
                energy_route_continuous_length: report.continuous_length,
            })
        })
        .collect()
}

pub fn write_counterexample_csv<W: std::io::Write>(
    rows: &[CounterexampleRow],
    w: &mut W,
) -> std::io::Result<()> {
    writeln!(
        w,
        "n,length_left_degenerate,length_trapezoidal_degenerate,discrete_length_infimum,energy_route_continuous_length,minimal_length"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            r.n,
            r.length_left_degenerate,
            r.length_trapezoidal_degenerate,
            r.discrete_length_infimum,
            r.energy_route_continuous_length,
            8.0 * std::f64::consts::PI
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Randomized gradient check

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub samples: usize,
    pub max_rel_discrepancy: f64,
    pub pass: bool,
}

/// Compare analytic gradients against central finite differences on random
/// sequences drawn around the instance geometry. Passes when the worst
/// relative discrepancy stays below 1e-5.
pub fn gradcheck(problem: &Problem, samples: usize, seed: u64) -> Result<GradcheckReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let obj = DiscreteObjective::new(&problem.metric, problem.rule, problem.functional);
    let a = problem.x0.representative();
    let b = problem.x1.representative();
    let scale = (&b - &a).norm().max(1.0);
    let dim = problem.metric.dim();

    let mut max_rel: f64 = 0.0;
    for _ in 0..samples {
        let seq = loop {
            let n = rng.gen_range(2..=10usize);
            let chord = PointSequence::uniform_chord(&a, &b, n)?;
            let points: Vec<DVector<f64>> = chord
                .points()
                .iter()
                .map(|p| p + DVector::from_fn(dim, |_, _| rng.gen_range(-0.5..0.5) * scale))
                .collect();
            let seq = PointSequence::new(points)?;
            if problem.functional == Functional::Energy {
                break seq;
            }
            // Length objectives are nondifferentiable at zero-velocity
            // segments; skip samples too close to one.
            let min_beta = (0..seq.n_segments())
                .map(|s| seq.finite_difference(s).map(|b| b.norm()))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            if min_beta > 1e-6 * scale {
                break seq;
            }
        };
        let analytic = obj.gradient(&seq)?;
        let fd = gradient_fd(&obj, &seq)?;
        let fd_scale = fd.iter().map(|g| g.amax()).fold(1.0f64, f64::max);
        for (g, h) in analytic.iter().zip(&fd) {
            max_rel = max_rel.max((g - h).amax() / fd_scale);
        }
    }
    Ok(GradcheckReport {
        samples,
        max_rel_discrepancy: max_rel,
        pass: max_rel < 1e-5,
    })
}
