//! Minimax load-acceleration reference by sequential conic programming.
//!
//! The decision vector is `p = (ε, y_d(4), ..., y_d(N-1))`. The load
//! acceleration at `k` is a linear map of three consecutive samples, so
//! `a_L(k) ≤ ε` is a second-order cone and enters every subproblem exactly.
//! The input bounds go through the parameterizing map and are linearized
//! with central differences; they are made elastic with an ℓ1 penalty and
//! the step is limited by a box trust region.
//!
//! Curvature comes from the input constraints only: per window, a
//! finite-difference Hessian of `λ_F·F + λ_M·M` with the previous duals,
//! clipped to its positive semidefinite part. A step that is poorly
//! predicted gets one second-order correction, re-solving with the
//! constraint residual of the trial point folded into the bounds.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, NonnegativeConeT, SecondOrderConeT, SolverStatus,
    SupportedConeT,
};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{flat_parameterize, FlatOutput, FlatWindow};
use crate::params::CraneParams;

use super::{polynomial_reference, ReferenceTrajectory, REST_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Allowed violation of the input bounds \[N, N·m\].
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Initial trust radius on the change of each load acceleration \[m/s²\].
    pub initial_radius: f64,
    pub min_radius: f64,
    /// Initial ℓ1 penalty on input-bound violations.
    pub penalty: f64,
    /// Proximal weight on the step.
    pub proximal: f64,
    /// Stop when the predicted merit reduction falls below this, relative to the merit.
    pub stationarity: f64,
    /// Relative margin for reporting a constraint as active.
    pub active_margin: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            max_iterations: 400,
            initial_radius: 0.5,
            min_radius: 1e-10,
            penalty: 1.0,
            proximal: 1e-6,
            stationarity: 1e-9,
            active_margin: 1e-4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizationProblem {
    pub start: FlatOutput,
    pub end: FlatOutput,
    /// Transition time `T = N·ts` \[s\].
    pub horizon: f64,
    pub ts: f64,
    pub force_max: f64,
    pub torque_max: f64,
    pub settings: SolverSettings,
}

impl OptimizationProblem {
    /// Number of sampling intervals `N = T/ts`.
    pub fn steps(&self) -> Result<usize> {
        if !(self.ts > 0.0 && self.horizon > 0.0) {
            return Err(Error::InvalidReference(format!(
                "horizon {} and sampling time {} must be positive",
                self.horizon, self.ts
            )));
        }
        let n = (self.horizon / self.ts).round();
        if (n * self.ts - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::InvalidReference(format!(
                "horizon T={} is not a multiple of ts={}",
                self.horizon, self.ts
            )));
        }
        let n = n as usize;
        if n < 2 * REST_SAMPLES {
            return Err(Error::InvalidReference(format!(
                "horizon of {n} samples leaves no free samples"
            )));
        }
        if !(self.force_max > 0.0 && self.torque_max > 0.0) {
            return Err(Error::InvalidReference("input bounds must be positive".into()));
        }
        Ok(n)
    }
}

/// Degree-7 transition whose samples `y_d(0..3)` and `y_d(N..N+3)` are the rest points.
pub fn polynomial_initializer(problem: &OptimizationProblem) -> Result<ReferenceTrajectory> {
    let n = problem.steps()?;
    let moving = (n - (REST_SAMPLES - 1)) as f64 * problem.ts;
    polynomial_reference(problem.start, problem.end, moving, problem.ts)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintActivity {
    pub acceleration: Vec<usize>,
    pub force: Vec<usize>,
    pub torque: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationLog {
    pub iteration: usize,
    pub epsilon: f64,
    pub violation: f64,
    pub radius: f64,
    pub predicted: f64,
    pub ratio: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizationReport {
    pub epsilon: f64,
    pub initial_epsilon: f64,
    pub iterations: usize,
    pub converged: bool,
    pub termination: String,
    /// Largest input-bound violation at the returned iterate.
    pub max_violation: f64,
    pub penalty: f64,
    pub a_l: Vec<f64>,
    pub force: Vec<f64>,
    pub torque: Vec<f64>,
    pub active: ConstraintActivity,
    pub problem: ProblemEcho,
    pub history: Vec<IterationLog>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemEcho {
    pub start: [f64; 2],
    pub end: [f64; 2],
    pub horizon: f64,
    pub ts: f64,
    pub steps: usize,
    pub force_max: f64,
    pub torque_max: f64,
    pub settings: SolverSettings,
}

impl OptimizationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Best iterate and report of a failed optimization.
#[derive(Debug, Clone)]
pub struct OptimizerFailure {
    pub message: String,
    pub best: ReferenceTrajectory,
    pub report: OptimizationReport,
}

impl std::fmt::Display for OptimizerFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (epsilon {:.6}, max violation {:.3e} after {} iterations)",
            self.message, self.report.epsilon, self.report.max_violation, self.report.iterations
        )
    }
}

/// Load accelerations and inputs at `k = 0..N-1`.
#[derive(Debug, Clone)]
struct Evaluation {
    acc: Vec<(f64, f64)>,
    force: Vec<f64>,
    torque: Vec<f64>,
}

impl Evaluation {
    fn a_l(&self) -> Vec<f64> {
        self.acc.iter().map(|(x, y)| x.hypot(*y)).collect()
    }

    fn epsilon(&self) -> f64 {
        self.a_l().into_iter().fold(0.0, f64::max)
    }

    fn violation(&self, p: &OptimizationProblem) -> (f64, f64) {
        let mut sum = 0.0;
        let mut max: f64 = 0.0;
        for (f, m) in self.force.iter().zip(&self.torque) {
            let vf = (f.abs() - p.force_max).max(0.0);
            let vm = (m.abs() - p.torque_max).max(0.0);
            sum += vf + vm;
            max = max.max(vf).max(vm);
        }
        (sum, max)
    }
}

fn window(samples: &[FlatOutput], k: usize) -> FlatWindow {
    FlatWindow::from_slice(samples, k).expect("samples cover k..k+4")
}

fn evaluate(samples: &[FlatOutput], n: usize, params: &CraneParams, ts: f64) -> Result<Evaluation> {
    let mut eval = Evaluation {
        acc: Vec::with_capacity(n),
        force: Vec::with_capacity(n),
        torque: Vec::with_capacity(n),
    };
    for k in 0..n {
        let w = window(samples, k);
        eval.acc.push(w.accelerations(ts)[0]);
        let (_, u) = flat_parameterize(&w, params, ts)?;
        eval.force.push(u.force);
        eval.torque.push(u.torque);
    }
    Ok(eval)
}

/// Variable layout of one subproblem: `[ε, δx(4..N), δy(4..N), s_F(0..N), s_M(0..N)]`,
/// with sample steps `ts²·δ`.
struct Layout {
    n: usize,
    free: usize,
}

impl Layout {
    fn delta(&self, k: usize, channel: usize) -> Option<usize> {
        (REST_SAMPLES..self.n)
            .contains(&k)
            .then(|| 1 + channel * self.free + k - REST_SAMPLES)
    }

    /// Coefficients of `a(k)` in the steps of the free samples `k..k+2`.
    fn second_difference(&self, k: usize, channel: usize) -> Vec<(usize, f64)> {
        [1.0, -2.0, 1.0]
            .iter()
            .enumerate()
            .filter_map(|(i, c)| self.delta(k + i, channel).map(|v| (v, *c)))
            .collect()
    }

    fn slack_force(&self, k: usize) -> usize {
        1 + 2 * self.free + k
    }

    fn slack_torque(&self, k: usize) -> usize {
        1 + 2 * self.free + self.n + k
    }

    fn vars(&self) -> usize {
        1 + 2 * self.free + 2 * self.n
    }
}

fn apply_step(samples: &[FlatOutput], layout: &Layout, step: &[f64], scale: f64) -> Vec<FlatOutput> {
    let mut out = samples.to_vec();
    for (k, y) in out.iter_mut().enumerate() {
        if let Some(i) = layout.delta(k, 0) {
            y.x_l += scale * step[i];
        }
        if let Some(i) = layout.delta(k, 1) {
            y.y_l += scale * step[i];
        }
    }
    out
}

/// Central-difference sensitivities of `(F(k), M(k))` to the free samples of window `k`.
fn input_jacobian(
    samples: &[FlatOutput],
    layout: &Layout,
    params: &CraneParams,
    ts: f64,
    k: usize,
) -> Result<Vec<(usize, f64, f64)>> {
    let h = 1e-3 * ts * ts;
    let mut out = Vec::new();
    for i in 0..5 {
        for channel in 0..2 {
            let Some(var) = layout.delta(k + i, channel) else { continue };
            let mut w = window(samples, k);
            let base = w.0[i];
            let set = |w: &mut FlatWindow, d: f64| {
                if channel == 0 {
                    w.0[i].x_l = base.x_l + d;
                } else {
                    w.0[i].y_l = base.y_l + d;
                }
            };
            set(&mut w, h);
            let (_, up) = flat_parameterize(&w, params, ts)?;
            set(&mut w, -h);
            let (_, down) = flat_parameterize(&w, params, ts)?;
            // derivative per unit δ, where the sample moves by ts²·δ
            let scale = ts * ts / (2.0 * h);
            out.push((var, (up.force - down.force) * scale, (up.torque - down.torque) * scale));
        }
    }
    Ok(out)
}

struct Triplets {
    rows: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    b: Vec<f64>,
}

impl Triplets {
    fn new() -> Self {
        Self {
            rows: vec![],
            cols: vec![],
            vals: vec![],
            b: vec![],
        }
    }

    fn row(&mut self, entries: &[(usize, f64)], rhs: f64) {
        let r = self.b.len();
        for &(c, v) in entries {
            self.rows.push(r);
            self.cols.push(c);
            self.vals.push(v);
        }
        self.b.push(rhs);
    }
}

struct Subproblem {
    step: Vec<f64>,
    model: f64,
    /// Net multipliers of the linearized force and torque bounds per instant.
    multipliers: Vec<(f64, f64)>,
    /// Linearized change of `(F(k), M(k))` along the step.
    linear: Vec<(f64, f64)>,
}

/// Hessian of `λ_F·F(k) + λ_M·M(k)` in the free samples of window `k`,
/// projected onto the positive semidefinite cone. Upper-triangle triplets in δ units.
#[allow(clippy::too_many_arguments)]
fn lagrangian_hessian(
    samples: &[FlatOutput],
    layout: &Layout,
    params: &CraneParams,
    ts: f64,
    k: usize,
    lambda: (f64, f64),
    out: &mut Triplets,
) -> Result<()> {
    let coords: Vec<(usize, usize, usize)> = (0..5)
        .flat_map(|i| [0, 1].map(|c| (i, c)))
        .filter_map(|(i, c)| layout.delta(k + i, c).map(|v| (i, c, v)))
        .collect();
    let m = coords.len();
    if m == 0 {
        return Ok(());
    }
    let h = 1e-2 * ts * ts;
    let base = window(samples, k);
    let value = |moves: &[(usize, f64)]| -> Result<f64> {
        let mut w = base;
        for &(j, d) in moves {
            let (i, c, _) = coords[j];
            if c == 0 {
                w.0[i].x_l += d;
            } else {
                w.0[i].y_l += d;
            }
        }
        let (_, u) = flat_parameterize(&w, params, ts)?;
        Ok(lambda.0 * u.force + lambda.1 * u.torque)
    };
    let center = value(&[])?;
    let mut hess = nalgebra::DMatrix::<f64>::zeros(m, m);
    for a in 0..m {
        let second = value(&[(a, h)])? - 2.0 * center + value(&[(a, -h)])?;
        hess[(a, a)] = second / (h * h);
        for b in 0..a {
            let mixed = value(&[(a, h), (b, h)])? - value(&[(a, h), (b, -h)])? - value(&[(a, -h), (b, h)])?
                + value(&[(a, -h), (b, -h)])?;
            hess[(a, b)] = mixed / (4.0 * h * h);
            hess[(b, a)] = hess[(a, b)];
        }
    }
    // chain rule to δ, where the sample moves by ts²·δ
    hess *= ts.powi(4);
    let eig = hess.symmetric_eigen();
    let clipped = eig.eigenvalues.map(|l| l.max(0.0));
    let psd = &eig.eigenvectors * nalgebra::DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    for a in 0..m {
        for b in 0..m {
            let (va, vb) = (coords[a].2, coords[b].2);
            if va <= vb && psd[(a, b)] != 0.0 {
                out.rows.push(va);
                out.cols.push(vb);
                out.vals.push(psd[(a, b)]);
            }
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn solve_subproblem(
    samples: &[FlatOutput],
    eval: &Evaluation,
    layout: &Layout,
    problem: &OptimizationProblem,
    params: &CraneParams,
    radius: f64,
    penalty: f64,
    multipliers: &[(f64, f64)],
    correction: Option<&[(f64, f64)]>,
) -> Result<Option<Subproblem>> {
    let n = layout.n;
    let nv = layout.vars();
    let ts = problem.ts;
    let mut a = Triplets::new();
    let mut jacobians = Vec::with_capacity(n);

    for k in 0..n {
        let jac = input_jacobian(samples, layout, params, ts, k)?;
        let g_f: Vec<(usize, f64)> = jac.iter().map(|&(v, f, _)| (v, f)).collect();
        let g_m: Vec<(usize, f64)> = jac.iter().map(|&(v, _, m)| (v, m)).collect();
        let (c_f, c_m) = correction.map_or((0.0, 0.0), |c| c[k]);
        for (grad, value, bound, slack) in [
            (&g_f, eval.force[k] + c_f, problem.force_max, layout.slack_force(k)),
            (&g_m, eval.torque[k] + c_m, problem.torque_max, layout.slack_torque(k)),
        ] {
            let mut up: Vec<(usize, f64)> = grad.clone();
            up.push((slack, -1.0));
            a.row(&up, bound - value);
            let mut down: Vec<(usize, f64)> = grad.iter().map(|&(v, g)| (v, -g)).collect();
            down.push((slack, -1.0));
            a.row(&down, bound + value);
        }
        jacobians.push(jac);
    }
    for k in 0..n {
        a.row(&[(layout.slack_force(k), -1.0)], 0.0);
        a.row(&[(layout.slack_torque(k), -1.0)], 0.0);
    }
    // trust region on the change of every load acceleration
    for k in 0..n {
        for channel in 0..2 {
            let d2 = layout.second_difference(k, channel);
            if d2.is_empty() {
                continue;
            }
            a.row(&d2, radius);
            let neg: Vec<(usize, f64)> = d2.iter().map(|&(v, c)| (v, -c)).collect();
            a.row(&neg, radius);
        }
    }
    let linear_rows = a.b.len();

    // (ε, a_x(k), a_y(k)) in the second-order cone
    for k in 0..n {
        a.row(&[(0, -1.0)], 0.0);
        let (ax, ay) = eval.acc[k];
        for (channel, value) in [(0, ax), (1, ay)] {
            let entries: Vec<(usize, f64)> = layout
                .second_difference(k, channel)
                .into_iter()
                .map(|(v, c)| (v, -c))
                .collect();
            a.row(&entries, value);
        }
    }

    let mut cones: Vec<SupportedConeT<f64>> = vec![NonnegativeConeT(linear_rows)];
    cones.extend((0..n).map(|_| SecondOrderConeT(3)));

    let mut q = vec![0.0; nv];
    q[0] = 1.0;
    for k in 0..n {
        q[layout.slack_force(k)] = penalty;
        q[layout.slack_torque(k)] = penalty;
    }
    // proximal term ρ/2·Σ (Δa)², upper triangle of ρ·D2ᵀD2
    let (mut pr, mut pc, mut pv) = (vec![0], vec![0], vec![problem.settings.proximal]);
    for k in 0..n {
        for channel in 0..2 {
            let d2 = layout.second_difference(k, channel);
            for &(i, ci) in &d2 {
                for &(j, cj) in &d2 {
                    if i <= j {
                        pr.push(i);
                        pc.push(j);
                        pv.push(problem.settings.proximal * ci * cj);
                    }
                }
            }
        }
    }
    let mut curvature = Triplets::new();
    for (k, &lambda) in multipliers.iter().enumerate() {
        if lambda.0 != 0.0 || lambda.1 != 0.0 {
            lagrangian_hessian(samples, layout, params, ts, k, lambda, &mut curvature)?;
        }
    }
    pr.extend(curvature.rows);
    pc.extend(curvature.cols);
    pv.extend(curvature.vals);
    let p = CscMatrix::new_from_triplets(nv, nv, pr, pc, pv);
    let m = a.b.len();
    let a_mat = CscMatrix::new_from_triplets(m, nv, a.rows, a.cols, a.vals);
    let settings = DefaultSettings {
        verbose: false,
        ..DefaultSettings::default()
    };
    let mut solver = DefaultSolver::new(&p, &q, &a_mat, &a.b, &cones, settings)
        .map_err(|e| Error::Optimizer(format!("subproblem setup: {e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        _ => return Ok(None),
    }
    let z = &solver.solution.z;
    // rows 4k..4k+3 hold the upper and lower force and torque bounds
    let multipliers = (0..n)
        .map(|k| (z[4 * k] - z[4 * k + 1], z[4 * k + 2] - z[4 * k + 3]))
        .collect();
    let x = &solver.solution.x;
    let linear = jacobians
        .iter()
        .map(|jac| jac.iter().fold((0.0, 0.0), |(f, m), &(v, gf, gm)| (f + gf * x[v], m + gm * x[v])))
        .collect();
    Ok(Some(Subproblem {
        model: solver.solution.obj_val,
        step: x.clone(),
        multipliers,
        linear,
    }))
}

fn activity(eval: &Evaluation, epsilon: f64, p: &OptimizationProblem) -> ConstraintActivity {
    let margin = p.settings.active_margin;
    let pick = |values: Vec<f64>, bound: f64| -> Vec<usize> {
        values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() >= bound * (1.0 - margin))
            .map(|(k, _)| k)
            .collect()
    };
    ConstraintActivity {
        acceleration: pick(eval.a_l(), epsilon),
        force: pick(eval.force.clone(), p.force_max),
        torque: pick(eval.torque.clone(), p.torque_max),
    }
}

/// Minimizes the largest load acceleration `max_k a_L(k)` subject to
/// `|F(k)| ≤ F_max`, `|M(k)| ≤ M_max` for `k = 0..N-1`, starting from `init`.
/// Samples `0..3` and `N..N+3` stay at the rest points.
pub fn optimize_minimax_acceleration(
    problem: &OptimizationProblem,
    init: &ReferenceTrajectory,
    params: &CraneParams,
) -> Result<(ReferenceTrajectory, OptimizationReport)> {
    let n = problem.steps()?;
    let ts = problem.ts;
    let settings = problem.settings;
    if (init.ts() - ts).abs() > 1e-12 {
        return Err(Error::InvalidReference(format!("initializer sampled at {} instead of {ts}", init.ts())));
    }
    let mut samples: Vec<FlatOutput> = (0..n + REST_SAMPLES).map(|k| init.sample(k)).collect();
    for k in 0..REST_SAMPLES {
        samples[k] = problem.start;
        samples[n + k] = problem.end;
    }
    let layout = Layout { n, free: n - REST_SAMPLES };
    let scale = ts * ts;

    let mut eval = evaluate(&samples, n, params, ts)
        .map_err(|e| Error::Optimizer(format!("initializer not admissible: {e}")))?;
    let initial_epsilon = eval.epsilon();
    let mut penalty = settings.penalty;
    let mut radius = settings.initial_radius;
    let mut history = Vec::new();
    let mut termination = "max-iterations";
    let mut iterations = 0;
    let mut multipliers = vec![(0.0, 0.0); n];

    while iterations < settings.max_iterations {
        iterations += 1;
        let epsilon = eval.epsilon();
        let (viol_sum, viol_max) = eval.violation(problem);
        let merit = epsilon + penalty * viol_sum;
        let Some(sub) = solve_subproblem(&samples, &eval, &layout, problem, params, radius, penalty, &multipliers, None)?
        else {
            radius *= 0.25;
            history.push(IterationLog {
                iteration: iterations,
                epsilon,
                violation: viol_max,
                radius,
                predicted: f64::NAN,
                ratio: f64::NAN,
                accepted: false,
            });
            if radius < settings.min_radius {
                termination = "radius";
                break;
            }
            continue;
        };
        let predicted = merit - sub.model;
        multipliers = sub.multipliers.clone();
        if predicted <= settings.stationarity * (1.0 + merit.abs()) {
            if viol_max <= settings.tolerance {
                termination = "stationary";
                break;
            }
            if penalty >= 1e8 {
                termination = "infeasible";
                break;
            }
            penalty *= 10.0;
            continue;
        }
        let step_norm = |step: &[f64]| {
            (0..n)
                .flat_map(|k| [0, 1].map(|c| layout.second_difference(k, c)))
                .map(|d2| d2.iter().map(|&(v, c)| c * step[v]).sum::<f64>().abs())
                .fold(0.0, f64::max)
        };
        let try_step = |step: &[f64]| {
            let trial = apply_step(&samples, &layout, step, scale);
            match evaluate(&trial, n, params, ts) {
                Ok(te) => {
                    let actual = merit - (te.epsilon() + penalty * te.violation(problem).0);
                    (actual / predicted, trial, Some(te))
                }
                Err(_) => (f64::NEG_INFINITY, trial, None),
            }
        };
        let mut norm = step_norm(&sub.step);
        let (mut ratio, mut trial, mut trial_eval) = try_step(&sub.step);
        // second-order correction: shift the linearized bounds by the
        // curvature the trial step actually met
        if ratio < 0.75 {
            if let Some(te) = &trial_eval {
                let residual: Vec<(f64, f64)> = (0..n)
                    .map(|k| {
                        (
                            te.force[k] - eval.force[k] - sub.linear[k].0,
                            te.torque[k] - eval.torque[k] - sub.linear[k].1,
                        )
                    })
                    .collect();
                let corrected = solve_subproblem(
                    &samples,
                    &eval,
                    &layout,
                    problem,
                    params,
                    radius,
                    penalty,
                    &multipliers,
                    Some(&residual),
                )?;
                if let Some(c) = corrected {
                    let (r2, t2, e2) = try_step(&c.step);
                    if r2 > ratio {
                        (ratio, trial, trial_eval) = (r2, t2, e2);
                        norm = step_norm(&c.step);
                    }
                }
            }
        }
        let accepted = ratio > 1e-4;
        if accepted {
            samples = trial;
            eval = trial_eval.expect("accepted trials were evaluated");
        }
        if ratio < 0.25 {
            radius = 0.25 * norm.min(radius);
        } else if ratio > 0.75 && norm >= 0.99 * radius {
            radius *= 2.0;
        }
        history.push(IterationLog {
            iteration: iterations,
            epsilon: eval.epsilon(),
            violation: eval.violation(problem).1,
            radius,
            predicted,
            ratio,
            accepted,
        });
        if radius < settings.min_radius {
            termination = "radius";
            break;
        }
    }

    let epsilon = eval.epsilon();
    let (_, max_violation) = eval.violation(problem);
    let feasible = max_violation <= settings.tolerance;
    let converged = feasible && matches!(termination, "stationary" | "radius");
    let report = OptimizationReport {
        epsilon,
        initial_epsilon,
        iterations,
        converged,
        termination: termination.to_string(),
        max_violation,
        penalty,
        a_l: eval.a_l(),
        force: eval.force.clone(),
        torque: eval.torque.clone(),
        active: activity(&eval, epsilon, problem),
        problem: ProblemEcho {
            start: [problem.start.x_l, problem.start.y_l],
            end: [problem.end.x_l, problem.end.y_l],
            horizon: problem.horizon,
            ts,
            steps: n,
            force_max: problem.force_max,
            torque_max: problem.torque_max,
            settings,
        },
        history,
    };
    let best = ReferenceTrajectory::from_samples(samples, ts)?;
    if !converged {
        let message = if feasible {
            format!("no convergence ({termination})")
        } else {
            format!("input bounds violated ({termination})")
        };
        return Err(Error::OptimizerFailed(Box::new(OptimizerFailure { message, best, report })));
    }
    Ok((best, report))
}
