//! Time integration of the deformation flows: plain negative-gradient flow,
//! the constraint-projected flow for cycle linkages, and the bump-modified
//! complete flow used by refolding. Classical RK4 with step halving on
//! guard violations (invalid trial frame, energy increase, constraint
//! drift) and step doubling after a run of clean steps.

use crate::chart::{
    chart_distance, cycle_constraint, embedded_vertices, free_coords, validate, with_free_coords,
    ChartState, CycleChart, LinkageKind,
};
use crate::energy::{bump_eta, BumpParams, ScalarField};
use crate::error::{Error, Result};
use crate::numeric::{dot, norm_inf};

/// Step size below which the integrator gives up on the current segment.
const MIN_STEP: f64 = 1e-12;
/// Sufficient-decrease fraction of h |grad|^2 demanded from an accepted
/// step. Plain monotonicity is not enough: at the RK4 stability boundary
/// the discrete map admits energy-neutral cycles that stall the flow.
const DESCENT_FRACTION: f64 = 0.1;
/// Evaluation-noise floor of the sufficient-decrease test, relative to |f|.
/// Field values that pass through the inscribed-polygon solver carry
/// roundoff well above machine epsilon.
const F_NOISE: f64 = 1e-12;
/// Hard cap on integrator iterations (accepted or rejected), a backstop
/// against wall-clock runaway on pathological landscapes.
const MAX_ITERATIONS: usize = 2_000_000;
/// Clean steps before the step size doubles (capped at the initial step).
const DOUBLING_RUN: usize = 10;
/// Newton iterations allowed for the constraint restoration.
const CORRECTION_ITERS: usize = 5;
/// Target local error per accepted bump-flow step, measured by comparing a
/// full step against two half steps.
const BUMP_LOCAL_TOL: f64 = 1e-9;

/// Options shared by the flow integrators.
#[derive(Debug, Clone, Copy)]
pub struct FlowOptions {
    /// Initial (and maximal) time step.
    pub step: f64,
    /// Convergence threshold on the max-norm of the (projected) gradient.
    pub grad_tol: f64,
    /// Time horizon.
    pub t_max: f64,
    /// On-manifold tolerance for the closure constraint, in units of the
    /// closing length.
    pub constraint_tol: f64,
    /// Store every k-th accepted frame (the first and last are always kept).
    pub frame_stride: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            step: 0.05,
            grad_tol: 1e-6,
            t_max: 1e4,
            constraint_tol: 1e-9,
            frame_stride: 1,
        }
    }
}

impl FlowOptions {
    fn check(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.grad_tol > 0.0
            && self.t_max > 0.0
            && self.constraint_tol > 0.0
            && self.frame_stride >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams("flow options must be positive".into()))
        }
    }
}

/// Why a flow stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    /// The (projected) gradient max-norm fell below `grad_tol`.
    Converged,
    /// The time horizon was reached first.
    TMaxReached,
    /// No step could be accepted even at the minimum step size; the
    /// trajectory holds the progress made up to that point.
    GuardTripped,
}

/// A time-ordered record of a flow run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub kind: LinkageKind,
    pub times: Vec<f64>,
    pub frames: Vec<ChartState>,
    pub f_values: Vec<f64>,
    pub termination: Termination,
}

impl Trajectory {
    pub fn final_state(&self) -> &ChartState {
        self.frames.last().expect("trajectory stores at least the initial frame")
    }
}

/// Report of the pairwise-distance comparison between two states.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansiveReport {
    /// No pairwise vertex distance decreased (within relative slack).
    pub all_nondecreasing: bool,
    /// At least one pairwise distance strictly increased.
    pub any_strict_increase: bool,
    pub min_delta: f64,
    pub max_delta: f64,
}

impl ExpansiveReport {
    /// The step is certified expansive: monotone distances with at least
    /// one strict increase.
    pub fn expansive(&self) -> bool {
        self.all_nondecreasing && self.any_strict_increase
    }
}

/// Compare all pairwise vertex distances of two same-kind states. A
/// diagnostic: the flows are not claimed expansive, but several
/// monotonicity statements hold along certified-expansive steps.
pub fn expansive_monitor(
    kind: LinkageKind,
    frame_a: &ChartState,
    frame_b: &ChartState,
) -> Result<ExpansiveReport> {
    let va = embedded_vertices(kind, frame_a)?;
    let vb = embedded_vertices(kind, frame_b)?;
    if va.len() != vb.len() {
        return Err(Error::InvalidInput("states have different vertex counts".into()));
    }
    let mut min_delta = f64::INFINITY;
    let mut max_delta = f64::NEG_INFINITY;
    let mut scale = 0.0f64;
    for i in 0..va.len() {
        for j in (i + 1)..va.len() {
            let before = va[i].dist(va[j]);
            let after = vb[i].dist(vb[j]);
            scale = scale.max(before);
            let delta = after - before;
            min_delta = min_delta.min(delta);
            max_delta = max_delta.max(delta);
        }
    }
    let eps = 1e-12 * scale;
    Ok(ExpansiveReport {
        all_nondecreasing: min_delta >= -eps,
        any_strict_increase: max_delta > eps,
        min_delta,
        max_delta,
    })
}

/// Negative gradient flow dx/dt = -grad f, integrated until the gradient
/// max-norm falls below `grad_tol` or the horizon is reached. Trial steps
/// that leave the moduli space or increase f are retried at half the step.
pub fn gradient_flow(
    field: &dyn ScalarField,
    start: &ChartState,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    opts.check()?;
    let kind = field.kind();
    if !validate(kind, start).is_valid() {
        return Err(Error::InvalidInput(format!("invalid start for {}", kind.as_str())));
    }
    let direction = |coords: &[f64]| -> Result<Vec<f64>> {
        let state = with_free_coords(kind, start, coords)?;
        Ok(field.gradient(&state)?.into_iter().map(|g| -g).collect())
    };
    integrate(field, kind, start, opts, &direction, None)
}

/// Constraint-projected negative gradient flow for cycle linkages:
/// dtheta/dt = -grad f + (<grad f, grad u>/|grad u|^2) grad u, with a Newton
/// correction along grad u after every accepted step to hold |u| below the
/// tolerance.
pub fn projected_flow(
    field: &dyn ScalarField,
    start: &CycleChart,
    opts: &FlowOptions,
) -> Result<Trajectory> {
    opts.check()?;
    let kind = field.kind();
    if kind != LinkageKind::CycleLinkage {
        return Err(Error::InvalidInput("projected flow applies to cycle linkages".into()));
    }
    let state = ChartState::Cycle(start.clone());
    if !validate(kind, &state).is_valid() {
        return Err(Error::InvalidInput("invalid start for cycle_linkage".into()));
    }
    let lengths = start.lengths.clone();
    let (_, grad_u0) = cycle_constraint(&start.theta, &lengths)?;
    if crate::numeric::norm(&grad_u0) <= 1e-10 {
        return Err(Error::SingularConstraint);
    }
    let direction = |theta: &[f64]| -> Result<Vec<f64>> {
        let s = ChartState::Cycle(CycleChart {
            lengths: lengths.clone(),
            theta: theta.to_vec(),
        });
        let grad_f = field.gradient(&s)?;
        let (_, grad_u) = cycle_constraint(theta, &lengths)?;
        project_direction(&grad_f, &grad_u)
    };
    let correction = Correction { lengths: &lengths, tol: opts.constraint_tol };
    integrate(field, kind, &state, opts, &direction, Some(&correction))
}

/// One signed application of the bump-modified flow: integrate the
/// compactly supported field -eta(f) grad f (projected for cycle linkages)
/// for time |s|, backward when s is negative. States with f at or above the
/// cutoff are exact fixed points. Integration is error-controlled: a step
/// is accepted only when a full step and two half steps agree.
pub fn bump_flow(
    field: &dyn ScalarField,
    params: BumpParams,
    start: &ChartState,
    s: f64,
    opts: &FlowOptions,
) -> Result<ChartState> {
    opts.check()?;
    let kind = field.kind();
    if !validate(kind, start).is_valid() {
        return Err(Error::InvalidInput(format!("invalid start for {}", kind.as_str())));
    }
    if s == 0.0 {
        return Ok(start.clone());
    }
    if field.value(start)? >= params.b {
        return Ok(start.clone());
    }
    let sign = s.signum();
    let total = s.abs();
    let cycle_lengths = match (kind, start) {
        (LinkageKind::CycleLinkage, ChartState::Cycle(c)) => Some(c.lengths.clone()),
        _ => None,
    };
    let direction = |coords: &[f64]| -> Result<Vec<f64>> {
        let state = with_free_coords(kind, start, coords)?;
        let f = field.value(&state)?;
        let (eta, _) = bump_eta(params, f);
        if eta == 0.0 {
            return Ok(vec![0.0; coords.len()]);
        }
        let grad_f = field.gradient(&state)?;
        let raw: Vec<f64> = match &cycle_lengths {
            Some(lengths) => {
                let (_, grad_u) = cycle_constraint(coords, lengths)?;
                project_direction(&grad_f, &grad_u)?
            }
            None => grad_f.into_iter().map(|g| -g).collect(),
        };
        Ok(raw.into_iter().map(|d| sign * eta * d).collect())
    };

    let correction = cycle_lengths
        .as_ref()
        .map(|lengths| Correction { lengths: lengths.as_slice(), tol: opts.constraint_tol });

    let mut coords = free_coords(kind, start)?;
    let mut remaining = total;
    let mut h = opts.step.min(total);
    while remaining > 1e-15 * total {
        h = h.min(remaining);
        let trial = rk4_step(&direction, &coords, h).and_then(|full| {
            let mid = rk4_step(&direction, &coords, 0.5 * h)?;
            let refined = rk4_step(&direction, &mid, 0.5 * h)?;
            let err = step_error(kind, start, &full, &refined)?;
            Ok((refined, err))
        });
        let accepted = match trial {
            Ok((refined, err)) if err <= BUMP_LOCAL_TOL => {
                let corrected = match &correction {
                    Some(corr) => corr.apply(&refined),
                    None => Some(refined),
                };
                corrected.and_then(|next| {
                    let state = with_free_coords(kind, start, &next).ok()?;
                    validate(kind, &state).is_valid().then_some(next)
                })
            }
            _ => None,
        };
        match accepted {
            Some(next) => {
                coords = next;
                remaining -= h;
                h = (2.0 * h).min(opts.step);
            }
            None => {
                h *= 0.5;
                if h < MIN_STEP {
                    return Err(Error::Stalled { time: sign * (total - remaining) });
                }
            }
        }
    }
    with_free_coords(kind, start, &coords)
}

fn step_error(kind: LinkageKind, template: &ChartState, a: &[f64], b: &[f64]) -> Result<f64> {
    let sa = with_free_coords(kind, template, a)?;
    let sb = with_free_coords(kind, template, b)?;
    chart_distance(kind, &sa, &sb)
}

/// The tangential part of the negative gradient relative to the constraint
/// gradient: -grad f + (<grad f, grad u>/|grad u|^2) grad u.
fn project_direction(grad_f: &[f64], grad_u: &[f64]) -> Result<Vec<f64>> {
    let gu_sq = dot(grad_u, grad_u);
    if gu_sq.sqrt() <= 1e-10 {
        return Err(Error::SingularConstraint);
    }
    let coef = dot(grad_f, grad_u) / gu_sq;
    Ok(grad_f.iter().zip(grad_u).map(|(gf, gu)| -gf + coef * gu).collect())
}

struct Correction<'a> {
    lengths: &'a [f64],
    tol: f64,
}

impl Correction<'_> {
    /// Newton steps along grad u until |u| is inside the tolerance; None if
    /// the budget does not suffice (the step is then rejected).
    fn apply(&self, theta: &[f64]) -> Option<Vec<f64>> {
        let scale = self.lengths[self.lengths.len() - 1];
        let mut theta = theta.to_vec();
        for _ in 0..=CORRECTION_ITERS {
            let (u, grad_u) = cycle_constraint(&theta, self.lengths).ok()?;
            if u.abs() < self.tol * scale {
                return Some(theta);
            }
            let gu_sq = dot(&grad_u, &grad_u);
            if gu_sq.sqrt() <= 1e-10 {
                return None;
            }
            for (t, g) in theta.iter_mut().zip(&grad_u) {
                *t -= u * g / gu_sq;
            }
        }
        None
    }

    fn drift_acceptable(&self, theta: &[f64]) -> bool {
        let scale = self.lengths[self.lengths.len() - 1];
        cycle_constraint(theta, self.lengths)
            .map(|(u, _)| u.abs() <= 10.0 * self.tol * scale)
            .unwrap_or(false)
    }
}

fn rk4_step(
    direction: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    x: &[f64],
    h: f64,
) -> Result<Vec<f64>> {
    let shifted = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> {
        base.iter().zip(k).map(|(x, k)| x + c * k).collect()
    };
    let k1 = direction(x)?;
    let k2 = direction(&shifted(x, &k1, 0.5 * h))?;
    let k3 = direction(&shifted(x, &k2, 0.5 * h))?;
    let k4 = direction(&shifted(x, &k3, h))?;
    Ok(x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

fn integrate(
    field: &dyn ScalarField,
    kind: LinkageKind,
    start: &ChartState,
    opts: &FlowOptions,
    direction: &dyn Fn(&[f64]) -> Result<Vec<f64>>,
    correction: Option<&Correction<'_>>,
) -> Result<Trajectory> {
    let mut coords = free_coords(kind, start)?;
    let mut f = field.value(start)?;
    let mut t = 0.0;
    let mut h = opts.step;
    let mut clean_steps = 0usize;
    let mut steps_since_stored = 0usize;
    let mut accepted_any = false;

    let mut times = vec![0.0];
    let mut frames = vec![start.clone()];
    let mut f_values = vec![f];

    let mut iterations = 0usize;
    let termination = loop {
        let dir = direction(&coords)?;
        if norm_inf(&dir) < opts.grad_tol {
            break Termination::Converged;
        }
        if t >= opts.t_max {
            break Termination::TMaxReached;
        }
        iterations += 1;
        if iterations > MAX_ITERATIONS {
            if !accepted_any {
                return Err(Error::Stalled { time: t });
            }
            break Termination::GuardTripped;
        }
        h = h.min(opts.t_max - t).max(MIN_STEP);
        let descent_rate = dot(&dir, &dir);

        let trial = rk4_step(direction, &coords, h).ok().and_then(|next| {
            if let Some(corr) = correction {
                if !corr.drift_acceptable(&next) {
                    return None;
                }
                return corr.apply(&next);
            }
            Some(next)
        });
        let accepted = trial.and_then(|next| {
            let state = with_free_coords(kind, start, &next).ok()?;
            if !validate(kind, &state).is_valid() {
                return None;
            }
            let f_next = field.value(&state).ok()?;
            let noise = F_NOISE * f.abs().max(1.0);
            if f_next > f - DESCENT_FRACTION * h * descent_rate + noise {
                return None;
            }
            Some((next, state, f_next))
        });

        match accepted {
            Some((next, state, f_next)) => {
                coords = next;
                f = f_next;
                t += h;
                accepted_any = true;
                clean_steps += 1;
                steps_since_stored += 1;
                if clean_steps >= DOUBLING_RUN {
                    h = (2.0 * h).min(opts.step);
                    clean_steps = 0;
                }
                if steps_since_stored >= opts.frame_stride {
                    times.push(t);
                    frames.push(state);
                    f_values.push(f);
                    steps_since_stored = 0;
                }
            }
            None => {
                h *= 0.5;
                clean_steps = 0;
                if h < MIN_STEP {
                    if !accepted_any {
                        return Err(Error::Stalled { time: t });
                    }
                    break Termination::GuardTripped;
                }
            }
        }
    };

    if steps_since_stored > 0 {
        times.push(t);
        frames.push(with_free_coords(kind, start, &coords)?);
        f_values.push(f);
    }
    Ok(Trajectory { kind, times, frames, f_values, termination })
}
