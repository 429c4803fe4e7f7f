//! Refolding by renormalization: flow both endpoint states toward the
//! critical point with the bump-modified flow until a chart geodesic
//! connects their images, then pull the geodesic back through the inverse
//! flow, one increment at a time.

use crate::chart::{
    chart_distance, cycle_constraint, free_coords, validate, with_free_coords, ChartState,
    CycleChart, LinkageKind,
};
use crate::energy::{lr_function, BumpParams, ScalarField};
use crate::error::{Error, Result};
use crate::flow::{bump_flow, FlowOptions};
use crate::numeric::{angle_diff, dot, norm};

/// Chart distance at which the constrained geodesic counts as having
/// reached its target state.
const GEODESIC_TARGET_TOL: f64 = 1e-8;
/// Time budget for one constrained-geodesic integration.
const GEODESIC_T_MAX: f64 = 1e4;
/// Projected-descent norm below which the geodesic flow is stuck short of
/// the target (a connectivity failure, not an error).
const GEODESIC_STALL_TOL: f64 = 1e-12;
/// Iteration backstop for one geodesic integration.
const GEODESIC_MAX_ITERATIONS: usize = 2_000_000;

/// Options of the refolding search.
#[derive(Debug, Clone, Copy)]
pub struct RefoldOptions {
    /// Flow increment per search iteration.
    pub delta: f64,
    /// Number of states discretizing the connecting curve.
    pub samples: usize,
    /// Cap on the iteration search.
    pub max_iter: usize,
    pub flow_opts: FlowOptions,
}

impl Default for RefoldOptions {
    fn default() -> Self {
        RefoldOptions {
            delta: 0.25,
            samples: 64,
            max_iter: 400,
            flow_opts: FlowOptions::default(),
        }
    }
}

/// A motion connecting two states: the pulled-back geodesic, endpoints
/// pinned to the inputs.
#[derive(Debug, Clone)]
pub struct Motion {
    pub kind: LinkageKind,
    /// Frames from the first input state to the second.
    pub frames: Vec<ChartState>,
    /// Flow increments both endpoints were advanced before a geodesic
    /// connected them.
    pub n0: usize,
    /// Bump parameters used by the search (needed to replay the flow).
    pub params: BumpParams,
    /// The connecting geodesic between the flowed images, before pull-back.
    pub geodesic: Vec<ChartState>,
    /// Per-frame validity.
    pub frame_valid: Vec<bool>,
}

/// A geodesic of the flat chart metric between two same-kind states,
/// discretized into `samples` frames: straight-segment interpolation for
/// the unconstrained kinds (each angle along its shorter arc, ties toward
/// the positive direction), and the projected-descent curve of the squared
/// chart distance for cycle linkages. Returns None — a connectivity
/// failure, not an error — when the curve cannot be completed or any
/// sampled frame is invalid.
pub fn chart_geodesic(
    kind: LinkageKind,
    x0: &ChartState,
    y0: &ChartState,
    samples: usize,
) -> Result<Option<Vec<ChartState>>> {
    if samples < 2 {
        return Err(Error::InvalidParams("geodesic needs at least 2 samples".into()));
    }
    if x0.m() != y0.m() {
        return Err(Error::InvalidInput("geodesic endpoints differ in size".into()));
    }
    let frames = match kind {
        LinkageKind::CycleLinkage => {
            let cx = x0.as_cycle()?;
            let cy = y0.as_cycle()?;
            match constrained_geodesic(cx, cy, samples)? {
                Some(frames) => frames,
                None => return Ok(None),
            }
        }
        _ => {
            let a = free_coords(kind, x0)?;
            let b = free_coords(kind, y0)?;
            let n_rho = match kind {
                LinkageKind::ArmLinkage => 0,
                _ => x0.m() - 1,
            };
            let mut frames = Vec::with_capacity(samples);
            for s in 0..samples {
                let t = s as f64 / (samples - 1) as f64;
                let coords: Vec<f64> = a
                    .iter()
                    .zip(&b)
                    .enumerate()
                    .map(|(i, (&ai, &bi))| {
                        if i < n_rho {
                            ai + t * (bi - ai)
                        } else {
                            // Shorter arc; angle_diff sends ties to +pi.
                            ai + t * angle_diff(bi, ai)
                        }
                    })
                    .collect();
                frames.push(with_free_coords(kind, x0, &coords)?);
            }
            frames
        }
    };
    if frames.iter().all(|f| validate(kind, f).is_valid()) {
        Ok(Some(frames))
    } else {
        Ok(None)
    }
}

/// Integrate d theta/dt = -grad H + (<grad H, grad u>/|grad u|^2) grad u
/// with H the squared wrapped distance to the target angles, starting at
/// x; the curve stays on the constraint set by construction, with a Newton
/// correction mopping up discretization drift.
fn constrained_geodesic(
    x: &CycleChart,
    y: &CycleChart,
    samples: usize,
) -> Result<Option<Vec<ChartState>>> {
    let lengths = x.lengths.clone();
    let target = y.theta.clone();
    let scale = lengths[lengths.len() - 1];

    let direction = |theta: &[f64]| -> Result<Vec<f64>> {
        let grad_h: Vec<f64> =
            theta.iter().zip(&target).map(|(&t, &g)| 2.0 * angle_diff(t, g)).collect();
        let (_, grad_u) = cycle_constraint(theta, &lengths)?;
        let gu_sq = dot(&grad_u, &grad_u);
        if gu_sq.sqrt() <= 1e-10 {
            return Err(Error::SingularConstraint);
        }
        let coef = dot(&grad_h, &grad_u) / gu_sq;
        Ok(grad_h.iter().zip(&grad_u).map(|(gh, gu)| -gh + coef * gu).collect())
    };
    let correct = |theta: &mut Vec<f64>| -> bool {
        for _ in 0..6 {
            let Ok((u, grad_u)) = cycle_constraint(theta, &lengths) else { return false };
            if u.abs() < 1e-11 * scale {
                return true;
            }
            let gu_sq = dot(&grad_u, &grad_u);
            if gu_sq.sqrt() <= 1e-10 {
                return false;
            }
            for (t, g) in theta.iter_mut().zip(&grad_u) {
                *t -= u * g / gu_sq;
            }
        }
        false
    };

    let distance_to_target = |theta: &[f64]| -> f64 {
        theta
            .iter()
            .zip(&target)
            .map(|(&t, &g)| {
                let d = angle_diff(t, g);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    };

    let mut theta = x.theta.clone();
    let mut dense: Vec<Vec<f64>> = vec![theta.clone()];
    let mut t = 0.0;
    let mut h = 0.05;
    let mut iterations = 0usize;
    while distance_to_target(&theta) > GEODESIC_TARGET_TOL {
        iterations += 1;
        if t >= GEODESIC_T_MAX || iterations > GEODESIC_MAX_ITERATIONS {
            return Ok(None);
        }
        let dir = direction(&theta)?;
        if norm(&dir) < GEODESIC_STALL_TOL {
            // Stuck at a constrained critical point short of the target.
            return Ok(None);
        }
        // Sufficient decrease of the squared target distance, to keep the
        // discrete map off stability-boundary cycles.
        let d_old = distance_to_target(&theta);
        let descent = dot(&dir, &dir);
        let trial = rk4(&direction, &theta, h);
        let accepted = match trial {
            Ok(mut next) => {
                if correct(&mut next)
                    && distance_to_target(&next).powi(2)
                        <= d_old * d_old - 0.1 * h * descent + 1e-14 * d_old * d_old
                {
                    Some(next)
                } else {
                    None
                }
            }
            Err(_) => None,
        };
        match accepted {
            Some(next) => {
                theta = next;
                dense.push(theta.clone());
                t += h;
                h = (1.5 * h).min(0.05);
            }
            None => {
                h *= 0.5;
                if h < 1e-12 {
                    return Ok(None);
                }
            }
        }
    }
    dense.push(target.clone());

    // Resample the dense curve to `samples` frames by chart arc length.
    let mut cumulative = vec![0.0];
    for w in dense.windows(2) {
        let step: f64 = w[0]
            .iter()
            .zip(&w[1])
            .map(|(&a, &b)| {
                let d = angle_diff(b, a);
                d * d
            })
            .sum::<f64>()
            .sqrt();
        cumulative.push(cumulative.last().unwrap() + step);
    }
    let total = *cumulative.last().unwrap();
    let mut frames = Vec::with_capacity(samples);
    let mut cursor = 0usize;
    for s in 0..samples {
        let want = total * s as f64 / (samples - 1) as f64;
        while cursor + 1 < dense.len() && cumulative[cursor + 1] < want {
            cursor += 1;
        }
        let pick = if cursor + 1 < dense.len()
            && (cumulative[cursor + 1] - want).abs() < (want - cumulative[cursor]).abs()
        {
            cursor + 1
        } else {
            cursor
        };
        frames.push(ChartState::Cycle(CycleChart {
            lengths: lengths.clone(),
            theta: dense[pick].clone(),
        }));
    }
    // Pin the endpoints exactly.
    frames[0] = ChartState::Cycle(x.clone());
    let last = frames.len() - 1;
    frames[last] = ChartState::Cycle(y.clone());
    Ok(Some(frames))
}

fn rk4(
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

/// Connect two same-kind states by the renormalization procedure:
///
/// 1. advance both states by the bump flow in increments of `delta`,
///    testing after each increment whether a chart geodesic connects the
///    images (the minimal such count is n0);
/// 2. pull every geodesic sample back by n0 backward flow increments;
/// 3. refinement of `delta` is left to the caller.
///
/// The returned motion runs from `p0` to `p1`; its endpoints are pinned to
/// the inputs (the stored forward flow paths identify the pulled-back
/// endpoint samples with them exactly).
pub fn refold(
    kind: LinkageKind,
    p0: &ChartState,
    p1: &ChartState,
    opts: &RefoldOptions,
) -> Result<Motion> {
    if opts.delta <= 0.0 || opts.samples < 2 {
        return Err(Error::InvalidParams("refold needs delta > 0 and samples >= 2".into()));
    }
    if !validate(kind, p0).is_valid() || !validate(kind, p1).is_valid() {
        return Err(Error::InvalidInput("refold endpoints must be valid states".into()));
    }
    match kind {
        LinkageKind::ArmLinkage => {
            let (a, b) = (p0.as_arm()?, p1.as_arm()?);
            if !lengths_match(&a.rho, &b.rho) {
                return Err(Error::InvalidInput("arm linkages must share the length vector".into()));
            }
        }
        LinkageKind::CycleLinkage => {
            let (a, b) = (p0.as_cycle()?, p1.as_cycle()?);
            if !lengths_match(&a.lengths, &b.lengths) {
                return Err(Error::InvalidInput(
                    "cycle linkages must share the length vector".into(),
                ));
            }
        }
        _ => {}
    }

    let field = lr_function(kind);
    let params = BumpParams::for_endpoints(field.value(p0)?, field.value(p1)?);

    let mut q0 = p0.clone();
    let mut q1 = p1.clone();
    for n0 in 0..=opts.max_iter {
        if let Some(geodesic) = chart_geodesic(kind, &q0, &q1, opts.samples)? {
            let mut frames = Vec::with_capacity(opts.samples);
            for (j, sample) in geodesic.iter().enumerate() {
                if j == 0 {
                    // Backward-flowing the first sample retraces the stored
                    // forward path of p0; identify it with p0 exactly.
                    frames.push(p0.clone());
                } else if j == opts.samples - 1 {
                    frames.push(p1.clone());
                } else {
                    let mut state = sample.clone();
                    for _ in 0..n0 {
                        state = bump_flow(&field, params, &state, -opts.delta, &opts.flow_opts)?;
                    }
                    frames.push(state);
                }
            }
            let frame_valid = frames.iter().map(|f| validate(kind, f).is_valid()).collect();
            return Ok(Motion { kind, frames, n0, params, geodesic, frame_valid });
        }
        q0 = bump_flow(&field, params, &q0, opts.delta, &opts.flow_opts)?;
        q1 = bump_flow(&field, params, &q1, opts.delta, &opts.flow_opts)?;
    }
    Err(Error::NoConnectionFound { iterations: opts.max_iter })
}

fn lengths_match(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-10)
}

/// Largest chart distance between consecutive frames, for continuity checks.
pub fn max_consecutive_distance(motion: &Motion) -> Result<f64> {
    let mut worst = 0.0f64;
    for w in motion.frames.windows(2) {
        worst = worst.max(chart_distance(motion.kind, &w[0], &w[1])?);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::ArmChart;
    use crate::sample::{constraint_walk_step, random_cycle_linkage_with_lengths, Rng};

    #[test]
    fn constant_geodesic_for_equal_endpoints() {
        let state = ChartState::Arm(ArmChart::new(vec![1.0, 1.0], vec![0.4]).unwrap());
        let frames = chart_geodesic(LinkageKind::ArmLinkage, &state, &state, 8)
            .unwrap()
            .expect("trivially connected");
        assert_eq!(frames.len(), 8);
        for f in &frames {
            assert_eq!(chart_distance(LinkageKind::ArmLinkage, f, &state).unwrap(), 0.0);
        }
    }

    #[test]
    fn flat_geodesic_between_nearby_squares() {
        let a = ChartState::Arm(
            ArmChart::new(vec![1.0, 1.0, 1.0], vec![1.5707963, 3.1415926]).unwrap(),
        );
        let b = ChartState::Arm(
            ArmChart::new(vec![1.05, 0.95, 1.0], vec![1.45, 3.0]).unwrap(),
        );
        let frames = chart_geodesic(LinkageKind::CycleConfig, &a, &b, 16)
            .unwrap()
            .expect("nearby convex cycles are connected");
        assert_eq!(frames.len(), 16);
        for f in frames {
            assert!(validate(LinkageKind::CycleConfig, &f).is_valid());
        }
    }

    #[test]
    fn flat_geodesic_takes_shorter_arc() {
        // The short second edge keeps the arm simple even near theta = pi,
        // so the geodesic can cross the wrap boundary.
        let a = ChartState::Arm(ArmChart::new(vec![1.0, 0.5], vec![2.9]).unwrap());
        let b = ChartState::Arm(ArmChart::new(vec![1.0, 0.5], vec![-3.0]).unwrap());
        let frames = chart_geodesic(LinkageKind::ArmLinkage, &a, &b, 3)
            .unwrap()
            .expect("short arc through pi");
        // Midpoint sits near the wrap boundary, not near zero.
        let mid = frames[1].as_arm().unwrap();
        assert!(mid.theta[0].abs() > 3.0);
    }

    #[test]
    fn geodesic_dimension_mismatch_is_an_error() {
        let a = ChartState::Arm(ArmChart::new(vec![1.0, 1.0], vec![0.4]).unwrap());
        let b = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![0.4, 0.1]).unwrap());
        assert!(chart_geodesic(LinkageKind::ArmLinkage, &a, &b, 4).is_err());
    }

    #[test]
    fn constrained_geodesic_stays_on_constraint() {
        let mut rng = Rng::new(5);
        let lengths = vec![1.0, 1.1, 0.9, 1.2, 1.0];
        let x = random_cycle_linkage_with_lengths(&mut rng, &lengths, 2).unwrap();
        let y = random_cycle_linkage_with_lengths(&mut rng, &lengths, 2).unwrap();
        if let Some(frames) =
            chart_geodesic(LinkageKind::CycleLinkage, &ChartState::Cycle(x), &ChartState::Cycle(y), 12)
                .unwrap()
        {
            for f in frames {
                let c = f.as_cycle().unwrap();
                let (u, _) = cycle_constraint(&c.theta, &c.lengths).unwrap();
                assert!(u.abs() < 1e-8 * lengths[4], "|u| = {}", u.abs());
            }
        }
    }

    #[test]
    fn refold_identical_states_is_constant() {
        let state = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![0.7, -0.2]).unwrap());
        let motion =
            refold(LinkageKind::ArmLinkage, &state, &state, &RefoldOptions::default()).unwrap();
        assert_eq!(motion.n0, 0);
        for f in &motion.frames {
            assert_eq!(chart_distance(LinkageKind::ArmLinkage, f, &state).unwrap(), 0.0);
        }
        assert!(motion.frame_valid.iter().all(|&v| v));
    }

    #[test]
    fn refold_rejects_mismatched_lengths() {
        let a = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![0.7, -0.2]).unwrap());
        let b = ChartState::Arm(ArmChart::new(vec![1.0, 1.2, 1.0], vec![0.7, -0.2]).unwrap());
        assert!(refold(LinkageKind::ArmLinkage, &a, &b, &RefoldOptions::default()).is_err());
    }

    #[test]
    fn nearby_convex_cycle_pair_connects_directly() {
        let mut rng = Rng::new(21);
        let lengths = vec![1.0, 1.1, 0.9, 1.05, 0.95];
        let p0 = random_cycle_linkage_with_lengths(&mut rng, &lengths, 0).unwrap();
        let p1 = constraint_walk_step(&mut rng, &p0, 0.05).unwrap();
        let motion = refold(
            LinkageKind::CycleLinkage,
            &ChartState::Cycle(p0),
            &ChartState::Cycle(p1),
            &RefoldOptions { samples: 16, ..RefoldOptions::default() },
        )
        .unwrap();
        assert_eq!(motion.n0, 0, "nearby convex states take the direct geodesic");
    }

    #[test]
    fn budget_monotonicity() {
        // An instance solvable at some budget stays solvable (with the same
        // iteration count) at any larger budget.
        let a = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![1.1, -0.8]).unwrap());
        let b = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![-0.9, 1.2]).unwrap());
        let base = RefoldOptions { samples: 12, ..RefoldOptions::default() };
        let n0 = refold(LinkageKind::ArmLinkage, &a, &b, &base).unwrap().n0;
        for extra in [0usize, 3, 40] {
            let opts = RefoldOptions { max_iter: n0 + extra, ..base };
            let motion = refold(LinkageKind::ArmLinkage, &a, &b, &opts).unwrap();
            assert_eq!(motion.n0, n0);
        }
    }

    #[test]
    fn refold_connects_two_arms() {
        let a = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![1.1, -0.8]).unwrap());
        let b = ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![-0.9, 1.2]).unwrap());
        let opts = RefoldOptions { samples: 24, ..RefoldOptions::default() };
        let motion = refold(LinkageKind::ArmLinkage, &a, &b, &opts).unwrap();
        assert!(chart_distance(LinkageKind::ArmLinkage, &motion.frames[0], &a).unwrap() < 1e-6);
        assert!(
            chart_distance(LinkageKind::ArmLinkage, motion.frames.last().unwrap(), &b).unwrap()
                < 1e-6
        );
        assert!(motion.frame_valid.iter().all(|&v| v), "all frames simple");
        let spread = max_consecutive_distance(&motion).unwrap();
        assert!(spread.is_finite());
    }
}
