//! Seeded random generation of valid chart states, used by the runtime
//! property suite and the test corpus. The generator is a self-contained
//! splitmix64 so that a fixed seed reproduces byte-identical runs across
//! platforms.

use crate::chart::{
    arm_extract, cycle_constraint, cycle_extract, validate, ArmChart, ChartState, CycleChart,
    LinkageKind,
};
use crate::error::{Error, Result};
use crate::geom::{cocircular_polygon, satisfies_c1, Point};
use crate::numeric::{dot, wrap_angle};
use std::f64::consts::PI;

const ATTEMPTS: usize = 1000;

/// Splitmix64 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn range(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// A random self-avoiding arm: lengths in [0.5, 1.5], directions built from
/// bounded turn increments, rejection-sampled on simplicity.
pub fn random_arm(rng: &mut Rng, m: usize) -> Result<ArmChart> {
    for _ in 0..ATTEMPTS {
        let rho: Vec<f64> = (0..m - 1).map(|_| rng.uniform(0.5, 1.5)).collect();
        let mut theta = Vec::with_capacity(m.saturating_sub(2));
        let mut dir = 0.0;
        for _ in 0..m - 2 {
            dir = wrap_angle(dir + rng.uniform(-1.6, 1.6));
            theta.push(dir);
        }
        let chart = ArmChart::new(rho, theta)?;
        if validate(LinkageKind::ArmLinkage, &ChartState::Arm(chart.clone())).is_valid() {
            return Ok(chart);
        }
    }
    Err(Error::ConvergenceFailure("no simple arm found".into()))
}

/// Vertices of a random star-shaped polygon around the origin: strictly
/// increasing polar angles with a minimum gap, radii in [0.7, 1.3]. Always
/// simple and positively oriented.
pub fn random_star_polygon(rng: &mut Rng, m: usize) -> Vec<Point> {
    let mut gaps: Vec<f64> = (0..m).map(|_| 0.25 + rng.unit()).collect();
    let total: f64 = gaps.iter().sum();
    for g in &mut gaps {
        *g *= 2.0 * PI / total;
    }
    let mut phi = rng.uniform(0.0, 2.0 * PI);
    (0..m)
        .map(|i| {
            phi += gaps[i];
            let r = rng.uniform(0.7, 1.3);
            Point::new(r * phi.cos(), r * phi.sin())
        })
        .collect()
}

/// A random simple positively oriented cycle in configuration coordinates.
pub fn random_cycle_config(rng: &mut Rng, m: usize) -> Result<ArmChart> {
    for _ in 0..ATTEMPTS {
        let chart = arm_extract(&random_star_polygon(rng, m))?;
        if validate(LinkageKind::CycleConfig, &ChartState::Arm(chart.clone())).is_valid() {
            return Ok(chart);
        }
    }
    Err(Error::ConvergenceFailure("no valid cycle configuration found".into()))
}

/// A random simple positively oriented cycle linkage (lengths taken from
/// the sampled polygon, so the closure residual is zero up to rounding).
pub fn random_cycle_linkage(rng: &mut Rng, m: usize) -> Result<CycleChart> {
    for _ in 0..ATTEMPTS {
        let chart = cycle_extract(&random_star_polygon(rng, m))?;
        if validate(LinkageKind::CycleLinkage, &ChartState::Cycle(chart.clone())).is_valid() {
            return Ok(chart);
        }
    }
    Err(Error::ConvergenceFailure("no valid cycle linkage found".into()))
}

/// A random length vector in [0.3, 1.7] satisfying condition (c1).
pub fn random_c1_lengths(rng: &mut Rng, m: usize) -> Vec<f64> {
    loop {
        let lengths: Vec<f64> = (0..m).map(|_| rng.uniform(0.3, 1.7)).collect();
        if satisfies_c1(&lengths) {
            return lengths;
        }
    }
}

/// A random non-degenerate triangle via its side lengths: resample until
/// the triangle inequality holds with a clear margin.
pub fn random_triangle_sides(rng: &mut Rng) -> (f64, f64, f64) {
    loop {
        let a = rng.uniform(0.2, 2.0);
        let b = rng.uniform(0.2, 2.0);
        let c = rng.uniform(0.2, 2.0);
        let margin = 5e-3 * (a + b + c);
        if a + b - c > margin && b + c - a > margin && c + a - b > margin {
            return (a, b, c);
        }
    }
}

/// One random tangent step on the closure-constraint manifold: move along a
/// random direction orthogonal to grad u and Newton-correct back. Returns a
/// valid same-lengths state; the step shrinks on rejection.
pub fn constraint_walk_step(
    rng: &mut Rng,
    chart: &CycleChart,
    scale: f64,
) -> Result<CycleChart> {
    let lengths = &chart.lengths;
    let mut step = scale;
    for _ in 0..40 {
        let (_, grad_u) = cycle_constraint(&chart.theta, lengths)?;
        let gu_sq = dot(&grad_u, &grad_u);
        if gu_sq.sqrt() <= 1e-10 {
            return Err(Error::SingularConstraint);
        }
        let raw: Vec<f64> = (0..chart.theta.len()).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let coef = dot(&raw, &grad_u) / gu_sq;
        let tangent: Vec<f64> = raw.iter().zip(&grad_u).map(|(r, g)| r - coef * g).collect();
        let t_norm = crate::numeric::norm(&tangent);
        if t_norm < 1e-12 {
            continue;
        }
        let mut theta: Vec<f64> = chart
            .theta
            .iter()
            .zip(&tangent)
            .map(|(t, d)| wrap_angle(t + step * d / t_norm))
            .collect();
        // Newton correction back onto the constraint set.
        let mut ok = false;
        for _ in 0..20 {
            let (u, grad_u) = match cycle_constraint(&theta, lengths) {
                Ok(v) => v,
                Err(_) => break,
            };
            if u.abs() < 1e-12 * lengths[lengths.len() - 1] {
                ok = true;
                break;
            }
            let gu_sq = dot(&grad_u, &grad_u);
            if gu_sq.sqrt() <= 1e-10 {
                break;
            }
            for (t, g) in theta.iter_mut().zip(&grad_u) {
                *t = wrap_angle(*t - u * g / gu_sq);
            }
        }
        if ok {
            let candidate = CycleChart { lengths: lengths.clone(), theta };
            if validate(LinkageKind::CycleLinkage, &ChartState::Cycle(candidate.clone()))
                .is_valid()
            {
                return Ok(candidate);
            }
        }
        step *= 0.5;
    }
    Err(Error::ConvergenceFailure("constraint walk found no valid step".into()))
}

/// A random valid cycle linkage with the prescribed lengths: start at the
/// inscribed polygon and take a few random tangent steps.
pub fn random_cycle_linkage_with_lengths(
    rng: &mut Rng,
    lengths: &[f64],
    walk_steps: usize,
) -> Result<CycleChart> {
    let sol = cocircular_polygon(lengths)?;
    let extracted = cycle_extract(&sol.vertices)?;
    let mut chart = CycleChart { lengths: lengths.to_vec(), theta: extracted.theta };
    for _ in 0..walk_steps {
        chart = constraint_walk_step(rng, &chart, 0.25)?;
    }
    Ok(chart)
}
