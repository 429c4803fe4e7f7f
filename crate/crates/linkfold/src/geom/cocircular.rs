//! The inscribed-polygon solver: given side lengths satisfying condition
//! (c1), find the unique simple polygon inscribed in a circle with those
//! side lengths.

use super::Point;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Relative width of the final radius bracket. Held at machine precision:
/// downstream energy gradients difference the inscribed area through this
/// solver, and a looser radius floor shows up as evaluation noise that
/// stalls their flows.
const BRACKET_TOL: f64 = 2.5e-16;
/// Combined bisection + Newton iteration cap.
const MAX_ITERATIONS: usize = 200;

/// A simple polygon inscribed in a circle, positively oriented, with the
/// first vertex placed at polar angle zero.
#[derive(Debug, Clone)]
pub struct CocircularSolution {
    pub radius: f64,
    pub center: Point,
    /// Central angle swept by each side; the angles sum to 2 pi. When the
    /// circumcenter lies outside the polygon the longest side sweeps more
    /// than pi.
    pub central_angles: Vec<f64>,
    pub vertices: Vec<Point>,
}

impl CocircularSolution {
    /// Enclosed area, summed as signed circular-sector triangles.
    pub fn area(&self) -> f64 {
        0.5 * self.radius * self.radius * self.central_angles.iter().map(|s| s.sin()).sum::<f64>()
    }

    /// Derivative of the inscribed-polygon area with respect to each side
    /// length, holding the other lengths fixed: sqrt(4R^2 - l_i^2) / 2,
    /// negated on the side whose arc exceeds pi.
    pub fn area_length_gradient(&self, lengths: &[f64]) -> Vec<f64> {
        lengths
            .iter()
            .zip(&self.central_angles)
            .map(|(&l, &s)| {
                let g = 0.5 * (4.0 * self.radius * self.radius - l * l).max(0.0).sqrt();
                if s > PI {
                    -g
                } else {
                    g
                }
            })
            .collect()
    }
}

/// Condition (c1): every length strictly below the sum of the others —
/// exactly the feasibility condition for cycle linkages.
pub fn satisfies_c1(lengths: &[f64]) -> bool {
    if lengths.len() < 3 || lengths.iter().any(|&l| !l.is_finite() || l <= 0.0) {
        return false;
    }
    let total: f64 = lengths.iter().sum();
    lengths.iter().all(|&l| l < total - l)
}

/// Solve for the unique (up to isometry) simple polygon inscribed in a
/// circle with the given side lengths.
///
/// The circumradius is found by bisection with Newton polish on the
/// angle-sum residual over R in [l_max/2, inf). Two regimes are
/// distinguished by the residual sign at R = l_max/2: circumcenter inside
/// the polygon (every side sweeps 2 asin(l/2R)) or outside (the longest
/// side sweeps 2 pi - 2 asin(l_max/2R)).
pub fn cocircular_polygon(lengths: &[f64]) -> Result<CocircularSolution> {
    if !satisfies_c1(lengths) {
        return Err(Error::InfeasibleLengths);
    }
    let max_idx = lengths
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let l_max = lengths[max_idx];
    let r_min = 0.5 * l_max;

    // Angle-sum residual with the center-inside convention.
    let inside_residual = |r: f64| -> f64 {
        lengths.iter().map(|&l| 2.0 * asin_clamped(l / (2.0 * r))).sum::<f64>() - 2.0 * PI
    };
    // Residual with the longest side counted the reflex way.
    let outside_residual = |r: f64| -> f64 {
        lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let s = 2.0 * asin_clamped(l / (2.0 * r));
                if i == max_idx {
                    -s
                } else {
                    s
                }
            })
            .sum()
    };
    let d_residual = |r: f64, outside: bool| -> f64 {
        lengths
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let root = (4.0 * r * r - l * l).max(0.0).sqrt();
                if root == 0.0 {
                    return f64::NEG_INFINITY;
                }
                let d = -2.0 * l / (r * root);
                if outside && i == max_idx {
                    -d
                } else {
                    d
                }
            })
            .sum()
    };

    let at_min = inside_residual(r_min);
    let (radius, outside) = if at_min.abs() <= 1e-13 {
        // Longest side is a diameter; the bracket endpoint is the solution.
        (r_min, false)
    } else if at_min > 0.0 {
        (solve_radius(&inside_residual, |r| d_residual(r, false), r_min)?, false)
    } else {
        (solve_radius(&outside_residual, |r| d_residual(r, true), r_min)?, true)
    };

    let central_angles: Vec<f64> = lengths
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let s = 2.0 * asin_clamped(l / (2.0 * radius));
            if outside && i == max_idx {
                2.0 * PI - s
            } else {
                s
            }
        })
        .collect();

    let mut vertices = Vec::with_capacity(lengths.len());
    let mut phi = 0.0f64;
    for &s in &central_angles {
        vertices.push(Point::new(radius * phi.cos(), radius * phi.sin()));
        phi += s;
    }

    Ok(CocircularSolution {
        radius,
        center: Point::new(0.0, 0.0),
        central_angles,
        vertices,
    })
}

fn asin_clamped(x: f64) -> f64 {
    x.clamp(-1.0, 1.0).asin()
}

/// Find the root of a residual that changes sign on (r_min, inf): bracket by
/// doubling, bisect to the relative tolerance, then polish with guarded
/// Newton steps.
fn solve_radius(
    residual: &dyn Fn(f64) -> f64,
    derivative: impl Fn(f64) -> f64,
    r_min: f64,
) -> Result<f64> {
    let mut iterations = 0;
    let mut lo = r_min;
    let mut hi = r_min;
    let lo_sign = residual(lo) > 0.0;
    loop {
        hi *= 2.0;
        iterations += 1;
        if (residual(hi) > 0.0) != lo_sign {
            break;
        }
        if iterations >= MAX_ITERATIONS {
            return Err(Error::ConvergenceFailure(
                "no sign change found while bracketing the circumradius".into(),
            ));
        }
    }

    while hi - lo > BRACKET_TOL * hi && iterations < MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0) == lo_sign {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }

    let mut r = 0.5 * (lo + hi);
    while iterations < MAX_ITERATIONS {
        let f = residual(r);
        if f.abs() < 1e-15 {
            break;
        }
        let df = derivative(r);
        if !df.is_finite() || df == 0.0 {
            break;
        }
        let next = r - f / df;
        if next <= lo || next >= hi || (next - r).abs() <= f64::EPSILON * r {
            break;
        }
        r = next;
        iterations += 1;
    }
    Ok(r)
}
