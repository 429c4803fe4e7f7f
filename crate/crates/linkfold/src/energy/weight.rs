//! Non-convexity weight: the mean over vertices of exp(1/(pi - alpha_i))
//! for reflex interior angles, zero elsewhere. Vanishes exactly on convex
//! polygons and extends smoothly across the convex boundary.

use crate::error::Result;
use crate::geom::{interior_angles, Point};
use std::f64::consts::PI;

/// Exponent floor: below this the weight underflows to an exact zero and
/// the gradient is flushed with it.
const EXPONENT_FLOOR: f64 = -700.0;

/// Weight value and per-vertex gradient for a simple, positively oriented
/// closed polygon.
pub fn nonconvexity_weight(vertices: &[Point]) -> Result<(f64, Vec<Point>)> {
    let n = vertices.len();
    let angles = interior_angles(vertices)?;
    let mut value = 0.0;
    let mut grad = vec![Point::new(0.0, 0.0); n];
    for (i, &alpha) in angles.iter().enumerate() {
        if alpha <= PI {
            continue;
        }
        let t = 1.0 / (PI - alpha);
        if t < EXPONENT_FLOOR {
            continue;
        }
        let w_i = t.exp();
        value += w_i;
        // d(w_i)/d(alpha_i) = w_i * t^2, and alpha_i = pi - turn_i.
        let d_walpha = w_i * t * t;
        let prev = vertices[(i + n - 1) % n];
        let cur = vertices[i];
        let next = vertices[(i + 1) % n];
        let e_in = cur - prev;
        let e_out = next - cur;
        let g_in = e_in.perp() * (1.0 / e_in.dot(e_in));
        let g_out = e_out.perp() * (1.0 / e_out.dot(e_out));
        // d(turn_i) contributions; d(alpha_i) negates them.
        grad[(i + 1) % n] = grad[(i + 1) % n] + g_out * (-d_walpha);
        grad[i] = grad[i] + (g_out + g_in) * d_walpha;
        grad[(i + n - 1) % n] = grad[(i + n - 1) % n] + g_in * (-d_walpha);
    }
    let inv_m = 1.0 / n as f64;
    Ok((value * inv_m, grad.into_iter().map(|g| g * inv_m).collect()))
}
