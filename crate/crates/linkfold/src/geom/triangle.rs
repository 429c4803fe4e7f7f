//! Area calculus for a triangle given by its three side lengths.

use crate::error::{Error, Result};

/// Triangle-inequality slack, relative to the perimeter: sides closer than
/// this to collinear are rejected instead of producing huge cotangents.
const DEGENERACY_SLACK: f64 = 1e-12;

/// First and second partial derivatives of the triangle area with respect to
/// side lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriangleAreaPartials {
    /// dA/da for the first side.
    pub da: f64,
    /// d2A/da2 for the first side.
    pub daa: f64,
    /// d2A/(da db) mixed between the first and second sides.
    pub dab: f64,
}

fn check_sides(a: f64, b: f64, c: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0 && c > 0.0) || !(a + b + c).is_finite() {
        return Err(Error::InvalidInput("side lengths must be positive and finite".into()));
    }
    let perimeter = a + b + c;
    let slack = DEGENERACY_SLACK * perimeter;
    if a + b - c <= slack || b + c - a <= slack || c + a - b <= slack {
        return Err(Error::DegenerateTriangle);
    }
    Ok(())
}

/// Numerically stable Heron area (Kahan's ordering).
pub fn heron_area(a: f64, b: f64, c: f64) -> Result<f64> {
    check_sides(a, b, c)?;
    let mut s = [a, b, c];
    s.sort_by(|x, y| y.total_cmp(x));
    let [a, b, c] = s;
    let t = (a + (b + c)) * (c - (a - b)) * (c + (a - b)) * (a + (b - c));
    Ok(0.25 * t.sqrt())
}

/// Angles opposite the sides (a, b, c), in the same order.
pub fn triangle_angles(a: f64, b: f64, c: f64) -> Result<(f64, f64, f64)> {
    check_sides(a, b, c)?;
    let cos_a = ((b * b + c * c - a * a) / (2.0 * b * c)).clamp(-1.0, 1.0);
    let cos_b = ((c * c + a * a - b * b) / (2.0 * c * a)).clamp(-1.0, 1.0);
    let alpha = cos_a.acos();
    let beta = cos_b.acos();
    Ok((alpha, beta, std::f64::consts::PI - alpha - beta))
}

/// Derivatives of the triangle area with respect to the first side `a`
/// (and the mixed partial against the second side `b`):
///
/// dA/da       = a cot(alpha) / 2
/// d2A/da2     = cot(alpha)/2 - Y
/// d2A/(da db) = Y cos(gamma)
///
/// where alpha, beta, gamma are the angles opposite a, b, c and
/// Y = (a / sin alpha)^3 / (2abc) is symmetric in the three sides.
pub fn triangle_area_partials(a: f64, b: f64, c: f64) -> Result<TriangleAreaPartials> {
    let (alpha, _, gamma) = triangle_angles(a, b, c)?;
    let sin_alpha = alpha.sin();
    let cot_alpha = alpha.cos() / sin_alpha;
    let upsilon = (a / sin_alpha).powi(3) / (2.0 * a * b * c);
    Ok(TriangleAreaPartials {
        da: 0.5 * a * cot_alpha,
        daa: 0.5 * cot_alpha - upsilon,
        dab: upsilon * gamma.cos(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heron_right_triangle() {
        assert!((heron_area(3.0, 4.0, 5.0).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_sides_rejected() {
        assert_eq!(heron_area(1.0, 1.0, 2.0), Err(Error::DegenerateTriangle));
        assert_eq!(
            triangle_area_partials(1.0, 1.0, 2.0 - 1e-14),
            Err(Error::DegenerateTriangle)
        );
    }

    #[test]
    fn equilateral_first_partial() {
        let p = triangle_area_partials(1.0, 1.0, 1.0).unwrap();
        assert!((p.da - 1.0 / (2.0 * 3f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn hypotenuse_partial_vanishes() {
        // Right angle opposite the hypotenuse: cot(pi/2) = 0.
        let p = triangle_area_partials(2f64.sqrt(), 1.0, 1.0).unwrap();
        assert!(p.da.abs() < 1e-12);
    }

    #[test]
    fn partials_match_finite_differences() {
        // Central differences of Heron's area as the independent oracle.
        let cases = [(1.0, 1.2, 0.9), (2f64.sqrt(), 1.0, 1.0), (3.0, 4.0, 5.0), (0.5, 0.45, 0.2)];
        let h = 1e-5;
        for (a, b, c) in cases {
            let p = triangle_area_partials(a, b, c).unwrap();
            let area = |a: f64, b: f64| heron_area(a, b, c).unwrap();
            let fd_da = (area(a + h, b) - area(a - h, b)) / (2.0 * h);
            let fd_daa = (area(a + h, b) - 2.0 * area(a, b) + area(a - h, b)) / (h * h);
            let fd_dab = (area(a + h, b + h) - area(a + h, b - h) - area(a - h, b + h)
                + area(a - h, b - h))
                / (4.0 * h * h);
            assert!((p.da - fd_da).abs() <= 1e-6 * fd_da.abs().max(1.0), "da {a} {b} {c}");
            assert!((p.daa - fd_daa).abs() <= 1e-5 * fd_daa.abs().max(1.0), "daa {a} {b} {c}");
            assert!((p.dab - fd_dab).abs() <= 1e-5 * fd_dab.abs().max(1.0), "dab {a} {b} {c}");
        }
    }

    #[test]
    fn mixed_partial_right_triangle_leg() {
        // Hypotenuse first, leg second: gamma = pi/4 opposite the other leg.
        let p = triangle_area_partials(2f64.sqrt(), 1.0, 1.0).unwrap();
        let h = 1e-5;
        let area = |a: f64, b: f64| heron_area(a, b, 1.0).unwrap();
        let a = 2f64.sqrt();
        let fd = (area(a + h, 1.0 + h) - area(a + h, 1.0 - h) - area(a - h, 1.0 + h)
            + area(a - h, 1.0 - h))
            / (4.0 * h * h);
        assert!(p.dab.abs() > 0.1);
        assert!((p.dab - fd).abs() <= 1e-6 * fd.abs().max(1.0));
    }
}
