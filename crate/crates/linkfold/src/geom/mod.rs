//! Planar geometry kernel: orientation and simplicity predicates, polygon
//! angles and areas, triangulation with Lawson edges, triangle-area calculus,
//! and the inscribed-polygon (cocircular) solver.

mod cocircular;
mod triangle;
mod triangulate;

pub use cocircular::{cocircular_polygon, satisfies_c1, CocircularSolution};
pub use triangle::{heron_area, triangle_angles, triangle_area_partials, TriangleAreaPartials};
pub use triangulate::{triangulate, Triangulation};

use crate::error::{Error, Result};

/// Collinearity threshold for the orientation predicate, applied to the
/// cross product after normalizing by the lengths of both difference
/// vectors (scale-invariant).
pub(crate) const ORIENT_EPS: f64 = 1e-12;

/// A position in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point) -> f64 {
        (self - other).norm()
    }

    /// Counterclockwise rotation by a quarter turn.
    pub fn perp(self) -> Point {
        Point::new(-self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// Sign of the turn a -> b -> c: +1 counterclockwise, -1 clockwise,
/// 0 collinear within `ORIENT_EPS` of the normalized cross product.
pub fn orientation(a: Point, b: Point, c: Point) -> i8 {
    let u = b - a;
    let v = c - a;
    let cross = u.cross(v);
    let scale = u.norm() * v.norm();
    if cross.abs() <= ORIENT_EPS * scale {
        0
    } else if cross > 0.0 {
        1
    } else {
        -1
    }
}

fn on_segment(p: Point, q: Point, r: Point) -> bool {
    r.x <= p.x.max(q.x)
        && r.x >= p.x.min(q.x)
        && r.y <= p.y.max(q.y)
        && r.y >= p.y.min(q.y)
}

/// Whether the closed segments p1-p2 and q1-q2 share any point.
pub fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let o1 = orientation(p1, p2, q1);
    let o2 = orientation(p1, p2, q2);
    let o3 = orientation(q1, q2, p1);
    let o4 = orientation(q1, q2, p2);

    if o1 != o2 && o3 != o4 {
        return true;
    }
    (o1 == 0 && on_segment(p1, p2, q1))
        || (o2 == 0 && on_segment(p1, p2, q2))
        || (o3 == 0 && on_segment(q1, q2, p1))
        || (o4 == 0 && on_segment(q1, q2, p2))
}

/// Shoelace area of a closed polygon; positive iff counterclockwise.
pub fn signed_area(vertices: &[Point]) -> Result<f64> {
    if vertices.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "signed_area needs at least 3 vertices, got {}",
            vertices.len()
        )));
    }
    let mut twice = 0.0;
    let n = vertices.len();
    for i in 0..n {
        let a = vertices[i];
        let b = vertices[(i + 1) % n];
        twice += a.cross(b);
    }
    Ok(0.5 * twice)
}

/// Whether the polyline (or polygon, when `closed`) is an embedding: no two
/// non-adjacent segments share a point, adjacent segments meet only at their
/// common endpoint, and no edge is degenerate.
pub fn is_simple(vertices: &[Point], closed: bool) -> bool {
    let n = vertices.len();
    if n < 2 || (closed && n < 3) {
        return false;
    }
    let n_seg = if closed { n } else { n - 1 };
    let seg = |i: usize| (vertices[i], vertices[(i + 1) % n]);

    for i in 0..n_seg {
        let (a, b) = seg(i);
        if a.dist(b) == 0.0 {
            return false;
        }
    }
    for i in 0..n_seg {
        for j in (i + 1)..n_seg {
            let wraps = closed && i == 0 && j == n_seg - 1;
            let adjacent = j == i + 1 || wraps;
            let (p1, p2) = seg(i);
            let (q1, q2) = seg(j);
            if adjacent {
                // Shared endpoint; the other two endpoints must not fold back
                // onto the common vertex's rays.
                let (shared, a, c) = if wraps { (p1, p2, q1) } else { (p2, p1, q2) };
                if orientation(shared, a, c) == 0 && (a - shared).dot(c - shared) > 0.0 {
                    return false;
                }
            } else if segments_intersect(p1, p2, q1, q2) {
                return false;
            }
        }
    }
    true
}

/// Interior angles of a simple, positively oriented closed polygon, each in
/// (0, 2pi). The turning identity sum(pi - alpha_i) = 2pi holds for every
/// valid input.
pub fn interior_angles(vertices: &[Point]) -> Result<Vec<f64>> {
    let n = vertices.len();
    if n < 3 || !is_simple(vertices, true) {
        return Err(Error::InvalidInput("interior angles need a simple polygon".into()));
    }
    if signed_area(vertices)? <= 0.0 {
        return Err(Error::InvalidInput(
            "interior angles need a positively oriented polygon".into(),
        ));
    }
    let mut angles = Vec::with_capacity(n);
    for i in 0..n {
        let prev = vertices[(i + n - 1) % n];
        let cur = vertices[i];
        let next = vertices[(i + 1) % n];
        let e_in = cur - prev;
        let e_out = next - cur;
        let turn = e_in.cross(e_out).atan2(e_in.dot(e_out));
        angles.push(std::f64::consts::PI - turn);
    }
    Ok(angles)
}

/// Algebraic (Kasa) least-squares circle fit. Returns (center, radius).
pub fn fit_circle(points: &[Point]) -> Result<(Point, f64)> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("circle fit needs at least 3 points".into()));
    }
    // Normal equations for 2cx*x + 2cy*y + t = x^2 + y^2, radius^2 = t + cx^2 + cy^2.
    let mut m = [[0.0f64; 3]; 3];
    let mut rhs = [0.0f64; 3];
    for p in points {
        let row = [2.0 * p.x, 2.0 * p.y, 1.0];
        let z = p.x * p.x + p.y * p.y;
        for r in 0..3 {
            for c in 0..3 {
                m[r][c] += row[r] * row[c];
            }
            rhs[r] += row[r] * z;
        }
    }
    let sol = solve3(m, rhs)
        .ok_or_else(|| Error::InvalidInput("degenerate point set for circle fit".into()))?;
    let center = Point::new(sol[0], sol[1]);
    let r2 = sol[2] + center.dot(center);
    if r2 <= 0.0 {
        return Err(Error::InvalidInput("degenerate point set for circle fit".into()));
    }
    Ok((center, r2.sqrt()))
}

/// Relative concyclicity defect: max |dist(p, center) - R| / R over the
/// least-squares circle fit.
pub fn concyclicity_residual(points: &[Point]) -> Result<f64> {
    let (center, radius) = fit_circle(points)?;
    let worst = points
        .iter()
        .map(|p| (p.dist(center) - radius).abs())
        .fold(0.0, f64::max);
    Ok(worst / radius)
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[pivot][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = m[row][col] / m[col][col];
            for c in col..3 {
                m[row][c] -= f * m[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut s = b[row];
        for c in (row + 1)..3 {
            s -= m[row][c] * x[c];
        }
        x[row] = s / m[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square() -> Vec<Point> {
        vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ]
    }

    #[test]
    fn signed_area_unit_square() {
        assert_eq!(signed_area(&square()).unwrap(), 1.0);
    }

    #[test]
    fn signed_area_reversed_square_negates() {
        let mut sq = square();
        sq.reverse();
        assert_eq!(signed_area(&sq).unwrap(), -1.0);
    }

    #[test]
    fn signed_area_right_triangle() {
        let tri = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(signed_area(&tri).unwrap(), 0.5);
    }

    #[test]
    fn signed_area_rejects_two_points() {
        assert!(signed_area(&[Point::new(0.0, 0.0), Point::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn square_is_simple() {
        assert!(is_simple(&square(), true));
    }

    #[test]
    fn bowtie_is_not_simple() {
        let bowtie = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(!is_simple(&bowtie, true));
    }

    #[test]
    fn collinear_open_polyline_is_simple() {
        let line = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)];
        assert!(is_simple(&line, false));
    }

    #[test]
    fn backtracking_polyline_is_not_simple() {
        let fold = [Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.5, 0.0)];
        assert!(!is_simple(&fold, false));
    }

    #[test]
    fn zero_length_edge_is_not_simple() {
        let dup = [Point::new(0.0, 0.0), Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert!(!is_simple(&dup, false));
    }

    #[test]
    fn simplicity_invariant_under_rigid_motion_and_scaling() {
        let bowtie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        let shapes: [(Vec<Point>, bool); 2] = [(square(), true), (bowtie, false)];
        let angle: f64 = 0.7321;
        let (scale, shift) = (137.0, Point::new(-3.5, 11.25));
        for (pts, expect) in shapes {
            let moved: Vec<Point> = pts
                .iter()
                .map(|p| {
                    Point::new(
                        scale * (p.x * angle.cos() - p.y * angle.sin()) + shift.x,
                        scale * (p.x * angle.sin() + p.y * angle.cos()) + shift.y,
                    )
                })
                .collect();
            assert_eq!(is_simple(&moved, true), expect);
        }
    }

    #[test]
    fn interior_angles_unit_square() {
        let angles = interior_angles(&square()).unwrap();
        for a in angles {
            assert!((a - PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_angles_equilateral_triangle() {
        let tri = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(0.5, 3f64.sqrt() / 2.0),
        ];
        for a in interior_angles(&tri).unwrap() {
            assert!((a - PI / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_angles_l_hexagon_reflex() {
        let hexagon = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let angles = interior_angles(&hexagon).unwrap();
        for (i, a) in angles.iter().enumerate() {
            let expect = if i == 3 { 1.5 * PI } else { 0.5 * PI };
            assert!((a - expect).abs() < 1e-12, "vertex {i}: {a}");
        }
    }

    #[test]
    fn interior_angles_turning_identity() {
        let hexagon = [
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(2.0, 1.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        let angles = interior_angles(&hexagon).unwrap();
        let total: f64 = angles.iter().map(|a| PI - a).sum();
        assert!((total - 2.0 * PI).abs() < 1e-9);
    }

    #[test]
    fn interior_angles_reject_clockwise() {
        let mut sq = square();
        sq.reverse();
        assert!(interior_angles(&sq).is_err());
    }

    #[test]
    fn interior_angles_reject_bowtie() {
        let bowtie = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(interior_angles(&bowtie).is_err());
    }

    #[test]
    fn circle_fit_recovers_exact_circle() {
        let center = Point::new(1.5, -2.0);
        let radius = 3.25;
        let pts: Vec<Point> = (0..7)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / 7.0 + 0.3;
                center + Point::new(phi.cos(), phi.sin()) * radius
            })
            .collect();
        let (c, r) = fit_circle(&pts).unwrap();
        assert!(c.dist(center) < 1e-9);
        assert!((r - radius).abs() < 1e-9);
        assert!(concyclicity_residual(&pts).unwrap() < 1e-12);
    }
}
