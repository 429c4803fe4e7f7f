//! Enclosed area in angle coordinates and in triangulation (length/diagonal)
//! coordinates, with the analytic derivatives used by the flows and the
//! Hessian checks.

use crate::chart::{cycle_embed, CycleChart};
use crate::error::{Error, Result};
use crate::geom::{
    heron_area, is_simple, signed_area, triangle_area_partials, Point, Triangulation,
};

/// Shoelace area of a cycle state and its gradient in theta.
pub fn area_theta(chart: &CycleChart) -> Result<(f64, Vec<f64>)> {
    let vertices = cycle_embed(chart);
    if !is_simple(&vertices, true) {
        return Err(Error::InvalidInput("area needs a simple cycle".into()));
    }
    let area = signed_area(&vertices)?;
    let vertex_grad = area_vertex_gradient(&vertices);
    let (_, d_theta) = super::chain_vertex_gradient(
        &chart.lengths[..chart.m() - 1],
        &chart.theta,
        &vertex_grad,
    );
    Ok((area, d_theta))
}

/// Per-vertex gradient of the shoelace area of a closed polygon.
pub(crate) fn area_vertex_gradient(vertices: &[Point]) -> Vec<Point> {
    let n = vertices.len();
    (0..n)
        .map(|i| {
            let prev = vertices[(i + n - 1) % n];
            let next = vertices[(i + 1) % n];
            Point::new(next.y - prev.y, prev.x - next.x) * 0.5
        })
        .collect()
}

/// Area of a triangulated polygon as a function of side and diagonal
/// lengths, with the gradient and Hessian in the diagonal lengths.
#[derive(Debug, Clone)]
pub struct AreaDerivatives {
    pub area: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

/// Sum of Heron areas over the triangulation, differentiated in the
/// diagonal lengths: the gradient entry for a diagonal is
/// lambda (cot beta + cot gamma) / 2 over its two opposite angles, and the
/// Hessian assembles the per-triangle second partials.
pub fn area_lambda(
    lengths: &[f64],
    lambdas: &[f64],
    tri: &Triangulation,
) -> Result<AreaDerivatives> {
    let n = tri.n_vertices;
    if lengths.len() != n || lambdas.len() != tri.diagonals.len() {
        return Err(Error::InvalidInput(format!(
            "expected {} side lengths and {} diagonals, got {} and {}",
            n,
            tri.diagonals.len(),
            lengths.len(),
            lambdas.len()
        )));
    }
    let d = lambdas.len();
    let mut area = 0.0;
    let mut gradient = vec![0.0; d];
    let mut hessian = vec![vec![0.0; d]; d];

    for t in &tri.triangles {
        // Each triangle edge is either a polygon side or a diagonal; record
        // the diagonal slots for the derivative assembly.
        let mut side_len = [0.0; 3];
        let mut diag_slot = [None; 3];
        for e in 0..3 {
            let (a, b) = (t[e], t[(e + 1) % 3]);
            if (a + 1) % n == b {
                side_len[e] = lengths[a];
            } else if (b + 1) % n == a {
                side_len[e] = lengths[b];
            } else {
                let key = (a.min(b), a.max(b));
                let idx = tri
                    .diagonals
                    .iter()
                    .position(|&dd| dd == key)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!("edge {key:?} missing from diagonals"))
                    })?;
                side_len[e] = lambdas[idx];
                diag_slot[e] = Some(idx);
            }
        }
        area += heron_area(side_len[0], side_len[1], side_len[2])?;
        for e in 0..3 {
            let Some(i) = diag_slot[e] else { continue };
            let partials =
                triangle_area_partials(side_len[e], side_len[(e + 1) % 3], side_len[(e + 2) % 3])?;
            gradient[i] += partials.da;
            hessian[i][i] += partials.daa;
            if let Some(j) = diag_slot[(e + 1) % 3] {
                hessian[i][j] += partials.dab;
            }
            if let Some(j) = diag_slot[(e + 2) % 3] {
                let p2 = triangle_area_partials(
                    side_len[e],
                    side_len[(e + 2) % 3],
                    side_len[(e + 1) % 3],
                )?;
                hessian[i][j] += p2.dab;
            }
        }
    }
    Ok(AreaDerivatives { area, gradient, hessian })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::triangulate;
    use crate::numeric::symmetric_eigenvalues;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn unit_square_area_and_gradient() {
        let chart = CycleChart::new(vec![1.0; 4], vec![FRAC_PI_2, PI]).unwrap();
        let (area, _) = area_theta(&chart).unwrap();
        assert!((area - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equilateral_triangle_area() {
        let chart = CycleChart::new(vec![1.0; 3], vec![2.0 * PI / 3.0]).unwrap();
        let (area, grad) = area_theta(&chart).unwrap();
        assert!((area - 3f64.sqrt() / 4.0).abs() < 1e-12);
        assert_eq!(grad.len(), 1);
    }

    #[test]
    fn theta_gradient_matches_finite_differences() {
        let lengths = vec![1.0, 1.3, 0.9, 1.2, 1.1];
        let theta = vec![1.2, 2.3, -2.6];
        let chart = CycleChart::new(lengths.clone(), theta.clone()).unwrap();
        let (_, grad) = area_theta(&chart).unwrap();
        let h = 1e-6;
        for i in 0..theta.len() {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[i] += h;
            dn[i] -= h;
            let a_up = area_theta(&CycleChart::new(lengths.clone(), up).unwrap()).unwrap().0;
            let a_dn = area_theta(&CycleChart::new(lengths.clone(), dn).unwrap()).unwrap().0;
            let est = (a_up - a_dn) / (2.0 * h);
            assert!((grad[i] - est).abs() <= 1e-6 * est.abs().max(1.0), "theta {i}");
        }
    }

    #[test]
    fn square_diagonal_is_area_critical() {
        let square = [
            Point::new(0.0, 0.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(0.0, 1.0),
        ];
        let tri = triangulate(&square, false).unwrap();
        let d = area_lambda(&[1.0; 4], &[2f64.sqrt()], &tri).unwrap();
        assert!((d.area - 1.0).abs() < 1e-12);
        // Opposite angles are both pi/2, so the diagonal derivative vanishes.
        assert!(d.gradient[0].abs() < 1e-12);
    }

    fn fan_case() -> (Vec<Point>, Triangulation, Vec<f64>, Vec<f64>) {
        let m = 6;
        let pts: Vec<Point> = (0..m)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / m as f64 + 0.2;
                Point::new(1.4 * phi.cos(), 1.1 * phi.sin())
            })
            .collect();
        let tri = triangulate(&pts, false).unwrap();
        let lengths: Vec<f64> = (0..m).map(|i| pts[i].dist(pts[(i + 1) % m])).collect();
        let lambdas: Vec<f64> =
            tri.diagonals.iter().map(|&(a, b)| pts[a].dist(pts[b])).collect();
        (pts, tri, lengths, lambdas)
    }

    #[test]
    fn lambda_gradient_and_hessian_match_finite_differences() {
        let (_, tri, lengths, lambdas) = fan_case();
        let d = area_lambda(&lengths, &lambdas, &tri).unwrap();
        let h = 1e-5;
        let area_of = |l: &[f64]| area_lambda(&lengths, l, &tri).unwrap().area;
        for i in 0..lambdas.len() {
            let mut up = lambdas.clone();
            let mut dn = lambdas.clone();
            up[i] += h;
            dn[i] -= h;
            let est = (area_of(&up) - area_of(&dn)) / (2.0 * h);
            assert!(
                (d.gradient[i] - est).abs() <= 1e-6 * est.abs().max(1.0),
                "gradient {i}: {} vs {est}",
                d.gradient[i]
            );
            for j in 0..lambdas.len() {
                let mut pp = lambdas.clone();
                let mut pm = lambdas.clone();
                let mut mp = lambdas.clone();
                let mut mm = lambdas.clone();
                pp[i] += h;
                pp[j] += h;
                pm[i] += h;
                pm[j] -= h;
                mp[i] -= h;
                mp[j] += h;
                mm[i] -= h;
                mm[j] -= h;
                let est2 =
                    (area_of(&pp) - area_of(&pm) - area_of(&mp) + area_of(&mm)) / (4.0 * h * h);
                assert!(
                    (d.hessian[i][j] - est2).abs() <= 1e-4 * est2.abs().max(1.0),
                    "hessian {i},{j}: {} vs {est2}",
                    d.hessian[i][j]
                );
            }
        }
    }

    #[test]
    fn hessian_is_symmetric() {
        let (_, tri, lengths, lambdas) = fan_case();
        let d = area_lambda(&lengths, &lambdas, &tri).unwrap();
        for i in 0..lambdas.len() {
            for j in 0..lambdas.len() {
                assert!((d.hessian[i][j] - d.hessian[j][i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hessian_negative_definite_at_cocircular_pentagon() {
        let m = 5;
        let pts: Vec<Point> = (0..m)
            .map(|k| {
                let phi = 2.0 * PI * k as f64 / m as f64;
                Point::new(phi.cos(), phi.sin())
            })
            .collect();
        let tri = triangulate(&pts, false).unwrap();
        let lengths: Vec<f64> = (0..m).map(|i| pts[i].dist(pts[(i + 1) % m])).collect();
        let lambdas: Vec<f64> =
            tri.diagonals.iter().map(|&(a, b)| pts[a].dist(pts[b])).collect();
        let d = area_lambda(&lengths, &lambdas, &tri).unwrap();
        let eig = symmetric_eigenvalues(&d.hessian);
        for e in eig {
            assert!(e < 0.0, "eigenvalue {e}");
        }
    }
}
