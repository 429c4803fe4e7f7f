//! Self-avoidance strain energy: for every edge and every vertex not on it,
//! the inverse-square of the triangle-inequality gap
//! |v_i - v_k| + |v_j - v_k| - |v_i - v_j|.

use crate::error::{Error, Result};
use crate::geom::Point;

/// Gap threshold below which a configuration counts as touching the
/// boundary of the moduli space.
pub const NEAR_CONTACT: f64 = 1e-14;

/// Edge list of an open arm with m vertices.
pub fn arm_edges(m: usize) -> Vec<(usize, usize)> {
    (0..m - 1).map(|i| (i, i + 1)).collect()
}

/// Edge list of a closed cycle with m vertices.
pub fn cycle_edges(m: usize) -> Vec<(usize, usize)> {
    (0..m).map(|i| (i, (i + 1) % m)).collect()
}

/// Strain energy and its per-vertex gradient.
pub fn strain_energy(vertices: &[Point], edges: &[(usize, usize)]) -> Result<(f64, Vec<Point>)> {
    let n = vertices.len();
    let mut value = 0.0;
    let mut grad = vec![Point::new(0.0, 0.0); n];
    for &(i, j) in edges {
        if i >= n || j >= n || i == j {
            return Err(Error::InvalidInput(format!("edge ({i},{j}) out of range")));
        }
        let (pi, pj) = (vertices[i], vertices[j]);
        let d_ij = pi.dist(pj);
        for (k, &pk) in vertices.iter().enumerate() {
            if k == i || k == j {
                continue;
            }
            let d_ik = pi.dist(pk);
            let d_jk = pj.dist(pk);
            let gap = d_ik + d_jk - d_ij;
            if gap <= NEAR_CONTACT || d_ik == 0.0 || d_jk == 0.0 || d_ij == 0.0 {
                return Err(Error::NearContact);
            }
            value += 1.0 / (gap * gap);
            let scale = -2.0 / (gap * gap * gap);
            let u_ik = (pi - pk) * (1.0 / d_ik);
            let u_jk = (pj - pk) * (1.0 / d_jk);
            let u_ij = (pi - pj) * (1.0 / d_ij);
            grad[i] = grad[i] + (u_ik - u_ij) * scale;
            grad[j] = grad[j] + (u_jk + u_ij) * scale;
            grad[k] = grad[k] + (u_ik + u_jk) * (-scale);
        }
    }
    Ok((value, grad))
}
