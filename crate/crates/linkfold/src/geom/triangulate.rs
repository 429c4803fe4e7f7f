//! Ear-clipping triangulation of simple polygons, with optional
//! Delaunay-style edge flips until every diagonal is a Lawson edge.

use super::{is_simple, orientation, signed_area, Point};
use crate::error::{Error, Result};

/// Slack on the Lawson test: a diagonal is accepted when the two opposite
/// angles satisfy beta + gamma <= pi + LAWSON_TOL.
const LAWSON_TOL: f64 = 1e-9;

/// A triangulation of a simple polygon without added vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    pub n_vertices: usize,
    /// Diagonal endpoints as vertex-index pairs, each stored (low, high).
    pub diagonals: Vec<(usize, usize)>,
    /// Triangles as vertex-index triples, counterclockwise.
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    /// The two triangles adjacent to a diagonal, by index into `triangles`.
    pub fn triangles_of_diagonal(&self, diag: (usize, usize)) -> Vec<usize> {
        self.triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(&diag.0) && t.contains(&diag.1))
            .map(|(i, _)| i)
            .collect()
    }

    /// Sum of the two angles opposite each diagonal, in diagonal order.
    pub fn opposite_angle_sums(&self, vertices: &[Point]) -> Vec<f64> {
        self.diagonals
            .iter()
            .map(|&(u, v)| {
                self.triangles_of_diagonal((u, v))
                    .iter()
                    .map(|&ti| {
                        let t = self.triangles[ti];
                        let apex = t.iter().copied().find(|&k| k != u && k != v).unwrap();
                        angle_at(vertices[apex], vertices[u], vertices[v])
                    })
                    .sum()
            })
            .collect()
    }
}

fn angle_at(apex: Point, p: Point, q: Point) -> f64 {
    let u = p - apex;
    let v = q - apex;
    u.cross(v).abs().atan2(u.dot(v))
}

fn point_in_closed_triangle(a: Point, b: Point, c: Point, p: Point) -> bool {
    orientation(a, b, p) >= 0 && orientation(b, c, p) >= 0 && orientation(c, a, p) >= 0
}

/// Triangulate a simple polygon by ear clipping. With `lawson` set, edge
/// flips run until every diagonal is a Lawson edge (opposite angles summing
/// to at most pi), within a flip budget of 10 m^2.
pub fn triangulate(vertices: &[Point], lawson: bool) -> Result<Triangulation> {
    let n = vertices.len();
    if n < 3 || !is_simple(vertices, true) {
        return Err(Error::InvalidInput("triangulation needs a simple polygon".into()));
    }

    // Work in counterclockwise order; indices always refer to the input.
    let ccw = signed_area(vertices)? > 0.0;
    let mut active: Vec<usize> = if ccw { (0..n).collect() } else { (0..n).rev().collect() };

    let mut triangles: Vec<[usize; 3]> = Vec::with_capacity(n - 2);
    while active.len() > 3 {
        let m = active.len();
        let mut best: Option<usize> = None;
        for k in 0..m {
            let ia = active[(k + m - 1) % m];
            let ib = active[k];
            let ic = active[(k + 1) % m];
            let (a, b, c) = (vertices[ia], vertices[ib], vertices[ic]);
            if orientation(a, b, c) <= 0 {
                continue;
            }
            let blocked = active.iter().any(|&iv| {
                iv != ia && iv != ib && iv != ic && point_in_closed_triangle(a, b, c, vertices[iv])
            });
            if blocked {
                continue;
            }
            // Deterministic choice: clip the leftmost-lowest ear vertex.
            let better = match best {
                None => true,
                Some(prev) => {
                    let pb = vertices[active[prev]];
                    (b.x, b.y) < (pb.x, pb.y)
                }
            };
            if better {
                best = Some(k);
            }
        }
        let k = best.ok_or_else(|| {
            Error::ConvergenceFailure("ear clipping found no ear".into())
        })?;
        let m = active.len();
        triangles.push([active[(k + m - 1) % m], active[k], active[(k + 1) % m]]);
        active.remove(k);
    }
    triangles.push([active[0], active[1], active[2]]);

    let mut tri = Triangulation {
        n_vertices: n,
        diagonals: collect_diagonals(n, &triangles),
        triangles,
    };
    if lawson {
        lawson_flips(&mut tri, vertices)?;
    }
    Ok(tri)
}

fn collect_diagonals(n: usize, triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut diagonals = Vec::new();
    for t in triangles {
        for e in 0..3 {
            let (i, j) = (t[e], t[(e + 1) % 3]);
            let key = (i.min(j), i.max(j));
            let side = (i + 1) % n == j || (j + 1) % n == i;
            if !side && !diagonals.contains(&key) {
                diagonals.push(key);
            }
        }
    }
    diagonals.sort_unstable();
    diagonals
}

fn lawson_flips(tri: &mut Triangulation, vertices: &[Point]) -> Result<()> {
    let n = tri.n_vertices;
    let budget = 10 * n * n;
    let mut flips = 0;
    loop {
        let mut flipped = false;
        for d in 0..tri.diagonals.len() {
            let (u, v) = tri.diagonals[d];
            let adj = tri.triangles_of_diagonal((u, v));
            debug_assert_eq!(adj.len(), 2);
            let apex = |ti: usize| {
                tri.triangles[ti].iter().copied().find(|&k| k != u && k != v).unwrap()
            };
            let (c, e) = (apex(adj[0]), apex(adj[1]));
            let beta = angle_at(vertices[c], vertices[u], vertices[v]);
            let gamma = angle_at(vertices[e], vertices[u], vertices[v]);
            if beta + gamma <= std::f64::consts::PI + LAWSON_TOL {
                continue;
            }
            // Opposite angles exceed pi: the quad (u, c, v, e) is strictly
            // convex, so swapping the diagonal is geometrically valid.
            tri.triangles[adj[0]] = ccw_triangle(vertices, [u, c, e]);
            tri.triangles[adj[1]] = ccw_triangle(vertices, [v, c, e]);
            tri.diagonals[d] = (c.min(e), c.max(e));
            tri.diagonals.sort_unstable();
            flips += 1;
            flipped = true;
            if flips > budget {
                return Err(Error::ConvergenceFailure(format!(
                    "edge-flip budget of {budget} exceeded"
                )));
            }
            break;
        }
        if !flipped {
            return Ok(());
        }
    }
}

fn ccw_triangle(vertices: &[Point], t: [usize; 3]) -> [usize; 3] {
    if orientation(vertices[t[0]], vertices[t[1]], vertices[t[2]]) >= 0 {
        t
    } else {
        [t[0], t[2], t[1]]
    }
}
