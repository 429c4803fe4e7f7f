//! Scalar fields on the moduli spaces: strain energy, enclosed area, the
//! non-convexity weight, base functions on the straight and cocircular
//! strata, the smooth bump cutoff, and the four Lyapunov-Reeb composites
//! that drive the deformation flows.

mod area;
mod base;
mod strain;
mod weight;

pub use area::{area_lambda, area_theta, AreaDerivatives};
pub use base::{h_cocircular, h_straight, project_cocircular, project_straight};
pub use strain::{arm_edges, cycle_edges, strain_energy, NEAR_CONTACT};
pub use weight::nonconvexity_weight;

use crate::chart::{arm_embed, cycle_embed, ArmChart, ChartState, LinkageKind};
use crate::error::{Error, Result};
use crate::geom::{cocircular_polygon, is_simple, signed_area, Point};

/// A scalar field over one moduli space: an evaluation contract and a
/// gradient contract in the free chart coordinates of the kind.
pub trait ScalarField {
    fn kind(&self) -> LinkageKind;
    fn value(&self, state: &ChartState) -> Result<f64>;
    fn gradient(&self, state: &ChartState) -> Result<Vec<f64>>;
}

/// Parameters of the smooth bump cutoff: identically one up to `a`,
/// identically zero from `b` on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpParams {
    pub a: f64,
    pub b: f64,
}

impl BumpParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b {
            return Err(Error::InvalidParams(format!("bump needs a < b, got a={a}, b={b}")));
        }
        Ok(BumpParams { a, b })
    }

    /// Default choice for refolding two states with field values f0, f1:
    /// a = 1 + max(f0, f1) and b = a + 1.
    pub fn for_endpoints(f0: f64, f1: f64) -> Self {
        let a = 1.0 + f0.max(f1);
        BumpParams { a, b: a + 1.0 }
    }
}

/// Smooth cutoff value and derivative: 1 on (-inf, a],
/// exp((x - a)/(x - b)) on (a, b), 0 on [b, +inf).
pub fn bump_eta(params: BumpParams, x: f64) -> (f64, f64) {
    if x <= params.a {
        (1.0, 0.0)
    } else if x >= params.b {
        (0.0, 0.0)
    } else {
        let value = ((x - params.a) / (x - params.b)).exp();
        let denom = x - params.b;
        (value, value * (params.a - params.b) / (denom * denom))
    }
}

/// Non-convexity weight of a cycle state, with the gradient in the free
/// chart coordinates of the kind (theta for cycle linkages, rho then theta
/// for cycle configurations). Exactly zero, with zero gradient, on convex
/// states.
pub fn nonconvexity_w(kind: LinkageKind, state: &ChartState) -> Result<(f64, Vec<f64>)> {
    match (kind, state) {
        (LinkageKind::CycleLinkage, ChartState::Cycle(cycle)) => {
            let vertices = cycle_embed(cycle);
            let (w, vertex_grad) = nonconvexity_weight(&vertices)?;
            let (_, d_theta) = chain_vertex_gradient(
                &cycle.lengths[..cycle.m() - 1],
                &cycle.theta,
                &vertex_grad,
            );
            Ok((w, d_theta))
        }
        (LinkageKind::CycleConfig, ChartState::Arm(arm)) => {
            let vertices = arm_embed(arm);
            let (w, vertex_grad) = nonconvexity_weight(&vertices)?;
            let (mut grad, d_theta) =
                chain_vertex_gradient(&arm.rho, &arm.theta, &vertex_grad);
            grad.extend(d_theta);
            Ok((w, grad))
        }
        _ => Err(Error::InvalidInput("the weight applies to cycle states".into())),
    }
}

/// Chain a per-vertex gradient through the arm embedding Jacobian, yielding
/// derivatives in (rho, theta). Vertex v_{k+1} moves with every edge j <= k,
/// so the chain reduces to suffix sums of the vertex gradients.
pub(crate) fn chain_vertex_gradient(
    rho: &[f64],
    theta: &[f64],
    vertex_grad: &[Point],
) -> (Vec<f64>, Vec<f64>) {
    let n_edges = rho.len();
    debug_assert_eq!(vertex_grad.len(), n_edges + 1);
    let mut suffix = vec![Point::new(0.0, 0.0); n_edges + 2];
    for k in (0..=n_edges).rev() {
        suffix[k] = suffix[k + 1] + vertex_grad[k];
    }
    let mut d_rho = Vec::with_capacity(n_edges);
    let mut d_theta = Vec::with_capacity(theta.len());
    for j in 0..n_edges {
        let dir = if j == 0 {
            Point::new(1.0, 0.0)
        } else {
            Point::new(theta[j - 1].cos(), theta[j - 1].sin())
        };
        let downstream = suffix[j + 1];
        d_rho.push(downstream.dot(dir));
        if j >= 1 {
            d_theta.push(rho[j] * downstream.dot(dir.perp()));
        }
    }
    (d_rho, d_theta)
}

/// The Lyapunov-Reeb function of a moduli space kind:
///
/// - arm linkage: the strain energy as a function of theta;
/// - arm configuration: strain energy minus its value at the straight
///   configuration with the same lengths, plus the straight base function;
/// - cycle linkage: 1/area + weight * strain;
/// - cycle configuration: 1/area - 1/(area of the same-lengths inscribed
///   polygon) + weight * strain + cocircular base function of the lengths.
#[derive(Debug, Clone, Copy)]
pub struct LrFunction {
    kind: LinkageKind,
}

/// Build the Lyapunov-Reeb field for a kind; lengths are read from the
/// state (chart lengths for linkages, edge lengths for configurations).
pub fn lr_function(kind: LinkageKind) -> LrFunction {
    LrFunction { kind }
}

impl ScalarField for LrFunction {
    fn kind(&self) -> LinkageKind {
        self.kind
    }

    fn value(&self, state: &ChartState) -> Result<f64> {
        match self.kind {
            LinkageKind::ArmLinkage => {
                let arm = state.as_arm()?;
                Ok(strain_energy(&arm_embed(arm), &arm_edges(arm.m()))?.0)
            }
            LinkageKind::ArmConfig => {
                let arm = state.as_arm()?;
                let edges = arm_edges(arm.m());
                let phi = strain_energy(&arm_embed(arm), &edges)?.0;
                let straight = project_straight(arm);
                let phi_straight = strain_energy(&arm_embed(&straight), &edges)?.0;
                let (h, _) = h_straight(&arm.rho)?;
                Ok(phi - phi_straight + h)
            }
            LinkageKind::CycleLinkage => {
                let cycle = state.as_cycle()?;
                let vertices = cycle_embed(cycle);
                let terms = CycleTerms::evaluate(&vertices)?;
                Ok(1.0 / terms.area + terms.weight * terms.strain)
            }
            LinkageKind::CycleConfig => {
                let arm = state.as_arm()?;
                let vertices = arm_embed(arm);
                let terms = CycleTerms::evaluate(&vertices)?;
                let lengths = closed_lengths(arm, &vertices);
                let (g, _) = cocircular_terms(&lengths)?;
                Ok(1.0 / terms.area + terms.weight * terms.strain + g)
            }
        }
    }

    fn gradient(&self, state: &ChartState) -> Result<Vec<f64>> {
        match self.kind {
            LinkageKind::ArmLinkage => {
                let arm = state.as_arm()?;
                let (_, vertex_grad) = strain_energy(&arm_embed(arm), &arm_edges(arm.m()))?;
                let (_, d_theta) = chain_vertex_gradient(&arm.rho, &arm.theta, &vertex_grad);
                Ok(d_theta)
            }
            LinkageKind::ArmConfig => {
                let arm = state.as_arm()?;
                let edges = arm_edges(arm.m());
                let (_, vertex_grad) = strain_energy(&arm_embed(arm), &edges)?;
                let (d_rho, d_theta) = chain_vertex_gradient(&arm.rho, &arm.theta, &vertex_grad);

                let straight = project_straight(arm);
                let (_, vg_straight) = strain_energy(&arm_embed(&straight), &edges)?;
                let (d_rho_straight, _) =
                    chain_vertex_gradient(&straight.rho, &straight.theta, &vg_straight);
                let (_, dh) = h_straight(&arm.rho)?;

                let mut grad = Vec::with_capacity(2 * arm.m() - 3);
                for i in 0..arm.rho.len() {
                    grad.push(d_rho[i] - d_rho_straight[i] + dh[i]);
                }
                grad.extend(d_theta);
                Ok(grad)
            }
            LinkageKind::CycleLinkage => {
                let cycle = state.as_cycle()?;
                let vertices = cycle_embed(cycle);
                let terms = CycleTerms::evaluate(&vertices)?;
                let vertex_grad = terms.combined_vertex_gradient(&vertices);
                let (_, d_theta) = chain_vertex_gradient(
                    &cycle.lengths[..cycle.m() - 1],
                    &cycle.theta,
                    &vertex_grad,
                );
                Ok(d_theta)
            }
            LinkageKind::CycleConfig => {
                let arm = state.as_arm()?;
                let vertices = arm_embed(arm);
                let terms = CycleTerms::evaluate(&vertices)?;
                let lengths = closed_lengths(arm, &vertices);
                let (_, dg) = cocircular_terms(&lengths)?;

                let mut vertex_grad = terms.combined_vertex_gradient(&vertices);
                // The closing length depends on the last vertex only.
                let last = vertices[vertices.len() - 1];
                let closing = lengths[lengths.len() - 1];
                let dg_closing = dg[lengths.len() - 1];
                vertex_grad[vertices.len() - 1] =
                    vertex_grad[vertices.len() - 1] + last * (dg_closing / closing);

                let (mut d_rho, d_theta) =
                    chain_vertex_gradient(&arm.rho, &arm.theta, &vertex_grad);
                for i in 0..arm.rho.len() {
                    d_rho[i] += dg[i];
                }
                let mut grad = d_rho;
                grad.extend(d_theta);
                Ok(grad)
            }
        }
    }
}

/// Shared pieces of the cycle-kind fields at one embedded polygon.
struct CycleTerms {
    area: f64,
    weight: f64,
    strain: f64,
    d_area: Vec<Point>,
    d_weight: Vec<Point>,
    d_strain: Vec<Point>,
}

impl CycleTerms {
    fn evaluate(vertices: &[Point]) -> Result<Self> {
        if !is_simple(vertices, true) {
            return Err(Error::InvalidInput("cycle state is not simple".into()));
        }
        let area = signed_area(vertices)?;
        if area <= 0.0 {
            return Err(Error::InvalidInput("cycle state is negatively oriented".into()));
        }
        let d_area = area::area_vertex_gradient(vertices);
        let (weight, d_weight) = nonconvexity_weight(vertices)?;
        let (strain, d_strain) = strain_energy(vertices, &cycle_edges(vertices.len()))?;
        Ok(CycleTerms { area, weight, strain, d_area, d_weight, d_strain })
    }

    /// Per-vertex gradient of 1/area + weight * strain.
    fn combined_vertex_gradient(&self, vertices: &[Point]) -> Vec<Point> {
        let inv_a2 = 1.0 / (self.area * self.area);
        (0..vertices.len())
            .map(|i| {
                self.d_area[i] * (-inv_a2)
                    + self.d_weight[i] * self.strain
                    + self.d_strain[i] * self.weight
            })
            .collect()
    }
}

fn closed_lengths(arm: &ArmChart, vertices: &[Point]) -> Vec<f64> {
    let mut lengths = arm.rho.clone();
    lengths.push(vertices[vertices.len() - 1].norm());
    lengths
}

/// Value and length-gradient of h(tau(p)) - 1/A(tau(p)), both explicit
/// functions of the m side lengths: the base function directly, and the
/// inscribed-polygon area through the envelope identity (the area is
/// critical in the diagonals at the cocircular point, so only the explicit
/// length dependence survives).
fn cocircular_terms(lengths: &[f64]) -> Result<(f64, Vec<f64>)> {
    let (h, dh) = h_cocircular(lengths)?;
    let sol = cocircular_polygon(lengths)?;
    let area = sol.area();
    let d_area = sol.area_length_gradient(lengths);
    let inv_a2 = 1.0 / (area * area);
    let value = h - 1.0 / area;
    let grad = dh
        .iter()
        .zip(&d_area)
        .map(|(dh_i, da_i)| dh_i + da_i * inv_a2)
        .collect();
    Ok((value, grad))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{cycle_extract, CycleChart};
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn bump_boundary_values() {
        let params = BumpParams::new(2.0, 5.0).unwrap();
        assert_eq!(bump_eta(params, 2.0), (1.0, 0.0));
        assert_eq!(bump_eta(params, 5.0), (0.0, 0.0));
        assert_eq!(bump_eta(params, -10.0), (1.0, 0.0));
        assert_eq!(bump_eta(params, 10.0), (0.0, 0.0));
    }

    #[test]
    fn bump_midpoint_is_inverse_e() {
        let params = BumpParams::new(1.0, 3.0).unwrap();
        let (v, _) = bump_eta(params, 2.0);
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn bump_strictly_decreasing_inside() {
        let params = BumpParams::new(0.0, 1.0).unwrap();
        let mut last = 1.0;
        for k in 1..100 {
            let x = k as f64 / 100.0;
            let (v, dv) = bump_eta(params, x);
            assert!(v > 0.0 && v < 1.0);
            assert!(dv < 0.0);
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn bump_derivative_matches_finite_differences() {
        let params = BumpParams::new(-0.5, 2.0).unwrap();
        let h = 1e-7;
        for &x in &[0.0, 0.5, 1.0, 1.7] {
            let (_, dv) = bump_eta(params, x);
            let est = (bump_eta(params, x + h).0 - bump_eta(params, x - h).0) / (2.0 * h);
            assert!((dv - est).abs() < 1e-6, "x = {x}");
        }
    }

    #[test]
    fn bump_rejects_bad_params() {
        assert!(BumpParams::new(1.0, 1.0).is_err());
        assert!(BumpParams::new(2.0, 1.0).is_err());
    }

    #[test]
    fn arm_linkage_gradient_vanishes_only_at_straight() {
        let field = lr_function(LinkageKind::ArmLinkage);
        let straight =
            ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], vec![0.0, 0.0]).unwrap());
        let grad = field.gradient(&straight).unwrap();
        assert!(grad.iter().all(|g| g.abs() < 1e-12), "straight arm is critical");

        for theta in [[0.4, 0.0], [0.0, -0.8], [1.0, 1.2], [-0.3, 0.7]] {
            let bent =
                ChartState::Arm(ArmChart::new(vec![1.0, 1.0, 1.0], theta.to_vec()).unwrap());
            let grad = field.gradient(&bent).unwrap();
            assert!(grad.iter().any(|g| g.abs() > 1e-6), "{theta:?}");
        }
    }

    #[test]
    fn cycle_linkage_value_is_inverse_area_on_convex_states() {
        let square = CycleChart::new(vec![1.0; 4], vec![FRAC_PI_2, PI]).unwrap();
        let field = lr_function(LinkageKind::CycleLinkage);
        let f = field.value(&ChartState::Cycle(square)).unwrap();
        assert_eq!(f, 1.0, "w = 0 on a convex state, so f = 1/A exactly");
    }

    #[test]
    fn chart_level_weight_matches_finite_differences() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(2.4, 0.0),
            Point::new(2.6, 1.3),
            Point::new(1.2, 0.5),
            Point::new(-0.3, 1.4),
        ];
        let cycle = cycle_extract(&pts).unwrap();
        let state = ChartState::Cycle(cycle.clone());
        let (w, grad) = nonconvexity_w(LinkageKind::CycleLinkage, &state).unwrap();
        assert!(w > 0.0 && w < 1.0, "one reflex vertex gives weight in (0, 1)");
        let h = 1e-6;
        for i in 0..cycle.theta.len() {
            let mut up = cycle.theta.clone();
            let mut dn = cycle.theta.clone();
            up[i] += h;
            dn[i] -= h;
            let wu = nonconvexity_w(
                LinkageKind::CycleLinkage,
                &ChartState::Cycle(CycleChart::new(cycle.lengths.clone(), up).unwrap()),
            )
            .unwrap()
            .0;
            let wd = nonconvexity_w(
                LinkageKind::CycleLinkage,
                &ChartState::Cycle(CycleChart::new(cycle.lengths.clone(), dn).unwrap()),
            )
            .unwrap()
            .0;
            let est = (wu - wd) / (2.0 * h);
            assert!((grad[i] - est).abs() <= 1e-5 * est.abs().max(1e-2), "theta {i}");
        }

        // Convex state: identically zero with a zero gradient.
        let square = CycleChart::new(vec![1.0; 4], vec![FRAC_PI_2, PI]).unwrap();
        let (w, grad) = nonconvexity_w(LinkageKind::CycleLinkage, &ChartState::Cycle(square)).unwrap();
        assert_eq!(w, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn cycle_linkage_blows_up_toward_self_contact() {
        // An M-shaped pentagon whose middle vertex descends onto the base
        // edge: f grows without bound along the sequence, and at every
        // state f stays above the inverse area of the same-lengths
        // inscribed polygon.
        let field = lr_function(LinkageKind::CycleLinkage);
        let mut last_f = 0.0;
        for k in 0..12 {
            let eps = 0.4 * 0.5f64.powi(k);
            let pts = [
                Point::new(0.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(2.0, 1.0),
                Point::new(1.0, eps),
                Point::new(0.0, 1.0),
            ];
            let chart = cycle_extract(&pts).unwrap();
            let state = ChartState::Cycle(chart.clone());
            let f = field.value(&state).unwrap();
            assert!(f > last_f, "f must rise toward contact: {f} after {last_f}");
            let sol = crate::geom::cocircular_polygon(&chart.lengths).unwrap();
            assert!(f >= 1.0 / sol.area() - 1e-12, "f below 1/A(tau) at eps = {eps}");
            last_f = f;
        }
        assert!(last_f > 1e4, "strain term must dominate near contact, got {last_f}");
    }

    #[test]
    fn arm_config_value_reduces_to_base_at_straight() {
        let straight = ArmChart::new(vec![2.0, 0.5], vec![0.0]).unwrap();
        let field = lr_function(LinkageKind::ArmConfig);
        let f = field.value(&ChartState::Arm(straight.clone())).unwrap();
        let (h, _) = h_straight(&straight.rho).unwrap();
        assert!((f - h).abs() < 1e-14);
    }

    #[test]
    fn arm_config_dominates_base_function() {
        // Strain of an arm is at least the strain of its straight
        // projection, so f >= h everywhere.
        let field = lr_function(LinkageKind::ArmConfig);
        for theta in [[0.7, -0.4], [1.2, 0.9], [-2.0, 0.3]] {
            let arm = ArmChart::new(vec![1.0, 1.4, 0.8], theta.to_vec()).unwrap();
            let (h, _) = h_straight(&arm.rho).unwrap();
            let f = field.value(&ChartState::Arm(arm)).unwrap();
            assert!(f >= h - 1e-12, "theta {theta:?}: {f} < {h}");
        }
    }

    #[test]
    fn arm_config_gradient_matches_finite_differences() {
        let arm = ArmChart::new(vec![1.0, 1.4, 0.8], vec![0.7, -0.5]).unwrap();
        let state = ChartState::Arm(arm);
        let field = lr_function(LinkageKind::ArmConfig);
        let grad = field.gradient(&state).unwrap();
        let coords = crate::chart::free_coords(LinkageKind::ArmConfig, &state).unwrap();
        let h = 1e-6;
        for i in 0..coords.len() {
            let mut up = coords.clone();
            let mut dn = coords.clone();
            up[i] += h;
            dn[i] -= h;
            let s_up = crate::chart::with_free_coords(LinkageKind::ArmConfig, &state, &up).unwrap();
            let s_dn = crate::chart::with_free_coords(LinkageKind::ArmConfig, &state, &dn).unwrap();
            let est = (field.value(&s_up).unwrap() - field.value(&s_dn).unwrap()) / (2.0 * h);
            assert!(
                (grad[i] - est).abs() <= 1e-5 * est.abs().max(1.0),
                "coord {i}: {} vs {est}",
                grad[i]
            );
        }
    }

    #[test]
    fn cycle_config_gradient_matches_finite_differences() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.1, 0.1),
            Point::new(1.5, 1.2),
            Point::new(0.6, 0.9),
            Point::new(-0.3, 1.0),
        ];
        let arm = crate::chart::arm_extract(&pts).unwrap();
        let state = ChartState::Arm(arm);
        let field = lr_function(LinkageKind::CycleConfig);
        let grad = field.gradient(&state).unwrap();
        let coords = crate::chart::free_coords(LinkageKind::CycleConfig, &state).unwrap();
        let h = 1e-6;
        for i in 0..coords.len() {
            let mut up = coords.clone();
            let mut dn = coords.clone();
            up[i] += h;
            dn[i] -= h;
            let s_up =
                crate::chart::with_free_coords(LinkageKind::CycleConfig, &state, &up).unwrap();
            let s_dn =
                crate::chart::with_free_coords(LinkageKind::CycleConfig, &state, &dn).unwrap();
            let est = (field.value(&s_up).unwrap() - field.value(&s_dn).unwrap()) / (2.0 * h);
            assert!(
                (grad[i] - est).abs() <= 1e-5 * est.abs().max(1.0),
                "coord {i}: {} vs {est}",
                grad[i]
            );
        }
    }

    #[test]
    fn cycle_linkage_gradient_matches_finite_differences() {
        // The ambient theta-gradient: off the constraint set the value is
        // still defined (lengths stay fixed, the chain is read as a closed
        // polygon), which is what the finite differences probe.
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(1.2, 0.0),
            Point::new(1.7, 1.0),
            Point::new(0.8, 0.8),
            Point::new(-0.2, 1.1),
        ];
        let cycle = cycle_extract(&pts).unwrap();
        let state = ChartState::Cycle(cycle.clone());
        let field = lr_function(LinkageKind::CycleLinkage);
        let grad = field.gradient(&state).unwrap();
        let h = 1e-6;
        for i in 0..cycle.theta.len() {
            let mut up = cycle.theta.clone();
            let mut dn = cycle.theta.clone();
            up[i] += h;
            dn[i] -= h;
            let s_up = ChartState::Cycle(CycleChart::new(cycle.lengths.clone(), up).unwrap());
            let s_dn = ChartState::Cycle(CycleChart::new(cycle.lengths.clone(), dn).unwrap());
            let est = (field.value(&s_up).unwrap() - field.value(&s_dn).unwrap()) / (2.0 * h);
            assert!(
                (grad[i] - est).abs() <= 1e-5 * est.abs().max(1.0),
                "theta {i}: {} vs {est}",
                grad[i]
            );
        }
    }
}
