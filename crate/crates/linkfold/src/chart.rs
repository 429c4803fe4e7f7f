//! Coordinate charts for the four moduli spaces of self-avoiding linkages:
//! open arms and closed cycles, each with fixed or free edge lengths.
//!
//! An arm with m vertices is parameterized up to orientation-preserving
//! isometry by edge lengths rho_1..rho_{m-1} and direction angles
//! theta_2..theta_{m-1}: the first vertex sits at the origin and the first
//! edge runs along the positive x-axis. A cycle with fixed lengths keeps
//! the angles as free coordinates subject to the closure constraint u = 0;
//! a cycle with free lengths is represented by the arm chart of its first
//! m-1 edges, the closing edge being derived.

use crate::error::{Error, Result};
use crate::geom::{self, Point};
use crate::numeric::{angle_diff, wrap_angle};

/// On-manifold tolerance for the closure constraint, in units of the
/// closing length.
pub const CONSTRAINT_TOL: f64 = 1e-9;

/// The four moduli spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkageKind {
    /// Open arm with fixed edge lengths; free coordinates theta.
    ArmLinkage,
    /// Open arm with free edge lengths; free coordinates (rho, theta).
    ArmConfig,
    /// Positively oriented cycle with fixed lengths; free coordinates theta
    /// on the closure constraint manifold.
    CycleLinkage,
    /// Positively oriented cycle with free lengths, in arm-chart
    /// coordinates with the closing edge derived.
    CycleConfig,
}

impl LinkageKind {
    pub fn is_cycle(self) -> bool {
        matches!(self, LinkageKind::CycleLinkage | LinkageKind::CycleConfig)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LinkageKind::ArmLinkage => "arm_linkage",
            LinkageKind::ArmConfig => "arm_config",
            LinkageKind::CycleLinkage => "cycle_linkage",
            LinkageKind::CycleConfig => "cycle_config",
        }
    }
}

/// Arm chart: lengths rho_1..rho_{m-1} and wrapped angles theta_2..theta_{m-1}.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmChart {
    pub rho: Vec<f64>,
    pub theta: Vec<f64>,
}

impl ArmChart {
    pub fn new(rho: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if rho.is_empty() || theta.len() + 1 != rho.len() {
            return Err(Error::InvalidInput(format!(
                "arm chart needs m-1 lengths and m-2 angles, got {} and {}",
                rho.len(),
                theta.len()
            )));
        }
        if rho.iter().any(|&r| !r.is_finite() || r <= 0.0) {
            return Err(Error::InvalidInput("arm lengths must be positive".into()));
        }
        let theta = theta.into_iter().map(wrap_angle).collect();
        Ok(ArmChart { rho, theta })
    }

    /// Number of vertices.
    pub fn m(&self) -> usize {
        self.rho.len() + 1
    }
}

/// Cycle chart: fixed lengths l_1..l_m and wrapped angles theta_2..theta_{m-1}
/// subject to the closure constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleChart {
    pub lengths: Vec<f64>,
    pub theta: Vec<f64>,
}

impl CycleChart {
    pub fn new(lengths: Vec<f64>, theta: Vec<f64>) -> Result<Self> {
        if lengths.len() < 3 || theta.len() + 2 != lengths.len() {
            return Err(Error::InvalidInput(format!(
                "cycle chart needs m >= 3 lengths and m-2 angles, got {} and {}",
                lengths.len(),
                theta.len()
            )));
        }
        if lengths.iter().any(|&l| !l.is_finite() || l <= 0.0) {
            return Err(Error::InvalidInput("cycle lengths must be positive".into()));
        }
        let theta = theta.into_iter().map(wrap_angle).collect();
        Ok(CycleChart { lengths, theta })
    }

    pub fn m(&self) -> usize {
        self.lengths.len()
    }
}

/// A chart state for any of the four kinds.
#[derive(Debug, Clone, PartialEq)]
pub enum ChartState {
    Arm(ArmChart),
    Cycle(CycleChart),
}

impl ChartState {
    pub fn as_arm(&self) -> Result<&ArmChart> {
        match self {
            ChartState::Arm(a) => Ok(a),
            ChartState::Cycle(_) => Err(Error::InvalidInput("expected an arm chart".into())),
        }
    }

    pub fn as_cycle(&self) -> Result<&CycleChart> {
        match self {
            ChartState::Cycle(c) => Ok(c),
            ChartState::Arm(_) => Err(Error::InvalidInput("expected a cycle chart".into())),
        }
    }

    pub fn m(&self) -> usize {
        match self {
            ChartState::Arm(a) => a.m(),
            ChartState::Cycle(c) => c.m(),
        }
    }
}

/// Vertex positions of an arm chart: v_1 = (0,0), v_2 = (rho_1, 0),
/// v_{k+1} = v_k + rho_k (cos theta_k, sin theta_k).
pub fn arm_embed(chart: &ArmChart) -> Vec<Point> {
    let m = chart.m();
    let mut vertices = Vec::with_capacity(m);
    vertices.push(Point::new(0.0, 0.0));
    vertices.push(Point::new(chart.rho[0], 0.0));
    for k in 2..m {
        let prev = vertices[k - 1];
        let angle = chart.theta[k - 2];
        let step = Point::new(angle.cos(), angle.sin()) * chart.rho[k - 1];
        vertices.push(prev + step);
    }
    vertices
}

/// Recover the arm chart from vertex positions, normalizing away the
/// orientation-preserving isometry that maps v_1 to the origin and v_2 onto
/// the positive x-axis.
pub fn arm_extract(vertices: &[Point]) -> Result<ArmChart> {
    if vertices.len() < 2 {
        return Err(Error::InvalidInput("an arm needs at least 2 vertices".into()));
    }
    let mut rho = Vec::with_capacity(vertices.len() - 1);
    let mut phi = Vec::with_capacity(vertices.len() - 1);
    for w in vertices.windows(2) {
        let e = w[1] - w[0];
        let len = e.norm();
        if len == 0.0 {
            return Err(Error::InvalidInput("repeated consecutive points".into()));
        }
        rho.push(len);
        phi.push(e.y.atan2(e.x));
    }
    let base = phi[0];
    let theta = phi[1..].iter().map(|&p| angle_diff(p, base)).collect();
    ArmChart::new(rho, theta)
}

/// Vertex positions of a cycle chart (the closing edge v_m -> v_1 is
/// implied, with length l_m once the constraint holds).
pub fn cycle_embed(chart: &CycleChart) -> Vec<Point> {
    let arm = ArmChart {
        rho: chart.lengths[..chart.m() - 1].to_vec(),
        theta: chart.theta.clone(),
    };
    arm_embed(&arm)
}

/// Build a cycle chart from polygon vertices; the stored lengths are the m
/// side lengths including the closing side, so the constraint residual of
/// the result is zero up to rounding.
pub fn cycle_extract(vertices: &[Point]) -> Result<CycleChart> {
    if vertices.len() < 3 {
        return Err(Error::InvalidInput("a cycle needs at least 3 vertices".into()));
    }
    let arm = arm_extract(vertices)?;
    let closing = vertices[vertices.len() - 1].dist(vertices[0]);
    if closing == 0.0 {
        return Err(Error::InvalidInput("repeated consecutive points".into()));
    }
    let mut lengths = arm.rho;
    lengths.push(closing);
    CycleChart::new(lengths, arm.theta)
}

/// The closure constraint u(theta) = |v_m - v_1| - l_m and its gradient with
/// respect to theta_2..theta_{m-1}.
pub fn cycle_constraint(theta: &[f64], lengths: &[f64]) -> Result<(f64, Vec<f64>)> {
    let m = lengths.len();
    if m < 3 || theta.len() + 2 != m {
        return Err(Error::InvalidInput(format!(
            "constraint needs m >= 3 lengths and m-2 angles, got {} and {}",
            m,
            theta.len()
        )));
    }
    let mut x = lengths[0];
    let mut y = 0.0;
    for (j, &t) in theta.iter().enumerate() {
        x += lengths[j + 1] * t.cos();
        y += lengths[j + 1] * t.sin();
    }
    let r = x.hypot(y);
    if r == 0.0 {
        return Err(Error::SingularConstraint);
    }
    let grad = theta
        .iter()
        .enumerate()
        .map(|(j, &t)| lengths[j + 1] * (-x * t.sin() + y * t.cos()) / r)
        .collect();
    Ok((r - lengths[m - 1], grad))
}

/// Derived closing length |v_m - v_1| of an arm chart read as a cycle.
pub fn closing_length(chart: &ArmChart) -> f64 {
    let vertices = arm_embed(chart);
    vertices[vertices.len() - 1].norm()
}

/// Embedded vertex positions for a state of the given kind. Cycle kinds
/// return the m polygon vertices (the closing edge is implied).
pub fn embedded_vertices(kind: LinkageKind, state: &ChartState) -> Result<Vec<Point>> {
    match (kind, state) {
        (LinkageKind::ArmLinkage | LinkageKind::ArmConfig | LinkageKind::CycleConfig, ChartState::Arm(a)) => {
            Ok(arm_embed(a))
        }
        (LinkageKind::CycleLinkage, ChartState::Cycle(c)) => Ok(cycle_embed(c)),
        _ => Err(Error::InvalidInput(format!(
            "state shape does not match kind {}",
            kind.as_str()
        ))),
    }
}

/// Validity report for a chart state.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidityReport {
    pub kind: LinkageKind,
    /// State shape matches the kind and all entries are finite.
    pub well_formed: bool,
    pub lengths_positive: bool,
    pub simple: bool,
    /// Cycles only: positive shoelace orientation.
    pub positively_oriented: Option<bool>,
    /// Cycle linkages only: |u| at the state.
    pub constraint_residual: Option<f64>,
    /// Cycles only: condition (c1) on the m side lengths.
    pub c1_satisfied: Option<bool>,
    // Closing-length scale normalizing the constraint residual.
    closing_scale: f64,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.well_formed
            && self.lengths_positive
            && self.simple
            && self.positively_oriented.unwrap_or(true)
            && self.c1_satisfied.unwrap_or(true)
            && match self.constraint_residual {
                None => true,
                Some(res) => res < CONSTRAINT_TOL * self.closing_scale,
            }
    }

    fn invalid(kind: LinkageKind) -> Self {
        ValidityReport {
            kind,
            well_formed: false,
            lengths_positive: false,
            simple: false,
            positively_oriented: None,
            constraint_residual: None,
            c1_satisfied: None,
            closing_scale: 1.0,
        }
    }
}

/// Check a state against the requirements of its moduli space: simplicity
/// always; positive orientation and condition (c1) for cycles; the closure
/// constraint residual for cycle linkages. Report-valued, never errors.
pub fn validate(kind: LinkageKind, state: &ChartState) -> ValidityReport {
    match (kind, state) {
        (LinkageKind::ArmLinkage | LinkageKind::ArmConfig, ChartState::Arm(arm)) => {
            let lengths_positive = arm.rho.iter().all(|&r| r > 0.0 && r.is_finite())
                && arm.theta.iter().all(|t| t.is_finite());
            let simple = lengths_positive && geom::is_simple(&arm_embed(arm), false);
            ValidityReport {
                kind,
                well_formed: true,
                lengths_positive,
                simple,
                positively_oriented: None,
                constraint_residual: None,
                c1_satisfied: None,
                closing_scale: 1.0,
            }
        }
        (LinkageKind::CycleLinkage, ChartState::Cycle(cycle)) => {
            let lengths_positive = cycle.lengths.iter().all(|&l| l > 0.0 && l.is_finite())
                && cycle.theta.iter().all(|t| t.is_finite());
            if !lengths_positive {
                return ValidityReport { lengths_positive, ..ValidityReport::invalid(kind) };
            }
            let vertices = cycle_embed(cycle);
            let simple = geom::is_simple(&vertices, true);
            let oriented = geom::signed_area(&vertices).map(|a| a > 0.0).unwrap_or(false);
            let residual = cycle_constraint(&cycle.theta, &cycle.lengths)
                .map(|(u, _)| u.abs())
                .unwrap_or(f64::INFINITY);
            ValidityReport {
                kind,
                well_formed: true,
                lengths_positive,
                simple,
                positively_oriented: Some(oriented),
                constraint_residual: Some(residual),
                c1_satisfied: Some(geom::satisfies_c1(&cycle.lengths)),
                closing_scale: cycle.lengths[cycle.m() - 1],
            }
        }
        (LinkageKind::CycleConfig, ChartState::Arm(arm)) => {
            let lengths_positive = arm.rho.iter().all(|&r| r > 0.0 && r.is_finite())
                && arm.theta.iter().all(|t| t.is_finite());
            if !lengths_positive || arm.m() < 3 {
                return ValidityReport { lengths_positive, ..ValidityReport::invalid(kind) };
            }
            let vertices = arm_embed(arm);
            let simple = geom::is_simple(&vertices, true);
            let oriented = geom::signed_area(&vertices).map(|a| a > 0.0).unwrap_or(false);
            let mut lengths = arm.rho.clone();
            lengths.push(closing_length(arm));
            ValidityReport {
                kind,
                well_formed: true,
                lengths_positive,
                simple,
                positively_oriented: Some(oriented),
                constraint_residual: None,
                c1_satisfied: Some(geom::satisfies_c1(&lengths)),
                closing_scale: 1.0,
            }
        }
        _ => ValidityReport::invalid(kind),
    }
}

/// Number of free coordinates of a kind for an m-vertex state.
pub fn dim(kind: LinkageKind, m: usize) -> usize {
    match kind {
        LinkageKind::ArmLinkage | LinkageKind::CycleLinkage => m - 2,
        LinkageKind::ArmConfig | LinkageKind::CycleConfig => 2 * m - 3,
    }
}

/// The free coordinates of a state: theta for linkage kinds, rho followed
/// by theta for configuration kinds.
pub fn free_coords(kind: LinkageKind, state: &ChartState) -> Result<Vec<f64>> {
    match (kind, state) {
        (LinkageKind::ArmLinkage, ChartState::Arm(a)) => Ok(a.theta.clone()),
        (LinkageKind::CycleLinkage, ChartState::Cycle(c)) => Ok(c.theta.clone()),
        (LinkageKind::ArmConfig | LinkageKind::CycleConfig, ChartState::Arm(a)) => {
            let mut coords = a.rho.clone();
            coords.extend_from_slice(&a.theta);
            Ok(coords)
        }
        _ => Err(Error::InvalidInput(format!(
            "state shape does not match kind {}",
            kind.as_str()
        ))),
    }
}

/// Rebuild a state from free coordinates, keeping the template's fixed data
/// (lengths for linkage kinds). Angles are re-wrapped.
pub fn with_free_coords(
    kind: LinkageKind,
    template: &ChartState,
    coords: &[f64],
) -> Result<ChartState> {
    if coords.len() != dim(kind, template.m()) {
        return Err(Error::InvalidInput(format!(
            "expected {} coordinates, got {}",
            dim(kind, template.m()),
            coords.len()
        )));
    }
    match (kind, template) {
        (LinkageKind::ArmLinkage, ChartState::Arm(a)) => Ok(ChartState::Arm(ArmChart {
            rho: a.rho.clone(),
            theta: coords.iter().copied().map(wrap_angle).collect(),
        })),
        (LinkageKind::CycleLinkage, ChartState::Cycle(c)) => Ok(ChartState::Cycle(CycleChart {
            lengths: c.lengths.clone(),
            theta: coords.iter().copied().map(wrap_angle).collect(),
        })),
        (LinkageKind::ArmConfig | LinkageKind::CycleConfig, ChartState::Arm(a)) => {
            let n_rho = a.rho.len();
            Ok(ChartState::Arm(ArmChart {
                rho: coords[..n_rho].to_vec(),
                theta: coords[n_rho..].iter().copied().map(wrap_angle).collect(),
            }))
        }
        _ => Err(Error::InvalidInput(format!(
            "state shape does not match kind {}",
            kind.as_str()
        ))),
    }
}

/// Distance in the flat chart metric: Euclidean over rho, shortest-arc over
/// each wrapped theta coordinate.
pub fn chart_distance(kind: LinkageKind, a: &ChartState, b: &ChartState) -> Result<f64> {
    let (rho_a, theta_a) = split(kind, a)?;
    let (rho_b, theta_b) = split(kind, b)?;
    if rho_a.len() != rho_b.len() || theta_a.len() != theta_b.len() {
        return Err(Error::InvalidInput("chart dimension mismatch".into()));
    }
    let mut sq = 0.0;
    for (x, y) in rho_a.iter().zip(rho_b) {
        sq += (x - y) * (x - y);
    }
    for (x, y) in theta_a.iter().zip(theta_b) {
        let d = angle_diff(*x, *y);
        sq += d * d;
    }
    Ok(sq.sqrt())
}

fn split(kind: LinkageKind, state: &ChartState) -> Result<(&[f64], &[f64])> {
    match (kind, state) {
        (LinkageKind::ArmLinkage, ChartState::Arm(a)) => Ok((&[], &a.theta)),
        (LinkageKind::CycleLinkage, ChartState::Cycle(c)) => Ok((&[], &c.theta)),
        (LinkageKind::ArmConfig | LinkageKind::CycleConfig, ChartState::Arm(a)) => {
            Ok((&a.rho, &a.theta))
        }
        _ => Err(Error::InvalidInput(format!(
            "state shape does not match kind {}",
            kind.as_str()
        ))),
    }
}
