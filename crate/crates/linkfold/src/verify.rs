//! Runtime property suite: seeded re-checks of the library's analytic
//! claims (derivative formulas against finite differences, solver
//! residuals, projection and monotonicity properties, small flow runs).
//! Deterministic for a fixed seed.

use crate::chart::{
    cycle_constraint, cycle_embed, validate, ChartState, LinkageKind,
};
use crate::energy::{
    area_lambda, bump_eta, lr_function, nonconvexity_weight, project_cocircular, BumpParams,
    ScalarField,
};
use crate::error::Result;
use crate::flow::{bump_flow, gradient_flow, projected_flow, FlowOptions, Termination};
use crate::geom::{
    cocircular_polygon, concyclicity_residual, heron_area, interior_angles, signed_area,
    triangle_area_partials, triangulate, Point,
};
use crate::numeric::norm_inf;
use crate::sample::{
    random_arm, random_c1_lengths, random_cycle_linkage, random_star_polygon,
    random_triangle_sides, Rng,
};

/// Outcome of one property check.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
    /// Worst observed figure of merit (check-specific, smaller is better).
    pub worst: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Results of the whole suite.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckResult::passed)
    }

    pub fn total_cases(&self) -> usize {
        self.checks.iter().map(|c| c.cases).sum()
    }

    pub fn total_failures(&self) -> usize {
        self.checks.iter().map(|c| c.failures).sum()
    }
}

/// Central finite difference with the step chosen by self-consistency:
/// for each candidate step the estimate is compared against the
/// half-step estimate, and the most stable pair wins. Returns None when
/// any probe leaves the function's domain.
fn central_diff(f: &dyn Fn(&[f64]) -> Option<f64>, x: &[f64], i: usize) -> Option<f64> {
    let mut best: Option<(f64, f64)> = None;
    for h in [1e-4, 1e-5, 1e-6] {
        let probe = |step: f64| -> Option<f64> {
            let mut up = x.to_vec();
            let mut dn = x.to_vec();
            up[i] += step;
            dn[i] -= step;
            Some((f(&up)? - f(&dn)?) / (2.0 * step))
        };
        let d1 = probe(h)?;
        let d2 = probe(0.5 * h)?;
        let spread = (d1 - d2).abs();
        if best.map_or(true, |(s, _)| spread < s) {
            best = Some((spread, d2));
        }
    }
    best.map(|(_, d)| d)
}

/// Run the full property suite with the given seed.
pub fn run_suite(seed: u64) -> Result<VerifyReport> {
    let checks = vec![
        triangle_calculus(Rng::new(seed ^ 0x01))?,
        diagonal_derivatives(Rng::new(seed ^ 0x02))?,
        inscribed_solver(Rng::new(seed ^ 0x03))?,
        projection_max_area(Rng::new(seed ^ 0x04))?,
        constraint_gradient(Rng::new(seed ^ 0x05))?,
        field_gradients(Rng::new(seed ^ 0x06))?,
        angle_identity(Rng::new(seed ^ 0x07))?,
        triangulation_shape(Rng::new(seed ^ 0x08))?,
        weight_convexity(Rng::new(seed ^ 0x09))?,
        bump_inverse(Rng::new(seed ^ 0x0a))?,
        straighten_runs(Rng::new(seed ^ 0x0b))?,
        convexify_runs(Rng::new(seed ^ 0x0c))?,
    ];
    Ok(VerifyReport { seed, checks })
}

fn triangle_calculus(mut rng: Rng) -> Result<CheckResult> {
    let cases = 300;
    let mut failures = 0;
    let mut worst = 0.0f64;
    let h = 1e-5;
    for _ in 0..cases {
        let (a, b, c) = random_triangle_sides(&mut rng);
        let p = triangle_area_partials(a, b, c)?;
        let area = |a: f64, b: f64| heron_area(a, b, c).unwrap();
        let fd_da = (area(a + h, b) - area(a - h, b)) / (2.0 * h);
        let fd_daa = (area(a + h, b) - 2.0 * area(a, b) + area(a - h, b)) / (h * h);
        let fd_dab =
            (area(a + h, b + h) - area(a + h, b - h) - area(a - h, b + h) + area(a - h, b - h))
                / (4.0 * h * h);
        let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(1.0);
        let err = rel(p.da, fd_da).max(rel(p.daa, fd_daa)).max(rel(p.dab, fd_dab));
        worst = worst.max(err);
        if err > 1e-4 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "triangle_area_partials_vs_fd", cases, failures, worst })
}

fn diagonal_derivatives(mut rng: Rng) -> Result<CheckResult> {
    let cases = 40;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let m = 4 + rng.range(4);
        let sol = cocircular_polygon(&random_c1_lengths(&mut rng, m))?;
        let pts = sol.vertices;
        let tri = triangulate(&pts, false)?;
        let lengths: Vec<f64> = (0..m).map(|i| pts[i].dist(pts[(i + 1) % m])).collect();
        let lambdas: Vec<f64> = tri.diagonals.iter().map(|&(a, b)| pts[a].dist(pts[b])).collect();
        let d = area_lambda(&lengths, &lambdas, &tri)?;
        let area_of =
            |l: &[f64]| -> Option<f64> { area_lambda(&lengths, l, &tri).ok().map(|a| a.area) };
        let mut err = 0.0f64;
        for i in 0..lambdas.len() {
            let Some(fd) = central_diff(&area_of, &lambdas, i) else { continue };
            err = err.max((d.gradient[i] - fd).abs() / fd.abs().max(1.0));
        }
        worst = worst.max(err);
        if err > 1e-6 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "diagonal_area_derivative_vs_fd", cases, failures, worst })
}

fn inscribed_solver(mut rng: Rng) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..300 {
        let m = 3 + rng.range(6);
        let lengths = random_c1_lengths(&mut rng, m);
        let sol = cocircular_polygon(&lengths)?;
        let angle_res = (sol.central_angles.iter().sum::<f64>() - 2.0 * std::f64::consts::PI).abs();
        let dist_res = sol
            .vertices
            .iter()
            .map(|v| (v.dist(sol.center) - sol.radius).abs())
            .fold(0.0, f64::max);
        cases += 1;
        worst = worst.max(angle_res.max(dist_res / sol.radius));
        if angle_res >= 1e-10 || dist_res >= 1e-9 * sol.radius {
            failures += 1;
        }
    }
    // Closed forms: the right triangle and regular polygons.
    cases += 1;
    let sol = cocircular_polygon(&[3.0, 4.0, 5.0])?;
    if (sol.radius - 2.5).abs() > 1e-12 {
        failures += 1;
    }
    for m in 3..=8 {
        cases += 1;
        let sol = cocircular_polygon(&vec![1.0; m])?;
        let expect = 0.5 / (std::f64::consts::PI / m as f64).sin();
        if (sol.radius - expect).abs() > 1e-12 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "inscribed_polygon_residuals", cases, failures, worst })
}

fn projection_max_area(mut rng: Rng) -> Result<CheckResult> {
    let cases = 300;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let m = 4 + rng.range(5);
        let chart = random_cycle_linkage(&mut rng, m)?;
        let area = signed_area(&cycle_embed(&chart))?;
        let projected = project_cocircular(LinkageKind::CycleLinkage, &ChartState::Cycle(chart))?;
        let area_proj = signed_area(&cycle_embed(projected.as_cycle()?))?;
        let deficit = area - area_proj;
        worst = worst.max(deficit);
        if deficit > 1e-12 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "cocircular_projection_max_area", cases, failures, worst })
}

fn constraint_gradient(mut rng: Rng) -> Result<CheckResult> {
    let cases = 100;
    let mut failures = 0;
    let mut worst = 0.0f64;
    let h = 1e-6;
    for _ in 0..cases {
        let m = 4 + rng.range(5);
        let chart = random_cycle_linkage(&mut rng, m)?;
        let (_, grad) = cycle_constraint(&chart.theta, &chart.lengths)?;
        if crate::numeric::norm(&grad) <= 1e-10 {
            failures += 1;
            continue;
        }
        let mut err = 0.0f64;
        for i in 0..chart.theta.len() {
            let mut up = chart.theta.clone();
            let mut dn = chart.theta.clone();
            up[i] += h;
            dn[i] -= h;
            let fu = cycle_constraint(&up, &chart.lengths)?.0;
            let fd = cycle_constraint(&dn, &chart.lengths)?.0;
            err = err.max((grad[i] - (fu - fd) / (2.0 * h)).abs());
        }
        worst = worst.max(err);
        if err > 1e-8 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "closure_constraint_gradient_vs_fd", cases, failures, worst })
}

fn field_gradients(mut rng: Rng) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for kind in [
        LinkageKind::ArmLinkage,
        LinkageKind::ArmConfig,
        LinkageKind::CycleLinkage,
        LinkageKind::CycleConfig,
    ] {
        let field = lr_function(kind);
        for _ in 0..25 {
            let m = 4 + rng.range(4);
            let state = match kind {
                LinkageKind::ArmLinkage | LinkageKind::ArmConfig => {
                    ChartState::Arm(random_arm(&mut rng, m)?)
                }
                LinkageKind::CycleLinkage => {
                    ChartState::Cycle(random_cycle_linkage(&mut rng, m)?)
                }
                LinkageKind::CycleConfig => {
                    ChartState::Arm(crate::sample::random_cycle_config(&mut rng, m)?)
                }
            };
            let grad = field.gradient(&state)?;
            let coords = crate::chart::free_coords(kind, &state)?;
            let value_at = |c: &[f64]| -> Option<f64> {
                let s = crate::chart::with_free_coords(kind, &state, c).ok()?;
                field.value(&s).ok()
            };
            let mut err = 0.0f64;
            for i in 0..coords.len() {
                // Probes outside the moduli space skip the coordinate
                // rather than fail the state.
                let Some(fd) = central_diff(&value_at, &coords, i) else { continue };
                err = err.max((grad[i] - fd).abs() / fd.abs().max(1.0));
            }
            cases += 1;
            worst = worst.max(err);
            if err > 1e-4 {
                failures += 1;
            }
        }
    }
    Ok(CheckResult { name: "lr_field_gradients_vs_fd", cases, failures, worst })
}

fn angle_identity(mut rng: Rng) -> Result<CheckResult> {
    let cases = 200;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let m = 3 + rng.range(6);
        let pts = random_star_polygon(&mut rng, m);
        let angles = interior_angles(&pts)?;
        let total: f64 = angles.iter().map(|a| std::f64::consts::PI - a).sum();
        let err = (total - 2.0 * std::f64::consts::PI).abs();
        worst = worst.max(err);
        if err > 1e-9 || angles.iter().any(|&a| a <= 0.0 || a >= 2.0 * std::f64::consts::PI) {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "interior_angle_turning_identity", cases, failures, worst })
}

fn triangulation_shape(mut rng: Rng) -> Result<CheckResult> {
    let cases = 120;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let m = 4 + rng.range(5);
        let pts = random_star_polygon(&mut rng, m);
        let tri = triangulate(&pts, true)?;
        let mut bad = tri.triangles.len() != m - 2 || tri.diagonals.len() != m - 3;
        for &d in &tri.diagonals {
            if tri.triangles_of_diagonal(d).len() != 2 {
                bad = true;
            }
        }
        for s in tri.opposite_angle_sums(&pts) {
            worst = worst.max(s - std::f64::consts::PI);
            if s > std::f64::consts::PI + 1e-9 {
                bad = true;
            }
        }
        if bad {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "lawson_triangulation_shape", cases, failures, worst })
}

fn weight_convexity(mut rng: Rng) -> Result<CheckResult> {
    let mut cases = 0;
    let mut failures = 0;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m = 4 + rng.range(5);
        // Inscribed polygons are convex: weight must vanish identically.
        let sol = cocircular_polygon(&random_c1_lengths(&mut rng, m))?;
        let (w, grad) = nonconvexity_weight(&sol.vertices)?;
        cases += 1;
        worst = worst.max(w);
        if w != 0.0 || grad.iter().any(|g| g.norm() != 0.0) {
            failures += 1;
        }
        // A star polygon with a reflex vertex must have positive weight.
        let pts = random_star_polygon(&mut rng, m);
        let angles = interior_angles(&pts)?;
        if angles.iter().any(|&a| a > std::f64::consts::PI + 1e-6) {
            let (w, _) = nonconvexity_weight(&pts)?;
            cases += 1;
            if !(w > 0.0 && w < 1.0) {
                failures += 1;
            }
        }
    }
    Ok(CheckResult { name: "weight_zero_iff_convex", cases, failures, worst })
}

fn bump_inverse(mut rng: Rng) -> Result<CheckResult> {
    let cases = 10;
    let mut failures = 0;
    let mut worst = 0.0f64;
    let field = lr_function(LinkageKind::ArmLinkage);
    let opts = FlowOptions { step: 0.02, ..FlowOptions::default() };
    for _ in 0..cases {
        let m = 4 + rng.range(3);
        let arm = random_arm(&mut rng, m)?;
        let state = ChartState::Arm(arm);
        let f = field.value(&state)?;
        let params = BumpParams::for_endpoints(f, f);
        let fwd = bump_flow(&field, params, &state, 0.5, &opts)?;
        let back = bump_flow(&field, params, &fwd, -0.5, &opts)?;
        let dist = crate::chart::chart_distance(LinkageKind::ArmLinkage, &state, &back)?;
        worst = worst.max(dist);
        if dist > 1e-5 {
            failures += 1;
        }
        // Sanity of the cutoff itself.
        let (eta_a, _) = bump_eta(params, params.a);
        let (eta_b, _) = bump_eta(params, params.b);
        if eta_a != 1.0 || eta_b != 0.0 {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "bump_flow_inverse", cases, failures, worst })
}

fn straighten_runs(mut rng: Rng) -> Result<CheckResult> {
    let cases = 10;
    let mut failures = 0;
    let mut worst = 0.0f64;
    let field = lr_function(LinkageKind::ArmLinkage);
    let opts = FlowOptions::default();
    for _ in 0..cases {
        let m = 4 + rng.range(3);
        let arm = random_arm(&mut rng, m)?;
        let traj = gradient_flow(&field, &ChartState::Arm(arm), &opts)?;
        let spread = norm_inf(&traj.final_state().as_arm()?.theta);
        worst = worst.max(spread);
        let monotone = traj
            .f_values
            .windows(2)
            .all(|w| w[1] <= w[0] + 1e-9 * w[0].abs());
        let frames_valid = traj
            .frames
            .iter()
            .all(|f| validate(LinkageKind::ArmLinkage, f).is_valid());
        if traj.termination != Termination::Converged
            || spread >= 1e-3
            || !monotone
            || !frames_valid
        {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "straightening_flow", cases, failures, worst })
}

fn convexify_runs(mut rng: Rng) -> Result<CheckResult> {
    let cases = 5;
    let mut failures = 0;
    let mut worst = 0.0f64;
    let field = lr_function(LinkageKind::CycleLinkage);
    let opts = FlowOptions::default();
    for _ in 0..cases {
        let m = 4 + rng.range(3);
        let chart = random_cycle_linkage(&mut rng, m)?;
        let scale = chart.lengths[m - 1];
        let traj = projected_flow(&field, &chart, &opts)?;
        let vertices: Vec<Point> = cycle_embed(traj.final_state().as_cycle()?);
        let residual = concyclicity_residual(&vertices)?;
        worst = worst.max(residual);
        let mut ok = traj.termination == Termination::Converged && residual < 1e-4;
        for frame in &traj.frames {
            let c = frame.as_cycle()?;
            let (u, _) = cycle_constraint(&c.theta, &c.lengths)?;
            if u.abs() >= 1e-8 * scale {
                ok = false;
            }
        }
        if !ok {
            failures += 1;
        }
    }
    Ok(CheckResult { name: "convexifying_flow", cases, failures, worst })
}
