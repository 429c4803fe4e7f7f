//! Base functions on the straight and cocircular strata, and the two
//! projections: every arm configuration projects to the straight
//! configuration with the same lengths, and every cycle state projects to
//! the inscribed polygon with the same lengths.

use crate::chart::{
    arm_extract, closing_length, cycle_extract, ArmChart, ChartState, LinkageKind,
};
use crate::error::{Error, Result};
use crate::geom::{cocircular_polygon, satisfies_c1};

/// Base function on straight configurations: sum of squared logs of the
/// edge lengths. Gradient 2 log(rho)/rho; the unique critical point is the
/// all-ones length vector.
pub fn h_straight(rho: &[f64]) -> Result<(f64, Vec<f64>)> {
    if rho.is_empty() || rho.iter().any(|&r| !r.is_finite() || r <= 0.0) {
        return Err(Error::InvalidInput("lengths must be positive".into()));
    }
    let value = rho.iter().map(|&r| r.ln() * r.ln()).sum();
    let grad = rho.iter().map(|&r| 2.0 * r.ln() / r).collect();
    Ok((value, grad))
}

/// Base function on cocircular configurations, as a function of the m side
/// lengths: log^2(L) - sum_i log sin(2 pi l_i / L) with L the perimeter.
/// Under condition (c1) every sine argument lies in (0, pi). The unique
/// critical point has equal proportions l_i = 1/m and perimeter L = 1.
pub fn h_cocircular(lengths: &[f64]) -> Result<(f64, Vec<f64>)> {
    if !satisfies_c1(lengths) {
        return Err(Error::InfeasibleLengths);
    }
    let total: f64 = lengths.iter().sum();
    let ln_total = total.ln();
    let two_pi = 2.0 * std::f64::consts::PI;

    let mut value = ln_total * ln_total;
    let mut cot_sum = 0.0;
    let cots: Vec<f64> = lengths
        .iter()
        .map(|&l| {
            let x = two_pi * l / total;
            value -= x.sin().ln();
            let cot = x.cos() / x.sin();
            cot_sum += l * cot;
            cot
        })
        .collect();
    let grad = cots
        .iter()
        .map(|&cot_i| {
            2.0 * ln_total / total - (two_pi / (total * total)) * (total * cot_i - cot_sum)
        })
        .collect();
    Ok((value, grad))
}

/// Projection onto the straight stratum: same lengths, all angles zero.
/// Idempotent.
pub fn project_straight(chart: &ArmChart) -> ArmChart {
    ArmChart {
        rho: chart.rho.clone(),
        theta: vec![0.0; chart.theta.len()],
    }
}

/// Projection onto the cocircular stratum: the unique inscribed polygon
/// with the same m side lengths (closing side included), returned in the
/// chart shape of the input kind.
pub fn project_cocircular(kind: LinkageKind, state: &ChartState) -> Result<ChartState> {
    match (kind, state) {
        (LinkageKind::CycleLinkage, ChartState::Cycle(cycle)) => {
            let sol = cocircular_polygon(&cycle.lengths)?;
            let extracted = cycle_extract(&sol.vertices)?;
            Ok(ChartState::Cycle(crate::chart::CycleChart {
                lengths: cycle.lengths.clone(),
                theta: extracted.theta,
            }))
        }
        (LinkageKind::CycleConfig, ChartState::Arm(arm)) => {
            let mut lengths = arm.rho.clone();
            lengths.push(closing_length(arm));
            let sol = cocircular_polygon(&lengths)?;
            Ok(ChartState::Arm(arm_extract(&sol.vertices)?))
        }
        _ => Err(Error::InvalidInput(
            "cocircular projection applies to cycle states".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::{chart_distance, cycle_embed, CycleChart};
    use crate::geom::signed_area;
    use std::f64::consts::PI;

    #[test]
    fn h_straight_critical_at_unit_lengths() {
        let (value, grad) = h_straight(&[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(value, 0.0);
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn h_straight_at_e() {
        let e = std::f64::consts::E;
        let (value, _) = h_straight(&[e, e]).unwrap();
        assert!((value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn h_straight_gradient_matches_finite_differences() {
        let rho = vec![0.7, 1.9, 1.1];
        let (_, grad) = h_straight(&rho).unwrap();
        let h = 1e-7;
        for i in 0..rho.len() {
            let mut up = rho.clone();
            let mut dn = rho.clone();
            up[i] += h;
            dn[i] -= h;
            let est = (h_straight(&up).unwrap().0 - h_straight(&dn).unwrap().0) / (2.0 * h);
            assert!((grad[i] - est).abs() < 1e-8);
        }
    }

    #[test]
    fn h_cocircular_zero_at_quarter_lengths() {
        let (value, _) = h_cocircular(&[0.25; 4]).unwrap();
        assert!(value.abs() < 1e-15, "log^2(1) = 0 and each sin(pi/2) = 1");
    }

    #[test]
    fn h_cocircular_equilateral_value() {
        let (value, _) = h_cocircular(&[1.0 / 3.0; 3]).unwrap();
        let expect = -3.0 * (3f64.sqrt() / 2.0).ln();
        assert!((value - expect).abs() < 1e-12);
        assert!((value - 0.43152).abs() < 1e-4);
    }

    #[test]
    fn h_cocircular_critical_at_equal_proportions() {
        for m in 3..=7 {
            let lengths = vec![1.0 / m as f64; m];
            let (_, grad) = h_cocircular(&lengths).unwrap();
            for g in grad {
                assert!(g.abs() < 1e-12, "m = {m}");
            }
        }
        // Away from perimeter one the gradient is nonzero.
        let (_, grad) = h_cocircular(&[0.5; 4]).unwrap();
        assert!(grad.iter().all(|&g| g.abs() > 1e-3));
    }

    #[test]
    fn h_cocircular_gradient_nonzero_off_critical() {
        // Sampled grid: every length vector away from the equal-proportion
        // unit-perimeter point has a nonvanishing gradient.
        let mut rng = crate::sample::Rng::new(31);
        for _ in 0..100 {
            let m = 3 + rng.range(6);
            let lengths = crate::sample::random_c1_lengths(&mut rng, m);
            let total: f64 = lengths.iter().sum();
            let off_critical = (total - 1.0).abs() > 1e-3
                || lengths.iter().any(|l| (l / total - 1.0 / m as f64).abs() > 1e-3);
            if !off_critical {
                continue;
            }
            let (_, grad) = h_cocircular(&lengths).unwrap();
            let norm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            assert!(norm > 1e-8, "vanishing gradient at {lengths:?}");
        }
    }

    #[test]
    fn h_cocircular_gradient_matches_finite_differences() {
        let lengths = vec![0.3, 0.2, 0.25, 0.4, 0.35];
        let (_, grad) = h_cocircular(&lengths).unwrap();
        let h = 1e-7;
        for i in 0..lengths.len() {
            let mut up = lengths.clone();
            let mut dn = lengths.clone();
            up[i] += h;
            dn[i] -= h;
            let est = (h_cocircular(&up).unwrap().0 - h_cocircular(&dn).unwrap().0) / (2.0 * h);
            assert!((grad[i] - est).abs() < 1e-6, "length {i}: {} vs {est}", grad[i]);
        }
    }

    #[test]
    fn h_cocircular_rejects_infeasible() {
        assert!(matches!(h_cocircular(&[5.0, 1.0, 1.0]), Err(Error::InfeasibleLengths)));
    }

    #[test]
    fn straight_projection_is_idempotent() {
        let chart = ArmChart::new(vec![1.0, 2.0], vec![PI / 3.0]).unwrap();
        let once = project_straight(&chart);
        assert_eq!(once.rho, chart.rho);
        assert!(once.theta.iter().all(|&t| t == 0.0));
        assert_eq!(project_straight(&once), once);
    }

    #[test]
    fn cocircular_projection_fixes_regular_polygon() {
        let m = 6;
        let turn = 2.0 * PI / m as f64;
        let theta: Vec<f64> = (1..m - 1).map(|k| k as f64 * turn).collect();
        let chart = CycleChart::new(vec![1.0; m], theta).unwrap();
        let state = ChartState::Cycle(chart);
        let projected = project_cocircular(LinkageKind::CycleLinkage, &state).unwrap();
        let d = chart_distance(LinkageKind::CycleLinkage, &state, &projected).unwrap();
        assert!(d < 1e-9, "regular polygon is already cocircular, moved {d}");
    }

    #[test]
    fn cocircular_projection_preserves_lengths_and_raises_area() {
        // A mildly non-convex pentagon, read into chart coordinates.
        let pts = [
            crate::geom::Point::new(0.0, 0.0),
            crate::geom::Point::new(2.0, 0.0),
            crate::geom::Point::new(2.2, 1.1),
            crate::geom::Point::new(1.0, 0.9),
            crate::geom::Point::new(-0.4, 1.2),
        ];
        let chart = cycle_extract(&pts).unwrap();
        let lengths = chart.lengths.clone();
        let state = ChartState::Cycle(chart.clone());
        let projected = project_cocircular(LinkageKind::CycleLinkage, &state).unwrap();
        let proj_cycle = projected.as_cycle().unwrap();
        for (a, b) in lengths.iter().zip(&proj_cycle.lengths) {
            assert!((a - b).abs() < 1e-10);
        }
        let area_before = signed_area(&cycle_embed(&chart)).unwrap();
        let area_after = signed_area(&cycle_embed(proj_cycle)).unwrap();
        assert!(area_after >= area_before - 1e-12);
    }
}
