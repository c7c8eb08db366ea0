use rug::Float;

use nikstar::limits::{sample_points, LimitTable};
use nikstar::measures::{load_preset, MeasureSet};
use nikstar::mop::MopSolver;
use nikstar::surface::solve_uniformization;

fn table(name: &str) -> LimitTable {
    LimitTable::build(solve_uniformization(&load_preset(name).unwrap()).unwrap()).unwrap()
}

#[test]
fn limits_are_positive_and_periodic() {
    let t = table("cfg_a");
    let per = t.shape.period() as i64;
    for rho in 0..per {
        assert!(*t.a(rho) > 0);
        assert_eq!(t.a(rho), t.a(rho + per));
        assert_eq!(t.a(rho), t.a(rho - 3 * per));
    }
}

#[test]
fn sum_rule_holds_on_the_surface() {
    for name in ["cfg_a", "cfg_b"] {
        let t = table(name);
        for rho in 0..t.shape.period() as i64 {
            assert!(t.sum_rule_residual(rho).to_f64() < 1e-12, "{name} rho={rho}");
        }
    }
}

#[test]
fn origin_inside_an_interval_forces_collisions() {
    let t = table("cfg_b");
    assert_eq!(t.zero_interval, Some(0));
    let pts = sample_points(t.prec(), t.surface.scale, 6);
    let checks = t.zero_at_origin_collision(1e-12, 1e-6, &pts).unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().any(|c| c.name.starts_with("collision a(")));
    for c in &checks {
        assert!(c.passed, "{}: {}", c.name, c.measured);
    }
}

#[test]
fn origin_outside_keeps_values_apart() {
    let t = table("cfg_a");
    assert_eq!(t.zero_interval, None);
    let pts = sample_points(t.prec(), t.surface.scale, 4);
    let checks = t.zero_at_origin_collision(1e-12, 1e-6, &pts).unwrap();
    assert_eq!(checks.len(), t.shape.period());
    assert!(checks.iter().all(|c| c.passed));
}

#[test]
fn eta_divisor_is_as_expected() {
    let t = table("cfg_a");
    for rho in 0..t.shape.period() as i64 {
        let d = t.eta_divisor(rho).unwrap();
        assert!(d.value_at_infinity < 1e-8);
        assert!(d.zero_at_infinity < 1e-8);
        assert!(d.zero_coefficient.abs() > 1e-6);
        assert!(d.pole_stability.unwrap() < 1e-8);
    }
}

#[test]
fn laurent_coefficient_recovers_a() {
    let t = table("cfg_a");
    for rho in 0..t.shape.period() as i64 {
        let got = t.laurent_a(rho).unwrap();
        let rel = Float::with_val(t.prec(), &got - t.a(rho)).abs().to_f64() / t.a(rho).to_f64();
        assert!(rel < 1e-8, "rho={rho}: {got}");
    }
}

#[test]
fn leading_coefficients_are_one() {
    let t = table("cfg_a");
    let radius = 1e4 * t.surface.scale;
    for rho in 0..t.shape.period() as i64 {
        for k in 0..t.p() {
            let c = t.leading_coefficient(rho, k, radius).unwrap();
            let (re, im) = c.to_f64();
            assert!((re - 1.0).abs() < 1e-3 && im.abs() < 1e-3, "rho={rho} k={k}: {re} {im}");
        }
    }
}

#[test]
fn boundary_combination_is_constant_only_for_the_right_a() {
    let t = table("cfg_a");
    for rho in 0..3 {
        let exact = (0..t.p()).map(|k| t.boundary_constancy(rho, k).unwrap()).fold(0.0, f64::max);
        assert!(exact < 1e-8);
        let a = Float::with_val(t.prec(), t.a(rho) * 1.01);
        let bent = (0..t.p()).map(|k| t.boundary_constancy_with(rho, k, &a).unwrap()).fold(0.0, f64::max);
        assert!(bent > 1e-3, "rho={rho}: {bent}");
    }
}

#[test]
fn identities_between_the_limit_functions() {
    let t = table("cfg_a");
    let pts = sample_points(t.prec(), t.surface.scale, 5);
    let tol = 2f64.powi(-(t.prec() as i32) / 8);
    for rho in 0..t.shape.period() as i64 {
        assert!(t.relation_residual(rho, &pts).unwrap() < tol);
        assert!(t.quotient_residual(rho, &pts).unwrap() < tol);
        assert!(t.f0_residual(rho, &pts).unwrap() < tol);
        for k in 0..t.p() {
            assert!(t.periodicity_residual(rho, k, &pts).unwrap() < tol);
        }
    }
}

/// a_n extracted directly from τQ_n or Q_n = Q_{n+1} + a_n Q_{n−p} at a real
/// point away from the zeros.
fn oracle_a(set: &MeasureSet, n_top: u64) -> Vec<(u64, f64)> {
    let shape = set.shape;
    let p = shape.p() as u64;
    let solver = MopSolver::new(set, shape.degree(n_top + 1));
    let prec = set.prec;
    let x = Float::with_val(prec, 7.25);
    let q = |m: u64| solver.compute_qd(m).unwrap().eval(&x);
    let per = shape.period() as u64;
    (n_top + 1 - per..=n_top)
        .map(|n| {
            let mut lhs = q(n);
            if shape.ell(n) == shape.p() {
                lhs *= &x;
            }
            let a = Float::with_val(prec, lhs - q(n + 1)) / q(n - p);
            (n, a.to_f64())
        })
        .collect()
}

#[test]
fn predictions_match_the_recurrence_coefficients() {
    let cfg = load_preset("cfg_a").unwrap().with_precision(384);
    let set = MeasureSet::build(&cfg).unwrap();
    let t = table("cfg_a");
    let per = t.shape.period() as u64;
    for (n, a) in oracle_a(&set, 11 * per - 1) {
        let want = t.a((n % per) as i64).to_f64();
        assert!((a - want).abs() < 1e-3, "n={n}: {a} vs {want}");
    }
}
