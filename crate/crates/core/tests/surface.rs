use rug::Float;

use nikstar::measures::{load_preset, WeightSpec};
use nikstar::num::Cplx;
use nikstar::surface::{branch_points_check, laurent_fit, normalize_family, phi_branch, solve_uniformization, Uniformization};
use nikstar::{Error, StarSystemConfig};

fn cfg_a() -> Uniformization {
    solve_uniformization(&load_preset("cfg_a").unwrap()).unwrap()
}

fn tol(u: &Uniformization) -> f64 {
    2f64.powi(-(u.prec() as i32) / 8)
}

#[test]
fn symmetric_intervals_give_four_critical_values() {
    let cfg = StarSystemConfig::new(2, &[("1", "2"), ("-2", "-1")], vec![WeightSpec::lebesgue(), WeightSpec::lebesgue()]).unwrap();
    let u = solve_uniformization(&cfg).unwrap();
    let crit: Vec<&Float> = u.crit_in.iter().chain(&u.crit_out).collect();
    assert_eq!(crit.len(), 4);
    let mut values: Vec<f64> = crit
        .iter()
        .map(|c| {
            let (r, r1, _) = u.map.eval3(c);
            assert!(r1.abs() < 1e-60);
            r.to_f64()
        })
        .collect();
    values.sort_by(f64::total_cmp);
    for (v, want) in values.iter().zip([-2.0, -1.0, 1.0, 2.0]) {
        assert!((v - want).abs() < 1e-60);
    }
}

#[test]
fn certified_surface_has_small_residuals() {
    let u = cfg_a();
    assert!(u.newton_residual.to_f64() < 2f64.powi(-32));
    assert!(branch_points_check(&u).unwrap().to_f64() < tol(&u));
    assert_eq!(u.map.poles.len(), 1);
}

#[test]
fn shifted_pole_breaks_the_critical_values() {
    let mut u = cfg_a();
    u.map.poles[0] += 1e-3;
    let r = branch_points_check(&u).unwrap().to_f64();
    assert!(r > 1e-4, "residual {r}");
}

#[test]
fn swapped_sheet_labels_are_rejected() {
    let mut u = cfg_a();
    u.sheet_of_pole.swap(0, 1);
    assert!(matches!(branch_points_check(&u), Err(Error::Combinatorics(_))));
    let mut u = cfg_a();
    u.sheet_of_pole.pop();
    assert!(matches!(branch_points_check(&u), Err(Error::Combinatorics(_))));
}

#[test]
fn branches_respect_conjugation() {
    let u = cfg_a();
    for (x, y) in [(0.5, 0.3), (-2.5, 0.01), (4.0, -2.0)] {
        let z = Cplx::from_f64(u.prec(), x, y);
        let a = u.sheet_roots(&z).unwrap();
        let b = u.sheet_roots(&z.conj()).unwrap();
        for (w, v) in a.iter().zip(&b) {
            assert!((&w.conj() - v).abs() < 1e-60);
        }
        assert!(u.preimage_residual(&z, &a) < 1e-60);
    }
}

#[test]
fn branches_are_real_off_the_intervals() {
    let u = cfg_a();
    let fam = normalize_family(&u, 1).unwrap();
    for x in [-1.0, -0.5, 0.5, 5.0, -7.0] {
        let z = Cplx::from_f64(u.prec(), x, 0.0);
        for k in 0..=2 {
            let v = phi_branch(&u, &fam, k, &z).unwrap();
            let (_, im) = v.to_f64();
            assert!(im.abs() < 1e-50, "x={x} k={k}: {im}");
        }
    }
}

#[test]
fn branch_product_is_a_sign() {
    let u = cfg_a();
    for l in 1..=2 {
        let fam = normalize_family(&u, l).unwrap();
        assert!(fam.omega > 0);
        for (x, y) in [(0.2, 0.9), (1.5, 0.001), (-2.5, -0.3), (30.0, 40.0)] {
            let z = Cplx::from_f64(u.prec(), x, y);
            let roots = u.sheet_roots(&z).unwrap();
            let mut prod = Cplx::one(u.prec());
            for w in &roots {
                prod = &prod * &fam.phi_of_w(w);
            }
            let target = Cplx::from_f64(u.prec(), fam.product_sign as f64, 0.0);
            assert!((&prod - &target).abs() < tol(&u));
        }
    }
}

#[test]
fn sheet_zero_decays_like_omega_over_z() {
    let u = cfg_a();
    let fam = normalize_family(&u, 2).unwrap();
    let x = 1e6;
    let z = Cplx::from_f64(u.prec(), x, 0.0);
    let v = phi_branch(&u, &fam, 0, &z).unwrap().to_f64().0 * x;
    assert!((v - fam.omega.to_f64()).abs() < 1e-4 * fam.omega.to_f64());
}

#[test]
fn closed_form_leading_coefficients_match_circle_fit() {
    let u = cfg_a();
    for l in 1..=2 {
        let fam = normalize_family(&u, l).unwrap();
        let fit = laurent_fit(&u, &fam, 1e4 * u.scale).unwrap();
        for (a, b) in fam.omega_j.iter().zip(&fit.omega_j) {
            let rel = Float::with_val(u.prec(), a - b).abs().to_f64() / a.to_f64().abs();
            assert!(rel < 1e-10, "l={l}: {a} vs {b}");
        }
    }
}

#[test]
fn sign_table_matches_surface() {
    for name in ["cfg_a", "cfg_b"] {
        let cfg = load_preset(name).unwrap();
        let shape = cfg.shape();
        let u = solve_uniformization(&cfg).unwrap();
        for l in 1..=shape.p() {
            let fam = normalize_family(&u, l).unwrap();
            for k in 0..=shape.p() {
                assert_eq!(fam.sign_at_infinity(k), shape.sign_phi_inf(l, k), "{name} l={l} k={k}");
            }
        }
    }
}

#[test]
fn doubling_precision_leaves_the_map_unchanged() {
    let cfg = load_preset("cfg_a").unwrap();
    let u = solve_uniformization(&cfg).unwrap();
    let v = solve_uniformization(&cfg.with_precision(512)).unwrap();
    let pairs = [(&u.map.alpha, &v.map.alpha), (&u.map.beta, &v.map.beta), (&u.map.poles[0], &v.map.poles[0])];
    for (a, b) in pairs {
        let rel = Float::with_val(512, a - b).abs().to_f64() / b.to_f64().abs();
        assert!(rel < 1e-10);
    }
}

#[test]
fn three_interval_surface_is_certified() {
    let u = solve_uniformization(&load_preset("cfg_c").unwrap()).unwrap();
    assert_eq!(u.p, 3);
    assert_eq!(u.crit_in.len() + u.crit_out.len(), 6);
    assert!(branch_points_check(&u).unwrap().to_f64() < tol(&u));
}

#[test]
fn three_interval_branches_on_and_off_the_slits() {
    let u = solve_uniformization(&load_preset("cfg_c").unwrap()).unwrap();
    for (x, y) in [(1.5, 0.0), (3.0, 0.0), (-2.5, 0.0), (0.5, 0.7), (10.0, 5.0)] {
        let z = Cplx::from_f64(u.prec(), x, y);
        let above = u.sheet_roots_from(&z, false).unwrap();
        let below = u.sheet_roots_from(&z, true).unwrap();
        assert_eq!(above.len(), 4);
        assert!(u.preimage_residual(&z, &above) < 1e-60);
        assert!(u.preimage_residual(&z, &below) < 1e-60);
        if y == 0.0 {
            for (a, b) in above.iter().zip(&below) {
                assert!((&a.conj() - b).abs() < 1e-60);
            }
        }
    }
}
