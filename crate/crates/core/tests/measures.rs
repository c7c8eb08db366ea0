use rug::Float;

use nikstar::measures::{
    build_base_measure, build_base_measure_with, cauchy_transform, cauchy_transform_complex, load_preset, moments,
    MeasureSet, WeightSpec,
};
use nikstar::num::Cplx;
use nikstar::StarSystemConfig;

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn close(a: &Float, b: f64, tol: f64) -> bool {
    (a.to_f64() - b).abs() <= tol
}

#[test]
fn lebesgue_on_unit_interval_has_mass_one() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure(&cfg, 0).unwrap();
    assert_eq!(m.len(), 128);
    assert!(m.nodes.iter().all(|t| *t > 1 && *t < 2));
    assert!(m.weights.iter().all(|w| *w > 0));
    let err = Float::with_val(256, m.mass() - 1u32).abs();
    assert!(err < Float::with_val(256, 1e-60), "mass error {err}");
    let m1 = build_base_measure(&cfg, 1).unwrap();
    assert!(m1.nodes.iter().all(|t| *t > -3 && *t < -2));
    assert!(close(&m1.mass(), 1.0, 1e-30));
}

#[test]
fn arcsine_weight_has_mass_pi() {
    let cfg = StarSystemConfig::new(2, &[("1", "2"), ("-3", "-2")], vec![WeightSpec::jacobi("-0.5", "-0.5"), WeightSpec::lebesgue()])
        .unwrap();
    let m = build_base_measure(&cfg, 0).unwrap();
    let pi = Float::with_val(256, rug::float::Constant::Pi);
    let err = Float::with_val(256, m.mass() - &pi).abs();
    assert!(err < Float::with_val(256, 1e-60), "error {err}");
}

#[test]
fn moments_of_lebesgue_on_one_two() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure(&cfg, 0).unwrap();
    let mom = moments(&m, 3);
    for (got, want) in mom.iter().zip([1.0, 1.5, 7.0 / 3.0, 15.0 / 4.0]) {
        assert!(close(got, want, 1e-14), "{got} vs {want}");
    }
}

#[test]
fn cauchy_transform_matches_logarithm() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure(&cfg, 0).unwrap();
    let x = Float::with_val(256, 3);
    assert!(close(&cauchy_transform(&m, &x).unwrap(), 2f64.ln(), 1e-14));
    let x = Float::with_val(256, -0.5);
    assert!(close(&cauchy_transform(&m, &x).unwrap(), (1.5f64 / 2.5).ln(), 1e-14));
    let z = Cplx::from_f64(256, 1.5, 1.0);
    let v = cauchy_transform_complex(&m, &z).unwrap();
    let want = (num_complex::Complex64::new(0.5, 1.0) / num_complex::Complex64::new(-0.5, 1.0)).ln();
    let (re, im) = v.to_f64();
    assert!((re - want.re).abs() < 1e-13 && (im - want.im).abs() < 1e-13, "{re} {im} vs {want}");
}

#[test]
fn cauchy_transform_decays_like_mass_over_x() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure(&cfg, 1).unwrap();
    let x = Float::with_val(256, 1e12);
    let v = Float::with_val(256, cauchy_transform(&m, &x).unwrap() * &x);
    assert!(close(&v, 1.0, 1e-11));
}

#[test]
fn cauchy_transform_rejects_points_on_the_support() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure(&cfg, 0).unwrap();
    assert!(cauchy_transform(&m, &Float::with_val(256, 1.5)).is_err());
}

#[test]
fn second_interval_transform_is_positive_on_the_first() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure(&cfg, 1).unwrap();
    for i in 0..=20 {
        let x = Float::with_val(256, 1.0 + i as f64 / 20.0);
        assert!(cauchy_transform(&m, &x).unwrap() > 0);
    }
}

#[test]
fn nested_measure_weights_match_direct_integration() {
    let cfg = load_preset("cfg_a").unwrap();
    let set = MeasureSet::build(&cfg).unwrap();
    let n01 = set.nested(0, 1);
    assert_eq!(n01.sign(), Some(1));
    // dμ_{0,1}(τ) = τ ∫ ds/(τ − s) dτ over s ∈ [−3, −2], τ ∈ [1, 2]
    let density = |t: f64| t * ((t + 3.0) / (t + 2.0)).ln();
    let mass = simpson(density, 1.0, 2.0, 2000);
    assert!(close(&n01.mass(), mass, 1e-12), "{} vs {mass}", n01.mass());
    let first = simpson(|t| t * density(t), 1.0, 2.0, 2000);
    assert!(close(&moments(n01, 1)[1], first, 1e-12));
    let base = set.base(0);
    let same = set.nested(0, 0);
    assert_eq!(same.weights, base.weights);
}

#[test]
fn nested_mass_is_stable_under_node_doubling() {
    let cfg = load_preset("cfg_a").unwrap();
    let a = MeasureSet::build_with(&cfg, 64, 256).unwrap();
    let b = MeasureSet::build_with(&cfg, 128, 256).unwrap();
    let d = Float::with_val(256, a.nested(0, 1).mass() - b.nested(0, 1).mass()).abs();
    assert!(d < Float::with_val(256, 2f64.powi(-64)), "difference {d}");
}

#[test]
fn varying_measure_carries_tau_when_ell_exceeds_k() {
    let cfg = load_preset("cfg_a").unwrap();
    let set = MeasureSet::build(&cfg).unwrap();
    // ℓ(5) = 2 > 1, ℓ(3) = 0
    assert!(set.varying_has_tau(5, 1));
    assert!(!set.varying_has_tau(3, 1));
    let v = set.varying(5, 1);
    let b = set.base(1);
    for ((w, t), w0) in v.weights.iter().zip(&b.nodes).zip(&b.weights) {
        assert_eq!(*w, Float::with_val(256, w0 * t));
    }
}

#[test]
fn configuration_errors_are_reported() {
    assert!(StarSystemConfig::new(2, &[("1", "2")], vec![WeightSpec::lebesgue()]).is_err());
    assert!(StarSystemConfig::new(2, &[("2", "1"), ("-3", "-2")], vec![WeightSpec::lebesgue(), WeightSpec::lebesgue()]).is_err());
    assert!(StarSystemConfig::from_json_str("{\"p\": 2}").is_err());
}

#[test]
fn digest_is_stable_and_sensitive() {
    let a = load_preset("cfg_a").unwrap();
    assert_eq!(a.digest(), load_preset("cfg_a").unwrap().digest());
    assert_ne!(a.digest(), a.with_precision(512).digest());
    assert_eq!(a.digest().len(), 64);
}

#[test]
fn coarse_rule_still_integrates_low_degree_exactly() {
    let cfg = load_preset("cfg_a").unwrap();
    let m = build_base_measure_with(&cfg, 0, 8, 128).unwrap();
    let mom = moments(&m, 15);
    // ∫_1^2 τ^15 dτ = (2^16 − 1)/16
    assert!(close(&mom[15], 65535.0 / 16.0, 1e-9));
}
