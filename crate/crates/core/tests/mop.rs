use rug::Float;

use nikstar::measures::{load_preset, MeasureSet};
use nikstar::mop::{
    interlace, k_norm_check, psi_zeros, recurrence_sequence, MopSolver, SecondKindEvaluator,
};
use nikstar::num::Cplx;

const BITS: u32 = 300;

fn fl(v: impl Into<f64>) -> Float {
    Float::with_val(BITS, v.into())
}

/// Romberg integration on [1, 2] at 300 bits.
fn romberg(f: &dyn Fn(&Float) -> Float, levels: usize) -> Float {
    let (a, b) = (fl(1.0), fl(2.0));
    let mut prev: Vec<Float> = vec![Float::with_val(BITS, (f(&a) + f(&b)) / 2u32)];
    let mut sum_interior = fl(0.0);
    let mut n = 1u64;
    for _ in 1..levels {
        for i in 0..n {
            let x = Float::with_val(BITS, &a + Float::with_val(BITS, (2 * i + 1) as f64) / Float::with_val(BITS, 2 * n));
            sum_interior += f(&x);
        }
        n *= 2;
        let trap = Float::with_val(BITS, (f(&a) + f(&b)) / 2u32 + &sum_interior) / n;
        let mut row = vec![trap];
        let mut factor = fl(1.0);
        for j in 1..=prev.len() {
            factor *= 4u32;
            let r = Float::with_val(BITS, &row[j - 1] - &prev[j - 1]) / Float::with_val(BITS, &factor - 1u32) + &row[j - 1];
            row.push(r);
        }
        prev = row;
    }
    prev.pop().unwrap()
}

/// Q_d for CFG-A from a dense monomial solve at 300 bits, with the two
/// measures integrated directly: dτ and τ·log((τ+3)/(τ+2)) dτ on [1, 2].
fn brute_force_qd(n: u64) -> Vec<Float> {
    let shape = load_preset("cfg_a").unwrap().shape();
    let d = shape.degree(n);
    let dens0 = |_: &Float| fl(1.0);
    let dens1 = |t: &Float| Float::with_val(BITS, Float::with_val(BITS, t + 3u32) / Float::with_val(BITS, t + 2u32)).ln() * t;
    let densities: [&dyn Fn(&Float) -> Float; 2] = [&dens0, &dens1];
    let mut a: Vec<Vec<Float>> = Vec::new();
    for (j, dens) in densities.iter().enumerate() {
        let (lo, hi) = shape.exponent_range(n, j);
        for s in lo..=hi {
            let mut row: Vec<Float> = (0..=d)
                .map(|i| romberg(&|t: &Float| Float::with_val(BITS, rug::ops::Pow::pow(t, (i as i64 + s) as i32)) * dens(t), 13))
                .collect();
            let last = -row.pop().unwrap();
            row.push(last);
            a.push(row);
        }
    }
    assert_eq!(a.len(), d);
    for c in 0..d {
        let piv = (c..d).max_by(|&x, &y| a[x][c].clone().abs().partial_cmp(&a[y][c].clone().abs()).unwrap()).unwrap();
        a.swap(c, piv);
        for r in 0..d {
            if r != c {
                let f = Float::with_val(BITS, &a[r][c] / &a[c][c]);
                for k in c..=d {
                    let v = Float::with_val(BITS, &f * &a[c][k]);
                    a[r][k] -= v;
                }
            }
        }
    }
    let mut coeffs: Vec<Float> = (0..d).map(|i| Float::with_val(BITS, &a[i][d] / &a[i][i])).collect();
    coeffs.push(fl(1.0));
    coeffs
}

fn agree(q: &nikstar::mop::MonicPolynomial, want: &[Float], tol: f64) {
    assert_eq!(q.coeffs.len(), want.len());
    for (got, w) in q.coeffs.iter().zip(want) {
        let err = Float::with_val(BITS, got - w).abs().to_f64();
        assert!(err <= tol * w.to_f64().abs().max(1.0), "{got} vs {w}");
    }
}

fn setup() -> MeasureSet {
    MeasureSet::build(&load_preset("cfg_a").unwrap()).unwrap()
}

#[test]
fn first_polynomials_are_constant() {
    let set = setup();
    let solver = MopSolver::new(&set, 4);
    for n in 0..3 {
        let q = solver.compute_qd(n).unwrap();
        assert_eq!(q.d, 0);
        assert_eq!(q.coeffs.len(), 1);
        assert_eq!(q.coeffs[0], 1);
    }
}

#[test]
fn degree_three_polynomial_matches_dense_solve() {
    let set = setup();
    let q = MopSolver::new(&set, 4).compute_qd(9).unwrap();
    assert_eq!(q.d, 3);
    agree(&q, &brute_force_qd(9), 1e-30);
    let zs = psi_zeros(&SecondKindEvaluator::new(&set, q), 0).unwrap();
    assert_eq!(zs.len(), 3);
    assert!(zs.zeros.iter().all(|z| *z > 1 && *z < 2));
}

#[test]
fn higher_degree_matches_dense_solve() {
    let set = setup();
    let q = MopSolver::new(&set, 6).compute_qd(16).unwrap();
    assert_eq!(q.d, 5);
    agree(&q, &brute_force_qd(16), 1e-30);
    let q = MopSolver::new(&set, 6).compute_qd(17).unwrap();
    agree(&q, &brute_force_qd(17), 1e-30);
}

#[test]
fn orthogonality_residuals_are_tiny() {
    let set = setup();
    let solver = MopSolver::new(&set, 12);
    for n in [7, 20, 33] {
        let q = solver.compute_qd(n).unwrap();
        let worst = solver.orthogonality_residuals(&q).iter().map(|r| r.relative.to_f64()).fold(0.0, f64::max);
        assert!(worst < 2f64.powi(-64), "n={n}: {worst}");
    }
}

#[test]
fn second_kind_zero_counts_and_interlacing() {
    let set = setup();
    let solver = MopSolver::new(&set, 5);
    let z9 = psi_zeros(&SecondKindEvaluator::new(&set, solver.compute_qd(9).unwrap()), 1).unwrap();
    let z10 = psi_zeros(&SecondKindEvaluator::new(&set, solver.compute_qd(10).unwrap()), 1).unwrap();
    assert_eq!(z9.len(), 1);
    assert!(z9.zeros[0] > -3 && z9.zeros[0] < -2);
    assert!(interlace(&z9.zeros, &z10.zeros));
    let q9 = psi_zeros(&SecondKindEvaluator::new(&set, solver.compute_qd(9).unwrap()), 0).unwrap();
    let q10 = psi_zeros(&SecondKindEvaluator::new(&set, solver.compute_qd(10).unwrap()), 0).unwrap();
    assert!(interlace(&q9.zeros, &q10.zeros));
}

#[test]
fn interlace_rejects_bad_orders() {
    let f = |v: &[f64]| v.iter().map(|x| Float::with_val(64, *x)).collect::<Vec<_>>();
    assert!(interlace(&f(&[1.5]), &f(&[1.2, 1.7])));
    assert!(!interlace(&f(&[1.1]), &f(&[1.2, 1.7])));
    assert!(!interlace(&f(&[1.5]), &f(&[1.5])));
}

#[test]
fn second_kind_at_order_zero_is_the_polynomial() {
    let set = setup();
    let q = MopSolver::new(&set, 5).compute_qd(12).unwrap();
    let ev = SecondKindEvaluator::new(&set, q.clone());
    let z = Cplx::from_f64(256, 0.3, 0.9);
    let a = ev.eval_complex(0, &z).unwrap();
    let b = q.eval_complex(&z);
    assert!((&a - &b).abs() < 1e-60);
}

#[test]
fn second_kind_rejects_its_own_interval() {
    let set = setup();
    let q = MopSolver::new(&set, 5).compute_qd(12).unwrap();
    let ev = SecondKindEvaluator::new(&set, q);
    assert!(ev.eval(1, &Float::with_val(256, 1.5)).is_err());
}

#[test]
fn recurrence_holds_for_second_kind_functions() {
    let set = setup();
    let shape = set.shape;
    let qs = MopSolver::new(&set, 10).sequence(25).unwrap();
    let steps = recurrence_sequence(&shape, &qs).unwrap();
    assert!(steps.iter().all(|s| s.a_n > 0));
    let a12 = &steps[12 - 2].a_n;
    assert_eq!(steps[10].n, 12);
    assert!(*a12 > 0);
    let points = [Cplx::from_f64(256, 0.5, 0.7), Cplx::from_f64(256, 3.5, -0.2), Cplx::from_f64(256, -1.0, 0.4)];
    for n in [12u64, 13, 14, 18, 19, 20] {
        // for k ≥ 1 the identity is used only when ℓ(n) < p
        let ks = if shape.ell(n) == 2 { 0..=0 } else { 0..=2 };
        let a = &steps[n as usize - 2].a_n;
        let ev = |m: u64| SecondKindEvaluator::new(&set, qs[m as usize].clone());
        let (e0, e1, em) = (ev(n), ev(n + 1), ev(n - 2));
        for k in ks.clone() {
            for z in &points {
                let lhs = e0.eval_complex(k, z).unwrap();
                let lhs = if shape.ell(n) == 2 && k == 0 { &lhs * z } else { lhs };
                let rhs = &e1.eval_complex(k, z).unwrap() + &em.eval_complex(k, z).unwrap().scale(a);
                let scale = lhs.abs().to_f64().max(1e-30);
                let res = (&lhs - &rhs).abs().to_f64() / scale;
                assert!(res < 1e-40, "n={n} k={k}: {res}");
            }
        }
    }
}

#[test]
fn k_norm_identity_for_valid_pairs() {
    let set = setup();
    let solver = MopSolver::new(&set, 10);
    for (n, k) in [(12, 0), (13, 1), (14, 0)] {
        let c = k_norm_check(&solver, n, k).unwrap();
        assert!(c.residual < 1e-10, "n={n} k={k}: {}", c.residual);
        assert!(c.a_n > 0);
    }
}
