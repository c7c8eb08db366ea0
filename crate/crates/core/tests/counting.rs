use proptest::prelude::*;

use nikstar::counting::{check_counting, check_counting_with, SystemShape};

/// Exponents s admitted by the orthogonality conditions against μ_j,
/// counted by scanning a wide window of integers.
fn brute_m(p: i64, n: i64, j: i64) -> u64 {
    let l = n % (p + 1);
    (-100i64..400)
        .filter(|&s| (p + 1) * s >= l - j && p * (p + 1) * s <= n + p * l - 1 - j * (p + 1))
        .count() as u64
}

fn brute_theta(p: usize, n: u64, k: usize) -> u8 {
    let l = (n % (p as u64 + 1)) as usize;
    match l {
        l if l == p => 1,
        l if l < k => 1,
        l if l > k => 0,
        _ => (k % 2) as u8,
    }
}

#[test]
fn suite_is_clean_for_small_p() {
    for p in 2..=6 {
        let s = SystemShape::new(p).unwrap();
        let w = check_counting(&s);
        assert!(w.is_empty(), "p={p}: {w:?}");
    }
}

#[test]
fn mutated_lambda_produces_witness() {
    let s = SystemShape::new(3).unwrap();
    let w = check_counting_with(&s, |sh, n, k| sh.lambda_closed(n, k) ^ u64::from(n == 5 && k == 1));
    assert!(!w.is_empty());
    assert!(w.iter().any(|w| w.n == 5 && w.k == 1 && w.check == "Lambda closed form"));
}

#[test]
fn p_must_be_at_least_two() {
    assert!(SystemShape::new(0).is_err());
    assert!(SystemShape::new(1).is_err());
}

#[test]
fn index_pairs_for_p_two() {
    let s = SystemShape::new(2).unwrap();
    let got: Vec<(usize, usize)> = (0..6).map(|r| (s.index_pair(r).k, s.index_pair(r).l)).collect();
    assert_eq!(got, vec![(1, 1), (2, 2), (0, 1), (1, 2), (2, 1), (0, 2)]);
    assert_eq!(s.index_pair(-1), s.index_pair(5));
}

#[test]
fn small_orthogonality_counts() {
    let s = SystemShape::new(2).unwrap();
    assert_eq!(s.count_z(9, 0), 3);
    assert_eq!(s.count_z(9, 1), 1);
    for n in 0..3 {
        assert_eq!(s.degree(n), 0);
    }
}

#[test]
fn sign_table_for_p_three() {
    let s = SystemShape::new(3).unwrap();
    // odd l: positive for k ≤ l; even l: positive for k < l
    assert_eq!((0..=3).map(|k| s.sign_phi_inf(1, k)).collect::<Vec<_>>(), vec![1, 1, -1, -1]);
    assert_eq!((0..=3).map(|k| s.sign_phi_inf(2, k)).collect::<Vec<_>>(), vec![1, 1, -1, -1]);
    assert_eq!((0..=3).map(|k| s.sign_phi_inf(3, k)).collect::<Vec<_>>(), vec![1, 1, 1, 1]);
}

proptest! {
    #[test]
    fn m_matches_enumeration(p in 2usize..7, n in 0u64..300, j in 0usize..6) {
        prop_assume!(j < p);
        let s = SystemShape::new(p).unwrap();
        prop_assert_eq!(s.count_m(n, j), brute_m(p as i64, n as i64, j as i64));
    }

    #[test]
    fn z_zero_is_floor(p in 2usize..7, n in 0u64..1000) {
        let s = SystemShape::new(p).unwrap();
        prop_assert_eq!(s.count_z(n, 0), n / (p as u64 + 1));
        prop_assert_eq!(s.degree(n) as u64, s.count_z(n, 0));
    }

    #[test]
    fn z_increments_are_small_and_periodic(p in 2usize..7, n in 0u64..500, k in 0usize..7) {
        prop_assume!(k <= p);
        let s = SystemShape::new(p).unwrap();
        let inc = s.count_z(n + 1, k) as i64 - s.count_z(n, k) as i64;
        prop_assert!((-1..=1).contains(&inc));
        let per = s.period() as u64;
        let inc2 = s.count_z(n + per + 1, k) as i64 - s.count_z(n + per, k) as i64;
        prop_assert_eq!(inc, inc2);
    }

    #[test]
    fn lambda_definition_equals_closed_form(p in 2usize..7, n in 0u64..500, k in 0usize..7) {
        prop_assume!(k <= p);
        let s = SystemShape::new(p).unwrap();
        prop_assert_eq!(s.lambda(n, k), s.lambda_closed(n, k));
    }

    #[test]
    fn theta_matches_case_split(p in 2usize..7, n in 0u64..200, k in 0usize..6) {
        prop_assume!(k < p);
        let s = SystemShape::new(p).unwrap();
        prop_assert_eq!(s.theta(n, k), brute_theta(p, n, k));
    }

    #[test]
    fn epsilon_products(p in 2usize..7, rho in 0i64..200) {
        let s = SystemShape::new(p).unwrap();
        let pair = s.index_pair(rho);
        prop_assert_eq!(s.epsilon(rho, 1), 1);
        for k in 1..=p {
            let prod: i8 = (0..=p as i64).map(|j| s.epsilon(rho - p as i64 + j, k)).product();
            prop_assert_eq!(prod, s.sign_phi_inf(pair.l, k));
            let partial: i8 = (1..=k).map(|j| s.epsilon(rho, j)).product();
            prop_assert_eq!(partial, if k % 2 == 1 { 1 } else { s.epsilon(rho, k) });
        }
    }

    #[test]
    fn index_pair_is_a_bijection_on_a_period(p in 2usize..7) {
        let s = SystemShape::new(p).unwrap();
        let mut seen = std::collections::HashSet::new();
        for rho in 0..s.period() as i64 {
            let ip = s.index_pair(rho);
            prop_assert!(ip.k <= p && (1..=p).contains(&ip.l));
            prop_assert!(seen.insert((ip.k, ip.l)));
            prop_assert_eq!(s.ell(ip.rho as u64), ip.rho % (p + 1));
        }
        prop_assert_eq!(seen.len(), p * (p + 1));
    }

    #[test]
    fn z_is_non_increasing_in_k(p in 2usize..7, n in 0u64..500) {
        let s = SystemShape::new(p).unwrap();
        for k in 1..=p {
            prop_assert!(s.count_z(n, k) <= s.count_z(n, k - 1));
        }
        prop_assert_eq!(s.count_z(n, p), 0);
    }
}
