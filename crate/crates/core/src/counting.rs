//! Exact integer combinatorics of the orthogonality conditions.
//!
//! Everything here is integer arithmetic. Floors and ceilings of rationals
//! use Euclidean division so that negative numerators round the
//! mathematical way.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SystemShape {
    p: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndexPair {
    pub rho: usize,
    pub k: usize,
    pub l: usize,
}

fn floor_div(a: i64, b: i64) -> i64 {
    a.div_euclid(b)
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

impl SystemShape {
    pub fn new(p: usize) -> Result<Self> {
        if p < 2 {
            return Err(Error::Config(format!("p must be at least 2, got {p}")));
        }
        Ok(SystemShape { p })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    /// p(p+1), the period of the ratio limits.
    pub fn period(&self) -> usize {
        self.p * (self.p + 1)
    }

    pub fn reduce_rho(&self, rho: i64) -> usize {
        rho.rem_euclid(self.period() as i64) as usize
    }

    /// ℓ(n) = n mod (p+1).
    pub fn ell(&self, n: u64) -> usize {
        (n % (self.p as u64 + 1)) as usize
    }

    /// Degree of the reduced polynomial for star index n.
    pub fn degree(&self, n: u64) -> usize {
        (n / (self.p as u64 + 1)) as usize
    }

    pub fn index_pair(&self, rho: i64) -> IndexPair {
        let p = self.p;
        let r = self.reduce_rho(rho);
        IndexPair { rho: r, k: (r + 1) % (p + 1), l: r % p + 1 }
    }

    /// Inclusive range of exponents s in the orthogonality conditions for
    /// measure j; empty when lo > hi.
    pub fn exponent_range(&self, n: u64, j: usize) -> (i64, i64) {
        let p = self.p as i64;
        let l = self.ell(n) as i64;
        let j = j as i64;
        let lo = ceil_div(l - j, p + 1);
        let hi = floor_div(n as i64 + p * l - 1 - j * (p + 1), p * (p + 1));
        (lo, hi)
    }

    pub fn count_m(&self, n: u64, j: usize) -> u64 {
        assert!(j < self.p, "j out of range");
        let (lo, hi) = self.exponent_range(n, j);
        (hi - lo + 1).max(0) as u64
    }

    pub fn count_z(&self, n: u64, k: usize) -> u64 {
        assert!(k <= self.p, "k out of range");
        (k..self.p).map(|j| self.count_m(n, j)).sum()
    }

    pub fn lambda(&self, n: u64, k: usize) -> u64 {
        self.count_z(n + self.p as u64 + 1, k) - self.count_z(n, k)
    }

    pub fn lambda_closed(&self, n: u64, k: usize) -> u64 {
        if ((n % self.p as u64) as usize) < k {
            0
        } else {
            1
        }
    }

    pub fn theta(&self, n: u64, k: usize) -> u8 {
        assert!(k < self.p, "k out of range");
        let l = self.ell(n);
        if l == self.p {
            1
        } else if l < k {
            1
        } else if l > k {
            0
        } else if k % 2 == 1 {
            1
        } else {
            0
        }
    }

    pub fn epsilon(&self, rho: i64, k: usize) -> i8 {
        assert!((1..=self.p).contains(&k), "k out of range");
        let r = self.reduce_rho(rho) as u64;
        let m = 2 * (k - 1).div_ceil(2);
        let e = self.count_z(r + 1, m) as i64 - self.count_z(r, m) as i64 + self.theta(r, k - 1) as i64;
        if e.rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    /// Sign of the Laurent leading coefficient of φ_k^{(l)} at infinity.
    pub fn sign_phi_inf(&self, l: usize, k: usize) -> i8 {
        assert!((1..=self.p).contains(&l) && k <= self.p);
        let positive = if l % 2 == 1 { k <= l } else { k < l };
        if positive {
            1
        } else {
            -1
        }
    }

    /// Sign of Π_{ν=k+1}^{p} φ_ν^{(l)}(∞).
    pub fn sign_f(&self, l: usize, k: usize) -> i8 {
        let e = if k < l { self.p + 1 } else { self.p + k };
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// ξ_k^{(ρ)} carries a factor z exactly when ρ ≡ k−1 mod (p+1).
    pub fn xi_has_z(&self, rho: i64, k: usize) -> bool {
        self.index_pair(rho).k == k % (self.p + 1)
    }
}

/// A failed counting invariant with the indices that break it.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub p: usize,
    pub check: &'static str,
    pub n: i64,
    pub k: usize,
}

/// Exhaustive check of every counting invariant over two periods.
pub fn check_counting(shape: &SystemShape) -> Vec<Witness> {
    check_counting_with(shape, |s, n, k| s.lambda_closed(n, k))
}

/// Same as [`check_counting`] with a caller-supplied closed form for Λ.
pub fn check_counting_with<F>(shape: &SystemShape, lambda_closed: F) -> Vec<Witness>
where
    F: Fn(&SystemShape, u64, usize) -> u64,
{
    let p = shape.p();
    let per = shape.period() as u64;
    let top = 2 * per;
    let mut out = Vec::new();
    let mut fail = |check: &'static str, n: i64, k: usize| out.push(Witness { p, check, n, k });

    for n in 0..=top {
        if shape.count_z(n, 0) != n / (p as u64 + 1) {
            fail("Z(n,0) = floor(n/(p+1))", n as i64, 0);
        }
        let total: u64 = (0..p).map(|j| shape.count_m(n, j)).sum();
        if total != shape.count_z(n, 0) {
            fail("sum of M_j equals Z(n,0)", n as i64, 0);
        }
        for k in 0..=p {
            let lam = shape.lambda(n, k);
            if lam != lambda_closed(shape, n, k) {
                fail("Lambda closed form", n as i64, k);
            }
            let alt: i64 = (0..=p as u64)
                .map(|j| shape.count_z(n + j + 1, k) as i64 - shape.count_z(n + j, k) as i64)
                .sum();
            if alt != lam as i64 {
                fail("Lambda telescoped form", n as i64, k);
            }
            let inc = shape.count_z(n + 1, k) as i64 - shape.count_z(n, k) as i64;
            if !(-1..=1).contains(&inc) {
                fail("Z increment in {-1,0,1}", n as i64, k);
            }
            let inc_next = shape.count_z(n + per + 1, k) as i64 - shape.count_z(n + per, k) as i64;
            if inc != inc_next {
                fail("Z increment period p(p+1)", n as i64, k);
            }
            if k > 0 && k < p && shape.count_z(n, k) > shape.count_z(n, k - 1) {
                fail("Z non-increasing in k", n as i64, k);
            }
        }
        for k in 0..p {
            if shape.theta(n, k) != shape.theta(n + p as u64 + 1, k) {
                fail("theta period p+1", n as i64, k);
            }
        }
    }
    for k in 1..=p {
        let s: u64 = (0..=p as u64).map(|n| shape.theta(n, k - 1) as u64).sum();
        if s % 2 != 1 {
            fail("theta sum odd", 0, k);
        }
    }
    for rho in 0..top as i64 {
        let pair = shape.index_pair(rho);
        for k in 1..=p {
            let prod: i8 = (0..=p as i64).map(|j| shape.epsilon(rho - p as i64 + j, k)).product();
            if prod * shape.sign_phi_inf(pair.l, k) != 1 {
                fail("epsilon product vs sign table", rho, k);
            }
            let partial: i8 = (1..=k).map(|j| shape.epsilon(rho, j)).product();
            let expect = if k % 2 == 1 { 1 } else { shape.epsilon(rho, k) };
            if partial != expect {
                fail("epsilon partial products", rho, k);
            }
        }
        if shape.epsilon(rho, 1) != 1 {
            fail("epsilon_1 = 1", rho, 1);
        }
        for k in 0..p {
            let from_table: i8 = (k + 1..=p).map(|nu| shape.sign_phi_inf(pair.l, nu)).product();
            if from_table != shape.sign_f(pair.l, k) {
                fail("sign of f_k vs sign table", rho, k);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn enumerate_m(shape: &SystemShape, n: u64, j: usize) -> u64 {
        let p = shape.p() as i64;
        let l = shape.ell(n) as i64;
        let j = j as i64;
        (-50i64..200)
            .filter(|&s| {
                let lo_ok = s * (p + 1) >= l - j;
                let hi_ok = s * p * (p + 1) <= n as i64 + p * l - 1 - j * (p + 1);
                lo_ok && hi_ok
            })
            .count() as u64
    }

    #[test]
    fn count_m_matches_enumeration() {
        for p in 2..=5 {
            let shape = SystemShape::new(p).unwrap();
            for n in 0..300 {
                for j in 0..p {
                    assert_eq!(shape.count_m(n, j), enumerate_m(&shape, n, j), "p={p} n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn rejects_small_p() {
        assert!(SystemShape::new(1).is_err());
        assert!(SystemShape::new(0).is_err());
    }

    #[test]
    fn ceiling_of_negative_fraction() {
        assert_eq!(ceil_div(-1, 3), 0);
        assert_eq!(ceil_div(-3, 3), -1);
        assert_eq!(ceil_div(1, 3), 1);
        assert_eq!(floor_div(-1, 3), -1);
    }

    #[test]
    fn index_pair_is_unique_solution() {
        for p in 2..=5usize {
            let shape = SystemShape::new(p).unwrap();
            for rho in 0..shape.period() {
                let ip = shape.index_pair(rho as i64);
                let sols: Vec<(usize, usize)> = (0..=p)
                    .flat_map(|k| (1..=p).map(move |l| (k, l)))
                    .filter(|&(k, l)| {
                        (rho as i64 - (k as i64 - 1)).rem_euclid(p as i64 + 1) == 0
                            && (rho as i64 - (l as i64 - 1)).rem_euclid(p as i64) == 0
                    })
                    .collect();
                assert_eq!(sols, vec![(ip.k, ip.l)]);
            }
        }
    }
}
