//! Reduced multiple orthogonal polynomials Q_d, recurrence coefficients,
//! functions of the second kind and the K-norm identity.

mod knorm;
mod psi;

use rayon::prelude::*;
use rug::Float;
use serde_json::{json, Value};

pub use knorm::{k_norm, k_norm_check};
pub use psi::{interlace, psi_zeros, SecondKindEvaluator, ZeroSet};

use crate::counting::SystemShape;
use crate::error::{Error, Result};
use crate::linalg::solve_full_pivot;
use crate::measures::MeasureSet;
use crate::num::{to_decimal, Cplx};

/// Affine map of an interval onto [−1, 1] plus Chebyshev evaluation on it.
#[derive(Clone, Debug)]
pub struct ChebyshevFrame {
    pub a: Float,
    pub b: Float,
    slope: Float,
    shift: Float,
}

impl ChebyshevFrame {
    pub fn new(a: &Float, b: &Float) -> Self {
        let prec = a.prec();
        let width = Float::with_val(prec, b - a);
        let slope = Float::with_val(prec, 2u32) / &width;
        let shift = -Float::with_val(prec, a + b) / width;
        ChebyshevFrame { a: a.clone(), b: b.clone(), slope, shift }
    }

    fn x(&self, t: &Float) -> Float {
        Float::with_val(t.prec(), &self.slope * t) + &self.shift
    }

    /// T_0 .. T_m at the mapped point.
    pub fn basis(&self, t: &Float, m: usize) -> Vec<Float> {
        let prec = t.prec();
        let x = self.x(t);
        let mut out = Vec::with_capacity(m + 1);
        out.push(Float::with_val(prec, 1));
        if m >= 1 {
            out.push(x.clone());
        }
        for k in 2..=m {
            let v = Float::with_val(prec, &x * &out[k - 1]) * 2u32 - &out[k - 2];
            out.push(v);
        }
        out
    }

    pub fn clenshaw(&self, c: &[Float], t: &Float) -> Float {
        let prec = t.prec().max(c.first().map(Float::prec).unwrap_or(0));
        let x = self.x(t);
        let two_x = Float::with_val(prec, &x * 2u32);
        let mut b1 = Float::with_val(prec, 0);
        let mut b2 = Float::with_val(prec, 0);
        for ck in c.iter().skip(1).rev() {
            let b0 = Float::with_val(prec, &two_x * &b1) - &b2 + ck;
            b2 = std::mem::replace(&mut b1, b0);
        }
        match c.first() {
            None => Float::with_val(prec, 0),
            Some(c0) => Float::with_val(prec, &x * &b1) - &b2 + c0,
        }
    }

    pub fn clenshaw_complex(&self, c: &[Float], z: &Cplx) -> Cplx {
        let prec = z.prec();
        let x = Cplx::new(Float::with_val(prec, &self.slope * &z.re) + &self.shift, Float::with_val(prec, &self.slope * &z.im));
        let two_x = x.scale(&Float::with_val(prec, 2));
        let mut b1 = Cplx::zero(prec);
        let mut b2 = Cplx::zero(prec);
        for ck in c.iter().skip(1).rev() {
            let b0 = (&(&two_x * &b1) - &b2).add_real(ck);
            b2 = std::mem::replace(&mut b1, b0);
        }
        match c.first() {
            None => Cplx::zero(prec),
            Some(c0) => (&(&x * &b1) - &b2).add_real(c0),
        }
    }

    /// Leading monomial coefficient of T_d composed with the frame map.
    pub fn leading(&self, d: usize) -> Float {
        let prec = self.a.prec();
        if d == 0 {
            return Float::with_val(prec, 1);
        }
        let s = Float::with_val(prec, rug::ops::Pow::pow(&self.slope, d as u32));
        s << (d as i32 - 1)
    }

    /// Coefficients of τ·Σ c_m T_m in the same basis.
    pub fn times_t(&self, c: &[Float]) -> Vec<Float> {
        let prec = self.a.prec();
        let half_width = Float::with_val(prec, 1) / &self.slope;
        let mid = -Float::with_val(prec, &self.shift / &self.slope);
        let mut out = vec![Float::with_val(prec, 0); c.len() + 1];
        for (m, cm) in c.iter().enumerate() {
            out[m] += Float::with_val(prec, cm * &mid);
            let h = Float::with_val(prec, cm * &half_width);
            if m == 0 {
                out[1] += &h;
            } else {
                let half = Float::with_val(prec, &h / 2u32);
                out[m + 1] += &half;
                out[m - 1] += half;
            }
        }
        out
    }

    /// Monomial coefficients (ascending in τ) of Σ c_m T_m.
    pub fn to_monomial(&self, c: &[Float]) -> Vec<Float> {
        let prec = self.a.prec();
        let n = c.len();
        let mut out = vec![Float::with_val(prec, 0); n.max(1)];
        let mut prev: Vec<Float> = vec![Float::with_val(prec, 1)];
        let mut cur: Vec<Float> = vec![self.shift.clone(), self.slope.clone()];
        for (m, cm) in c.iter().enumerate() {
            let basis = if m == 0 { &prev } else { &cur };
            for (i, v) in basis.iter().enumerate() {
                out[i] += Float::with_val(prec, cm * v);
            }
            if m >= 1 {
                let mut next = vec![Float::with_val(prec, 0); cur.len() + 1];
                for (i, v) in cur.iter().enumerate() {
                    next[i] += Float::with_val(prec, v * &self.shift) * 2u32;
                    next[i + 1] += Float::with_val(prec, v * &self.slope) * 2u32;
                }
                for (i, v) in prev.iter().enumerate() {
                    next[i] -= v;
                }
                prev = std::mem::replace(&mut cur, next);
            }
        }
        out
    }
}

/// Monic Q_d in the reduced variable τ = z^{p+1}.
#[derive(Clone, Debug)]
pub struct MonicPolynomial {
    pub n: u64,
    pub ell: usize,
    pub d: usize,
    /// Ascending monomial coefficients; the last one is exactly 1.
    pub coeffs: Vec<Float>,
    /// Coefficients in the Chebyshev basis of Δ_0.
    pub cheb: Vec<Float>,
    pub frame: ChebyshevFrame,
}

impl MonicPolynomial {
    pub fn prec(&self) -> u32 {
        self.frame.a.prec()
    }

    pub fn eval(&self, t: &Float) -> Float {
        self.frame.clenshaw(&self.cheb, t)
    }

    pub fn eval_complex(&self, z: &Cplx) -> Cplx {
        self.frame.clenshaw_complex(&self.cheb, z)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "ell": self.ell,
            "d": self.d,
            "precision_bits": self.prec(),
            "coefficients": self.coeffs.iter().map(to_decimal).collect::<Vec<_>>(),
        })
    }
}

/// Relative residual of one orthogonality condition.
#[derive(Clone, Debug)]
pub struct OrthogonalityResidual {
    pub j: usize,
    pub s: i64,
    pub relative: Float,
}

/// Precomputed Chebyshev Gram data for the measures μ_{0,j}.
pub struct MopSolver<'a> {
    pub set: &'a MeasureSet,
    pub frame: ChebyshevFrame,
    d_max: usize,
    /// gram[j][e][i][m] = ∫ τ^e T_i T_m dμ_{0,j}
    gram: Vec<[Vec<Vec<Float>>; 2]>,
}

impl<'a> MopSolver<'a> {
    pub fn new(set: &'a MeasureSet, d_max: usize) -> Self {
        let base = set.base(0);
        let frame = ChebyshevFrame::new(&base.support.0, &base.support.1);
        let prec = set.prec;
        let p = set.shape.p();
        let values: Vec<Vec<Float>> = base.nodes.par_iter().map(|t| frame.basis(t, d_max)).collect();
        let gram = (0..p)
            .into_par_iter()
            .map(|j| {
                let mu = set.nested(0, j);
                let mut g0 = vec![vec![Float::with_val(prec, 0); d_max + 1]; d_max + 1];
                let mut g1 = g0.clone();
                for ((t, w), vals) in mu.nodes.iter().zip(&mu.weights).zip(&values) {
                    let wt = Float::with_val(prec, w * t);
                    for i in 0..=d_max {
                        let wi = Float::with_val(prec, w * &vals[i]);
                        let wti = Float::with_val(prec, &wt * &vals[i]);
                        for m in i..=d_max {
                            g0[i][m] += Float::with_val(prec, &wi * &vals[m]);
                            g1[i][m] += Float::with_val(prec, &wti * &vals[m]);
                        }
                    }
                }
                for g in [&mut g0, &mut g1] {
                    for i in 0..=d_max {
                        for m in 0..i {
                            g[i][m] = g[m][i].clone();
                        }
                    }
                }
                [g0, g1]
            })
            .collect();
        MopSolver { set, frame, d_max, gram }
    }

    pub fn shape(&self) -> &SystemShape {
        &self.set.shape
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    /// Solves the orthogonality system for Q_d with d = Z(n,0).
    pub fn compute_qd(&self, n: u64) -> Result<MonicPolynomial> {
        let shape = self.shape();
        let prec = self.set.prec;
        let d = shape.degree(n);
        if d > self.d_max {
            return Err(Error::Config(format!("degree {d} exceeds the prepared maximum {}", self.d_max)));
        }
        let lead = Float::with_val(prec, 1) / self.frame.leading(d);
        let mut rows = Vec::with_capacity(d);
        let mut rhs = Vec::with_capacity(d);
        for j in 0..shape.p() {
            let (lo, hi) = shape.exponent_range(n, j);
            if hi < lo {
                continue;
            }
            let e = lo as usize;
            debug_assert!(e <= 1);
            let g = &self.gram[j][e];
            let m = (hi - lo + 1) as usize;
            if rows.len() + m > d {
                return Err(Error::NotSquare { n, rows: rows.len() + m, degree: d });
            }
            for i in 0..m {
                rows.push(g[i][..d].to_vec());
                rhs.push(-Float::with_val(prec, &g[i][d] * &lead));
            }
        }
        if rows.len() != d || d as u64 != shape.count_z(n, 0) {
            return Err(Error::NotSquare { n, rows: rows.len(), degree: d });
        }
        let mut cheb = solve_full_pivot(rows, rhs)?;
        cheb.push(lead);
        let mut coeffs = self.frame.to_monomial(&cheb);
        coeffs.truncate(d + 1);
        coeffs[d] = Float::with_val(prec, 1);
        let q = MonicPolynomial { n, ell: shape.ell(n), d, coeffs, cheb, frame: self.frame.clone() };
        let tol = Float::with_val(prec, 1) >> (prec as i32 / 4);
        for r in self.orthogonality_residuals(&q) {
            if r.relative > tol {
                return Err(Error::Residual {
                    what: format!("orthogonality of Q for n={n}, j={}, s={}", r.j, r.s),
                    residual: r.relative.to_f64(),
                    tolerance: tol.to_f64(),
                });
            }
        }
        Ok(q)
    }

    /// All Q for n = 0..=n_max, computed in parallel.
    pub fn sequence(&self, n_max: u64) -> Result<Vec<MonicPolynomial>> {
        (0..=n_max).into_par_iter().map(|n| self.compute_qd(n)).collect()
    }

    /// |∫Qτ^s dμ_{0,j}| / ∫|Qτ^s| d|μ_{0,j}| over every prescribed (j, s).
    pub fn orthogonality_residuals(&self, q: &MonicPolynomial) -> Vec<OrthogonalityResidual> {
        let shape = self.shape();
        let prec = self.set.prec;
        let base = self.set.base(0);
        let qv: Vec<Float> = base.nodes.iter().map(|t| q.eval(t)).collect();
        let mut out = Vec::new();
        for j in 0..shape.p() {
            let mu = self.set.nested(0, j);
            let (lo, hi) = shape.exponent_range(q.n, j);
            for s in lo..=hi {
                let mut num = Float::with_val(prec, 0);
                let mut den = Float::with_val(prec, 0);
                for ((t, w), v) in mu.nodes.iter().zip(&mu.weights).zip(&qv) {
                    let term = Float::with_val(prec, rug::ops::Pow::pow(t, s as i32)) * w * v;
                    den += &*term.as_abs();
                    num += term;
                }
                out.push(OrthogonalityResidual { j, s, relative: num.abs() / den });
            }
        }
        out
    }
}

pub fn compute_qd(set: &MeasureSet, n: u64) -> Result<MonicPolynomial> {
    MopSolver::new(set, set.shape.degree(n)).compute_qd(n)
}

/// a_n from Q^{[n−p]}, Q^{[n]}, Q^{[n+1]}, with full-vector validation.
#[derive(Clone, Debug)]
pub struct RecurrenceStep {
    pub n: u64,
    pub a_n: Float,
    pub residual: Float,
}

pub fn recurrence_coefficient(
    shape: &SystemShape,
    q_prev: &MonicPolynomial,
    q_n: &MonicPolynomial,
    q_next: &MonicPolynomial,
) -> Result<RecurrenceStep> {
    let n = q_n.n;
    let p = shape.p() as u64;
    if n < p || q_prev.n + p != n || q_next.n != n + 1 {
        return Err(Error::Config(format!("recurrence needs indices n-p, n, n+1 with n >= p (n = {n})")));
    }
    let prec = q_n.prec();
    let lhs: Vec<Float> = if q_n.ell < shape.p() {
        q_n.cheb.clone()
    } else {
        q_n.frame.times_t(&q_n.cheb)
    };
    let len = lhs.len().max(q_next.cheb.len());
    let mut diff = vec![Float::with_val(prec, 0); len];
    for (i, v) in lhs.iter().enumerate() {
        diff[i] += v;
    }
    for (i, v) in q_next.cheb.iter().enumerate() {
        diff[i] -= v;
    }
    let dp = q_prev.d;
    let a_n = Float::with_val(prec, &diff[dp] / &q_prev.cheb[dp]);
    let lhs_mono = q_n.frame.to_monomial(&diff);
    let mut res = Float::with_val(prec, 0);
    for (i, v) in lhs_mono.iter().enumerate() {
        let mut r = v.clone();
        if let Some(c) = q_prev.coeffs.get(i) {
            r -= Float::with_val(prec, &a_n * c);
        }
        res = res.max(&r.abs());
    }
    let norm = q_n.coeffs.iter().fold(Float::with_val(prec, 0), |m, c| m.max(&Float::with_val(prec, &*c.as_abs())));
    let residual = res / norm;
    let tol = Float::with_val(prec, 1) >> (prec as i32 / 4);
    if residual > tol {
        return Err(Error::Residual { what: format!("recurrence at n={n}"), residual: residual.to_f64(), tolerance: tol.to_f64() });
    }
    if a_n <= 0 {
        return Err(Error::NonPositive { n, value: a_n.to_f64() });
    }
    Ok(RecurrenceStep { n, a_n, residual })
}

/// a_n for every n in p..=n_max, given Q for 0..=n_max+1.
pub fn recurrence_sequence(shape: &SystemShape, qs: &[MonicPolynomial]) -> Result<Vec<RecurrenceStep>> {
    let p = shape.p();
    if qs.len() < p + 2 {
        return Ok(Vec::new());
    }
    (p..qs.len() - 1).into_par_iter().map(|n| recurrence_coefficient(shape, &qs[n - p], &qs[n], &qs[n + 1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chebyshev_monomial_conversion_agrees_with_clenshaw() {
        let prec = 200;
        let frame = ChebyshevFrame::new(&Float::with_val(prec, 1), &Float::with_val(prec, 2));
        let c: Vec<Float> = (0..7).map(|i| Float::with_val(prec, i as f64 * 0.37 - 1.0)).collect();
        let mono = frame.to_monomial(&c);
        for t in [1.0, 1.3, 1.77, 2.0, -0.5] {
            let t = Float::with_val(prec, t);
            let direct = mono.iter().rev().fold(Float::with_val(prec, 0), |acc, m| acc * &t + m);
            let cl = frame.clenshaw(&c, &t);
            assert!(Float::with_val(prec, &direct - &cl).abs() < 1e-50);
            let tc = frame.times_t(&c);
            let lhs = frame.clenshaw(&tc, &t);
            assert!(Float::with_val(prec, lhs - cl * &t).abs() < 1e-50);
        }
        let lead = frame.leading(6) * &c[6];
        assert!(Float::with_val(prec, &lead - &mono[6]).abs() < 1e-40);
    }
}
