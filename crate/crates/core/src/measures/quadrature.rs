//! Gauss–Jacobi rules in extended precision.
//!
//! Nodes are seeded from binary64 eigenvalues of the Jacobi matrix (Sturm
//! bisection) and polished by Newton's method on the three-term recurrence
//! at full precision.

use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Rule on [-1, 1] for the weight (1−x)^alpha (1+x)^beta.
#[derive(Clone, Debug)]
pub struct GaussRule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

/// Monic recurrence p_{j+1} = (x − a_j) p_j − b_j p_{j−1} and total mass μ0.
pub fn jacobi_recurrence(n: usize, alpha: &Float, beta: &Float, prec: u32) -> (Vec<Float>, Vec<Float>, Float) {
    let f = |v: f64| Float::with_val(prec, v);
    let ab = Float::with_val(prec, alpha + beta);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let b2_a2 = Float::with_val(prec, beta.square_ref()) - Float::with_val(prec, alpha.square_ref());
    for j in 0..n {
        if j == 0 {
            a.push(Float::with_val(prec, beta - alpha) / (ab.clone() + 2u32));
        } else {
            let s = Float::with_val(prec, &ab + 2 * j as u32);
            let den = Float::with_val(prec, &s * (s.clone() + 2u32));
            a.push(Float::with_val(prec, &b2_a2 / den));
        }
    }
    b.push(f(0.0));
    for j in 1..n {
        if j == 1 {
            let num = (alpha.clone() + 1u32) * (beta.clone() + 1u32) * 4u32;
            let s: Float = ab.clone() + 2u32;
            let den = Float::with_val(prec, s.square_ref()) * (ab.clone() + 3u32);
            b.push(num / den);
        } else {
            let jf = f(j as f64);
            let s = Float::with_val(prec, &ab + 2 * j as u32);
            let num = Float::with_val(prec, &jf * 4u32)
                * Float::with_val(prec, &jf + alpha)
                * Float::with_val(prec, &jf + beta)
                * Float::with_val(prec, &jf + &ab);
            let den = Float::with_val(prec, s.square_ref()) * (s.clone() + 1u32) * (s.clone() - 1u32);
            b.push(num / den);
        }
    }
    let two = f(2.0);
    let mu0 = two.pow(Float::with_val(prec, &ab + 1u32))
        * (alpha.clone() + 1u32).gamma()
        * (beta.clone() + 1u32).gamma()
        / (ab.clone() + 2u32).gamma();
    (a, b, mu0)
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below x.
fn sturm_count(diag: &[f64], off2: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0f64;
    for i in 0..diag.len() {
        let o = if i == 0 { 0.0 } else { off2[i] / q };
        q = diag[i] - x - o;
        if q == 0.0 {
            q = f64::EPSILON * (diag[i].abs() + 1.0) * 1e-3;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn seed_nodes(a: &[Float], b: &[Float]) -> Vec<f64> {
    let n = a.len();
    let diag: Vec<f64> = a.iter().map(Float::to_f64).collect();
    let off2: Vec<f64> = b.iter().map(Float::to_f64).collect();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (mut lo, mut hi) = (-1.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if sturm_count(&diag, &off2, mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(0.5 * (lo + hi));
    }
    out
}

/// p_n(x) and p_n'(x) for the monic recurrence.
fn eval_monic(a: &[Float], b: &[Float], x: &Float) -> (Float, Float) {
    let prec = x.prec();
    let mut p0 = Float::with_val(prec, 0);
    let mut p1 = Float::with_val(prec, 1);
    let mut d0 = Float::with_val(prec, 0);
    let mut d1 = Float::with_val(prec, 0);
    for j in 0..a.len() {
        let xa = Float::with_val(prec, x - &a[j]);
        let p2 = Float::with_val(prec, &xa * &p1) - Float::with_val(prec, &b[j] * &p0);
        let d2 = Float::with_val(prec, &xa * &d1) + &p1 - Float::with_val(prec, &b[j] * &d0);
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

pub fn gauss_jacobi(n: usize, alpha: &Float, beta: &Float, prec: u32) -> Result<GaussRule> {
    if n == 0 {
        return Err(Error::Quadrature("rule needs at least one node".into()));
    }
    if !(*alpha > -1 && *beta > -1) {
        return Err(Error::Quadrature("Jacobi exponents must exceed -1".into()));
    }
    let wp = prec + 32;
    let (a, b, mu0) = jacobi_recurrence(n, &Float::with_val(wp, alpha), &Float::with_val(wp, beta), wp);
    let seeds = seed_nodes(&a, &b);
    let sqrt_b: Vec<Float> = b.iter().map(|v| Float::with_val(wp, v.sqrt_ref())).collect();
    let tol = Float::with_val(wp, 2).pow(-(prec as i32) - 8);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for (i, s) in seeds.iter().enumerate() {
        let mut x = Float::with_val(wp, *s);
        let mut converged = false;
        for _ in 0..60 {
            let (pv, dv) = eval_monic(&a, &b, &x);
            if dv.is_zero() {
                break;
            }
            let dx = Float::with_val(wp, &pv / &dv);
            x -= &dx;
            if dx.abs() <= tol {
                converged = true;
                break;
            }
        }
        if !converged || !x.is_finite() || x.clone().abs() >= 1 {
            return Err(Error::Quadrature(format!("Newton refinement failed for node {i} of {n}")));
        }
        let mut q0 = Float::with_val(wp, 0);
        let mut q1 = Float::with_val(wp, 1);
        let mut sum = Float::with_val(wp, 1);
        for j in 0..n - 1 {
            let t = Float::with_val(wp, &x - &a[j]) * &q1;
            let u = if j == 0 { Float::with_val(wp, 0) } else { Float::with_val(wp, &sqrt_b[j] * &q0) };
            let q2 = (t - u) / &sqrt_b[j + 1];
            sum += Float::with_val(wp, q2.square_ref());
            q0 = q1;
            q1 = q2;
        }
        weights.push(Float::with_val(prec, &mu0 / &sum));
        nodes.push(Float::with_val(prec, &x));
    }
    for w in nodes.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::Quadrature("nodes are not strictly increasing".into()));
        }
    }
    Ok(GaussRule { nodes, weights })
}
