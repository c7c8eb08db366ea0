use rug::Float;
use serde_json::{json, Value};

use super::Uniformization;
use crate::error::{Error, Result};
use crate::num::{to_decimal, Cplx};

/// φ^{(l)} = λ_l · w/(w − q_l), or λ_p · w for l = p.
#[derive(Clone, Debug)]
pub struct ConformalFamily {
    pub l: usize,
    pub lambda: Float,
    /// q_l, absent for l = p.
    pub pole: Option<Float>,
    pub omega: Float,
    /// ω_{l,j} for j = 0..=p.
    pub omega_j: Vec<Float>,
    /// Sign of the constant Π_k φ_k^{(l)}.
    pub product_sign: i8,
}

impl ConformalFamily {
    pub fn phi_of_w(&self, w: &Cplx) -> Cplx {
        match &self.pole {
            Some(q) => &w.scale(&self.lambda) / &w.sub_real(q),
            None => w.scale(&self.lambda),
        }
    }

    /// Sign of the leading Laurent coefficient of φ_k^{(l)} at ∞.
    pub fn sign_at_infinity(&self, k: usize) -> i8 {
        if self.omega_j[k] > 0 {
            1
        } else {
            -1
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "l": self.l,
            "lambda": to_decimal(&self.lambda),
            "omega": to_decimal(&self.omega),
            "omega_j": self.omega_j.iter().map(to_decimal).collect::<Vec<_>>(),
            "product_sign": self.product_sign,
        })
    }
}

/// Scale λ_l fixed by |Π_k φ_k| = 1 and ω_l > 0, in closed form from the
/// coefficients of R.
pub fn normalize_family(u: &Uniformization, l: usize) -> Result<ConformalFamily> {
    let p = u.p;
    if l == 0 || l > p {
        return Err(Error::Config(format!("family index {l} outside 1..={p}")));
    }
    let prec = u.prec();
    let m = &u.map;
    let q = &m.poles;
    let mut n0 = m.gamma.clone();
    for qj in q {
        n0 *= Float::with_val(prec, -qj);
    }
    let k_const = if l < p {
        let ql = &q[l - 1];
        let mut nl = Float::with_val(prec, &m.residues[l - 1] * ql);
        for (j, qj) in q.iter().enumerate() {
            if j != l - 1 {
                nl *= Float::with_val(prec, ql - qj);
            }
        }
        n0 / nl
    } else {
        let s = if (p + 1).is_multiple_of(2) { 1 } else { -1 };
        n0 * s / &m.alpha
    };
    if k_const.is_zero() || !k_const.is_finite() {
        return Err(Error::Normalization(format!("degenerate branch product for l={l}")));
    }
    let mag = Float::with_val(prec, &*k_const.as_abs()).ln() / (p as u32 + 1);
    let mut lambda = (-mag).exp();
    let omega_raw = if l < p {
        -Float::with_val(prec, &lambda * &m.gamma) / &q[l - 1]
    } else {
        Float::with_val(prec, &lambda * &m.gamma)
    };
    if omega_raw < 0 {
        lambda = -lambda;
    }
    let omega = if l < p { -Float::with_val(prec, &lambda * &m.gamma) / &q[l - 1] } else { Float::with_val(prec, &lambda * &m.gamma) };
    let mut omega_j = Vec::with_capacity(p + 1);
    for j in 0..=p {
        let v = if j == 0 {
            omega.clone()
        } else if j == l {
            if l < p {
                Float::with_val(prec, &lambda * &q[l - 1]) / &m.residues[l - 1]
            } else {
                Float::with_val(prec, &lambda / &m.alpha)
            }
        } else if j == p {
            lambda.clone()
        } else if l < p {
            Float::with_val(prec, &lambda * &q[j - 1]) / Float::with_val(prec, &q[j - 1] - &q[l - 1])
        } else {
            Float::with_val(prec, &lambda * &q[j - 1])
        };
        omega_j.push(v);
    }
    let prod = Float::with_val(prec, rug::ops::Pow::pow(&lambda, (p + 1) as u32)) * &k_const;
    let product_sign = if prod > 0 { 1 } else { -1 };
    Ok(ConformalFamily { l, lambda, pole: if l < p { Some(q[l - 1].clone()) } else { None }, omega, omega_j, product_sign })
}

/// Leading Laurent coefficients of every branch at ∞ estimated from
/// samples on a circle of the given radius.
#[derive(Clone, Debug)]
pub struct LaurentFit {
    pub radius: f64,
    pub omega_j: Vec<Float>,
}

/// Four-point trapezoidal fit of the leading coefficient of each branch:
/// z·φ_0, φ_j (j ≠ 0, l) and φ_l/z.
pub fn laurent_fit(u: &Uniformization, fam: &ConformalFamily, radius: f64) -> Result<LaurentFit> {
    let prec = u.prec();
    let p = u.p;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let mut acc = vec![Cplx::zero(prec); p + 1];
    let r = Float::with_val(prec, radius);
    for m in 0..4u32 {
        let theta = Float::with_val(prec, &pi * (2 * m + 1)) / 4u32;
        let z = Cplx::new(Float::with_val(prec, theta.cos_ref()) * &r, Float::with_val(prec, theta.sin_ref()) * &r);
        let roots = u.sheet_roots(&z)?;
        for (j, w) in roots.iter().enumerate() {
            let phi = fam.phi_of_w(w);
            let v = if j == 0 {
                &phi * &z
            } else if j == fam.l {
                &phi / &z
            } else {
                phi
            };
            acc[j] = &acc[j] + &v;
        }
    }
    Ok(LaurentFit { radius, omega_j: acc.into_iter().map(|c| c.re / 4u32).collect() })
}
