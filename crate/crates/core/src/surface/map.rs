use num_complex::Complex64;
use rug::Float;

use crate::num::Cplx;

/// R(w) = αw + β + γ/w + Σ r_j/(w − q_j).
#[derive(Clone, Debug)]
pub struct RationalMap {
    pub alpha: Float,
    pub beta: Float,
    pub gamma: Float,
    pub poles: Vec<Float>,
    pub residues: Vec<Float>,
}

impl RationalMap {
    pub fn prec(&self) -> u32 {
        self.alpha.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        let f = |x: &Float| Float::with_val(prec, x);
        RationalMap {
            alpha: f(&self.alpha),
            beta: f(&self.beta),
            gamma: f(&self.gamma),
            poles: self.poles.iter().map(f).collect(),
            residues: self.residues.iter().map(f).collect(),
        }
    }

    /// R, R', R'' at a real point.
    pub fn eval3(&self, w: &Float) -> (Float, Float, Float) {
        let prec = w.prec().max(self.prec());
        let inv = Float::with_val(prec, w.recip_ref());
        let inv2 = Float::with_val(prec, inv.square_ref());
        let mut r = Float::with_val(prec, &self.alpha * w) + &self.beta + Float::with_val(prec, &self.gamma * &inv);
        let mut r1 = Float::with_val(prec, &self.alpha) - Float::with_val(prec, &self.gamma * &inv2);
        let mut r2 = Float::with_val(prec, &self.gamma * &inv2) * &inv * 2u32;
        for (q, c) in self.poles.iter().zip(&self.residues) {
            let d = Float::with_val(prec, w - q).recip();
            let d2 = Float::with_val(prec, d.square_ref());
            r += Float::with_val(prec, c * &d);
            r1 -= Float::with_val(prec, c * &d2);
            r2 += Float::with_val(prec, c * &d2) * &d * 2u32;
        }
        (r, r1, r2)
    }

    pub fn eval(&self, w: &Float) -> Float {
        self.eval3(w).0
    }

    pub fn eval_complex(&self, w: &Cplx) -> (Cplx, Cplx) {
        let prec = w.prec();
        let inv = w.recip();
        let inv2 = &inv * &inv;
        let mut r = w.scale(&self.alpha).add_real(&self.beta);
        r = &r + &inv.scale(&self.gamma);
        let mut r1 = inv2.scale(&-Float::with_val(prec, &self.gamma)).add_real(&self.alpha);
        for (q, c) in self.poles.iter().zip(&self.residues) {
            let d = w.sub_real(q).recip();
            let d2 = &d * &d;
            r = &r + &d.scale(c);
            r1 = &r1 - &d2.scale(c);
        }
        (r, r1)
    }

    pub fn to_f64(&self) -> MapF64 {
        MapF64 {
            alpha: self.alpha.to_f64(),
            beta: self.beta.to_f64(),
            gamma: self.gamma.to_f64(),
            poles: self.poles.iter().map(Float::to_f64).collect(),
            residues: self.residues.iter().map(Float::to_f64).collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct MapF64 {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub poles: Vec<f64>,
    pub residues: Vec<f64>,
}

impl MapF64 {
    pub fn d1(&self, w: f64) -> f64 {
        let mut v = self.alpha - self.gamma / (w * w);
        for (q, r) in self.poles.iter().zip(&self.residues) {
            v -= r / ((w - q) * (w - q));
        }
        v
    }

    pub fn eval(&self, w: f64) -> f64 {
        let mut v = self.alpha * w + self.beta + self.gamma / w;
        for (q, r) in self.poles.iter().zip(&self.residues) {
            v += r / (w - q);
        }
        v
    }

    pub fn eval_c(&self, w: Complex64) -> (Complex64, Complex64) {
        let inv = w.inv();
        let mut r = w * self.alpha + self.beta + inv * self.gamma;
        let mut r1 = Complex64::new(self.alpha, 0.0) - inv * inv * self.gamma;
        for (q, c) in self.poles.iter().zip(&self.residues) {
            let d = (w - q).inv();
            r += d * c;
            r1 -= d * d * c;
        }
        (r, r1)
    }
}
