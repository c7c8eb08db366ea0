//! Extended-precision scalars.
//!
//! Reals are MPFR floats. [`Cplx`] is a minimal complex type over them with
//! just the arithmetic the library needs.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

pub type Real = Float;

pub fn real(prec: u32, v: f64) -> Float {
    Float::with_val(prec, v)
}

pub fn zero(prec: u32) -> Float {
    Float::with_val(prec, 0)
}

pub fn one(prec: u32) -> Float {
    Float::with_val(prec, 1)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// Parses a decimal string without passing through binary64.
pub fn parse_real(prec: u32, s: &str) -> Result<Float> {
    let t = s.trim();
    let parsed = Float::parse(t).map_err(|e| Error::Parse(format!("`{t}`: {e}")))?;
    Ok(Float::with_val(prec, parsed))
}

/// Round-trippable decimal representation.
pub fn to_decimal(x: &Float) -> String {
    let digits = (x.prec() as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2;
    x.to_string_radix(10, Some(digits))
}

/// Shorter decimal for messages and CSV columns meant for plotting.
pub fn to_decimal_digits(x: &Float, digits: usize) -> String {
    x.to_string_radix(10, Some(digits))
}

pub fn with_prec(x: &Float, prec: u32) -> Float {
    Float::with_val(prec, x)
}

pub fn max_abs<'a, I: IntoIterator<Item = &'a Float>>(prec: u32, it: I) -> Float {
    let mut m = zero(prec);
    for v in it {
        let a = Float::with_val(prec, v.abs_ref());
        if a > m {
            m = a;
        }
    }
    m
}

/// 2^e as an MPFR value.
pub fn pow2(prec: u32, e: i32) -> Float {
    Float::with_val(prec, 2).pow(e)
}

#[derive(Clone, PartialEq)]
pub struct Cplx {
    pub re: Float,
    pub im: Float,
}

impl fmt::Debug for Cplx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {:+}i)", self.re.to_f64(), self.im.to_f64())
    }
}

impl Cplx {
    pub fn new(re: Float, im: Float) -> Self {
        Cplx { re, im }
    }

    pub fn from_real(x: &Float) -> Self {
        Cplx { re: x.clone(), im: Float::with_val(x.prec(), 0) }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        Cplx { re: real(prec, re), im: real(prec, im) }
    }

    pub fn zero(prec: u32) -> Self {
        Cplx { re: zero(prec), im: zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Cplx { re: one(prec), im: zero(prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        Cplx { re: Float::with_val(prec, &self.re), im: Float::with_val(prec, &self.im) }
    }

    pub fn conj(&self) -> Self {
        Cplx { re: self.re.clone(), im: Float::with_val(self.prec(), -&self.im) }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.square_ref()) + Float::with_val(p, self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.re.hypot_ref(&self.im))
    }

    pub fn arg(&self) -> Float {
        let p = self.prec();
        Float::with_val(p, self.im.atan2_ref(&self.re))
    }

    pub fn recip(&self) -> Self {
        let d = self.norm_sqr();
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re / &d), im: Float::with_val(p, -&self.im) / &d }
    }

    pub fn scale(&self, s: &Float) -> Self {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re * s), im: Float::with_val(p, &self.im * s) }
    }

    pub fn add_real(&self, s: &Float) -> Self {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re + s), im: self.im.clone() }
    }

    pub fn sub_real(&self, s: &Float) -> Self {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re - s), im: self.im.clone() }
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Cplx::one(self.prec());
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    pub fn ln(&self) -> Self {
        let p = self.prec();
        Cplx { re: Float::with_val(p, self.abs().ln()), im: self.arg() }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl Add for &Cplx {
    type Output = Cplx;
    fn add(self, o: &Cplx) -> Cplx {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl Sub for &Cplx {
    type Output = Cplx;
    fn sub(self, o: &Cplx) -> Cplx {
        let p = self.prec();
        Cplx { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl Mul for &Cplx {
    type Output = Cplx;
    fn mul(self, o: &Cplx) -> Cplx {
        let p = self.prec();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        Cplx { re: ac - bd, im: ad + bc }
    }
}

impl Div for &Cplx {
    type Output = Cplx;
    fn div(self, o: &Cplx) -> Cplx {
        let p = self.prec();
        let d = o.norm_sqr();
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        let ad = Float::with_val(p, &self.re * &o.im);
        Cplx { re: (ac + bd) / &d, im: (bc - ad) / &d }
    }
}

impl Neg for &Cplx {
    type Output = Cplx;
    fn neg(self) -> Cplx {
        let p = self.prec();
        Cplx { re: Float::with_val(p, -&self.re), im: Float::with_val(p, -&self.im) }
    }
}

impl Add for Cplx {
    type Output = Cplx;
    fn add(self, o: Cplx) -> Cplx {
        &self + &o
    }
}

impl Sub for Cplx {
    type Output = Cplx;
    fn sub(self, o: Cplx) -> Cplx {
        &self - &o
    }
}

impl Mul for Cplx {
    type Output = Cplx;
    fn mul(self, o: Cplx) -> Cplx {
        &self * &o
    }
}

impl Div for Cplx {
    type Output = Cplx;
    fn div(self, o: Cplx) -> Cplx {
        &self / &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_avoids_binary_rounding() {
        let x = parse_real(256, "0.1").unwrap();
        let ten = real(256, 10.0);
        let back = Float::with_val(256, &x * &ten) - 1u32;
        assert!(back.abs() < pow2(256, -250));
    }

    #[test]
    fn complex_field_ops() {
        let a = Cplx::from_f64(128, 1.5, -2.0);
        let b = Cplx::from_f64(128, -0.25, 3.0);
        let q = &(&a * &b) / &b;
        assert!((&q - &a).abs() < pow2(128, -120));
        let r = &a.recip() * &a;
        assert!((&r - &Cplx::one(128)).abs() < pow2(128, -120));
        let sq = a.powi(3);
        let direct = &(&a * &a) * &a;
        assert!((&sq - &direct).abs() < pow2(128, -118));
    }
}
