use rayon::prelude::*;
use rug::Float;

use super::MonicPolynomial;
use crate::error::{Error, Result};
use crate::measures::{DiscretizedMeasure, MeasureSet};
use crate::num::{to_decimal, Cplx};

/// ψ_{n,k} for k = 0..=p, with the values of every level cached at the
/// nodes of the measure that feeds the next level.
pub struct SecondKindEvaluator<'a> {
    pub set: &'a MeasureSet,
    pub q: MonicPolynomial,
    varying: Vec<DiscretizedMeasure>,
    levels: Vec<Vec<Float>>,
}

impl<'a> SecondKindEvaluator<'a> {
    pub fn new(set: &'a MeasureSet, q: MonicPolynomial) -> Self {
        let p = set.shape.p();
        let varying: Vec<DiscretizedMeasure> = (0..p).map(|k| set.varying(q.n, k)).collect();
        let mut ev = SecondKindEvaluator { set, q, varying, levels: Vec::with_capacity(p) };
        for k in 0..p {
            let nodes = &set.base(k).nodes;
            let vals: Vec<Float> = if k == 0 {
                nodes.par_iter().map(|t| ev.q.eval(t)).collect()
            } else {
                nodes.par_iter().map(|t| ev.from_level(k, t)).collect()
            };
            ev.levels.push(vals);
        }
        ev
    }

    pub fn n(&self) -> u64 {
        self.q.n
    }

    /// ψ_{n,k} at the nodes of σ*_k.
    pub fn node_values(&self, k: usize) -> &[Float] {
        &self.levels[k]
    }

    /// σ_{n,k}.
    pub fn varying(&self, k: usize) -> &DiscretizedMeasure {
        &self.varying[k]
    }

    fn from_level(&self, k: usize, x: &Float) -> Float {
        let m = &self.varying[k - 1];
        let prec = self.set.prec;
        let mut s = Float::with_val(prec, 0);
        for ((t, w), v) in m.nodes.iter().zip(&m.weights).zip(&self.levels[k - 1]) {
            let num = Float::with_val(prec, w * v);
            s += num / Float::with_val(prec, x - t);
        }
        if self.set.shape.ell(self.q.n) < k {
            s *= x;
        }
        s
    }

    fn check_domain(&self, k: usize, re: &Float, im: &Float) -> Result<()> {
        if k == 0 {
            return Ok(());
        }
        let (a, b) = &self.set.base(k - 1).support;
        if im.is_zero() && re >= a && re <= b {
            return Err(Error::OnSupport { point: to_decimal(re), a: to_decimal(a), b: to_decimal(b) });
        }
        Ok(())
    }

    pub fn eval(&self, k: usize, x: &Float) -> Result<Float> {
        assert!(k <= self.set.shape.p(), "level out of range");
        self.check_domain(k, x, &Float::new(2))?;
        if k == 0 {
            return Ok(self.q.eval(x));
        }
        Ok(self.from_level(k, x))
    }

    pub fn eval_complex(&self, k: usize, z: &Cplx) -> Result<Cplx> {
        assert!(k <= self.set.shape.p(), "level out of range");
        self.check_domain(k, &z.re, &z.im)?;
        if k == 0 {
            return Ok(self.q.eval_complex(z));
        }
        let m = &self.varying[k - 1];
        let prec = z.prec();
        let mut s = Cplx::zero(prec);
        for ((t, w), v) in m.nodes.iter().zip(&m.weights).zip(&self.levels[k - 1]) {
            let num = Float::with_val(prec, w * v);
            let den = z.sub_real(t);
            s = &s + &den.recip().scale(&num);
        }
        if self.set.shape.ell(self.q.n) < k {
            s = &s * z;
        }
        Ok(s)
    }
}

/// Zeros of ψ_{n,k} on (a_k, b_k).
#[derive(Clone, Debug)]
pub struct ZeroSet {
    pub n: u64,
    pub k: usize,
    pub zeros: Vec<Float>,
}

impl ZeroSet {
    /// The monic polynomial P_{n,k} with these roots.
    pub fn poly(&self, x: &Float) -> Float {
        let mut v = Float::with_val(x.prec(), 1);
        for r in &self.zeros {
            v *= Float::with_val(x.prec(), x - r);
        }
        v
    }

    pub fn poly_complex(&self, z: &Cplx) -> Cplx {
        let mut v = Cplx::one(z.prec());
        for r in &self.zeros {
            v = &v * &z.sub_real(r);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }
}

fn scan_grid(a: &Float, b: &Float, m: usize) -> Vec<Float> {
    let prec = a.prec();
    let mid = Float::with_val(prec, a + b) / 2u32;
    let half = Float::with_val(prec, b - a) / 2u32;
    let pi = Float::with_val(prec, rug::float::Constant::Pi);
    let mut pts = Vec::with_capacity(m + 2);
    pts.push(a.clone());
    for i in (0..m).rev() {
        let c = Float::with_val(prec, &pi * (2 * i + 1) as u32) / (2 * m) as u32;
        pts.push(Float::with_val(prec, c.cos() * &half) + &mid);
    }
    pts.push(b.clone());
    pts
}

fn refine<F: Fn(&Float) -> Float>(f: &F, mut lo: Float, mut hi: Float, mut flo: Float, width: &Float) -> Float {
    let prec = lo.prec();
    let coarse = Float::with_val(prec, width) >> (prec as i32 / 6);
    while Float::with_val(prec, &hi - &lo) > coarse {
        let mid = Float::with_val(prec, &lo + &hi) / 2u32;
        let fm = f(&mid);
        if fm.is_zero() {
            return mid;
        }
        if (fm < 0) == (flo < 0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let mut fhi = f(&hi);
    let fine = Float::with_val(prec, width) >> (prec as i32 - 24);
    let mut side = 0i8;
    for _ in 0..200 {
        if Float::with_val(prec, &hi - &lo) <= fine || (fhi < 0) == (flo < 0) {
            break;
        }
        let x = Float::with_val(prec, &lo * &fhi) - Float::with_val(prec, &hi * &flo);
        let x = x / Float::with_val(prec, &fhi - &flo);
        if x <= lo || x >= hi {
            break;
        }
        let fx = f(&x);
        if fx.is_zero() {
            return x;
        }
        if (fx < 0) == (flo < 0) {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi /= 2u32;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo /= 2u32;
            }
            side = 1;
        }
    }
    Float::with_val(prec, &lo + &hi) / 2u32
}

/// Sign scan on a Chebyshev-spaced grid, bisection, then Illinois polishing.
pub fn psi_zeros(ev: &SecondKindEvaluator<'_>, k: usize) -> Result<ZeroSet> {
    let shape = &ev.set.shape;
    let n = ev.n();
    if k >= shape.p() {
        return Ok(ZeroSet { n, k, zeros: Vec::new() });
    }
    let expected = shape.count_z(n, k) as usize;
    let (a, b) = ev.set.base(k).support.clone();
    let width = Float::with_val(ev.set.prec, &b - &a);
    let f = |x: &Float| -> Float { if k == 0 { ev.q.eval(x) } else { ev.from_level(k, x) } };
    let mut found = 0;
    for attempt in 0..2 {
        let m = 8 * (expected + 1) * if attempt == 0 { 1 } else { 4 };
        let grid = scan_grid(&a, &b, m);
        let vals: Vec<Float> = grid.par_iter().map(&f).collect();
        let brackets: Vec<usize> = (0..grid.len() - 1).filter(|&i| (vals[i] < 0) != (vals[i + 1] < 0)).collect();
        found = brackets.len();
        if found == expected {
            let zeros: Vec<Float> = brackets
                .par_iter()
                .map(|&i| {
                    if vals[i].is_zero() {
                        grid[i].clone()
                    } else {
                        refine(&f, grid[i].clone(), grid[i + 1].clone(), vals[i].clone(), &width)
                    }
                })
                .collect();
            return Ok(ZeroSet { n, k, zeros });
        }
    }
    Err(Error::ZeroCount { n, k, found, expected })
}

/// Strict interlacing of two sorted point sets.
pub fn interlace(a: &[Float], b: &[Float]) -> bool {
    let mut merged: Vec<(&Float, u8)> = a.iter().map(|x| (x, 0u8)).chain(b.iter().map(|x| (x, 1u8))).collect();
    merged.sort_by(|x, y| x.0.partial_cmp(y.0).unwrap_or(std::cmp::Ordering::Equal));
    merged.windows(2).all(|w| w[0].1 != w[1].1 && w[0].0 < w[1].0)
}
