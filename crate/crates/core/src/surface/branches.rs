use num_complex::Complex64;
use rug::Float;

use super::{ConformalFamily, Uniformization};
use crate::error::{Error, Result};
use crate::num::Cplx;

fn newton_f64(m: &super::MapF64, w: Complex64, z: Complex64) -> Option<Complex64> {
    let mut w = w;
    for _ in 0..40 {
        let (r, r1) = m.eval_c(w);
        let dw = (r - z) / r1;
        w -= dw;
        if !w.is_finite() {
            return None;
        }
        if dw.norm() <= 1e-14 * (1.0 + w.norm()) {
            return Some(w);
        }
    }
    None
}

fn chordal(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / ((1.0 + a.norm_sqr()).sqrt() * (1.0 + b.norm_sqr()).sqrt())
}

/// Chordal distance from each root to its nearest neighbour.
fn nearest(ws: &[Complex64]) -> Vec<f64> {
    (0..ws.len())
        .map(|i| (0..ws.len()).filter(|&j| j != i).map(|j| chordal(ws[i], ws[j])).fold(f64::INFINITY, f64::min))
        .collect()
}

impl Uniformization {
    /// f64 approximations of the preimages on each pole's branch, tracked
    /// along a vertical ray from far away down to offset `y_end` off z.
    fn track(&self, z: (f64, f64), y_end: f64, below: bool) -> Result<Vec<Complex64>> {
        let m = self.map.to_f64();
        let dir = if below { -1.0 } else { 1.0 };
        let point = |y: f64| Complex64::new(z.0, z.1 + dir * y);
        let mut y = 1e6 * self.scale.max(z.0.abs());
        let z0 = point(y);
        let mut guesses = vec![Complex64::new(m.gamma, 0.0) / z0];
        for (q, r) in m.poles.iter().zip(&m.residues) {
            guesses.push(Complex64::new(*q, 0.0) + Complex64::new(*r, 0.0) / z0);
        }
        guesses.push((z0 - m.beta) / m.alpha);
        let mut ws: Vec<Complex64> = Vec::with_capacity(guesses.len());
        for g in guesses {
            ws.push(newton_f64(&m, g, z0).ok_or_else(|| Error::Ambiguous("no convergence at the start of the ray".into()))?);
        }
        let mut factor = 0.5f64;
        while y > y_end {
            let yn = (y * factor).max(y_end);
            let zn = point(yn);
            let gaps = nearest(&ws);
            let next: Option<Vec<Complex64>> = ws.iter().map(|&w| newton_f64(&m, w, zn)).collect();
            let good = match &next {
                Some(n) => {
                    n.iter().zip(&ws).zip(&gaps).all(|((a, b), g)| chordal(*a, *b) < 0.25 * g)
                        && nearest(n).iter().all(|g| *g > 0.0)
                }
                None => false,
            };
            if good {
                ws = next.expect("checked above");
                y = yn;
                factor = (factor * factor).max(0.01);
            } else {
                factor = factor.sqrt();
                if factor > 0.999_999 {
                    return Err(Error::Ambiguous(format!("branch tracking stalled near ({}, {})", z.0, z.1)));
                }
            }
        }
        Ok(ws)
    }

    fn endpoint_slit(&self, z: &Cplx) -> Option<(usize, Float)> {
        if !z.im.is_zero() {
            return None;
        }
        for j in 0..self.p {
            if z.re == self.target_in[j] {
                return Some((j, self.crit_in[j].clone()));
            }
            if z.re == self.target_out[j] {
                return Some((j, self.crit_out[j].clone()));
            }
        }
        None
    }

    /// Preimages w_k of z under R, indexed by sheet. On a slit the value
    /// approached from the upper half-plane is returned.
    pub fn sheet_roots(&self, z: &Cplx) -> Result<Vec<Cplx>> {
        self.sheet_roots_from(z, z.im < 0)
    }

    /// Like [`Self::sheet_roots`], with the side of approach to a slit
    /// chosen explicitly for real z.
    pub fn sheet_roots_from(&self, z: &Cplx, below: bool) -> Result<Vec<Cplx>> {
        let prec = self.prec().max(z.prec());
        let z = z.with_prec(prec);
        let zf = z.to_f64();
        let below = if z.im.is_zero() { below } else { z.im < 0 };
        let y_end = 1e-9 * self.scale;
        let approx = self.track(zf, if zf.1.abs() > y_end { 0.0 } else { y_end }, below)?;
        let endpoint = self.endpoint_slit(&z);
        let map = if self.prec() == prec { self.map.clone() } else { self.map.with_prec(prec) };
        let tol = Float::with_val(prec, 1) >> (prec as i32 - 16);
        let mut by_pole: Vec<Cplx> = Vec::with_capacity(approx.len());
        for (i, a) in approx.iter().enumerate() {
            let sheet = self.sheet_of_pole[i];
            if let Some((j, c)) = &endpoint {
                if sheet == *j || sheet == j + 1 {
                    by_pole.push(Cplx::from_real(&Float::with_val(prec, c)));
                    continue;
                }
            }
            let mut w = Cplx::from_f64(prec, a.re, a.im);
            let mut converged = false;
            for _ in 0..200 {
                let (r, r1) = map.eval_complex(&w);
                let dw = &(&r - &z) / &r1;
                w = &w - &dw;
                let size = Float::with_val(prec, w.abs()) + 1u32;
                if dw.abs() <= Float::with_val(prec, &tol * &size) {
                    converged = true;
                    break;
                }
            }
            if !converged || !w.is_finite() {
                return Err(Error::Ambiguous(format!("preimage refinement failed at {:?}", z)));
            }
            by_pole.push(w);
        }
        let sep = Float::with_val(prec, 1) >> (prec as i32 / 4);
        for i in 0..by_pole.len() {
            for j in i + 1..by_pole.len() {
                let shared = endpoint.as_ref().is_some_and(|(s, _)| {
                    let (a, b) = (self.sheet_of_pole[i], self.sheet_of_pole[j]);
                    a.min(b) == *s && a.max(b) == s + 1
                });
                if !shared && (&by_pole[i] - &by_pole[j]).abs() <= sep {
                    return Err(Error::Ambiguous(format!("two sheets share a preimage at {:?}", z)));
                }
            }
        }
        let mut out = vec![Cplx::zero(prec); by_pole.len()];
        for (i, w) in by_pole.into_iter().enumerate() {
            out[self.sheet_of_pole[i]] = w;
        }
        Ok(out)
    }

    /// |R(w_k) − z| over all sheets.
    pub fn preimage_residual(&self, z: &Cplx, roots: &[Cplx]) -> Float {
        let prec = z.prec();
        let map = self.map.with_prec(prec);
        roots.iter().fold(Float::with_val(prec, 0), |m, w| {
            if w.re.is_zero() && w.im.is_zero() {
                return m;
            }
            let (r, _) = map.eval_complex(w);
            m.max(&(&r - z).abs())
        })
    }
}

/// φ_k^{(l)}(z).
pub fn phi_branch(u: &Uniformization, fam: &ConformalFamily, k: usize, z: &Cplx) -> Result<Cplx> {
    let roots = u.sheet_roots(z)?;
    Ok(fam.phi_of_w(&roots[k]))
}
