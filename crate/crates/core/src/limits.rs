//! Limit objects of the ratio asymptotics evaluated from the surface: the
//! values a^{(ρ)}, the maps η^{(ρ)}, the limit functions F̃_k^{(ρ)} with
//! their normalizing constants, the products f_k^{(ρ)}, and the identities
//! that tie them together.

use rayon::prelude::*;
use rug::Float;
use serde_json::{json, Value};

use crate::checks::Check;
use crate::counting::SystemShape;
use crate::error::{Error, Result};
use crate::num::{to_decimal, Cplx};
use crate::surface::{normalize_family, ConformalFamily, Uniformization};

/// Predicted limits for one surface, with everything needed to evaluate
/// the limit functions.
#[derive(Clone, Debug)]
pub struct LimitTable {
    pub shape: SystemShape,
    pub surface: Uniformization,
    /// `families[l − 1]` is φ^{(l)}.
    pub families: Vec<ConformalFamily>,
    /// a^{(ρ)} for ρ = 0..p(p+1).
    pub a_pred: Vec<Float>,
    /// `c_constants[ρ][k]` is C_k^{(ρ)} for k = 0..p.
    pub c_constants: Vec<Vec<Float>>,
    /// Index k̄ with 0 ∈ Δ_k̄, if any.
    pub zero_interval: Option<usize>,
    /// Δ_k as (left, right).
    pub intervals: Vec<(Float, Float)>,
}

/// a^{(ρ)} = −ω_l / φ_k^{(l)}(0) with (k, l) the index pair of ρ.
pub fn predict_a(shape: &SystemShape, u: &Uniformization, families: &[ConformalFamily], rho: i64) -> Result<Float> {
    let pair = shape.index_pair(rho);
    let prec = u.prec();
    let roots = u.sheet_roots(&Cplx::zero(prec))?;
    let fam = &families[pair.l - 1];
    let phi = fam.phi_of_w(&roots[pair.k]);
    let tol = Float::with_val(prec, 1) >> (prec as i32 / 2);
    if Float::with_val(prec, &*phi.im.as_abs()) > Float::with_val(prec, phi.abs() * &tol) {
        return Err(Error::Ambiguous(format!("origin on a slit of sheet {}", pair.k)));
    }
    if phi.re.is_zero() {
        return Err(Error::Ambiguous(format!("phi vanishes at the origin on sheet {}", pair.k)));
    }
    let a = -Float::with_val(prec, &fam.omega / &phi.re);
    if a <= 0 {
        return Err(Error::NonPositive { n: pair.rho as u64, value: a.to_f64() });
    }
    Ok(a)
}

fn normalizing_constants(p: usize, fam: &ConformalFamily, a: &Float) -> Vec<Float> {
    let prec = a.prec();
    let l = fam.l;
    let factor = |j: usize| Float::with_val(prec, a * &fam.omega_j[j]) / &fam.omega + 1u32;
    let mut out = Vec::with_capacity(p);
    for k in 0..p {
        let c = if k == 0 {
            Float::with_val(prec, 1)
        } else if k < l {
            (1..=k).fold(Float::with_val(prec, 1), |acc, j| acc * factor(j))
        } else {
            let lead = Float::with_val(prec, a * &fam.omega_j[l]) / &fam.omega;
            (1..=k).filter(|&j| j != l).fold(lead, |acc, j| acc * factor(j))
        };
        out.push(c);
    }
    out
}

/// Deterministic complex sample points in a ring around the intervals,
/// kept off the real axis.
pub fn sample_points(prec: u32, scale: f64, count: usize) -> Vec<Cplx> {
    let golden = 0.618_033_988_749_894_9_f64;
    (0..count)
        .map(|i| {
            let u = ((i as f64 + 0.5) * golden).fract();
            let v = ((i as f64 + 0.5) * golden * golden).fract();
            let r = scale * (0.4 + 2.6 * u);
            let theta = 0.3 + (std::f64::consts::PI - 0.6) * v;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            Cplx::from_f64(prec, r * theta.cos(), sign * r * theta.sin())
        })
        .collect()
}

fn rel_gap(a: &Cplx, b: &Cplx) -> f64 {
    let d = (a - b).abs().to_f64();
    let s = a.abs().to_f64().max(b.abs().to_f64()).max(1.0);
    d / s
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Values of the divisor of η^{(ρ)} at its three marked points.
#[derive(Clone, Debug)]
pub struct EtaDivisor {
    pub rho: usize,
    /// |η_0(∞) − 1|.
    pub value_at_infinity: f64,
    /// |η_l(∞)|, and the leading coefficient lim z·η_l(z).
    pub zero_at_infinity: f64,
    pub zero_coefficient: f64,
    /// Relative change of lim z·η_{k(ρ)}(z) at 0 between two small radii,
    /// and the limit itself; `None` when 0 is on a slit of that sheet.
    pub pole_stability: Option<f64>,
    pub pole_residue: Option<f64>,
}

impl LimitTable {
    pub fn build(surface: Uniformization) -> Result<Self> {
        let p = surface.p;
        let shape = SystemShape::new(p)?;
        let families = (1..=p).map(|l| normalize_family(&surface, l)).collect::<Result<Vec<_>>>()?;
        let a_pred = (0..shape.period() as i64)
            .into_par_iter()
            .map(|rho| predict_a(&shape, &surface, &families, rho))
            .collect::<Result<Vec<_>>>()?;
        let c_constants = (0..shape.period())
            .map(|rho| {
                let l = shape.index_pair(rho as i64).l;
                normalizing_constants(p, &families[l - 1], &a_pred[rho])
            })
            .collect();
        let intervals: Vec<(Float, Float)> = surface
            .target_in
            .iter()
            .zip(&surface.target_out)
            .map(|(a, b)| if a < b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) })
            .collect();
        let zero_interval = intervals.iter().position(|(a, b)| *a <= 0 && *b >= 0);
        Ok(LimitTable { shape, surface, families, a_pred, c_constants, zero_interval, intervals })
    }

    pub fn p(&self) -> usize {
        self.shape.p()
    }

    pub fn prec(&self) -> u32 {
        self.surface.prec()
    }

    /// a^{(ρ)}, extended periodically.
    pub fn a(&self, rho: i64) -> &Float {
        &self.a_pred[self.shape.reduce_rho(rho)]
    }

    pub fn family(&self, rho: i64) -> &ConformalFamily {
        &self.families[self.shape.index_pair(rho).l - 1]
    }

    pub fn c_constant(&self, rho: i64, k: usize) -> &Float {
        &self.c_constants[self.shape.reduce_rho(rho)][k]
    }

    /// Preimages of z on every sheet.
    pub fn roots(&self, z: &Cplx) -> Result<Vec<Cplx>> {
        self.surface.sheet_roots(&z.with_prec(self.prec()))
    }

    fn eta_at(&self, rho: i64, a: &Float, k: usize, roots: &[Cplx]) -> Result<Cplx> {
        let fam = self.family(rho);
        let phi = fam.phi_of_w(&roots[k]);
        let prec = self.prec();
        let coef = Float::with_val(prec, a / &fam.omega);
        let den = phi.scale(&coef).add_real(&Float::with_val(prec, 1));
        if den.abs().is_zero() {
            return Err(Error::Identity(format!("eta^({rho}) has a pole on sheet {k}")));
        }
        Ok(den.recip())
    }

    /// η_k^{(ρ)}(z) = 1/(1 + a^{(ρ)} ω_l^{−1} φ_k^{(l)}(z)).
    pub fn eta(&self, rho: i64, k: usize, z: &Cplx) -> Result<Cplx> {
        let roots = self.roots(z)?;
        self.eta_at(rho, self.a(rho), k, &roots)
    }

    fn f_tilde_at(&self, rho: i64, a: &Float, k: usize, z: &Cplx, roots: &[Cplx]) -> Result<Cplx> {
        let p = self.p();
        if k >= p {
            return Ok(Cplx::one(self.prec()));
        }
        let l = self.shape.index_pair(rho).l;
        let consts = normalizing_constants(p, &self.families[l - 1], a);
        let mut v = Cplx::from_real(&consts[k]);
        for j in 0..=k {
            v = &v * &self.eta_at(rho, a, j, roots)?;
        }
        if k >= self.shape.index_pair(rho).k {
            v = &v * &z.with_prec(self.prec());
        }
        Ok(v)
    }

    /// F̃_k^{(ρ)}(z) for k = 0..p−1; F̃_p ≡ 1.
    pub fn f_tilde(&self, rho: i64, k: usize, z: &Cplx) -> Result<Cplx> {
        let roots = self.roots(z)?;
        self.f_tilde_at(rho, self.a(rho), k, z, &roots)
    }

    /// Limit of P_{n+1,k}/P_{n,k}, which is F̃_k^{(ρ)}.
    pub fn p_ratio_limit(&self, rho: i64, k: usize, z: &Cplx) -> Result<Cplx> {
        self.f_tilde(rho, k, z)
    }

    /// Limit of ψ_{n+1,k}/ψ_{n,k} for k = 1..=p.
    pub fn psi_ratio_limit(&self, rho: i64, k: usize, z: &Cplx) -> Result<Cplx> {
        let eta = self.eta(rho, k, z)?;
        if self.shape.ell(self.shape.reduce_rho(rho) as u64) == self.p() {
            Ok(&eta * &z.with_prec(self.prec()))
        } else {
            Ok(eta)
        }
    }

    /// f_k^{(ρ)} = sg(Π_{ν>k} φ_ν(∞)) Π_{ν>k} φ_ν(z); the sign read off the
    /// surface must agree with the combinatorial sign.
    pub fn f_product(&self, rho: i64, k: usize, z: &Cplx) -> Result<Cplx> {
        let p = self.p();
        let fam = self.family(rho);
        let prec = self.prec();
        if k >= p {
            return Ok(Cplx::one(prec));
        }
        let sign: i8 = (k + 1..=p).map(|nu| fam.sign_at_infinity(nu)).product();
        let expected = self.shape.sign_f(fam.l, k);
        if sign != expected {
            return Err(Error::Sign(format!("f_{k}^({rho}): surface gives {sign}, expected {expected}")));
        }
        let roots = self.roots(z)?;
        let mut v = Cplx::from_f64(prec, sign as f64, 0.0);
        for w in &roots[k + 1..] {
            v = &v * &fam.phi_of_w(w);
        }
        Ok(v)
    }

    /// Leading Laurent coefficient of F̃_k^{(ρ)} at ∞ relative to the
    /// expected power z^{Z(ρ+1,k)−Z(ρ,k)}, by a four-point circle average.
    pub fn leading_coefficient(&self, rho: i64, k: usize, radius: f64) -> Result<Cplx> {
        let prec = self.prec();
        let r = self.shape.reduce_rho(rho) as u64;
        let d = self.shape.count_z(r + 1, k) as i64 - self.shape.count_z(r, k) as i64;
        let mut acc = Cplx::zero(prec);
        for m in 0..4 {
            let theta = std::f64::consts::PI * (2 * m + 1) as f64 / 4.0;
            let z = Cplx::from_f64(prec, radius * theta.cos(), radius * theta.sin());
            let v = self.f_tilde(rho, k, &z)?;
            let v = match d {
                1 => &v / &z,
                -1 => &v * &z,
                _ => v,
            };
            acc = &acc + &v;
        }
        Ok(acc.scale(&Float::with_val(prec, 0.25)))
    }

    fn far_radius(&self) -> f64 {
        1e4 * self.surface.scale
    }

    /// a^{(ρ)} read off the Laurent expansion of F̃_0^{(ρ)} at ∞:
    /// 1 − a/z + … or z − a + … .
    pub fn laurent_a(&self, rho: i64) -> Result<Float> {
        let prec = self.prec();
        let radius = self.far_radius();
        let shifted = self.shape.ell(self.shape.reduce_rho(rho) as u64) == self.p();
        let mut acc = Cplx::zero(prec);
        for m in 0..4 {
            let theta = std::f64::consts::PI * (2 * m + 1) as f64 / 4.0;
            let z = Cplx::from_f64(prec, radius * theta.cos(), radius * theta.sin());
            let f = self.f_tilde(rho, 0, &z)?;
            let v = if shifted { &z - &f } else { &(&Cplx::one(prec) - &f) * &z };
            acc = &acc + &v;
        }
        Ok(acc.re / 4u32)
    }

    /// max |log(v/median v)| of the boundary combination
    /// |F̃_k|² ξ / (|F̃_{k−1}| |F̃_{k+1}|) over 64 interior points of Δ_k,
    /// approached from the upper half-plane.
    pub fn boundary_constancy(&self, rho: i64, k: usize) -> Result<f64> {
        self.boundary_constancy_with(rho, k, &self.a(rho).clone())
    }

    /// Same as [`Self::boundary_constancy`] with a^{(ρ)} replaced by `a`.
    pub fn boundary_constancy_with(&self, rho: i64, k: usize, a: &Float) -> Result<f64> {
        let p = self.p();
        if k >= p {
            return Err(Error::Config(format!("boundary check needs k < p, got {k}")));
        }
        let prec = self.prec();
        let ell = self.shape.ell(self.shape.reduce_rho(rho) as u64);
        let (lo, hi) = &self.intervals[k];
        let width = Float::with_val(prec, hi - lo);
        let xi_power: i32 = if ell < p {
            if k == ell {
                1
            } else if k == ell + 1 {
                -1
            } else {
                0
            }
        } else if k == 0 {
            -1
        } else {
            0
        };
        let pts: Vec<Float> = (0..64)
            .map(|i| {
                let s = 0.01 + 0.98 * i as f64 / 63.0;
                Float::with_val(prec, &width * s) + lo
            })
            .collect();
        let vals = pts
            .par_iter()
            .map(|t| -> Result<f64> {
                let z = Cplx::from_real(t);
                let roots = self.roots(&z)?;
                let fk = self.f_tilde_at(rho, a, k, &z, &roots)?.abs();
                let below = if k == 0 { Float::with_val(prec, 1) } else { self.f_tilde_at(rho, a, k - 1, &z, &roots)?.abs() };
                let above = self.f_tilde_at(rho, a, k + 1, &z, &roots)?.abs();
                let mut v = Float::with_val(prec, fk.square_ref()) / below / above;
                let at = Float::with_val(prec, t.abs_ref());
                match xi_power {
                    1 => v *= &at,
                    -1 => v /= &at,
                    _ => {}
                }
                Ok(v.ln().to_f64())
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut sorted = vals.clone();
        let mid = median(&mut sorted);
        Ok(vals.iter().map(|v| (v - mid).abs()).fold(0.0, f64::max))
    }

    /// |Σ_{i=ρ}^{ρ+p−1} a^{(i)} − Σ_{i=ρ+p+1}^{ρ+2p} a^{(i)}|.
    pub fn sum_rule_residual(&self, rho: i64) -> Float {
        let p = self.p() as i64;
        let prec = self.prec();
        let mut s = Float::with_val(prec, 0);
        for i in rho..rho + p {
            s += self.a(i);
        }
        for i in rho + p + 1..=rho + 2 * p {
            s -= self.a(i);
        }
        s.abs()
    }

    /// Smallest pairwise gap among a^{(ρ+m·step)}, m = 0..count.
    pub fn min_gap(&self, rho: i64, step: i64, count: i64) -> f64 {
        let vals: Vec<&Float> = (0..count).map(|m| self.a(rho + m * step)).collect();
        let mut g = f64::INFINITY;
        for i in 0..vals.len() {
            for j in i + 1..vals.len() {
                g = g.min(Float::with_val(self.prec(), vals[i] - vals[j]).abs().to_f64());
            }
        }
        g
    }

    /// a^{(ρ)} against (1 − F̃_0^{(ρ)}) Π_{i=ρ−p}^{ρ−1} F̃_0^{(i)}, with z − F̃_0
    /// in place of 1 − F̃_0 when ρ ≡ p mod (p+1); max relative residual.
    pub fn relation_residual(&self, rho: i64, points: &[Cplx]) -> Result<f64> {
        let p = self.p() as i64;
        let prec = self.prec();
        let shifted = self.shape.ell(self.shape.reduce_rho(rho) as u64) == self.p();
        let a = Cplx::from_real(self.a(rho));
        let res = points
            .par_iter()
            .map(|z| -> Result<f64> {
                let z = z.with_prec(prec);
                let roots = self.roots(&z)?;
                let f0 = self.f_tilde_at(rho, self.a(rho), 0, &z, &roots)?;
                let mut v = if shifted { &z - &f0 } else { &Cplx::one(prec) - &f0 };
                for i in rho - p..rho {
                    v = &v * &self.f_tilde_at(i, self.a(i), 0, &z, &roots)?;
                }
                Ok(rel_gap(&v, &a))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }

    /// a^{(ρ+p+1)}/a^{(ρ)} against the quotient of 1 − F̃_0 (or z − F̃_0).
    pub fn quotient_residual(&self, rho: i64, points: &[Cplx]) -> Result<f64> {
        let p = self.p() as i64;
        let prec = self.prec();
        let shifted = self.shape.ell(self.shape.reduce_rho(rho) as u64) == self.p();
        let target = Cplx::from_real(&(Float::with_val(prec, self.a(rho + p + 1)) / self.a(rho)));
        let res = points
            .par_iter()
            .map(|z| -> Result<f64> {
                let z = z.with_prec(prec);
                let roots = self.roots(&z)?;
                let hi = self.f_tilde_at(rho + p + 1, self.a(rho + p + 1), 0, &z, &roots)?;
                let lo = self.f_tilde_at(rho, self.a(rho), 0, &z, &roots)?;
                let base = if shifted { z.clone() } else { Cplx::one(prec) };
                let q = &(&base - &hi) / &(&base - &lo);
                Ok(rel_gap(&q, &target))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }

    /// The ratio (F̃_k/F̃_{k−1}) / (ξ_k η_k) must not depend on z; returns
    /// the max relative spread over the points, for k = 1..=p.
    pub fn quotient_constancy(&self, rho: i64, k: usize, points: &[Cplx]) -> Result<f64> {
        let p = self.p();
        if k == 0 || k > p {
            return Err(Error::Config(format!("quotient identity needs 1 <= k <= p, got {k}")));
        }
        let prec = self.prec();
        let xi = self.shape.xi_has_z(rho, k);
        let vals = points
            .par_iter()
            .map(|z| -> Result<Cplx> {
                let z = z.with_prec(prec);
                let roots = self.roots(&z)?;
                let a = self.a(rho);
                let num = self.f_tilde_at(rho, a, k, &z, &roots)?;
                let den = self.f_tilde_at(rho, a, k - 1, &z, &roots)?;
                let mut rhs = self.eta_at(rho, a, k, &roots)?;
                if xi {
                    rhs = &rhs * &z;
                }
                Ok(&(&num / &den) / &rhs)
            })
            .collect::<Result<Vec<Cplx>>>()?;
        Ok(vals.iter().map(|v| rel_gap(v, &vals[0])).fold(0.0, f64::max))
    }

    /// max |f_k^{(ρ)} − f_k^{(ρ+p)}| relative.
    pub fn periodicity_residual(&self, rho: i64, k: usize, points: &[Cplx]) -> Result<f64> {
        let p = self.p() as i64;
        let res = points
            .iter()
            .map(|z| Ok(rel_gap(&self.f_product(rho, k, z)?, &self.f_product(rho + p, k, z)?)))
            .collect::<Result<Vec<f64>>>()?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }

    /// max |f_0^{(ρ)} φ_0^{(l)} − 1|.
    pub fn f0_residual(&self, rho: i64, points: &[Cplx]) -> Result<f64> {
        let prec = self.prec();
        let fam = self.family(rho);
        let res = points
            .iter()
            .map(|z| {
                let f0 = self.f_product(rho, 0, z)?;
                let roots = self.roots(z)?;
                let v = &f0 * &fam.phi_of_w(&roots[0]);
                Ok(rel_gap(&v, &Cplx::one(prec)))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(res.into_iter().fold(0.0, f64::max))
    }

    /// Divisor of η^{(ρ)}: value 1 at ∞^{(0)}, simple zero at ∞^{(l)} and
    /// simple pole at 0^{(k(ρ))}, by four-point circle averages.
    pub fn eta_divisor(&self, rho: i64) -> Result<EtaDivisor> {
        let prec = self.prec();
        let pair = self.shape.index_pair(rho);
        let circle = |radius: f64, f: &dyn Fn(&Cplx) -> Result<Cplx>| -> Result<Cplx> {
            let mut acc = Cplx::zero(prec);
            for m in 0..4 {
                let theta = std::f64::consts::PI * (2 * m + 1) as f64 / 4.0;
                let z = Cplx::from_f64(prec, radius * theta.cos(), radius * theta.sin());
                acc = &acc + &f(&z)?;
            }
            Ok(acc.scale(&Float::with_val(prec, 0.25)))
        };
        let far = self.far_radius();
        let v0 = circle(far, &|z| self.eta(rho, 0, z))?;
        let vl = circle(far, &|z| self.eta(rho, pair.l, z))?;
        let cl = circle(far, &|z| Ok(&self.eta(rho, pair.l, z)? * z))?;
        let on_slit = self.zero_interval.is_some_and(|kb| pair.k == kb || pair.k == kb + 1)
            || self.intervals.iter().any(|(a, b)| a.is_zero() || b.is_zero());
        let (pole_stability, pole_residue) = if on_slit {
            (None, None)
        } else {
            let gap = self
                .intervals
                .iter()
                .flat_map(|(a, b)| [a.to_f64().abs(), b.to_f64().abs()])
                .filter(|v| *v > 0.0)
                .fold(f64::INFINITY, f64::min);
            let r = 1e-3 * gap;
            let c1 = circle(r, &|z| Ok(&self.eta(rho, pair.k, z)? * z))?;
            let c2 = circle(r / 2.0, &|z| Ok(&self.eta(rho, pair.k, z)? * z))?;
            (Some(rel_gap(&c1, &c2)), Some(c2.abs().to_f64()))
        };
        Ok(EtaDivisor {
            rho: pair.rho,
            value_at_infinity: (&v0 - &Cplx::one(prec)).abs().to_f64(),
            zero_at_infinity: vl.abs().to_f64(),
            zero_coefficient: cl.abs().to_f64(),
            pole_stability,
            pole_residue,
        })
    }

    /// Consequences of where the origin sits: if 0 ∈ Δ_k̄, the collisions
    /// a^{(ρ̄−p)} = a^{(ρ̄)} and F̃_k^{(ρ̄)}/F̃_k^{(ρ̄−p)} ∈ {1, z}; otherwise
    /// distinctness of {a^{(ρ+mp)}}_{m=0..=p} for every ρ.
    pub fn zero_at_origin_collision(&self, tolerance: f64, margin: f64, points: &[Cplx]) -> Result<Vec<Check>> {
        let p = self.p() as i64;
        let period = self.shape.period() as i64;
        let mut out = Vec::new();
        match self.zero_interval {
            Some(kb) => {
                for rb in (0..period).filter(|&r| self.shape.index_pair(r).k == kb) {
                    let d = Float::with_val(self.prec(), self.a(rb - p) - self.a(rb)).abs().to_f64();
                    out.push(Check::at_most(
                        format!("collision a({}) = a({rb})", self.shape.reduce_rho(rb - p)),
                        "origin in an interval",
                        d,
                        tolerance,
                    ));
                    for k in 0..self.p() {
                        let mut worst = 0.0f64;
                        for z in points {
                            let num = self.f_tilde(rb, k, z)?;
                            let den = self.f_tilde(rb - p, k, z)?;
                            let expect = if k == kb { z.with_prec(self.prec()) } else { Cplx::one(self.prec()) };
                            worst = worst.max(rel_gap(&(&num / &den), &expect));
                        }
                        out.push(Check::at_most(
                            format!("collision quotient F{k} rho={rb}"),
                            "origin in an interval",
                            worst,
                            tolerance,
                        ));
                    }
                }
            }
            None => {
                for rho in 0..period {
                    out.push(Check::at_least(
                        format!("distinct a(rho+mp) rho={rho}"),
                        "origin outside the intervals",
                        self.min_gap(rho, p, p + 1),
                        margin,
                    ));
                }
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let period = self.shape.period();
        let pairs: Vec<Value> = (0..period)
            .map(|r| {
                let ip = self.shape.index_pair(r as i64);
                json!({"rho": r, "k": ip.k, "l": ip.l, "a": to_decimal(&self.a_pred[r])})
            })
            .collect();
        json!({
            "p": self.p(),
            "precision_bits": self.prec(),
            "limits": pairs,
            "families": self.families.iter().map(ConformalFamily::to_json).collect::<Vec<_>>(),
            "normalizing_constants": self.c_constants.iter().map(|c| c.iter().map(to_decimal).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "zero_interval": self.zero_interval,
            "sum_rule_residuals": (0..period).map(|r| to_decimal(&self.sum_rule_residual(r as i64))).collect::<Vec<_>>(),
        })
    }
}
