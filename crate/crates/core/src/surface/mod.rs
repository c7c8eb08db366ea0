//! Genus-zero uniformization of the (p+1)-sheeted surface glued along the
//! intervals Δ_k, its sheet branches and the normalized conformal maps φ^{(l)}.

mod branches;
mod family;
mod map;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::Float;
use serde_json::{json, Value};

pub use branches::phi_branch;
pub use family::{laurent_fit, normalize_family, ConformalFamily, LaurentFit};
pub use map::{MapF64, RationalMap};

use crate::error::{Error, Result};
use crate::linalg::solve_full_pivot;
use crate::measures::StarSystemConfig;
use crate::num::to_decimal;

const HOMOTOPY_BITS: u32 = 128;

/// Certified rational coordinate on the surface.
#[derive(Clone, Debug)]
pub struct Uniformization {
    pub p: usize,
    pub map: RationalMap,
    /// Critical points on the negative axis, `crit_in[k]` maps to an endpoint of Δ_k.
    pub crit_in: Vec<Float>,
    /// Critical points on the positive axis, interleaved with the poles.
    pub crit_out: Vec<Float>,
    pub target_in: Vec<Float>,
    pub target_out: Vec<Float>,
    /// Sheet index of each pole in the order 0, q_1, …, q_{p−1}, ∞.
    pub sheet_of_pole: Vec<usize>,
    pub newton_residual: Float,
    pub scale: f64,
    pub start_trials: usize,
}

fn targets(config: &StarSystemConfig, prec: u32) -> Result<(Vec<Float>, Vec<Float>)> {
    let mut tin = Vec::new();
    let mut tout = Vec::new();
    for k in 0..config.p {
        let (a, b) = config.interval(k, prec)?;
        if k % 2 == 0 {
            tin.push(a);
            tout.push(b);
        } else {
            tin.push(b);
            tout.push(a);
        }
    }
    Ok((tin, tout))
}

fn unpack(p: usize, x: &[Float], gamma: &Float) -> RationalMap {
    RationalMap {
        alpha: x[0].clone(),
        beta: x[1].clone(),
        gamma: gamma.clone(),
        poles: x[2..p + 1].to_vec(),
        residues: x[p + 1..2 * p].to_vec(),
    }
}

/// Residual vector and Jacobian of the critical-value system.
fn system(p: usize, x: &[Float], gamma: &Float, t: &[Float]) -> (Vec<Float>, Vec<Vec<Float>>) {
    let prec = x[0].prec();
    let n = 4 * p;
    let map = unpack(p, x, gamma);
    let crit = &x[2 * p..];
    let mut f = vec![Float::with_val(prec, 0); n];
    let mut jac = vec![vec![Float::with_val(prec, 0); n]; n];
    for (i, c) in crit.iter().enumerate() {
        let (r, r1, r2) = map.eval3(c);
        let c2 = Float::with_val(prec, c.square_ref());
        f[i] = Float::with_val(prec, &r - &t[i]);
        f[2 * p + i] = Float::with_val(prec, &r1 * &c2);
        let (row_v, row_d) = (i, 2 * p + i);
        jac[row_v][0] = c.clone();
        jac[row_v][1] = Float::with_val(prec, 1);
        jac[row_d][0] = c2.clone();
        for (j, (q, rj)) in map.poles.iter().zip(&map.residues).enumerate() {
            let d = Float::with_val(prec, c - q).recip();
            let d2 = Float::with_val(prec, d.square_ref());
            jac[row_v][2 + j] = Float::with_val(prec, rj * &d2);
            jac[row_v][p + 1 + j] = d.clone();
            jac[row_d][2 + j] = -Float::with_val(prec, rj * &d2) * &d * &c2 * 2u32;
            jac[row_d][p + 1 + j] = -Float::with_val(prec, &d2 * &c2);
        }
        jac[row_v][2 * p + i] = r1.clone();
        jac[row_d][2 * p + i] = Float::with_val(prec, &r2 * &c2) + Float::with_val(prec, &r1 * c) * 2u32;
    }
    (f, jac)
}

fn max_norm(v: &[Float]) -> Float {
    let prec = v[0].prec();
    v.iter().fold(Float::with_val(prec, 0), |m, x| m.max(&Float::with_val(prec, &*x.as_abs())))
}

/// in_{p−1} < … < in_0 < 0 < out_0 < q_1 < out_1 < … < q_{p−1} < out_{p−1}.
fn ordered(p: usize, x: &[Float]) -> bool {
    if x.iter().any(|v| !v.is_finite()) || x[0].is_zero() {
        return false;
    }
    let ins = &x[2 * p..3 * p];
    let outs = &x[3 * p..];
    let poles = &x[2..p + 1];
    if ins[0] >= 0 || ins.windows(2).any(|w| w[1] >= w[0]) {
        return false;
    }
    let mut chain: Vec<&Float> = vec![&outs[0]];
    for j in 0..p - 1 {
        chain.push(&poles[j]);
        chain.push(&outs[j + 1]);
    }
    outs[0] > 0 && chain.windows(2).all(|w| w[0] < w[1])
}

fn newton(p: usize, x: &mut Vec<Float>, gamma: &Float, t: &[Float], iters: usize, tol: &Float) -> Result<Float> {
    let prec = x[0].prec();
    let (mut f, mut jac) = system(p, x, gamma, t);
    let mut res = max_norm(&f);
    for _ in 0..iters {
        if res <= *tol {
            break;
        }
        let rhs: Vec<Float> = f.iter().map(|v| -Float::with_val(prec, v)).collect();
        let dx = solve_full_pivot(jac.clone(), rhs)?;
        let mut step = Float::with_val(prec, 1);
        let mut accepted = false;
        for _ in 0..30 {
            let trial = advance(p, x, &dx, &step);
            if ordered(p, &trial) {
                let (ft, jt) = system(p, &trial, gamma, t);
                let rt = max_norm(&ft);
                if rt.is_finite() && rt < res {
                    *x = trial;
                    f = ft;
                    jac = jt;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            step /= 2u32;
        }
        if !accepted {
            break;
        }
    }
    Ok(res)
}

/// Moves x along dx; sign-definite unknowns (α, poles, critical points) are
/// updated multiplicatively so that widely separated scales stay resolved.
fn advance(p: usize, x: &[Float], dx: &[Float], step: &Float) -> Vec<Float> {
    let prec = x[0].prec();
    x.iter()
        .zip(dx)
        .enumerate()
        .map(|(i, (a, d))| {
            let sd = Float::with_val(prec, d * step);
            let signed = i == 0 || (2..=p).contains(&i) || i >= 2 * p;
            if signed && !a.is_zero() {
                let e = Float::with_val(prec, &sd / a).exp();
                Float::with_val(prec, a * e)
            } else {
                Float::with_val(prec, a + sd)
            }
        })
        .collect()
}

/// Critical points of a candidate map from a sign scan of R'.
fn crit_scan(m: &MapF64) -> Option<(Vec<f64>, Vec<f64>)> {
    let p = m.poles.len() + 1;
    let mut poles = vec![0.0];
    poles.extend(&m.poles);
    let sign_changes = |g: &[f64]| -> Vec<f64> {
        let v: Vec<f64> = g.iter().map(|&w| m.d1(w)).collect();
        (0..g.len() - 1).filter(|&i| (v[i] < 0.0) != (v[i + 1] < 0.0)).map(|i| 0.5 * (g[i] + g[i + 1])).collect()
    };
    let mut outs = Vec::with_capacity(p);
    for i in 0..p {
        let lo = poles[i];
        let g: Vec<f64> = if i + 1 < p {
            let hi = poles[i + 1];
            (1..20001).map(|s| lo + (hi - lo) * s as f64 / 20001.0).collect()
        } else {
            (0..20000).map(|s| lo + 10f64.powf(-6.0 + 12.0 * s as f64 / 19999.0)).collect()
        };
        let c = sign_changes(&g);
        if c.len() != 1 {
            return None;
        }
        outs.push(c[0]);
    }
    let g: Vec<f64> = (0..40000).map(|s| -10f64.powf(6.0 - 12.0 * s as f64 / 39999.0)).collect();
    let mut ins = sign_changes(&g);
    if ins.len() != p {
        return None;
    }
    ins.reverse();
    Some((ins, outs))
}

struct Start {
    x: Vec<f64>,
    vin: Vec<f64>,
    vout: Vec<f64>,
}

fn random_start(p: usize, rng: &mut ChaCha8Rng, max_trials: usize) -> Option<(usize, Start)> {
    for trial in 0..max_trials {
        let mut q = Vec::with_capacity(p - 1);
        let mut acc = 0.0;
        for _ in 0..p - 1 {
            acc += rng.gen_range(-1.0f64..1.0).exp();
            q.push(acc);
        }
        let r: Vec<f64> = (0..p - 1).map(|k| if k % 2 == 0 { -1.0 } else { 1.0 } * rng.gen_range(0.0f64..5.0).exp()).collect();
        let alpha = if p % 2 == 1 { 1.0 } else { -1.0 } * rng.gen_range(-5.0f64..0.0).exp();
        let m = MapF64 { alpha, beta: 0.0, gamma: 1.0, poles: q.clone(), residues: r.clone() };
        let Some((ins, outs)) = crit_scan(&m) else { continue };
        let vin: Vec<f64> = ins.iter().map(|&c| m.eval(c)).collect();
        let vout: Vec<f64> = outs.iter().map(|&c| m.eval(c)).collect();
        let mut ok = true;
        for k in 0..p {
            ok &= if k % 2 == 0 { vout[k] > vin[k] } else { vout[k] < vin[k] };
        }
        for k in 0..p - 1 {
            let (lo_k, hi_k) = (vin[k].min(vout[k]), vin[k].max(vout[k]));
            let (lo_n, hi_n) = (vin[k + 1].min(vout[k + 1]), vin[k + 1].max(vout[k + 1]));
            ok &= if k % 2 == 0 { lo_k > hi_n } else { hi_k < lo_n };
        }
        if ok {
            let mut x = vec![alpha, 0.0];
            x.extend(q);
            x.extend(r);
            x.extend(ins);
            x.extend(outs);
            return Some((trial, Start { x, vin, vout }));
        }
    }
    None
}

/// dx/ds along F(x) = t(s) with t linear in s.
fn path_tangent(p: usize, x: &[Float], gamma: &Float, t: &[Float], ds: &[Float]) -> Option<Vec<Float>> {
    let prec = x[0].prec();
    let (_, jac) = system(p, x, gamma, t);
    let mut rhs = vec![Float::with_val(prec, 0); 4 * p];
    for (r, d) in rhs.iter_mut().zip(ds) {
        *r = d.clone();
    }
    solve_full_pivot(jac, rhs).ok()
}

fn homotopy(p: usize, start: &Start, gamma: &Float, tin: &[Float], tout: &[Float], scale: f64) -> Result<Vec<Float>> {
    let prec = HOMOTOPY_BITS;
    let mut x: Vec<Float> = start.x.iter().map(|&v| Float::with_val(prec, v)).collect();
    let s0: Vec<Float> = start.vin.iter().chain(&start.vout).map(|&v| Float::with_val(prec, v)).collect();
    let s1: Vec<Float> = tin.iter().chain(tout).map(|v| Float::with_val(prec, v)).collect();
    let tol = Float::with_val(prec, scale) >> 80;
    let accept = Float::with_val(prec, scale) >> 60;
    let ds: Vec<Float> = s1.iter().zip(&s0).map(|(a, b)| Float::with_val(prec, a - b)).collect();
    let mut s = 0.0f64;
    let mut h = 0.05f64;
    let t0: Vec<Float> = s0.clone();
    let mut tangent = path_tangent(p, &x, gamma, &t0, &ds);
    while s < 1.0 {
        let sn = (s + h).min(1.0);
        let sf = Float::with_val(prec, sn);
        let t: Vec<Float> = s0
            .iter()
            .zip(&s1)
            .map(|(a, b)| Float::with_val(prec, a * (1.0 - sn)) + Float::with_val(prec, b * &sf))
            .collect();
        let mut trial = match &tangent {
            Some(v) => advance(p, &x, v, &Float::with_val(prec, sn - s)),
            None => x.clone(),
        };
        if !ordered(p, &trial) {
            trial = x.clone();
        }
        let ok = match newton(p, &mut trial, gamma, &t, 12, &tol) {
            Ok(res) => res <= accept && ordered(p, &trial),
            Err(_) => false,
        };
        if ok {
            x = trial;
            tangent = path_tangent(p, &x, gamma, &t, &ds);
            s = sn;
            h = (h * 1.5).min(0.25);
        } else {
            h /= 2.0;
            if h < 1e-9 {
                return Err(Error::Convergence(format!("homotopy stalled at s = {s:.6}")));
            }
        }
    }
    Ok(x)
}

/// Solves for R with critical values at the interval endpoints.
pub fn solve_uniformization(config: &StarSystemConfig) -> Result<Uniformization> {
    config.validate()?;
    let p = config.p;
    let prec = config.precision_bits;
    let (tin, tout) = targets(config, prec)?;
    let scale = tin.iter().chain(&tout).map(|v| v.to_f64().abs()).fold(1.0, f64::max);
    let gamma = Float::with_val(prec, 1);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut trials = 0;
    let mut last_err = Error::Convergence("no admissible starting map".into());
    for _ in 0..16 {
        let Some((tr, start)) = random_start(p, &mut rng, 100_000) else { break };
        trials += tr + 1;
        let x = match homotopy(p, &start, &Float::with_val(HOMOTOPY_BITS, 1), &tin, &tout, scale) {
            Ok(x) => x,
            Err(e) => {
                last_err = e;
                continue;
            }
        };
        let mut x: Vec<Float> = x.iter().map(|v| Float::with_val(prec, v)).collect();
        let t: Vec<Float> = tin.iter().chain(&tout).cloned().collect();
        let tol = Float::with_val(prec, scale) >> (prec as i32 - 16);
        let res = newton(p, &mut x, &gamma, &t, 200, &tol)?;
        let limit = Float::with_val(prec, scale) >> (prec as i32 / 8);
        if res > limit {
            last_err = Error::Convergence(format!("Newton residual {:e}", res.to_f64()));
            continue;
        }
        let u = Uniformization {
            p,
            map: unpack(p, &x, &gamma),
            crit_in: x[2 * p..3 * p].to_vec(),
            crit_out: x[3 * p..].to_vec(),
            target_in: tin.clone(),
            target_out: tout.clone(),
            sheet_of_pole: (0..=p).collect(),
            newton_residual: res,
            scale,
            start_trials: trials,
        };
        branch_points_check(&u)?;
        return Ok(u);
    }
    Err(last_err)
}

/// Max critical-value residual; errors on a gluing mismatch.
pub fn branch_points_check(u: &Uniformization) -> Result<Float> {
    let p = u.p;
    let prec = u.map.prec();
    if u.sheet_of_pole.len() != p + 1 {
        return Err(Error::Combinatorics("sheet permutation has the wrong length".into()));
    }
    if u.sheet_of_pole[0] != 0 || u.sheet_of_pole[p] != p {
        return Err(Error::Combinatorics("poles 0 and infinity must carry sheets 0 and p".into()));
    }
    for k in 0..p {
        let (s, t) = (u.sheet_of_pole[k], u.sheet_of_pole[k + 1]);
        if s.min(t) != k || s.max(t) != k + 1 {
            return Err(Error::Combinatorics(format!(
                "critical point between poles {k} and {} joins sheets {s} and {t}, expected {k} and {}",
                k + 1,
                k + 1
            )));
        }
    }
    let mut x = vec![u.map.alpha.clone(), u.map.beta.clone()];
    x.extend(u.map.poles.iter().cloned());
    x.extend(u.map.residues.iter().cloned());
    x.extend(u.crit_in.iter().cloned());
    x.extend(u.crit_out.iter().cloned());
    if !ordered(p, &x) {
        return Err(Error::Combinatorics("critical points and poles are not interleaved".into()));
    }
    let mut worst = Float::with_val(prec, 0);
    for (c, t) in u.crit_in.iter().chain(&u.crit_out).zip(u.target_in.iter().chain(&u.target_out)) {
        let (r, r1, r2) = u.map.eval3(c);
        if r2.is_zero() {
            return Err(Error::Combinatorics("degenerate critical point".into()));
        }
        worst = worst.max(&Float::with_val(prec, &r - t).abs());
        worst = worst.max(&(Float::with_val(prec, c.square_ref()) * r1).abs());
    }
    Ok(worst)
}

impl Uniformization {
    pub fn prec(&self) -> u32 {
        self.map.prec()
    }

    pub fn to_json(&self) -> Value {
        let dec = |v: &[Float]| v.iter().map(to_decimal).collect::<Vec<_>>();
        json!({
            "p": self.p,
            "precision_bits": self.prec(),
            "alpha": to_decimal(&self.map.alpha),
            "beta": to_decimal(&self.map.beta),
            "gamma": to_decimal(&self.map.gamma),
            "poles": dec(&self.map.poles),
            "residues": dec(&self.map.residues),
            "critical_points_negative": dec(&self.crit_in),
            "critical_points_positive": dec(&self.crit_out),
            "sheet_of_pole": self.sheet_of_pole,
            "newton_residual": to_decimal(&self.newton_residual),
        })
    }
}
