use rayon::prelude::*;
use rug::Float;

use crate::checks::Check;
use crate::counting::{check_counting, check_counting_with, SystemShape, Witness};
use crate::error::{Error, Result};
use crate::limits::{sample_points, LimitTable};
use crate::measures::{MeasureSet, StarSystemConfig};
use crate::mop::{
    interlace, k_norm_check, psi_zeros, recurrence_sequence, MonicPolynomial, MopSolver, RecurrenceStep,
    SecondKindEvaluator, ZeroSet,
};
use crate::num::Cplx;
use crate::surface::solve_uniformization;

/// What to do when the configured precision is below 64 + 12·d_max.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrecisionPolicy {
    Raise,
    Keep,
}

const MAX_PRECISION_RETRIES: usize = 2;

pub fn required_precision(d_max: usize) -> u32 {
    64 + 12 * d_max as u32
}

/// The configuration actually used for a run reaching degree `d_max`, and
/// a warning if it differs from the request or falls short of the rule.
pub fn effective_config(config: &StarSystemConfig, d_max: usize, policy: PrecisionPolicy) -> (StarSystemConfig, Option<String>) {
    let need = required_precision(d_max);
    if config.precision_bits >= need {
        return (config.clone(), None);
    }
    match policy {
        PrecisionPolicy::Raise => (
            config.with_precision(need),
            Some(format!("precision raised from {} to {need} bits for degree {d_max}", config.precision_bits)),
        ),
        PrecisionPolicy::Keep => (
            config.clone(),
            Some(format!("precision {} bits is below {need} bits suggested for degree {d_max}", config.precision_bits)),
        ),
    }
}

/// Q for n = 0..=n_max+1 and a_n for n = p..=n_max.
pub struct RecurrenceData {
    pub config: StarSystemConfig,
    pub set: MeasureSet,
    pub qs: Vec<MonicPolynomial>,
    pub steps: Vec<RecurrenceStep>,
    pub warnings: Vec<String>,
}

impl RecurrenceData {
    pub fn prepare(config: &StarSystemConfig, n_max: u64, policy: PrecisionPolicy) -> Result<Self> {
        let shape = config.shape();
        let d_max = shape.degree(n_max + 1);
        let (mut config, warning) = effective_config(config, d_max, policy);
        let mut warnings: Vec<String> = warning.into_iter().collect();
        for w in &warnings {
            log::warn!("{w}");
        }
        let mut retries = 0;
        loop {
            let set = MeasureSet::build(&config)?;
            let solver = MopSolver::new(&set, d_max);
            let qs = solver.sequence(n_max + 1)?;
            match recurrence_sequence(&shape, &qs) {
                Ok(steps) => return Ok(RecurrenceData { config, set, qs, steps, warnings }),
                Err(Error::Residual { what, residual, tolerance })
                    if policy == PrecisionPolicy::Raise && retries < MAX_PRECISION_RETRIES =>
                {
                    retries += 1;
                    let bits = config.precision_bits + config.precision_bits / 2;
                    let w = format!(
                        "{what}: residual {residual:e} above {tolerance:e} at {} bits, retrying at {bits}",
                        config.precision_bits
                    );
                    log::warn!("{w}");
                    warnings.push(w);
                    config = config.with_precision(bits);
                }
                Err(e) => return Err(e),
            }
        }
    }

    pub fn shape(&self) -> SystemShape {
        self.set.shape
    }

    pub fn n_max(&self) -> u64 {
        self.qs.len() as u64 - 2
    }

    pub fn a(&self, n: u64) -> &Float {
        &self.steps[(n - self.shape().p() as u64) as usize].a_n
    }

    /// (n, λ, ρ, a_n) for every computed n.
    pub fn rows(&self) -> Vec<(u64, u64, usize, &Float)> {
        let per = self.shape().period() as u64;
        self.steps.iter().map(|s| (s.n, s.n / per, (s.n % per) as usize, &s.a_n)).collect()
    }
}

/// Tail behavior of a_{λp(p+1)+ρ} for one ρ.
#[derive(Clone, Debug)]
pub struct LimitEstimate {
    pub rho: usize,
    pub estimate: Float,
    /// |a at λ_max − a at λ_max − 1|.
    pub last_increment: f64,
    /// Ratio of the last two increments.
    pub increment_ratio: f64,
    /// Exponent q in increment ~ λ^{−q} fitted to the last two increments.
    pub algebraic_order: f64,
    /// Increments for λ = 2..=λ_max.
    pub increments: Vec<f64>,
    /// Richardson combination of the values at λ_max and λ_max/2, assuming
    /// an error of order λ^{1−q} with q the fitted increment order.
    pub extrapolated: f64,
}

pub struct ConvergenceRun {
    pub data: RecurrenceData,
    pub lambda_max: u64,
    pub estimates: Vec<LimitEstimate>,
    pub checks: Vec<Check>,
}


pub fn run_convergence(config: &StarSystemConfig, lambda_max: u64) -> Result<ConvergenceRun> {
    if lambda_max < 3 {
        return Err(Error::Config(format!("lambda_max must be at least 3, got {lambda_max}")));
    }
    let per = config.shape().period() as u64;
    let n_max = per * lambda_max + per - 1;
    let data = RecurrenceData::prepare(config, n_max, PrecisionPolicy::Raise)?;
    Ok(convergence_from(data, lambda_max))
}

pub fn convergence_from(data: RecurrenceData, lambda_max: u64) -> ConvergenceRun {
    let shape = data.shape();
    let per = shape.period() as u64;
    let estimates: Vec<LimitEstimate> = (0..per as usize)
        .map(|rho| {
            let at = |lam: u64| data.a(lam * per + rho as u64).to_f64();
            let increments: Vec<f64> = (2..=lambda_max).map(|lam| (at(lam) - at(lam - 1)).abs()).collect();
            let last = increments[increments.len() - 1];
            let prev = increments[increments.len() - 2];
            let lam = lambda_max as f64;
            let order = (prev / last).ln() / (lam / (lam - 1.0)).ln();
            let half = lambda_max / 2;
            let w = (lam / half as f64).powf(order - 1.0);
            let extrapolated = if order > 1.0 && w.is_finite() { (w * at(lambda_max) - at(half)) / (w - 1.0) } else { at(lambda_max) };
            LimitEstimate {
                rho,
                estimate: data.a(lambda_max * per + rho as u64).clone(),
                last_increment: last,
                increment_ratio: last / prev,
                algebraic_order: order,
                increments,
                extrapolated,
            }
        })
        .collect();
    let mut checks = Vec::new();
    let min_a = data.steps.iter().map(|s| s.a_n.to_f64()).fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least("recurrence coefficients positive", "positivity of the limits", min_a, f64::MIN_POSITIVE));
    for e in &estimates {
        let tail = &e.increments[e.increments.len().saturating_sub(5)..];
        let rises = tail.windows(2).filter(|w| w[1] >= w[0]).count();
        checks.push(Check::at_most(
            format!("increments decrease over the last 5 periods rho={}", e.rho),
            "existence of the periodic limits",
            rises as f64,
            0.0,
        ));
    }
    ConvergenceRun { data, lambda_max, estimates, checks }
}

#[derive(Clone, Debug)]
pub struct CrossRow {
    pub rho: usize,
    pub recurrence: Float,
    pub surface: Float,
    pub discrepancy: f64,
    pub tolerance: f64,
}

pub struct CrossValidation {
    pub rows: Vec<CrossRow>,
    pub checks: Vec<Check>,
}

/// Recurrence estimates against surface predictions, together with the
/// positivity, sum-rule, distinctness and origin checks on both sides.
pub fn crossval(run: &ConvergenceRun, table: &LimitTable) -> CrossValidation {
    let shape = table.shape;
    let p = shape.p() as i64;
    let per = shape.period() as i64;
    let est = |rho: i64| run.estimates[shape.reduce_rho(rho)].estimate.to_f64();
    let ext = |rho: i64| run.estimates[shape.reduce_rho(rho)].extrapolated;
    let tail = |rho: i64| run.estimates[shape.reduce_rho(rho)].last_increment;
    let tol_of = |rho: i64| (10.0 * tail(rho)).max(1e-3);
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    for rho in 0..per {
        let surface = table.a(rho).clone();
        let discrepancy = (est(rho) - surface.to_f64()).abs();
        let tolerance = tol_of(rho);
        checks.push(Check::at_most(format!("recurrence vs surface rho={rho}"), "limits from the conformal maps", discrepancy, tolerance));
        checks.push(Check::at_most(
            format!("extrapolated recurrence vs surface rho={rho}"),
            "limits from the conformal maps",
            (ext(rho) - surface.to_f64()).abs(),
            tolerance,
        ));
        rows.push(CrossRow { rho: rho as usize, recurrence: run.estimates[rho as usize].estimate.clone(), surface, discrepancy, tolerance });
    }
    let min_surface = table.a_pred.iter().map(Float::to_f64).fold(f64::INFINITY, f64::min);
    checks.push(Check::at_least("surface limits positive", "positivity of the limits", min_surface, f64::MIN_POSITIVE));
    for rho in 0..per {
        let lhs: f64 = (rho..rho + p).map(est).sum();
        let rhs: f64 = (rho + p + 1..=rho + 2 * p).map(est).sum();
        checks.push(Check::at_most(format!("sum rule recurrence rho={rho}"), "sum rule", (lhs - rhs).abs(), 1e-3));
        checks.push(Check::at_most(
            format!("sum rule surface rho={rho}"),
            "sum rule",
            table.sum_rule_residual(rho).to_f64(),
            1e-12,
        ));
        checks.push(Check::at_least(
            format!("distinct a(rho+m(p+1)) rho={rho}"),
            "distinct limits within a residue class",
            table.min_gap(rho, p + 1, p),
            1e-6,
        ));
    }
    if let Some(kb) = table.zero_interval {
        for rb in (0..per).filter(|&r| shape.index_pair(r).k == kb) {
            checks.push(Check::at_most(
                format!("collision recurrence a({}) = a({rb})", shape.reduce_rho(rb - p)),
                "origin in an interval",
                (est(rb - p) - est(rb)).abs(),
                tol_of(rb).max(tol_of(rb - p)),
            ));
            checks.push(Check::at_most(
                format!("collision extrapolated recurrence a({}) = a({rb})", shape.reduce_rho(rb - p)),
                "origin in an interval",
                (ext(rb - p) - ext(rb)).abs(),
                tol_of(rb).max(tol_of(rb - p)),
            ));
        }
    }
    CrossValidation { rows, checks }
}

pub fn run_crossval(config: &StarSystemConfig, lambda_max: u64) -> Result<CrossValidation> {
    let run = run_convergence(config, lambda_max)?;
    let table = LimitTable::build(solve_uniformization(config)?)?;
    Ok(crossval(&run, &table))
}

/// Sup-norm deviation over the grid of the computed ratios at one λ from
/// their limits, for one k.
#[derive(Clone, Debug)]
pub struct RatioDeviation {
    pub lambda: u64,
    pub k: usize,
    /// P_{n+1,k}/P_{n,k} against F̃_k, for k < p.
    pub p_ratio: Option<f64>,
    /// ψ_{n+1,k}/ψ_{n,k} against its limit, for k ≥ 1.
    pub psi_ratio: Option<f64>,
}

impl RatioDeviation {
    pub fn worst(&self) -> f64 {
        self.p_ratio.unwrap_or(0.0).max(self.psi_ratio.unwrap_or(0.0))
    }
}

#[derive(Clone, Debug)]
pub struct RatioRun {
    pub rho: usize,
    pub rows: Vec<RatioDeviation>,
}

impl RatioRun {
    pub fn deviation(&self, lambda: u64, k: usize) -> Option<f64> {
        self.rows.iter().find(|r| r.lambda == lambda && r.k == k).map(RatioDeviation::worst)
    }
}

fn check_off_slits(table: &LimitTable, tau: &Cplx) -> Result<()> {
    if tau.im.is_zero() {
        for (a, b) in &table.intervals {
            if tau.re >= *a && tau.re <= *b {
                return Err(Error::OnSupport {
                    point: crate::num::to_decimal(&tau.re),
                    a: crate::num::to_decimal(a),
                    b: crate::num::to_decimal(b),
                });
            }
        }
    }
    if tau.re.is_zero() && tau.im.is_zero() {
        return Err(Error::Config("grid point at the origin".into()));
    }
    Ok(())
}

/// Maps star-plane points z to τ = z^{p+1}.
pub fn reduce_grid(p: usize, grid: &[Cplx]) -> Vec<Cplx> {
    grid.iter().map(|z| z.powi(p as u32 + 1)).collect()
}

/// Ratio deviations at each λ for grid points given in the reduced variable τ.
pub fn ratio_deviations(data: &RecurrenceData, table: &LimitTable, rho: usize, lambdas: &[u64], taus: &[Cplx]) -> Result<RatioRun> {
    let shape = data.shape();
    let p = shape.p();
    let per = shape.period() as u64;
    for tau in taus {
        check_off_slits(table, tau)?;
    }
    let p_limits: Vec<Vec<Cplx>> =
        (0..p).map(|k| taus.par_iter().map(|t| table.p_ratio_limit(rho as i64, k, t)).collect()).collect::<Result<_>>()?;
    let psi_limits: Vec<Vec<Cplx>> = (1..=p)
        .map(|k| taus.par_iter().map(|t| table.psi_ratio_limit(rho as i64, k, t)).collect())
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for &lambda in lambdas {
        let n = lambda * per + rho as u64;
        if n + 1 >= data.qs.len() as u64 {
            return Err(Error::Config(format!("lambda {lambda} exceeds the prepared range")));
        }
        let ev0 = SecondKindEvaluator::new(&data.set, data.qs[n as usize].clone());
        let ev1 = SecondKindEvaluator::new(&data.set, data.qs[n as usize + 1].clone());
        for k in 0..=p {
            let p_ratio = if k < p {
                let (z0, z1) = if k == 0 { (None, None) } else { (Some(psi_zeros(&ev0, k)?), Some(psi_zeros(&ev1, k)?)) };
                let poly = |zs: &Option<ZeroSet>, ev: &SecondKindEvaluator<'_>, t: &Cplx| match zs {
                    Some(z) => z.poly_complex(t),
                    None => ev.q.eval_complex(t),
                };
                let dev = taus
                    .iter()
                    .zip(&p_limits[k])
                    .map(|(t, lim)| {
                        let t = t.with_prec(data.set.prec);
                        let r = &poly(&z1, &ev1, &t) / &poly(&z0, &ev0, &t);
                        (&r - &lim.with_prec(data.set.prec)).abs().to_f64()
                    })
                    .fold(0.0, f64::max);
                Some(dev)
            } else {
                None
            };
            let psi_ratio = if k >= 1 {
                let devs = taus
                    .par_iter()
                    .zip(&psi_limits[k - 1])
                    .map(|(t, lim)| -> Result<f64> {
                        let t = t.with_prec(data.set.prec);
                        let r = &ev1.eval_complex(k, &t)? / &ev0.eval_complex(k, &t)?;
                        Ok((&r - &lim.with_prec(data.set.prec)).abs().to_f64())
                    })
                    .collect::<Result<Vec<f64>>>()?;
                Some(devs.into_iter().fold(0.0, f64::max))
            } else {
                None
            };
            rows.push(RatioDeviation { lambda, k, p_ratio, psi_ratio });
        }
    }
    Ok(RatioRun { rho, rows })
}

/// Ratio deviations at λ_max for star-plane grid points.
pub fn run_ratio(config: &StarSystemConfig, rho: usize, lambda_max: u64, grid: &[Cplx]) -> Result<RatioRun> {
    let shape = config.shape();
    let per = shape.period() as u64;
    let data = RecurrenceData::prepare(config, lambda_max * per + rho as u64 + 1, PrecisionPolicy::Raise)?;
    let table = LimitTable::build(solve_uniformization(config)?)?;
    let taus = reduce_grid(shape.p(), grid);
    ratio_deviations(&data, &table, rho, &[lambda_max], &taus)
}

/// Points in the τ-plane at distance at least `gap` from every interval
/// and from the origin.
pub fn ratio_grid(table: &LimitTable, count: usize, gap: f64) -> Vec<Cplx> {
    let prec = table.prec();
    let ivs: Vec<(f64, f64)> = table.intervals.iter().map(|(a, b)| (a.to_f64(), b.to_f64())).collect();
    let dist = |x: f64, y: f64| -> f64 {
        let to_iv = ivs
            .iter()
            .map(|&(a, b)| {
                let cx = x.clamp(a, b);
                ((x - cx).powi(2) + y * y).sqrt()
            })
            .fold(f64::INFINITY, f64::min);
        to_iv.min((x * x + y * y).sqrt())
    };
    let scale = table.surface.scale;
    sample_points(prec, scale, count * 8)
        .into_iter()
        .filter(|z| {
            let (x, y) = z.to_f64();
            dist(x, y) >= gap
        })
        .take(count)
        .collect()
}

/// Exhaustive counting invariants for each p.
pub struct CountingSuite {
    pub p_list: Vec<usize>,
    pub witnesses: Vec<Witness>,
}

pub fn run_counting_suite(p_list: &[usize]) -> Result<CountingSuite> {
    let mut witnesses = Vec::new();
    for &p in p_list {
        witnesses.extend(check_counting(&SystemShape::new(p)?));
    }
    Ok(CountingSuite { p_list: p_list.to_vec(), witnesses })
}

impl CountingSuite {
    pub fn check(&self) -> Check {
        Check::at_most(
            format!("counting invariants p in {:?}", self.p_list),
            "degree counting and sign combinatorics",
            self.witnesses.len() as f64,
            0.0,
        )
    }

    /// The same suite with Λ's closed form off by one at a single residue;
    /// it must produce witnesses.
    pub fn negative_control(&self) -> Check {
        let found: usize = self
            .p_list
            .iter()
            .filter_map(|&p| SystemShape::new(p).ok())
            .map(|s| {
                let per = s.period() as u64;
                check_counting_with(&s, |sh, n, k| sh.lambda_closed(n, k) + u64::from(n % per == 1 && k == 0)).len()
            })
            .sum();
        Check::at_least("counting control with mutated Lambda", "degree counting and sign combinatorics", found as f64, 1.0)
    }
}

/// Signs of φ_k^{(l)}(∞) read off the surface against the closed-form
/// table, and the ε product identity evaluated with the surface signs.
pub fn sign_table_checks(table: &LimitTable) -> Vec<Check> {
    let shape = table.shape;
    let p = shape.p();
    let mut table_mismatch = 0;
    for fam in &table.families {
        for k in 0..=p {
            if fam.sign_at_infinity(k) != shape.sign_phi_inf(fam.l, k) {
                table_mismatch += 1;
            }
        }
    }
    let mut eps_mismatch = 0;
    for rho in 0..shape.period() as i64 {
        let fam = table.family(rho);
        for k in 1..=p {
            let prod: i8 = (0..=p as i64).map(|j| shape.epsilon(rho - p as i64 + j, k)).product();
            if prod * fam.sign_at_infinity(k) != 1 {
                eps_mismatch += 1;
            }
        }
    }
    vec![
        Check::at_most("sign table of phi at infinity", "signs of the branches at infinity", table_mismatch as f64, 0.0),
        Check::at_most("epsilon products against surface signs", "epsilon identities", eps_mismatch as f64, 0.0),
    ]
}

/// Newton residual, critical values, branch product, preimages, gluing
/// and conjugation symmetry of the surface, each against 2^{−prec/8}.
pub fn surface_checks(table: &LimitTable, samples: usize) -> Result<Vec<Check>> {
    let u = &table.surface;
    let prec = u.prec();
    let tol = crate::num::pow2(prec, -(prec as i32) / 8).to_f64();
    let p = u.p;
    let mut out = vec![
        Check::at_most("uniformization Newton residual", "genus-zero surface", u.newton_residual.to_f64(), tol),
        Check::at_most("critical values at the endpoints", "genus-zero surface", crate::surface::branch_points_check(u)?.to_f64(), tol),
    ];
    let pts = sample_points(prec, u.scale, samples);
    let per_point = pts
        .par_iter()
        .map(|z| -> Result<(f64, f64, f64)> {
            let roots = u.sheet_roots(z)?;
            let pre = u.preimage_residual(z, &roots).to_f64();
            let mut prod_dev = 0.0f64;
            for fam in &table.families {
                let mut prod = Cplx::one(prec);
                for w in &roots {
                    prod = &prod * &fam.phi_of_w(w);
                }
                let target = Cplx::from_f64(prec, fam.product_sign as f64, 0.0);
                prod_dev = prod_dev.max((&prod - &target).abs().to_f64());
            }
            let conj = u.sheet_roots(&z.conj())?;
            let mut sym = 0.0f64;
            for (a, b) in roots.iter().zip(&conj) {
                let scale = a.abs().to_f64().max(1.0);
                sym = sym.max((&a.conj() - b).abs().to_f64() / scale);
            }
            Ok((pre, prod_dev, sym))
        })
        .collect::<Result<Vec<_>>>()?;
    let pre = per_point.iter().map(|v| v.0).fold(0.0, f64::max);
    let prod = per_point.iter().map(|v| v.1).fold(0.0, f64::max);
    let sym = per_point.iter().map(|v| v.2).fold(0.0, f64::max);
    out.push(Check::at_most("preimage residual R(w) = z", "branches of the surface", pre, tol));
    out.push(Check::at_most("branch product is +-1", "normalization of the conformal maps", prod, tol));
    out.push(Check::at_most("conjugation symmetry of the branches", "symmetry of the surface", sym, tol));
    let mut glue = 0.0f64;
    for k in 0..p {
        let (a, b) = &table.intervals[k];
        let width = Float::with_val(prec, b - a);
        for i in 0..16 {
            let s = (i as f64 + 0.5) / 16.0;
            let x = Cplx::from_real(&(Float::with_val(prec, &width * s) + a));
            let up = u.sheet_roots_from(&x, false)?;
            let down = u.sheet_roots_from(&x, true)?;
            for (i1, i2) in [(k, k + 1), (k + 1, k)] {
                let scale = up[i1].abs().to_f64().max(1.0);
                glue = glue.max((&up[i1] - &down[i2]).abs().to_f64() / scale);
            }
        }
    }
    out.push(Check::at_most("slit gluing continuity", "gluing of neighboring sheets", glue, tol));
    out.extend(sign_table_checks(table));
    Ok(out)
}

/// Largest relative change of the predicted limits and of ω_{l,j} when the
/// surface is recomputed at `bits`.
pub fn precision_stability(config: &StarSystemConfig, table: &LimitTable, bits: u32) -> Result<f64> {
    let hi = LimitTable::build(solve_uniformization(&config.with_precision(bits))?)?;
    let rel = |a: &Float, b: &Float| {
        let d = Float::with_val(bits, a - b).abs().to_f64();
        d / b.to_f64().abs().max(f64::MIN_POSITIVE)
    };
    let mut worst = 0.0f64;
    for (a, b) in table.a_pred.iter().zip(&hi.a_pred) {
        worst = worst.max(rel(a, b));
    }
    for (f, g) in table.families.iter().zip(&hi.families) {
        for (a, b) in f.omega_j.iter().zip(&g.omega_j) {
            worst = worst.max(rel(a, b));
        }
    }
    Ok(worst)
}

/// Every identity among the limit objects, on deterministic sample points.
pub fn limit_checks(table: &LimitTable) -> Result<Vec<Check>> {
    let prec = table.prec();
    let tol = crate::num::pow2(prec, -(prec as i32) / 8).to_f64();
    let p = table.p();
    let per = table.shape.period() as i64;
    let pts50 = sample_points(prec, table.surface.scale, 50);
    let pts20 = &pts50[..20];
    let mut out = Vec::new();
    let mut worst = |name: &str, anchor: &str, vals: Vec<f64>, tol: f64| {
        out.push(Check::at_most(name, anchor, vals.into_iter().fold(0.0, f64::max), tol));
    };
    let rhos: Vec<i64> = (0..per).collect();
    worst(
        "relation of a to F0 products",
        "a from the limit functions",
        rhos.iter().map(|&r| table.relation_residual(r, &pts50)).collect::<Result<_>>()?,
        tol,
    );
    worst(
        "quotient a(rho+p+1)/a(rho)",
        "a from the limit functions",
        rhos.iter().map(|&r| table.quotient_residual(r, pts20)).collect::<Result<_>>()?,
        tol,
    );
    let mut qc = Vec::new();
    for &r in &rhos {
        for k in 1..=p {
            qc.push(table.quotient_constancy(r, k, &pts50)?);
        }
    }
    worst("quotient F_k/F_(k-1) proportional to xi eta_k", "quotients of the limit functions", qc, tol);
    let mut per_res = Vec::new();
    let mut f0 = Vec::new();
    for &r in &rhos {
        for k in 0..p {
            per_res.push(table.periodicity_residual(r, k, pts20)?);
        }
        f0.push(table.f0_residual(r, pts20)?);
    }
    worst("periodicity f_k(rho) = f_k(rho+p)", "products of branches", per_res, tol);
    worst("f_0 phi_0 = 1", "products of branches", f0, tol);
    let radius = 1e4 * table.surface.scale;
    let mut lead = Vec::new();
    let mut laurent = Vec::new();
    for &r in &rhos {
        for k in 0..p {
            let c = table.leading_coefficient(r, k, radius)?;
            lead.push((&c - &Cplx::one(prec)).abs().to_f64());
        }
        laurent.push(Float::with_val(prec, table.laurent_a(r)? - table.a(r)).abs().to_f64() / table.a(r).to_f64());
    }
    worst("leading coefficient of F_k is 1", "monic normalization of the limit functions", lead, 1e-8);
    worst("a from the Laurent expansion of F_0", "Laurent expansion of F_0", laurent, 1e-8);
    let mut div0 = Vec::new();
    let mut divl = Vec::new();
    let mut pole = Vec::new();
    for &r in &rhos {
        let d = table.eta_divisor(r)?;
        div0.push(d.value_at_infinity);
        divl.push(d.zero_at_infinity);
        if let Some(s) = d.pole_stability {
            pole.push(s);
        }
    }
    worst("eta equals 1 at infinity on sheet 0", "divisor of eta", div0, 1e-8);
    worst("eta vanishes at infinity on sheet l", "divisor of eta", divl, 1e-8);
    worst("eta has a simple pole at the origin", "divisor of eta", pole, 1e-8);
    let mut sums = Vec::new();
    for &r in &rhos {
        sums.push(table.sum_rule_residual(r).to_f64());
    }
    worst("sum rule on the surface", "sum rule", sums, tol.min(1e-12));
    out.extend(table.zero_at_origin_collision(1e-12, 1e-6, pts20)?);
    Ok(out)
}

/// Boundary constancy on every Δ_k, and the 1% perturbation of a^{(ρ)}
/// that must break it.
pub fn boundary_checks(table: &LimitTable, rhos: &[i64]) -> Result<Vec<Check>> {
    let p = table.p();
    let mut out = Vec::new();
    for &rho in rhos {
        let mut dev = 0.0f64;
        let mut pert = 0.0f64;
        let a = Float::with_val(table.prec(), table.a(rho) * 1.01f64);
        for k in 0..p {
            dev = dev.max(table.boundary_constancy(rho, k)?);
            pert = pert.max(table.boundary_constancy_with(rho, k, &a)?);
        }
        out.push(Check::at_most(format!("boundary constancy rho={rho}"), "boundary value equations", dev, 1e-8));
        out.push(Check::at_least(format!("boundary control a*1.01 rho={rho}"), "boundary value equations", pert, 1e-3));
    }
    Ok(out)
}

/// a_n against K²_{n−p,k}/K²_{n,k}.
pub fn knorm_checks(set: &MeasureSet, pairs: &[(u64, usize)]) -> Result<Vec<Check>> {
    let d = pairs.iter().map(|&(n, _)| set.shape.degree(n + 1)).max().unwrap_or(0);
    let solver = MopSolver::new(set, d);
    pairs
        .par_iter()
        .map(|&(n, k)| {
            let c = k_norm_check(&solver, n, k)?;
            Ok(Check::at_most(format!("K-norm identity n={n} k={k}"), "recurrence coefficients from norms", c.residual.to_f64(), 1e-10))
        })
        .collect()
}

/// Zeros of ψ_{n,k} for n = 0..=n_max and k < p.
pub struct StructureRun {
    pub checks: Vec<Check>,
    pub zeros: Vec<ZeroSet>,
}

/// Squareness, simple zeros inside Δ_k, interlacing, orthogonality,
/// positivity and recurrence residuals for n ≤ n_max.
pub fn structure_checks(data: &RecurrenceData, n_max: u64) -> Result<StructureRun> {
    let shape = data.shape();
    let p = shape.p();
    let prec = data.set.prec;
    let solver = MopSolver::new(&data.set, shape.degree(n_max + 1));
    let mut square_fail = 0;
    let mut orth = 0.0f64;
    for n in 0..=n_max {
        let rows: u64 = (0..p).map(|j| shape.count_m(n, j)).sum();
        if rows != shape.degree(n) as u64 {
            square_fail += 1;
        }
        for r in solver.orthogonality_residuals(&data.qs[n as usize]) {
            orth = orth.max(r.relative.to_f64());
        }
    }
    let zeros: Vec<Vec<ZeroSet>> = (0..=n_max)
        .into_par_iter()
        .map(|n| {
            let ev = SecondKindEvaluator::new(&data.set, data.qs[n as usize].clone());
            (0..p).map(|k| psi_zeros(&ev, k)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let mut simple_fail = 0;
    for row in &zeros {
        for zs in row {
            let (a, b) = &data.set.base(zs.k).support;
            let inside = zs.zeros.iter().all(|x| x > a && x < b);
            let distinct = zs.zeros.windows(2).all(|w| w[0] < w[1]);
            if !inside || !distinct || zs.len() as u64 != shape.count_z(zs.n, zs.k) {
                simple_fail += 1;
            }
        }
    }
    let mut interlace_fail = 0;
    for n in 0..n_max as usize {
        for k in 0..p {
            if !interlace(&zeros[n][k].zeros, &zeros[n + 1][k].zeros) {
                interlace_fail += 1;
            }
        }
    }
    let upto: Vec<&RecurrenceStep> = data.steps.iter().filter(|s| s.n <= n_max).collect();
    let min_a = upto.iter().map(|s| s.a_n.to_f64()).fold(f64::INFINITY, f64::min);
    let max_res = upto.iter().map(|s| s.residual.to_f64()).fold(0.0, f64::max);
    let bound = crate::num::pow2(prec, -64).to_f64();
    let checks = vec![
        Check::at_most("orthogonality system is square", "degree counting", square_fail as f64, 0.0),
        Check::at_most("zeros simple and inside the intervals", "zeros of the functions of the second kind", simple_fail as f64, 0.0),
        Check::at_most("consecutive zeros interlace", "zeros of the functions of the second kind", interlace_fail as f64, 0.0),
        Check::at_most("orthogonality residual", "orthogonality conditions", orth, bound),
        Check::at_least("a_n positive", "positivity of the recurrence", min_a, f64::MIN_POSITIVE),
        Check::at_most("recurrence full-vector residual", "three-term recurrence", max_res, bound),
    ];
    Ok(StructureRun { checks, zeros: zeros.into_iter().flatten().collect() })
}
