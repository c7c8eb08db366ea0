//! Generating measures on the real intervals, nested measures built from
//! iterated Cauchy transforms, and the varying measures σ_{n,k}.

mod config;
pub mod quadrature;

use std::fmt;

use rayon::prelude::*;
use rug::Float;
use serde::Serialize;

pub use config::{eval_poly, load_preset, StarSystemConfig, WeightSpec, DEFAULT_PRECISION_BITS, DEFAULT_QUAD_NODES};

use crate::counting::SystemShape;
use crate::error::{Error, Result};
use crate::num::{to_decimal, Cplx};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum MeasureTag {
    Base { k: usize },
    Nested { k: usize, j: usize },
    Varying { n: u64, k: usize },
}

impl fmt::Display for MeasureTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeasureTag::Base { k } => write!(f, "sigma*_{k}"),
            MeasureTag::Nested { k, j } => write!(f, "mu_({k},{j})"),
            MeasureTag::Varying { n, k } => write!(f, "sigma_({n},{k})"),
        }
    }
}

/// Quadrature representation of a measure on one interval.
#[derive(Clone, Debug)]
pub struct DiscretizedMeasure {
    pub interval_id: usize,
    pub support: (Float, Float),
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
    pub tag: MeasureTag,
}

impl DiscretizedMeasure {
    pub fn prec(&self) -> u32 {
        self.nodes.first().map(Float::prec).unwrap_or(self.support.0.prec())
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn mass(&self) -> Float {
        let mut s = Float::with_val(self.prec(), 0);
        for w in &self.weights {
            s += w;
        }
        s
    }

    pub fn abs_mass(&self) -> Float {
        let mut s = Float::with_val(self.prec(), 0);
        for w in &self.weights {
            s += &*w.as_abs();
        }
        s
    }

    /// +1 or −1 when every weight has that sign, `None` otherwise.
    pub fn sign(&self) -> Option<i8> {
        if self.weights.iter().all(|w| *w > 0) {
            Some(1)
        } else if self.weights.iter().all(|w| *w < 0) {
            Some(-1)
        } else {
            None
        }
    }

    /// τ·dm on the same nodes.
    pub fn times_node(&self, tag: MeasureTag) -> Self {
        let prec = self.prec();
        let weights = self.nodes.iter().zip(&self.weights).map(|(t, w)| Float::with_val(prec, t * w)).collect();
        DiscretizedMeasure { weights, tag, ..self.clone() }
    }

    fn on_support(&self, x: &Float) -> bool {
        *x >= self.support.0 && *x <= self.support.1
    }

    fn support_error(&self, point: String) -> Error {
        Error::OnSupport { point, a: to_decimal(&self.support.0), b: to_decimal(&self.support.1) }
    }
}

/// Gauss–Jacobi discretization of σ*_k with an explicit node count and precision.
pub fn build_base_measure_with(config: &StarSystemConfig, k: usize, nodes: usize, prec: u32) -> Result<DiscretizedMeasure> {
    let w = &config.weights[k];
    let (a, b) = config.interval(k, prec + 32)?;
    let (alpha, beta) = (w.alpha(prec + 32)?, w.beta(prec + 32)?);
    let poly = w.poly(prec + 32)?;
    let rule = quadrature::gauss_jacobi(nodes, &beta, &alpha, prec + 32)?;
    let half = Float::with_val(prec + 32, &b - &a) / 2u32;
    let mid = Float::with_val(prec + 32, &a + &b) / 2u32;
    let scale = Float::with_val(prec + 32, half.ln_ref()) * (Float::with_val(prec + 32, &alpha + &beta) + 1u32);
    let scale = scale.exp();
    let mut ns = Vec::with_capacity(nodes);
    let mut ws = Vec::with_capacity(nodes);
    for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
        let t = Float::with_val(prec + 32, &half * x) + &mid;
        let pv = eval_poly(&poly, &t);
        if pv <= 0 {
            return Err(Error::Quadrature(format!("weight {k}: polynomial factor vanishes on the interval")));
        }
        let wt = Float::with_val(prec + 32, wx * &scale) * pv;
        ns.push(Float::with_val(prec, &t));
        ws.push(Float::with_val(prec, &wt));
    }
    Ok(DiscretizedMeasure {
        interval_id: k,
        support: (Float::with_val(prec, &a), Float::with_val(prec, &b)),
        nodes: ns,
        weights: ws,
        tag: MeasureTag::Base { k },
    })
}

pub fn build_base_measure(config: &StarSystemConfig, k: usize) -> Result<DiscretizedMeasure> {
    build_base_measure_with(config, k, config.quad_nodes, config.precision_bits)
}

/// ∫ dm(t)/(x − t) for real x off the support.
pub fn cauchy_transform(m: &DiscretizedMeasure, x: &Float) -> Result<Float> {
    if m.on_support(x) {
        return Err(m.support_error(to_decimal(x)));
    }
    let prec = m.prec().max(x.prec());
    let mut s = Float::with_val(prec, 0);
    for (t, w) in m.nodes.iter().zip(&m.weights) {
        s += Float::with_val(prec, w / Float::with_val(prec, x - t));
    }
    Ok(s)
}

pub fn cauchy_transform_complex(m: &DiscretizedMeasure, z: &Cplx) -> Result<Cplx> {
    if z.im.is_zero() && m.on_support(&z.re) {
        return Err(m.support_error(format!("{:?}", z)));
    }
    let prec = m.prec().max(z.prec());
    let mut acc = Cplx::zero(prec);
    let im2 = Float::with_val(prec, z.im.square_ref());
    for (t, w) in m.nodes.iter().zip(&m.weights) {
        let dr = Float::with_val(prec, &z.re - t);
        let den = Float::with_val(prec, dr.square_ref()) + &im2;
        let f = Float::with_val(prec, w / &den);
        acc.re += Float::with_val(prec, &dr * &f);
        acc.im -= Float::with_val(prec, &z.im * &f);
    }
    Ok(acc)
}

/// [∫ τ^s dm] for s = 0..=s_max.
pub fn moments(m: &DiscretizedMeasure, s_max: usize) -> Vec<Float> {
    let prec = m.prec();
    let mut out = vec![Float::with_val(prec, 0); s_max + 1];
    for (t, w) in m.nodes.iter().zip(&m.weights) {
        let mut pw = w.clone();
        for o in out.iter_mut() {
            *o += &pw;
            pw *= t;
        }
    }
    out
}

/// All base and nested measures for one configuration, built eagerly and
/// immutable afterwards.
#[derive(Clone, Debug)]
pub struct MeasureSet {
    pub shape: SystemShape,
    pub prec: u32,
    pub nodes: usize,
    base: Vec<DiscretizedMeasure>,
    nested: Vec<Vec<Option<DiscretizedMeasure>>>,
}

impl MeasureSet {
    pub fn build(config: &StarSystemConfig) -> Result<Self> {
        Self::build_with(config, config.quad_nodes, config.precision_bits)
    }

    pub fn build_with(config: &StarSystemConfig, nodes: usize, prec: u32) -> Result<Self> {
        config.validate()?;
        let p = config.p;
        let base: Vec<DiscretizedMeasure> =
            (0..p).into_par_iter().map(|k| build_base_measure_with(config, k, nodes, prec)).collect::<Result<_>>()?;
        let mut nested: Vec<Vec<Option<DiscretizedMeasure>>> = vec![vec![None; p]; p];
        for k in 0..p {
            nested[k][k] = Some(DiscretizedMeasure { tag: MeasureTag::Nested { k, j: k }, ..base[k].clone() });
        }
        for gap in 1..p {
            let built: Vec<(usize, DiscretizedMeasure)> = (0..p - gap)
                .into_par_iter()
                .map(|k| {
                    let j = k + gap;
                    let inner = nested[k + 1][j].as_ref().expect("built in previous gap");
                    let outer = &base[k];
                    let weights = outer
                        .nodes
                        .iter()
                        .zip(&outer.weights)
                        .map(|(t, w)| Ok(cauchy_transform(inner, t)? * t * w))
                        .collect::<Result<Vec<Float>>>()?;
                    let m = DiscretizedMeasure { weights, tag: MeasureTag::Nested { k, j }, ..outer.clone() };
                    if m.sign().is_none() {
                        return Err(Error::SignChange { tag: m.tag.to_string() });
                    }
                    Ok((k, m))
                })
                .collect::<Result<_>>()?;
            for (k, m) in built {
                nested[k][k + gap] = Some(m);
            }
        }
        Ok(MeasureSet { shape: config.shape(), prec, nodes, base, nested })
    }

    pub fn base(&self, k: usize) -> &DiscretizedMeasure {
        &self.base[k]
    }

    /// μ_{k,j} for 0 ≤ k ≤ j ≤ p−1.
    pub fn nested(&self, k: usize, j: usize) -> &DiscretizedMeasure {
        assert!(k <= j && j < self.shape.p(), "nested measure index out of range");
        self.nested[k][j].as_ref().expect("all nested measures are built")
    }

    /// σ_{n,k}: σ*_k if ℓ(n) ≤ k, τ·dσ*_k otherwise.
    pub fn varying(&self, n: u64, k: usize) -> DiscretizedMeasure {
        let tag = MeasureTag::Varying { n, k };
        if self.shape.ell(n) <= k {
            DiscretizedMeasure { tag, ..self.base[k].clone() }
        } else {
            self.base[k].times_node(tag)
        }
    }

    /// Whether σ_{n,k} carries the extra factor τ.
    pub fn varying_has_tau(&self, n: u64, k: usize) -> bool {
        self.shape.ell(n) > k
    }
}

pub fn nested_measure(set: &MeasureSet, k: usize, j: usize) -> &DiscretizedMeasure {
    set.nested(k, j)
}

pub fn varying_measure(set: &MeasureSet, n: u64, k: usize) -> DiscretizedMeasure {
    set.varying(n, k)
}
