use std::path::Path;

use rug::Float;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::counting::SystemShape;
use crate::error::{Error, Result};
use crate::num::parse_real;

pub const DEFAULT_PRECISION_BITS: u32 = 256;
pub const DEFAULT_QUAD_NODES: usize = 128;
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Density (τ−a)^alpha (b−τ)^beta poly(τ) on one interval. Numbers are kept
/// as decimal text and parsed at whatever precision a computation needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub alpha: String,
    pub beta: String,
    pub poly: Vec<String>,
}

impl WeightSpec {
    pub fn lebesgue() -> Self {
        WeightSpec { alpha: "0".into(), beta: "0".into(), poly: vec!["1".into()] }
    }

    pub fn jacobi(alpha: &str, beta: &str) -> Self {
        WeightSpec { alpha: alpha.into(), beta: beta.into(), poly: vec!["1".into()] }
    }

    pub fn alpha(&self, prec: u32) -> Result<Float> {
        parse_real(prec, &self.alpha)
    }

    pub fn beta(&self, prec: u32) -> Result<Float> {
        parse_real(prec, &self.beta)
    }

    pub fn poly(&self, prec: u32) -> Result<Vec<Float>> {
        self.poly.iter().map(|c| parse_real(prec, c)).collect()
    }
}

pub fn eval_poly(coeffs: &[Float], x: &Float) -> Float {
    let prec = x.prec();
    let mut acc = Float::with_val(prec, 0);
    for c in coeffs.iter().rev() {
        acc *= x;
        acc += c;
    }
    acc
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StarSystemConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub p: usize,
    pub intervals: Vec<[String; 2]>,
    pub weights: Vec<WeightSpec>,
    pub precision_bits: u32,
    pub quad_nodes: usize,
    pub seed: u64,
}

fn number_text(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.trim().to_string()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(Error::Config(format!("{what} must be a number or decimal string"))),
    }
}

fn uint(v: Option<&Value>, what: &str, default: Option<u64>) -> Result<u64> {
    match v {
        None | Some(Value::Null) => default.ok_or_else(|| Error::Config(format!("missing field `{what}`"))),
        Some(x) => {
            let t = number_text(x, what)?;
            t.parse::<u64>().map_err(|_| Error::Config(format!("{what} must be a non-negative integer, got {t}")))
        }
    }
}

impl StarSystemConfig {
    pub fn new(p: usize, intervals: &[(&str, &str)], weights: Vec<WeightSpec>) -> Result<Self> {
        let cfg = StarSystemConfig {
            name: None,
            p,
            intervals: intervals.iter().map(|(a, b)| [a.to_string(), b.to_string()]).collect(),
            weights,
            precision_bits: DEFAULT_PRECISION_BITS,
            quad_nodes: DEFAULT_QUAD_NODES,
            seed: DEFAULT_SEED,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text)?;
        let obj = v.as_object().ok_or_else(|| Error::Config("config must be a JSON object".into()))?;
        let p = uint(obj.get("p"), "p", None)? as usize;
        let ivs = obj
            .get("intervals")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Config("missing array `intervals`".into()))?;
        let mut intervals = Vec::new();
        for (i, iv) in ivs.iter().enumerate() {
            let pair = iv.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                Error::Config(format!("intervals[{i}] must be a pair [a, b]"))
            })?;
            intervals.push([number_text(&pair[0], "interval endpoint")?, number_text(&pair[1], "interval endpoint")?]);
        }
        let weights = match obj.get("weights") {
            None | Some(Value::Null) => vec![WeightSpec::lebesgue(); intervals.len()],
            Some(Value::Array(ws)) => {
                let mut out = Vec::new();
                for w in ws {
                    let o = w.as_object().ok_or_else(|| Error::Config("weight must be an object".into()))?;
                    let alpha = o.get("alpha").map(|x| number_text(x, "alpha")).transpose()?.unwrap_or_else(|| "0".into());
                    let beta = o.get("beta").map(|x| number_text(x, "beta")).transpose()?.unwrap_or_else(|| "0".into());
                    let poly = match o.get("poly") {
                        None | Some(Value::Null) => vec!["1".to_string()],
                        Some(Value::Array(cs)) => cs.iter().map(|c| number_text(c, "poly coefficient")).collect::<Result<_>>()?,
                        Some(_) => return Err(Error::Config("poly must be an array".into())),
                    };
                    out.push(WeightSpec { alpha, beta, poly });
                }
                out
            }
            Some(_) => return Err(Error::Config("weights must be an array".into())),
        };
        let cfg = StarSystemConfig {
            name: obj.get("name").and_then(Value::as_str).map(str::to_string),
            p,
            intervals,
            weights,
            precision_bits: uint(obj.get("precision_bits"), "precision_bits", Some(DEFAULT_PRECISION_BITS as u64))? as u32,
            quad_nodes: uint(obj.get("quad_nodes"), "quad_nodes", Some(DEFAULT_QUAD_NODES as u64))? as usize,
            seed: uint(obj.get("seed"), "seed", Some(DEFAULT_SEED))?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Value {
        let ivs: Vec<Value> = self.intervals.iter().map(|[a, b]| Value::from(vec![a.clone(), b.clone()])).collect();
        let ws: Vec<Value> = self
            .weights
            .iter()
            .map(|w| serde_json::json!({"alpha": w.alpha, "beta": w.beta, "poly": w.poly}))
            .collect();
        let mut v = serde_json::json!({
            "p": self.p,
            "intervals": ivs,
            "weights": ws,
            "precision_bits": self.precision_bits,
            "quad_nodes": self.quad_nodes,
            "seed": self.seed,
        });
        if let Some(n) = &self.name {
            v["name"] = Value::from(n.clone());
        }
        v
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let text = serde_json::to_string(&self.to_json()).unwrap_or_default();
        let d = Sha256::digest(text.as_bytes());
        d.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn shape(&self) -> SystemShape {
        SystemShape::new(self.p).expect("validated")
    }

    pub fn with_precision(&self, bits: u32) -> Self {
        let mut c = self.clone();
        c.precision_bits = bits;
        c
    }

    pub fn with_nodes(&self, nodes: usize) -> Self {
        let mut c = self.clone();
        c.quad_nodes = nodes;
        c
    }

    pub fn interval(&self, k: usize, prec: u32) -> Result<(Float, Float)> {
        let [a, b] = &self.intervals[k];
        Ok((parse_real(prec, a)?, parse_real(prec, b)?))
    }

    pub fn interval_f64(&self, k: usize) -> (f64, f64) {
        let (a, b) = self.interval(k, 64).expect("validated");
        (a.to_f64(), b.to_f64())
    }

    /// Index k with 0 ∈ Δ_k, if any.
    pub fn zero_interval(&self) -> Option<usize> {
        (0..self.p).find(|&k| {
            let (a, b) = self.interval(k, 64).expect("validated");
            a.is_zero() || b.is_zero()
        })
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p;
        SystemShape::new(p)?;
        if self.intervals.len() != p {
            return Err(Error::Config(format!("expected {p} intervals, got {}", self.intervals.len())));
        }
        if self.weights.len() != p {
            return Err(Error::Config(format!("expected {p} weights, got {}", self.weights.len())));
        }
        if self.precision_bits < 128 {
            return Err(Error::Config(format!("precision_bits must be at least 128, got {}", self.precision_bits)));
        }
        if self.quad_nodes < 16 {
            return Err(Error::Config(format!("quad_nodes must be at least 16, got {}", self.quad_nodes)));
        }
        let prec = 128;
        let mut ivs = Vec::new();
        for k in 0..p {
            let (a, b) = self.interval(k, prec)?;
            if !(a < b) {
                return Err(Error::Config(format!("interval {k} is empty: a >= b")));
            }
            if k % 2 == 0 && a < 0 {
                return Err(Error::Config(format!("interval {k} must lie in [0, inf)")));
            }
            if k % 2 == 1 && b > 0 {
                return Err(Error::Config(format!("interval {k} must lie in (-inf, 0]")));
            }
            ivs.push((a, b));
        }
        for k in 0..p - 1 {
            let (a0, b0) = &ivs[k];
            let (a1, b1) = &ivs[k + 1];
            if !(b0 < a1 || b1 < a0) {
                return Err(Error::Config(format!("intervals {k} and {} intersect", k + 1)));
            }
        }
        for (k, w) in self.weights.iter().enumerate() {
            let (alpha, beta) = (w.alpha(prec)?, w.beta(prec)?);
            if !(alpha > -1 && beta > -1) {
                return Err(Error::Config(format!("weight {k}: endpoint exponents must exceed -1")));
            }
            let poly = w.poly(prec)?;
            if poly.is_empty() {
                return Err(Error::Config(format!("weight {k}: empty polynomial factor")));
            }
            let (a, b) = &ivs[k];
            let samples = 1024;
            for i in 0..=samples {
                let t = Float::with_val(prec, i) / samples;
                let x = Float::with_val(prec, b - a) * t + a;
                if eval_poly(&poly, &x) <= 0 {
                    return Err(Error::Quadrature(format!(
                        "weight {k}: polynomial factor is not positive on [a, b] (value at {} is {})",
                        x.to_f64(),
                        eval_poly(&poly, &x).to_f64()
                    )));
                }
            }
        }
        Ok(())
    }
}

pub fn load_preset(name: &str) -> Option<StarSystemConfig> {
    let text = match name {
        "cfg_a" | "A" => include_str!("../../../../configs/cfg_a.json"),
        "cfg_b" | "B" => include_str!("../../../../configs/cfg_b.json"),
        "cfg_c" | "C" => include_str!("../../../../configs/cfg_c.json"),
        _ => return None,
    };
    StarSystemConfig::from_json_str(text).ok()
}
