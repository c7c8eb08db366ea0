use rug::Float;

use super::{psi_zeros, recurrence_coefficient, MopSolver, SecondKindEvaluator};
use crate::error::{Error, Result};

/// K^{-2}_{n,k} = ∫ |P_{n,k} ψ_{n,k}| / |P_{n,k+1}| d|σ_{n,k}|.
pub fn k_norm(ev: &SecondKindEvaluator<'_>, k: usize) -> Result<Float> {
    let p = ev.set.shape.p();
    let pk = psi_zeros(ev, k)?;
    let pk1 = if k + 1 < p { Some(psi_zeros(ev, k + 1)?) } else { None };
    let m = ev.varying(k);
    let prec = ev.set.prec;
    let mut s = Float::with_val(prec, 0);
    for ((t, w), v) in m.nodes.iter().zip(&m.weights).zip(ev.node_values(k)) {
        let mut term = Float::with_val(prec, pk.poly(t) * v);
        if let Some(z) = &pk1 {
            term /= z.poly(t);
        }
        term *= w;
        s += &*term.as_abs();
    }
    Ok(s)
}

#[derive(Clone, Debug)]
pub struct KNormCheck {
    pub n: u64,
    pub k: usize,
    pub a_n: Float,
    pub norm_ratio: Float,
    pub residual: Float,
}

/// Compares a_n from the recurrence with K²_{n−p,k}/K²_{n,k}.
pub fn k_norm_check(solver: &MopSolver<'_>, n: u64, k: usize) -> Result<KNormCheck> {
    let p = solver.shape().p() as u64;
    if n < p || k as u64 >= p || n % p != k as u64 {
        return Err(Error::Config(format!("K-norm identity needs n >= p and n = k mod p (n={n}, k={k})")));
    }
    let q_prev = solver.compute_qd(n - p)?;
    let q_n = solver.compute_qd(n)?;
    let q_next = solver.compute_qd(n + 1)?;
    let step = recurrence_coefficient(solver.shape(), &q_prev, &q_n, &q_next)?;
    let k_prev = k_norm(&SecondKindEvaluator::new(solver.set, q_prev), k)?;
    let k_n = k_norm(&SecondKindEvaluator::new(solver.set, q_n), k)?;
    let norm_ratio = k_n / k_prev;
    let residual = Float::with_val(norm_ratio.prec(), &step.a_n - &norm_ratio).abs();
    Ok(KNormCheck { n, k, a_n: step.a_n, norm_ratio, residual })
}
