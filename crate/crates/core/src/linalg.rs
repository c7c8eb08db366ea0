//! Dense extended-precision linear solves.

use rug::Float;

use crate::error::{Error, Result};

/// Solves `a x = b` by Gaussian elimination with full pivoting.
pub fn solve_full_pivot(mut a: Vec<Vec<Float>>, mut b: Vec<Float>) -> Result<Vec<Float>> {
    let n = b.len();
    if a.len() != n || a.iter().any(|r| r.len() != n) {
        return Err(Error::Singular(format!("matrix is not {n}x{n}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let prec = b[0].prec();
    let mut col: Vec<usize> = (0..n).collect();
    let mut scale = Float::with_val(prec, 0);
    for row in &a {
        for v in row {
            if *v.as_abs() > scale {
                scale = Float::with_val(prec, &*v.as_abs());
            }
        }
    }
    if scale.is_zero() {
        return Err(Error::Singular("zero matrix".into()));
    }
    let floor = Float::with_val(prec, &scale) >> (prec as i32 - 8);
    for k in 0..n {
        let (mut pr, mut pc) = (k, k);
        let mut best = Float::with_val(prec, 0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, v) in row.iter().enumerate().skip(k) {
                if *v.as_abs() > best {
                    best = Float::with_val(prec, &*v.as_abs());
                    pr = i;
                    pc = j;
                }
            }
        }
        if best <= floor {
            return Err(Error::Singular(format!("pivot {k} below working precision")));
        }
        a.swap(k, pr);
        b.swap(k, pr);
        if pc != k {
            for row in a.iter_mut() {
                row.swap(k, pc);
            }
            col.swap(k, pc);
        }
        let (top, bottom) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for (off, row) in bottom.iter_mut().enumerate() {
            let i = k + 1 + off;
            if row[k].is_zero() {
                continue;
            }
            let f = Float::with_val(prec, &row[k] / &pivot_row[k]);
            for j in k + 1..n {
                row[j] -= Float::with_val(prec, &f * &pivot_row[j]);
            }
            row[k] = Float::with_val(prec, 0);
            let t = Float::with_val(prec, &f * &b[k]);
            b[i] -= t;
        }
    }
    let mut y = vec![Float::with_val(prec, 0); n];
    for k in (0..n).rev() {
        let mut s = b[k].clone();
        for j in k + 1..n {
            s -= Float::with_val(prec, &a[k][j] * &y[j]);
        }
        y[k] = s / &a[k][k];
    }
    let mut x = vec![Float::with_val(prec, 0); n];
    for (k, &c) in col.iter().enumerate() {
        x[c] = y[k].clone();
    }
    Ok(x)
}
