//! Matrix-free conjugate gradients for the symmetric positive semi-definite
//! operators of this crate (the wide Laplacian and the viscous operator).
//! Right-hand sides must already lie in the operator's range.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct CgStats {
    pub iterations: usize,
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` starting from zero, stopping once `‖b − A x‖ ≤ tol·‖b‖`.
pub fn cg(
    what: &'static str,
    apply: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgStats)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let b_norm = dot(b, b).sqrt();
    if b_norm == 0.0 {
        return Ok((
            x,
            CgStats {
                iterations: 0,
                relative_residual: 0.0,
            },
        ));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut rr = dot(&r, &r);
    let target = tol * b_norm;
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            // Direction fell into the null space: nothing left to reduce.
            return Err(Error::NotConverged {
                what,
                iterations: it,
                residual: rr.sqrt() / b_norm,
            });
        }
        let alpha = rr / pap;
        for k in 0..n {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            // Confirm against the true residual; the recurrence drifts.
            let ax = apply(&x);
            let true_rr: f64 = b.iter().zip(&ax).map(|(bi, ai)| (bi - ai).powi(2)).sum();
            if true_rr.sqrt() <= 10.0 * target {
                return Ok((
                    x,
                    CgStats {
                        iterations: it,
                        relative_residual: true_rr.sqrt() / b_norm,
                    },
                ));
            }
            r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
            p = r.clone();
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_new / rr;
        for k in 0..n {
            p[k] = r[k] + beta * p[k];
        }
        rr = rr_new;
    }
    Err(Error::NotConverged {
        what,
        iterations: max_iter,
        residual: rr.sqrt() / b_norm,
    })
}
