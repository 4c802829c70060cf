//! BiCGStab for complex nonsymmetric systems.

use ndarray::{Array1, ArrayView1};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dotc, matvec, norm2, CMatrix, CVector};

/// Breakdown threshold, relative to the norms of the vectors involved.
const BREAKDOWN: f64 = 1e-30;
/// Relative residual treated as converged: below it the recurrence only
/// shuffles rounding noise and the scalars degenerate.
const ROUNDOFF: f64 = 64.0 * f64::EPSILON;

/// A square linear map `x ↦ A x`.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: ArrayView1<Complex64>) -> CVector;
}

impl LinearOperator for CMatrix {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: ArrayView1<Complex64>) -> CVector {
        matvec(self.view(), x)
    }
}

#[derive(Debug, Clone)]
pub struct BicgstabOutcome {
    pub x: CVector,
    /// Relative residual `‖b − A x‖ / ‖b‖` of the returned iterate, tracked
    /// through the recurrence.
    pub residual: f64,
    pub iterations: usize,
    /// Set when the method broke down twice (once after a restart).
    pub breakdown: bool,
}

/// Runs at most `max_iters` BiCGStab iterations from `x0`, stopping early
/// once the relative residual drops to `tol`.
///
/// A breakdown (`ρ` or `ω` numerically zero) restarts once from the current
/// iterate; a second one returns the current iterate with `breakdown` set.
pub fn bicgstab<A: LinearOperator + ?Sized>(
    op: &A,
    b: ArrayView1<Complex64>,
    x0: ArrayView1<Complex64>,
    max_iters: usize,
    tol: f64,
) -> Result<BicgstabOutcome> {
    let n = op.dim();
    if b.len() != n || x0.len() != n {
        return Err(Error::Contract(format!(
            "bicgstab: operator is {n}×{n}, b has {}, x0 has {}",
            b.len(),
            x0.len()
        )));
    }
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok(BicgstabOutcome {
            x: Array1::zeros(n),
            residual: 0.0,
            iterations: 0,
            breakdown: false,
        });
    }

    let mut x = x0.to_owned();
    let mut r = &b - &op.apply(x.view());
    let mut rel = norm2(r.view()) / b_norm;
    let mut restarted = false;
    let mut breakdown = false;
    let mut iterations = 0;

    'restart: loop {
        let r_hat = r.clone();
        let mut rho = Complex64::new(1.0, 0.0);
        let mut alpha = Complex64::new(1.0, 0.0);
        let mut omega = Complex64::new(1.0, 0.0);
        let mut p: CVector = Array1::zeros(n);
        let mut v: CVector = Array1::zeros(n);

        while iterations < max_iters && rel > tol {
            if rel <= ROUNDOFF {
                break 'restart;
            }
            let r_hat_norm = norm2(r_hat.view());
            let rho_next = dotc(r_hat.view(), r.view());
            if rho_next.norm() < BREAKDOWN * r_hat_norm * norm2(r.view()) || omega.norm() < BREAKDOWN {
                if restarted {
                    breakdown = true;
                    break 'restart;
                }
                restarted = true;
                r = &b - &op.apply(x.view());
                rel = norm2(r.view()) / b_norm;
                continue 'restart;
            }
            let beta = (rho_next / rho) * (alpha / omega);
            rho = rho_next;
            p = &r + &((&p - &(&v * omega)) * beta);
            v = op.apply(p.view());
            let denom = dotc(r_hat.view(), v.view());
            if denom.norm() < BREAKDOWN * r_hat_norm * norm2(v.view()) {
                if restarted {
                    breakdown = true;
                    break 'restart;
                }
                restarted = true;
                continue 'restart;
            }
            alpha = rho / denom;
            let s = &r - &(&v * alpha);
            iterations += 1;

            let s_rel = norm2(s.view()) / b_norm;
            if s_rel <= tol {
                x.scaled_add(alpha, &p);
                rel = s_rel;
                break 'restart;
            }

            let t = op.apply(s.view());
            let tt = dotc(t.view(), t.view());
            omega = if tt.re.sqrt() < BREAKDOWN * s_rel * b_norm {
                Complex64::new(0.0, 0.0)
            } else {
                dotc(t.view(), s.view()) / tt
            };
            x.scaled_add(alpha, &p);
            x.scaled_add(omega, &s);
            r = &s - &(&t * omega);
            rel = norm2(r.view()) / b_norm;
        }
        break;
    }

    Ok(BicgstabOutcome {
        x,
        residual: rel,
        iterations,
        breakdown,
    })
}
