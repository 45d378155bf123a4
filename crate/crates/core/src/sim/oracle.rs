//! Brute-force grid integration of `∫ |q_true − q_est|^α`, used to check
//! the closed-form distance identities in one and two dimensions.

use crate::error::{invalid, Error, Result};
use rayon::prelude::*;

pub const ORACLE_SPACING: f64 = 0.01;
pub const ORACLE_RADIUS_UNITS: f64 = 12.0;
pub const ORACLE_BOUNDARY_TOL: f64 = 1e-14;

/// Composite Simpson rule on the grid `h ℤ^p ∩ [−R, R]^p` with `h = 0.01` and
/// `R = 12 · scale`, for `p ∈ {1, 2}` and `α ∈ {1, 2}`.
///
/// Fails with [`Error::Numerical`] if the integrand exceeds `1e-14` anywhere
/// on the boundary of the box, since the truncated mass is then not negligible.
pub fn quadrature_loss_oracle<F, G>(qtrue: F, qest: G, alpha: u32, p: usize, scale: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
    G: Fn(&[f64]) -> f64 + Sync,
{
    if !(1..=2).contains(&alpha) {
        return Err(invalid(format!("exponent must be 1 or 2, got {alpha}")));
    }
    if !(1..=2).contains(&p) {
        return Err(invalid(format!("grid oracle supports p ≤ 2, got {p}")));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("scale must be positive"));
    }
    let h = ORACLE_SPACING;
    let m = (ORACLE_RADIUS_UNITS * scale / h).ceil() as i64;
    let radius = m as f64 * h;
    let g = |t: &[f64]| {
        let d = (qtrue(t) - qest(t)).abs();
        if alpha == 1 {
            d
        } else {
            d * d
        }
    };
    let boundary_check = |worst: f64| {
        if worst > ORACLE_BOUNDARY_TOL {
            Err(Error::Numerical(format!(
                "integrand {worst:e} at the grid boundary (radius {radius}) exceeds {ORACLE_BOUNDARY_TOL:e}"
            )))
        } else {
            Ok(())
        }
    };
    let w = |k: i64| -> f64 {
        if k.abs() == m {
            1.0 / 3.0
        } else if (k + m) % 2 == 1 {
            4.0 / 3.0
        } else {
            2.0 / 3.0
        }
    };
    if p == 1 {
        boundary_check(g(&[-radius]).max(g(&[radius])))?;
        let sum: f64 = (-m..=m).map(|k| w(k) * g(&[k as f64 * h])).sum();
        return Ok(sum * h);
    }
    let rows: Vec<(f64, f64)> = (-m..=m)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 * h;
            let mut s = 0.0;
            for j in -m..=m {
                s += w(j) * g(&[x, j as f64 * h]);
            }
            let edge = g(&[x, -radius]).max(g(&[x, radius]));
            (w(i) * s, edge)
        })
        .collect();
    let top_bottom = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let left_right = (-m..=m).map(|j| g(&[-radius, j as f64 * h]).max(g(&[radius, j as f64 * h]))).fold(0.0, f64::max);
    boundary_check(top_bottom.max(left_right))?;
    Ok(rows.iter().map(|r| r.0).sum::<f64>() * h * h)
}
