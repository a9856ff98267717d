//! Richardson extrapolation of `lim_{t -> 0+} a(t)` along a dyadic sequence.

use crate::error::{GeoError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitOptions {
    /// First sample point.
    pub t0: f64,
    pub halvings: usize,
    /// Leading error exponent: `a(t) = L + C t^order + ...`.
    pub order: i32,
    /// Richardson columns; column `j` removes the `t^(order j)` term.
    pub depth: usize,
    /// Stop once consecutive extrapolants differ by less than this
    /// (relative, floored at 1).
    pub rel_tol: f64,
    /// When `rel_tol` is never met, the final increment must still be below
    /// this or the limit is reported as unstable.
    pub accept_tol: f64,
}

impl Default for LimitOptions {
    fn default() -> Self {
        LimitOptions {
            t0: 0.1,
            halvings: 12,
            order: 2,
            depth: 1,
            rel_tol: 1e-8,
            accept_tol: 1e-6,
        }
    }
}

impl LimitOptions {
    /// Defaults with `t0 = min(0.1, 0.1 tau)`.
    pub fn for_domain(tau: f64) -> Self {
        LimitOptions {
            t0: 0.1f64.min(0.1 * tau),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitEstimate {
    pub value: f64,
    /// Difference between the last two extrapolants.
    pub increment: f64,
    pub levels: usize,
}

pub fn extrapolate_to_zero<F>(mut a: F, opts: &LimitOptions) -> Result<LimitEstimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(opts.t0 > 0.0) || opts.halvings < 2 {
        return Err(GeoError::InvalidArgument(
            "limit needs a positive start and at least two halvings".into(),
        ));
    }
    let depth = opts.depth.max(1);
    let mut t = opts.t0;
    let mut prev_row = vec![a(t)?];
    let mut prev_best: Option<f64> = None;
    let mut increment = f64::INFINITY;
    let mut value = prev_row[0];
    for k in 1..=opts.halvings {
        t *= 0.5;
        let mut row = Vec::with_capacity(depth + 1);
        row.push(a(t)?);
        for j in 1..=depth.min(k) {
            let w = 2f64.powi(opts.order * j as i32);
            row.push((w * row[j - 1] - prev_row[j - 1]) / (w - 1.0));
        }
        let best = *row.last().unwrap();
        if let Some(p) = prev_best {
            increment = (best - p).abs();
            if increment < opts.rel_tol * best.abs().max(1.0) {
                return Ok(LimitEstimate {
                    value: best,
                    increment,
                    levels: k,
                });
            }
        }
        prev_best = Some(best);
        prev_row = row;
        value = best;
    }
    if increment < opts.accept_tol * value.abs().max(1.0) {
        Ok(LimitEstimate {
            value,
            increment,
            levels: opts.halvings,
        })
    } else {
        Err(GeoError::NoConvergence(format!(
            "extrapolants still moving by {increment:e} after {} halvings",
            opts.halvings
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn removes_quadratic_error() {
        let est = extrapolate_to_zero(|t| Ok(3.0 + 2.0 * t * t - t.powi(4)), &LimitOptions::default())
            .unwrap();
        assert!((est.value - 3.0).abs() < 1e-8);
    }

    #[test]
    fn first_order_mode() {
        let opts = LimitOptions {
            order: 1,
            ..Default::default()
        };
        let est = extrapolate_to_zero(|t| Ok((1.0 + t).ln() / t), &opts).unwrap();
        assert!((est.value - 1.0).abs() < 1e-7);
    }

    #[test]
    fn deeper_tableau_is_more_accurate() {
        let opts = LimitOptions {
            order: 1,
            depth: 3,
            rel_tol: 1e-12,
            ..Default::default()
        };
        let est = extrapolate_to_zero(|t| Ok(t.exp_m1() / t), &opts).unwrap();
        assert!((est.value - 1.0).abs() < 1e-11, "{}", est.value);
    }

    #[test]
    fn oscillation_is_reported() {
        let err = extrapolate_to_zero(|t| Ok((1.0 / t).sin()), &LimitOptions::default());
        assert!(matches!(err, Err(GeoError::NoConvergence(_))));
    }
}
