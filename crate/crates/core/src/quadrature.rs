//! Adaptive Simpson integration used by the divergence cross-check oracle.

use crate::error::{Error, Result};

const MAX_DEPTH: usize = 60;

/// Integrate `f` over `[a, b]` to absolute tolerance `abs_tol`.
///
/// The interval is first cut at the supplied `breakpoints` (clipped to the
/// interval) so that narrow features are never skipped by the initial
/// Simpson estimate, then each panel is refined recursively.
pub fn integrate(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    abs_tol: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(Error::InvalidParameter {
            name: "interval",
            value: b - a,
            constraint: "bounds must be finite with a < b",
        });
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|t| *t > a && *t < b)
        .collect();
    cuts.push(a);
    cuts.push(b);
    cuts.sort_by(|p, q| p.partial_cmp(q).expect("finite breakpoints"));
    cuts.dedup();

    let mut total = 0.0;
    let panel_tol = abs_tol / (cuts.len() - 1) as f64;
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let mid = 0.5 * (lo + hi);
        let (flo, fmid, fhi) = (f(lo), f(mid), f(hi));
        let whole = simpson(lo, hi, flo, fmid, fhi);
        total += adaptive(f, lo, hi, flo, fmid, fhi, whole, panel_tol, MAX_DEPTH)?;
    }
    if !total.is_finite() {
        return Err(Error::NonFinite {
            context: "adaptive quadrature".to_string(),
        });
    }
    Ok(total)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let err = left + right - whole;
    if err.abs() <= 15.0 * tol {
        return Ok(left + right + err / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureNonConvergence {
            achieved: err.abs() / 15.0,
            requested: tol,
        });
    }
    Ok(adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate(&|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12, &[]).unwrap();
        // Antiderivative x^4/4 - x^2 + x evaluated on [-1, 3].
        assert!((v - 16.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_mass_with_breakpoints() {
        let sigma: f64 = 0.05;
        let f = move |x: f64| (-0.5 * (x / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt());
        // Narrow peak in a wide interval: the breakpoints keep it visible.
        let v = integrate(&f, -60.0, 60.0, 1e-10, &[-0.3, 0.0, 0.3]).unwrap();
        assert!((v - 1.0).abs() < 1e-9, "v={v}");
    }

    #[test]
    fn invalid_interval_rejected() {
        assert!(integrate(&|x| x, 1.0, 0.0, 1e-8, &[]).is_err());
        assert!(integrate(&|x| x, 0.0, f64::INFINITY, 1e-8, &[]).is_err());
    }
}
