//! Asymptotic covariance of the joint minimum-divergence estimator.
//!
//! The limiting Hessian J, the score covariance K, and the 3x3 covariance
//! of the scaled two-sample estimator assembled from them. Everything here
//! is diagonal; the matrices are kept as plain fixed-size arrays.

use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Matrix2 = [[f64; 2]; 2];
pub type Matrix3 = [[f64; 3]; 3];

/// Limit setup for the two-sample asymptotics: the limiting proportion
/// `w` of observations in the first sample, the true common scale, and
/// the estimation tuning parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticParams {
    pub w: f64,
    pub sigma0: f64,
    pub beta: f64,
}

impl AsymptoticParams {
    pub fn new(w: f64, sigma0: f64, beta: f64) -> Result<Self> {
        if !(w > 0.0 && w < 1.0) {
            return Err(Error::InvalidParameter {
                name: "w",
                value: w,
                constraint: "must lie strictly in (0, 1)",
            });
        }
        if !(sigma0 > 0.0 && sigma0.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "sigma0",
                value: sigma0,
                constraint: "must be finite and > 0",
            });
        }
        check_beta(beta)?;
        Ok(Self { w, sigma0, beta })
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta >= 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            constraint: "must be finite and >= 0",
        });
    }
    Ok(())
}

fn check_sigma0(sigma0: f64) -> Result<()> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma0",
            value: sigma0,
            constraint: "must be finite and > 0",
        });
    }
    Ok(())
}

/// Limiting Hessian of the one-sample objective at the true parameters.
pub fn j_matrix(sigma0: f64, beta: f64) -> Result<Matrix2> {
    check_sigma0(sigma0)?;
    check_beta(beta)?;
    // (1+beta)^{-1/2} (2 pi)^{-beta/2} sigma0^{-(2+beta)}, in log domain.
    let pref = (-0.5 * (1.0 + beta).ln()
        - 0.5 * beta * (2.0 * PI).ln()
        - (2.0 + beta) * sigma0.ln())
    .exp();
    Ok([
        [pref / (1.0 + beta), 0.0],
        [0.0, pref * (beta * beta + 2.0) / ((1.0 + beta) * (1.0 + beta))],
    ])
}

/// Covariance of the one-sample score at the true parameters.
pub fn k_matrix(sigma0: f64, beta: f64) -> Result<Matrix2> {
    check_sigma0(sigma0)?;
    check_beta(beta)?;
    let pref = (-(2.0 + 2.0 * beta) * sigma0.ln() - beta * (2.0 * PI).ln()).exp();
    let a = (1.0 + 2.0 * beta).powf(-1.5);
    let k11 = pref * a;
    let k22 = pref
        * (a * (4.0 * beta * beta + 2.0) / (1.0 + 2.0 * beta)
            - beta * beta / (1.0 + beta).powi(3));
    Ok([[k11, 0.0], [0.0, k22]])
}

/// Variance factor (beta+1)^3 (2 beta+1)^{-3/2} of the location estimates;
/// equals K11 J11^{-2} with the sigma0^2 scale factored out.
pub fn mu_variance_factor(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok((beta + 1.0).powi(3) * (2.0 * beta + 1.0).powf(-1.5))
}

fn sigma_variance_factor(beta: f64) -> f64 {
    (beta + 1.0).powi(5) / (beta * beta + 2.0).powi(2)
        * ((4.0 * beta * beta + 2.0) / (1.0 + 2.0 * beta).powf(2.5)
            - beta * beta / (1.0 + beta).powi(3))
}

/// Asymptotic covariance of sqrt(n1 n2 / (n1+n2)) (eta_hat - eta_0).
///
/// Diagonal: the location entries carry (1-w) and w times the common
/// variance factor, the scale entry carries w(1-w) times its own factor.
pub fn sigma_w_beta(p: AsymptoticParams) -> Result<Matrix3> {
    let m = mu_variance_factor(p.beta)?;
    let v = sigma_variance_factor(p.beta);
    let s2 = p.sigma0 * p.sigma0;
    Ok([
        [s2 * (1.0 - p.w) * m, 0.0, 0.0],
        [0.0, s2 * p.w * m, 0.0],
        [0.0, 0.0, s2 * p.w * (1.0 - p.w) * v],
    ])
}
