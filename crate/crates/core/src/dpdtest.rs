//! The two-sample divergence test: statistic, chi-squared calibration,
//! power approximation, and the likelihood-ratio comparison.

use serde::Serialize;

use crate::asymptotics::{sigma_w_beta, AsymptoticParams};
use crate::divergence::{dpd_normal_equal_sigma, TuningGamma};
use crate::error::{Error, Result};
use crate::mdpde::{estimate_two_sample, pooled_sigma0_hat, SolverConfig, TuningBeta, TwoSampleEstimate};
use crate::sample::Sample;
use crate::special::{chi_squared_quantile_1df, chi_squared_sf_1df, std_normal_cdf};

/// Result of the two-sample divergence test.
#[derive(Debug, Clone, Serialize)]
pub struct DpdTestResult {
    /// Standardized statistic, asymptotically chi-squared(1) under the null.
    pub statistic: f64,
    /// Scaling constant lambda_{beta,gamma}(sigma_hat).
    pub lambda: f64,
    /// Divergence between the two fitted densities.
    pub divergence: f64,
    pub p_value: f64,
    /// Set when the chi-squared tail underflowed below 1e-300 and the
    /// p-value was clamped to zero.
    pub p_value_underflow: bool,
    pub beta: f64,
    pub gamma: f64,
    pub estimate: TwoSampleEstimate,
    pub n1: usize,
    pub n2: usize,
}

/// Gradient of the equal-scale divergence in (mu1, mu2, sigma).
///
/// The second component is the negative of the first, exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TVector {
    pub t1: f64,
    pub t2: f64,
    pub t3: f64,
}

/// Scaling constant making the test statistic asymptotically chi-squared(1).
pub fn lambda_scaling(sigma_hat: f64, beta: f64, gamma: f64) -> Result<f64> {
    if !(sigma_hat > 0.0 && sigma_hat.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma_hat",
            value: sigma_hat,
            constraint: "must be finite and > 0",
        });
    }
    check_tuning("beta", beta)?;
    check_tuning("gamma", gamma)?;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    Ok((3.0 * (beta + 1.0).ln() - 1.5 * (2.0 * beta + 1.0).ln()
        - gamma * sigma_hat.ln()
        - 0.5 * gamma * ln2pi
        - 0.5 * (gamma + 1.0).ln())
    .exp())
}

fn check_tuning(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::InvalidParameter {
            name,
            value,
            constraint: "must lie in [0, 1]",
        });
    }
    Ok(())
}

/// Run the divergence test of equal means on two samples.
///
/// Fits the three-parameter model at `beta`, evaluates the equal-scale
/// divergence at `gamma`, and calibrates against chi-squared(1). At
/// beta = gamma = 0 the statistic reduces to the classical
/// n1 n2/(n1+n2) (xbar - ybar)^2 / sigma0_hat^2 form.
pub fn dpd_test(
    x: &Sample,
    y: &Sample,
    beta: TuningBeta,
    gamma: TuningGamma,
    cfg: &SolverConfig,
) -> Result<DpdTestResult> {
    let estimate = estimate_two_sample(x, y, beta, cfg)?;
    if !estimate.converged {
        return Err(Error::DidNotConverge {
            iterations: estimate.iterations,
            gradient_norm: estimate.gradient_norm,
        });
    }
    let divergence = dpd_normal_equal_sigma(estimate.mu1, estimate.mu2, estimate.sigma, gamma)?;
    let lambda = lambda_scaling(estimate.sigma, beta.value(), gamma.value())?;
    let ne = effective_size(x.len(), y.len());
    let statistic = 2.0 * ne * divergence / lambda;
    let raw_p = chi_squared_sf_1df(statistic)?;
    let p_value_underflow = raw_p < 1e-300;
    Ok(DpdTestResult {
        statistic,
        lambda,
        divergence,
        p_value: if p_value_underflow { 0.0 } else { raw_p },
        p_value_underflow,
        beta: beta.value(),
        gamma: gamma.value(),
        estimate,
        n1: x.len(),
        n2: y.len(),
    })
}

fn effective_size(n1: usize, n2: usize) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    n1 * n2 / (n1 + n2)
}

/// Gradient of the equal-scale divergence with respect to (mu1, mu2, sigma),
/// evaluated in closed form. Requires gamma > 0.
pub fn t_vector(mu1: f64, mu2: f64, sigma: f64, gamma: f64) -> Result<TVector> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            value: sigma,
            constraint: "must be finite and > 0",
        });
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            value: gamma,
            constraint: "must lie in (0, 1]",
        });
    }
    let r = (mu1 - mu2) / sigma;
    let ln2pi = (2.0 * std::f64::consts::PI).ln();
    let e = (-0.5 * gamma / (gamma + 1.0) * r * r).exp();
    // 1 / (sqrt(1+gamma) (2 pi)^{gamma/2} sigma^{gamma+1})
    let base = (-0.5 * (1.0 + gamma).ln()
        - 0.5 * gamma * ln2pi
        - (gamma + 1.0) * sigma.ln())
    .exp();
    let t1 = r * base * e;
    let t3 = -(1.0 + gamma) * base * (1.0 - (1.0 - r * r / (1.0 + gamma)) * e);
    Ok(TVector { t1, t2: -t1, t3 })
}

/// Asymptotic variance of the scaled divergence under a fixed alternative:
/// the quadratic form of the t-vector in the estimator covariance.
///
/// Strictly positive when mu1 != mu2, exactly zero under the null.
pub fn sigma_gamma_sq(mu1: f64, mu2: f64, p: &AsymptoticParams, gamma: f64) -> Result<f64> {
    let t = t_vector(mu1, mu2, p.sigma0, gamma)?;
    let cov = sigma_w_beta(*p)?;
    Ok(t.t1 * t.t1 * cov[0][0] + t.t2 * t.t2 * cov[1][1] + t.t3 * t.t3 * cov[2][2])
}

/// Normal approximation to the power of the level-`alpha` test at a fixed
/// alternative (mu10 != mu20), with the limit proportion, true scale and
/// estimation tuning taken from `p`.
pub fn power_approx(
    mu10: f64,
    mu20: f64,
    p: &AsymptoticParams,
    gamma: f64,
    n1: usize,
    n2: usize,
    alpha: f64,
) -> Result<f64> {
    if mu10 == mu20 {
        return Err(Error::InvalidParameter {
            name: "mu10 - mu20",
            value: 0.0,
            constraint: "must be nonzero; use the chi-squared null calibration instead",
        });
    }
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            constraint: "sample sizes must be positive",
        });
    }
    let critical = chi_squared_quantile_1df(alpha)?;
    let gamma_t = TuningGamma::new(gamma)?;
    let d0 = dpd_normal_equal_sigma(mu10, mu20, p.sigma0, gamma_t)?;
    let lambda = lambda_scaling(p.sigma0, p.beta, gamma)?;
    let sg = sigma_gamma_sq(mu10, mu20, p, gamma)?.sqrt();
    let ne = effective_size(n1, n2);
    // P(S > c) = P( sqrt(ne) (d_hat - d0) > lambda c / (2 sqrt(ne)) - sqrt(ne) d0 ),
    // and sqrt(ne) (d_hat - d0) is asymptotically N(0, sigma_gamma^2).
    let arg = lambda * critical / (2.0 * sg * ne.sqrt()) - ne.sqrt() * d0 / sg;
    Ok(1.0 - std_normal_cdf(arg))
}

/// Likelihood ratio statistic -2 log Lambda for equal means with common
/// unknown variance; asymptotically equivalent to the beta = gamma = 0 test.
pub fn lrt_statistic(x: &Sample, y: &Sample) -> Result<f64> {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let s0 = pooled_sigma0_hat(x, y);
    if !(s0 > 0.0) {
        return Err(Error::DegenerateSample {
            label: format!("{} / {}", x.label(), y.label()),
            reason: "pooled scale is zero".to_string(),
        });
    }
    let diff = x.mean() - y.mean();
    let ratio = n1 * n2 / ((n1 + n2) * (n1 + n2)) * diff * diff / (s0 * s0);
    Ok((n1 + n2) * f64::ln_1p(ratio))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn beta(v: f64) -> TuningBeta {
        TuningBeta::new(v).unwrap()
    }

    fn gamma(v: f64) -> TuningGamma {
        TuningGamma::new(v).unwrap()
    }

    fn sample(v: &[f64]) -> Sample {
        Sample::new(v.to_vec(), "test").unwrap()
    }

    #[test]
    fn lambda_trivial_and_frozen_values() {
        assert_eq!(lambda_scaling(3.7, 0.0, 0.0).unwrap(), 1.0);
        let l = lambda_scaling(1.0, 0.1, 0.1).unwrap();
        assert!((l - 0.880_644_952_836_041_2).abs() < 1e-14);
        // sigma^{-gamma} scaling: doubling sigma multiplies lambda by 2^{-gamma}.
        let a = lambda_scaling(2.0, 0.3, 0.5).unwrap();
        let b = lambda_scaling(1.0, 0.3, 0.5).unwrap() * 0.5f64.powf(0.5);
        assert!((a - b).abs() / b < 1e-14);
        assert!(lambda_scaling(0.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn identical_samples_give_zero_statistic() {
        let x = sample(&[0.4, 1.9, -0.3, 2.2, 0.8]);
        for (b, g) in [(0.0, 0.0), (0.3, 0.3), (1.0, 0.5)] {
            let r = dpd_test(&x, &x, beta(b), gamma(g), &SolverConfig::default()).unwrap();
            assert_eq!(r.statistic, 0.0, "b={b} g={g}");
            assert_eq!(r.p_value, 1.0);
        }
    }

    #[test]
    fn classical_reduction_hand_example() {
        let x = sample(&[0.0, 2.0]);
        let y = sample(&[1.0, 3.0]);
        let r = dpd_test(&x, &y, beta(0.0), gamma(0.0), &SolverConfig::default()).unwrap();
        assert!((r.statistic - 1.0).abs() < 1e-12);
        assert!((r.p_value - 0.317_310_507_862_914_1).abs() < 1e-12);
        assert_eq!(r.lambda, 1.0);
    }

    #[test]
    fn reduction_matches_moment_formula_on_real_shapes() {
        let x = sample(&[0.12, 1.01, -0.2, 0.15, -0.3, -0.07, 0.32, 2.94]);
        let y = sample(&[1.64, -0.6, -1.16, -0.13, 0.4, 1.7, 0.38, 7.02]);
        let r = dpd_test(&x, &y, beta(0.0), gamma(0.0), &SolverConfig::default()).unwrap();
        let ne = (x.len() * y.len()) as f64 / (x.len() + y.len()) as f64;
        let s0 = pooled_sigma0_hat(&x, &y);
        let want = ne * (x.mean() - y.mean()).powi(2) / (s0 * s0);
        assert!((r.statistic - want).abs() / want < 1e-12);
    }

    #[test]
    fn statistic_is_location_and_scale_invariant() {
        let x = sample(&[0.2, 1.4, -0.8, 2.1, 0.5, 12.0]);
        let y = sample(&[1.1, 0.3, 2.6, -0.2, 1.9]);
        let cfg = SolverConfig::default();
        let base = dpd_test(&x, &y, beta(0.3), gamma(0.3), &cfg).unwrap();
        let xs = x.map(|v| 3.0 * v + 11.0).unwrap();
        let ys = y.map(|v| 3.0 * v + 11.0).unwrap();
        let moved = dpd_test(&xs, &ys, beta(0.3), gamma(0.3), &cfg).unwrap();
        assert!(
            (base.statistic - moved.statistic).abs() / base.statistic < 1e-6,
            "{} vs {}",
            base.statistic,
            moved.statistic
        );
    }

    #[test]
    fn statistic_increases_with_separation() {
        // Estimates substituted exogenously through the public components.
        let ne = 25.0;
        let lambda = lambda_scaling(1.3, 0.2, 0.4).unwrap();
        let mut last = -1.0;
        for i in 0..30 {
            let delta = i as f64 * 0.25;
            let d = dpd_normal_equal_sigma(delta, 0.0, 1.3, gamma(0.4)).unwrap();
            let s = 2.0 * ne * d / lambda;
            assert!(s > last, "delta={delta}");
            last = s;
        }
    }

    #[test]
    fn t_vector_null_and_antisymmetry() {
        let t = t_vector(2.5, 2.5, 1.7, 0.4).unwrap();
        assert_eq!(t.t1, 0.0);
        assert_eq!(t.t2, 0.0);
        assert_eq!(t.t3, 0.0);
        let t = t_vector(1.0, -2.0, 0.8, 0.9).unwrap();
        assert_eq!(t.t2, -t.t1);
        assert!(t_vector(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(t_vector(0.0, 1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn t_vector_matches_finite_differences() {
        for &(m1, m2, s, g) in &[
            (0.3, -0.9, 1.4, 0.25),
            (2.0, 2.5, 0.6, 0.8),
            (-1.0, 4.0, 3.0, 1.0),
        ] {
            let t = t_vector(m1, m2, s, g).unwrap();
            let gm = gamma(g);
            let h = 1e-6;
            let d = |a: f64, b: f64, c: f64| dpd_normal_equal_sigma(a, b, c, gm).unwrap();
            let fd = [
                (d(m1 + h, m2, s) - d(m1 - h, m2, s)) / (2.0 * h),
                (d(m1, m2 + h, s) - d(m1, m2 - h, s)) / (2.0 * h),
                (d(m1, m2, s + h) - d(m1, m2, s - h)) / (2.0 * h),
            ];
            for (got, want) in [(t.t1, fd[0]), (t.t2, fd[1]), (t.t3, fd[2])] {
                let scale = got.abs().max(want.abs()).max(1e-8);
                assert!((got - want).abs() / scale < 1e-5, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn sigma_gamma_sq_null_and_alternative() {
        let p = AsymptoticParams::new(0.5, 1.0, 0.1).unwrap();
        assert_eq!(sigma_gamma_sq(1.0, 1.0, &p, 0.1).unwrap(), 0.0);
        let v = sigma_gamma_sq(0.0, 1.0, &p, 0.1).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn sigma_gamma_sq_matches_independent_assembly() {
        // t-vector from central differences of the divergence, covariance
        // from the K J^{-2} products, assembled by hand.
        let p = AsymptoticParams::new(0.5, 1.0, 0.1).unwrap();
        let (m1, m2, g) = (0.0, 1.0, 0.1);
        let h = 1e-6;
        let gm = gamma(g);
        let d = |a: f64, b: f64, c: f64| dpd_normal_equal_sigma(a, b, c, gm).unwrap();
        let t_fd = [
            (d(m1 + h, m2, 1.0) - d(m1 - h, m2, 1.0)) / (2.0 * h),
            (d(m1, m2 + h, 1.0) - d(m1, m2 - h, 1.0)) / (2.0 * h),
            (d(m1, m2, 1.0 + h) - d(m1, m2, 1.0 - h)) / (2.0 * h),
        ];
        let j = crate::asymptotics::j_matrix(1.0, 0.1).unwrap();
        let k = crate::asymptotics::k_matrix(1.0, 0.1).unwrap();
        let kj1 = k[0][0] / (j[0][0] * j[0][0]);
        let kj2 = k[1][1] / (j[1][1] * j[1][1]);
        let want = t_fd[0] * t_fd[0] * 0.5 * kj1
            + t_fd[1] * t_fd[1] * 0.5 * kj1
            + t_fd[2] * t_fd[2] * 0.25 * kj2;
        let got = sigma_gamma_sq(m1, m2, &p, g).unwrap();
        assert!((got - want).abs() / want < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn power_limits() {
        let p = AsymptoticParams::new(0.5, 1.0, 0.1).unwrap();
        // Consistency: power tends to one along growing sample sizes.
        let p50 = power_approx(0.0, 1.0, &p, 0.1, 50, 50, 0.05).unwrap();
        let p500 = power_approx(0.0, 1.0, &p, 0.1, 500, 500, 0.05).unwrap();
        let p5000 = power_approx(0.0, 1.0, &p, 0.1, 5000, 5000, 0.05).unwrap();
        assert!(p50 < p500 && p500 < p5000);
        assert!(p5000 > 0.999_999);
        // alpha = 1 puts the critical value at zero.
        let p1 = power_approx(0.0, 1.0, &p, 0.1, 50, 50, 1.0).unwrap();
        assert!(p1 > 0.99, "p1={p1}");
        assert!(power_approx(1.0, 1.0, &p, 0.1, 50, 50, 0.05).is_err());
    }

    #[test]
    fn huge_separation_clamps_p_to_zero_with_flag() {
        let x = sample(&[-0.1, 0.0, 0.1, -0.05, 0.05, 0.02, -0.02, 0.07]);
        let y = sample(&[99.9, 100.0, 100.1, 99.95, 100.05, 100.02, 99.98, 100.07]);
        let r = dpd_test(&x, &y, beta(0.0), gamma(0.0), &SolverConfig::default()).unwrap();
        assert!(r.statistic > 1500.0);
        assert_eq!(r.p_value, 0.0);
        assert!(r.p_value_underflow);
    }

    #[test]
    fn lrt_hand_values() {
        let x = sample(&[0.0, 2.0]);
        let y = sample(&[1.0, 3.0]);
        assert_eq!(lrt_statistic(&x, &x).unwrap(), 0.0);
        let l = lrt_statistic(&x, &y).unwrap();
        assert!((l - 0.892_574_205_256_839).abs() < 1e-12);
    }
}
