//! Classical two-sample tests used as comparison baselines: pooled t,
//! Yuen's trimmed t, the Wilcoxon rank-sum test, and the two-sample
//! Kolmogorov-Smirnov test.
//!
//! Wilcoxon and KS use their asymptotic null distributions (normal
//! approximation with midranks and tie-corrected variance; the Kolmogorov
//! distribution at effective size n1 n2/(n1+n2)). Exact small-sample
//! distributions are out of scope.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sample::Sample;
use crate::special::{kolmogorov_sf, std_normal_cdf, student_t_sf_two_sided};

/// Which classical test produced a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TestMethod {
    PooledT,
    TrimmedT,
    Wilcoxon,
    Ks,
}

impl std::fmt::Display for TestMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            TestMethod::PooledT => "pooled-t",
            TestMethod::TrimmedT => "trimmed-t",
            TestMethod::Wilcoxon => "wilcoxon",
            TestMethod::Ks => "ks",
        };
        f.write_str(name)
    }
}

/// Outcome of a classical test.
#[derive(Debug, Clone, Serialize)]
pub struct ClassicalTestResult {
    pub method: TestMethod,
    pub statistic: f64,
    pub p_value: f64,
    /// Degrees of freedom where the reference distribution has them.
    pub df: Option<f64>,
    /// Set when every observation is identical after midranking, which
    /// degenerates the rank variance; the p-value is forced to one.
    pub tied: bool,
}

/// Equal-variance two-sample t-test; two-sided p-value.
pub fn pooled_t_test(x: &Sample, y: &Sample) -> Result<ClassicalTestResult> {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    if n1 + n2 < 3.0 {
        return Err(Error::InvalidParameter {
            name: "n1 + n2",
            value: n1 + n2,
            constraint: "must be >= 3",
        });
    }
    let sp2 = ((n1 - 1.0) * x.variance() + (n2 - 1.0) * y.variance()) / (n1 + n2 - 2.0);
    if !(sp2 > 0.0) {
        return Err(Error::DegenerateSample {
            label: format!("{} / {}", x.label(), y.label()),
            reason: "pooled variance is zero".to_string(),
        });
    }
    let df = n1 + n2 - 2.0;
    let statistic = (x.mean() - y.mean()).abs() / (sp2 * (1.0 / n1 + 1.0 / n2)).sqrt();
    Ok(ClassicalTestResult {
        method: TestMethod::PooledT,
        statistic,
        p_value: student_t_sf_two_sided(statistic, df)?,
        df: Some(df),
        tied: false,
    })
}

/// Yuen's trimmed t-test with `trim` removed from each tail of each sample
/// (count floor(trim * n) per tail). `trim = 0` reduces to Welch's test.
pub fn trimmed_t_test(x: &Sample, y: &Sample, trim: f64) -> Result<ClassicalTestResult> {
    if !(0.0..0.5).contains(&trim) {
        return Err(Error::InvalidParameter {
            name: "trim",
            value: trim,
            constraint: "must lie in [0, 0.5)",
        });
    }
    let (m1, d1, h1) = trimmed_pieces(x, trim)?;
    let (m2, d2, h2) = trimmed_pieces(y, trim)?;
    let statistic = (m1 - m2).abs() / (d1 + d2).sqrt();
    let df = (d1 + d2) * (d1 + d2)
        / (d1 * d1 / (h1 - 1.0) + d2 * d2 / (h2 - 1.0));
    Ok(ClassicalTestResult {
        method: TestMethod::TrimmedT,
        statistic,
        p_value: student_t_sf_two_sided(statistic, df)?,
        df: Some(df),
        tied: false,
    })
}

/// Trimmed mean, Yuen's variance contribution d = (n-1) s_w^2 / (h (h-1)),
/// and the post-trim count h.
fn trimmed_pieces(s: &Sample, trim: f64) -> Result<(f64, f64, f64)> {
    let n = s.len();
    let g = (trim * n as f64).floor() as usize;
    if n < 2 * g + 2 {
        return Err(Error::InvalidParameter {
            name: "trim",
            value: trim,
            constraint: "leaves fewer than 2 observations",
        });
    }
    let mut sorted = s.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let h = n - 2 * g;
    let tmean = sorted[g..n - g].iter().sum::<f64>() / h as f64;
    // Winsorize: clamp the trimmed tails to the nearest retained value.
    let (lo, hi) = (sorted[g], sorted[n - 1 - g]);
    let win: Vec<f64> = sorted.iter().map(|v| v.clamp(lo, hi)).collect();
    let wmean = win.iter().sum::<f64>() / n as f64;
    let ssd_w: f64 = win.iter().map(|v| (v - wmean) * (v - wmean)).sum();
    let s_w2 = ssd_w / (n as f64 - 1.0);
    let hf = h as f64;
    let d = (n as f64 - 1.0) * s_w2 / (hf * (hf - 1.0));
    Ok((tmean, d, hf))
}

/// Wilcoxon rank-sum test with midranks; two-sided p-value from the normal
/// approximation with continuity correction and tie-adjusted variance.
///
/// The statistic is the rank sum of the first sample.
pub fn wilcoxon_test(x: &Sample, y: &Sample) -> Result<ClassicalTestResult> {
    let (n1, n2) = (x.len() as f64, y.len() as f64);
    let n = n1 + n2;
    let mut combined: Vec<(f64, bool)> = x
        .values()
        .iter()
        .map(|v| (*v, true))
        .chain(y.values().iter().map(|v| (*v, false)))
        .collect();
    combined.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));

    let mut rank_sum_x = 0.0;
    let mut tie_correction = 0.0; // sum over tie groups of t^3 - t
    let mut i = 0;
    while i < combined.len() {
        let mut j = i;
        while j < combined.len() && combined[j].0 == combined[i].0 {
            j += 1;
        }
        let t = (j - i) as f64;
        // Midrank of positions i+1..=j (1-based).
        let midrank = (i + 1 + j) as f64 / 2.0;
        rank_sum_x += midrank * combined[i..j].iter().filter(|(_, fx)| *fx).count() as f64;
        tie_correction += t * t * t - t;
        i = j;
    }

    let mean = n1 * (n + 1.0) / 2.0;
    let variance = n1 * n2 / 12.0 * ((n + 1.0) - tie_correction / (n * (n - 1.0)));
    if variance <= 0.0 {
        return Ok(ClassicalTestResult {
            method: TestMethod::Wilcoxon,
            statistic: rank_sum_x,
            p_value: 1.0,
            df: None,
            tied: true,
        });
    }
    let centered = rank_sum_x - mean;
    // Continuity correction pulls the statistic half a rank toward the mean.
    let z = if centered == 0.0 {
        0.0
    } else {
        (centered - 0.5 * centered.signum()) / variance.sqrt()
    };
    let p = (2.0 * (1.0 - std_normal_cdf(z.abs()))).clamp(0.0, 1.0);
    Ok(ClassicalTestResult {
        method: TestMethod::Wilcoxon,
        statistic: rank_sum_x,
        p_value: p,
        df: None,
        tied: false,
    })
}

/// Two-sample Kolmogorov-Smirnov test; p-value from the asymptotic
/// Kolmogorov distribution at effective size n1 n2 / (n1 + n2).
pub fn ks_test(x: &Sample, y: &Sample) -> Result<ClassicalTestResult> {
    let mut xs = x.values().to_vec();
    let mut ys = y.values().to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    ys.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let (n1, n2) = (xs.len(), ys.len());

    let mut d: f64 = 0.0;
    let (mut i, mut j) = (0usize, 0usize);
    while i < n1 || j < n2 {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(a), Some(b)) => a.min(*b),
            (Some(a), None) => *a,
            (None, Some(b)) => *b,
            (None, None) => break,
        };
        // Step both empirical distribution functions past every copy of v
        // before comparing, so ties never produce a spurious gap.
        while i < n1 && xs[i] == v {
            i += 1;
        }
        while j < n2 && ys[j] == v {
            j += 1;
        }
        let f1 = i as f64 / n1 as f64;
        let f2 = j as f64 / n2 as f64;
        d = d.max((f1 - f2).abs());
    }

    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    Ok(ClassicalTestResult {
        method: TestMethod::Ks,
        statistic: d,
        p_value: kolmogorov_sf(ne.sqrt() * d),
        df: None,
        tied: false,
    })
}
