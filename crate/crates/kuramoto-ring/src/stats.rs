//! Small statistical kernel: correlation, moments, histograms, and the two
//! model fits used by the campaigns.
//!
//! Everything here is owned code over plain slices. The exponential-tail
//! diagnostic is survival-based rather than density-based so it does not
//! depend on a binning choice.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Weighted least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 for an exact fit. Defined as 1 when
    /// the responses are constant and exactly reproduced.
    pub r_squared: f64,
    /// Weighted residual sum of squares.
    pub residual_ss: f64,
    pub n_points: usize,
}

/// Ordinary or weighted least squares for `y = slope·x + intercept`.
///
/// `weights`, when given, must match the data length and be positive.
/// Requires at least 3 points; fails with a degenerate-fit error when all
/// `x` coincide.
pub fn fit_linear(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<FitResult> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "fit_linear: x has {} points, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: x.len(),
        });
    }
    if let Some(w) = weights {
        if w.len() != x.len() {
            return Err(Error::InvalidArgument(format!(
                "fit_linear: {} weights for {} points",
                w.len(),
                x.len()
            )));
        }
        if w.iter().any(|v| !v.is_finite() || *v <= 0.0) {
            return Err(Error::InvalidArgument(
                "fit_linear: weights must be finite and positive".into(),
            ));
        }
    }

    let weight_at = |i: usize| weights.map_or(1.0, |w| w[i]);
    let w_sum: f64 = (0..x.len()).map(weight_at).sum();
    let x_bar: f64 = (0..x.len()).map(|i| weight_at(i) * x[i]).sum::<f64>() / w_sum;
    let y_bar: f64 = (0..x.len()).map(|i| weight_at(i) * y[i]).sum::<f64>() / w_sum;

    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..x.len() {
        let w = weight_at(i);
        sxx += w * (x[i] - x_bar) * (x[i] - x_bar);
        sxy += w * (x[i] - x_bar) * (y[i] - y_bar);
    }
    if sxx == 0.0 {
        return Err(Error::DegenerateFit(
            "all x values coincide; slope is undetermined".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = y_bar - slope * x_bar;

    let mut rss = 0.0;
    let mut tss = 0.0;
    for i in 0..x.len() {
        let w = weight_at(i);
        let r = y[i] - (slope * x[i] + intercept);
        rss += w * r * r;
        tss += w * (y[i] - y_bar) * (y[i] - y_bar);
    }
    // Guard against meaningless ratios when both sums are pure round-off
    // (e.g. constant responses reproduced exactly).
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let noise_floor = (64.0 * f64::EPSILON * y_scale).powi(2) * w_sum;
    let r_squared = if tss > noise_floor {
        1.0 - rss / tss
    } else if rss <= noise_floor {
        1.0
    } else {
        0.0
    };
    Ok(FitResult {
        slope,
        intercept,
        r_squared,
        residual_ss: rss,
        n_points: x.len(),
    })
}

/// Slope standard error for an unweighted fit (homoscedastic residuals).
pub fn slope_stderr(fit: &FitResult, x: &[f64]) -> f64 {
    let x_bar = x.iter().sum::<f64>() / x.len() as f64;
    let sxx: f64 = x.iter().map(|v| (v - x_bar) * (v - x_bar)).sum();
    (fit.residual_ss / (fit.n_points as f64 - 2.0) / sxx).sqrt()
}

/// Product-moment correlation of two equal-length samples.
///
/// Requires at least 3 points and nonzero variance in both inputs.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "pearson_r: x has {} points, y has {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientSamples {
            needed: 3,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let x_bar = x.iter().sum::<f64>() / n;
    let y_bar = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut vx = 0.0;
    let mut vy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - x_bar;
        let dy = b - y_bar;
        cov += dx * dy;
        vx += dx * dx;
        vy += dy * dy;
    }
    if vx == 0.0 || vy == 0.0 {
        return Err(Error::DegenerateVariance(
            "pearson_r requires nonzero variance in both samples".into(),
        ));
    }
    Ok(cov / (vx.sqrt() * vy.sqrt()))
}

/// Expected |r| between two independent uniform vectors of the given
/// length: `√2 / (√π·√(len−1))`.
pub fn uniform_noise_band(len: usize) -> f64 {
    (2.0 / std::f64::consts::PI).sqrt() / ((len as f64 - 1.0).sqrt())
}

/// Exponential-tail fit of positive samples.
#[derive(Debug, Clone)]
pub struct ExpTailFit {
    /// Maximum-likelihood rate, `1 / mean`.
    pub lambda: f64,
    /// Line fit of `ln S(t)` against `t` over the empirical survival
    /// function up to the 99th percentile; `None` when the diagnostic is
    /// degenerate (e.g. all samples equal).
    pub survival_fit: Option<FitResult>,
}

/// Fit an exponential rate to positive samples and diagnose linearity of
/// the log-survival curve up to the 99th percentile.
///
/// Zeros must be filtered by the caller (the campaigns report the mass at
/// zero separately); non-positive samples are a precondition error.
pub fn fit_exponential_tail(samples: &[f64]) -> Result<ExpTailFit> {
    if samples.len() < 100 {
        return Err(Error::InsufficientSamples {
            needed: 100,
            got: samples.len(),
        });
    }
    if let Some(bad) = samples.iter().find(|s| !s.is_finite() || **s <= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "fit_exponential_tail requires strictly positive samples, got {bad}"
        )));
    }
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let lambda = 1.0 / mean;

    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let m = sorted.len();
    let p99 = sorted[(0.99 * m as f64).ceil() as usize - 1];

    // Empirical survival S(t_(i)) = (m − i − 1)/m; drop the last point
    // where S = 0 and everything beyond the 99th percentile.
    let mut ts = Vec::new();
    let mut log_s = Vec::new();
    for (i, t) in sorted.iter().enumerate() {
        if *t > p99 || i + 1 == m {
            break;
        }
        ts.push(*t);
        log_s.push(((m - i - 1) as f64 / m as f64).ln());
    }
    let survival_fit = fit_linear(&ts, &log_s, None).ok();
    Ok(ExpTailFit {
        lambda,
        survival_fit,
    })
}

/// Exact integer histogram (for winding numbers).
pub fn integer_histogram<I: IntoIterator<Item = i64>>(samples: I) -> Result<BTreeMap<i64, u64>> {
    let mut counts = BTreeMap::new();
    for s in samples {
        *counts.entry(s).or_insert(0u64) += 1;
    }
    if counts.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(counts)
}

/// Equal-width histogram over reals.
#[derive(Debug, Clone)]
pub struct Histogram {
    /// `bins + 1` edges; bin `i` covers `[edges[i], edges[i+1])`, with the
    /// last bin closed on the right.
    pub edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// Bin `samples` into `bins` equal-width bins over `range` (defaults to
/// the sample min..max). Counts always sum to the sample count: values at
/// the top edge land in the last bin and out-of-range values are clamped
/// into the end bins.
pub fn histogram(samples: &[f64], bins: usize, range: Option<(f64, f64)>) -> Result<Histogram> {
    if samples.is_empty() {
        return Err(Error::EmptyInput);
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least 1 bin".into()));
    }
    let (lo, hi) = range.unwrap_or_else(|| {
        samples.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), s| {
            (l.min(*s), h.max(*s))
        })
    });
    if !(lo.is_finite() && hi.is_finite() && hi >= lo) {
        return Err(Error::InvalidArgument(format!(
            "invalid histogram range [{lo}, {hi}]"
        )));
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0u64; bins];
    for s in samples {
        let idx = (((s - lo) / width) as isize).clamp(0, bins as isize - 1) as usize;
        counts[idx] += 1;
    }
    let edges = (0..=bins).map(|i| lo + i as f64 * width).collect();
    Ok(Histogram { edges, counts })
}

/// Central sample moments used by the normality sanity checks.
#[derive(Debug, Clone, Copy)]
pub struct SampleMoments {
    pub n: usize,
    pub mean: f64,
    /// Unbiased sample variance (denominator `n − 1`).
    pub variance: f64,
    /// Population skewness `m3 / m2^{3/2}`.
    pub skewness: f64,
    /// Population excess kurtosis `m4 / m2² − 3`.
    pub excess_kurtosis: f64,
}

/// Moments of an integer-valued sample given as value → count.
pub fn moments_from_counts(counts: &BTreeMap<i64, u64>) -> Option<SampleMoments> {
    let n: u64 = counts.values().sum();
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mean = counts
        .iter()
        .map(|(q, c)| *q as f64 * *c as f64)
        .sum::<f64>()
        / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for (q, c) in counts {
        let d = *q as f64 - mean;
        let d2 = d * d;
        let w = *c as f64;
        m2 += w * d2;
        m3 += w * d2 * d;
        m4 += w * d2 * d2;
    }
    let variance = m2 / (nf - 1.0);
    let m2n = m2 / nf;
    let (skewness, excess_kurtosis) = if m2n > 0.0 {
        ((m3 / nf) / m2n.powf(1.5), (m4 / nf) / (m2n * m2n) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Some(SampleMoments {
        n: n as usize,
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

pub fn sample_moments(samples: &[f64]) -> Result<SampleMoments> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for s in samples {
        let d = s - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let variance = m2 / (n - 1.0);
    let m2n = m2 / n;
    let (skewness, excess_kurtosis) = if m2n > 0.0 {
        ((m3 / n) / m2n.powf(1.5), (m4 / n) / (m2n * m2n) - 3.0)
    } else {
        (0.0, 0.0)
    };
    Ok(SampleMoments {
        n: samples.len(),
        mean,
        variance,
        skewness,
        excess_kurtosis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn pearson_perfect_correlations() {
        let x: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson_r(&x, &x).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson_r(&x, &y).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pearson_rejects_degenerate_variance() {
        let x = vec![1.0; 10];
        let y: Vec<f64> = (0..10).map(|i| i as f64).collect();
        assert!(matches!(
            pearson_r(&x, &y),
            Err(Error::DegenerateVariance(_))
        ));
    }

    #[test]
    fn pearson_of_independent_uniforms_matches_noise_band() {
        // Mean |r| over many independent pairs approaches
        // √2/(√π·√(len−1)).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let len = 1000;
        let reps = 300;
        let mut sum_abs = 0.0;
        for _ in 0..reps {
            let x: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let y: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            sum_abs += pearson_r(&x, &y).unwrap().abs();
        }
        let mean_abs = sum_abs / reps as f64;
        let band = uniform_noise_band(len);
        // s.e. of the mean of |r| is ≈ 0.6·band/√reps
        assert!(
            (mean_abs - band).abs() < 4.0 * 0.6 * band / (reps as f64).sqrt(),
            "mean |r| = {mean_abs}, band = {band}"
        );
    }

    #[test]
    fn pearson_invariances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x: Vec<f64> = (0..200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.random_range(-2.0..2.0)).collect();
        let r = pearson_r(&x, &y).unwrap();
        let r_sym = pearson_r(&y, &x).unwrap();
        assert!((r - r_sym).abs() < 1e-12);
        let x_aff: Vec<f64> = x.iter().map(|v| 3.5 * v + 10.0).collect();
        let r_aff = pearson_r(&x_aff, &y).unwrap();
        assert!((r - r_aff).abs() < 1e-10);
    }

    #[test]
    fn fit_recovers_exact_line() {
        let x: Vec<f64> = (0..20).map(|i| i as f64 / 3.0).collect();
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        let fit = fit_linear(&x, &y, None).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.intercept - 1.0).abs() < 1e-12);
        assert_eq!(fit.r_squared, 1.0);
        assert!(fit.residual_ss < 1e-20);
    }

    #[test]
    fn fit_constant_y_gives_zero_slope() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y = vec![4.2; 10];
        let fit = fit_linear(&x, &y, None).unwrap();
        assert!(fit.slope.abs() < 1e-14);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn fit_rejects_singular_design() {
        let x = vec![2.0; 5];
        let y: Vec<f64> = (0..5).map(|i| i as f64).collect();
        assert!(matches!(
            fit_linear(&x, &y, None),
            Err(Error::DegenerateFit(_))
        ));
    }

    #[test]
    fn fit_noisy_line_within_three_stderr() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let true_slope = -1.7;
        let x: Vec<f64> = (0..400).map(|i| i as f64 / 40.0).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|v| true_slope * v + 0.5 + rng.random_range(-0.3..0.3))
            .collect();
        let fit = fit_linear(&x, &y, None).unwrap();
        let se = slope_stderr(&fit, &x);
        assert!(
            (fit.slope - true_slope).abs() < 3.0 * se,
            "slope {} vs {true_slope} (se {se})",
            fit.slope
        );
    }

    #[test]
    fn weighted_fit_downweights_outliers() {
        // A single heavy point pulled off the line barely matters when its
        // weight is tiny.
        let x = vec![0.0, 1.0, 2.0, 3.0];
        let y = vec![0.0, 1.0, 2.0, 30.0];
        let w = vec![1.0, 1.0, 1.0, 1e-9];
        let fit = fit_linear(&x, &y, Some(&w)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-4, "slope {}", fit.slope);
    }

    #[test]
    fn exponential_fit_recovers_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let lambda = 2.0;
        let samples: Vec<f64> = (0..100_000)
            .map(|_| {
                let u: f64 = rng.random_range(0.0..1.0);
                -(1.0 - u).ln() / lambda
            })
            .collect();
        let fit = fit_exponential_tail(&samples).unwrap();
        assert!(
            (1.96..=2.04).contains(&fit.lambda),
            "lambda = {}",
            fit.lambda
        );
        let surv = fit.survival_fit.unwrap();
        assert!(surv.r_squared > 0.99, "survival R² = {}", surv.r_squared);
        assert!((-surv.slope - lambda).abs() < 0.1);
    }

    #[test]
    fn exponential_fit_flags_degenerate_and_rejects_zeros() {
        let constant = vec![1.0; 200];
        let fit = fit_exponential_tail(&constant).unwrap();
        assert!(fit.survival_fit.is_none(), "constant input must be flagged");

        let mut with_zero = vec![1.0; 200];
        with_zero[7] = 0.0;
        assert!(fit_exponential_tail(&with_zero).is_err());

        assert!(matches!(
            fit_exponential_tail(&[1.0; 50]),
            Err(Error::InsufficientSamples { .. })
        ));
    }

    #[test]
    fn integer_histogram_counts_exactly() {
        let counts = integer_histogram([0i64, 0, 1, -1]).unwrap();
        assert_eq!(counts[&-1], 1);
        assert_eq!(counts[&0], 2);
        assert_eq!(counts[&1], 1);
        assert!(integer_histogram(std::iter::empty()).is_err());
    }

    #[test]
    fn real_histogram_conserves_mass() {
        let samples = vec![0.5; 17];
        let h = histogram(&samples, 4, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 17);
        assert_eq!(h.counts[2], 17);

        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let samples: Vec<f64> = (0..1_000_000).map(|_| rng.random_range(0.0..1.0)).collect();
        let h = histogram(&samples, 10, Some((0.0, 1.0))).unwrap();
        assert_eq!(h.counts.iter().sum::<u64>(), 1_000_000);
        // 4σ multinomial bound per bin
        let expected = 100_000.0;
        let sigma = (1_000_000.0f64 * 0.1 * 0.9).sqrt();
        for c in &h.counts {
            assert!(
                (*c as f64 - expected).abs() < 4.0 * sigma,
                "bin count {c} too far from {expected}"
            );
        }
    }

    #[test]
    fn histogram_is_permutation_invariant() {
        let mut samples: Vec<f64> = (0..500).map(|i| (i % 37) as f64).collect();
        let a = histogram(&samples, 12, Some((0.0, 37.0))).unwrap();
        samples.reverse();
        let b = histogram(&samples, 12, Some((0.0, 37.0))).unwrap();
        assert_eq!(a.counts, b.counts);
    }

    #[test]
    fn moments_of_a_symmetric_sample() {
        let samples: Vec<f64> = (-500..=500).map(|i| i as f64 / 100.0).collect();
        let m = sample_moments(&samples).unwrap();
        assert!(m.mean.abs() < 1e-12);
        assert!(m.skewness.abs() < 1e-12);
        // uniform-like grid has negative excess kurtosis near −1.2
        assert!((m.excess_kurtosis + 1.2).abs() < 0.01);
    }
}
