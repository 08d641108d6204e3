//! Reference laws, distances, autocorrelation and convergence slopes.

use crate::error::{Error, Result};
use crate::system::ln_factorial;

/// `e^{-lambda} lambda^k / k!`, evaluated in log space.
pub fn poisson_pmf(lambda: f64, k: usize) -> f64 {
    if k == 0 {
        return (-lambda).exp();
    }
    (k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp()
}

/// Poisson probabilities on `0..=kmax`.
pub fn poisson_pmf_table(lambda: f64, kmax: usize) -> Vec<f64> {
    (0..=kmax).map(|k| poisson_pmf(lambda, k)).collect()
}

/// Normalized histogram of non-negative integer samples, indexed by value.
pub fn histogram(values: &[usize]) -> Vec<f64> {
    let Some(&max) = values.iter().max() else {
        return Vec::new();
    };
    let mut h = vec![0.0; max + 1];
    for &v in values {
        h[v] += 1.0;
    }
    let n = values.len() as f64;
    h.iter_mut().for_each(|x| *x /= n);
    h
}

fn check_normalized(h: &[f64], which: &str) -> Result<()> {
    let s: f64 = h.iter().sum();
    if (s - 1.0).abs() > 1e-9 || h.iter().any(|&x| x < 0.0) {
        return Err(Error::Diagnostics(format!(
            "{which} is not a probability vector (sum = {s})"
        )));
    }
    Ok(())
}

/// `sum_k |a(k) - b(k)|` over the union support, without the factor 1/2.
pub fn tv_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    check_normalized(a, "first histogram")?;
    check_normalized(b, "second histogram")?;
    let n = a.len().max(b.len());
    let at = |h: &[f64], k: usize| h.get(k).copied().unwrap_or(0.0);
    Ok((0..n).map(|k| (at(a, k) - at(b, k)).abs()).sum())
}

/// TV distance between the empirical law of `counts` and Poisson(`lambda`).
pub fn tv_to_poisson(counts: &[usize], lambda: f64) -> Result<f64> {
    if counts.is_empty() {
        return Err(Error::Diagnostics("no samples".into()));
    }
    let h = histogram(counts);
    // the truncated tail is far below the normalization tolerance
    let kmax = (h.len()).max((lambda + 20.0 * lambda.sqrt() + 30.0) as usize);
    tv_distance(&h, &poisson_pmf_table(lambda, kmax))
}

/// `sum_{i<j} cos^2((2 pi N / L)(q_i - q_j))` for one-dimensional positions.
pub fn cosine_test_function(positions: &[f64], box_length: f64) -> f64 {
    let n = positions.len();
    let k = 2.0 * std::f64::consts::PI * n as f64 / box_length;
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let c = (k * (positions[i] - positions[j])).cos();
            s += c * c;
        }
    }
    s
}

/// Mean of `|phi - ref_mean|` over the sample values.
pub fn weak_error(values: &[f64], ref_mean: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Diagnostics("weak error of an empty sample".into()));
    }
    Ok(values.iter().map(|v| (v - ref_mean).abs()).sum::<f64>() / values.len() as f64)
}

/// `|mean(phi) - ref_mean|`, the error of the sample average.
pub fn mean_error(values: &[f64], ref_mean: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Diagnostics("mean error of an empty sample".into()));
    }
    Ok((mean(values) - ref_mean).abs())
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Biased (`1/n`) sample variance.
pub fn variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / values.len() as f64
}

/// Sample autocorrelations `rho(0..=max_lag)` normalized by the lag-0 autocovariance.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let n = series.len();
    if max_lag < 1 || n <= max_lag {
        return Err(Error::Diagnostics(format!(
            "need length {n} > max_lag {max_lag} >= 1"
        )));
    }
    let m = mean(series);
    let c: Vec<f64> = series.iter().map(|v| v - m).collect();
    let c0: f64 = c.iter().map(|x| x * x).sum();
    if c0 <= 0.0 || !c0.is_finite() {
        return Err(Error::Diagnostics("series has zero variance".into()));
    }
    Ok((0..=max_lag)
        .map(|k| {
            c[..n - k]
                .iter()
                .zip(&c[k..])
                .map(|(a, b)| a * b)
                .sum::<f64>()
                / c0
        })
        .collect())
}

/// `1 + 2 sum_k rho(k)`, summed until the first negative autocorrelation.
pub fn iact(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::Diagnostics("IACT needs at least two values".into()));
    }
    let m = mean(series);
    let c: Vec<f64> = series.iter().map(|v| v - m).collect();
    let c0: f64 = c.iter().map(|x| x * x).sum();
    if c0 <= 0.0 || !c0.is_finite() {
        return Err(Error::Diagnostics("series has zero variance".into()));
    }
    let mut tail = 0.0;
    for k in 1..n {
        let r = c[..n - k]
            .iter()
            .zip(&c[k..])
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / c0;
        if r < 0.0 {
            break;
        }
        tail += r;
    }
    Ok(1.0 + 2.0 * tail)
}

/// Standard error of the mean corrected for autocorrelation: `sqrt(var * IACT / n)`.
pub fn standard_error(series: &[f64]) -> Result<f64> {
    let t = iact(series)?;
    Ok((variance(series) * t / series.len() as f64).sqrt())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Diagnostics(
            "need two equally long series of length >= 2".into(),
        ));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Diagnostics(
            "log-log fit needs positive finite values".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (mean(&lx), mean(&ly));
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Diagnostics("all x values coincide".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}
