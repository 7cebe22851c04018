//! Summary statistics and goodness-of-fit tests used by the experiments.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::special::normal_cdf;

/// Neumaier-compensated sum.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

pub fn mean(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(compensated_sum(xs.iter().copied()) / xs.len() as f64)
}

/// Unbiased sample variance (`n - 1` denominator).
pub fn variance(xs: &[f64]) -> Result<f64> {
    if xs.len() < 2 {
        return Err(Error::EmptySample);
    }
    let m = mean(xs)?;
    Ok(compensated_sum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64)
}

pub fn std_dev(xs: &[f64]) -> Result<f64> {
    variance(xs).map(f64::sqrt)
}

/// Sample median (sorts a copy).
pub fn median(xs: &[f64]) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

/// One-sample Kolmogorov–Smirnov distance `sup |F_n - F|`.
pub fn ks_statistic<F: Fn(f64) -> f64>(xs: &[f64], cdf: F) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.iter().enumerate().fold(0.0_f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max((i as f64 + 1.0) / n - f).max(f - i as f64 / n)
    }))
}

/// Anderson–Darling test of normality with mean and variance estimated from
/// the sample. Returns the small-sample corrected statistic
/// `A*^2 = A^2 (1 + 0.75/n + 2.25/n^2)` and its approximate p-value
/// (D'Agostino & Stephens 1986, Table 4.9).
pub fn anderson_darling_normality(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.len() < 8 {
        return Err(Error::EmptySample);
    }
    let m = mean(xs)?;
    let s = std_dev(xs)?;
    let mut z: Vec<f64> = xs.iter().map(|x| (x - m) / s).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let nf = n as f64;
    let sum = compensated_sum((0..n).map(|i| {
        let a = normal_cdf(z[i]).max(1e-300);
        let b = (1.0 - normal_cdf(z[n - 1 - i])).max(1e-300);
        (2.0 * i as f64 + 1.0) * (a.ln() + b.ln())
    }));
    let a2 = -nf - sum / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok((a, p.clamp(0.0, 1.0)))
}

/// Pearson chi-square statistic and upper-tail p-value with
/// `bins - 1 - fitted` degrees of freedom.
pub fn chi_square_gof(observed: &[f64], expected: &[f64], fitted: usize) -> Result<(f64, f64)> {
    if observed.len() != expected.len() || observed.len() <= fitted + 1 {
        return Err(Error::InvalidConfig(
            "chi-square needs matching bins and positive degrees of freedom".into(),
        ));
    }
    let stat = compensated_sum(observed.iter().zip(expected).map(|(o, e)| (o - e) * (o - e) / e));
    let dof = (observed.len() - 1 - fitted) as f64;
    let p = 1.0
        - ChiSquared::new(dof)
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .cdf(stat);
    Ok((stat, p))
}
