//! Smooth, rapidly decaying kernels and their decay metadata.
//!
//! A kernel is a base profile evaluated at `scale * (x - shift)`. The base
//! profiles are the Gaussian `c exp(-a y^2)`, the super-Gaussian
//! `c exp(-a |y|^alpha)`, and `c y^2 exp(-y^2 / 2)`, which vanishes at its
//! centre and exists to exhibit non-identifiability.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::DecayWitness;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelFamily {
    Gaussian { a: f64, c: f64 },
    SuperGaussian { a: f64, alpha: f64, c: f64 },
    ZeroAtOrigin { c: f64 },
}

/// Kernel = base family composed with an affine change of argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelConfig", into = "KernelConfig")]
pub struct KernelSpec {
    family: KernelFamily,
    shift: f64,
    scale: f64,
    analysis_only: bool,
}

/// Exponential-type decay order of a kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayOrder {
    pub beta: Option<f64>,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfDomain(format!(
            "kernel {name} must be positive and finite, got {v}"
        )))
    }
}

impl KernelSpec {
    pub fn gaussian(a: f64, c: f64) -> Result<Self> {
        positive("a", a)?;
        positive("c", c)?;
        Ok(Self::from_family(KernelFamily::Gaussian { a, c }))
    }

    /// `e^{-x^2/2}`, the reference kernel of the Hermite machinery.
    pub fn standard_gaussian() -> Self {
        Self::from_family(KernelFamily::Gaussian { a: 0.5, c: 1.0 })
    }

    /// Super-Gaussian with an even exponent (`alpha` in {2, 4}), smooth everywhere.
    pub fn super_gaussian(a: f64, alpha: f64, c: f64) -> Result<Self> {
        if alpha != 2.0 && alpha != 4.0 {
            return Err(Error::ParameterOutOfDomain(format!(
                "super-Gaussian exponent {alpha} is not smooth at the origin; use super_gaussian_analysis"
            )));
        }
        Self::super_gaussian_analysis(a, alpha, c).map(|k| Self {
            analysis_only: false,
            ..k
        })
    }

    /// Any `alpha > 1`; non-even exponents are not smooth at the centre and
    /// are flagged as analysis-only.
    pub fn super_gaussian_analysis(a: f64, alpha: f64, c: f64) -> Result<Self> {
        positive("a", a)?;
        positive("c", c)?;
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::ParameterOutOfDomain(format!(
                "super-Gaussian exponent must exceed 1, got {alpha}"
            )));
        }
        let mut k = Self::from_family(KernelFamily::SuperGaussian { a, alpha, c });
        k.analysis_only = alpha != 2.0 && alpha != 4.0;
        Ok(k)
    }

    pub fn zero_at_origin(c: f64) -> Result<Self> {
        positive("c", c)?;
        Ok(Self::from_family(KernelFamily::ZeroAtOrigin { c }))
    }

    fn from_family(family: KernelFamily) -> Self {
        Self {
            family,
            shift: 0.0,
            scale: 1.0,
            analysis_only: false,
        }
    }

    pub fn family(&self) -> KernelFamily {
        self.family
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn is_analysis_only(&self) -> bool {
        self.analysis_only
    }

    /// `x -> phi(x - a)`.
    pub fn shifted(&self, a: f64) -> Self {
        Self {
            shift: self.shift + a,
            ..*self
        }
    }

    /// `x -> phi(b x)`.
    pub fn scaled(&self, b: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(Error::ParameterOutOfDomain(format!(
                "kernel scale must be finite and nonzero, got {b}"
            )));
        }
        Ok(Self {
            scale: self.scale * b,
            shift: self.shift / b,
            ..*self
        })
    }

    pub fn with_placement(&self, shift: f64, scale: f64) -> Result<Self> {
        if scale == 0.0 || !scale.is_finite() || !shift.is_finite() {
            return Err(Error::ParameterOutOfDomain(format!(
                "invalid kernel placement shift={shift} scale={scale}"
            )));
        }
        Ok(Self { shift, scale, ..*self })
    }

    pub fn is_strictly_positive(&self) -> bool {
        !matches!(self.family, KernelFamily::ZeroAtOrigin { .. })
    }

    pub fn require_positive(&self) -> Result<()> {
        if self.is_strictly_positive() {
            Ok(())
        } else {
            Err(Error::KernelNotPositive)
        }
    }

    /// Where the kernel attains its maximum (or, for the zero kernel, its zero).
    pub fn centre(&self) -> f64 {
        self.shift
    }

    /// `(a, c)` in `c exp(-a (x - shift)^2)` when the kernel is Gaussian.
    pub fn gaussian_parameters(&self) -> Option<(f64, f64)> {
        match self.family {
            KernelFamily::Gaussian { a, c } => Some((a * self.scale * self.scale, c)),
            KernelFamily::SuperGaussian { a, alpha, c } if alpha == 2.0 => Some((a * self.scale * self.scale, c)),
            _ => None,
        }
    }

    pub fn decay_order(&self) -> DecayOrder {
        let beta = match self.family {
            KernelFamily::Gaussian { .. } | KernelFamily::ZeroAtOrigin { .. } => 2.0,
            KernelFamily::SuperGaussian { alpha, .. } => alpha / (alpha - 1.0),
        };
        DecayOrder { beta: Some(beta) }
    }

    fn arg(&self, x: f64) -> f64 {
        self.scale * (x - self.shift)
    }

    pub fn eval(&self, x: f64) -> f64 {
        base_eval(self.family, self.arg(x))
    }

    /// `m`-th derivative in `x`, `m <= 4`.
    pub fn derivative(&self, m: usize, x: f64) -> Result<f64> {
        if m > 4 {
            return Err(Error::UnsupportedOrder(m));
        }
        let y = self.arg(x);
        let chain = self.scale.powi(m as i32);
        let base = match self.family {
            KernelFamily::Gaussian { a, c } => gaussian_derivative(a, c, m, y),
            family => match m {
                0..=2 => base_derivative_analytic(family, m, y),
                3 => five_point_first(|u| base_derivative_analytic(family, 2, u), y),
                _ => five_point_second(|u| base_derivative_analytic(family, 2, u), y),
            },
        };
        Ok(chain * base)
    }

    /// Exponent of the kernel logarithm tail, used to place truncation windows.
    fn base_radius(&self, threshold: f64) -> f64 {
        match self.family {
            KernelFamily::Gaussian { a, c } => ((c / threshold).ln().max(0.0) / a).sqrt(),
            KernelFamily::SuperGaussian { a, alpha, c } => ((c / threshold).ln().max(0.0) / a).powf(1.0 / alpha),
            KernelFamily::ZeroAtOrigin { c } => {
                // c y^2 e^{-y^2/2} decreases for y > sqrt(2).
                let g = |y: f64| c * y * y * (-0.5 * y * y).exp() - threshold;
                let (mut lo, mut hi) = (2f64.sqrt(), 2f64.sqrt());
                while g(hi) > 0.0 {
                    hi *= 2.0;
                }
                if g(lo) <= 0.0 {
                    return lo;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if g(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }
}

impl DecayWitness for KernelSpec {
    fn window(&self, threshold: f64) -> (f64, f64) {
        let r = self.base_radius(threshold) / self.scale.abs();
        (self.shift - r, self.shift + r)
    }
}

fn base_eval(family: KernelFamily, y: f64) -> f64 {
    match family {
        KernelFamily::Gaussian { a, c } => c * (-a * y * y).exp(),
        KernelFamily::SuperGaussian { a, alpha, c } => c * (-a * y.abs().powf(alpha)).exp(),
        KernelFamily::ZeroAtOrigin { c } => c * y * y * (-0.5 * y * y).exp(),
    }
}

/// Physicists' Hermite polynomial by recurrence.
fn hermite_poly(n: usize, z: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 2.0 * z);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let next = 2.0 * z * cur - 2.0 * k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// d^m/dy^m c e^{-a y^2} = c (-sqrt(a))^m H_m(sqrt(a) y) e^{-a y^2}.
fn gaussian_derivative(a: f64, c: f64, m: usize, y: f64) -> f64 {
    let ra = a.sqrt();
    c * (-ra).powi(m as i32) * hermite_poly(m, ra * y) * (-a * y * y).exp()
}

fn base_derivative_analytic(family: KernelFamily, m: usize, y: f64) -> f64 {
    match family {
        KernelFamily::Gaussian { a, c } => gaussian_derivative(a, c, m, y),
        KernelFamily::SuperGaussian { a, alpha, c } => {
            let v = c * (-a * y.abs().powf(alpha)).exp();
            let ay = y.abs();
            let g1 = a * alpha * ay.powf(alpha - 1.0) * y.signum(); // -(log phi)'
            match m {
                0 => v,
                1 => {
                    if y == 0.0 {
                        0.0
                    } else {
                        -g1 * v
                    }
                }
                _ => {
                    let curvature = if alpha == 2.0 {
                        2.0 * a
                    } else if y == 0.0 {
                        if alpha > 2.0 {
                            0.0
                        } else {
                            f64::INFINITY
                        }
                    } else {
                        a * alpha * (alpha - 1.0) * ay.powf(alpha - 2.0)
                    };
                    let g1sq = if y == 0.0 { 0.0 } else { g1 * g1 };
                    (g1sq - curvature) * v
                }
            }
        }
        KernelFamily::ZeroAtOrigin { c } => {
            let e = (-0.5 * y * y).exp();
            let y2 = y * y;
            match m {
                0 => c * y2 * e,
                1 => c * (2.0 * y - y2 * y) * e,
                _ => c * (2.0 - 5.0 * y2 + y2 * y2) * e,
            }
        }
    }
}

fn fd_step(y: f64) -> f64 {
    1e-4 * (1.0 + y.abs())
}

fn five_point_first<F: Fn(f64) -> f64>(f: F, y: f64) -> f64 {
    let h = fd_step(y);
    (f(y - 2.0 * h) - 8.0 * f(y - h) + 8.0 * f(y + h) - f(y + 2.0 * h)) / (12.0 * h)
}

fn five_point_second<F: Fn(f64) -> f64>(f: F, y: f64) -> f64 {
    let h = fd_step(y);
    (-f(y - 2.0 * h) + 16.0 * f(y - h) - 30.0 * f(y) + 16.0 * f(y + h) - f(y + 2.0 * h)) / (12.0 * h * h)
}

/// Result of the weighted-sup diagnostic for one derivative order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyRow {
    pub m: usize,
    /// `ln S(k, m)` for `k = 0..=k_max`.
    pub log_sup: Vec<f64>,
    /// Whether each supremum was attained strictly inside the scan grid.
    pub interior: Vec<bool>,
    /// Fitted `A` (geometric growth after removing `(k!)^{1/beta}`).
    pub fitted_a: f64,
    /// Smallest `C_m` making the bound hold on every tested `k` with `fitted_a`.
    pub fitted_c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GevreyDiagnostic {
    pub beta: f64,
    pub k_max: usize,
    pub rows: Vec<GevreyRow>,
    /// True when every supremum is finite and interior and each fit is finite.
    pub finite_a: bool,
}

impl GevreyDiagnostic {
    pub fn sup(&self, k: usize, m: usize) -> f64 {
        self.rows[m].log_sup[k].exp()
    }
}

/// Scan `(1 + |x|)^k |phi^(m)(x)|` over `[centre - 20, centre + 20] / |scale|`
/// with step `1e-3` and fit `S(k, m) <= C_m A^k (k!)^{1/beta}`.
pub fn gevrey_diagnostic(kernel: &KernelSpec, k_max: usize, m_max: usize) -> Result<GevreyDiagnostic> {
    if m_max > 2 {
        return Err(Error::UnsupportedOrder(m_max));
    }
    if k_max > 40 {
        return Err(Error::OrderTooLarge { order: k_max, max: 40 });
    }
    let beta = kernel.decay_order().beta.unwrap_or(1.0);
    let half = 20.0 / kernel.scale().abs();
    let step = 1e-3 / kernel.scale().abs();
    let n = (2.0 * half / step).round() as usize;
    let xs: Vec<f64> = (0..=n).map(|i| kernel.centre() - half + step * i as f64).collect();

    let mut rows = Vec::with_capacity(m_max + 1);
    let mut finite_a = true;
    for m in 0..=m_max {
        let log_abs = |x: f64| {
            kernel
                .derivative(m, x)
                .map(|d| d.abs().ln())
                .unwrap_or(f64::NEG_INFINITY)
        };
        let logs: Vec<f64> = xs.iter().map(|&x| log_abs(x)).collect();
        let mut log_sup = Vec::with_capacity(k_max + 1);
        let mut interior = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            let weighted = |x: f64, l: f64| k as f64 * (1.0 + x.abs()).ln() + l;
            let (best, _) = xs
                .iter()
                .zip(&logs)
                .enumerate()
                .map(|(i, (&x, &l))| (i, weighted(x, l)))
                .filter(|(_, v)| !v.is_nan())
                .fold(
                    (0usize, f64::NEG_INFINITY),
                    |acc, (i, v)| if v > acc.1 { (i, v) } else { acc },
                );
            let inside = best > 0 && best < xs.len() - 1;
            // Polish the grid maximiser with golden-section search on the bracketing cells.
            let refined = if inside {
                let g = |x: f64| weighted(x, log_abs(x));
                golden_max(g, xs[best - 1], xs[best + 1])
            } else {
                weighted(xs[best], logs[best])
            };
            log_sup.push(refined);
            interior.push(inside);
        }
        // Least squares on r_k = ln S - ln(k!)/beta  ~  ln C + k ln A.
        let r: Vec<f64> = (0..=k_max)
            .map(|k| log_sup[k] - crate::special::ln_gamma(k as f64 + 1.0) / beta)
            .collect();
        let (slope, _) = if k_max == 0 {
            (0.0, r[0])
        } else {
            linear_fit(&(0..=k_max).map(|k| k as f64).collect::<Vec<_>>(), &r)
        };
        let log_c = (0..=k_max)
            .map(|k| r[k] - slope * k as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        let fitted_a = slope.exp();
        let fitted_c = log_c.exp();
        finite_a &= fitted_a.is_finite()
            && fitted_c.is_finite()
            && interior.iter().all(|&b| b)
            && log_sup.iter().all(|v| v.is_finite());
        rows.push(GevreyRow {
            m,
            log_sup,
            interior,
            fitted_a,
            fitted_c,
        });
    }
    Ok(GevreyDiagnostic {
        beta,
        k_max,
        rows,
        finite_a,
    })
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    f1.max(f2).max(f(lo)).max(f(hi))
}

/// Ordinary least squares `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Flat config-file form `{family, a, alpha, c, shift, scale}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelConfig {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub analysis_only: bool,
}

fn one() -> f64 {
    1.0
}

impl TryFrom<KernelConfig> for KernelSpec {
    type Error = Error;

    fn try_from(cfg: KernelConfig) -> Result<Self> {
        let c = cfg.c.unwrap_or(1.0);
        let missing =
            |f: &str| Error::ParameterOutOfDomain(format!("kernel family {} requires field `{f}`", cfg.family));
        let base = match cfg.family.to_ascii_lowercase().as_str() {
            "gaussian" => KernelSpec::gaussian(cfg.a.unwrap_or(0.5), c)?,
            "super_gaussian" | "supergaussian" => {
                let a = cfg.a.unwrap_or(1.0);
                let alpha = cfg.alpha.ok_or_else(|| missing("alpha"))?;
                if cfg.analysis_only {
                    KernelSpec::super_gaussian_analysis(a, alpha, c)?
                } else {
                    KernelSpec::super_gaussian(a, alpha, c)?
                }
            }
            "zero_at_origin" | "zeroatorigin" => KernelSpec::zero_at_origin(c)?,
            other => return Err(Error::ParameterOutOfDomain(format!("unknown kernel family `{other}`"))),
        };
        base.with_placement(cfg.shift, cfg.scale)
    }
}

impl From<KernelSpec> for KernelConfig {
    fn from(k: KernelSpec) -> Self {
        let (family, a, alpha, c) = match k.family {
            KernelFamily::Gaussian { a, c } => ("gaussian", Some(a), None, c),
            KernelFamily::SuperGaussian { a, alpha, c } => ("super_gaussian", Some(a), Some(alpha), c),
            KernelFamily::ZeroAtOrigin { c } => ("zero_at_origin", None, None, c),
        };
        KernelConfig {
            family: family.into(),
            a,
            alpha,
            c: Some(c),
            shift: k.shift,
            scale: k.scale,
            analysis_only: k.analysis_only,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn g() -> KernelSpec {
        KernelSpec::gaussian(0.5, 1.0).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(g().eval(0.0), 1.0);
        assert!((g().eval(2.0) - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(KernelSpec::zero_at_origin(1.0).unwrap().eval(0.0), 0.0);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(g().derivative(1, 0.0).unwrap(), 0.0);
        assert!((g().derivative(2, 0.0).unwrap() + 1.0).abs() < 1e-15);
        let sg = KernelSpec::super_gaussian(1.0, 4.0, 1.0).unwrap();
        let d = sg.derivative(1, 1.0).unwrap();
        assert!((d + 4.0 / E).abs() < 1e-12, "{d}");
        assert!(matches!(g().derivative(5, 0.0), Err(Error::UnsupportedOrder(5))));
    }

    #[test]
    fn derivatives_agree_with_finite_differences() {
        let kernels = [
            g().shifted(0.3).scaled(1.7).unwrap(),
            KernelSpec::super_gaussian(1.0, 4.0, 2.0).unwrap(),
            KernelSpec::super_gaussian_analysis(0.7, 1.5, 1.0).unwrap(),
            KernelSpec::zero_at_origin(1.5).unwrap().shifted(-0.4),
        ];
        for k in kernels {
            for &x in &[-1.3, -0.2, 0.45, 1.1, 2.5] {
                for m in 1..=4 {
                    let lower = |u: f64| k.derivative(m - 1, u).unwrap();
                    let h = 1e-5;
                    let fd = (lower(x + h) - lower(x - h)) / (2.0 * h);
                    let d = k.derivative(m, x).unwrap();
                    assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "m={m} x={x}: {d} vs {fd}");
                }
            }
        }
    }

    #[test]
    fn transform_consistency() {
        let base = KernelSpec::super_gaussian(0.8, 4.0, 1.0).unwrap();
        let shifted = base.shifted(1.25);
        let scaled = base.scaled(-2.5).unwrap();
        for &x in &[-3.0, -0.7, 0.0, 0.4, 2.2] {
            assert_eq!(shifted.eval(x), base.eval(x - 1.25));
            assert!((scaled.eval(x) - base.eval(-2.5 * x)).abs() < 1e-15);
        }
    }

    #[test]
    fn decay_orders() {
        assert_eq!(g().decay_order().beta, Some(2.0));
        assert_eq!(KernelSpec::zero_at_origin(1.0).unwrap().decay_order().beta, Some(2.0));
        let sg = KernelSpec::super_gaussian_analysis(1.0, 1.5, 1.0).unwrap();
        assert!((sg.decay_order().beta.unwrap() - 3.0).abs() < 1e-15);
        assert!(sg.is_analysis_only());
        assert!(KernelSpec::super_gaussian(1.0, 1.5, 1.0).is_err());
    }

    #[test]
    fn positivity() {
        let ks = [g(), KernelSpec::super_gaussian(2.0, 4.0, 0.5).unwrap()];
        for k in ks {
            for i in -400..=400 {
                let x = i as f64 * 0.01;
                assert!(k.eval(x) > 0.0);
            }
        }
        assert!(!KernelSpec::zero_at_origin(1.0).unwrap().is_strictly_positive());
    }

    #[test]
    fn window_brackets_threshold() {
        let k = g().shifted(2.0).scaled(0.5).unwrap();
        let (lo, hi) = k.window(1e-18);
        assert!((k.eval(lo) / 1e-18 - 1.0).abs() < 1e-6);
        assert!((k.eval(hi) / 1e-18 - 1.0).abs() < 1e-6);
        let z = KernelSpec::zero_at_origin(1.0).unwrap();
        let (lo, hi) = z.window(1e-18);
        assert!((z.eval(hi) / 1e-18 - 1.0).abs() < 1e-6);
        assert_eq!(lo, -hi);
    }

    #[test]
    fn gevrey_gaussian_has_small_a() {
        let d = gevrey_diagnostic(&g(), 10, 0).unwrap();
        assert!(d.finite_a);
        assert!(d.rows[0].fitted_a <= 2.0, "A = {}", d.rows[0].fitted_a);
    }

    #[test]
    fn gevrey_zero_kernel_maximum() {
        let d = gevrey_diagnostic(&KernelSpec::zero_at_origin(1.0).unwrap(), 0, 0).unwrap();
        assert!((d.sup(0, 0) - 2.0 / E).abs() < 1e-12);
    }

    #[test]
    fn gevrey_super_gaussian_three_halves() {
        let k = KernelSpec::super_gaussian_analysis(1.0, 1.5, 1.0).unwrap();
        let d = gevrey_diagnostic(&k, 10, 2).unwrap();
        assert!((d.beta - 3.0).abs() < 1e-12);
        assert!(d.rows.iter().all(|r| r.fitted_a.is_finite()));
        assert!(d.rows[0].interior.iter().all(|&b| b));
    }

    #[test]
    fn rapid_decay_interior_sup() {
        for k in [g(), KernelSpec::super_gaussian(1.0, 4.0, 1.0).unwrap()] {
            let d = gevrey_diagnostic(&k, 20, 0).unwrap();
            assert!(d.rows[0].interior.iter().all(|&b| b));
            assert!(d.rows[0].log_sup.iter().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn gevrey_rejects_large_orders() {
        assert!(matches!(
            gevrey_diagnostic(&g(), 10, 3),
            Err(Error::UnsupportedOrder(3))
        ));
        assert!(gevrey_diagnostic(&g(), 41, 0).is_err());
    }

    #[test]
    fn config_round_trip() {
        let k = KernelSpec::super_gaussian(0.5, 4.0, 2.0)
            .unwrap()
            .with_placement(1.0, 2.0)
            .unwrap();
        let json = serde_json::to_string(&k).unwrap();
        let back: KernelSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(k, back);
        let bad = r#"{"family":"gaussian","a":-1.0}"#;
        assert!(serde_json::from_str::<KernelSpec>(bad).is_err());
    }
}
