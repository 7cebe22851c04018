//! Adaptive Gauss–Kronrod integration over intervals and the real line.
//!
//! The engine is a global adaptive scheme built on the 21-point Kronrod
//! extension of the 10-point Gauss rule: the interval with the largest error
//! estimate is bisected until the summed estimate meets
//! `max(abs_tol, rel_tol * |I|)`.
//!
//! Whole-line integrals come in two flavours. [`Support::Window`] is used when
//! the integrand carries a rapidly decaying kernel: the caller supplies the
//! window on which the kernel exceeds `tail_cut_threshold` (see
//! [`DecayWitness`]), and the window is widened further while the integrand is
//! still significant at its edges (polynomial factors can push mass outward).
//! [`Support::WholeLine`] maps the line onto `(-1, 1)` and is meant for
//! integrands without a decay witness, such as bare heavy-tailed densities.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Kernel magnitude below which the tails of a windowed integral are dropped.
    pub tail_cut_threshold: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 2000,
            tail_cut_threshold: 1e-18,
        }
    }
}

impl QuadratureConfig {
    /// Tight tolerances, still clear of the rule's rounding floor.
    pub fn precise() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_subdivisions: 4000,
            tail_cut_threshold: 1e-20,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "abs_tol must be > 0, got {}",
                self.abs_tol
            )));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "rel_tol must be > 0, got {}",
                self.rel_tol
            )));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidConfig("max_subdivisions must be >= 1".into()));
        }
        if !(self.tail_cut_threshold > 0.0 && self.tail_cut_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "tail_cut_threshold must lie in (0, 1), got {}",
                self.tail_cut_threshold
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralResult<V> {
    pub value: V,
    pub error_estimate: f64,
    pub subdivisions_used: usize,
}

/// Anything that can bound the tails of a whole-line integrand.
pub trait DecayWitness {
    /// Interval outside of which the witness is below `threshold`.
    fn window(&self, threshold: f64) -> (f64, f64);
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Interval {
        lower: f64,
        upper: f64,
    },
    /// Whole line, truncated to a kernel window and widened while the
    /// integrand is still significant at the edges.
    Window {
        lower: f64,
        upper: f64,
    },
    /// Whole line through the substitution `x = u / (1 - u^2)`.
    WholeLine,
}

impl Support {
    pub fn interval(lower: f64, upper: f64) -> Self {
        Support::Interval { lower, upper }
    }

    pub fn witnessed<W: DecayWitness + ?Sized>(witness: &W, cfg: &QuadratureConfig) -> Self {
        let (lower, upper) = witness.window(cfg.tail_cut_threshold);
        Support::Window { lower, upper }
    }
}

/// Values the rule can accumulate: real or complex.
pub trait QuadValue: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn modulus(&self) -> f64;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn modulus(&self) -> f64 {
        self.abs()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn modulus(&self) -> f64 {
        // Componentwise tolerance: the larger part governs refinement.
        self.re.abs().max(self.im.abs())
    }
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995657163025808080735527280689003,
    0.973906528517171720077964012084452,
    0.930157491355708226001207180059508,
    0.865063366688984510732096688423493,
    0.780817726586416897063717578345042,
    0.679409568299024406234327365114874,
    0.562757134668604683339000099272694,
    0.433395394129247190799265943165784,
    0.294392862701460198131126603103866,
    0.148874338981631210884826001129720,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066671344308688137593568809893332,
    0.149451349150580593145776339657697,
    0.219086362515982043995534934228163,
    0.269266719309996355091226921569469,
    0.295524224714752870173892994651338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011694638867371874278064396062192,
    0.032558162307964727478818972459390,
    0.054755896574351996031381300244580,
    0.075039674810919952767043140916190,
    0.093125454583697605535065465083366,
    0.109387158802297641899210590325805,
    0.123491976262065851077958109831074,
    0.134709217311473325928054001771707,
    0.142775938577060080797094273138717,
    0.147739104901338491374841515972068,
    0.149445554002916905664936468389821,
];

#[derive(Debug, Clone, Copy)]
struct Panel<V> {
    lower: f64,
    upper: f64,
    value: V,
    error: f64,
    /// `int |f|` over the panel.
    abs: f64,
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk21<V: QuadValue, F: Fn(f64) -> V>(f: &F, lower: f64, upper: f64) -> Panel<V> {
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let abs_half = half.abs();

    let f_center = f(center);
    let mut res_gauss = V::zero();
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = f_center.modulus() * WGK[10];
    let mut fv1 = [V::zero(); 10];
    let mut fv2 = [V::zero(); 10];

    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let pair = f1 + f2;
        if j % 2 == 1 {
            res_gauss = res_gauss + pair * WG[j / 2];
        }
        res_kronrod = res_kronrod + pair * WGK[j];
        res_abs += WGK[j] * (f1.modulus() + f2.modulus());
    }

    let mean = res_kronrod * 0.5;
    let mut res_asc = WGK[10] * (f_center - mean).modulus();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).modulus() + (fv2[j] - mean).modulus());
    }

    let value = res_kronrod * half;
    let err = ((res_kronrod - res_gauss) * half).modulus();
    Panel {
        lower,
        upper,
        value,
        error: rescale_error(err, res_abs * abs_half, res_asc * abs_half),
        abs: res_abs * abs_half,
    }
}

const CANCELLATION_FLOOR: f64 = 100.0 * f64::EPSILON;

struct ByError(usize, f64);

impl PartialEq for ByError {
    fn eq(&self, other: &Self) -> bool {
        self.1 == other.1 && self.0 == other.0
    }
}
impl Eq for ByError {}
impl PartialOrd for ByError {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for ByError {
    fn cmp(&self, other: &Self) -> Ordering {
        self.1.total_cmp(&other.1).then_with(|| other.0.cmp(&self.0))
    }
}

/// Global adaptive integration over a finite interval split into `edges`.
fn adaptive<V: QuadValue, F: Fn(f64) -> V>(f: &F, edges: &[f64], cfg: &QuadratureConfig) -> Result<IntegralResult<V>> {
    let mut panels: Vec<Panel<V>> = Vec::with_capacity(edges.len() + 64);
    let mut heap = BinaryHeap::new();
    let mut total = V::zero();
    let mut total_err = 0.0;
    let mut total_abs = 0.0;

    for w in edges.windows(2) {
        let p = gk21(f, w[0], w[1]);
        total = total + p.value;
        total_err += p.error;
        total_abs += p.abs;
        heap.push(ByError(panels.len(), p.error));
        panels.push(p);
    }

    loop {
        // Under heavy cancellation (e.g. odd moments of symmetric laws) the
        // attainable accuracy is set by int |f|, not by the near-zero result.
        let target = cfg
            .abs_tol
            .max(cfg.rel_tol * total.modulus())
            .max(CANCELLATION_FLOOR * total_abs);
        if total_err <= target {
            break;
        }
        if panels.len() >= cfg.max_subdivisions {
            return Err(Error::NonConvergence {
                error_estimate: total_err,
                subdivisions: panels.len(),
            });
        }
        let Some(ByError(idx, _)) = heap.pop() else { break };
        let worst = panels[idx];
        let mid = 0.5 * (worst.lower + worst.upper);
        if mid <= worst.lower || mid >= worst.upper {
            // Interval at machine resolution; its error cannot shrink further.
            if heap.is_empty() {
                return Err(Error::NonConvergence {
                    error_estimate: total_err,
                    subdivisions: panels.len(),
                });
            }
            continue;
        }
        let left = gk21(f, worst.lower, mid);
        let right = gk21(f, mid, worst.upper);
        total = total - worst.value + left.value + right.value;
        total_err += left.error + right.error - worst.error;
        total_abs += left.abs + right.abs - worst.abs;
        panels[idx] = left;
        heap.push(ByError(idx, left.error));
        heap.push(ByError(panels.len(), right.error));
        panels.push(right);
        if total_err < 0.0 {
            total_err = panels.iter().map(|p| p.error).sum();
        }
    }

    // Deterministic reduction in left-to-right order.
    panels.sort_by(|a, b| a.lower.total_cmp(&b.lower));
    let value = panels.iter().fold(V::zero(), |acc, p| acc + p.value);
    let error_estimate = panels.iter().map(|p| p.error).sum();
    Ok(IntegralResult {
        value,
        error_estimate,
        subdivisions_used: panels.len(),
    })
}

/// Reusable integration setup: configuration, breakpoints and oscillation
/// frequency.
#[derive(Debug, Clone)]
pub struct Integrator {
    cfg: QuadratureConfig,
    breakpoints: Vec<f64>,
    frequency: f64,
}

impl Integrator {
    pub fn new(cfg: QuadratureConfig) -> Self {
        Self {
            cfg,
            breakpoints: Vec::new(),
            frequency: 0.0,
        }
    }

    /// Points that must lie on panel boundaries (peaks, kinks, atoms of a
    /// neighbouring factor).
    pub fn breakpoints(mut self, points: &[f64]) -> Self {
        self.breakpoints
            .extend(points.iter().copied().filter(|p| p.is_finite()));
        self
    }

    /// Caps the initial panel width at `pi / |t|`.
    pub fn frequency(mut self, t: f64) -> Self {
        self.frequency = t.abs();
        self
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.cfg
    }

    pub fn real<F: Fn(f64) -> f64>(&self, f: F, support: Support) -> Result<IntegralResult<f64>> {
        self.run(&f, support)
    }

    pub fn complex<F: Fn(f64) -> Complex64>(&self, f: F, support: Support) -> Result<IntegralResult<Complex64>> {
        self.run(&f, support)
    }

    fn run<V: QuadValue, F: Fn(f64) -> V>(&self, f: &F, support: Support) -> Result<IntegralResult<V>> {
        self.cfg.validate()?;
        match support {
            Support::Interval { lower, upper } => {
                check_interval(lower, upper)?;
                if lower == upper {
                    return Ok(IntegralResult {
                        value: V::zero(),
                        error_estimate: 0.0,
                        subdivisions_used: 0,
                    });
                }
                let edges = self.edges(lower, upper);
                adaptive(f, &edges, &self.cfg)
            }
            Support::Window { lower, upper } => {
                check_interval(lower, upper)?;
                let (lower, upper) = widen_window(f, lower, upper, &self.cfg);
                let edges = self.edges(lower, upper);
                adaptive(f, &edges, &self.cfg)
            }
            Support::WholeLine => {
                let mapped = |u: f64| {
                    let d = 1.0 - u * u;
                    let x = u / d;
                    let jac = (1.0 + u * u) / (d * d);
                    let y = f(x);
                    if y.modulus() == 0.0 || !jac.is_finite() {
                        V::zero()
                    } else {
                        y * jac
                    }
                };
                let mut edges = vec![-1.0, 0.0, 1.0];
                for &b in &self.breakpoints {
                    // inverse of x = u / (1 - u^2)
                    let u = if b == 0.0 {
                        0.0
                    } else {
                        (-1.0 + (1.0 + 4.0 * b * b).sqrt()) / (2.0 * b)
                    };
                    edges.push(u);
                }
                edges.sort_by(f64::total_cmp);
                edges.dedup();
                adaptive(&mapped, &edges, &self.cfg)
            }
        }
    }

    fn edges(&self, lower: f64, upper: f64) -> Vec<f64> {
        let mut edges = vec![lower, upper];
        edges.extend(self.breakpoints.iter().copied().filter(|&b| b > lower && b < upper));
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        if self.frequency > 0.0 {
            let max_width = PI / self.frequency;
            let mut refined = Vec::with_capacity(edges.len());
            for w in edges.windows(2) {
                let pieces = ((w[1] - w[0]) / max_width).ceil().max(1.0) as usize;
                let step = (w[1] - w[0]) / pieces as f64;
                for k in 0..pieces {
                    refined.push(w[0] + step * k as f64);
                }
            }
            refined.push(*edges.last().expect("non-empty"));
            edges = refined;
        }
        edges
    }
}

fn check_interval(lower: f64, upper: f64) -> Result<()> {
    if !lower.is_finite() || !upper.is_finite() || lower > upper {
        return Err(Error::InvalidInterval { lower, upper });
    }
    Ok(())
}

/// Push window edges outward while the integrand is non-negligible there.
fn widen_window<V: QuadValue, F: Fn(f64) -> V>(f: &F, lower: f64, upper: f64, cfg: &QuadratureConfig) -> (f64, f64) {
    const SAMPLES: usize = 96;
    let width = (upper - lower).max(1e-3);
    let peak = (0..=SAMPLES)
        .map(|k| f(lower + width * k as f64 / SAMPLES as f64).modulus())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    let negligible = |x: f64| {
        let v = f(x).modulus();
        !v.is_finite() || v * (1.0 + x.abs()) <= (1e-3 * cfg.abs_tol).max(1e-17 * peak * width)
    };
    let step = 0.25 * width;
    let (mut lo, mut hi) = (lower, lower + width);
    for _ in 0..400 {
        if negligible(lo) {
            break;
        }
        lo -= step;
    }
    for _ in 0..400 {
        if negligible(hi) {
            break;
        }
        hi += step;
    }
    (lo, hi)
}

/// Integrate a real function with default breakpoints and no oscillation cap.
pub fn integrate<F: Fn(f64) -> f64>(f: F, support: Support, cfg: &QuadratureConfig) -> Result<IntegralResult<f64>> {
    Integrator::new(*cfg).real(f, support)
}

/// Integrate a complex function; real and imaginary parts share one
/// subdivision.
pub fn integrate_complex<F: Fn(f64) -> Complex64>(
    f: F,
    support: Support,
    cfg: &QuadratureConfig,
) -> Result<IntegralResult<Complex64>> {
    Integrator::new(*cfg).complex(f, support)
}

/// Composite trapezoid rule on a uniform grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}

/// Uniform grid `lower, lower + step, ..., upper` (inclusive).
pub fn uniform_grid(lower: f64, upper: f64, step: f64) -> Vec<f64> {
    let n = ((upper - lower) / step).round() as usize;
    (0..=n).map(|k| lower + step * k as f64).collect()
}
