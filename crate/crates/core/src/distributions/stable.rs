//! Tabulated standard symmetric stable densities.
//!
//! The standard law has characteristic function `exp(-|t|^alpha)`. Its density
//! is tabulated on `[0, 50]` by numerically inverting that function, then read
//! back with four-point cubic interpolation. Beyond the table the convergent
//! (alpha < 1) or asymptotic (alpha > 1) power series in `|x|^{-alpha}` takes
//! over, whose leading term is `c_alpha |x|^{-alpha-1}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::quadrature::{Integrator, QuadratureConfig, Support};
use crate::special::{gamma, ln_gamma};

pub const TABLE_HALF_WIDTH: f64 = 50.0;
const TABLE_STEP: f64 = 0.01;
/// The characteristic function is cut where it falls below this level.
const CF_CUTOFF: f64 = 1e-16;

#[derive(Debug)]
pub struct StableTable {
    alpha: f64,
    values: Vec<f64>,
}

impl StableTable {
    /// Build (or fetch from the process-wide cache) the table for `alpha`.
    pub fn get(alpha: f64) -> Arc<StableTable> {
        static CACHE: OnceLock<Mutex<HashMap<u64, Arc<StableTable>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(t) = cache.lock().expect("stable cache poisoned").get(&alpha.to_bits()) {
            return t.clone();
        }
        let table = Arc::new(Self::build(alpha));
        cache
            .lock()
            .expect("stable cache poisoned")
            .entry(alpha.to_bits())
            .or_insert(table)
            .clone()
    }

    fn build(alpha: f64) -> Self {
        let n = (TABLE_HALF_WIDTH / TABLE_STEP).round() as usize;
        // Two extra nodes on each side keep the interpolation stencil in range.
        let values = (0..=n + 2)
            .into_par_iter()
            .map(|i| invert_cf(alpha, i as f64 * TABLE_STEP))
            .collect();
        Self { alpha, values }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Density of the standard law at `x`.
    pub fn density(&self, x: f64) -> f64 {
        let ax = x.abs();
        if ax >= TABLE_HALF_WIDTH {
            return tail_series(self.alpha, ax);
        }
        let pos = ax / TABLE_STEP;
        let i = pos.floor() as usize;
        let s = pos - i as f64;
        // Four-point Lagrange stencil i-1..=i+2, mirrored through the origin.
        let at = |j: isize| self.values[j.unsigned_abs()];
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let w0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let w1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let w2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let w3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        (w0 * p0 + w1 * p1 + w2 * p2 + w3 * p3).max(0.0)
    }
}

/// `(1/pi) int_0^inf cos(t x) exp(-t^alpha) dt` by adaptive quadrature.
pub fn invert_cf(alpha: f64, x: f64) -> f64 {
    let t_max = (-CF_CUTOFF.ln()).powf(1.0 / alpha);
    let cfg = QuadratureConfig {
        abs_tol: 1e-14,
        rel_tol: 1e-12,
        max_subdivisions: 20_000,
        ..QuadratureConfig::default()
    };
    let integ = Integrator::new(cfg).frequency(x);
    integ
        .real(
            |t| (t * x).cos() * (-t.powf(alpha)).exp(),
            Support::interval(0.0, t_max),
        )
        .map(|r| r.value / PI)
        .unwrap_or(f64::NAN)
}

/// Power series `(1/pi) sum_k (-1)^{k+1} Gamma(k alpha + 1)/k! sin(k pi alpha / 2) x^{-k alpha - 1}`,
/// summed until terms stop decreasing (asymptotic for alpha > 1).
pub fn tail_series(alpha: f64, x: f64) -> f64 {
    let lx = x.ln();
    let mut sum = 0.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        let log_mag = ln_gamma(kf * alpha + 1.0) - ln_gamma(kf + 1.0) - (kf * alpha + 1.0) * lx;
        let mag = log_mag.exp();
        if mag > last {
            break;
        }
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        let term = sign * mag * (kf * PI * alpha / 2.0).sin();
        sum += term;
        if mag < 1e-17 * sum.abs() {
            break;
        }
        last = mag;
    }
    sum / PI
}

/// Leading tail constant `c_alpha` in `f(x) ~ c_alpha |x|^{-alpha-1}`.
pub fn tail_constant(alpha: f64) -> f64 {
    gamma(alpha + 1.0) * (PI * alpha / 2.0).sin() / PI
}
