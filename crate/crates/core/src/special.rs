//! Special functions not covered by `statrs`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

pub use statrs::function::erf::{erf, erfc};
pub use statrs::function::gamma::{gamma, ln_gamma};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Exponentially scaled modified Bessel function `e^x K_1(x)` for `x > 0`.
///
/// Small arguments use the logarithmic power series; larger ones the
/// trapezoid rule on `int_0^inf exp(-x (cosh t - 1)) cosh t dt`, which
/// converges geometrically because the integrand is analytic in a strip.
pub fn bessel_k1_scaled(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 2.0 {
        return x.exp() * k1_series(x);
    }
    let h = 0.125;
    let mut sum = 0.5;
    let mut k = 1;
    loop {
        let t = h * k as f64;
        let c = t.cosh();
        let e = -x * (c - 1.0);
        let term = e.exp() * c;
        sum += term;
        if e < -45.0 {
            break;
        }
        k += 1;
    }
    h * sum
}

/// Modified Bessel function of the second kind, order one.
pub fn bessel_k1(x: f64) -> f64 {
    if x <= 2.0 {
        k1_series(x)
    } else {
        bessel_k1_scaled(x) * (-x).exp()
    }
}

fn k1_series(x: f64) -> f64 {
    let q = 0.25 * x * x;
    // I_1(x) and the digamma-weighted companion sum share the same terms.
    let mut term = 1.0; // q^k / (k! (k+1)!)
    let mut psi_k1 = -EULER_GAMMA; // psi(k+1)
    let mut psi_k2 = 1.0 - EULER_GAMMA; // psi(k+2)
    let mut i1_sum = 0.0;
    let mut digamma_sum = 0.0;
    for k in 0..60 {
        i1_sum += term;
        digamma_sum += (psi_k1 + psi_k2) * term;
        let kf = k as f64;
        term *= q / ((kf + 1.0) * (kf + 2.0));
        psi_k1 += 1.0 / (kf + 1.0);
        psi_k2 += 1.0 / (kf + 2.0);
        if term < 1e-18 * i1_sum {
            break;
        }
    }
    let i1 = 0.5 * x * i1_sum;
    1.0 / x + (0.5 * x).ln() * i1 - 0.25 * x * digamma_sum
}
