//! Uniqueness and recovery from weak moments under Gaussian kernels.
//!
//! With `phi(x) = e^{-x^2/2}` the pairings `<T, h_k>` against the Hermite
//! functions `h_k = H_k e^{-x^2/2}` are finite integer combinations of weak
//! moments, `<T, h_k> = sum_j M[k][j] m_j`, where `M` holds the coefficients
//! of the physicists' Hermite polynomials. Totality of the `h_k` makes the
//! moment sequence determine `T`; truncating the expansion gives a
//! reconstruction.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::GeneralizedDistribution;
use crate::error::{Error, Result};
use crate::io::Table;
use crate::kernels::{linear_fit, KernelSpec};
use crate::quadrature::{trapezoid, uniform_grid, Integrator, QuadratureConfig, Support};
use crate::stats::compensated_sum;
use crate::weakcore::{weak_moments, MomentSequence, WeakPair};

pub const MAX_HERMITE_ORDER: usize = 60;
pub const MAX_TABLE_ORDER: usize = 40;
pub const MAX_CARLEMAN_ORDER: usize = 30;

fn check_order(order: usize, max: usize) -> Result<()> {
    if order > max {
        Err(Error::OrderTooLarge { order, max })
    } else {
        Ok(())
    }
}

/// `h_0(x) ... h_n(x)` by the three-term recurrence applied to the functions
/// themselves, `h_{k+1} = 2x h_k - 2k h_{k-1}`, so no polynomial is ever formed.
pub fn hermite_functions(n: usize, x: f64) -> Vec<f64> {
    let mut h = Vec::with_capacity(n + 1);
    h.push((-0.5 * x * x).exp());
    if n >= 1 {
        h.push(2.0 * x * h[0]);
    }
    for k in 1..n {
        h.push(2.0 * x * h[k] - 2.0 * k as f64 * h[k - 1]);
    }
    h
}

pub fn hermite_function(n: usize, x: f64) -> Result<f64> {
    check_order(n, MAX_HERMITE_ORDER)?;
    Ok(hermite_functions(n, x)[n])
}

/// `||h_n||^2 = 2^n n! sqrt(pi)`.
pub fn hermite_norm_sq(n: usize) -> f64 {
    (1..=n).fold(std::f64::consts::PI.sqrt(), |acc, k| acc * 2.0 * k as f64)
}

/// Exact monomial ↔ Hermite change of basis.
///
/// `coeffs[n][k]` is the coefficient of `x^k` in `H_n`; the inverse is
/// `x^n = 2^{-n} sum_k inverse_numerators[n][k] H_k`, with integer numerators
/// `n! / (m! (n-2m)!)` at `k = n - 2m`.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteBasis {
    n_max: usize,
    coeffs: Vec<Vec<BigInt>>,
    inverse_numerators: Vec<Vec<BigInt>>,
}

pub fn monomial_hermite_matrix(n_max: usize) -> Result<HermiteBasis> {
    HermiteBasis::new(n_max)
}

impl HermiteBasis {
    pub fn new(n_max: usize) -> Result<Self> {
        check_order(n_max, MAX_TABLE_ORDER)?;
        let mut coeffs: Vec<Vec<BigInt>> = vec![vec![BigInt::one()]];
        if n_max >= 1 {
            coeffs.push(vec![BigInt::zero(), BigInt::from(2)]);
        }
        for n in 1..n_max {
            let mut next = vec![BigInt::zero(); n + 2];
            for (k, c) in coeffs[n].iter().enumerate() {
                next[k + 1] += c * 2;
            }
            for (k, c) in coeffs[n - 1].iter().enumerate() {
                next[k] -= c * (2 * n);
            }
            coeffs.push(next);
        }
        let factorial = |n: usize| (1..=n).fold(BigInt::one(), |acc, k| acc * k);
        let inverse_numerators = (0..=n_max)
            .map(|n| {
                let mut row = vec![BigInt::zero(); n + 1];
                for m in 0..=n / 2 {
                    row[n - 2 * m] = factorial(n) / (factorial(m) * factorial(n - 2 * m));
                }
                row
            })
            .collect();
        Ok(Self {
            n_max,
            coeffs,
            inverse_numerators,
        })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Coefficient of `x^k` in `H_n` (zero above the diagonal).
    pub fn coefficient(&self, n: usize, k: usize) -> BigInt {
        self.coeffs[n].get(k).cloned().unwrap_or_default()
    }

    /// `(numerator, 2^n)` of the coefficient of `H_k` in `x^n`.
    pub fn inverse_coefficient(&self, n: usize, k: usize) -> (BigInt, BigInt) {
        let num = self.inverse_numerators[n].get(k).cloned().unwrap_or_default();
        (num, BigInt::one() << n)
    }

    /// Exact check that `M M^{-1} = I`.
    pub fn verify_inverse(&self) -> bool {
        (0..=self.n_max).all(|n| {
            (0..=self.n_max).all(|k| {
                // sum_j M[n][j] N[j][k] 2^{-j}, scaled by 2^n
                let mut acc = BigInt::zero();
                for j in k..=n {
                    acc += (self.coefficient(n, j) * &self.inverse_numerators[j].get(k).cloned().unwrap_or_default())
                        << (n - j);
                }
                let want = if n == k { BigInt::one() << n } else { BigInt::zero() };
                acc == want
            })
        })
    }

    /// Floating-point copy of `M` restricted to orders `<= n`.
    pub fn matrix_f64(&self, n: usize) -> Vec<Vec<f64>> {
        (0..=n)
            .map(|i| {
                (0..=i)
                    .map(|k| self.coeffs[i][k].to_f64().unwrap_or(f64::NAN))
                    .collect()
            })
            .collect()
    }

    /// Floating-point copy of `M^{-1}` restricted to orders `<= n`.
    pub fn inverse_f64(&self, n: usize) -> Vec<Vec<f64>> {
        (0..=n)
            .map(|i| {
                let scale = 0.5f64.powi(i as i32);
                (0..=i)
                    .map(|k| self.inverse_numerators[i][k].to_f64().unwrap_or(f64::NAN) * scale)
                    .collect()
            })
            .collect()
    }

    /// `||M||_inf ||M^{-1}||_inf` for orders `<= n`.
    pub fn condition_estimate(&self, n: usize) -> f64 {
        let norm = |m: &[Vec<f64>]| {
            m.iter()
                .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
                .fold(0.0, f64::max)
        };
        norm(&self.matrix_f64(n)) * norm(&self.inverse_f64(n))
    }

    /// `<T, h_k>` for `k <= n` from standardised weak moments.
    pub fn pairings(&self, moments: &[f64], n: usize) -> Vec<f64> {
        let m = self.matrix_f64(n);
        (0..=n)
            .map(|k| compensated_sum((0..=k).map(|j| m[k][j] * moments[j])))
            .collect()
    }

    /// Moments implied by the pairings: `m_j = sum_k M^{-1}[j][k] <T, h_k>`.
    pub fn moments_from_pairings(&self, pairings: &[f64], n: usize) -> Vec<f64> {
        let inv = self.inverse_f64(n);
        (0..=n)
            .map(|j| compensated_sum((0..=j).map(|k| inv[j][k] * pairings[k])))
            .collect()
    }
}

/// Truncated Hermite reconstruction from weak moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    /// `<T, h_k>` in the standardised coordinate `u = s (x - centre)`.
    pub hermite_coeffs: Vec<f64>,
    /// `s = sqrt(2a)` of the kernel `c exp(-a (x - centre)^2)`.
    pub scale: f64,
    pub centre: f64,
    pub l2_error: Option<f64>,
    pub condition_estimate: f64,
    /// Relative max-norm mismatch after mapping the pairings back to moments.
    pub residual: f64,
}

impl RecoveryResult {
    /// Truncated expansion `f_N(x) = s sum_k <T,h_k>/||h_k||^2 h_k(s (x - centre))`.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.hermite_coeffs.len() - 1;
        let h = hermite_functions(n, self.scale * (x - self.centre));
        let terms = (0..=n).map(|k| self.hermite_coeffs[k] / hermite_norm_sq(k) * h[k]);
        self.scale * compensated_sum(terms)
    }

    /// Grid L² distance to `truth` on `[lower, upper]` (trapezoid rule).
    pub fn l2_distance<F: Fn(f64) -> f64 + Sync>(&self, truth: F, lower: f64, upper: f64, step: f64) -> f64 {
        let xs = uniform_grid(lower, upper, step);
        let sq: Vec<f64> = xs.par_iter().map(|&x| (self.eval(x) - truth(x)).powi(2)).collect();
        trapezoid(&sq, step).sqrt()
    }

    /// Records the L² error on `[-10, 10]` with step `1e-3`.
    pub fn with_truth<F: Fn(f64) -> f64 + Sync>(mut self, truth: F) -> Self {
        self.l2_error = Some(self.l2_distance(truth, -10.0, 10.0, 1e-3));
        self
    }

    pub fn coefficient_table(&self) -> Table {
        let mut t = Table::new(["k", "pairing", "expansion_coefficient"]);
        for (k, c) in self.hermite_coeffs.iter().enumerate() {
            t.push(vec![k.into(), (*c).into(), (c / hermite_norm_sq(k)).into()]);
        }
        t
    }

    pub fn grid_table<F: Fn(f64) -> f64>(&self, lower: f64, upper: f64, step: f64, truth: Option<F>) -> Table {
        let mut t = Table::new(["x", "f_recovered", "f_true"]);
        for x in uniform_grid(lower, upper, step) {
            let f = truth.as_ref().map_or(f64::NAN, |g| g(x));
            t.push(vec![x.into(), self.eval(x).into(), f.into()]);
        }
        t
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Recovers `T` from Gaussian-kernel weak moments `m_0 ... m_N`. A kernel
/// `c exp(-a (x - x0)^2)` is first reduced to `exp(-u^2/2)` with
/// `u = sqrt(2a)(x - x0)`.
pub fn recover_from_weak_moments(moments: &MomentSequence, n: usize) -> Result<RecoveryResult> {
    check_order(n, MAX_TABLE_ORDER)?;
    let kernel = moments.kernel.ok_or(Error::KernelNotGaussian)?;
    let (a, c) = kernel.gaussian_parameters().ok_or(Error::KernelNotGaussian)?;
    if moments.values.len() <= n {
        return Err(Error::InvalidConfig(format!(
            "recovery to order {n} needs {} moments, have {}",
            n + 1,
            moments.values.len()
        )));
    }
    let s = (2.0 * a).sqrt();
    let x0 = kernel.centre();
    // standardised moments  int u^j e^{-u^2/2} dT(u) = s^j / c * sum_i C(j,i) m_i (-x0)^{j-i}
    let standard: Vec<f64> = (0..=n)
        .map(|j| {
            let central =
                compensated_sum((0..=j).map(|i| binomial(j, i) * moments.values[i] * (-x0).powi((j - i) as i32)));
            s.powi(j as i32) * central / c
        })
        .collect();
    let basis = HermiteBasis::new(n)?;
    let pairings = basis.pairings(&standard, n);
    let back = basis.moments_from_pairings(&pairings, n);
    let scale = standard
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let residual = back
        .iter()
        .zip(&standard)
        .map(|(b, m)| (b - m).abs())
        .fold(0.0, f64::max)
        / scale;
    Ok(RecoveryResult {
        hermite_coeffs: pairings,
        scale: s,
        centre: x0,
        l2_error: None,
        condition_estimate: basis.condition_estimate(n),
        residual,
    })
}

/// Symmetric positive definite 2×2 matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spd2(pub [[f64; 2]; 2]);

impl Spd2 {
    pub fn identity() -> Self {
        Spd2([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn new(m: [[f64; 2]; 2]) -> Result<Self> {
        let sym = (m[0][1] - m[1][0]).abs() <= 1e-14 * (m[0][1].abs() + m[1][0].abs() + 1.0);
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if !sym || !(m[0][0] > 0.0) || !(det > 0.0) || m.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NotSpd);
        }
        Ok(Spd2(m))
    }

    pub fn det(&self) -> f64 {
        let m = self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    /// Symmetric square root `L` with `L L = A`.
    pub fn sqrt(&self) -> [[f64; 2]; 2] {
        let m = self.0;
        let sd = self.det().sqrt();
        let t = (m[0][0] + m[1][1] + 2.0 * sd).sqrt();
        [[(m[0][0] + sd) / t, m[0][1] / t], [m[1][0] / t, (m[1][1] + sd) / t]]
    }

    pub fn quadratic(&self, x: f64, y: f64) -> f64 {
        let m = self.0;
        m[0][0] * x * x + 2.0 * m[0][1] * x * y + m[1][1] * y * y
    }
}

/// Weak moments `m_{ij} = <T, x^i y^j exp(-z^T A z / 2)>`, `i + j <= N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments2d {
    pub n_max: usize,
    pub a: Spd2,
    /// `values[i][j]`, defined for `i + j <= n_max`.
    pub values: Vec<Vec<f64>>,
}

impl Moments2d {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }
}

/// Product density `f_1(x) f_2(y)` paired with `exp(-z^T A z / 2)`.
#[derive(Debug, Clone)]
pub struct ProductDensity2d {
    pub first: GeneralizedDistribution,
    pub second: GeneralizedDistribution,
}

impl ProductDensity2d {
    pub fn new(first: GeneralizedDistribution, second: GeneralizedDistribution) -> Result<Self> {
        if first.has_atoms() || second.has_atoms() {
            return Err(Error::NotADensity("2-D recovery needs product densities".into()));
        }
        Ok(Self { first, second })
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        self.first.density_at(x).unwrap_or(f64::NAN) * self.second.density_at(y).unwrap_or(f64::NAN)
    }

    /// `int int g(x, y) f_1(x) f_2(y) exp(-z^T A z / 2) dx dy` by nested
    /// adaptive quadrature; the inner window follows the conditional
    /// Gaussian in `y` given `x`.
    pub fn pair<G: Fn(f64, f64) -> f64 + Sync>(&self, a: &Spd2, g: G, cfg: &QuadratureConfig) -> Result<f64> {
        let m = a.0;
        let outer_kernel = KernelSpec::gaussian(0.5 * a.det() / m[1][1], 1.0)?;
        let failure = std::sync::Mutex::new(None);
        let inner = |x: f64| {
            let centre = -m[0][1] * x / m[1][1];
            let witness = KernelSpec::gaussian(0.5 * m[1][1], 1.0).map(|k| k.shifted(centre));
            let run = witness.and_then(|w| {
                Integrator::new(*cfg)
                    .breakpoints(&[centre, 0.0])
                    .real(
                        |y| g(x, y) * (-0.5 * a.quadratic(x, y)).exp() * self.second.density_at(y).unwrap_or(0.0),
                        Support::witnessed(&w, cfg),
                    )
                    .map(|r| r.value)
            });
            match run {
                Ok(v) => v * self.first.density_at(x).unwrap_or(0.0),
                Err(e) => {
                    failure.lock().expect("poisoned").get_or_insert(e);
                    0.0
                }
            }
        };
        let v = Integrator::new(*cfg)
            .breakpoints(&[0.0])
            .real(inner, Support::witnessed(&outer_kernel, cfg))?
            .value;
        match failure.into_inner().expect("poisoned") {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// All weak moments with `i + j <= n_max`, computed in parallel over
    /// multi-indices and assembled in index order.
    pub fn weak_moments(&self, a: &Spd2, n_max: usize, cfg: &QuadratureConfig) -> Result<Moments2d> {
        check_order(n_max, MAX_TABLE_ORDER)?;
        let indices: Vec<(usize, usize)> = (0..=n_max).flat_map(|i| (0..=n_max - i).map(move |j| (i, j))).collect();
        let vals = indices
            .par_iter()
            .map(|&(i, j)| self.pair(a, |x, y| x.powi(i as i32) * y.powi(j as i32), cfg))
            .collect::<Result<Vec<_>>>()?;
        let mut values = vec![Vec::new(); n_max + 1];
        for (&(i, _), v) in indices.iter().zip(vals) {
            values[i].push(v);
        }
        Ok(Moments2d { n_max, a: *a, values })
    }
}

/// 2-D polynomial as `coeffs[i][j]` of `x^i y^j`.
type Poly2 = Vec<Vec<f64>>;

fn poly_mul(p: &Poly2, q: &Poly2, n: usize) -> Poly2 {
    let mut out = vec![vec![0.0; n + 1]; n + 1];
    for (i, row) in p.iter().enumerate() {
        for (j, &a) in row.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for (k, qrow) in q.iter().enumerate() {
                for (l, &b) in qrow.iter().enumerate() {
                    if i + k + j + l <= n {
                        out[i + k][j + l] += a * b;
                    }
                }
            }
        }
    }
    out
}

/// `H_k(l_1 x + l_2 y)` as a polynomial in `(x, y)`.
fn hermite_of_linear(basis: &HermiteBasis, k: usize, l: [f64; 2], n: usize) -> Poly2 {
    let m = basis.matrix_f64(k);
    let mut lin = vec![vec![0.0; n + 1]; n + 1];
    lin[1][0] = l[0];
    lin[0][1] = l[1];
    let mut power = vec![vec![0.0; n + 1]; n + 1];
    power[0][0] = 1.0;
    let mut out = vec![vec![0.0; n + 1]; n + 1];
    for p in 0..=k {
        let c = m[k][p];
        for i in 0..=n {
            for j in 0..=n {
                out[i][j] += c * power[i][j];
            }
        }
        if p < k {
            power = poly_mul(&power, &lin, n);
        }
    }
    out
}

/// 2-D recovery in the coordinates `w = L z`, `L = A^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult2d {
    pub n_max: usize,
    /// `coeffs[i][j] = <T, h_{(i,j)} o L>`, `i + j <= n_max`.
    pub coeffs: Vec<Vec<f64>>,
    pub l: [[f64; 2]; 2],
    pub l2_error: Option<f64>,
    pub condition_estimate: f64,
}

impl RecoveryResult2d {
    /// `f_N(z) = det L * sum_alpha c_alpha h_alpha(L z) / ||h_alpha||^2`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let l = self.l;
        let w1 = l[0][0] * x + l[0][1] * y;
        let w2 = l[1][0] * x + l[1][1] * y;
        let h1 = hermite_functions(self.n_max, w1);
        let h2 = hermite_functions(self.n_max, w2);
        let det = l[0][0] * l[1][1] - l[0][1] * l[1][0];
        let terms = self.coeffs.iter().enumerate().flat_map(|(i, row)| {
            let (h1, h2) = (&h1, &h2);
            row.iter()
                .enumerate()
                .map(move |(j, c)| c / (hermite_norm_sq(i) * hermite_norm_sq(j)) * h1[i] * h2[j])
        });
        det * compensated_sum(terms)
    }

    /// L² distance to `truth` over `[lo, hi]^2` by the 2-D trapezoid rule.
    pub fn l2_distance<F: Fn(f64, f64) -> f64 + Sync>(&self, truth: F, lo: f64, hi: f64, step: f64) -> f64 {
        let xs = uniform_grid(lo, hi, step);
        let rows: Vec<f64> = xs
            .par_iter()
            .map(|&x| {
                let vals: Vec<f64> = xs.iter().map(|&y| (self.eval(x, y) - truth(x, y)).powi(2)).collect();
                trapezoid(&vals, step)
            })
            .collect();
        trapezoid(&rows, step).sqrt()
    }

    pub fn coefficient_table(&self) -> Table {
        let mut t = Table::new(["i", "j", "pairing"]);
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                t.push(vec![i.into(), j.into(), (*c).into()]);
            }
        }
        t
    }
}

/// Pairings `<T, h_alpha o L>` for `|alpha| <= N` from the 2-D weak moments,
/// expanding each `H_{a_1}((Lz)_1) H_{a_2}((Lz)_2)` into monomials.
pub fn recover_2d(moments: &Moments2d, n: usize) -> Result<RecoveryResult2d> {
    check_order(n, moments.n_max)?;
    let l = moments.a.sqrt();
    let basis = HermiteBasis::new(n)?;
    let polys1: Vec<Poly2> = (0..=n).map(|k| hermite_of_linear(&basis, k, l[0], n)).collect();
    let polys2: Vec<Poly2> = (0..=n).map(|k| hermite_of_linear(&basis, k, l[1], n)).collect();
    let coeffs = (0..=n)
        .map(|i| {
            (0..=n - i)
                .map(|j| {
                    let p = poly_mul(&polys1[i], &polys2[j], n);
                    compensated_sum(
                        p.iter()
                            .enumerate()
                            .flat_map(|(a, row)| row.iter().enumerate().map(move |(b, c)| (a, b, *c)))
                            .filter(|&(a, b, c)| c != 0.0 && a + b <= n)
                            .map(|(a, b, c)| c * moments.get(a, b)),
                    )
                })
                .collect()
        })
        .collect();
    let cond = basis.condition_estimate(n);
    Ok(RecoveryResult2d {
        n_max: n,
        coeffs,
        l,
        l2_error: None,
        condition_estimate: cond * cond,
    })
}

/// Carleman diagnostic for the kernel's own moment sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarlemanResult {
    /// `mu_{2n}`, `n = 1..=N`.
    pub even_moments: Vec<f64>,
    /// `mu_{2n}^{-1/(2n)}`.
    pub terms: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// Log-log slope of the terms against `n` over `n >= 5` (all `n` when `N < 6`).
    pub fitted_exponent: f64,
}

impl CarlemanResult {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["n", "mu_2n", "term", "partial_sum"]);
        for i in 0..self.terms.len() {
            t.push(vec![
                (i + 1).into(),
                self.even_moments[i].into(),
                self.terms[i].into(),
                self.partial_sums[i].into(),
            ]);
        }
        t
    }
}

pub fn carleman_partial_sums(kernel: &KernelSpec, n: usize, cfg: &QuadratureConfig) -> Result<CarlemanResult> {
    kernel.require_positive()?;
    check_order(n, MAX_CARLEMAN_ORDER)?;
    if n == 0 {
        return Err(Error::InvalidConfig("Carleman sums need N >= 1".into()));
    }
    let integ = Integrator::new(*cfg).breakpoints(&[kernel.centre(), 0.0]);
    let even_moments = (1..=n)
        .into_par_iter()
        .map(|k| {
            integ
                .real(
                    |x| x.powi(2 * k as i32) * kernel.eval(x),
                    Support::witnessed(kernel, cfg),
                )
                .map(|r| r.value)
        })
        .collect::<Result<Vec<_>>>()?;
    let terms: Vec<f64> = even_moments
        .iter()
        .enumerate()
        .map(|(i, mu)| mu.powf(-1.0 / (2.0 * (i + 1) as f64)))
        .collect();
    let partial_sums = terms
        .iter()
        .scan(0.0, |acc, t| {
            *acc += t;
            Some(*acc)
        })
        .collect();
    let start = if n >= 6 { 4 } else { 0 };
    let lx: Vec<f64> = (start + 1..=n).map(|k| (k as f64).ln()).collect();
    let ly: Vec<f64> = terms[start..].iter().map(|t| t.ln()).collect();
    let fitted_exponent = if lx.len() >= 2 {
        linear_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    Ok(CarlemanResult {
        even_moments,
        terms,
        partial_sums,
        fitted_exponent,
    })
}

/// Weak moments of `delta_{x0}` under `(x - x0)^2 exp(-(x - x0)^2/2)`: all
/// exactly zero, so no moment-based procedure can see an atom at `x0`.
pub fn kernel_zero_obstruction(x0: f64, n_max: usize) -> Result<MomentSequence> {
    let kernel = KernelSpec::zero_at_origin(1.0)?.shifted(x0);
    let pair = WeakPair::new(GeneralizedDistribution::dirac(x0)?, kernel);
    weak_moments(&pair, n_max)
}

/// `sup_n |a_n - b_n|` over the common orders.
pub fn sequence_distance(a: &MomentSequence, b: &MomentSequence) -> f64 {
    a.values
        .iter()
        .zip(&b.values)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
