//! Location estimation for the Cauchy model by matching the empirical weak
//! first moment under `phi_sigma(x) = exp(-x^2 / (2 sigma^2))`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use roots::{find_root_brent, Convergency, SearchError};
use serde::{Deserialize, Serialize};

use crate::distributions::{sample, Density, DensityFamily, GeneralizedDistribution};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::kernels::KernelSpec;
use crate::quadrature::QuadratureConfig;
use crate::stats::{anderson_darling_normality, compensated_sum, mean, std_dev};
use crate::weakcore::{weak_moment, WeakPair};

/// Smallest derivative of `m_1` counted as strictly increasing.
pub const MONOTONE_SLOPE: f64 = 1e-6;
/// Root tolerance in `mu`.
pub const ROOT_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-4;
const SCAN_STEP: f64 = 0.01;

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfDomain(format!(
            "sigma must be positive, got {sigma}"
        )))
    }
}

/// `phi_sigma` as a kernel spec: Gaussian with `a = 1 / (2 sigma^2)`, `c = 1`.
pub fn location_kernel(sigma: f64) -> Result<KernelSpec> {
    check_sigma(sigma)?;
    KernelSpec::gaussian(0.5 / (sigma * sigma), 1.0)
}

fn m1_with(mu: f64, kernel: KernelSpec, cfg: QuadratureConfig) -> Result<f64> {
    // Cauchy parameters are validated by construction; skip the mass check.
    let d = Density::new_unchecked(DensityFamily::cauchy(mu, 1.0))?;
    weak_moment(
        &WeakPair::new(GeneralizedDistribution::Density(d), kernel).with_quadrature(cfg),
        1,
    )
}

/// `m_1(mu; sigma) = int x phi_sigma(x) f(x; mu) dx` for `f = Cauchy(mu, 1)`.
pub fn theoretical_weak_m1(mu: f64, sigma: f64) -> Result<f64> {
    m1_with(mu, location_kernel(sigma)?, QuadratureConfig::precise())
}

/// `n^{-1} sum X_i phi_sigma(X_i)`; each term is bounded by `sigma e^{-1/2}`.
pub fn empirical_weak_m1(samples: &[f64], sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let s = 0.5 / (sigma * sigma);
    Ok(compensated_sum(samples.iter().map(|x| x * (-s * x * x).exp())) / samples.len() as f64)
}

/// The model `mu -> m_1(mu; sigma)` with its certified monotone interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationModel {
    pub sigma: f64,
    /// Range scanned when certifying monotonicity.
    pub mu_grid: (f64, f64),
    /// Maximal grid interval around 0 where the finite-difference slope
    /// exceeds `MONOTONE_SLOPE`.
    pub monotone_interval: (f64, f64),
    /// `(m_1(lo), m_1(hi))` at the interval ends.
    pub range: (f64, f64),
    #[serde(skip)]
    kernel: Option<KernelSpec>,
}

impl LocationModel {
    pub fn new(sigma: f64) -> Result<Self> {
        Self::with_search(sigma, 20.0 * sigma)
    }

    pub fn with_search(sigma: f64, half_width: f64) -> Result<Self> {
        let kernel = location_kernel(sigma)?;
        let mut model = Self {
            sigma,
            mu_grid: (-half_width, half_width),
            monotone_interval: (0.0, 0.0),
            range: (0.0, 0.0),
            kernel: Some(kernel),
        };
        // m_1 is odd in mu, so the interval is symmetric; scan the right half.
        let steps = (half_width / SCAN_STEP).floor() as usize;
        let slopes = (0..=steps)
            .into_par_iter()
            .map(|k| model.slope(k as f64 * SCAN_STEP))
            .collect::<Result<Vec<_>>>()?;
        let last = slopes.iter().take_while(|s| **s > MONOTONE_SLOPE).count();
        if last == 0 {
            return Err(Error::ParameterOutOfDomain(format!(
                "m_1 is not increasing at 0 for sigma={sigma}"
            )));
        }
        let hi = (last - 1) as f64 * SCAN_STEP;
        model.monotone_interval = (-hi, hi);
        let top = model.m1(hi)?;
        model.range = (-top, top);
        Ok(model)
    }

    fn kernel(&self) -> Result<KernelSpec> {
        self.kernel.map_or_else(|| location_kernel(self.sigma), Ok)
    }

    pub fn m1(&self, mu: f64) -> Result<f64> {
        m1_with(mu, self.kernel()?, QuadratureConfig::precise())
    }

    /// Central difference `(m_1(mu + h) - m_1(mu - h)) / 2h`.
    pub fn slope(&self, mu: f64) -> Result<f64> {
        Ok((self.m1(mu + FD_STEP)? - self.m1(mu - FD_STEP)?) / (2.0 * FD_STEP))
    }

    /// Solves `m_1(mu) = target` on the monotone interval.
    pub fn invert(&self, target: f64) -> Result<f64> {
        let (lo, hi) = self.monotone_interval;
        if !(target >= self.range.0 && target <= self.range.1) {
            return Err(Error::OutOfRange {
                value: target,
                lower: self.range.0,
                upper: self.range.1,
            });
        }
        let failure = std::cell::RefCell::new(None);
        let f = |mu: f64| match self.m1(mu) {
            Ok(v) => v - target,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        let root = find_root_brent(lo, hi, f, &mut StepTolerance(ROOT_TOL));
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        root.map_err(|e| match e {
            SearchError::NoBracketing => Error::NoBracket { lower: lo, upper: hi },
            other => Error::NonConvergence {
                error_estimate: f64::NAN,
                subdivisions: match other {
                    SearchError::NoConvergency => 100,
                    _ => 0,
                },
            },
        })
    }

    pub fn estimate(&self, samples: &[f64]) -> Result<f64> {
        self.invert(empirical_weak_m1(samples, self.sigma)?)
    }
}

/// Brent stops on a bracket narrower than the tolerance (or an exact zero).
struct StepTolerance(f64);

impl Convergency<f64> for StepTolerance {
    fn is_root_found(&mut self, y: f64) -> bool {
        y == 0.0
    }
    fn is_converged(&mut self, x1: f64, x2: f64) -> bool {
        (x1 - x2).abs() < self.0
    }
    fn is_iteration_limit_reached(&mut self, iter: usize) -> bool {
        iter >= 100
    }
}

pub fn estimate_location(samples: &[f64], model: &LocationModel) -> Result<f64> {
    model.estimate(samples)
}

/// Bias and spread of the estimator over seeded replications.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McStudy {
    pub mu_true: f64,
    pub sigma: f64,
    pub n_list: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    pub bias: Vec<f64>,
    pub sd: Vec<f64>,
    pub sd_sqrt_n: Vec<f64>,
    pub failures: Vec<usize>,
    /// Successful estimates per `n`, in replication order.
    pub estimates: Vec<Vec<f64>>,
}

impl McStudy {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["n", "bias", "sd", "sd_sqrt_n", "failures"]);
        for i in 0..self.n_list.len() {
            t.push(vec![
                self.n_list[i].into(),
                self.bias[i].into(),
                self.sd[i].into(),
                self.sd_sqrt_n[i].into(),
                self.failures[i].into(),
            ]);
        }
        t
    }

    /// Anderson–Darling `(A*^2, p)` of the estimates at `n_list[i]`.
    pub fn normality(&self, i: usize) -> Result<(f64, f64)> {
        anderson_darling_normality(&self.estimates[i])
    }
}

/// Replication `r` at list position `i` draws from the stream keyed by
/// `(seed, i, r)`, so results do not depend on scheduling.
pub fn monte_carlo_study(mu_true: f64, sigma: f64, n_list: &[usize], reps: usize, seed: u64) -> Result<McStudy> {
    if reps < 2 {
        return Err(Error::ParameterOutOfDomain(format!(
            "need at least 2 replications, got {reps}"
        )));
    }
    let model = LocationModel::new(sigma)?;
    let (lo, hi) = model.monotone_interval;
    if !(mu_true > lo && mu_true < hi) {
        return Err(Error::OutOfRange {
            value: mu_true,
            lower: lo,
            upper: hi,
        });
    }
    let law = GeneralizedDistribution::Density(Density::new_unchecked(DensityFamily::cauchy(mu_true, 1.0))?);
    let mut study = McStudy {
        mu_true,
        sigma,
        n_list: n_list.to_vec(),
        reps,
        seed,
        bias: vec![],
        sd: vec![],
        sd_sqrt_n: vec![],
        failures: vec![],
        estimates: vec![],
    };
    for (i, &n) in n_list.iter().enumerate() {
        let runs: Vec<Result<f64>> = (0..reps)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((i as u64) << 32) | r as u64);
                let xs = sample(&law, n, &mut rng)?;
                model.estimate(&xs)
            })
            .collect();
        let ok: Vec<f64> = runs.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
        let m = mean(&ok)?;
        let sd = std_dev(&ok)?;
        study.bias.push(m - mu_true);
        study.sd.push(sd);
        study.sd_sqrt_n.push(sd * (n as f64).sqrt());
        study.failures.push(reps - ok.len());
        study.estimates.push(ok);
    }
    Ok(study)
}
