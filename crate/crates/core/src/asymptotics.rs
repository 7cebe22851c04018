//! Weak central limit theorem: the normalised-sum weak CF in transform space,
//! its O(1/sqrt n) rate with an explicit third-derivative bound, and the
//! bridge to ordinary convergence in distribution through the kernel-weighted
//! density `h = phi f / Z`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StudentT};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Table;
use crate::kernels::linear_fit;
use crate::quadrature::{DecayWitness, Integrator, Support};
use crate::special::normal_cdf;
use crate::stats::ks_statistic;
use crate::weakcore::{centred_cgf_at, complex_log1p, symmetric_grid, weak_cf_increment, weak_cumulants, WeakPair};

pub const DEFAULT_T_MAX: f64 = 3.0;
pub const DEFAULT_T_POINTS: usize = 121;
/// Step in `u` for the finite-difference third derivative of the CGF.
pub const CGF_FD_STEP: f64 = 1e-3;
/// Path step when continuing the CGF away from 0.
const CGF_PATH_STEP: f64 = 0.05;
/// Draws per RNG stream; streams are keyed by `(seed, chunk)`.
const CHUNK: usize = 4096;

/// `Z_n = (S_n - n kappa_1) / sqrt(n kappa_2)` for i.i.d. copies of a pair.
#[derive(Debug, Clone)]
pub struct NormalisedSum {
    pair: WeakPair,
    pub kappa1: f64,
    pub kappa2: f64,
}

impl NormalisedSum {
    /// Cumulants are those of `T / <T, phi>`, so any pair with positive mass
    /// is accepted and behaves as its normalisation.
    pub fn new(pair: &WeakPair) -> Result<Self> {
        let k = weak_cumulants(pair, 2)?;
        let (kappa1, kappa2) = (k.kappa(1), k.kappa(2));
        if !(kappa2 > 0.0) {
            return Err(Error::NonPositiveVariance(kappa2));
        }
        Ok(Self {
            pair: pair.clone(),
            kappa1,
            kappa2,
        })
    }

    pub fn pair(&self) -> &WeakPair {
        &self.pair
    }

    /// Branch-continuous `log phi_{Z_n}(t) = -i t n k1 / sqrt(n k2) + n K(t / sqrt(n k2))`.
    pub fn log_cf(&self, n: u64, t: f64) -> Result<Complex64> {
        if n == 0 {
            return Err(Error::ParameterOutOfDomain("n must be >= 1".into()));
        }
        let nf = n as f64;
        let s = (nf * self.kappa2).sqrt();
        let k = centred_cgf_at(&self.pair, t / s, CGF_PATH_STEP)?;
        Ok(Complex64::new(0.0, -t * nf * self.kappa1 / s) + k * nf)
    }

    pub fn cf(&self, n: u64, t: f64) -> Result<Complex64> {
        Ok(self.log_cf(n, t)?.exp())
    }

    /// `sup_t |phi_{Z_n}(t) - e^{-t^2/2}|` and `sup_t |log phi_{Z_n}(t) + t^2/2|`
    /// over the given grid.
    pub fn sup_errors(&self, n: u64, t_grid: &[f64]) -> Result<(f64, f64)> {
        let errs = t_grid
            .par_iter()
            .map(|&t| {
                let l = self.log_cf(n, t)?;
                let g = -0.5 * t * t;
                Ok(((l.exp() - g.exp()).norm(), (l - g).norm()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(errs
            .iter()
            .fold((0.0_f64, 0.0_f64), |(a, b), (x, y)| (a.max(*x), b.max(*y))))
    }
}

pub fn normalized_sum_cf(p: &WeakPair, n: u64, t: f64) -> Result<Complex64> {
    NormalisedSum::new(p)?.cf(n, t)
}

pub fn clt_sup_error(p: &WeakPair, n: u64, t_max: f64, n_points: usize) -> Result<f64> {
    let grid = symmetric_grid(t_max, n_points)?;
    Ok(NormalisedSum::new(p)?.sup_errors(n, &grid)?.0)
}

/// `K'''(u)` of the centred CGF by the 4th-order central stencil with step `h`.
/// The stencil weights sum to zero, so a common branch offset of the seven
/// logarithms cancels; only their local continuity matters.
pub fn cgf_third_derivative(p: &WeakPair, u: f64, h: f64) -> Result<Complex64> {
    const W: [f64; 7] = [1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0];
    let mass = p.mass()?;
    let mut logs = [Complex64::new(0.0, 0.0); 7];
    for (j, l) in logs.iter_mut().enumerate() {
        if W[j] == 0.0 {
            continue;
        }
        let s = u + (j as f64 - 3.0) * h;
        let d = weak_cf_increment(p, s)?;
        let modulus = (d + mass).norm();
        if modulus <= crate::weakcore::CF_ZERO_THRESHOLD {
            return Err(Error::ZeroCrossing { t: s, modulus });
        }
        *l = complex_log1p(d / mass);
    }
    let centre = logs[2].im;
    let sum = logs.iter().zip(W).fold(Complex64::new(0.0, 0.0), |acc, (l, w)| {
        let im = l.im + 2.0 * std::f64::consts::PI * ((centre - l.im) / (2.0 * std::f64::consts::PI)).round();
        acc + Complex64::new(l.re, im) * w
    });
    Ok(sum / (8.0 * h * h * h))
}

/// Explicit constant of the weak Berry–Esseen inequality
/// `|log phi_{Z_n}(t) + t^2/2| <= M_T T^3 / (6 kappa_2^{3/2} sqrt n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerryEsseenBound {
    pub t_max: f64,
    pub kappa2: f64,
    /// `sup |K'''(u)|` over `|u| <= T / sqrt(kappa_2)`.
    pub m_t: f64,
    pub argmax: f64,
    pub u_grid: Vec<f64>,
    pub third_derivative: Vec<f64>,
}

impl BerryEsseenBound {
    pub fn bound(&self, n: u64) -> f64 {
        self.m_t * self.t_max.powi(3) / (6.0 * self.kappa2.powf(1.5) * (n as f64).sqrt())
    }
}

/// `M_T` by scanning `|K'''|` on `u in [0, T/sqrt(kappa_2)]` (`|cf|` is even
/// in `u` for real `T`, so the negative half adds nothing).
pub fn berry_esseen_bound(p: &WeakPair, t_max: f64) -> Result<BerryEsseenBound> {
    berry_esseen_bound_on(p, t_max, 201)
}

pub fn berry_esseen_bound_on(p: &WeakPair, t_max: f64, n_points: usize) -> Result<BerryEsseenBound> {
    if !(t_max > 0.0) || n_points < 2 {
        return Err(Error::InvalidGrid("need T_max > 0 and at least two points".into()));
    }
    let sum = NormalisedSum::new(p)?;
    let u_max = t_max / sum.kappa2.sqrt();
    let u_grid: Vec<f64> = (0..n_points)
        .map(|k| u_max * k as f64 / (n_points - 1) as f64)
        .collect();
    let third_derivative = u_grid
        .par_iter()
        .map(|&u| cgf_third_derivative(p, u, CGF_FD_STEP).map(|v| v.norm()))
        .collect::<Result<Vec<_>>>()?;
    let (i, m_t) = third_derivative
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bi, bv), (i, &v)| if v > bv { (i, v) } else { (bi, bv) });
    Ok(BerryEsseenBound {
        t_max,
        kappa2: sum.kappa2,
        m_t,
        argmax: u_grid[i],
        u_grid,
        third_derivative,
    })
}

/// Transform-space CLT experiment over several `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CltRun {
    pub kappa1: f64,
    pub kappa2: f64,
    pub n_list: Vec<u64>,
    pub t_grid: Vec<f64>,
    pub sup_errors: Vec<f64>,
    /// `sup_t |log phi_{Z_n}(t) + t^2/2|`.
    pub log_errors: Vec<f64>,
    pub bounds: Vec<f64>,
    pub m_t: f64,
    /// Least-squares slope of `log sup_error` against `log n`.
    pub fitted_slope: f64,
}

impl CltRun {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["n", "sup_error", "log_error", "bound", "fitted_slope"]);
        for i in 0..self.n_list.len() {
            t.push(vec![
                (self.n_list[i] as i64).into(),
                self.sup_errors[i].into(),
                self.log_errors[i].into(),
                self.bounds[i].into(),
                self.fitted_slope.into(),
            ]);
        }
        t
    }

    /// Whether the explicit bound dominates the log-CF error at every `n`.
    pub fn bound_holds(&self) -> bool {
        self.log_errors.iter().zip(&self.bounds).all(|(e, b)| e <= b)
    }
}

pub fn clt_run(p: &WeakPair, n_list: &[u64], t_max: f64, n_points: usize) -> Result<CltRun> {
    let sum = NormalisedSum::new(p)?;
    let t_grid = symmetric_grid(t_max, n_points)?;
    let be = berry_esseen_bound(p, t_max)?;
    let mut sup_errors = Vec::with_capacity(n_list.len());
    let mut log_errors = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let (s, l) = sum.sup_errors(n, &t_grid)?;
        sup_errors.push(s);
        log_errors.push(l);
    }
    let fitted_slope = if n_list.len() >= 2 {
        let lx: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
        let ly: Vec<f64> = sup_errors.iter().map(|e| e.ln()).collect();
        linear_fit(&lx, &ly).0
    } else {
        f64::NAN
    };
    Ok(CltRun {
        kappa1: sum.kappa1,
        kappa2: sum.kappa2,
        n_list: n_list.to_vec(),
        bounds: n_list.iter().map(|&n| be.bound(n)).collect(),
        t_grid,
        sup_errors,
        log_errors,
        m_t: be.m_t,
        fitted_slope,
    })
}

fn t3_pdf(x: f64) -> f64 {
    let q = 1.0 + x * x / 3.0;
    2.0 / (std::f64::consts::PI * 3f64.sqrt() * q * q)
}

/// `h = phi f / Z` for a density pair, with its first two moments and a
/// rejection envelope over a scaled Student-t(3) proposal.
#[derive(Debug, Clone)]
pub struct WeightedDensity {
    pair: WeakPair,
    pub z: f64,
    pub mean: f64,
    pub variance: f64,
    /// Weak cumulants of the normalised pair, computed independently.
    pub kappa1: f64,
    pub kappa2: f64,
    pub proposal_location: f64,
    pub proposal_scale: f64,
    /// `sup h / q`.
    pub envelope: f64,
}

pub fn weighted_density(p: &WeakPair) -> Result<WeightedDensity> {
    WeightedDensity::new(p)
}

impl WeightedDensity {
    pub fn new(p: &WeakPair) -> Result<Self> {
        let dist = p.dist();
        if dist.has_atoms() || dist.is_signed() {
            return Err(Error::NotADensity(
                "weighted density needs a nonnegative density".into(),
            ));
        }
        p.kernel().require_positive()?;
        let z = p.mass()?;
        if !(z > 0.0) {
            return Err(Error::ZeroNormalisation(z));
        }
        let mut h = Self {
            pair: p.clone(),
            z,
            mean: 0.0,
            variance: 1.0,
            kappa1: 0.0,
            kappa2: 0.0,
            proposal_location: 0.0,
            proposal_scale: 1.0,
            envelope: f64::NAN,
        };
        h.mean = h.integrate(|x| x)?;
        let mean = h.mean;
        h.variance = h.integrate(|x| (x - mean) * (x - mean))?;
        let k = weak_cumulants(p, 2)?;
        h.kappa1 = k.kappa(1);
        h.kappa2 = k.kappa(2);
        h.proposal_location = h.mean;
        h.proposal_scale = 3.0 * h.variance.sqrt();
        h.envelope = h.find_envelope()?;
        Ok(h)
    }

    pub fn pair(&self) -> &WeakPair {
        &self.pair
    }

    pub fn sd(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.pair.kernel().eval(x) * self.pair.dist().density_at(x).unwrap_or(0.0) / self.z
    }

    fn integrator(&self) -> Integrator {
        let mut bp = self.pair.dist().landmarks();
        bp.push(self.pair.kernel().centre());
        Integrator::new(*self.pair.quadrature()).breakpoints(&bp)
    }

    fn support(&self) -> Support {
        Support::witnessed(self.pair.kernel(), self.pair.quadrature())
    }

    /// `int g h` by direct quadrature of the normalised density.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        Ok(self.integrator().real(|x| g(x) * self.eval(x), self.support())?.value)
    }

    /// `P(a < Y <= b)`.
    pub fn probability(&self, a: f64, b: f64) -> Result<f64> {
        let (lo, hi) = self.pair.kernel().window(self.pair.quadrature().tail_cut_threshold);
        let (a, b) = (a.max(lo), b.min(hi));
        if a >= b {
            return Ok(0.0);
        }
        Ok(self.integrator().real(|x| self.eval(x), Support::interval(a, b))?.value)
    }

    /// Classical characteristic function of `h`.
    pub fn cf(&self, t: f64) -> Result<Complex64> {
        Ok(self
            .integrator()
            .frequency(t)
            .complex(|x| Complex64::cis(t * x) * self.eval(x), self.support())?
            .value)
    }

    fn proposal_pdf(&self, x: f64) -> f64 {
        t3_pdf((x - self.proposal_location) / self.proposal_scale) / self.proposal_scale
    }

    fn ratio(&self, x: f64) -> f64 {
        self.eval(x) / self.proposal_pdf(x)
    }

    /// Grid scan of `h/q` over the kernel window, then golden-section
    /// refinement around the best cell and a 1% safety margin.
    fn find_envelope(&self) -> Result<f64> {
        let (lo, hi) = self.pair.kernel().window(self.pair.quadrature().tail_cut_threshold);
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::EnvelopeSearchFailed(format!("kernel window [{lo}, {hi}]")));
        }
        let n = 20_000;
        let step = (hi - lo) / n as f64;
        let (ib, _) =
            (0..=n)
                .map(|i| (i, self.ratio(lo + step * i as f64)))
                .fold(
                    (0, f64::NEG_INFINITY),
                    |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) },
                );
        let (mut a, mut b) = (lo + step * (ib as f64 - 1.0), lo + step * (ib as f64 + 1.0));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if self.ratio(c) > self.ratio(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let best = self.ratio(0.5 * (a + b)).max(self.ratio(lo + step * ib as f64));
        if !(best.is_finite() && best > 0.0) {
            return Err(Error::EnvelopeSearchFailed(format!("sup h/q = {best}")));
        }
        Ok(1.01 * best)
    }

    fn draw<R: Rng + ?Sized>(&self, t3: &StudentT<f64>, rng: &mut R, proposals: &mut u64) -> f64 {
        loop {
            *proposals += 1;
            let y = self.proposal_location + self.proposal_scale * t3.sample(rng);
            let u: f64 = rng.gen();
            if u * self.envelope * self.proposal_pdf(y) <= self.eval(y) {
                return y;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    pub values: Vec<f64>,
    pub acceptance_rate: f64,
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// `n` draws from `h` by rejection; chunks of draws use independent streams
/// keyed by `(seed, chunk)`, so output does not depend on the thread count.
pub fn sample_weighted(h: &WeightedDensity, n: usize, seed: u64) -> Result<WeightedSample> {
    let t3 = StudentT::new(3.0).map_err(|e| Error::EnvelopeSearchFailed(e.to_string()))?;
    let chunks: Vec<(Vec<f64>, u64)> = (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = chunk_rng(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            let mut proposals = 0;
            let v = (0..len).map(|_| h.draw(&t3, &mut rng, &mut proposals)).collect();
            (v, proposals)
        })
        .collect();
    let proposals: u64 = chunks.iter().map(|c| c.1).sum();
    let values: Vec<f64> = chunks.into_iter().flat_map(|c| c.0).collect();
    Ok(WeightedSample {
        acceptance_rate: values.len() as f64 / proposals.max(1) as f64,
        values,
    })
}

/// Standardised sums `(sum Y_i - n kappa_1) / sqrt(n kappa_2)` for `reps`
/// replications; replication `r` draws from stream `(seed, r)`.
pub fn standardised_sums(h: &WeightedDensity, n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    if n == 0 || reps == 0 {
        return Err(Error::EmptySample);
    }
    let t3 = StudentT::new(3.0).map_err(|e| Error::EnvelopeSearchFailed(e.to_string()))?;
    let scale = (n as f64 * h.kappa2).sqrt();
    Ok((0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = chunk_rng(seed, r as u64);
            let mut proposals = 0;
            let s: f64 = (0..n).map(|_| h.draw(&t3, &mut rng, &mut proposals)).sum();
            (s - n as f64 * h.kappa1) / scale
        })
        .collect())
}

pub fn distributional_clt_ks(h: &WeightedDensity, n: usize, reps: usize, seed: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::ParameterOutOfDomain(format!("n must be >= 2, got {n}")));
    }
    let z = standardised_sums(h, n, reps, seed)?;
    ks_statistic(&z, normal_cdf)
}
