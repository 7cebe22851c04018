//! Recovering probabilistic content from weak data: the kernel-weighted CDF
//! through mollified indicators, and Tikhonov reconstruction of `f` from
//! `g = phi f`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{Density, DensityFamily, GeneralizedDistribution};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::kernels::KernelSpec;
use crate::quadrature::{trapezoid, uniform_grid, DecayWitness, Integrator, QuadratureConfig, Support};
use crate::special::normal_cdf;
use crate::weakcore::{weak_expectation, WeakPair};

pub const DEFAULT_EPS_SCHEDULE: [f64; 4] = [0.5, 0.25, 0.125, 0.0625];
pub const DEFAULT_LAMBDAS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
pub const GRID_HALF_WIDTH: f64 = 20.0;
pub const GRID_STEP: f64 = 1e-3;

/// `psi_eps(x) = Phi((a - x) / eps)`, a smooth stand-in for `1_{(-inf, a)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MollifiedIndicator {
    pub a: f64,
    pub eps: f64,
}

impl MollifiedIndicator {
    pub fn new(a: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !a.is_finite() {
            return Err(Error::ParameterOutOfDomain(format!(
                "need finite a and eps > 0, got a={a}, eps={eps}"
            )));
        }
        Ok(Self { a, eps })
    }

    pub fn eval(&self, x: f64) -> f64 {
        normal_cdf((self.a - x) / self.eps)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedCdf {
    pub a: f64,
    pub eps: Vec<f64>,
    /// `E[psi_eps]` per schedule entry.
    pub values: Vec<f64>,
    /// `|E[psi_eps] - F_phi(a)|`.
    pub errors: Vec<f64>,
    /// Richardson limit from the last two entries, assuming an `eps^2` error.
    pub limit: f64,
    /// `F_phi(a) = int_{-inf}^a phi dT`, computed directly.
    pub direct: f64,
}

impl WeightedCdf {
    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["eps", "value", "error", "limit", "direct"]);
        for i in 0..self.eps.len() {
            t.push(vec![
                self.eps[i].into(),
                self.values[i].into(),
                self.errors[i].into(),
                self.limit.into(),
                self.direct.into(),
            ]);
        }
        t
    }
}

/// The smoother is symmetric about `a`, so the first-order term cancels and
/// `E[psi_eps] = F_phi(a) + O(eps^2)` for smooth `f phi`.
pub fn weighted_cdf(p: &WeakPair, a: f64, schedule: &[f64]) -> Result<WeightedCdf> {
    if schedule.is_empty() || schedule.windows(2).any(|w| !(w[1] < w[0])) || !(schedule[schedule.len() - 1] > 0.0) {
        return Err(Error::InvalidGrid(
            "eps schedule must be positive and strictly decreasing".into(),
        ));
    }
    let values = schedule
        .iter()
        .map(|&eps| {
            let psi = MollifiedIndicator::new(a, eps)?;
            weak_expectation(p, |x| psi.eval(x))
        })
        .collect::<Result<Vec<_>>>()?;
    let direct = weighted_cdf_direct(p, a)?;
    let limit = match schedule.len() {
        1 => values[0],
        n => {
            let r2 = (schedule[n - 2] / schedule[n - 1]).powi(2);
            (r2 * values[n - 1] - values[n - 2]) / (r2 - 1.0)
        }
    };
    Ok(WeightedCdf {
        a,
        eps: schedule.to_vec(),
        errors: values.iter().map(|v| (v - direct).abs()).collect(),
        values,
        limit,
        direct,
    })
}

/// `F_phi(a)` by quadrature up to the cut point; an atom sitting exactly at
/// `a` counts half, matching the limit of the mollified indicators.
pub fn weighted_cdf_direct(p: &WeakPair, a: f64) -> Result<f64> {
    cdf_part(p.dist(), p.kernel(), p.quadrature(), a)
}

fn cdf_part(dist: &GeneralizedDistribution, kernel: &KernelSpec, cfg: &QuadratureConfig, a: f64) -> Result<f64> {
    match dist {
        GeneralizedDistribution::Density(d) => {
            let (lo, hi) = kernel.window(cfg.tail_cut_threshold);
            let upper = a.min(hi);
            if upper <= lo {
                return Ok(0.0);
            }
            let integ = Integrator::new(*cfg).breakpoints(&[d.family().location(), kernel.centre()]);
            Ok(integ
                .real(|x| kernel.eval(x) * d.eval(x), Support::interval(lo, upper))?
                .value)
        }
        GeneralizedDistribution::Atom { location, weight } => Ok(if *location < a {
            weight * kernel.eval(*location)
        } else if *location == a {
            0.5 * weight * kernel.eval(*location)
        } else {
            0.0
        }),
        GeneralizedDistribution::Mixture(parts) => parts
            .iter()
            .try_fold(0.0, |acc, (w, d)| Ok(acc + w * cdf_part(d, kernel, cfg, a)?)),
    }
}

/// `R_lambda g = phi g / (phi^2 + lambda)`, the minimiser of
/// `||phi u - g||^2 + lambda ||u||^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tikhonov {
    pub kernel: KernelSpec,
    pub lambda: f64,
}

pub fn tikhonov_apply(kernel: &KernelSpec, lambda: f64) -> Result<Tikhonov> {
    Tikhonov::new(*kernel, lambda)
}

impl Tikhonov {
    pub fn new(kernel: KernelSpec, lambda: f64) -> Result<Self> {
        kernel.require_positive()?;
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::NonPositiveLambda(lambda));
        }
        Ok(Self { kernel, lambda })
    }

    /// Multiplier `phi / (phi^2 + lambda)` at `x`.
    pub fn multiplier(&self, x: f64) -> f64 {
        let phi = self.kernel.eval(x);
        phi / (phi * phi + self.lambda)
    }

    pub fn apply(&self, x: f64, g: f64) -> f64 {
        self.multiplier(x) * g
    }

    pub fn apply_fn<'a, G: Fn(f64) -> f64 + 'a>(&'a self, g: G) -> impl Fn(f64) -> f64 + 'a {
        move |x| self.apply(x, g(x))
    }

    /// `1 / (2 sqrt(lambda))`, the bound on the multiplier.
    pub fn norm_bound(&self) -> f64 {
        0.5 / self.lambda.sqrt()
    }

    /// `max |(phi^2 + lambda) u - phi g|` on a grid, with `u = R_lambda g`.
    pub fn normal_equation_residual(&self, xs: &[f64], g: &[f64]) -> f64 {
        xs.iter()
            .zip(g)
            .map(|(&x, &gv)| {
                let phi = self.kernel.eval(x);
                ((phi * phi + self.lambda) * self.apply(x, gv) - phi * gv).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// `sup phi / (phi^2 + lambda)` on a grid, next to `1/(2 sqrt lambda)`.
pub fn operator_norm_check(kernel: &KernelSpec, lambda: f64, xs: &[f64]) -> Result<(f64, f64)> {
    let op = Tikhonov::new(*kernel, lambda)?;
    let sup = xs.par_iter().map(|&x| op.multiplier(x)).reduce(|| 0.0, f64::max);
    Ok((sup, op.norm_bound()))
}

/// Discrete `L^2` norm: square root of the trapezoid rule on `v^2`.
pub fn grid_l2(v: &[f64], step: f64) -> f64 {
    let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
    trapezoid(&sq, step).sqrt()
}

/// Grid data for reconstructing a density `f` from `g = phi f`.
#[derive(Debug, Clone)]
pub struct TikhonovProblem {
    pub kernel: KernelSpec,
    pub step: f64,
    pub xs: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TikhonovResult {
    pub lambda: f64,
    pub delta: f64,
    pub l2_error: f64,
    /// `delta / (2 sqrt lambda) + ||lambda / (phi^2 + lambda) f||`.
    pub bound_value: f64,
    pub bias_term: f64,
    pub noise_term: f64,
    #[serde(skip)]
    pub reconstruction: Vec<f64>,
    #[serde(skip)]
    pub g_noisy: Vec<f64>,
}

impl TikhonovResult {
    /// With `delta = 0` the error equals the bias term exactly, so the
    /// comparison allows for rounding in the two grid norms.
    pub fn bound_holds(&self) -> bool {
        self.l2_error <= self.bound_value * (1.0 + 1e-12)
    }
}

impl TikhonovProblem {
    /// Grid `[-20, 20]`, step `1e-3`.
    pub fn new(kernel: KernelSpec, family: DensityFamily) -> Result<Self> {
        Self::on_grid(kernel, family, GRID_HALF_WIDTH, GRID_STEP)
    }

    pub fn on_grid(kernel: KernelSpec, family: DensityFamily, half_width: f64, step: f64) -> Result<Self> {
        kernel.require_positive()?;
        if !family.is_square_integrable() {
            return Err(Error::NotADensity(format!("{family:?} is not square integrable")));
        }
        let density = Density::new(family)?;
        let xs = uniform_grid(-half_width, half_width, step);
        let f: Vec<f64> = xs.iter().map(|&x| density.eval(x)).collect();
        let g = xs.iter().zip(&f).map(|(&x, fv)| kernel.eval(x) * fv).collect();
        Ok(Self { kernel, step, xs, f, g })
    }

    /// I.i.d. Gaussian grid noise rescaled to discrete `L^2` norm exactly `delta`.
    pub fn noise(&self, delta: f64, seed: u64) -> Vec<f64> {
        if delta == 0.0 {
            return vec![0.0; self.xs.len()];
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw: Vec<f64> = (0..self.xs.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let s = delta / grid_l2(&raw, self.step);
        raw.iter().map(|v| v * s).collect()
    }

    pub fn solve(&self, noise: Option<&[f64]>, lambda: f64) -> Result<TikhonovResult> {
        let op = Tikhonov::new(self.kernel, lambda)?;
        let g_noisy: Vec<f64> = match noise {
            Some(n) if n.len() == self.xs.len() => self.g.iter().zip(n).map(|(g, e)| g + e).collect(),
            Some(n) => {
                return Err(Error::InvalidGrid(format!(
                    "noise has {} points, grid has {}",
                    n.len(),
                    self.xs.len()
                )))
            }
            None => self.g.clone(),
        };
        let delta = noise.map_or(0.0, |n| grid_l2(n, self.step));
        let reconstruction: Vec<f64> = self.xs.iter().zip(&g_noisy).map(|(&x, &g)| op.apply(x, g)).collect();
        let diff: Vec<f64> = reconstruction.iter().zip(&self.f).map(|(r, f)| r - f).collect();
        let bias: Vec<f64> = self
            .xs
            .iter()
            .zip(&self.f)
            .map(|(&x, f)| {
                let phi = self.kernel.eval(x);
                lambda / (phi * phi + lambda) * f
            })
            .collect();
        let bias_term = grid_l2(&bias, self.step);
        let noise_term = delta * op.norm_bound();
        Ok(TikhonovResult {
            lambda,
            delta,
            l2_error: grid_l2(&diff, self.step),
            bound_value: noise_term + bias_term,
            bias_term,
            noise_term,
            reconstruction,
            g_noisy,
        })
    }

    /// Plot table (x, f_true, g, g_noisy, R_lambda g), every `stride`-th point.
    pub fn grid_table(&self, r: &TikhonovResult, stride: usize) -> Table {
        let mut t = Table::new(["x", "f_true", "g", "g_noisy", "reconstruction"]);
        for i in (0..self.xs.len()).step_by(stride.max(1)) {
            t.push(vec![
                self.xs[i].into(),
                self.f[i].into(),
                self.g[i].into(),
                r.g_noisy[i].into(),
                r.reconstruction[i].into(),
            ]);
        }
        t
    }
}

/// Reconstruction from noisy data `g + noise` (noise sampled with `seed`,
/// scaled to `delta`).
pub fn tikhonov_noisy(problem: &TikhonovProblem, delta: f64, lambda: f64, seed: u64) -> Result<TikhonovResult> {
    let noise = problem.noise(delta, seed);
    problem.solve(Some(&noise), lambda)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cauchy_pair() -> WeakPair {
        WeakPair::new(
            GeneralizedDistribution::density(DensityFamily::cauchy(0.0, 1.0)).unwrap(),
            KernelSpec::standard_gaussian(),
        )
    }

    #[test]
    fn mollifier_bounds() {
        let psi = MollifiedIndicator::new(0.5, 0.1).unwrap();
        for x in [-100.0, -1.0, 0.5, 2.0, 100.0] {
            let v = psi.eval(x);
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(psi.eval(0.5), 0.5);
        assert!(MollifiedIndicator::new(0.0, 0.0).is_err());
    }

    #[test]
    fn weighted_cdf_limits() {
        let p = cauchy_pair();
        let m0 = p.mass().unwrap();
        let far = weighted_cdf(&p, 40.0, &DEFAULT_EPS_SCHEDULE).unwrap();
        assert!((far.direct - m0).abs() < 1e-10);
        assert!((far.values[3] - m0).abs() < 1e-10);
        let half = weighted_cdf(&p, 0.0, &DEFAULT_EPS_SCHEDULE).unwrap();
        assert!((half.direct - 0.5 * m0).abs() < 1e-10);
        assert!((half.direct - 0.2615).abs() < 1e-4);
    }

    #[test]
    fn weighted_cdf_converges() {
        let p = cauchy_pair();
        let r = weighted_cdf(&p, 0.7, &DEFAULT_EPS_SCHEDULE).unwrap();
        for w in r.errors.windows(2) {
            assert!(w[1] < w[0], "{:?}", r.errors);
        }
        // second-order error: halving eps quarters it
        let ratio = r.errors[2] / r.errors[3];
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
        assert!((r.limit - r.direct).abs() < 0.05 * r.errors[3]);
    }

    #[test]
    fn weighted_cdf_is_monotone_and_counts_atoms() {
        let p = cauchy_pair();
        let vals: Vec<f64> = (0..41)
            .map(|i| weighted_cdf_direct(&p, -5.0 + 0.25 * i as f64).unwrap())
            .collect();
        for w in vals.windows(2) {
            assert!(w[1] >= w[0]);
        }
        let atom = WeakPair::new(
            GeneralizedDistribution::atom(1.0, 2.0).unwrap(),
            KernelSpec::standard_gaussian(),
        );
        assert_eq!(weighted_cdf_direct(&atom, 0.0).unwrap(), 0.0);
        assert_eq!(weighted_cdf_direct(&atom, 2.0).unwrap(), 2.0 * (-0.5f64).exp());
        assert_eq!(weighted_cdf_direct(&atom, 1.0).unwrap(), (-0.5f64).exp());
    }

    #[test]
    fn tikhonov_pointwise() {
        let op = tikhonov_apply(&KernelSpec::standard_gaussian(), 1.0).unwrap();
        assert_eq!(op.apply(0.0, 0.8), 0.4);
        let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let g = |x: f64| (-0.5 * x * x).exp() * f(x);
        let small = tikhonov_apply(&KernelSpec::standard_gaussian(), 1e-14).unwrap();
        let r = small.apply_fn(g);
        for x in [0.0, 0.5, 1.5] {
            assert!((r(x) - f(x)).abs() < 1e-10);
        }
        let xs = uniform_grid(-5.0, 5.0, 0.01);
        let gs: Vec<f64> = xs.iter().map(|&x| g(x)).collect();
        assert!(op.normal_equation_residual(&xs, &gs) < 1e-10);
        assert!(matches!(
            tikhonov_apply(&KernelSpec::standard_gaussian(), 0.0),
            Err(Error::NonPositiveLambda(_))
        ));
        assert!(matches!(
            tikhonov_apply(&KernelSpec::zero_at_origin(1.0).unwrap(), 0.1),
            Err(Error::KernelNotPositive)
        ));
    }

    #[test]
    fn operator_norm() {
        let xs = uniform_grid(-20.0, 20.0, 1e-3);
        for lambda in DEFAULT_LAMBDAS {
            let (sup, bound) = operator_norm_check(&KernelSpec::standard_gaussian(), lambda, &xs).unwrap();
            assert!(sup <= bound);
        }
    }

    #[test]
    fn noiseless_error_decreases() {
        for fam in [DensityFamily::gaussian(0.0, 1.0), DensityFamily::student_t(5.0)] {
            let prob = TikhonovProblem::new(KernelSpec::standard_gaussian(), fam).unwrap();
            let errs: Vec<f64> = DEFAULT_LAMBDAS
                .iter()
                .map(|&l| prob.solve(None, l).unwrap().l2_error)
                .collect();
            for w in errs.windows(2) {
                assert!(w[1] < w[0], "{errs:?}");
            }
            let r = prob.solve(None, 1e-2).unwrap();
            assert_eq!(r.noise_term, 0.0);
            assert!(r.bound_holds());
        }
    }

    #[test]
    fn noisy_bound_and_schedule() {
        let prob = TikhonovProblem::new(KernelSpec::standard_gaussian(), DensityFamily::gaussian(0.0, 1.0)).unwrap();
        let n = prob.noise(1e-3, 9);
        assert!((grid_l2(&n, prob.step) - 1e-3).abs() < 1e-15);
        let r = tikhonov_noisy(&prob, 1e-3, 1e-2, 9).unwrap();
        assert!(r.bound_holds(), "{} > {}", r.l2_error, r.bound_value);
        let errs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&d| tikhonov_noisy(&prob, d, d, 9).unwrap().l2_error)
            .collect();
        for w in errs.windows(2) {
            assert!(w[1] < w[0], "{errs:?}");
        }
    }

    #[test]
    fn rejects_non_square_integrable() {
        let r = TikhonovProblem::new(KernelSpec::standard_gaussian(), DensityFamily::stable(0.4, 1.0, 0.0));
        assert!(matches!(r, Err(Error::NotADensity(_))));
    }
}
