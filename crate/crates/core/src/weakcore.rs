//! Weak expectations `<T, psi phi>` and everything built on them: moments,
//! characteristic and cumulant generating functions, cumulants, affine
//! pushforwards and independent (product) pairs.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{atom_pairing, GeneralizedDistribution};
use crate::error::{Error, Result};
use crate::io::Table;
use crate::kernels::KernelSpec;
use crate::quadrature::{IntegralResult, Integrator, QuadValue, QuadratureConfig, Support};

/// Highest cumulant order computed from moments.
pub const MAX_CUMULANT_ORDER: usize = 12;
/// `|cf|` below this is treated as a zero of the transform.
pub const CF_ZERO_THRESHOLD: f64 = 1e-12;
const NORMALISATION_TOL: f64 = 1e-8;

/// Distribution–kernel pair together with the quadrature settings used for
/// every pairing computed from it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakPair {
    dist: GeneralizedDistribution,
    kernel: KernelSpec,
    #[serde(default)]
    quad: QuadratureConfig,
    #[serde(default)]
    normalised: bool,
    /// `<|T|, |x|^k phi>` for k = 1, 2: natural scales of the CF increments.
    #[serde(skip)]
    abs_moments: OnceLock<[f64; 2]>,
}

impl WeakPair {
    pub fn new(dist: GeneralizedDistribution, kernel: KernelSpec) -> Self {
        Self {
            dist,
            kernel,
            quad: QuadratureConfig::default(),
            normalised: false,
            abs_moments: OnceLock::new(),
        }
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self.abs_moments = OnceLock::new();
        self
    }

    pub fn dist(&self) -> &GeneralizedDistribution {
        &self.dist
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn quadrature(&self) -> &QuadratureConfig {
        &self.quad
    }

    pub fn is_normalised(&self) -> bool {
        self.normalised
    }

    /// `<T, phi>`.
    pub fn mass(&self) -> Result<f64> {
        weak_expectation(self, |_| 1.0)
    }

    /// Declares the pair normalised after checking `|<T, phi> - 1| <= 1e-8`.
    pub fn declare_normalised(mut self) -> Result<Self> {
        let m0 = self.mass()?;
        if (m0 - 1.0).abs() > NORMALISATION_TOL {
            return Err(Error::ParameterOutOfDomain(format!("pair has mass {m0}, not 1")));
        }
        self.normalised = true;
        Ok(self)
    }

    /// `(T / <T, phi>, phi)`.
    pub fn normalised(&self) -> Result<Self> {
        if self.normalised {
            return Ok(self.clone());
        }
        let m0 = self.mass()?;
        if m0 == 0.0 || !m0.is_finite() {
            return Err(Error::ZeroNormalisation(m0));
        }
        let dist = GeneralizedDistribution::Mixture(vec![(1.0 / m0, self.dist.clone())]);
        Self {
            dist,
            kernel: self.kernel,
            quad: self.quad,
            normalised: false,
            abs_moments: OnceLock::new(),
        }
        .declare_normalised()
    }

    /// Pushforward under `x -> x + a`: the law moves and the kernel follows it.
    pub fn translate(&self, a: f64) -> Result<Self> {
        Ok(Self {
            dist: self.dist.affine(a, 1.0)?,
            kernel: self.kernel.shifted(a),
            quad: self.quad,
            normalised: self.normalised,
            abs_moments: OnceLock::new(),
        })
    }

    /// Pushforward under `x -> b x`, with kernel `x -> phi(x / b)`, so that
    /// expectations satisfy `E_b[psi] = E[psi(b .)]`.
    pub fn scale(&self, b: f64) -> Result<Self> {
        if b == 0.0 || !b.is_finite() {
            return Err(Error::ParameterOutOfDomain(format!(
                "scale factor must be finite and nonzero, got {b}"
            )));
        }
        Ok(Self {
            dist: self.dist.affine(0.0, b)?,
            kernel: self.kernel.scaled(1.0 / b)?,
            quad: self.quad,
            normalised: self.normalised,
            abs_moments: OnceLock::new(),
        })
    }

    fn abs_moments(&self) -> Result<[f64; 2]> {
        if let Some(m) = self.abs_moments.get() {
            return Ok(*m);
        }
        let m1 = pair_abs(self, &|x: f64| x.abs())?;
        let m2 = pair_abs(self, &|x: f64| x * x)?;
        Ok(*self.abs_moments.get_or_init(|| [m1, m2]))
    }
}

/// Scalars a pairing can produce.
pub trait PairValue: QuadValue {
    fn integrate<F: Fn(f64) -> Self>(integ: &Integrator, f: F, support: Support) -> Result<IntegralResult<Self>>;
}

impl PairValue for f64 {
    fn integrate<F: Fn(f64) -> Self>(integ: &Integrator, f: F, support: Support) -> Result<IntegralResult<Self>> {
        integ.real(f, support)
    }
}

impl PairValue for Complex64 {
    fn integrate<F: Fn(f64) -> Self>(integ: &Integrator, f: F, support: Support) -> Result<IntegralResult<Self>> {
        integ.complex(f, support)
    }
}

fn pair_dist<V: PairValue>(
    dist: &GeneralizedDistribution,
    kernel: &KernelSpec,
    cfg: &QuadratureConfig,
    freq: f64,
    absolute: bool,
    psi: &dyn Fn(f64) -> V,
) -> Result<V> {
    match dist {
        GeneralizedDistribution::Density(d) => {
            let integ = Integrator::new(*cfg)
                .breakpoints(&[d.family().location(), kernel.centre()])
                .frequency(freq);
            let support = Support::witnessed(kernel, cfg);
            V::integrate(&integ, |x| psi(x) * (kernel.eval(x) * d.eval(x)), support).map(|r| r.value)
        }
        GeneralizedDistribution::Atom { location, weight } => {
            let w = if absolute { weight.abs() } else { *weight };
            Ok(atom_pairing(*location, w, |x| psi(x) * kernel.eval(x)))
        }
        GeneralizedDistribution::Mixture(parts) => parts.iter().try_fold(V::zero(), |acc, (w, d)| {
            let w = if absolute { w.abs() } else { *w };
            Ok(acc + pair_dist(d, kernel, cfg, freq, absolute, psi)? * w)
        }),
    }
}

fn pair_abs(p: &WeakPair, psi: &dyn Fn(f64) -> f64) -> Result<f64> {
    pair_dist(&p.dist, &p.kernel, &p.quad, 0.0, true, psi)
}

/// `E_{T,phi}[psi] = <T, psi phi>`: quadrature for densities, exact for atoms,
/// linear over mixtures.
pub fn weak_expectation<F: Fn(f64) -> f64>(p: &WeakPair, psi: F) -> Result<f64> {
    pair_dist(&p.dist, &p.kernel, &p.quad, 0.0, false, &psi)
}

/// Complex-valued weak expectation; `frequency` bounds the panel width for
/// integrands oscillating like `e^{i frequency x}`.
pub fn weak_expectation_complex<F: Fn(f64) -> Complex64>(p: &WeakPair, psi: F, frequency: f64) -> Result<Complex64> {
    pair_dist(&p.dist, &p.kernel, &p.quad, frequency, false, &psi)
}

/// `m_n = <T, x^n phi>`.
pub fn weak_moment(p: &WeakPair, n: usize) -> Result<f64> {
    let n = i32::try_from(n).map_err(|_| Error::UnsupportedOrder(n))?;
    weak_expectation(p, |x| x.powi(n))
}

/// Weak moments `m_0 ... m_N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSequence {
    pub values: Vec<f64>,
    pub kernel: Option<KernelSpec>,
    pub normalised: bool,
}

impl MomentSequence {
    pub fn order(&self) -> usize {
        self.values.len().saturating_sub(1)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["n", "m_n"]);
        for (n, v) in self.values.iter().enumerate() {
            t.push(vec![n.into(), (*v).into()]);
        }
        t
    }
}

pub fn weak_moments(p: &WeakPair, n_max: usize) -> Result<MomentSequence> {
    let values = (0..=n_max)
        .into_par_iter()
        .map(|n| weak_moment(p, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence {
        values,
        kernel: Some(p.kernel),
        normalised: p.normalised,
    })
}

/// `<T, e^{itx} phi>`.
pub fn weak_cf(p: &WeakPair, t: f64) -> Result<Complex64> {
    weak_expectation_complex(p, |x| Complex64::cis(t * x), t)
}

/// `<T, (e^{itx} - 1) phi>`, computed without cancellation: the real part as
/// `-2 sin^2(tx/2)` and each part to a tolerance relative to its own natural
/// size (`t^2 <|T|, x^2 phi>/2` and `|t| <|T|, |x| phi>`).
pub fn weak_cf_increment(p: &WeakPair, t: f64) -> Result<Complex64> {
    if t == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let [a1, a2] = p.abs_moments()?;
    let tol = |scale: f64| QuadratureConfig {
        abs_tol: (p.quad.rel_tol * scale).max(f64::MIN_POSITIVE),
        ..p.quad
    };
    let re = pair_dist(&p.dist, &p.kernel, &tol(0.5 * t * t * a2), t, false, &|x: f64| {
        let s = (0.5 * t * x).sin();
        -2.0 * s * s
    })?;
    let im = pair_dist(&p.dist, &p.kernel, &tol(t.abs() * a1), t, false, &|x: f64| {
        (t * x).sin()
    })?;
    Ok(Complex64::new(re, im))
}

/// `log(1 + z)` accurate for small `z`, principal branch.
pub fn complex_log1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    let im = z.im.atan2(1.0 + z.re);
    Complex64::new(re, im)
}

/// Weak CF and CGF sampled on a symmetric grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransformGrid {
    pub t_values: Vec<f64>,
    pub cf_values: Vec<Complex64>,
    /// Empty until filled by [`weak_cgf`].
    pub cgf_values: Vec<Complex64>,
    pub branch_windings: Vec<i64>,
    /// `<T, phi>`.
    pub mass: f64,
    /// `cf(t) - cf(0)` at full relative precision.
    pub increments: Vec<Complex64>,
}

impl TransformGrid {
    fn centre(&self) -> usize {
        self.t_values.len() / 2
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["t", "re_cf", "im_cf", "re_cgf", "im_cgf", "winding"]);
        for i in 0..self.t_values.len() {
            let cgf = self
                .cgf_values
                .get(i)
                .copied()
                .unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let w = self.branch_windings.get(i).copied().unwrap_or(0);
            t.push(vec![
                self.t_values[i].into(),
                self.cf_values[i].re.into(),
                self.cf_values[i].im.into(),
                cgf.re.into(),
                cgf.im.into(),
                w.into(),
            ]);
        }
        t
    }
}

/// Symmetric grid on `[-t_max, t_max]` with an odd number of points.
pub fn symmetric_grid(t_max: f64, n_points: usize) -> Result<Vec<f64>> {
    if n_points.is_multiple_of(2) || !(t_max > 0.0 && t_max.is_finite()) && n_points > 1 {
        return Err(Error::InvalidGrid(format!(
            "need an odd point count and positive t_max, got {n_points} points on t_max={t_max}"
        )));
    }
    let half = (n_points / 2) as i64;
    if half == 0 {
        return Ok(vec![0.0]);
    }
    Ok((-half..=half).map(|k| t_max * k as f64 / half as f64).collect())
}

/// Weak CF on a symmetric grid (CGF not yet filled). Grid points are
/// evaluated in parallel; output order is the grid order.
pub fn weak_cf_grid(p: &WeakPair, t_max: f64, n_points: usize) -> Result<TransformGrid> {
    let t_values = symmetric_grid(t_max, n_points)?;
    transform_on(p, t_values)
}

fn transform_on(p: &WeakPair, t_values: Vec<f64>) -> Result<TransformGrid> {
    let mass = p.mass()?;
    let increments = t_values
        .par_iter()
        .map(|&t| weak_cf_increment(p, t))
        .collect::<Result<Vec<_>>>()?;
    let cf_values = increments.iter().map(|d| d + mass).collect();
    Ok(TransformGrid {
        t_values,
        cf_values,
        cgf_values: Vec::new(),
        branch_windings: Vec::new(),
        mass,
        increments,
    })
}

/// Fills the CGF with a logarithm made continuous by walking outward from
/// `t = 0`; a step whose phase change exceeds `pi/2` after unwrapping means
/// the grid is too coarse to follow the branch and is an error.
pub fn weak_cgf(mut grid: TransformGrid) -> Result<TransformGrid> {
    let n = grid.t_values.len();
    if n == 0 || n.is_multiple_of(2) {
        return Err(Error::InvalidGrid("grid must have an odd number of points".into()));
    }
    if grid.mass <= 0.0 {
        // log of a negative mass would need its own branch choice
        return Err(Error::ZeroNormalisation(grid.mass));
    }
    for (t, cf) in grid.t_values.iter().zip(&grid.cf_values) {
        if cf.norm() <= CF_ZERO_THRESHOLD {
            return Err(Error::ZeroCrossing {
                t: *t,
                modulus: cf.norm(),
            });
        }
    }
    let log_mass = grid.mass.ln();
    let principal: Vec<Complex64> = grid
        .increments
        .iter()
        .map(|d| complex_log1p(d / grid.mass) + log_mass)
        .collect();
    let mut cgf = principal.clone();
    let mut windings = vec![0i64; n];
    let c = grid.centre();
    let mut walk = |range: Box<dyn Iterator<Item = usize>>, step: isize| -> Result<()> {
        for i in range {
            let prev = cgf[(i as isize - step) as usize].im;
            let k = ((prev - principal[i].im) / (2.0 * PI)).round();
            let im = principal[i].im + 2.0 * PI * k;
            if (im - prev).abs() > 0.5 * PI {
                return Err(Error::BranchJump { t: grid.t_values[i] });
            }
            cgf[i].im = im;
            windings[i] = k as i64;
        }
        Ok(())
    };
    walk(Box::new(c + 1..n), 1)?;
    walk(Box::new((0..c).rev()), -1)?;
    grid.cgf_values = cgf;
    grid.branch_windings = windings;
    Ok(grid)
}

/// `log cf(u) - log cf(0)` continued along a path from 0 with steps of at
/// most `max_step`.
pub fn centred_cgf_at(p: &WeakPair, u: f64, max_step: f64) -> Result<Complex64> {
    let mass = p.mass()?;
    if mass <= 0.0 {
        return Err(Error::ZeroNormalisation(mass));
    }
    let steps = (u.abs() / max_step).ceil().max(1.0) as usize;
    let mut prev = 0.0;
    let mut value = Complex64::new(0.0, 0.0);
    for k in 1..=steps {
        let s = u * k as f64 / steps as f64;
        let d = weak_cf_increment(p, s)?;
        let modulus = (d + mass).norm();
        if modulus <= CF_ZERO_THRESHOLD {
            return Err(Error::ZeroCrossing { t: s, modulus });
        }
        let z = complex_log1p(d / mass);
        let im = z.im + 2.0 * PI * ((prev - z.im) / (2.0 * PI)).round();
        if (im - prev).abs() > 0.5 * PI {
            return Err(Error::BranchJump { t: s });
        }
        prev = im;
        value = Complex64::new(z.re, im);
    }
    Ok(value)
}

/// Branch-continuous `log cf(u)`.
pub fn weak_cgf_at(p: &WeakPair, u: f64) -> Result<Complex64> {
    let mass = p.mass()?;
    Ok(centred_cgf_at(p, u, 0.05)? + mass.ln())
}

/// `kappa_1 ... kappa_N` (real convention) of a normalised-first moment sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulantSequence {
    pub values: Vec<f64>,
    pub base_normalisation: f64,
}

impl CumulantSequence {
    /// `kappa_n`, `n >= 1`.
    pub fn kappa(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(["n", "kappa_n"]);
        for (i, v) in self.values.iter().enumerate() {
            t.push(vec![(i + 1).into(), (*v).into()]);
        }
        t
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cumulants of `m_n / m_0` by the moment–cumulant recursion.
pub fn cumulants_from_moments(moments: &[f64], n_max: usize) -> Result<CumulantSequence> {
    if n_max > MAX_CUMULANT_ORDER {
        return Err(Error::OrderTooLarge {
            order: n_max,
            max: MAX_CUMULANT_ORDER,
        });
    }
    if moments.len() <= n_max {
        return Err(Error::InvalidConfig(format!(
            "need moments up to order {n_max}, have {}",
            moments.len()
        )));
    }
    let m0 = moments[0];
    if m0 == 0.0 || !m0.is_finite() {
        return Err(Error::ZeroNormalisation(m0));
    }
    let m: Vec<f64> = moments.iter().map(|v| v / m0).collect();
    let mut kappa = vec![0.0; n_max + 1];
    for n in 1..=n_max {
        let mut k = m[n];
        for j in 1..n {
            k -= binomial(n - 1, j - 1) * kappa[j] * m[n - j];
        }
        kappa[n] = k;
    }
    Ok(CumulantSequence {
        values: kappa[1..].to_vec(),
        base_normalisation: m0,
    })
}

pub fn weak_cumulants(p: &WeakPair, n_max: usize) -> Result<CumulantSequence> {
    if n_max > MAX_CUMULANT_ORDER {
        return Err(Error::OrderTooLarge {
            order: n_max,
            max: MAX_CUMULANT_ORDER,
        });
    }
    let m = weak_moments(p, n_max)?;
    cumulants_from_moments(&m.values, n_max)
}

/// `d^n/dt^n cf(0)` by a fourth-order central difference with step `h`,
/// `1 <= n <= 4`; approximates `i^n m_n`.
pub fn moments_from_cf(p: &WeakPair, n: usize, h: f64) -> Result<Complex64> {
    let (coeffs, denom): (&[f64], f64) = match n {
        1 => (&[1.0, -8.0, 0.0, 8.0, -1.0], 12.0 * h),
        2 => (&[-1.0, 16.0, -30.0, 16.0, -1.0], 12.0 * h * h),
        3 => (&[1.0, -8.0, 13.0, 0.0, -13.0, 8.0, -1.0], 8.0 * h.powi(3)),
        4 => (&[-1.0, 12.0, -39.0, 56.0, -39.0, 12.0, -1.0], 6.0 * h.powi(4)),
        _ => return Err(Error::UnsupportedOrder(n)),
    };
    let half = (coeffs.len() / 2) as i64;
    // Coefficients sum to zero, so the increment cf(t) - cf(0) can stand in
    // for cf(t) without losing digits to cancellation.
    let sum = (-half..=half)
        .zip(coeffs)
        .filter(|(_, c)| **c != 0.0)
        .map(|(k, c)| Ok(weak_cf_increment(p, k as f64 * h)? * *c))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(Complex64::new(0.0, 0.0), |a, b| a + b);
    Ok(sum / denom)
}

/// Two pairs joined as independent components; the sum `X + Y` is paired
/// with `phi_1(x) phi_2(y)`.
#[derive(Debug, Clone)]
pub struct ProductPair {
    pub first: WeakPair,
    pub second: WeakPair,
}

/// Weak CF of the independent sum: `cf_1(t) cf_2(t)`.
pub fn sum_cf(p1: &WeakPair, p2: &WeakPair, t: f64) -> Result<Complex64> {
    Ok(weak_cf(p1, t)? * weak_cf(p2, t)?)
}

impl ProductPair {
    pub fn new(first: WeakPair, second: WeakPair) -> Self {
        Self { first, second }
    }

    pub fn sum_cf(&self, t: f64) -> Result<Complex64> {
        sum_cf(&self.first, &self.second, t)
    }

    /// `<T_1 (x) T_2, g(x, y) phi_1(x) phi_2(y)>` by nested (tensor) quadrature.
    pub fn tensor_expectation<V: PairValue>(&self, g: &dyn Fn(f64, f64) -> V, frequency: f64) -> Result<V> {
        let failure: RefCell<Option<Error>> = RefCell::new(None);
        let (a, b) = (&self.first, &self.second);
        let inner = |x: f64| match pair_dist(&b.dist, &b.kernel, &b.quad, frequency, false, &|y| g(x, y)) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                V::zero()
            }
        };
        let v = pair_dist(&a.dist, &a.kernel, &a.quad, frequency, false, &inner)?;
        match failure.into_inner() {
            Some(e) => Err(e),
            None => Ok(v),
        }
    }

    /// Weak CF of the sum by 2-D quadrature, independent of the factorisation.
    pub fn tensor_cf(&self, t: f64) -> Result<Complex64> {
        self.tensor_expectation(&|x, y| Complex64::cis(t * (x + y)), t)
    }

    /// `<T_1 (x) T_2, (x + y)^n phi_1 phi_2>` by 2-D quadrature.
    pub fn tensor_moment(&self, n: usize) -> Result<f64> {
        let n = i32::try_from(n).map_err(|_| Error::UnsupportedOrder(n))?;
        self.tensor_expectation(&|x, y| (x + y).powi(n), 0.0)
    }

    pub fn tensor_moments(&self, n_max: usize) -> Result<MomentSequence> {
        let values = (0..=n_max)
            .into_par_iter()
            .map(|n| self.tensor_moment(n))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentSequence {
            values,
            kernel: None,
            normalised: self.first.normalised && self.second.normalised,
        })
    }

    /// Cumulants of the sum from 2-D quadrature moments.
    pub fn sum_cumulants(&self, n_max: usize) -> Result<CumulantSequence> {
        let m = self.tensor_moments(n_max)?;
        cumulants_from_moments(&m.values, n_max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::DensityFamily;
    use crate::special::erfc;

    const CAUCHY_M0: f64 = 0.523_156_583_730_246_8;
    const CAUCHY_M2: f64 = 0.274_727_977_072_618_6;

    fn pair(fam: DensityFamily) -> WeakPair {
        WeakPair::new(
            GeneralizedDistribution::density(fam).unwrap(),
            KernelSpec::standard_gaussian(),
        )
    }

    fn cauchy() -> WeakPair {
        pair(DensityFamily::cauchy(0.0, 1.0))
    }

    fn gauss() -> WeakPair {
        pair(DensityFamily::gaussian(0.0, 1.0))
    }

    fn precise(p: WeakPair) -> WeakPair {
        p.with_quadrature(QuadratureConfig::precise())
    }

    #[test]
    fn expectation_examples() {
        let p = cauchy();
        let m0 = weak_expectation(&p, |_| 1.0).unwrap();
        assert!((m0 - 0.5f64.exp() * erfc(0.5f64.sqrt())).abs() < 1e-10);
        assert!((m0 - CAUCHY_M0).abs() < 1e-10);
        assert_eq!(weak_expectation(&p, |_| 0.0).unwrap(), 0.0);
        let atom = WeakPair::new(
            GeneralizedDistribution::dirac(1.0).unwrap(),
            KernelSpec::standard_gaussian(),
        );
        assert!((weak_expectation(&atom, |x| x).unwrap() - (-0.5f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn moment_examples() {
        let p = cauchy();
        assert!((weak_moment(&p, 2).unwrap() - CAUCHY_M2).abs() < 1e-9);
        assert!((CAUCHY_M2 - ((2.0 / PI).sqrt() - CAUCHY_M0)).abs() < 1e-15);
        assert!(weak_moment(&p, 3).unwrap().abs() < 1e-9);
        // 50-digit quadrature oracle for StudentT(3) with e^{-x^2/2}
        let t3 = pair(DensityFamily::student_t(3.0));
        let m4 = weak_moment(&t3, 4).unwrap();
        assert!((m4 - 0.578_702_557_267_291_4).abs() < 1e-9, "{m4}");
    }

    #[test]
    fn moments_exist_for_every_catalogue_pair() {
        let fams = [
            DensityFamily::cauchy(0.0, 1.0),
            DensityFamily::student_t(3.0),
            DensityFamily::gaussian(0.3, 2.0),
            DensityFamily::stable(1.5, 1.0, 0.0),
            DensityFamily::stable(0.8, 1.0, 0.0),
            DensityFamily::nig(2.0, 0.5, 0.0, 1.0),
        ];
        let kernels = [
            KernelSpec::standard_gaussian(),
            KernelSpec::super_gaussian(1.0, 4.0, 1.0).unwrap(),
            KernelSpec::zero_at_origin(1.0).unwrap(),
        ];
        for fam in fams {
            for k in kernels {
                let p = WeakPair::new(GeneralizedDistribution::density(fam).unwrap(), k);
                let m = weak_moments(&p, 12).unwrap();
                assert!(m.values.iter().all(|v| v.is_finite()), "{fam:?} {k:?}");
            }
        }
    }

    #[test]
    fn cf_examples() {
        let g = gauss();
        for &t in &[0.0, 0.5, 1.7, 4.0] {
            let cf = weak_cf(&g, t).unwrap();
            let want = (-t * t / 4.0).exp() / 2f64.sqrt();
            assert!((cf.re - want).abs() < 1e-10 && cf.im.abs() < 1e-12, "t={t}");
        }
        assert!((weak_cf(&cauchy(), 0.0).unwrap().re - CAUCHY_M0).abs() < 1e-10);
        let grid = weak_cf_grid(&cauchy(), 5.0, 41).unwrap();
        for (i, cf) in grid.cf_values.iter().enumerate() {
            assert!(cf.im.abs() < 1e-9);
            let mirror = grid.cf_values[grid.cf_values.len() - 1 - i];
            assert!((cf - mirror.conj()).norm() < 1e-12);
        }
        assert_eq!(grid.cf_values[20].re, grid.mass);
        assert!(matches!(weak_cf_grid(&cauchy(), 1.0, 10), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn cgf_examples() {
        let grid = weak_cgf(weak_cf_grid(&gauss(), 4.0, 81).unwrap()).unwrap();
        for (t, k) in grid.t_values.iter().zip(&grid.cgf_values) {
            let want = -(2f64.sqrt()).ln() - t * t / 4.0;
            assert!((k.re - want).abs() < 1e-8 && k.im.abs() < 1e-8, "t={t}");
        }
        let c = weak_cgf(weak_cf_grid(&cauchy(), 2.0, 21).unwrap()).unwrap();
        assert!((c.cgf_values[10].re - CAUCHY_M0.ln()).abs() < 1e-10);
        assert!((CAUCHY_M0.ln() + 0.648).abs() < 1e-3);
        let skew = weak_cgf(weak_cf_grid(&pair(DensityFamily::nig(2.0, 0.8, 0.0, 1.0)), 6.0, 61).unwrap()).unwrap();
        let n = skew.t_values.len();
        for i in 0..n {
            assert!((skew.cgf_values[i] - skew.cgf_values[n - 1 - i].conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn cgf_unwraps_through_many_turns() {
        // An atom at 3 has cf = phi(3) e^{3it}; the phase winds linearly.
        let atom = WeakPair::new(
            GeneralizedDistribution::dirac(3.0).unwrap(),
            KernelSpec::standard_gaussian(),
        );
        let grid = weak_cgf(weak_cf_grid(&atom, 10.0, 201).unwrap()).unwrap();
        for (t, k) in grid.t_values.iter().zip(&grid.cgf_values) {
            assert!((k.im - 3.0 * t).abs() < 1e-9, "t={t}");
        }
        assert!(grid.branch_windings.iter().any(|&w| w != 0));
        // a step of pi/3 turns the phase by exactly pi: the branch is ambiguous
        let coarse = weak_cf_grid(&atom, 10.0 * PI / 3.0, 21).unwrap();
        assert!(matches!(weak_cgf(coarse), Err(Error::BranchJump { .. })));
        assert!((centred_cgf_at(&atom, 10.0, 0.05).unwrap().im - 30.0).abs() < 1e-9);
    }

    #[test]
    fn cgf_reports_zero_crossing() {
        // Two atoms of equal mass: cf = phi(1) 2 cos(t) vanishes at pi/2.
        let d = GeneralizedDistribution::mixture(vec![
            (1.0, GeneralizedDistribution::dirac(1.0).unwrap()),
            (1.0, GeneralizedDistribution::dirac(-1.0).unwrap()),
        ])
        .unwrap();
        let p = WeakPair::new(d, KernelSpec::standard_gaussian());
        let grid = weak_cf_grid(&p, PI, 3).unwrap();
        let mut g = grid.clone();
        g.t_values = vec![-PI / 2.0, 0.0, PI / 2.0];
        g.cf_values = vec![
            weak_cf(&p, -PI / 2.0).unwrap(),
            g.cf_values[1],
            weak_cf(&p, PI / 2.0).unwrap(),
        ];
        assert!(matches!(weak_cgf(g), Err(Error::ZeroCrossing { .. })));
    }

    #[test]
    fn cumulant_examples() {
        let k = weak_cumulants(&gauss(), 4).unwrap();
        for (got, want) in k.values.iter().zip([0.0, 0.5, 0.0, 0.0]) {
            assert!((got - want).abs() < 1e-8, "{:?}", k.values);
        }
        let atom = WeakPair::new(
            GeneralizedDistribution::dirac(1.5).unwrap(),
            KernelSpec::standard_gaussian(),
        )
        .normalised()
        .unwrap();
        let k = weak_cumulants(&atom, 6).unwrap();
        assert!((k.kappa(1) - 1.5).abs() < 1e-14);
        assert!(k.values[1..].iter().all(|v| v.abs() < 1e-12), "{:?}", k.values);
        let k = weak_cumulants(&cauchy(), 4).unwrap();
        assert!(k.kappa(1).abs() < 1e-12);
        assert!((k.kappa(2) - CAUCHY_M2 / CAUCHY_M0).abs() < 1e-9);
        assert!((k.kappa(2) - 0.5258).abs() < 1e-3);
        assert!(matches!(
            weak_cumulants(&cauchy(), 13),
            Err(Error::OrderTooLarge { .. })
        ));
    }

    #[test]
    fn zero_mass_is_rejected() {
        assert!(matches!(
            cumulants_from_moments(&[0.0, 1.0], 1),
            Err(Error::ZeroNormalisation(_))
        ));
    }

    #[test]
    fn affine_rules() {
        let p = precise(cauchy()).normalised().unwrap();
        let base = weak_cumulants(&p, 4).unwrap();
        let shifted = weak_cumulants(&p.translate(2.0).unwrap(), 4).unwrap();
        assert!((shifted.kappa(1) - base.kappa(1) - 2.0).abs() < 1e-7);
        for n in 2..=4 {
            assert!((shifted.kappa(n) - base.kappa(n)).abs() < 1e-7, "n={n}");
        }
        let same = weak_cumulants(&p.scale(1.0).unwrap(), 4).unwrap();
        assert_eq!(same, base);
        let scaled = weak_cumulants(&p.scale(3.0).unwrap(), 4).unwrap();
        assert!((scaled.kappa(2) / base.kappa(2) - 9.0).abs() < 9e-6);
        for &t in &[0.3, 1.1] {
            let cf = weak_cf(&p, t).unwrap();
            let cf_a = weak_cf(&p.translate(2.0).unwrap(), t).unwrap();
            assert!((cf_a - cf * Complex64::cis(2.0 * t)).norm() < 1e-10);
            let cf_b = weak_cf(&p.scale(3.0).unwrap(), t).unwrap();
            assert!((cf_b - weak_cf(&p, 3.0 * t).unwrap()).norm() < 1e-10);
        }
    }

    #[test]
    fn sum_cf_examples() {
        let g = gauss();
        let delta = WeakPair::new(
            GeneralizedDistribution::dirac(0.0).unwrap(),
            KernelSpec::standard_gaussian(),
        );
        for &t in &[0.0, 0.7, 2.0] {
            assert_eq!(sum_cf(&g, &delta, t).unwrap(), weak_cf(&g, t).unwrap());
        }
        let other = pair(DensityFamily::gaussian(0.5, 0.8));
        let prod = ProductPair::new(g.clone(), other.clone());
        for &t in &[0.0, 0.6, 1.9] {
            let direct = prod.tensor_cf(t).unwrap();
            assert!((prod.sum_cf(t).unwrap() - direct).norm() < 1e-7, "t={t}");
        }
    }

    #[test]
    fn cumulants_add_over_independent_pairs() {
        let a = precise(cauchy()).normalised().unwrap();
        let b = precise(pair(DensityFamily::nig(2.0, 0.5, 0.0, 1.0)))
            .normalised()
            .unwrap();
        let ka = weak_cumulants(&a, 6).unwrap();
        let kb = weak_cumulants(&b, 6).unwrap();
        let ks = ProductPair::new(a, b).sum_cumulants(6).unwrap();
        for n in 1..=6 {
            assert!((ks.kappa(n) - ka.kappa(n) - kb.kappa(n)).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn moments_from_cf_consistency() {
        for p in [
            precise(pair(DensityFamily::nig(2.0, 0.5, 0.0, 1.0))),
            precise(pair(DensityFamily::cauchy(1.0, 1.0))),
        ] {
            let m = weak_moments(&p, 4).unwrap();
            for n in 1..=4 {
                let fd = moments_from_cf(&p, n, 1e-2).unwrap();
                let want = Complex64::i().powi(n as i32) * m.values[n];
                assert!((fd - want).norm() <= 1e-5 * m.values[n].abs(), "n={n}: {fd} vs {want}");
            }
        }
    }

    #[test]
    fn cgf_second_order_remainder_vanishes() {
        let p = precise(pair(DensityFamily::nig(2.0, 0.5, 0.0, 1.0)))
            .normalised()
            .unwrap();
        let k = weak_cumulants(&p, 2).unwrap();
        let mut ratios = Vec::new();
        let mut u = 0.1;
        while u >= 0.00625 {
            let cgf = weak_cgf_at(&p, u).unwrap();
            let quad = Complex64::new(-0.5 * k.kappa(2) * u * u, k.kappa(1) * u);
            ratios.push((cgf - quad).norm() / (u * u));
            u /= 2.0;
        }
        for w in ratios.windows(2) {
            assert!(w[1] < w[0], "{ratios:?}");
        }
        assert!(ratios.last().unwrap() < &1e-2);
    }

    #[test]
    fn tables_and_serde() {
        let m = weak_moments(&cauchy(), 2).unwrap();
        let csv = m.to_table().to_csv();
        assert!(csv.starts_with("n,m_n\n0,5.23156583730"));
        let grid = weak_cgf(weak_cf_grid(&cauchy(), 1.0, 3).unwrap()).unwrap();
        assert!(grid
            .to_table()
            .to_csv()
            .starts_with("t,re_cf,im_cf,re_cgf,im_cgf,winding\n"));
        let json = serde_json::to_string(&grid).unwrap();
        let back: TransformGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(back, grid);
    }
}
