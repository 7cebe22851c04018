//! The distribution component of a pair: named densities, Dirac atoms and
//! finite (possibly signed) mixtures of these.

mod sampling;
pub mod stable;

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{Integrator, QuadratureConfig, Support};
use crate::special::{bessel_k1_scaled, ln_gamma};

pub use sampling::sample;
pub use stable::StableTable;

/// Parametric density families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DensityFamily {
    Cauchy {
        mu: f64,
        gamma: f64,
    },
    StudentT {
        nu: f64,
        location: f64,
        scale: f64,
    },
    Gaussian {
        mean: f64,
        sd: f64,
    },
    /// Symmetric alpha-stable law with characteristic function
    /// `exp(i t location - |scale t|^alpha)`.
    SymmetricStable {
        alpha: f64,
        scale: f64,
        location: f64,
    },
    /// Normal inverse Gaussian `NIG(alpha, beta, mu, delta)`.
    Nig {
        alpha: f64,
        beta: f64,
        mu: f64,
        delta: f64,
    },
}

fn domain(ok: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::ParameterOutOfDomain(msg()))
    }
}

impl DensityFamily {
    pub fn cauchy(mu: f64, gamma: f64) -> Self {
        DensityFamily::Cauchy { mu, gamma }
    }

    pub fn student_t(nu: f64) -> Self {
        DensityFamily::StudentT {
            nu,
            location: 0.0,
            scale: 1.0,
        }
    }

    pub fn gaussian(mean: f64, sd: f64) -> Self {
        DensityFamily::Gaussian { mean, sd }
    }

    pub fn stable(alpha: f64, scale: f64, location: f64) -> Self {
        DensityFamily::SymmetricStable { alpha, scale, location }
    }

    pub fn nig(alpha: f64, beta: f64, mu: f64, delta: f64) -> Self {
        DensityFamily::Nig { alpha, beta, mu, delta }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match *self {
            DensityFamily::Cauchy { mu, gamma } => domain(finite(mu) && gamma > 0.0 && finite(gamma), || {
                format!("Cauchy(mu={mu}, gamma={gamma})")
            }),
            DensityFamily::StudentT { nu, location, scale } => domain(
                nu > 0.0 && finite(nu) && finite(location) && scale > 0.0 && finite(scale),
                || format!("StudentT(nu={nu}, location={location}, scale={scale})"),
            ),
            DensityFamily::Gaussian { mean, sd } => domain(finite(mean) && sd > 0.0 && finite(sd), || {
                format!("Gaussian(mean={mean}, sd={sd})")
            }),
            DensityFamily::SymmetricStable { alpha, scale, location } => domain(
                alpha > 0.0 && alpha <= 2.0 && scale > 0.0 && finite(scale) && finite(location),
                || format!("SymmetricStable(alpha={alpha}, scale={scale}, location={location})"),
            ),
            DensityFamily::Nig { alpha, beta, mu, delta } => domain(
                alpha > 0.0 && finite(alpha) && beta.abs() < alpha && finite(mu) && delta > 0.0 && finite(delta),
                || format!("NIG(alpha={alpha}, beta={beta}, mu={mu}, delta={delta})"),
            ),
        }
    }

    /// Centre of symmetry, if the family is symmetric.
    pub fn symmetry_centre(&self) -> Option<f64> {
        match *self {
            DensityFamily::Cauchy { mu, .. } => Some(mu),
            DensityFamily::StudentT { location, .. } => Some(location),
            DensityFamily::Gaussian { mean, .. } => Some(mean),
            DensityFamily::SymmetricStable { location, .. } => Some(location),
            DensityFamily::Nig { beta, mu, .. } => (beta == 0.0).then_some(mu),
        }
    }

    /// A point where the density has most of its mass (used as a quadrature breakpoint).
    pub fn location(&self) -> f64 {
        match *self {
            DensityFamily::Cauchy { mu, .. } => mu,
            DensityFamily::StudentT { location, .. } => location,
            DensityFamily::Gaussian { mean, .. } => mean,
            DensityFamily::SymmetricStable { location, .. } => location,
            DensityFamily::Nig { mu, .. } => mu,
        }
    }

    /// Law of `b X + a` when `X` has this law.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        domain(b != 0.0 && b.is_finite() && a.is_finite(), || {
            format!("affine map needs finite a and nonzero b, got a={a}, b={b}")
        })?;
        let ab = b.abs();
        let mapped = match *self {
            DensityFamily::Cauchy { mu, gamma } => DensityFamily::Cauchy {
                mu: b * mu + a,
                gamma: ab * gamma,
            },
            DensityFamily::StudentT { nu, location, scale } => DensityFamily::StudentT {
                nu,
                location: b * location + a,
                scale: ab * scale,
            },
            DensityFamily::Gaussian { mean, sd } => DensityFamily::Gaussian {
                mean: b * mean + a,
                sd: ab * sd,
            },
            DensityFamily::SymmetricStable { alpha, scale, location } => DensityFamily::SymmetricStable {
                alpha,
                scale: ab * scale,
                location: b * location + a,
            },
            DensityFamily::Nig { alpha, beta, mu, delta } => DensityFamily::Nig {
                alpha: alpha / ab,
                beta: beta / b,
                mu: b * mu + a,
                delta: ab * delta,
            },
        };
        Ok(mapped)
    }

    /// Whether the density is square integrable (all catalogue laws except
    /// stable with `alpha <= 1/2`).
    pub fn is_square_integrable(&self) -> bool {
        !matches!(*self, DensityFamily::SymmetricStable { alpha, .. } if alpha <= 0.5)
    }
}

/// A validated density, with its stable lookup table built eagerly.
#[derive(Debug, Clone)]
pub struct Density {
    family: DensityFamily,
    table: Option<Arc<StableTable>>,
}

impl PartialEq for Density {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

impl Density {
    /// Validates parameters and checks the numerical normalisation to `1e-8`.
    pub fn new(family: DensityFamily) -> Result<Self> {
        let d = Self::new_unchecked(family)?;
        let mass = d.total_mass()?;
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::ParameterOutOfDomain(format!(
                "{family:?} integrates to {mass}, not 1"
            )));
        }
        Ok(d)
    }

    /// Validates parameters only.
    pub fn new_unchecked(family: DensityFamily) -> Result<Self> {
        family.validate()?;
        let table = match family {
            DensityFamily::SymmetricStable { alpha, .. } if alpha != 1.0 && alpha != 2.0 => {
                Some(StableTable::get(alpha))
            }
            _ => None,
        };
        Ok(Self { family, table })
    }

    pub fn family(&self) -> &DensityFamily {
        &self.family
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            DensityFamily::Cauchy { mu, gamma } => {
                let z = (x - mu) / gamma;
                1.0 / (PI * gamma * (1.0 + z * z))
            }
            DensityFamily::StudentT { nu, location, scale } => {
                let z = (x - location) / scale;
                let log_c = ln_gamma(0.5 * (nu + 1.0)) - ln_gamma(0.5 * nu) - 0.5 * (nu * PI).ln();
                (log_c - 0.5 * (nu + 1.0) * (z * z / nu).ln_1p()).exp() / scale
            }
            DensityFamily::Gaussian { mean, sd } => {
                let z = (x - mean) / sd;
                (-0.5 * z * z).exp() / (sd * (2.0 * PI).sqrt())
            }
            DensityFamily::SymmetricStable { alpha, scale, location } => {
                let z = (x - location).abs() / scale;
                let standard = if alpha == 1.0 {
                    1.0 / (PI * (1.0 + z * z))
                } else if alpha == 2.0 {
                    (-0.25 * z * z).exp() / (4.0 * PI).sqrt()
                } else {
                    self.table
                        .as_ref()
                        .expect("stable table built at construction")
                        .density(z)
                };
                standard / scale
            }
            DensityFamily::Nig { alpha, beta, mu, delta } => {
                let dx = x - mu;
                let q = (delta * delta + dx * dx).sqrt();
                let gamma = (alpha * alpha - beta * beta).sqrt();
                let arg = alpha * q;
                let log_rest = delta * gamma + beta * dx - arg;
                alpha * delta * bessel_k1_scaled(arg) / (PI * q) * log_rest.exp()
            }
        }
    }

    /// Numerical integral of the density over the real line.
    pub fn total_mass(&self) -> Result<f64> {
        let cfg = QuadratureConfig {
            abs_tol: 1e-11,
            rel_tol: 1e-11,
            max_subdivisions: 8000,
            ..QuadratureConfig::default()
        };
        let mut points = vec![self.family.location()];
        if let DensityFamily::SymmetricStable { scale, location, .. } = self.family {
            let edge = stable::TABLE_HALF_WIDTH * scale;
            points.extend([location - edge, location + edge]);
        }
        Integrator::new(cfg)
            .breakpoints(&points)
            .real(|x| self.eval(x), Support::WholeLine)
            .map(|r| r.value)
    }
}

/// The distribution component `T` of a pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DistributionConfig", into = "DistributionConfig")]
pub enum GeneralizedDistribution {
    Density(Density),
    Atom { location: f64, weight: f64 },
    Mixture(Vec<(f64, GeneralizedDistribution)>),
}

impl GeneralizedDistribution {
    pub fn density(family: DensityFamily) -> Result<Self> {
        Density::new(family).map(GeneralizedDistribution::Density)
    }

    pub fn atom(location: f64, weight: f64) -> Result<Self> {
        domain(location.is_finite() && weight.is_finite() && weight != 0.0, || {
            format!("atom needs finite location and nonzero weight, got location={location}, weight={weight}")
        })?;
        Ok(GeneralizedDistribution::Atom { location, weight })
    }

    pub fn dirac(location: f64) -> Result<Self> {
        Self::atom(location, 1.0)
    }

    pub fn mixture(components: Vec<(f64, GeneralizedDistribution)>) -> Result<Self> {
        domain(!components.is_empty(), || "mixture needs at least one component".into())?;
        for (w, _) in &components {
            domain(w.is_finite() && *w != 0.0, || {
                format!("mixture weight must be finite and nonzero, got {w}")
            })?;
        }
        Ok(GeneralizedDistribution::Mixture(components))
    }

    /// True when some mixture weight is negative (not a probability law).
    pub fn is_signed(&self) -> bool {
        match self {
            GeneralizedDistribution::Density(_) => false,
            GeneralizedDistribution::Atom { weight, .. } => *weight < 0.0,
            GeneralizedDistribution::Mixture(parts) => parts.iter().any(|(w, d)| *w < 0.0 || d.is_signed()),
        }
    }

    pub fn has_atoms(&self) -> bool {
        match self {
            GeneralizedDistribution::Density(_) => false,
            GeneralizedDistribution::Atom { .. } => true,
            GeneralizedDistribution::Mixture(parts) => parts.iter().any(|(_, d)| d.has_atoms()),
        }
    }

    /// Centre of symmetry when every component is symmetric about the same point.
    pub fn symmetry_centre(&self) -> Option<f64> {
        match self {
            GeneralizedDistribution::Density(d) => d.family().symmetry_centre(),
            GeneralizedDistribution::Atom { location, .. } => Some(*location),
            GeneralizedDistribution::Mixture(parts) => {
                let centres: Vec<Option<f64>> = parts.iter().map(|(_, d)| d.symmetry_centre()).collect();
                let first = centres.first().copied().flatten()?;
                centres.iter().all(|c| *c == Some(first)).then_some(first)
            }
        }
    }

    /// Breakpoints worth splitting quadrature panels at.
    pub fn landmarks(&self) -> Vec<f64> {
        match self {
            GeneralizedDistribution::Density(d) => vec![d.family().location()],
            GeneralizedDistribution::Atom { .. } => vec![],
            GeneralizedDistribution::Mixture(parts) => parts.iter().flat_map(|(_, d)| d.landmarks()).collect(),
        }
    }

    /// Pointwise density for atom-free distributions.
    pub fn density_at(&self, x: f64) -> Result<f64> {
        match self {
            GeneralizedDistribution::Density(d) => Ok(d.eval(x)),
            GeneralizedDistribution::Atom { .. } => Err(Error::NotADensity("distribution has an atom".into())),
            GeneralizedDistribution::Mixture(parts) => {
                parts.iter().try_fold(0.0, |acc, (w, d)| Ok(acc + w * d.density_at(x)?))
            }
        }
    }

    /// Pushforward under `x -> b x + a`.
    pub fn affine(&self, a: f64, b: f64) -> Result<Self> {
        Ok(match self {
            GeneralizedDistribution::Density(d) => {
                GeneralizedDistribution::Density(Density::new_unchecked(d.family().affine(a, b)?)?)
            }
            GeneralizedDistribution::Atom { location, weight } => GeneralizedDistribution::Atom {
                location: b * location + a,
                weight: *weight,
            },
            GeneralizedDistribution::Mixture(parts) => GeneralizedDistribution::Mixture(
                parts
                    .iter()
                    .map(|(w, d)| Ok((*w, d.affine(a, b)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        })
    }
}

/// `weight * g(location)`, the exact pairing of an atom with a test function.
pub fn atom_pairing<V, G>(location: f64, weight: f64, g: G) -> V
where
    V: std::ops::Mul<f64, Output = V>,
    G: Fn(f64) -> V,
{
    g(location) * weight
}

fn one() -> f64 {
    1.0
}

/// Config-file form of a distribution: `{family = ..., <parameters>}`;
/// mixtures list `{weight, distribution}` components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum DistributionConfig {
    Cauchy {
        #[serde(default)]
        mu: f64,
        #[serde(default = "one")]
        gamma: f64,
    },
    StudentT {
        nu: f64,
        #[serde(default)]
        location: f64,
        #[serde(default = "one")]
        scale: f64,
    },
    Gaussian {
        #[serde(default)]
        mean: f64,
        #[serde(default = "one")]
        sd: f64,
    },
    SymmetricStable {
        alpha: f64,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        location: f64,
    },
    Nig {
        alpha: f64,
        #[serde(default)]
        beta: f64,
        #[serde(default)]
        mu: f64,
        #[serde(default = "one")]
        delta: f64,
    },
    Atom {
        #[serde(default)]
        location: f64,
        #[serde(default = "one")]
        weight: f64,
    },
    Mixture {
        components: Vec<MixtureComponent>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureComponent {
    pub weight: f64,
    pub distribution: DistributionConfig,
}

impl TryFrom<DistributionConfig> for GeneralizedDistribution {
    type Error = Error;

    fn try_from(cfg: DistributionConfig) -> Result<Self> {
        use DistributionConfig as C;
        match cfg {
            C::Cauchy { mu, gamma } => Self::density(DensityFamily::Cauchy { mu, gamma }),
            C::StudentT { nu, location, scale } => Self::density(DensityFamily::StudentT { nu, location, scale }),
            C::Gaussian { mean, sd } => Self::density(DensityFamily::Gaussian { mean, sd }),
            C::SymmetricStable { alpha, scale, location } => {
                Self::density(DensityFamily::SymmetricStable { alpha, scale, location })
            }
            C::Nig { alpha, beta, mu, delta } => Self::density(DensityFamily::Nig { alpha, beta, mu, delta }),
            C::Atom { location, weight } => Self::atom(location, weight),
            C::Mixture { components } => Self::mixture(
                components
                    .into_iter()
                    .map(|c| Ok((c.weight, Self::try_from(c.distribution)?)))
                    .collect::<Result<Vec<_>>>()?,
            ),
        }
    }
}

impl From<GeneralizedDistribution> for DistributionConfig {
    fn from(d: GeneralizedDistribution) -> Self {
        use DistributionConfig as C;
        match d {
            GeneralizedDistribution::Density(d) => match *d.family() {
                DensityFamily::Cauchy { mu, gamma } => C::Cauchy { mu, gamma },
                DensityFamily::StudentT { nu, location, scale } => C::StudentT { nu, location, scale },
                DensityFamily::Gaussian { mean, sd } => C::Gaussian { mean, sd },
                DensityFamily::SymmetricStable { alpha, scale, location } => {
                    C::SymmetricStable { alpha, scale, location }
                }
                DensityFamily::Nig { alpha, beta, mu, delta } => C::Nig { alpha, beta, mu, delta },
            },
            GeneralizedDistribution::Atom { location, weight } => C::Atom { location, weight },
            GeneralizedDistribution::Mixture(parts) => C::Mixture {
                components: parts
                    .into_iter()
                    .map(|(weight, d)| MixtureComponent {
                        weight,
                        distribution: d.into(),
                    })
                    .collect(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalogue() -> Vec<DensityFamily> {
        vec![
            DensityFamily::cauchy(0.0, 1.0),
            DensityFamily::cauchy(3.0, 0.5),
            DensityFamily::student_t(1.0),
            DensityFamily::student_t(3.0),
            DensityFamily::StudentT {
                nu: 5.0,
                location: -1.0,
                scale: 2.0,
            },
            DensityFamily::gaussian(0.0, 1.0),
            DensityFamily::gaussian(1.5, 0.3),
            DensityFamily::stable(1.5, 1.0, 0.0),
            DensityFamily::stable(0.8, 1.0, 0.0),
            DensityFamily::stable(1.0, 2.0, 0.5),
            DensityFamily::stable(2.0, 1.0, 0.0),
            DensityFamily::nig(2.0, 0.5, 0.0, 1.0),
            DensityFamily::nig(1.0, 0.0, 0.5, 0.7),
        ]
    }

    #[test]
    fn density_examples() {
        let c = Density::new(DensityFamily::cauchy(0.0, 1.0)).unwrap();
        assert!((c.eval(0.0) - 1.0 / PI).abs() < 1e-16);
        let t1 = Density::new(DensityFamily::student_t(1.0)).unwrap();
        assert!((t1.eval(0.0) - 1.0 / PI).abs() < 1e-15);
        // Gamma(1 + 2/3) / pi from the inversion oracle (mpmath, 50 digits)
        let s = Density::new(DensityFamily::stable(1.5, 1.0, 0.0)).unwrap();
        assert!((s.eval(0.0) - 0.287_352_751_452_164_43).abs() < 1e-10);
    }

    #[test]
    fn normalisation() {
        for fam in catalogue() {
            let d = Density::new_unchecked(fam).unwrap();
            let m = d.total_mass().unwrap();
            assert!((m - 1.0).abs() <= 1e-8, "{fam:?}: {m}");
        }
    }

    #[test]
    fn symmetric_families_are_exactly_symmetric() {
        let syms = [
            DensityFamily::cauchy(0.0, 2.0),
            DensityFamily::student_t(3.0),
            DensityFamily::stable(1.5, 1.0, 0.0),
            DensityFamily::stable(0.8, 1.0, 0.0),
            DensityFamily::gaussian(0.0, 0.7),
        ];
        for fam in syms {
            let d = Density::new_unchecked(fam).unwrap();
            for i in 0..200 {
                let x = 0.173 * i as f64;
                assert_eq!(d.eval(x), d.eval(-x), "{fam:?} at {x}");
            }
        }
    }

    #[test]
    fn parameter_domains() {
        let bad = [
            DensityFamily::cauchy(0.0, 0.0),
            DensityFamily::student_t(-1.0),
            DensityFamily::gaussian(0.0, -1.0),
            DensityFamily::stable(2.5, 1.0, 0.0),
            DensityFamily::nig(1.0, 1.0, 0.0, 1.0),
        ];
        for fam in bad {
            assert!(
                matches!(Density::new(fam), Err(Error::ParameterOutOfDomain(_))),
                "{fam:?}"
            );
        }
        assert!(GeneralizedDistribution::atom(0.0, 0.0).is_err());
        assert!(GeneralizedDistribution::mixture(vec![]).is_err());
    }

    #[test]
    fn affine_maps_match_change_of_variables() {
        for fam in catalogue() {
            let d = Density::new_unchecked(fam).unwrap();
            for (a, b) in [(0.5, 2.0), (-1.0, -0.5)] {
                let mapped = Density::new_unchecked(fam.affine(a, b).unwrap()).unwrap();
                for &x in &[-2.0, -0.3, 0.0, 0.8, 3.1] {
                    let want = d.eval((x - a) / b) / b.abs();
                    let got = mapped.eval(x);
                    assert!((want - got).abs() < 1e-12 * (1.0 + want), "{fam:?} a={a} b={b} x={x}");
                }
            }
        }
    }

    #[test]
    fn atom_pairing_examples() {
        let zero_kernel = |x: f64| x * x * (-0.5 * x * x).exp();
        assert_eq!(atom_pairing(0.0, 1.0, zero_kernel), 0.0);
        let v: f64 = atom_pairing(2.0, 1.0, |x: f64| x * (-0.5 * x * x).exp());
        assert!((v - 2.0 * (-2.0f64).exp()).abs() < 1e-16);
        assert_eq!(atom_pairing(1.0, 3.0, |_| 1.0), 3.0);
    }

    #[test]
    fn nig_matches_reference() {
        // NIG(2, 0.5, 0, 1) at x = 0.3 from mpmath besselk
        let d = Density::new(DensityFamily::nig(2.0, 0.5, 0.0, 1.0)).unwrap();
        let x: f64 = 0.3;
        let q = (1.0 + x * x).sqrt();
        let gamma = (4.0f64 - 0.25).sqrt();
        let k1 = crate::special::bessel_k1(2.0 * q);
        let want = 2.0 * k1 / (PI * q) * (gamma + 0.5 * x).exp();
        assert!((d.eval(x) - want).abs() < 1e-14);
    }

    #[test]
    fn config_forms() {
        let json = r#"{"family":"mixture","components":[
            {"weight":1.0,"distribution":{"family":"cauchy"}},
            {"weight":-0.5,"distribution":{"family":"atom","location":0.0}}]}"#;
        let d: GeneralizedDistribution = serde_json::from_str(json).unwrap();
        assert!(d.is_signed());
        assert!(d.has_atoms());
        let back: GeneralizedDistribution = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
        assert_eq!(d, back);
        let bad = r#"{"family":"cauchy","gamma":-1}"#;
        assert!(serde_json::from_str::<GeneralizedDistribution>(bad).is_err());
    }
}
