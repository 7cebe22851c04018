use std::f64::consts::FRAC_PI_2;

use rand::Rng;
use rand_distr::{Cauchy, Distribution, Exp1, InverseGaussian, Normal, StandardNormal, StudentT};

use super::{DensityFamily, GeneralizedDistribution};
use crate::error::{Error, Result};

/// Draws `n` samples. Only probability laws (densities, unit atoms and
/// mixtures with positive weights) can be sampled.
pub fn sample<R: Rng + ?Sized>(dist: &GeneralizedDistribution, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    match dist {
        GeneralizedDistribution::Density(d) => sample_family(d.family(), n, rng),
        GeneralizedDistribution::Atom { location, weight } => {
            if *weight != 1.0 {
                return Err(Error::NotADensity(format!(
                    "atom with weight {weight} is not a probability law"
                )));
            }
            Ok(vec![*location; n])
        }
        GeneralizedDistribution::Mixture(parts) => {
            if dist.is_signed() {
                return Err(Error::NotADensity("signed mixture cannot be sampled".into()));
            }
            let total: f64 = parts.iter().map(|(w, _)| w).sum();
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                let mut u = rng.gen::<f64>() * total;
                let mut pick = &parts[parts.len() - 1].1;
                for (w, d) in parts {
                    if u < *w {
                        pick = d;
                        break;
                    }
                    u -= w;
                }
                out.extend(sample(pick, 1, rng)?);
            }
            Ok(out)
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::ParameterOutOfDomain(e.to_string())
}

fn sample_family<R: Rng + ?Sized>(fam: &DensityFamily, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    fam.validate()?;
    Ok(match *fam {
        DensityFamily::Cauchy { mu, gamma } => {
            let d = Cauchy::new(mu, gamma).map_err(invalid)?;
            (0..n).map(|_| d.sample(rng)).collect()
        }
        DensityFamily::StudentT { nu, location, scale } => {
            let d = StudentT::new(nu).map_err(invalid)?;
            (0..n).map(|_| location + scale * d.sample(rng)).collect()
        }
        DensityFamily::Gaussian { mean, sd } => {
            let d = Normal::new(mean, sd).map_err(invalid)?;
            (0..n).map(|_| d.sample(rng)).collect()
        }
        DensityFamily::SymmetricStable { alpha, scale, location } => {
            (0..n).map(|_| location + scale * standard_stable(alpha, rng)).collect()
        }
        DensityFamily::Nig { alpha, beta, mu, delta } => {
            // Normal variance-mean mixture with inverse Gaussian mixing law.
            let gamma = (alpha * alpha - beta * beta).sqrt();
            let ig = InverseGaussian::new(delta / gamma, delta * delta).map_err(invalid)?;
            (0..n)
                .map(|_| {
                    let z: f64 = ig.sample(rng);
                    let g: f64 = StandardNormal.sample(rng);
                    mu + beta * z + z.sqrt() * g
                })
                .collect()
        }
    })
}

/// Chambers–Mallows–Stuck draw from the law with CF `exp(-|t|^alpha)`.
fn standard_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    let v = (rng.gen::<f64>() - 0.5) * 2.0 * FRAC_PI_2;
    if alpha == 1.0 {
        return v.tan();
    }
    let w: f64 = Exp1.sample(rng);
    (alpha * v).sin() / v.cos().powf(1.0 / alpha) * (((1.0 - alpha) * v).cos() / w).powf((1.0 - alpha) / alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Density;
    use crate::quadrature::{integrate, QuadratureConfig, Support};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    /// Chi-square goodness of fit on 40 equiprobable-ish bins between the
    /// 1% and 99% sample quantiles plus two tail bins.
    fn chi_square_p(fam: DensityFamily, seed: u64) -> f64 {
        let n = 100_000;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = GeneralizedDistribution::Density(Density::new_unchecked(fam).unwrap());
        let mut xs = sample(&dist, n, &mut rng).unwrap();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = xs[n / 100];
        let hi = xs[n - n / 100];
        let bins = 40;
        let mut edges: Vec<f64> = (0..=bins).map(|i| lo + (hi - lo) * i as f64 / bins as f64).collect();
        edges.insert(0, f64::NEG_INFINITY);
        edges.push(f64::INFINITY);
        let d = Density::new_unchecked(fam).unwrap();
        let cfg = QuadratureConfig::default();
        let mut stat = 0.0;
        for w in edges.windows(2) {
            let p = if w[0].is_finite() && w[1].is_finite() {
                integrate(|x| d.eval(x), Support::interval(w[0], w[1]), &cfg)
                    .unwrap()
                    .value
            } else {
                let edge = if w[0].is_finite() { w[0] } else { w[1] };
                tail_mass(&d, edge, w[0].is_finite())
            };
            let count = xs.iter().filter(|&&x| x > w[0] && x <= w[1]).count() as f64;
            let expected = p * n as f64;
            stat += (count - expected).powi(2) / expected;
        }
        let dof = (edges.len() - 2) as f64;
        1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
    }

    fn tail_mass(d: &Density, edge: f64, upper: bool) -> f64 {
        // substitute x = edge ± s/(1-s), s in (0,1)
        let cfg = QuadratureConfig::default();
        let sign = if upper { 1.0 } else { -1.0 };
        integrate(
            |s| {
                let x = edge + sign * s / (1.0 - s);
                d.eval(x) / ((1.0 - s) * (1.0 - s))
            },
            Support::interval(0.0, 1.0),
            &cfg,
        )
        .unwrap()
        .value
    }

    #[test]
    fn samplers_pass_goodness_of_fit() {
        let fams = [
            DensityFamily::cauchy(0.5, 2.0),
            DensityFamily::student_t(3.0),
            DensityFamily::gaussian(-1.0, 0.5),
            DensityFamily::stable(1.5, 1.0, 0.0),
            DensityFamily::stable(0.8, 1.0, 0.0),
            DensityFamily::stable(1.0, 1.0, 0.0),
            DensityFamily::nig(2.0, 0.5, 0.0, 1.0),
        ];
        for (i, fam) in fams.into_iter().enumerate() {
            let p = chi_square_p(fam, 1000 + i as u64);
            assert!(p > 1e-3, "{fam:?}: p = {p}");
        }
    }

    #[test]
    fn sampling_is_reproducible() {
        let d = GeneralizedDistribution::density(DensityFamily::nig(1.5, -0.3, 0.2, 0.8)).unwrap();
        let a = sample(&d, 50, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        let b = sample(&d, 50, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn signed_mixture_is_rejected() {
        let d = GeneralizedDistribution::mixture(vec![
            (
                1.5,
                GeneralizedDistribution::density(DensityFamily::gaussian(0.0, 1.0)).unwrap(),
            ),
            (-0.5, GeneralizedDistribution::dirac(0.0).unwrap()),
        ])
        .unwrap();
        assert!(sample(&d, 1, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn sample_statistics() {
        let n = 100_000;
        let draw = |fam, seed| {
            let d = GeneralizedDistribution::density(fam).unwrap();
            sample(&d, n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
        };
        let g = draw(DensityFamily::gaussian(0.0, 1.0), 7);
        assert!(crate::stats::mean(&g).unwrap().abs() < 4.0 / (n as f64).sqrt());
        let c = draw(DensityFamily::cauchy(3.0, 1.0), 7);
        assert!((crate::stats::median(&c).unwrap() - 3.0).abs() < 0.02);
        let st = draw(DensityFamily::stable(1.5, 1.0, 0.0), 7);
        let ecf = st.iter().map(|x| x.cos()).sum::<f64>() / n as f64;
        let ecf_im = st.iter().map(|x| x.sin()).sum::<f64>() / n as f64;
        assert!((ecf - (-1.0f64).exp()).abs() < 0.01 && ecf_im.abs() < 0.01);
    }
}
