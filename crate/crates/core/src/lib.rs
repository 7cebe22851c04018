//! Kernel-weighted ("weak") moments, characteristic functions and cumulants
//! of distributions that may have no classical moments at all.
//!
//! A pair `(T, phi)` of a distribution and a rapidly decaying kernel has
//! moments `m_n = <T, x^n phi>` of every order. On top of that sit uniqueness
//! and recovery from moment sequences, a transform-space central limit
//! theorem, weighted-CDF and Tikhonov inversion, and a location estimator for
//! the Cauchy model.
//!
//! ```
//! use weakcalc::{DensityFamily, GeneralizedDistribution, KernelSpec, WeakPair};
//!
//! let cauchy = GeneralizedDistribution::density(DensityFamily::cauchy(0.0, 1.0)).unwrap();
//! let pair = WeakPair::new(cauchy, KernelSpec::standard_gaussian());
//! let m = weakcalc::weak_moments(&pair, 2).unwrap();
//! assert!((m.values[0] - 0.523).abs() < 1e-3);
//! ```

pub mod asymptotics;
pub mod distributions;
pub mod error;
pub mod estimators;
pub mod inverse;
pub mod io;
pub mod kernels;
pub mod momentproblem;
pub mod quadrature;
pub mod special;
pub mod stats;
pub mod weakcore;

pub use asymptotics::{
    berry_esseen_bound, clt_run, clt_sup_error, distributional_clt_ks, normalized_sum_cf, sample_weighted,
    weighted_density, BerryEsseenBound, CltRun, NormalisedSum, WeightedDensity,
};
pub use distributions::{atom_pairing, sample, Density, DensityFamily, DistributionConfig, GeneralizedDistribution};
pub use error::{Error, Result};
pub use estimators::{
    empirical_weak_m1, estimate_location, monte_carlo_study, theoretical_weak_m1, LocationModel, McStudy,
};
pub use inverse::{
    tikhonov_apply, tikhonov_noisy, weighted_cdf, MollifiedIndicator, Tikhonov, TikhonovProblem, TikhonovResult,
    WeightedCdf,
};
pub use io::{Cell, Table};
pub use kernels::{gevrey_diagnostic, DecayOrder, GevreyDiagnostic, KernelConfig, KernelFamily, KernelSpec};
pub use momentproblem::{
    carleman_partial_sums, hermite_function, kernel_zero_obstruction, monomial_hermite_matrix, recover_2d,
    recover_from_weak_moments, CarlemanResult, HermiteBasis, Moments2d, ProductDensity2d, RecoveryResult,
    RecoveryResult2d, Spd2,
};
pub use quadrature::{integrate, integrate_complex, IntegralResult, Integrator, QuadratureConfig, Support};
pub use weakcore::{
    cumulants_from_moments, moments_from_cf, sum_cf, weak_cf, weak_cf_grid, weak_cgf, weak_cumulants, weak_expectation,
    weak_moment, weak_moments, CumulantSequence, MomentSequence, ProductPair, TransformGrid, WeakPair,
};
