//! Shared fixtures for the criterion benches.

use weakcalc::{DensityFamily, GeneralizedDistribution, KernelSpec, WeakPair};

pub fn pair(family: DensityFamily) -> WeakPair {
    WeakPair::new(
        GeneralizedDistribution::density(family).expect("valid family"),
        KernelSpec::standard_gaussian(),
    )
}

pub fn cauchy() -> WeakPair {
    pair(DensityFamily::cauchy(0.0, 1.0))
}
