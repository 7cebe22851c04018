use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weakcalc::{
    clt_run, estimate_location, recover_from_weak_moments, sample, weak_cf_grid, weak_cumulants, weak_moments,
    DensityFamily, KernelSpec, LocationModel, TikhonovProblem,
};
use weakcalc_bench::{cauchy, pair};

fn moments(c: &mut Criterion) {
    let mut g = c.benchmark_group("weak_moments");
    for (name, fam) in [
        ("cauchy", DensityFamily::cauchy(0.0, 1.0)),
        ("student_t3", DensityFamily::student_t(3.0)),
        ("stable_1.5", DensityFamily::stable(1.5, 1.0, 0.0)),
        ("nig", DensityFamily::nig(2.0, 0.5, 0.0, 1.0)),
    ] {
        // A fresh pair each time so cached absolute moments are not reused.
        g.bench_with_input(BenchmarkId::from_parameter(name), &fam, |b, fam| {
            b.iter(|| weak_moments(&pair(*fam), black_box(10)).unwrap())
        });
    }
    g.finish();
}

fn transforms(c: &mut Criterion) {
    c.bench_function("weak_cf_grid 121", |b| {
        b.iter(|| weak_cf_grid(&cauchy(), 3.0, 121).unwrap())
    });
    c.bench_function("weak_cumulants 6", |b| {
        b.iter(|| weak_cumulants(&cauchy().normalised().unwrap(), 6).unwrap())
    });
    let p = cauchy().normalised().unwrap();
    c.bench_function("clt_run 4 x 121", |b| {
        b.iter(|| clt_run(&p, &[100, 1000, 10_000, 100_000], 3.0, 121).unwrap())
    });
}

fn inverse(c: &mut Criterion) {
    let m = weak_moments(&pair(DensityFamily::gaussian(0.0, 1.0)), 20).unwrap();
    c.bench_function("recover N=20", |b| {
        b.iter(|| recover_from_weak_moments(&m, 20).unwrap())
    });
    let prob = TikhonovProblem::new(KernelSpec::standard_gaussian(), DensityFamily::gaussian(0.0, 1.0)).unwrap();
    c.bench_function("tikhonov solve", |b| {
        b.iter(|| prob.solve(None, black_box(1e-3)).unwrap())
    });
}

fn estimator(c: &mut Criterion) {
    let model = LocationModel::new(1.0).unwrap();
    let dist = weakcalc::GeneralizedDistribution::density(DensityFamily::cauchy(0.3, 1.0)).unwrap();
    let xs = sample(&dist, 10_000, &mut ChaCha8Rng::seed_from_u64(7)).unwrap();
    c.bench_function("estimate_location n=1e4", |b| {
        b.iter(|| estimate_location(&xs, &model).unwrap())
    });
}

criterion_group!(benches, moments, transforms, inverse, estimator);
criterion_main!(benches);
