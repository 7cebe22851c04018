//! One function per subcommand; each returns named tables for the writer.

use weakcalc::asymptotics::{clt_run, distributional_clt_ks, weighted_density, DEFAULT_T_MAX, DEFAULT_T_POINTS};
use weakcalc::inverse::{weighted_cdf_direct, DEFAULT_EPS_SCHEDULE, DEFAULT_LAMBDAS};
use weakcalc::quadrature::uniform_grid;
use weakcalc::{
    carleman_partial_sums, gevrey_diagnostic, monte_carlo_study, recover_from_weak_moments, tikhonov_noisy,
    weak_cf_grid, weak_cgf, weak_cumulants, weak_moments, weighted_cdf, Cell, GeneralizedDistribution, Table,
    TikhonovProblem, WeakPair,
};

use crate::config::RunConfig;
use crate::{CliError, Command};

pub type Output = Vec<(Option<&'static str>, Table)>;

pub fn execute(cmd: Command, cfg: &RunConfig, seed: u64) -> Result<Output, CliError> {
    let e = &cfg.experiment;
    match cmd {
        Command::Moments => Ok(single(weak_moments(&cfg.pair()?, e.n_max.unwrap_or(10))?.to_table())),
        Command::Cf => {
            let grid = weak_cf_grid(
                &cfg.pair()?,
                e.t_max.unwrap_or(DEFAULT_T_MAX),
                e.n_points.unwrap_or(DEFAULT_T_POINTS),
            )?;
            Ok(single(weak_cgf(grid)?.to_table()))
        }
        Command::Cumulants => cumulants(cfg),
        Command::Clt => {
            let p = maybe_normalised(cfg)?;
            let n_list = e.n_list.clone().unwrap_or_else(|| vec![100, 1000, 10_000, 100_000]);
            let run = clt_run(
                &p,
                &n_list,
                e.t_max.unwrap_or(DEFAULT_T_MAX),
                e.n_points.unwrap_or(DEFAULT_T_POINTS),
            )?;
            let mut summary = Table::new(["kappa1", "kappa2", "m_t", "fitted_slope", "bound_holds"]);
            summary.push(vec![
                run.kappa1.into(),
                run.kappa2.into(),
                run.m_t.into(),
                run.fitted_slope.into(),
                run.bound_holds().into(),
            ]);
            Ok(vec![(None, run.to_table()), (Some("summary"), summary)])
        }
        Command::Distclt => distclt(cfg, seed),
        Command::Recover => recover(cfg),
        Command::Cdf => cdf(cfg),
        Command::Tikhonov => tikhonov(cfg, seed),
        Command::Estimate => {
            let n_list: Vec<usize> = e
                .n_list
                .clone()
                .unwrap_or_else(|| vec![100, 1000, 10_000])
                .into_iter()
                .map(|n| n as usize)
                .collect();
            let study = monte_carlo_study(
                e.mu_true.unwrap_or(0.0),
                e.sigma.unwrap_or(1.0),
                &n_list,
                e.reps.unwrap_or(500),
                seed,
            )?;
            Ok(single(study.to_table()))
        }
        Command::Gevrey => gevrey(cfg),
        Command::Carleman => {
            let r = carleman_partial_sums(&cfg.kernel()?, e.n_max.unwrap_or(30), &cfg.quadrature)?;
            let mut fit = Table::new(["fitted_exponent"]);
            fit.push(vec![r.fitted_exponent.into()]);
            Ok(vec![(None, r.to_table()), (Some("fit"), fit)])
        }
    }
}

fn single(t: Table) -> Output {
    vec![(None, t)]
}

fn maybe_normalised(cfg: &RunConfig) -> Result<WeakPair, CliError> {
    let p = cfg.pair()?;
    Ok(if cfg.experiment.normalise.unwrap_or(true) {
        p.normalised()?
    } else {
        p
    })
}

fn density_family(cfg: &RunConfig) -> Result<weakcalc::DensityFamily, CliError> {
    match cfg.distribution()? {
        GeneralizedDistribution::Density(d) => Ok(*d.family()),
        _ => Err(CliError::Config(
            "[distribution]: this subcommand needs a single density family".into(),
        )),
    }
}

fn cumulants(cfg: &RunConfig) -> Result<Output, CliError> {
    let k = weak_cumulants(&maybe_normalised(cfg)?, cfg.experiment.n_max.unwrap_or(6))?;
    let mut t = Table::new(["n", "kappa_n", "base_normalisation"]);
    for (i, v) in k.values.iter().enumerate() {
        t.push(vec![(i + 1).into(), (*v).into(), k.base_normalisation.into()]);
    }
    Ok(single(t))
}

fn distclt(cfg: &RunConfig, seed: u64) -> Result<Output, CliError> {
    let e = &cfg.experiment;
    let h = weighted_density(&cfg.pair()?)?;
    let reps = e.reps.unwrap_or(100_000);
    let mut t = Table::new(["n", "reps", "ks"]);
    for n in e.n_list.clone().unwrap_or_else(|| vec![10, 100, 1000]) {
        t.push(vec![
            (n as usize).into(),
            reps.into(),
            distributional_clt_ks(&h, n as usize, reps, seed)?.into(),
        ]);
    }
    let mut s = Table::new(["mean", "variance", "kappa1", "kappa2", "envelope"]);
    s.push(vec![
        h.mean.into(),
        h.variance.into(),
        h.kappa1.into(),
        h.kappa2.into(),
        h.envelope.into(),
    ]);
    Ok(vec![(None, t), (Some("summary"), s)])
}

fn recover(cfg: &RunConfig) -> Result<Output, CliError> {
    let order = cfg.experiment.order.unwrap_or(20);
    let dist = cfg.distribution()?;
    let m = weak_moments(&cfg.pair()?, order)?;
    let mut r = recover_from_weak_moments(&m, order)?;
    let truth = |x: f64| dist.density_at(x).unwrap_or(f64::NAN);
    let has_density = matches!(dist, GeneralizedDistribution::Density(_));
    if has_density {
        r = r.with_truth(truth);
    }
    let mut s = Table::new(["order", "l2_error", "condition_estimate", "residual"]);
    s.push(vec![
        order.into(),
        r.l2_error.unwrap_or(f64::NAN).into(),
        r.condition_estimate.into(),
        r.residual.into(),
    ]);
    let grid = r.grid_table(-10.0, 10.0, 0.05, has_density.then_some(truth));
    Ok(vec![
        (Some("summary"), s),
        (Some("coefficients"), r.coefficient_table()),
        (Some("grid"), grid),
    ])
}

fn cdf(cfg: &RunConfig) -> Result<Output, CliError> {
    let e = &cfg.experiment;
    let p = cfg.pair()?;
    let eps = e.eps.clone().unwrap_or_else(|| DEFAULT_EPS_SCHEDULE.to_vec());
    let r = weighted_cdf(&p, e.a.unwrap_or(0.5), &eps)?;
    let mut grid = Table::new(["a", "f_phi"]);
    for a in uniform_grid(-10.0, 10.0, 0.5) {
        grid.push(vec![a.into(), weighted_cdf_direct(&p, a)?.into()]);
    }
    Ok(vec![(None, r.to_table()), (Some("grid"), grid)])
}

fn tikhonov(cfg: &RunConfig, seed: u64) -> Result<Output, CliError> {
    let e = &cfg.experiment;
    let prob = TikhonovProblem::new(cfg.kernel()?, density_family(cfg)?)?;
    let lambdas = e.lambdas.clone().unwrap_or_else(|| DEFAULT_LAMBDAS.to_vec());
    let deltas = e.deltas.clone().unwrap_or_else(|| vec![0.0, 1e-2, 1e-3, 1e-4]);
    let mut t = Table::new([
        "delta",
        "lambda",
        "l2_error",
        "bound",
        "bias_term",
        "noise_term",
        "bound_holds",
    ]);
    for &delta in &deltas {
        for &lambda in &lambdas {
            let r = tikhonov_noisy(&prob, delta, lambda, seed)?;
            t.push(vec![
                delta.into(),
                lambda.into(),
                r.l2_error.into(),
                r.bound_value.into(),
                r.bias_term.into(),
                r.noise_term.into(),
                r.bound_holds().into(),
            ]);
        }
    }
    Ok(single(t))
}

fn gevrey(cfg: &RunConfig) -> Result<Output, CliError> {
    let e = &cfg.experiment;
    let d = gevrey_diagnostic(&cfg.kernel()?, e.k_max.unwrap_or(10), e.m_max.unwrap_or(2))?;
    let mut sups = Table::new(["m", "k", "log_sup", "interior"]);
    let mut fits = Table::new(["m", "beta", "fitted_a", "fitted_c", "finite"]);
    for row in &d.rows {
        for (k, (v, i)) in row.log_sup.iter().zip(&row.interior).enumerate() {
            sups.push(vec![row.m.into(), k.into(), (*v).into(), (*i).into()]);
        }
        fits.push(vec![
            row.m.into(),
            d.beta.into(),
            row.fitted_a.into(),
            row.fitted_c.into(),
            Cell::from(d.finite_a),
        ]);
    }
    Ok(vec![(None, sups), (Some("fit"), fits)])
}
