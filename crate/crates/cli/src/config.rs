//! Run configuration: one TOML file with `[distribution]`, `[kernel]`,
//! `[quadrature]` and `[experiment]` sections, overridable from the command
//! line with `--set section.key=value`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use weakcalc::distributions::DistributionConfig;
use weakcalc::kernels::KernelConfig;
use weakcalc::{GeneralizedDistribution, KernelSpec, QuadratureConfig, WeakPair};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_distribution")]
    pub distribution: DistributionConfig,
    #[serde(default = "default_kernel")]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    #[serde(default)]
    pub experiment: Experiment,
}

/// Parameters of the individual experiments. Unset fields take the
/// subcommand's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_list: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    /// Recovery order `N`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<usize>,
    /// Weighted-CDF evaluation point.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambdas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_true: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_max: Option<usize>,
    /// Normalise the pair before computing cumulants or CLT quantities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub normalise: Option<bool>,
}

fn default_distribution() -> DistributionConfig {
    DistributionConfig::Cauchy { mu: 0.0, gamma: 1.0 }
}

fn default_kernel() -> KernelConfig {
    KernelSpec::standard_gaussian().into()
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            distribution: default_distribution(),
            kernel: default_kernel(),
            quadrature: QuadratureConfig::default(),
            experiment: Experiment::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path` (if any), applies `overrides` in order and validates.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut doc = toml::Table::try_from(RunConfig::default()).map_err(|e| CliError::Config(e.to_string()))?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?;
            let file = text
                .parse::<toml::Table>()
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            for (section, value) in file {
                match value {
                    toml::Value::Table(t) => merge_section(&mut doc, &section, t),
                    other => {
                        doc.insert(section, other);
                    }
                }
            }
        }
        for o in overrides {
            apply_override(&mut doc, o)?;
        }
        let cfg: RunConfig = toml::Value::Table(doc)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        cfg.distribution()?;
        cfg.kernel()?;
        Ok(cfg)
    }

    pub fn distribution(&self) -> Result<GeneralizedDistribution, CliError> {
        GeneralizedDistribution::try_from(self.distribution.clone())
            .map_err(|e| CliError::Config(format!("[distribution]: {e}")))
    }

    pub fn kernel(&self) -> Result<KernelSpec, CliError> {
        KernelSpec::try_from(self.kernel.clone()).map_err(|e| CliError::Config(format!("[kernel]: {e}")))
    }

    pub fn pair(&self) -> Result<WeakPair, CliError> {
        Ok(WeakPair::new(self.distribution()?, self.kernel()?).with_quadrature(self.quadrature))
    }
}

/// Merges `incoming` into `doc[section]`. Choosing a different `family`
/// discards the previous family's parameters instead of mixing them in.
fn merge_section(doc: &mut toml::Table, section: &str, incoming: toml::Table) {
    let current = doc.get(section).and_then(|v| v.as_table());
    let family_changed = match (current.and_then(|t| t.get("family")), incoming.get("family")) {
        (Some(old), Some(new)) => old != new,
        _ => false,
    };
    let mut merged = if family_changed {
        toml::Table::new()
    } else {
        current.cloned().unwrap_or_default()
    };
    merged.extend(incoming);
    doc.insert(section.to_string(), toml::Value::Table(merged));
}

/// `section.key=value`; the value is parsed as a TOML value, falling back to
/// a bare string.
fn apply_override(doc: &mut toml::Table, spec: &str) -> Result<(), CliError> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("--set expects section.key=value, got `{spec}`")))?;
    let keys: Vec<&str> = path.trim().split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Config(format!("--set: bad key path `{path}`")));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.trim().to_string()));
    if let [section, key] = keys[..] {
        if doc.get(section).is_none_or(|v| v.is_table()) {
            merge_section(doc, section, toml::Table::from_iter([(key.to_string(), value)]));
            return Ok(());
        }
    }
    let (last, parents) = keys.split_last().unwrap();
    let mut table = doc;
    for k in parents {
        let entry = table
            .entry(k.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        table = entry
            .as_table_mut()
            .ok_or_else(|| CliError::Config(format!("--set: `{k}` is not a table")))?;
    }
    table.insert(last.to_string(), value);
    Ok(())
}
