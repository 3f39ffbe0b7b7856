//! TOML run configuration.
//!
//! Tier indices in the document are 1-based, matching the CSV columns.
//! Thresholds are given in dB and converted to linear once, here.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernels::{OffspringKernel, DEFAULT_TAIL_SIGMAS};
use crate::model::{db_to_linear, NetworkModel, TierKind, TierSpec, UserModel};
use crate::pointprocess::WindowPolicy;
use crate::quadrature::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Engines {
    Analytic,
    #[serde(alias = "montecarlo")]
    #[value(alias = "montecarlo")]
    Mc,
    Both,
}

impl Engines {
    pub fn analytic(self) -> bool {
        matches!(self, Engines::Analytic | Engines::Both)
    }

    pub fn mc(self) -> bool {
        matches!(self, Engines::Mc | Engines::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawTier {
    Poisson {
        density: f64,
        power: f64,
    },
    Cluster {
        parent_density: f64,
        mean_size: f64,
        kernel: OffspringKernel,
        power: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RawUser {
    Type1,
    Type2 {
        /// 1-based index of the coupled cluster tier.
        q: usize,
        /// Defaults to tier `q`'s kernel and then follows it through sweeps.
        #[serde(default)]
        user_kernel: Option<OffspringKernel>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawNetwork {
    pub alpha: f64,
    #[serde(default)]
    pub noise: f64,
    pub tiers: Vec<RawTier>,
    #[serde(default = "default_user")]
    pub user: RawUser,
}

fn default_user() -> RawUser {
    RawUser::Type1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSweep {
    #[serde(default)]
    pub tau_db: Option<Vec<f64>>,
    #[serde(default)]
    pub sigma_m: Option<Vec<f64>>,
    #[serde(default)]
    pub parent_density_ratio: Option<Vec<f64>>,
    /// Common threshold for the σ and density-ratio axes.
    #[serde(default)]
    pub threshold_db: f64,
    /// 1-based cluster tier the σ or ratio axis acts on; default: the first.
    #[serde(default)]
    pub cluster_tier: Option<usize>,
    /// 1-based Poisson tier whose density the ratio divides; default: the first.
    #[serde(default)]
    pub reference_tier: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMc {
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Meters; defaults to the network-dependent window.
    #[serde(default)]
    pub sim_radius: Option<f64>,
    #[serde(default)]
    pub parent_margin_sigmas: Option<f64>,
    #[serde(default)]
    pub convergence_check: bool,
}

fn default_trials() -> u64 {
    100_000
}

fn default_seed() -> u64 {
    1
}

impl Default for RawMc {
    fn default() -> Self {
        Self {
            trials: default_trials(),
            seed: default_seed(),
            sim_radius: None,
            parent_margin_sigmas: None,
            convergence_check: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAnalytic {
    #[serde(default = "default_tail")]
    pub z_truncation_multiplier: f64,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
}

fn default_tail() -> f64 {
    DEFAULT_TAIL_SIGMAS
}

impl Default for RawAnalytic {
    fn default() -> Self {
        Self {
            z_truncation_multiplier: default_tail(),
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    #[serde(default = "default_csv")]
    pub csv: PathBuf,
    #[serde(default = "default_json")]
    pub json: PathBuf,
    #[serde(default = "default_svg")]
    pub svg: PathBuf,
    /// Fill the `wall_ms` column. Off makes reruns byte-identical.
    #[serde(default = "default_timing")]
    pub timing: bool,
}

fn default_csv() -> PathBuf {
    "coverage.csv".into()
}

fn default_json() -> PathBuf {
    "coverage.json".into()
}

fn default_svg() -> PathBuf {
    "coverage.svg".into()
}

fn default_timing() -> bool {
    true
}

impl Default for RawOutput {
    fn default() -> Self {
        Self {
            csv: default_csv(),
            json: default_json(),
            svg: default_svg(),
            timing: default_timing(),
        }
    }
}

/// The document as written.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub network: RawNetwork,
    pub sweep: RawSweep,
    #[serde(default = "default_engines")]
    pub engines: Engines,
    #[serde(default)]
    pub execution: Execution,
    #[serde(default)]
    pub mc: RawMc,
    #[serde(default)]
    pub analytic: RawAnalytic,
    #[serde(default)]
    pub output: RawOutput,
}

fn default_engines() -> Engines {
    Engines::Both
}

/// What the sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    TauDb,
    SigmaM,
    ParentDensityRatio,
}

impl Axis {
    pub fn label(self) -> &'static str {
        match self {
            Axis::TauDb => "tau_db",
            Axis::SigmaM => "sigma_m",
            Axis::ParentDensityRatio => "parent_density_ratio",
        }
    }
}

/// One evaluation point of the sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub tau_db: f64,
    /// Linear threshold, the same for every tier.
    pub tau: f64,
    pub net: NetworkModel,
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub base: NetworkModel,
    pub axis: Axis,
    pub points: Vec<SweepPoint>,
    pub engines: Engines,
    pub execution: Execution,
    pub trials: u64,
    pub seed: u64,
    pub window: Option<WindowPolicy>,
    pub quad: QuadratureConfig,
    pub z_truncation_multiplier: f64,
    pub output: RawOutput,
}

impl RunConfig {
    /// Window for one network: the configured radius or the default for it.
    pub fn window_for(&self, net: &NetworkModel) -> WindowPolicy {
        let mut w = self
            .window
            .unwrap_or_else(|| WindowPolicy::default_for(net));
        if let Some(m) = self.raw.mc.parent_margin_sigmas {
            w.parent_margin_sigmas = m;
        }
        w.convergence_check = self.raw.mc.convergence_check;
        w
    }
}

/// Parses and validates a TOML document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let path = e
            .span()
            .map(|s| format!("byte {}..{}", s.start, s.end))
            .unwrap_or_else(|| "document".into());
        Error::config(path, e.message().to_string())
    })?;
    validate(raw)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), format!("cannot read: {e}")))?;
    parse_config(&text)
}

fn one_based(value: usize, len: usize, path: &str) -> Result<usize> {
    if value == 0 || value > len {
        return Err(Error::config(
            path,
            format!("tier index {value} out of range 1..={len}"),
        ));
    }
    Ok(value - 1)
}

fn build_network(
    raw: &RawNetwork,
    user_kernel_override: Option<OffspringKernel>,
) -> Result<NetworkModel> {
    let tiers: Vec<TierSpec> = raw
        .tiers
        .iter()
        .map(|t| match *t {
            RawTier::Poisson { density, power } => TierSpec::poisson(density, power),
            RawTier::Cluster {
                parent_density,
                mean_size,
                kernel,
                power,
            } => TierSpec::cluster(parent_density, mean_size, kernel, power),
        })
        .collect();
    let user = match raw.user {
        RawUser::Type1 => UserModel::Type1,
        RawUser::Type2 { q, user_kernel } => {
            let q = one_based(q, tiers.len(), "network.user.q")?;
            let kernel = match (user_kernel_override.or(user_kernel), tiers[q].kernel()) {
                (Some(k), _) => k,
                (None, Some(k)) => *k,
                (None, None) => {
                    return Err(Error::config(
                        "network.user.q",
                        format!(
                        "tier {} is not a cluster tier; type 2 users must couple to a cluster tier",
                        q + 1
                    ),
                    ))
                }
            };
            UserModel::Type2 {
                q,
                user_kernel: kernel,
            }
        }
    };
    NetworkModel::new(tiers, raw.alpha, raw.noise, user)
}

fn validate(raw: RawConfig) -> Result<RunConfig> {
    let base = build_network(&raw.network, None)?;
    let s = &raw.sweep;
    let axes: Vec<(Axis, &Vec<f64>)> = [
        (Axis::TauDb, s.tau_db.as_ref()),
        (Axis::SigmaM, s.sigma_m.as_ref()),
        (Axis::ParentDensityRatio, s.parent_density_ratio.as_ref()),
    ]
    .into_iter()
    .filter_map(|(a, v)| v.map(|v| (a, v)))
    .collect();
    let (axis, values) = match axes.as_slice() {
        [one] => *one,
        [] => {
            return Err(Error::config(
                "sweep",
                "one of tau_db, sigma_m or parent_density_ratio is required",
            ))
        }
        _ => {
            return Err(Error::config(
                "sweep",
                "exactly one sweep axis may be given",
            ))
        }
    };
    if values.is_empty() {
        return Err(Error::config(
            format!("sweep.{}", axis.label()),
            "sweep list is empty",
        ));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::config(
            format!("sweep.{}", axis.label()),
            format!("non-finite value {v}"),
        ));
    }
    if !s.threshold_db.is_finite() {
        return Err(Error::config("sweep.threshold_db", "must be finite"));
    }

    let cluster_tier = || -> Result<usize> {
        match s.cluster_tier {
            Some(k) => {
                let k = one_based(k, base.len(), "sweep.cluster_tier")?;
                if !base.tiers[k].is_cluster() {
                    return Err(Error::config(
                        "sweep.cluster_tier",
                        format!("tier {} is not a cluster tier", k + 1),
                    ));
                }
                Ok(k)
            }
            None => base
                .tiers
                .iter()
                .position(TierSpec::is_cluster)
                .ok_or_else(|| {
                    Error::config(
                        format!("sweep.{}", axis.label()),
                        "network has no cluster tier",
                    )
                }),
        }
    };

    let user_follows_tier = matches!(
        raw.network.user,
        RawUser::Type2 {
            user_kernel: None,
            ..
        }
    );
    let mut points = Vec::with_capacity(values.len());
    for &value in values {
        let (tau_db, net) = match axis {
            Axis::TauDb => (value, base.clone()),
            Axis::SigmaM => {
                if !(value > 0.0) {
                    return Err(Error::config(
                        "sweep.sigma_m",
                        format!("kernel length must be > 0, got {value}"),
                    ));
                }
                let k = cluster_tier()?;
                let mut rawnet = raw.network.clone();
                let new_kernel = match &mut rawnet.tiers[k] {
                    RawTier::Cluster { kernel, .. } => {
                        *kernel = kernel.scaled(value / kernel.length());
                        *kernel
                    }
                    RawTier::Poisson { .. } => unreachable!("cluster_tier returns cluster tiers"),
                };
                let coupled = matches!(base.user, UserModel::Type2 { q, .. } if q == k);
                let user_override = (coupled && user_follows_tier).then_some(new_kernel);
                (s.threshold_db, build_network(&rawnet, user_override)?)
            }
            Axis::ParentDensityRatio => {
                if !(value >= 0.0) {
                    return Err(Error::config(
                        "sweep.parent_density_ratio",
                        format!("ratio must be >= 0, got {value}"),
                    ));
                }
                let k = cluster_tier()?;
                let r = match s.reference_tier {
                    Some(r) => one_based(r, base.len(), "sweep.reference_tier")?,
                    None => base
                        .tiers
                        .iter()
                        .position(|t| !t.is_cluster())
                        .ok_or_else(|| {
                            Error::config(
                                "sweep.reference_tier",
                                "network has no Poisson tier to take the ratio against",
                            )
                        })?,
                };
                let TierKind::Poisson { density } = base.tiers[r].kind else {
                    return Err(Error::config(
                        "sweep.reference_tier",
                        format!("tier {} is not a Poisson tier", r + 1),
                    ));
                };
                let mut net = base.clone();
                if let TierKind::Cluster { parent_density, .. } = &mut net.tiers[k].kind {
                    *parent_density = value * density;
                }
                net.validate()?;
                (s.threshold_db, net)
            }
        };
        points.push(SweepPoint {
            value,
            tau_db,
            tau: db_to_linear(tau_db),
            net,
        });
    }

    let window = match raw.mc.sim_radius {
        Some(r) => {
            let w = WindowPolicy::with_radius(r);
            w.validate()?;
            Some(w)
        }
        None => None,
    };
    if raw.mc.trials == 0 {
        return Err(Error::config("mc.trials", "must be >= 1"));
    }
    if let Some(m) = raw.mc.parent_margin_sigmas {
        if !(m >= 0.0 && m.is_finite()) {
            return Err(Error::config("mc.parent_margin_sigmas", "must be >= 0"));
        }
    }
    raw.analytic.quadrature.validate()?;
    if !(raw.analytic.z_truncation_multiplier > 0.0) {
        return Err(Error::config(
            "analytic.z_truncation_multiplier",
            "must be > 0",
        ));
    }

    Ok(RunConfig {
        base,
        axis,
        points,
        engines: raw.engines,
        execution: raw.execution,
        trials: raw.mc.trials,
        seed: raw.mc.seed,
        window,
        quad: raw.analytic.quadrature,
        z_truncation_multiplier: raw.analytic.z_truncation_multiplier,
        output: raw.output.clone(),
        raw,
    })
}
