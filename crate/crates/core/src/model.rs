//! Network description shared by the analytic and Monte Carlo engines.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::OffspringKernel;
use crate::quadrature::QuadratureConfig;

/// Spatial law of one base-station tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TierKind {
    /// Homogeneous PPP with the given intensity (per m²).
    Poisson { density: f64 },
    /// Poisson cluster process: parent PPP, Poisson(`mean_size`) offspring
    /// per parent displaced by `kernel`.
    Cluster {
        parent_density: f64,
        mean_size: f64,
        kernel: OffspringKernel,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierSpec {
    pub kind: TierKind,
    /// Transmit power in watts.
    pub power: f64,
}

impl TierSpec {
    pub fn poisson(density: f64, power: f64) -> Self {
        Self {
            kind: TierKind::Poisson { density },
            power,
        }
    }

    pub fn cluster(
        parent_density: f64,
        mean_size: f64,
        kernel: OffspringKernel,
        power: f64,
    ) -> Self {
        Self {
            kind: TierKind::Cluster {
                parent_density,
                mean_size,
                kernel,
            },
            power,
        }
    }

    pub fn is_cluster(&self) -> bool {
        matches!(self.kind, TierKind::Cluster { .. })
    }

    /// Mean number of base stations per m².
    pub fn mean_density(&self) -> f64 {
        match self.kind {
            TierKind::Poisson { density } => density,
            TierKind::Cluster {
                parent_density,
                mean_size,
                ..
            } => parent_density * mean_size,
        }
    }

    pub fn kernel(&self) -> Option<&OffspringKernel> {
        match &self.kind {
            TierKind::Cluster { kernel, .. } => Some(kernel),
            TierKind::Poisson { .. } => None,
        }
    }

    pub fn validate(&self, idx: usize) -> Result<()> {
        let path = |f: &str| format!("network.tiers[{idx}].{f}");
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::config(path("power"), "must be > 0"));
        }
        match self.kind {
            TierKind::Poisson { density } => {
                if !(density >= 0.0 && density.is_finite()) {
                    return Err(Error::config(path("density"), "must be >= 0"));
                }
            }
            TierKind::Cluster {
                parent_density,
                mean_size,
                kernel,
            } => {
                if !(parent_density >= 0.0 && parent_density.is_finite()) {
                    return Err(Error::config(path("parent_density"), "must be >= 0"));
                }
                if !(mean_size >= 0.0 && mean_size.is_finite()) {
                    return Err(Error::config(path("mean_size"), "must be >= 0"));
                }
                kernel
                    .validate()
                    .map_err(|e| Error::config(path("kernel"), e.to_string()))?;
            }
        }
        Ok(())
    }
}

/// How the typical user relates to the base stations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum UserModel {
    /// User location independent of every tier.
    Type1,
    /// User shares its cluster center with a cluster of tier `q`; its offset
    /// from that center follows `user_kernel`.
    Type2 {
        q: usize,
        user_kernel: OffspringKernel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub tiers: Vec<TierSpec>,
    /// Path-loss exponent, > 2.
    pub alpha: f64,
    /// Thermal noise power in watts.
    pub noise: f64,
    pub user: UserModel,
}

impl NetworkModel {
    pub fn new(tiers: Vec<TierSpec>, alpha: f64, noise: f64, user: UserModel) -> Result<Self> {
        let net = Self {
            tiers,
            alpha,
            noise,
            user,
        };
        net.validate()?;
        Ok(net)
    }

    pub fn validate(&self) -> Result<()> {
        if self.tiers.is_empty() {
            return Err(Error::config(
                "network.tiers",
                "at least one tier is required",
            ));
        }
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            return Err(Error::config(
                "network.alpha",
                format!(
                    "path-loss exponent must satisfy alpha > 2, got {}",
                    self.alpha
                ),
            ));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return Err(Error::config("network.noise", "must be >= 0"));
        }
        for (i, t) in self.tiers.iter().enumerate() {
            t.validate(i)?;
        }
        if let UserModel::Type2 { q, user_kernel } = self.user {
            match self.tiers.get(q) {
                None => {
                    return Err(Error::config(
                        "network.user.q",
                        format!("tier index {q} out of range"),
                    ))
                }
                Some(t) if !t.is_cluster() => {
                    return Err(Error::config(
                        "network.user.q",
                        format!("tier {q} is not a cluster tier; type 2 users must couple to a cluster tier"),
                    ))
                }
                _ => {}
            }
            user_kernel
                .validate()
                .map_err(|e| Error::config("network.user.user_kernel", e.to_string()))?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.tiers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiers.is_empty()
    }

    /// `P̄_{j,i} = (P_j / P_i)^{1/α}`.
    pub fn pbar(&self, j: usize, i: usize) -> f64 {
        (self.tiers[j].power / self.tiers[i].power).powf(1.0 / self.alpha)
    }

    pub fn check_tier(&self, i: usize) -> Result<()> {
        if i >= self.tiers.len() {
            return Err(Error::domain(format!(
                "tier index {i} out of range (network has {} tiers)",
                self.tiers.len()
            )));
        }
        Ok(())
    }
}

/// Per-tier SINR thresholds (linear) plus evaluation controls.
#[derive(Debug, Clone, PartialEq)]
pub struct CoverageQuery {
    pub taus: Vec<f64>,
    pub quad: QuadratureConfig,
    /// Gaussian integrals are truncated this many standard deviations from
    /// the cluster center.
    pub z_truncation_multiplier: f64,
}

impl CoverageQuery {
    pub fn new(taus: Vec<f64>) -> Self {
        Self {
            taus,
            quad: QuadratureConfig::default(),
            z_truncation_multiplier: crate::kernels::DEFAULT_TAIL_SIGMAS,
        }
    }

    /// The same threshold for every one of `tiers` tiers.
    pub fn uniform(tau: f64, tiers: usize) -> Self {
        Self::new(vec![tau; tiers])
    }

    pub fn with_quadrature(mut self, quad: QuadratureConfig) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self, net: &NetworkModel) -> Result<()> {
        if self.taus.len() != net.tiers.len() {
            return Err(Error::config(
                "query.taus",
                format!(
                    "expected {} thresholds, got {}",
                    net.tiers.len(),
                    self.taus.len()
                ),
            ));
        }
        if let Some(t) = self.taus.iter().find(|t| t.is_nan() || **t < 0.0) {
            return Err(Error::config(
                "query.taus",
                format!("thresholds must be >= 0, got {t}"),
            ));
        }
        if !(self.z_truncation_multiplier > 0.0) {
            return Err(Error::config(
                "query.z_truncation_multiplier",
                "must be > 0",
            ));
        }
        self.quad.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageResult {
    /// `P(SINR > τ_i, S_i)` for each tier.
    pub per_tier: Vec<f64>,
    /// Sum of `per_tier`.
    pub total: f64,
    /// `P(S_i)` for each tier.
    pub association: Vec<f64>,
}

/// `10 log10(τ)`.
pub fn linear_to_db(tau: f64) -> f64 {
    10.0 * tau.log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
