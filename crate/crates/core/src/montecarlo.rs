//! Monte Carlo estimation of association and coverage.
//!
//! Each trial draws one network realization around the user at the origin,
//! associates with the base station of largest average received power and
//! evaluates the SINR under unit-mean Rayleigh fading. All thresholds of a
//! grid are evaluated on the same SINR draw.

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::model::NetworkModel;
use crate::pointprocess::{ring_rng, trial_rng, visit_scene, visit_scene_doubled, WindowPolicy};

/// Realizations with no base station are redrawn at most this many times.
const MAX_RESAMPLES: u64 = 10_000;

/// Trials per work item.
const CHUNK: u64 = 512;

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub serving_tier: usize,
    pub serving_distance: f64,
    /// `+∞` when there is neither interference nor noise.
    pub sinr: f64,
    /// `sinr > τ[serving_tier]` for each threshold vector of the grid.
    pub covered_at: Vec<bool>,
    /// Realizations discarded for being empty before this one.
    pub resamples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub trials: u64,
    pub p_hat: f64,
    /// 95% normal-approximation binomial half-width.
    pub ci_halfwidth: f64,
    /// `P̂(SINR > τ_i, S_i)`; sums to `p_hat`.
    pub per_tier_joint: Vec<f64>,
    /// `P̂(S_i)`.
    pub association: Vec<f64>,
    pub empty_scenes: u64,
    /// `p_hat` on the same trials with the window radius doubled, minus
    /// `p_hat`; filled when the window policy asks for a convergence check.
    pub window_delta: Option<f64>,
}

/// Trial count, seed, window and scheduling for one estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub policy: WindowPolicy,
    pub trials: u64,
    pub seed: u64,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(policy: WindowPolicy, trials: u64, seed: u64) -> Self {
        Self {
            policy,
            trials,
            seed,
            execution: Execution::default(),
        }
    }

    pub fn with_execution(mut self, execution: Execution) -> Self {
        self.execution = execution;
        self
    }

    fn validate(&self, net: &NetworkModel) -> Result<()> {
        net.validate()?;
        self.policy.validate()?;
        if self.trials == 0 {
            return Err(Error::config("mc.trials", "must be >= 1"));
        }
        if net.tiers.iter().all(|t| t.mean_density() == 0.0) && !has_representative(net) {
            return Err(Error::domain("network has no base stations"));
        }
        Ok(())
    }
}

fn has_representative(net: &NetworkModel) -> bool {
    match net.user {
        crate::model::UserModel::Type2 { q, .. } => match net.tiers[q].kind {
            crate::model::TierKind::Cluster { mean_size, .. } => mean_size > 0.0,
            _ => false,
        },
        _ => false,
    }
}

/// Serving base station and SINR of one realization.
#[derive(Debug, Clone, Copy)]
struct Draw {
    tier: usize,
    d2: f64,
    sinr: f64,
}

/// Streams one realization; `None` if it holds no base station. With
/// `ring`, the window is doubled (see [`visit_scene_doubled`]).
fn draw<R: Rng + ?Sized>(
    net: &NetworkModel,
    policy: &WindowPolicy,
    rng: &mut R,
    mut ring: Option<&mut R>,
) -> Option<Draw> {
    let powers: Vec<f64> = net.tiers.iter().map(|t| t.power).collect();
    let alpha = net.alpha;
    let fast = alpha == 4.0;
    let half = -0.5 * alpha;

    let mut best_avg = -1.0f64;
    let mut best_faded = 0.0;
    let mut best_tier = 0;
    let mut best_d2 = 0.0;
    let mut interference = 0.0;
    // Fading draws need their own generator state: the scene visitor holds
    // `rng` mutably. Buffer the points instead.
    let mut pts: Vec<(usize, f64)> = Vec::new();
    let push =
        |k: usize, p: crate::pointprocess::Point| pts.push((k, p.norm_sq().max(f64::MIN_POSITIVE)));
    match ring.as_deref_mut() {
        Some(ring) => visit_scene_doubled(net, policy, rng, ring, push),
        None => visit_scene(net, policy, rng, push),
    };
    if pts.is_empty() {
        return None;
    }
    // Stations beyond the base radius take their fading from the ring
    // stream, so the base stations see the same fades with or without it.
    let r2 = policy.sim_radius * policy.sim_radius;
    for (k, d2) in pts {
        let path = if fast { 1.0 / (d2 * d2) } else { d2.powf(half) };
        let avg = powers[k] * path;
        let h: f64 = match ring.as_deref_mut() {
            Some(ring) if d2 > r2 => ring.sample(Exp1),
            _ => rng.sample(Exp1),
        };
        let faded = avg * h;
        if avg > best_avg {
            if best_avg >= 0.0 {
                interference += best_faded;
            }
            best_avg = avg;
            best_faded = faded;
            best_tier = k;
            best_d2 = d2;
        } else {
            interference += faded;
        }
    }
    let denom = net.noise + interference;
    let sinr = if denom > 0.0 {
        best_faded / denom
    } else {
        f64::INFINITY
    };
    Some(Draw {
        tier: best_tier,
        d2: best_d2,
        sinr,
    })
}

fn draw_nonempty<R: Rng + ?Sized>(
    net: &NetworkModel,
    policy: &WindowPolicy,
    rng: &mut R,
    mut ring: Option<&mut R>,
) -> Result<(Draw, u64)> {
    for resamples in 0..=MAX_RESAMPLES {
        if let Some(d) = draw(net, policy, rng, ring.as_deref_mut()) {
            return Ok((d, resamples));
        }
    }
    Err(Error::DegenerateCondition(format!(
        "{MAX_RESAMPLES} consecutive realizations held no base station"
    )))
}

/// One trial. `tau_grid[g][i]` is the threshold of tier `i` in grid cell `g`.
pub fn run_trial<R: Rng + ?Sized>(
    net: &NetworkModel,
    policy: &WindowPolicy,
    tau_grid: &[Vec<f64>],
    rng: &mut R,
) -> Result<TrialOutcome> {
    net.validate()?;
    policy.validate()?;
    check_grid(net, tau_grid)?;
    let (d, resamples) = draw_nonempty(net, policy, rng, None)?;
    Ok(TrialOutcome {
        serving_tier: d.tier,
        serving_distance: d.d2.sqrt(),
        sinr: d.sinr,
        covered_at: tau_grid.iter().map(|t| d.sinr > t[d.tier]).collect(),
        resamples,
    })
}

fn check_grid(net: &NetworkModel, tau_grid: &[Vec<f64>]) -> Result<()> {
    for taus in tau_grid {
        if taus.len() != net.len() {
            return Err(Error::config(
                "taus",
                format!("expected {} thresholds, got {}", net.len(), taus.len()),
            ));
        }
        if taus.iter().any(|t| t.is_nan() || *t < 0.0) {
            return Err(Error::config("taus", "thresholds must be >= 0"));
        }
    }
    Ok(())
}

/// Integer tallies; merging is exact, so any schedule gives the same totals.
#[derive(Debug, Clone, PartialEq)]
struct Tally {
    /// `covered[g * K + i]`: trials served by tier `i` and covered in cell `g`.
    covered: Vec<u64>,
    served: Vec<u64>,
    empty: u64,
}

impl Tally {
    fn zero(cells: usize, tiers: usize) -> Self {
        Self {
            covered: vec![0; cells * tiers],
            served: vec![0; tiers],
            empty: 0,
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.covered.iter_mut().zip(other.covered) {
            *a += b;
        }
        for (a, b) in self.served.iter_mut().zip(other.served) {
            *a += b;
        }
        self.empty += other.empty;
        self
    }
}

fn tally(
    net: &NetworkModel,
    cfg: &McConfig,
    tau_grid: &[Vec<f64>],
    doubled: bool,
) -> Result<Tally> {
    let k = net.len();
    let cells = tau_grid.len();
    let chunks = cfg.trials.div_ceil(CHUNK);
    cfg.execution.map_reduce(
        chunks as usize,
        Ok(Tally::zero(cells, k)),
        |c| -> Result<Tally> {
            let mut t = Tally::zero(cells, k);
            let start = c as u64 * CHUNK;
            let end = (start + CHUNK).min(cfg.trials);
            for trial in start..end {
                let mut rng = trial_rng(cfg.seed, trial);
                let mut ring = doubled.then(|| ring_rng(cfg.seed, trial));
                let (d, resamples) = draw_nonempty(net, &cfg.policy, &mut rng, ring.as_mut())?;
                t.empty += resamples;
                t.served[d.tier] += 1;
                for (g, taus) in tau_grid.iter().enumerate() {
                    if d.sinr > taus[d.tier] {
                        t.covered[g * k + d.tier] += 1;
                    }
                }
            }
            Ok(t)
        },
        |a, b| match (a, b) {
            (Ok(a), Ok(b)) => Ok(a.merge(b)),
            (Err(e), _) | (_, Err(e)) => Err(e),
        },
    )
}

fn estimates(net: &NetworkModel, trials: u64, tau_grid: &[Vec<f64>], t: &Tally) -> Vec<McEstimate> {
    let k = net.len();
    let n = trials as f64;
    let association: Vec<f64> = t.served.iter().map(|&c| c as f64 / n).collect();
    (0..tau_grid.len())
        .map(|g| {
            let per_tier_joint: Vec<f64> = t.covered[g * k..(g + 1) * k]
                .iter()
                .map(|&c| c as f64 / n)
                .collect();
            let p_hat: f64 = per_tier_joint.iter().sum();
            McEstimate {
                trials,
                p_hat,
                ci_halfwidth: ci_halfwidth(p_hat, trials),
                per_tier_joint,
                association: association.clone(),
                empty_scenes: t.empty,
                window_delta: None,
            }
        })
        .collect()
}

/// `1.96·√(p(1−p)/n)`.
pub fn ci_halfwidth(p: f64, n: u64) -> f64 {
    1.96 * (p * (1.0 - p) / n as f64).max(0.0).sqrt()
}

/// Coverage for every threshold vector of `tau_grid` from one set of trials.
pub fn estimate_coverage_grid(
    net: &NetworkModel,
    cfg: &McConfig,
    tau_grid: &[Vec<f64>],
) -> Result<Vec<McEstimate>> {
    cfg.validate(net)?;
    check_grid(net, tau_grid)?;
    let t = tally(net, cfg, tau_grid, false)?;
    let mut out = estimates(net, cfg.trials, tau_grid, &t);
    if cfg.policy.convergence_check {
        // Same trials with an extra outer ring, so the difference is paired.
        let t2 = tally(net, cfg, tau_grid, true)?;
        for (e, w) in out
            .iter_mut()
            .zip(estimates(net, cfg.trials, tau_grid, &t2))
        {
            e.window_delta = Some(w.p_hat - e.p_hat);
        }
    }
    Ok(out)
}

pub fn estimate_coverage(net: &NetworkModel, cfg: &McConfig, taus: &[f64]) -> Result<McEstimate> {
    let mut v = estimate_coverage_grid(net, cfg, &[taus.to_vec()])?;
    Ok(v.remove(0))
}

/// Empirical `P(S_i)` for each tier.
pub fn estimate_association(net: &NetworkModel, cfg: &McConfig) -> Result<Vec<f64>> {
    cfg.validate(net)?;
    let t = tally(net, cfg, &[], false)?;
    Ok(t.served
        .iter()
        .map(|&c| c as f64 / cfg.trials as f64)
        .collect())
}
