//! Samplers for Poisson and Poisson cluster processes on a disc centered at
//! the typical user.

use std::f64::consts::PI;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::OffspringKernel;
use crate::model::{NetworkModel, TierKind, TierSpec, UserModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn norm_sq(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

/// Simulation window settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowPolicy {
    /// Radius of the disc (centered at the user) in which base stations are kept.
    pub sim_radius: f64,
    /// Gaussian parents are drawn out to `sim_radius + parent_margin_sigmas·σ`.
    #[serde(default = "default_margin")]
    pub parent_margin_sigmas: f64,
    /// Also estimate at twice the radius and report the change.
    #[serde(default)]
    pub convergence_check: bool,
}

fn default_margin() -> f64 {
    6.0
}

/// Lower bound on the default window radius, meters.
pub const MIN_DEFAULT_RADIUS: f64 = 5000.0;

impl WindowPolicy {
    pub fn with_radius(sim_radius: f64) -> Self {
        Self {
            sim_radius,
            parent_margin_sigmas: default_margin(),
            convergence_check: false,
        }
    }

    /// 15 mean nearest-neighbor distances of the sparsest tier, at least 5 km.
    pub fn default_for(net: &NetworkModel) -> Self {
        let sparsest = net
            .tiers
            .iter()
            .map(TierSpec::mean_density)
            .filter(|d| *d > 0.0)
            .fold(f64::INFINITY, f64::min);
        let nn = if sparsest.is_finite() {
            0.5 / sparsest.sqrt()
        } else {
            0.0
        };
        Self::with_radius((15.0 * nn).max(MIN_DEFAULT_RADIUS))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sim_radius > 0.0 && self.sim_radius.is_finite()) {
            return Err(Error::config("mc.window.sim_radius", "must be > 0"));
        }
        if !(self.parent_margin_sigmas >= 0.0 && self.parent_margin_sigmas.is_finite()) {
            return Err(Error::config(
                "mc.window.parent_margin_sigmas",
                "must be >= 0",
            ));
        }
        Ok(())
    }

    /// Extra radius beyond the window over which parents are drawn.
    pub fn parent_margin(&self, kernel: &OffspringKernel) -> f64 {
        match *kernel {
            OffspringKernel::Gaussian { sigma } => self.parent_margin_sigmas * sigma,
            OffspringKernel::UniformDisc { radius } => radius,
        }
    }
}

/// Reproducible per-trial generator: one ChaCha stream per trial index, so
/// results do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Independent stream for the outer ring of a doubled window.
pub fn ring_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    trial_rng(seed, trial | (1 << 63))
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    let d = Poisson::new(mean).expect("finite positive Poisson mean");
    let n: f64 = d.sample(rng);
    n as u64
}

fn uniform_in_disc<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> Point {
    uniform_in_annulus(0.0, radius, rng)
}

/// One displacement drawn from the offspring kernel.
pub fn sample_offset<R: Rng + ?Sized>(kernel: &OffspringKernel, rng: &mut R) -> Point {
    match *kernel {
        OffspringKernel::Gaussian { sigma } => {
            let x: f64 = rng.sample(StandardNormal);
            let y: f64 = rng.sample(StandardNormal);
            Point {
                x: sigma * x,
                y: sigma * y,
            }
        }
        OffspringKernel::UniformDisc { radius } => uniform_in_disc(radius, rng),
    }
}

fn uniform_in_annulus<R: Rng + ?Sized>(inner: f64, outer: f64, rng: &mut R) -> Point {
    let a2 = inner * inner;
    let rho = (a2 + rng.random::<f64>() * (outer * outer - a2)).sqrt();
    let theta = 2.0 * PI * rng.random::<f64>();
    let (s, c) = theta.sin_cos();
    Point {
        x: rho * c,
        y: rho * s,
    }
}

fn visit_ppp<R: Rng + ?Sized>(
    lambda: f64,
    inner: f64,
    outer: f64,
    rng: &mut R,
    visit: &mut impl FnMut(Point),
) {
    let n = poisson_count(lambda * PI * (outer * outer - inner * inner), rng);
    for _ in 0..n {
        visit(uniform_in_annulus(inner, outer, rng));
    }
}

fn visit_cluster<R: Rng + ?Sized>(
    center: Point,
    mean_size: f64,
    kernel: &OffspringKernel,
    r2_max: f64,
    rng: &mut R,
    visit: &mut impl FnMut(Point),
) -> u64 {
    let m = poisson_count(mean_size, rng);
    for _ in 0..m {
        let o = sample_offset(kernel, rng);
        let p = Point {
            x: center.x + o.x,
            y: center.y + o.y,
        };
        if p.norm_sq() <= r2_max {
            visit(p);
        }
    }
    m
}

/// Points of one tier whose PPP points (or cluster parents, shifted out by
/// the kernel margin) fall in the ring `[inner, outer]`; offspring are kept
/// within `clip`.
fn visit_tier<R: Rng + ?Sized>(
    tier: &TierSpec,
    policy: &WindowPolicy,
    (inner, outer): (f64, f64),
    clip: f64,
    rng: &mut R,
    visit: &mut impl FnMut(Point),
) {
    match tier.kind {
        TierKind::Poisson { density } => visit_ppp(density, inner, outer, rng, visit),
        TierKind::Cluster {
            parent_density,
            mean_size,
            kernel,
        } => {
            if mean_size == 0.0 {
                return;
            }
            let m = policy.parent_margin(&kernel);
            let lo = if inner > 0.0 { inner + m } else { 0.0 };
            let hi = outer + m;
            let n = poisson_count(parent_density * PI * (hi * hi - lo * lo), rng);
            for _ in 0..n {
                let c = uniform_in_annulus(lo, hi, rng);
                visit_cluster(c, mean_size, &kernel, clip * clip, rng, visit);
            }
        }
    }
}

/// Homogeneous PPP of intensity `lambda` on the disc of radius `radius`.
pub fn sample_ppp<R: Rng + ?Sized>(lambda: f64, radius: f64, rng: &mut R) -> Result<Vec<Point>> {
    if !(lambda >= 0.0 && lambda.is_finite()) || !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::domain("sample_ppp needs lambda >= 0 and radius > 0"));
    }
    let mut out = Vec::new();
    visit_ppp(lambda, 0.0, radius, rng, &mut |p| out.push(p));
    Ok(out)
}

/// Cluster tier realization restricted to the window; parents are drawn on
/// the window enlarged by the kernel margin.
pub fn sample_pcp<R: Rng + ?Sized>(
    tier: &TierSpec,
    policy: &WindowPolicy,
    rng: &mut R,
) -> Result<Vec<Point>> {
    if !tier.is_cluster() {
        return Err(Error::domain("sample_pcp needs a cluster tier"));
    }
    tier.validate(0)?;
    policy.validate()?;
    let mut out = Vec::new();
    let r = policy.sim_radius;
    visit_tier(tier, policy, (0.0, r), r, rng, &mut |p| out.push(p));
    Ok(out)
}

/// The cluster that shares the user's cluster center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Representative {
    pub tier: usize,
    pub center: Point,
    /// Points generated before clipping to the window.
    pub count: u64,
}

/// Streams every base station of one network realization to `visit` as
/// `(tier, location)`; returns the representative cluster for Type 2 users.
pub fn visit_scene<R: Rng + ?Sized>(
    net: &NetworkModel,
    policy: &WindowPolicy,
    rng: &mut R,
    visit: impl FnMut(usize, Point),
) -> Option<Representative> {
    visit_scene_inner::<R, R>(net, policy, rng, None, visit)
}

/// Like [`visit_scene`] on a window of twice the radius, built so that the
/// stations inside the original radius are exactly those `visit_scene`
/// yields for the same `rng`. The outer ring is drawn from `ring_rng`.
pub fn visit_scene_doubled<R: Rng + ?Sized, S: Rng + ?Sized>(
    net: &NetworkModel,
    policy: &WindowPolicy,
    rng: &mut R,
    ring_rng: &mut S,
    visit: impl FnMut(usize, Point),
) -> Option<Representative> {
    visit_scene_inner(net, policy, rng, Some(ring_rng), visit)
}

fn visit_scene_inner<R: Rng + ?Sized, S: Rng + ?Sized>(
    net: &NetworkModel,
    policy: &WindowPolicy,
    rng: &mut R,
    ring_rng: Option<&mut S>,
    mut visit: impl FnMut(usize, Point),
) -> Option<Representative> {
    let r = policy.sim_radius;
    let clip = if ring_rng.is_some() { 2.0 * r } else { r };
    let rep = match net.user {
        UserModel::Type1 => None,
        UserModel::Type2 { q, user_kernel } => {
            let z0 = sample_offset(&user_kernel, rng).norm_sq().sqrt();
            let center = Point { x: z0, y: 0.0 };
            let TierKind::Cluster {
                mean_size, kernel, ..
            } = net.tiers[q].kind
            else {
                unreachable!("validated networks couple type 2 users to a cluster tier")
            };
            let count = visit_cluster(center, mean_size, &kernel, clip * clip, rng, &mut |p| {
                visit(q, p)
            });
            Some(Representative {
                tier: q,
                center,
                count,
            })
        }
    };
    for (k, tier) in net.tiers.iter().enumerate() {
        visit_tier(tier, policy, (0.0, r), clip, rng, &mut |p| visit(k, p));
    }
    if let Some(ring) = ring_rng {
        for (k, tier) in net.tiers.iter().enumerate() {
            visit_tier(tier, policy, (r, 2.0 * r), clip, ring, &mut |p| visit(k, p));
        }
    }
    rep
}

/// A materialized network realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub points_per_tier: Vec<Vec<Point>>,
    pub window_radius: f64,
    pub rng_seed: u64,
    pub representative: Option<Representative>,
}

impl Scene {
    pub fn len(&self) -> usize {
        self.points_per_tier.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `x_m,y_m,tier` rows, tiers numbered from 1.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "x_m,y_m,tier")?;
        for (k, pts) in self.points_per_tier.iter().enumerate() {
            for p in pts {
                writeln!(w, "{:.6},{:.6},{}", p.x, p.y, k + 1)?;
            }
        }
        Ok(())
    }
}

/// Builds the realization for `(seed, trial 0)`.
pub fn build_scene(net: &NetworkModel, policy: &WindowPolicy, seed: u64) -> Result<Scene> {
    net.validate()?;
    policy.validate()?;
    let mut rng = trial_rng(seed, 0);
    let mut points_per_tier = vec![Vec::new(); net.len()];
    let representative = visit_scene(net, policy, &mut rng, |k, p| points_per_tier[k].push(p));
    Ok(Scene {
        points_per_tier,
        window_radius: policy.sim_radius,
        rng_seed: seed,
        representative,
    })
}
