//! Offspring kernels and the distance laws built on them.
//!
//! Everything here is a function of the radial distance of an offspring
//! point from the origin, given the distance `z` of its cluster center.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_finite, integrate_sqrt_edges, QuadratureConfig};
use crate::special::bessel_i0e;

/// Default truncation of Gaussian integrals, in standard deviations.
pub const DEFAULT_TAIL_SIGMAS: f64 = 10.0;

/// Isotropic displacement law of offspring around their cluster center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum OffspringKernel {
    /// Thomas cluster: each coordinate of the offset is `N(0, sigma²)`.
    Gaussian { sigma: f64 },
    /// Matérn cluster: offset uniform on a disc of the given radius.
    UniformDisc { radius: f64 },
}

/// Stretch of the support of `f_d(x | z)` seen as a function of one
/// argument with the other held fixed. The density is smooth inside a
/// piece; `sqrt_edges` marks square-root behavior at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub sqrt_edges: bool,
}

impl OffspringKernel {
    pub fn gaussian(sigma: f64) -> Result<Self> {
        let k = OffspringKernel::Gaussian { sigma };
        k.validate()?;
        Ok(k)
    }

    pub fn uniform_disc(radius: f64) -> Result<Self> {
        let k = OffspringKernel::UniformDisc { radius };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OffspringKernel::Gaussian { sigma } if !(sigma > 0.0 && sigma.is_finite()) => Err(
                Error::domain(format!("gaussian sigma must be > 0, got {sigma}")),
            ),
            OffspringKernel::UniformDisc { radius } if !(radius > 0.0 && radius.is_finite()) => {
                Err(Error::domain(format!(
                    "disc radius must be > 0, got {radius}"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Characteristic length: `sigma` or the disc radius.
    pub fn length(&self) -> f64 {
        match *self {
            OffspringKernel::Gaussian { sigma } => sigma,
            OffspringKernel::UniformDisc { radius } => radius,
        }
    }

    /// Same family with its length multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        match *self {
            OffspringKernel::Gaussian { sigma } => OffspringKernel::Gaussian {
                sigma: sigma * factor,
            },
            OffspringKernel::UniformDisc { radius } => OffspringKernel::UniformDisc {
                radius: radius * factor,
            },
        }
    }

    /// Distance beyond which no offspring is found (up to `tail_sigmas`
    /// standard deviations for the Gaussian).
    pub fn reach(&self, tail_sigmas: f64) -> f64 {
        match *self {
            OffspringKernel::Gaussian { sigma } => tail_sigmas * sigma,
            OffspringKernel::UniformDisc { radius } => radius,
        }
    }

    /// `f_d(x | z)` without argument checks. Callers guarantee `x, z ≥ 0`.
    #[inline]
    pub fn pdf(&self, x: f64, z: f64) -> f64 {
        match *self {
            OffspringKernel::Gaussian { sigma } => {
                let s2 = sigma * sigma;
                let d = x - z;
                // exp(-(x²+z²)/2σ²) I0(xz/σ²) = exp(-(x-z)²/2σ²) Î0(xz/σ²)
                (x / s2) * (-0.5 * d * d / s2).exp() * bessel_i0e(x * z / s2)
            }
            OffspringKernel::UniformDisc { radius } => {
                let rd2 = radius * radius;
                if z <= radius && x <= radius - z {
                    2.0 * x / rd2
                } else if x > (radius - z).abs() && x <= radius + z {
                    // arccos((x²+z²-r²)/2xz) = 2 asin(√((r²-(x-z)²)/4xz)),
                    // free of cancellation when z ≫ r.
                    let d = x - z;
                    let w = ((radius - d) * (radius + d) / (4.0 * x * z)).clamp(0.0, 1.0);
                    4.0 * x / (PI * rd2) * w.sqrt().asin()
                } else {
                    0.0
                }
            }
        }
    }

    /// Pieces of the support of `x ↦ f_d(x | fixed)`, which coincide with
    /// those of `z ↦ f_d(fixed | z)`.
    pub fn pieces(&self, fixed: f64, tail_sigmas: f64) -> Vec<Piece> {
        match *self {
            OffspringKernel::Gaussian { sigma } => vec![Piece {
                lo: (fixed - tail_sigmas * sigma).max(0.0),
                hi: fixed + tail_sigmas * sigma,
                sqrt_edges: false,
            }],
            OffspringKernel::UniformDisc { radius } => {
                let mut v = Vec::with_capacity(2);
                if fixed < radius {
                    v.push(Piece {
                        lo: 0.0,
                        hi: radius - fixed,
                        sqrt_edges: false,
                    });
                }
                if fixed > 0.0 {
                    v.push(Piece {
                        lo: (radius - fixed).abs(),
                        hi: radius + fixed,
                        sqrt_edges: true,
                    });
                }
                v
            }
        }
    }
}

fn check_nonneg(name: &str, v: f64) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
    }
    Ok(())
}

/// `∫ f` over `[a, b]` intersected with the pieces.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(
    pieces: &[Piece],
    a: f64,
    b: f64,
    mut f: F,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let mut total = 0.0;
    for p in pieces {
        let lo = a.max(p.lo);
        let hi = b.min(p.hi);
        if !(hi > lo) {
            continue;
        }
        total += if p.sqrt_edges {
            integrate_sqrt_edges(&mut f, lo, hi, p.lo, p.hi, quad)?
        } else {
            integrate_finite(&mut f, lo, hi, quad)?
        };
    }
    Ok(total)
}

/// Quadrature settings for the distance-law integrals.
#[derive(Debug, Clone, Copy)]
pub struct DistanceLaw {
    pub quad: QuadratureConfig,
    pub tail_sigmas: f64,
}

impl Default for DistanceLaw {
    fn default() -> Self {
        Self {
            quad: QuadratureConfig::default(),
            tail_sigmas: DEFAULT_TAIL_SIGMAS,
        }
    }
}

impl DistanceLaw {
    pub fn new(quad: QuadratureConfig, tail_sigmas: f64) -> Self {
        Self { quad, tail_sigmas }
    }

    /// `∫ f_d(y|z) g(y) dy` over `[a, b] ∩ support`.
    fn integrate_against<G: Fn(f64) -> f64>(
        &self,
        kernel: &OffspringKernel,
        z: f64,
        a: f64,
        b: f64,
        g: G,
        quad: &QuadratureConfig,
    ) -> Result<f64> {
        let pieces = kernel.pieces(z, self.tail_sigmas);
        integrate_pieces(&pieces, a, b, |y| kernel.pdf(y, z) * g(y), quad)
    }

    /// `F_d(r | z)`, clamped to `[0, 1]`.
    pub fn cdf(&self, kernel: &OffspringKernel, r: f64, z: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let v = self.integrate_against(kernel, z, 0.0, r, |_| 1.0, &self.quad)?;
        Ok(v.clamp(0.0, 1.0))
    }

    /// The exponent `D` of `C_{j,k}(r,z) = exp(-D)`:
    /// `m̄ (F_d(a|z) + ∫_a^∞ f_d(y|z) τ/(τ + (y/a)^α) dy)` with `a = P̄ r`.
    ///
    /// Working with `D` instead of `C` keeps `1 - C = -expm1(-D)` accurate
    /// when the cluster is far away.
    pub fn cluster_deficit(
        &self,
        kernel: &OffspringKernel,
        mbar: f64,
        tau: f64,
        alpha: f64,
        pbar: f64,
        r: f64,
        z: f64,
    ) -> Result<f64> {
        let a = pbar * r;
        if a == 0.0 || mbar == 0.0 {
            return Ok(0.0);
        }
        let inside = self.integrate_against(kernel, z, 0.0, a, |_| 1.0, &self.quad)?;
        let outside = if tau > 0.0 {
            let inv_a = 1.0 / a;
            let weight = |y: f64| {
                let u = y * inv_a;
                let p = if alpha == 4.0 {
                    let u2 = u * u;
                    u2 * u2
                } else {
                    u.powf(alpha)
                };
                tau / (tau + p)
            };
            // The weight can be tiny for distant clusters; keep the absolute
            // tolerance proportional to it so the relative accuracy holds.
            let quad = QuadratureConfig {
                abs_tol: self.quad.abs_tol * weight(z.max(a)).max(f64::MIN_POSITIVE),
                ..self.quad
            };
            self.integrate_against(kernel, z, a, f64::INFINITY, weight, &quad)?
        } else {
            0.0
        };
        Ok(mbar * (inside + outside))
    }
}

/// `f_d(x | z)`: density of the distance from the origin of an offspring
/// point whose cluster center is at distance `z`.
pub fn conditional_distance_pdf(kernel: &OffspringKernel, x: f64, z: f64) -> Result<f64> {
    kernel.validate()?;
    check_nonneg("x", x)?;
    check_nonneg("z", z)?;
    Ok(kernel.pdf(x, z))
}

/// `F_d(r | z)` by quadrature of the density.
pub fn conditional_distance_cdf(kernel: &OffspringKernel, r: f64, z: f64) -> Result<f64> {
    kernel.validate()?;
    check_nonneg("r", r)?;
    check_nonneg("z", z)?;
    DistanceLaw::default().cdf(kernel, r, z)
}

/// Contact distance CDF of a cluster tier given its parent distances:
/// `1 - exp(-m̄ Σ_z F_d(r|z))`.
pub fn contact_distance_cdf_given_parents(
    kernel: &OffspringKernel,
    mbar: f64,
    parents: &[f64],
    r: f64,
) -> Result<f64> {
    kernel.validate()?;
    check_nonneg("mbar", mbar)?;
    check_nonneg("r", r)?;
    let law = DistanceLaw::default();
    let mut sum = 0.0;
    for &z in parents {
        check_nonneg("parent distance", z)?;
        sum += law.cdf(kernel, r, z)?;
    }
    Ok(-(-mbar * sum).exp_m1())
}

/// Contact distance CDF of a homogeneous PPP: `1 - exp(-π λ r²)`.
pub fn contact_distance_cdf_ppp(lambda: f64, r: f64) -> Result<f64> {
    check_nonneg("lambda", lambda)?;
    check_nonneg("r", r)?;
    Ok(-(-PI * lambda * r * r).exp_m1())
}

/// Memo of `ρ(τ, α)` keyed on the exact bit patterns of its arguments.
#[derive(Debug, Default)]
pub struct RhoCache {
    memo: Mutex<HashMap<(u64, u64), f64>>,
}

impl RhoCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.memo.lock().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `ρ(τ, α) = 1 + τ^{2/α} ∫_{τ^{-2/α}}^∞ dt / (1 + t^{α/2})`, memoized.
pub fn rho(tau: f64, alpha: f64, cache: &RhoCache) -> Result<f64> {
    let key = (tau.to_bits(), alpha.to_bits());
    if let Some(v) = cache.memo.lock().ok().and_then(|m| m.get(&key).copied()) {
        return Ok(v);
    }
    let v = rho_uncached(tau, alpha)?;
    if let Ok(mut m) = cache.memo.lock() {
        m.insert(key, v);
    }
    Ok(v)
}

/// `ρ(τ, α)` without memoization.
pub fn rho_uncached(tau: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) || !alpha.is_finite() {
        return Err(Error::domain(format!(
            "path-loss exponent must satisfy alpha > 2, got {alpha}"
        )));
    }
    check_nonneg("tau", tau)?;
    if tau == 0.0 {
        return Ok(1.0);
    }
    if tau.is_infinite() {
        return Ok(f64::INFINITY);
    }
    if alpha == 4.0 {
        let s = tau.sqrt();
        return Ok(1.0 + s * (FRAC_PI_2 - (1.0 / s).atan()));
    }
    let lower = tau.powf(-2.0 / alpha);
    Ok(1.0 + tau.powf(2.0 / alpha) * power_tail_integral(lower, alpha / 2.0)?)
}

/// `∫_L^∞ dt / (1 + t^β)` for `β > 1`: quadrature up to `T = max(L, 2)`,
/// then the alternating expansion `Σ (-1)^k T^{1-β(k+1)} / (β(k+1) - 1)`.
fn power_tail_integral(lower: f64, beta: f64) -> Result<f64> {
    let t = lower.max(2.0);
    let head = if lower < t {
        integrate_finite(
            |x| 1.0 / (1.0 + x.powf(beta)),
            lower,
            t,
            &QuadratureConfig::default(),
        )?
    } else {
        0.0
    };
    let mut tail = 0.0;
    let mut sign = 1.0;
    for k in 0..400 {
        let e = beta * (k as f64 + 1.0) - 1.0;
        let term = t.powf(-e) / e;
        tail += sign * term;
        sign = -sign;
        if term < 1e-17 * tail.abs() {
            break;
        }
    }
    Ok(head + tail)
}

/// `C_{j,k}(r, z)`: probability-generating factor of one cluster of tier
/// `j` at parent distance `z`, for a user served at distance `r` by tier
/// `k` with threshold `tau_k`.
pub fn cluster_factor(
    kernel_j: &OffspringKernel,
    mbar_j: f64,
    tau_k: f64,
    alpha: f64,
    pbar_jk: f64,
    r: f64,
    z: f64,
) -> Result<f64> {
    kernel_j.validate()?;
    check_nonneg("r", r)?;
    check_nonneg("z", z)?;
    check_nonneg("mbar", mbar_j)?;
    check_nonneg("tau", tau_k)?;
    if !(pbar_jk > 0.0) {
        return Err(Error::domain("power ratio must be > 0"));
    }
    if !(alpha > 2.0) {
        return Err(Error::domain("alpha must be > 2"));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let d =
        DistanceLaw::default().cluster_deficit(kernel_j, mbar_j, tau_k, alpha, pbar_jk, r, z)?;
    Ok((-d).exp())
}
