//! Quadrature evaluation of association, serving distance and coverage.
//!
//! Conditioned on the parent processes, every cluster tier is an
//! inhomogeneous PPP; deconditioning turns the conditional coverage into
//! PGFLs and sum-product functionals of the parent PPPs, each of which is a
//! one-dimensional integral over the parent distance `z`. The coverage of
//! tier `i` is then an outer integral over the serving distance `r`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{integrate_pieces, rho, DistanceLaw, OffspringKernel, Piece, RhoCache};
use crate::model::{CoverageQuery, CoverageResult, NetworkModel, TierKind, UserModel};
use crate::quadrature::{
    integrate_algebraic, integrate_finite, integrate_piecewise, integrate_semi_infinite,
    QuadratureConfig,
};

/// Evaluation context for one network: quadrature settings and a `ρ` memo.
pub struct Evaluator<'a> {
    net: &'a NetworkModel,
    law: DistanceLaw,
    quad: QuadratureConfig,
    rho_cache: RhoCache,
}

/// Which user coupling the coverage formula should use.
#[derive(Debug, Clone, Copy)]
enum Coupling<'k> {
    Independent,
    Representative {
        q: usize,
        user_kernel: &'k OffspringKernel,
    },
}

impl<'a> Evaluator<'a> {
    pub fn new(net: &'a NetworkModel, quad: QuadratureConfig, tail_sigmas: f64) -> Self {
        Self {
            net,
            law: DistanceLaw::new(quad, tail_sigmas),
            quad,
            rho_cache: RhoCache::new(),
        }
    }

    pub fn with_defaults(net: &'a NetworkModel) -> Self {
        Self::new(
            net,
            QuadratureConfig::default(),
            crate::kernels::DEFAULT_TAIL_SIGMAS,
        )
    }

    fn coupling(&self) -> Coupling<'a> {
        match &self.net.user {
            UserModel::Type1 => Coupling::Independent,
            UserModel::Type2 { q, user_kernel } => Coupling::Representative { q: *q, user_kernel },
        }
    }

    /// Length scale of the serving distance to tier `i`.
    fn r_scale(&self, i: usize) -> f64 {
        let net = self.net;
        let eff: f64 = (0..net.len())
            .map(|j| net.tiers[j].mean_density() * net.pbar(j, i).powi(2))
            .sum();
        if eff > 0.0 {
            return 1.0 / (PI * eff).sqrt();
        }
        match self.coupling() {
            Coupling::Representative { user_kernel, .. } => user_kernel.length(),
            Coupling::Independent => 1.0,
        }
    }

    /// `-log C_{j,i}(r, z)`.
    fn deficit(&self, j: usize, i: usize, tau: f64, r: f64, z: f64) -> Result<f64> {
        match self.net.tiers[j].kind {
            TierKind::Cluster {
                mean_size, kernel, ..
            } => self.law.cluster_deficit(
                &kernel,
                mean_size,
                tau,
                self.net.alpha,
                self.net.pbar(j, i),
                r,
                z,
            ),
            TierKind::Poisson { .. } => Ok(0.0),
        }
    }

    /// `2π λ_p ∫_0^∞ (1 - C_{j,i}(r, z)) z dz`, the exponent of the PGFL
    /// of tier `j`'s parent process.
    fn pgfl_exponent(&self, j: usize, i: usize, tau: f64, r: f64) -> Result<f64> {
        let TierKind::Cluster {
            parent_density,
            mean_size,
            kernel,
        } = self.net.tiers[j].kind
        else {
            return Ok(0.0);
        };
        if parent_density == 0.0 || mean_size == 0.0 || r == 0.0 {
            return Ok(0.0);
        }
        let a = self.net.pbar(j, i) * r;
        let mut err = None;
        let mut g = |z: f64| match self.deficit(j, i, tau, r, z) {
            Ok(d) => -(-d).exp_m1() * z,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        };
        // Up to where the cluster can reach inside the exclusion disc, the
        // integrand has kinks at the support edges; beyond it is smooth.
        let (near, split) = match kernel {
            OffspringKernel::UniformDisc { radius } => {
                let split = a + radius;
                (
                    integrate_piecewise(&mut g, 0.0, split, &[(a - radius).abs()], &self.quad)?,
                    split,
                )
            }
            OffspringKernel::Gaussian { .. } => (0.0, 0.0),
        };
        // Far clusters contribute about m̄τ(a/z)^α each, so the integrand
        // decays like z^{1-α}: too slowly for shell doubling when α is near 2.
        // Past `z_far` the kernel densities lose precision, while the
        // expansion in (a/z)^α and E|X|²/z² is exact well below tolerance.
        let alpha = self.net.alpha;
        let knee = split + 4.0 * (kernel.length() + a);
        let z_far = 1e2 * (knee + kernel.length());
        let mid = integrate_finite(&mut g, split, knee, &self.quad)?
            + integrate_algebraic(&mut g, knee, z_far, alpha - 1.0, &self.quad)?;
        if let Some(e) = err {
            return Err(e);
        }
        let m2 = match kernel {
            OffspringKernel::Gaussian { sigma } => 2.0 * sigma * sigma,
            OffspringKernel::UniformDisc { radius } => 0.5 * radius * radius,
        };
        let far_field = |z: f64| {
            let s = tau * (a / z).powf(alpha);
            let d = mean_size * (s * (1.0 + 0.25 * alpha * alpha * m2 / (z * z)) - s * s);
            -(-d).exp_m1() * z
        };
        let far = integrate_algebraic(far_field, z_far, f64::INFINITY, alpha - 1.0, &self.quad)?;
        let v = near + mid + far;
        Ok(2.0 * PI * parent_density * v)
    }

    /// `2π λ_p ∫ f_{d_i}(r|z) C_{i,i}(r,z) z dz`, the sum-product term of
    /// the serving tier's parent process.
    fn sum_product(&self, i: usize, tau: f64, r: f64) -> Result<f64> {
        let TierKind::Cluster {
            parent_density,
            kernel,
            ..
        } = self.net.tiers[i].kind
        else {
            return Ok(0.0);
        };
        if parent_density == 0.0 {
            return Ok(0.0);
        }
        let pieces = kernel.pieces(r, self.law.tail_sigmas);
        let mut err = None;
        let v = integrate_pieces(
            &pieces,
            0.0,
            f64::INFINITY,
            |z| {
                let f = kernel.pdf(r, z);
                if f == 0.0 {
                    return 0.0;
                }
                match self.deficit(i, i, tau, r, z) {
                    Ok(d) => f * (-d).exp() * z,
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            },
            &self.quad,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(2.0 * PI * parent_density * v)
    }

    /// Expectation over the representative cluster center `z0 ~ f_{d_u}(·|0)`
    /// of `C_{q,i}(r, z0)`, optionally weighted by `f_{d_q}(r | z0)`.
    fn representative(
        &self,
        q: usize,
        user_kernel: &OffspringKernel,
        i: usize,
        tau: f64,
        r: f64,
        with_pdf: bool,
    ) -> Result<f64> {
        let kernel_q = *self.net.tiers[q]
            .kernel()
            .ok_or_else(|| Error::config("network.user.q", "must index a cluster tier"))?;
        // The user offset density at z = 0 is smooth on its own support. The
        // pieces of f_{d_q}(r | ·) carry the remaining kinks when it is a
        // factor; otherwise those of C_{q,i}(r, ·) do.
        let reach = user_kernel.reach(self.law.tail_sigmas);
        let pieces = if with_pdf {
            kernel_q.pieces(r, self.law.tail_sigmas)
        } else {
            let a = self.net.pbar(q, i) * r;
            let mut edges = vec![0.0, reach];
            if let OffspringKernel::UniformDisc { radius } = kernel_q {
                edges.extend(
                    [(a - radius).abs(), a + radius]
                        .into_iter()
                        .filter(|&e| e > 0.0 && e < reach),
                );
            }
            edges.sort_by(f64::total_cmp);
            edges
                .windows(2)
                .map(|w| Piece {
                    lo: w[0],
                    hi: w[1],
                    sqrt_edges: false,
                })
                .collect()
        };
        let mut err = None;
        let v = integrate_pieces(
            &pieces,
            0.0,
            reach,
            |z0| {
                let w = user_kernel.pdf(z0, 0.0);
                let w = if with_pdf { w * kernel_q.pdf(r, z0) } else { w };
                if w == 0.0 {
                    return 0.0;
                }
                match self.deficit(q, i, tau, r, z0) {
                    Ok(d) => w * (-d).exp(),
                    Err(e) => {
                        err.get_or_insert(e);
                        0.0
                    }
                }
            },
            &self.quad,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(v)
    }

    /// Integrand over the serving distance `r` of `P(SINR > τ, S_i)`.
    fn integrand(
        &self,
        i: usize,
        tau: f64,
        noise: f64,
        rho_i: f64,
        ppp_coeff: f64,
        r: f64,
    ) -> Result<f64> {
        let net = self.net;
        let tier = &net.tiers[i];
        let mut exponent = PI * r * r * ppp_coeff * rho_i;
        if noise > 0.0 && tau > 0.0 {
            exponent += tau * noise * r.powf(net.alpha) / tier.power;
        }
        if exponent > 745.0 {
            return Ok(0.0);
        }
        for j in 0..net.len() {
            exponent += self.pgfl_exponent(j, i, tau, r)?;
            if exponent > 745.0 {
                return Ok(0.0);
            }
        }
        let common = (-exponent).exp();

        let serving = match (tier.kind, self.coupling()) {
            (TierKind::Poisson { density }, Coupling::Independent) => 2.0 * PI * density * r,
            (TierKind::Poisson { density }, Coupling::Representative { q, user_kernel }) => {
                2.0 * PI * density * r * self.representative(q, user_kernel, i, tau, r, false)?
            }
            (TierKind::Cluster { mean_size, .. }, Coupling::Independent) => {
                mean_size * self.sum_product(i, tau, r)?
            }
            (TierKind::Cluster { mean_size, .. }, Coupling::Representative { q, user_kernel }) => {
                if i == q {
                    let own = self.representative(q, user_kernel, i, tau, r, true)?;
                    let others = self.sum_product(i, tau, r)?;
                    let rep = if others > 0.0 {
                        self.representative(q, user_kernel, i, tau, r, false)?
                    } else {
                        0.0
                    };
                    mean_size * (own + others * rep)
                } else {
                    let sp = self.sum_product(i, tau, r)?;
                    if sp == 0.0 {
                        0.0
                    } else {
                        mean_size * sp * self.representative(q, user_kernel, i, tau, r, false)?
                    }
                }
            }
        };
        Ok(common * serving)
    }

    /// `P(SINR > τ, S_i)` with the given threshold and noise power; setting
    /// both to zero yields the association probability `P(S_i)`.
    pub fn tier_term(&self, i: usize, tau: f64, noise: f64) -> Result<f64> {
        self.net.check_tier(i)?;
        let net = self.net;
        let tier = &net.tiers[i];
        let has_mass = match (tier.kind, self.coupling()) {
            (_, Coupling::Representative { q, .. }) if q == i => {
                matches!(tier.kind, TierKind::Cluster { mean_size, .. } if mean_size > 0.0)
            }
            _ => tier.mean_density() > 0.0,
        };
        if !has_mass {
            return Ok(0.0);
        }
        let rho_i = rho(tau, net.alpha, &self.rho_cache)?;
        let ppp_coeff: f64 = net
            .tiers
            .iter()
            .enumerate()
            .filter_map(|(j, t)| match t.kind {
                TierKind::Poisson { density } => Some(density * net.pbar(j, i).powi(2)),
                _ => None,
            })
            .sum();
        let mut err = None;
        let v = integrate_semi_infinite(
            |r| match self.integrand(i, tau, noise, rho_i, ppp_coeff, r) {
                Ok(v) => v,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            0.0,
            Some(self.r_scale(i)),
            &self.quad,
        )?;
        if let Some(e) = err {
            return Err(e);
        }
        Ok(v.clamp(0.0, 1.0))
    }

    pub fn association(&self, i: usize) -> Result<f64> {
        self.tier_term(i, 0.0, 0.0)
    }
}

/// `P(S_i)`: probability that the typical user associates with tier `i`.
pub fn association_probability(net: &NetworkModel, i: usize) -> Result<f64> {
    net.validate()?;
    Evaluator::with_defaults(net).association(i)
}

/// `P(S_i | parents)`: association probability with every cluster tier's
/// parent distances fixed. `parents[k]` lists the parent distances of tier
/// `k` (ignored for Poisson tiers).
pub fn association_probability_given_parents(
    net: &NetworkModel,
    i: usize,
    parents: &[Vec<f64>],
) -> Result<f64> {
    let cond = Conditional::new(net, i, parents)?;
    cond.normalizer()
}

/// `f_{s_i}(r | S_i, parents)`: serving-distance density given association
/// to tier `i` and the parent distances of every cluster tier.
pub fn serving_distance_pdf_given_parents(
    net: &NetworkModel,
    i: usize,
    parents: &[Vec<f64>],
    r: f64,
) -> Result<f64> {
    if r.is_nan() || r < 0.0 {
        return Err(Error::domain(format!("r must be >= 0, got {r}")));
    }
    let cond = Conditional::new(net, i, parents)?;
    let norm = cond.normalizer()?;
    if norm < 1e-300 {
        return Err(Error::DegenerateCondition(format!(
            "association to tier {i} has probability {norm:e} given these parents"
        )));
    }
    Ok(cond.density(r)? / norm)
}

/// Serving-distance law conditioned on fixed parent sets.
struct Conditional<'a> {
    net: &'a NetworkModel,
    i: usize,
    parents: &'a [Vec<f64>],
    law: DistanceLaw,
}

impl<'a> Conditional<'a> {
    fn new(net: &'a NetworkModel, i: usize, parents: &'a [Vec<f64>]) -> Result<Self> {
        net.validate()?;
        net.check_tier(i)?;
        if parents.len() != net.len() {
            return Err(Error::domain(format!(
                "expected parent lists for {} tiers, got {}",
                net.len(),
                parents.len()
            )));
        }
        for z in parents.iter().flatten() {
            if z.is_nan() || *z < 0.0 {
                return Err(Error::domain("parent distances must be >= 0"));
            }
        }
        Ok(Self {
            net,
            i,
            parents,
            law: DistanceLaw::default(),
        })
    }

    /// Probability that no base station of any tier outshines tier `i`'s
    /// candidate at distance `r`.
    fn void(&self, r: f64) -> Result<f64> {
        let net = self.net;
        let mut exponent = 0.0;
        for (j, t) in net.tiers.iter().enumerate() {
            let a = net.pbar(j, self.i) * r;
            match t.kind {
                TierKind::Poisson { density } => exponent += PI * density * a * a,
                TierKind::Cluster {
                    mean_size, kernel, ..
                } => {
                    for &z in &self.parents[j] {
                        exponent += mean_size * self.law.cdf(&kernel, a, z)?;
                    }
                }
            }
        }
        Ok((-exponent).exp())
    }

    /// Unnormalized density (numerator of the serving-distance law).
    fn density(&self, r: f64) -> Result<f64> {
        let tier = &self.net.tiers[self.i];
        let lead = match tier.kind {
            TierKind::Poisson { density } => 2.0 * PI * density * r,
            TierKind::Cluster {
                mean_size, kernel, ..
            } => {
                mean_size
                    * self.parents[self.i]
                        .iter()
                        .map(|&z| kernel.pdf(r, z))
                        .sum::<f64>()
            }
        };
        if lead == 0.0 {
            return Ok(0.0);
        }
        Ok(lead * self.void(r)?)
    }

    fn normalizer(&self) -> Result<f64> {
        let quad = QuadratureConfig::default();
        let tier = &self.net.tiers[self.i];
        let mut err = None;
        let mut guarded = |r: f64| match self.void(r) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        };
        let v = match tier.kind {
            TierKind::Poisson { density } => {
                if density == 0.0 {
                    return Ok(0.0);
                }
                let eff: f64 = self
                    .net
                    .tiers
                    .iter()
                    .enumerate()
                    .filter_map(|(j, t)| match t.kind {
                        TierKind::Poisson { density } => {
                            Some(density * self.net.pbar(j, self.i).powi(2))
                        }
                        _ => None,
                    })
                    .sum();
                integrate_semi_infinite(
                    |r| 2.0 * PI * density * r * guarded(r),
                    0.0,
                    Some(1.0 / (PI * eff).sqrt()),
                    &quad,
                )?
            }
            TierKind::Cluster {
                mean_size, kernel, ..
            } => {
                // One finite integral per parent over the support of f_d(·|z).
                let mut total = 0.0;
                for &z in &self.parents[self.i] {
                    let pieces = kernel.pieces(z, self.law.tail_sigmas);
                    total += integrate_pieces(
                        &pieces,
                        0.0,
                        f64::INFINITY,
                        |r| {
                            let f = kernel.pdf(r, z);
                            if f == 0.0 {
                                0.0
                            } else {
                                f * guarded(r)
                            }
                        },
                        &quad,
                    )?;
                }
                mean_size * total
            }
        };
        if let Some(e) = err {
            return Err(e);
        }
        Ok(v)
    }
}

fn require_user(net: &NetworkModel, type2: bool) -> Result<()> {
    match (&net.user, type2) {
        (UserModel::Type1, false) | (UserModel::Type2 { .. }, true) => Ok(()),
        (UserModel::Type1, true) => Err(Error::config(
            "network.user",
            "type 2 coverage requested for a type 1 network",
        )),
        (UserModel::Type2 { .. }, false) => Err(Error::config(
            "network.user",
            "type 1 coverage requested for a type 2 network",
        )),
    }
}

fn tier_coverage(net: &NetworkModel, query: &CoverageQuery, i: usize) -> Result<f64> {
    net.validate()?;
    query.validate(net)?;
    net.check_tier(i)?;
    Evaluator::new(net, query.quad, query.z_truncation_multiplier).tier_term(
        i,
        query.taus[i],
        net.noise,
    )
}

/// `P(SINR > τ_i, S_i)` for users independent of the base stations.
pub fn coverage_tier_type1(net: &NetworkModel, query: &CoverageQuery, i: usize) -> Result<f64> {
    require_user(net, false)?;
    tier_coverage(net, query, i)
}

/// `P(SINR > τ_i, S_i)` for users clustered around tier `q`'s parents.
pub fn coverage_tier_type2(net: &NetworkModel, query: &CoverageQuery, i: usize) -> Result<f64> {
    require_user(net, true)?;
    tier_coverage(net, query, i)
}

/// Per-tier and total coverage plus association probabilities.
pub fn coverage(net: &NetworkModel, query: &CoverageQuery) -> Result<CoverageResult> {
    net.validate()?;
    query.validate(net)?;
    let ev = Evaluator::new(net, query.quad, query.z_truncation_multiplier);
    let mut per_tier = Vec::with_capacity(net.len());
    let mut association = Vec::with_capacity(net.len());
    for i in 0..net.len() {
        per_tier.push(ev.tier_term(i, query.taus[i], net.noise)?);
        association.push(ev.association(i)?);
    }
    let total = per_tier.iter().sum();
    Ok(CoverageResult {
        per_tier,
        total,
        association,
    })
}

/// Interference-limited coverage of an all-Poisson network:
/// `Σ_i λ_i P_i^{2/α} / (Σ_j λ_j P_j^{2/α} ρ(τ_i, α))`.
pub fn coverage_ppp_closed_form(
    lambdas: &[f64],
    powers: &[f64],
    taus: &[f64],
    alpha: f64,
) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::domain(format!("alpha must be > 2, got {alpha}")));
    }
    if lambdas.len() != powers.len() || lambdas.len() != taus.len() || lambdas.is_empty() {
        return Err(Error::domain(
            "lambdas, powers and taus must have equal non-zero length",
        ));
    }
    let weights: Vec<f64> = lambdas
        .iter()
        .zip(powers)
        .map(|(l, p)| l * p.powf(2.0 / alpha))
        .collect();
    let denom: f64 = weights.iter().sum();
    if !(denom > 0.0) {
        return Err(Error::domain("network has no base stations"));
    }
    let cache = RhoCache::new();
    let mut total = 0.0;
    for (w, &tau) in weights.iter().zip(taus) {
        total += w / (denom * rho(tau, alpha, &cache)?);
    }
    Ok(total)
}

/// Equi-coverage rescaling: intensities divided by `l²`, kernel lengths
/// (including the user kernel) multiplied by `l`.
pub fn scale_network(net: &NetworkModel, l: f64) -> Result<NetworkModel> {
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::domain(format!("scale factor must be > 0, got {l}")));
    }
    if net.noise != 0.0 {
        return Err(Error::config(
            "network.noise",
            "equi-coverage scaling only holds for interference-limited networks (noise = 0)",
        ));
    }
    let l2 = l * l;
    let mut out = net.clone();
    for t in &mut out.tiers {
        t.kind = match t.kind {
            TierKind::Poisson { density } => TierKind::Poisson {
                density: density / l2,
            },
            TierKind::Cluster {
                parent_density,
                mean_size,
                kernel,
            } => TierKind::Cluster {
                parent_density: parent_density / l2,
                mean_size,
                kernel: kernel.scaled(l),
            },
        };
    }
    if let UserModel::Type2 { q, user_kernel } = net.user {
        out.user = UserModel::Type2 {
            q,
            user_kernel: user_kernel.scaled(l),
        };
    }
    Ok(out)
}

/// Classical single-tier check used by tests and the CLI: coverage of a
/// noisy all-Poisson network by direct quadrature of the closed-form
/// integrand.
pub fn coverage_ppp_quadrature(net: &NetworkModel, taus: &[f64]) -> Result<f64> {
    let cache = RhoCache::new();
    let mut total = 0.0;
    for (i, t) in net.tiers.iter().enumerate() {
        let TierKind::Poisson { density } = t.kind else {
            return Err(Error::domain("all tiers must be Poisson"));
        };
        let rho_i = rho(taus[i], net.alpha, &cache)?;
        let coeff: f64 = net
            .tiers
            .iter()
            .enumerate()
            .map(|(j, tj)| tj.mean_density() * net.pbar(j, i).powi(2))
            .sum::<f64>()
            * rho_i;
        if density == 0.0 {
            continue;
        }
        let scale = 1.0 / (PI * coeff).sqrt();
        let noise = net.noise;
        let tau = taus[i];
        let p = t.power;
        let alpha = net.alpha;
        total += integrate_finite(
            |u| {
                // r = scale * u / (1 - u) maps [0, 1) onto [0, ∞).
                let r = scale * u / (1.0 - u);
                let jac = scale / ((1.0 - u) * (1.0 - u));
                let e = PI * coeff * r * r + tau * noise * r.powf(alpha) / p;
                2.0 * PI * density * r * (-e).exp() * jac
            },
            0.0,
            1.0,
            &QuadratureConfig::default(),
        )?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::TierSpec;
    use approx::assert_abs_diff_eq;

    fn ppp_net(tiers: &[(f64, f64)]) -> NetworkModel {
        NetworkModel::new(
            tiers
                .iter()
                .map(|&(l, p)| TierSpec::poisson(l, p))
                .collect(),
            4.0,
            0.0,
            UserModel::Type1,
        )
        .unwrap()
    }

    #[test]
    fn single_ppp_tier() {
        let net = ppp_net(&[(1e-5, 1.0)]);
        assert_abs_diff_eq!(
            association_probability(&net, 0).unwrap(),
            1.0,
            epsilon = 1e-9
        );
        let q = CoverageQuery::uniform(1.0, 1);
        let c = coverage_tier_type1(&net, &q, 0).unwrap();
        assert_abs_diff_eq!(c, 0.560_099_153_511_557_4, epsilon = 1e-8);
    }

    #[test]
    fn two_ppp_association() {
        let net = ppp_net(&[(2e-6, 1.0), (5e-6, 1.0)]);
        let a0 = association_probability(&net, 0).unwrap();
        assert_abs_diff_eq!(a0, 2.0 / 7.0, epsilon = 1e-8);
    }

    #[test]
    fn closed_form_examples() {
        let c = coverage_ppp_closed_form(&[1e-6], &[1.0], &[1.0], 4.0).unwrap();
        assert_abs_diff_eq!(c, 1.0 / (1.0 + PI / 4.0), epsilon = 1e-15);
        let c = coverage_ppp_closed_form(&[1e-6, 3e-5], &[7.0, 0.1], &[0.0, 0.0], 4.0).unwrap();
        assert_abs_diff_eq!(c, 1.0, epsilon = 1e-15);
        assert!(coverage_ppp_closed_form(&[1e-6], &[1.0], &[1.0], 2.0).is_err());
    }

    #[test]
    fn noisy_ppp_matches_direct_quadrature() {
        let mut net = ppp_net(&[(1e-5, 1.0), (1e-6, 100.0)]);
        net.noise = 1e-12;
        let taus = [1.5, 0.7];
        let q = CoverageQuery::new(taus.to_vec());
        let got = coverage(&net, &q).unwrap().total;
        let want = coverage_ppp_quadrature(&net, &taus).unwrap();
        assert_abs_diff_eq!(got, want, epsilon = 1e-8);
        let noiseless = coverage_ppp_closed_form(&[1e-5, 1e-6], &[1.0, 100.0], &taus, 4.0).unwrap();
        assert!(got < noiseless);
    }

    #[test]
    fn serving_distance_two_ppp_closed_form() {
        let net = ppp_net(&[(3e-6, 1.0), (1e-6, 50.0)]);
        let pbar2 = net.pbar(1, 0).powi(2);
        let eff = 3e-6 + 1e-6 * pbar2;
        let parents = vec![vec![], vec![]];
        for &r in &[0.0, 50.0, 200.0, 600.0] {
            let got = serving_distance_pdf_given_parents(&net, 0, &parents, r).unwrap();
            let want = 2.0 * PI * eff * r * (-PI * eff * r * r).exp();
            assert_abs_diff_eq!(got, want, epsilon = 1e-12);
        }
    }

    #[test]
    fn serving_distance_normalized_for_fixed_parents() {
        let k = OffspringKernel::gaussian(20.0).unwrap();
        let net = NetworkModel::new(
            vec![
                TierSpec::cluster(1e-4, 10.0, k, 1.0),
                TierSpec::poisson(1e-6, 1e3),
            ],
            4.0,
            0.0,
            UserModel::Type1,
        )
        .unwrap();
        let parents = vec![vec![35.0, 80.0, 140.0], vec![]];
        for i in 0..2 {
            let total = integrate_semi_infinite(
                |r| serving_distance_pdf_given_parents(&net, i, &parents, r).unwrap(),
                0.0,
                Some(20.0),
                &QuadratureConfig::default(),
            )
            .unwrap();
            assert_abs_diff_eq!(total, 1.0, epsilon = 1e-5);
            assert_eq!(
                serving_distance_pdf_given_parents(&net, i, &parents, 0.0).unwrap(),
                0.0
            );
        }
        let a: f64 = (0..2)
            .map(|i| association_probability_given_parents(&net, i, &parents).unwrap())
            .sum();
        assert_abs_diff_eq!(a, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn degenerate_condition() {
        let k = OffspringKernel::uniform_disc(5.0).unwrap();
        let net = NetworkModel::new(
            vec![
                TierSpec::cluster(1e-4, 10.0, k, 1.0),
                TierSpec::poisson(1e-6, 1e3),
            ],
            4.0,
            0.0,
            UserModel::Type1,
        )
        .unwrap();
        // No parents of the cluster tier at all.
        let parents = vec![vec![], vec![]];
        assert!(matches!(
            serving_distance_pdf_given_parents(&net, 0, &parents, 3.0),
            Err(Error::DegenerateCondition(_))
        ));
    }

    #[test]
    fn scale_network_rules() {
        let k = OffspringKernel::gaussian(20.0).unwrap();
        let net = NetworkModel::new(
            vec![
                TierSpec::cluster(1e-4, 10.0, k, 1.0),
                TierSpec::poisson(1e-6, 1e3),
            ],
            4.0,
            0.0,
            UserModel::Type2 {
                q: 0,
                user_kernel: k,
            },
        )
        .unwrap();
        assert_eq!(scale_network(&net, 1.0).unwrap(), net);
        let twice = scale_network(&scale_network(&net, 0.5).unwrap(), 0.5).unwrap();
        let once = scale_network(&net, 0.25).unwrap();
        for (a, b) in twice.tiers.iter().zip(&once.tiers) {
            assert!((a.mean_density() - b.mean_density()).abs() <= 1e-15 * b.mean_density());
        }
        let mut noisy = net.clone();
        noisy.noise = 1e-13;
        assert!(matches!(
            scale_network(&noisy, 2.0),
            Err(Error::Config { .. })
        ));
    }

    #[test]
    fn wrong_user_model_is_config_error() {
        let net = ppp_net(&[(1e-6, 1.0)]);
        let q = CoverageQuery::uniform(1.0, 1);
        assert!(matches!(
            coverage_tier_type2(&net, &q, 0),
            Err(Error::Config { .. })
        ));
    }
}
