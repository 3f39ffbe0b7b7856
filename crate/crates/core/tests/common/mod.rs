//! Statistics shared by the integration tests.
#![allow(dead_code)]

use hetnet_coverage::kernels::contact_distance_cdf_given_parents;
use hetnet_coverage::pointprocess::{sample_offset, trial_rng, Point};
use hetnet_coverage::OffspringKernel;
use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// One-sample Kolmogorov–Smirnov distance of `sample` against `cdf`.
pub fn ks_distance(sample: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    sample.sort_by(f64::total_cmp);
    let n = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample KS distance, with both empirical CDFs evaluated only up to `limit`.
pub fn ks_two_sample(a: &mut [f64], b: &mut [f64], limit: f64) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        if x > limit {
            break;
        }
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Standard error of the mean of a Poisson variable with mean `mu` over `n` draws.
pub fn poisson_se(mu: f64, n: usize) -> f64 {
    (mu / n as f64).sqrt()
}

/// Two-tier network with clustered small cells under a Poisson macro tier.
pub fn two_tier(
    kernel: OffspringKernel,
    user: hetnet_coverage::UserModel,
) -> hetnet_coverage::NetworkModel {
    use hetnet_coverage::{NetworkModel, TierSpec};
    NetworkModel::new(
        vec![
            TierSpec::cluster(1e-4, 10.0, kernel, 1.0),
            TierSpec::poisson(1e-6, 1e3),
        ],
        4.0,
        0.0,
        user,
    )
    .unwrap()
}

/// Nearest offspring distance over clusters with fixed centers.
pub fn nearest_given_parents<R: Rng>(
    kernel: &OffspringKernel,
    mbar: f64,
    centers: &[Point],
    rng: &mut R,
) -> f64 {
    let pois = Poisson::new(mbar).unwrap();
    let mut best = f64::INFINITY;
    for c in centers {
        let n: f64 = pois.sample(rng);
        for _ in 0..n as u64 {
            let o = sample_offset(kernel, rng);
            let d = ((c.x + o.x).powi(2) + (c.y + o.y).powi(2)).sqrt();
            best = best.min(d);
        }
    }
    best
}

/// KS distance of simulated nearest-offspring distances against the
/// conditional contact CDF, for fixed parents at the given distances.
pub fn contact_ks(kernel: OffspringKernel, parents: &[f64]) -> f64 {
    let centers: Vec<Point> = parents
        .iter()
        .enumerate()
        .map(|(k, &z)| {
            let th = 1.3 * k as f64;
            Point {
                x: z * th.cos(),
                y: z * th.sin(),
            }
        })
        .collect();
    let mut rng = trial_rng(13, 0);
    let mut sample: Vec<f64> = (0..10_000)
        .map(|_| nearest_given_parents(&kernel, 10.0, &centers, &mut rng))
        .collect();
    ks_distance(&mut sample, |r| {
        if r.is_finite() {
            contact_distance_cdf_given_parents(&kernel, 10.0, parents, r).unwrap()
        } else {
            1.0
        }
    })
}

/// Mean over simulated clusters at parent distance `z` of
/// `∏_y 1{|y| ≥ r} / (1 + τ (r/|y|)^α)`.
pub fn cluster_factor_oracle(
    kernel: &OffspringKernel,
    mbar: f64,
    tau: f64,
    r: f64,
    z: f64,
    n: u64,
) -> (f64, f64) {
    let pois = Poisson::new(mbar).unwrap();
    let mut rng = trial_rng(31, 0);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..n {
        let count: f64 = pois.sample(&mut rng);
        let mut prod = 1.0;
        for _ in 0..count as u64 {
            let o = sample_offset(kernel, &mut rng);
            let y = ((z + o.x).powi(2) + o.y.powi(2)).sqrt();
            if y < r {
                prod = 0.0;
            } else {
                prod /= 1.0 + tau * (r / y).powi(4);
            }
        }
        s += prod;
        s2 += prod * prod;
    }
    let m = s / n as f64;
    (m, ((s2 / n as f64 - m * m) / n as f64).sqrt())
}
