//! One-dimensional adaptive quadrature.
//!
//! Finite intervals use a globally adaptive 15-point Gauss–Kronrod rule
//! with an embedded 7-point Gauss error estimate (QUADPACK `qag` style).
//! Semi-infinite intervals are truncated by integrating successive doubling
//! shells until the tail contribution becomes negligible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerances and budgets shared by every integral in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    /// A doubling shell whose contribution is below this fraction of the
    /// running total counts as tail.
    pub tail_cutoff_epsilon: f64,
    /// Hard ceiling on the truncation point, as a power of two times the
    /// initial scale.
    pub max_doublings: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 200,
            tail_cutoff_epsilon: 1e-10,
            max_doublings: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::config("quadrature.rel_tol", "must be > 0"));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::config("quadrature.abs_tol", "must be > 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::config("quadrature.max_subdivisions", "must be >= 1"));
        }
        if !(self.tail_cutoff_epsilon > 0.0) {
            return Err(Error::config(
                "quadrature.tail_cutoff_epsilon",
                "must be > 0",
            ));
        }
        Ok(())
    }

    /// Same budget with relative and absolute tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rel_tol: self.rel_tol * factor,
            abs_tol: self.abs_tol * factor,
            ..*self
        }
    }
}

// Kronrod abscissae; odd indices (1, 3, 5, 7) are the Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    if !fc.is_finite() {
        return Err(Error::domain(format!(
            "integrand not finite at x = {center}"
        )));
    }
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        if !f1.is_finite() || !f2.is_finite() {
            return Err(Error::domain(format!(
                "integrand not finite near x = {}",
                if f1.is_finite() {
                    center + dx
                } else {
                    center - dx
                }
            )));
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error })
}

fn adaptive<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_subdivisions: usize,
) -> Result<(f64, f64)> {
    let first = gk15(f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    if error <= abs_tol.max(rel_tol * value.abs()) {
        return Ok((value, error));
    }
    let mut heap = BinaryHeap::with_capacity(max_subdivisions + 1);
    heap.push(first);
    for _ in 1..max_subdivisions {
        let worst = match heap.pop() {
            Some(s) => s,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        // Interval can no longer be split in floating point.
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        let left = gk15(f, worst.a, mid)?;
        let right = gk15(f, mid, worst.b)?;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if error <= abs_tol.max(rel_tol * value.abs()) {
            // Re-sum to shed the drift of the running updates.
            let v: f64 = heap.iter().map(|s| s.value).sum();
            let e: f64 = heap.iter().map(|s| s.error).sum();
            return Ok((v, e));
        }
    }
    let v: f64 = heap.iter().map(|s| s.value).sum();
    let e: f64 = heap.iter().map(|s| s.error).sum();
    if e <= abs_tol.max(rel_tol * v.abs()) {
        return Ok((v, e));
    }
    Err(Error::NonConvergence {
        estimate: v,
        error_bound: e,
    })
}

/// Integrates `f` over `[a, b]`, returning the value and its error estimate.
pub fn integrate_finite_with_error<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<(f64, f64)> {
    if a.is_nan() || b.is_nan() || !(a <= b) {
        return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
    }
    if a == b {
        return Ok((0.0, 0.0));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::domain("finite interval required"));
    }
    adaptive(&mut f, a, b, cfg.rel_tol, cfg.abs_tol, cfg.max_subdivisions)
}

/// Integrates `f` over `[a, b]`.
///
/// Integrable singularities are tolerated at the endpoints only, since the
/// rule never samples them.
pub fn integrate_finite<F: FnMut(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    integrate_finite_with_error(f, a, b, cfg).map(|(v, _)| v)
}

/// Integrates over `[a, b]` split at the given interior breakpoints.
///
/// Breakpoints outside `(a, b)` are ignored; use this where the integrand
/// has kinks or support edges at known locations.
pub fn integrate_piecewise<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if a.is_nan() || b.is_nan() || !(a <= b) {
        return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
    }
    let mut edges: Vec<f64> = Vec::with_capacity(breaks.len() + 2);
    edges.push(a);
    edges.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    edges.push(b);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut total = 0.0;
    for w in edges.windows(2) {
        total += integrate_finite(&mut f, w[0], w[1], cfg)?;
    }
    Ok(total)
}

/// Integrates `f` over `[a, b] ⊆ [lo, hi]` where `f` behaves like a square
/// root at `lo` and `hi`.
///
/// The substitution `y = m - h cos φ` (midpoint `m`, half-width `h`) turns
/// such edges into smooth endpoints, which the Kronrod rule handles at full
/// order.
pub fn integrate_sqrt_edges<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    lo: f64,
    hi: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(lo <= a && a <= b && b <= hi) {
        return Err(Error::domain(format!(
            "[{a}, {b}] must lie inside [{lo}, {hi}]"
        )));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let phi = |y: f64| ((m - y) / h).clamp(-1.0, 1.0).acos();
    integrate_finite(
        |t| {
            let (s, c) = t.sin_cos();
            f(m - h * c) * h * s
        },
        phi(a),
        phi(b),
        cfg,
    )
}

/// Integrates `f` over `[a, b]`, `b` possibly infinite, for `f(z) ~ c·z^{-p}`
/// with `p > 1`.
///
/// With `u = z^{1-p}` the integral becomes `∫ f(z(u)) z^p / (p-1) du` over
/// `[b^{1-p}, a^{1-p}]`: a finite interval with a bounded integrand, where
/// shell doubling would need about `1/(p-1)` times more shells per decade
/// of accuracy.
pub fn integrate_algebraic<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    p: f64,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) || !(b >= a) {
        return Err(Error::domain("algebraic substitution needs 0 < a <= b"));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::domain(format!(
            "tail exponent must exceed 1, got {p}"
        )));
    }
    let q = 1.0 / (p - 1.0);
    let lo = if b.is_finite() { b.powf(1.0 - p) } else { 0.0 };
    integrate_finite(
        |u| {
            let z = u.powf(-q);
            if !z.is_finite() {
                return 0.0;
            }
            let v = f(z);
            if v == 0.0 {
                0.0
            } else {
                v * z.powf(p) * q
            }
        },
        lo,
        a.powf(1.0 - p),
        cfg,
    )
}

/// Integrates `f` over `[a, ∞)` by shell doubling.
///
/// Shells are `[a, a+s]`, `[a+s, a+2s]`, `[a+2s, a+4s]`, ... with `s` the
/// caller's length scale (1.0 when `None`). Integration stops once two
/// consecutive shells each contribute less than `tail_cutoff_epsilon`
/// times the running total.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: Option<f64>,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    if !a.is_finite() {
        return Err(Error::domain("lower limit must be finite"));
    }
    let scale = match scale {
        Some(s) if s.is_finite() && s > 0.0 => s,
        _ => 1.0,
    };
    let ceiling = scale * 2f64.powi(cfg.max_doublings as i32);
    let mut total: f64 = 0.0;
    let mut error = 0.0;
    let mut quiet = 0;
    let mut lo = a;
    let mut width = scale;
    let mut shells = 0;
    loop {
        let hi = lo + width;
        let abs_tol = cfg.abs_tol.max(0.1 * cfg.rel_tol * total.abs());
        let (v, e) = adaptive(&mut f, lo, hi, cfg.rel_tol, abs_tol, cfg.max_subdivisions)?;
        total += v;
        error += e;
        shells += 1;
        if v.abs() <= cfg.tail_cutoff_epsilon * total.abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= 2 && shells >= 3 {
            return Ok(total);
        }
        if hi - a > ceiling {
            return Err(Error::NonConvergence {
                estimate: total,
                error_bound: error + v.abs(),
            });
        }
        lo = hi;
        if shells > 1 {
            width *= 2.0;
        }
    }
}
