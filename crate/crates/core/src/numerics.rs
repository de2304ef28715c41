//! Scalar special functions for Gaussian reliability construction.
//!
//! Conventions used throughout the crate:
//!
//! * An SNR is linear and equals `1/σ²` for unit-energy BPSK over real AWGN
//!   with noise variance `σ²`. The channel LLR `L = 2y/σ²` then has mean
//!   `2·snr` and variance `4·snr`, so `mean_llr = 2·snr`.
//! * A mean LLR `m` describes a symmetric Gaussian LLR density `N(m, 2m)`.
//!
//! Every function here has a direct quadrature implementation. Lookup tables
//! ([`LookupTables`]) are an optional fast path, validated against quadrature.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Saturation bound on every LLR and mean LLR handled by the crate.
pub const LLR_MAX: f64 = 100.0;
/// Saturation bound on linear SNR values.
pub const SNR_MAX: f64 = 1e4;
/// Capacity values are clamped to `[0, 1 - CAPACITY_EPS]`.
pub const CAPACITY_EPS: f64 = 1e-9;

/// Bisection stops once the bracket is narrower than this.
const BISECTION_WIDTH: f64 = 1e-8;
const QUAD_ABS_TOL: f64 = 1e-13;
const QUAD_REL_TOL: f64 = 1e-11;
const QUAD_MAX_DEPTH: u32 = 40;
/// Integration half-width in standard deviations of the Gaussian factor.
const TAIL_SIGMAS: f64 = 10.0;

// Gauss-Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gauss_kronrod_15(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1)
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` with an optional
/// interior breakpoint.
pub(crate) fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, breakpoint: Option<f64>) -> f64 {
    let mut edges = vec![a];
    if let Some(p) = breakpoint.filter(|p| *p > a && *p < b) {
        edges.push(p);
    }
    edges.push(b);
    let rough: f64 = edges
        .windows(2)
        .map(|w| gauss_kronrod_15(f, w[0], w[1]).0)
        .sum();
    let tol = QUAD_ABS_TOL.max(QUAD_REL_TOL * rough.abs());
    let pieces = (edges.len() - 1) as f64;
    edges
        .windows(2)
        .map(|w| adaptive(f, w[0], w[1], tol / pieces, QUAD_MAX_DEPTH))
        .sum()
}

/// `ln(1 + e^{-x})`, evaluated without overflow for either sign of `x`.
#[inline]
pub(crate) fn softplus_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

#[inline]
fn gaussian_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let d = x - mean;
    (-d * d / (2.0 * var)).exp() / (2.0 * std::f64::consts::PI * var).sqrt()
}

/// `1 - C(snr)` without clamping: `E[log2(1 + e^{-L})]` for `L ~ N(2 snr, 4 snr)`.
fn capacity_gap(snr: f64) -> f64 {
    if snr <= 0.0 {
        return 1.0;
    }
    let mean = 2.0 * snr;
    let var = 4.0 * snr;
    let sd = var.sqrt();
    let integrand = |l: f64| gaussian_pdf(l, mean, var) * softplus_neg(l);
    let value = integrate(
        &integrand,
        -mean - TAIL_SIGMAS * sd,
        mean + TAIL_SIGMAS * sd,
        Some(0.0),
    );
    value / std::f64::consts::LN_2
}

fn capacity_direct(snr: f64) -> f64 {
    (1.0 - capacity_gap(snr)).clamp(0.0, 1.0 - CAPACITY_EPS)
}

/// `φ(x) = E[1 - tanh(u/2)]` for `u ~ N(x, 2x)`, integrated as
/// `E[2 / (1 + e^u)]` so small values keep their relative precision.
fn phi_direct(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let var = 2.0 * x;
    let sd = var.sqrt();
    let integrand = |u: f64| gaussian_pdf(u, x, var) * 2.0 * (-softplus_neg(-u)).exp();
    integrate(&integrand, x - TAIL_SIGMAS * sd, x + TAIL_SIGMAS * sd, Some(0.0)).min(1.0)
}

/// Bisection for an increasing `f` on `[lo, hi]`; returns the bracket midpoint.
fn bisect_increasing<F: Fn(f64) -> f64>(f: F, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    while hi - lo > BISECTION_WIDTH {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn capacity_inverse_with<F: Fn(f64) -> f64>(capacity: F, c: f64) -> f64 {
    if c <= 0.0 {
        return 0.0;
    }
    if c >= 1.0 - CAPACITY_EPS {
        return SNR_MAX;
    }
    let mut hi = 1.0;
    while hi < SNR_MAX && capacity(hi) < c {
        hi *= 2.0;
    }
    let hi = hi.min(SNR_MAX);
    let lo = if hi > 1.0 { 0.5 * hi } else { 0.0 };
    bisect_increasing(capacity, c, lo, hi)
}

fn phi_inverse_with<F: Fn(f64) -> f64>(phi: F, y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    if y <= phi(LLR_MAX) {
        return LLR_MAX;
    }
    // phi decreases, so bisect on -phi.
    bisect_increasing(|x| -phi(x), -y, 0.0, LLR_MAX)
}

/// Symmetric capacity (bits per use) of the binary-input AWGN channel at
/// linear SNR `snr = 1/σ²`, clamped to `[0, 1 - CAPACITY_EPS]`.
pub fn biawgn_capacity(snr: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::Domain(format!("capacity needs snr >= 0, got {snr}")));
    }
    Ok(capacity_direct(snr))
}

/// Inverse of [`biawgn_capacity`]. Capacities at or above `1 - CAPACITY_EPS`
/// map to [`SNR_MAX`].
pub fn biawgn_capacity_inverse(c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::Domain(format!(
            "capacity inverse needs 0 <= c < 1, got {c}"
        )));
    }
    Ok(capacity_inverse_with(capacity_direct, c))
}

/// The density-evolution function
/// `φ(x) = 1 - (4πx)^{-1/2} ∫ tanh(u/2) exp(-(u-x)²/(4x)) du`, with `φ(0) = 1`.
pub fn phi(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::Domain(format!("phi needs x >= 0, got {x}")));
    }
    Ok(phi_direct(x))
}

/// Inverse of [`phi`] on `[0, LLR_MAX]`; values below `φ(LLR_MAX)` saturate.
pub fn phi_inverse(y: f64) -> Result<f64> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain(format!("phi inverse needs 0 < y <= 1, got {y}")));
    }
    Ok(phi_inverse_with(phi_direct, y))
}

/// The four scalar maps the Gaussian construction methods are built on.
///
/// Implementations assume arguments already lie in the function domains; the
/// checked entry points are the free functions of this module.
pub trait GaussianNumerics: Sync {
    fn capacity(&self, snr: f64) -> f64;
    fn capacity_inverse(&self, c: f64) -> f64;
    fn phi(&self, x: f64) -> f64;
    fn phi_inverse(&self, y: f64) -> f64;
}

/// Direct adaptive quadrature for every evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadrature;

impl GaussianNumerics for Quadrature {
    fn capacity(&self, snr: f64) -> f64 {
        capacity_direct(snr.max(0.0))
    }

    fn capacity_inverse(&self, c: f64) -> f64 {
        capacity_inverse_with(capacity_direct, c)
    }

    fn phi(&self, x: f64) -> f64 {
        phi_direct(x.max(0.0))
    }

    fn phi_inverse(&self, y: f64) -> f64 {
        phi_inverse_with(phi_direct, y)
    }
}

/// Uniform grid of `ln f` samples, linearly interpolated.
#[derive(Debug, Clone)]
struct LogTable {
    step: f64,
    ln_values: Vec<f64>,
}

impl LogTable {
    fn build<F: Fn(f64) -> f64>(f: F, max: f64, step: f64) -> Self {
        let points = (max / step).round() as usize + 1;
        let ln_values = (0..points).map(|i| f(i as f64 * step).ln()).collect();
        LogTable { step, ln_values }
    }

    fn max(&self) -> f64 {
        (self.ln_values.len() - 1) as f64 * self.step
    }

    fn eval(&self, x: f64) -> f64 {
        let last = self.ln_values.len() - 1;
        let pos = (x / self.step).clamp(0.0, last as f64);
        let i = (pos.floor() as usize).min(last - 1);
        let t = pos - i as f64;
        let ln = self.ln_values[i] * (1.0 - t) + self.ln_values[i + 1] * t;
        ln.exp()
    }
}

/// Grid step (in mean-LLR or SNR units) of the lookup tables.
const TABLE_STEP: f64 = 0.005;
/// Capacity gap is below `CAPACITY_EPS` well before this SNR.
const CAPACITY_TABLE_MAX: f64 = 64.0;

/// Precomputed tables for `φ` and the capacity gap `1 - C`.
///
/// Built once from direct quadrature and immutable afterwards, so a shared
/// reference can be used from any number of threads.
#[derive(Debug, Clone)]
pub struct LookupTables {
    phi: LogTable,
    capacity_gap: LogTable,
}

impl LookupTables {
    pub fn build() -> Self {
        LookupTables {
            phi: LogTable::build(phi_direct, LLR_MAX, TABLE_STEP),
            capacity_gap: LogTable::build(
                |s| capacity_gap(s).max(f64::MIN_POSITIVE),
                CAPACITY_TABLE_MAX,
                TABLE_STEP,
            ),
        }
    }

    /// Process-wide tables, built on first use.
    pub fn shared() -> &'static LookupTables {
        static TABLES: OnceLock<LookupTables> = OnceLock::new();
        TABLES.get_or_init(LookupTables::build)
    }

    /// Upper end of the φ table domain.
    pub fn phi_domain_max(&self) -> f64 {
        self.phi.max()
    }

    /// Upper end of the capacity table domain.
    pub fn capacity_domain_max(&self) -> f64 {
        self.capacity_gap.max()
    }

    fn capacity_lookup(&self, snr: f64) -> f64 {
        if snr <= 0.0 {
            return 0.0;
        }
        let gap = if snr >= self.capacity_gap.max() {
            0.0
        } else {
            self.capacity_gap.eval(snr)
        };
        (1.0 - gap).clamp(0.0, 1.0 - CAPACITY_EPS)
    }

    fn phi_lookup(&self, x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            self.phi.eval(x)
        }
    }
}

impl GaussianNumerics for LookupTables {
    fn capacity(&self, snr: f64) -> f64 {
        self.capacity_lookup(snr)
    }

    fn capacity_inverse(&self, c: f64) -> f64 {
        capacity_inverse_with(|s| self.capacity_lookup(s), c)
    }

    fn phi(&self, x: f64) -> f64 {
        self.phi_lookup(x)
    }

    fn phi_inverse(&self, y: f64) -> f64 {
        phi_inverse_with(|x| self.phi_lookup(x), y)
    }
}
