//! Bit-channel reliability profiles and information-set selection.
//!
//! Every analytic method starts from one channel quality and applies a
//! two-output step `q -> (degraded, upgraded)` level by level. Index bits read
//! MSB first pick the degraded (0) or upgraded (1) output, matching the
//! message-index convention of [`crate::code`], so a length-`n` profile costs
//! `n - 1` step evaluations.

use std::fmt;
use std::str::FromStr;

use crate::code::{row_weight, CodeSpec, MessageWord};
use crate::decode::ScDecoder;
use crate::error::{Error, Result};
use crate::numerics::{GaussianNumerics, LookupTables, Quadrature, CAPACITY_EPS, LLR_MAX, SNR_MAX};
use crate::sim::channel::ChannelModel;
use crate::sim::exec::{fold_blocks, Execution};
use crate::sim::rng::{block_rng, Purpose};

/// Reliability estimation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Equivalent SNR through the sum-capacity identity.
    EqSnr,
    /// Density evolution under the Gaussian approximation.
    Dega,
    /// Bhattacharyya parameters of the binary erasure channel.
    BecZ,
    /// Monte-Carlo first-error counts of a genie-aided SC decoder.
    Genie,
    /// Generator row weight (Reed-Muller selection).
    RmWeight,
}

impl Method {
    pub fn direction(self) -> Direction {
        match self {
            Method::EqSnr | Method::Dega | Method::RmWeight => Direction::HigherIsBetter,
            Method::BecZ | Method::Genie => Direction::LowerIsBetter,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::EqSnr => "eqsnr",
            Method::Dega => "dega",
            Method::BecZ => "bec",
            Method::Genie => "genie",
            Method::RmWeight => "rm",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "eqsnr" => Ok(Method::EqSnr),
            "dega" | "ga" => Ok(Method::Dega),
            "bec" => Ok(Method::BecZ),
            "genie" => Ok(Method::Genie),
            "rm" => Ok(Method::RmWeight),
            other => Err(Error::Config(format!("unknown construction method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    HigherIsBetter,
    LowerIsBetter,
}

/// Per-index scores of one method.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityProfile {
    method: Method,
    scores: Vec<f64>,
}

impl ReliabilityProfile {
    pub fn new(method: Method, scores: Vec<f64>) -> Result<Self> {
        if !scores.len().is_power_of_two() {
            return Err(Error::Contract(format!(
                "profile length {} is not a power of two",
                scores.len()
            )));
        }
        if let Some(i) = scores.iter().position(|s| !s.is_finite()) {
            return Err(Error::Contract(format!("score {i} is not finite")));
        }
        Ok(ReliabilityProfile { method, scores })
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn direction(&self) -> Direction {
        self.method.direction()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn n(&self) -> usize {
        self.scores.len()
    }

    pub fn m(&self) -> u32 {
        self.scores.len().trailing_zeros()
    }

    /// Indices from most to least reliable; ties go to the larger index.
    pub fn ranking(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n()).collect();
        let s = &self.scores;
        match self.direction() {
            Direction::HigherIsBetter => {
                order.sort_by(|&a, &b| s[b].total_cmp(&s[a]).then(b.cmp(&a)))
            }
            Direction::LowerIsBetter => {
                order.sort_by(|&a, &b| s[a].total_cmp(&s[b]).then(b.cmp(&a)))
            }
        }
        order
    }
}

/// Expands `base` through `m` levels of `step(q) -> (degraded, upgraded)`.
fn polarize<F: FnMut(f64) -> (f64, f64)>(base: f64, m: u32, mut step: F) -> Vec<f64> {
    let mut level = vec![base];
    for _ in 0..m {
        let mut next = Vec::with_capacity(level.len() * 2);
        for &q in &level {
            let (degraded, upgraded) = step(q);
            next.push(degraded);
            next.push(upgraded);
        }
        level = next;
    }
    level
}

/// One EqSNR step from linear SNR `s`: `(snr_u, snr_v)` with `snr_u = 2s` and
/// `snr_v = C⁻¹(2C(s) - C(2s))`.
///
/// Once capacities reach the `1 - CAPACITY_EPS` cap the inverse cannot
/// resolve the degraded channel; `snr_v` is then held at `s`.
pub fn eqsnr_step_with<N: GaussianNumerics + ?Sized>(num: &N, s: f64) -> (f64, f64) {
    let s = s.clamp(0.0, SNR_MAX);
    let snr_u = (2.0 * s).min(SNR_MAX);
    let target = (2.0 * num.capacity(s) - num.capacity(2.0 * s)).max(0.0);
    let snr_v = num.capacity_inverse(target.min(1.0 - CAPACITY_EPS)).clamp(0.0, s);
    (snr_u, snr_v)
}

pub fn eqsnr_step(s: f64) -> (f64, f64) {
    eqsnr_step_with(&Quadrature, s)
}

pub fn eqsnr_profile_with<N: GaussianNumerics + ?Sized>(num: &N, base: f64, m: u32) -> Result<ReliabilityProfile> {
    if !(base >= 0.0) {
        return Err(Error::Domain(format!("base SNR must be >= 0, got {base}")));
    }
    let scores = polarize(base.min(SNR_MAX), m, |s| {
        let (u, v) = eqsnr_step_with(num, s);
        (v, u)
    });
    ReliabilityProfile::new(Method::EqSnr, scores)
}

/// EqSNR profile from linear SNR `base` (`1/σ²`).
pub fn eqsnr_profile(base: f64, m: u32) -> Result<ReliabilityProfile> {
    eqsnr_profile_with(&Quadrature, base, m)
}

/// Two-channel DE-GA update: `l_u = l1 + l2`,
/// `l_v = φ⁻¹(1 - (1 - φ(l1))(1 - φ(l2)))`, both clamped to `[0, LLR_MAX]`.
pub fn dega_step_with<N: GaussianNumerics + ?Sized>(num: &N, l1: f64, l2: f64) -> (f64, f64) {
    let (l1, l2) = (l1.clamp(0.0, LLR_MAX), l2.clamp(0.0, LLR_MAX));
    let l_u = (l1 + l2).min(LLR_MAX);
    let (p1, p2) = (num.phi(l1), num.phi(l2));
    // 1 - (1-p1)(1-p2) written to keep precision when both are tiny.
    let y = if p1 >= 1.0 || p2 >= 1.0 {
        1.0
    } else {
        p1 + p2 - p1 * p2
    };
    let l_v = num.phi_inverse(y.min(1.0)).clamp(0.0, LLR_MAX);
    (l_u, l_v)
}

pub fn dega_step(l1: f64, l2: f64) -> (f64, f64) {
    dega_step_with(&Quadrature, l1, l2)
}

pub fn dega_profile_with<N: GaussianNumerics + ?Sized>(num: &N, base: f64, m: u32) -> Result<ReliabilityProfile> {
    if !(base >= 0.0) {
        return Err(Error::Domain(format!("base mean LLR must be >= 0, got {base}")));
    }
    let scores = polarize(base.min(LLR_MAX), m, |l| {
        let (u, v) = dega_step_with(num, l, l);
        (v, u)
    });
    ReliabilityProfile::new(Method::Dega, scores)
}

/// DE-GA profile from the channel mean LLR `base` (`2/σ²` on BIAWGN).
pub fn dega_profile(base: f64, m: u32) -> Result<ReliabilityProfile> {
    dega_profile_with(&Quadrature, base, m)
}

/// BEC Bhattacharyya recursion: degraded `2Z - Z²`, upgraded `Z²`.
///
/// The upgraded value is formed as `2Z - degraded`, which is exact (Sterbenz),
/// so the two children sum to exactly `2Z` in floating point.
pub fn bec_profile(epsilon: f64, m: u32) -> Result<ReliabilityProfile> {
    if !(0.0..=1.0).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "erasure probability must be in [0, 1], got {epsilon}"
        )));
    }
    let scores = polarize(epsilon, m, |z| {
        let degraded = 2.0 * z - z * z;
        (degraded, 2.0 * z - degraded)
    });
    ReliabilityProfile::new(Method::BecZ, scores)
}

/// Row weights `2^popcount(i)`.
pub fn rm_profile(m: u32) -> Result<ReliabilityProfile> {
    let scores = (0..1usize << m)
        .map(|i| row_weight(i, m).map(|w| w as f64))
        .collect::<Result<Vec<_>>>()?;
    ReliabilityProfile::new(Method::RmWeight, scores)
}

/// Genie-aided SC error counts over `blocks` all-zero transmissions.
pub fn genie_profile(m: u32, channel: &ChannelModel, blocks: u64, seed: u64) -> Result<ReliabilityProfile> {
    genie_profile_with(m, channel, blocks, seed, Execution::default())
}

pub fn genie_profile_with(
    m: u32,
    channel: &ChannelModel,
    blocks: u64,
    seed: u64,
    exec: Execution,
) -> Result<ReliabilityProfile> {
    if blocks == 0 {
        return Err(Error::Contract("genie construction needs at least one block".into()));
    }
    let spec = CodeSpec::full(m)?;
    let n = spec.n();
    let zeros = vec![0u8; n];
    let counts = fold_blocks(
        exec,
        0..blocks,
        || {
            let state = (
                ScDecoder::scd(&spec),
                vec![0.0f64; n],
                vec![0u8; n],
                vec![0u8; n],
            );
            (state, vec![0u64; n])
        },
        |(decoder, llr, msg, cw), counts, b| {
            let mut rng = block_rng(seed, b, Purpose::Genie);
            channel.transmit_into(&zeros, &mut rng, llr);
            decoder
                .decode_with(llr, msg, cw, |i, x| {
                    // Zero-information decisions count as errors.
                    if x <= 0.0 {
                        counts[i] += 1;
                    }
                    0
                })
                .expect("buffers sized from the spec");
        },
        |mut a, b| {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
            a
        },
    );
    ReliabilityProfile::new(Method::Genie, counts.into_iter().map(|c| c as f64).collect())
}

/// Picks the `k` most reliable indices.
pub fn select_info_set(profile: &ReliabilityProfile, k: usize) -> Result<CodeSpec> {
    if k == 0 || k > profile.n() {
        return Err(Error::Contract(format!(
            "dimension k = {k} outside 1..={}",
            profile.n()
        )));
    }
    let mut info: Vec<usize> = profile.ranking().into_iter().take(k).collect();
    info.sort_unstable();
    CodeSpec::new(profile.m(), info)
}

/// Parameters for building a code at a given operating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructionParams {
    pub method: Method,
    /// Design erasure probability for [`Method::BecZ`].
    pub bec_epsilon: f64,
    /// Monte-Carlo blocks for [`Method::Genie`].
    pub genie_blocks: u64,
    /// Use [`LookupTables`] instead of direct quadrature.
    pub lookup_tables: bool,
}

impl ConstructionParams {
    pub fn new(method: Method) -> Self {
        ConstructionParams {
            method,
            bec_epsilon: 0.5,
            genie_blocks: 10_000,
            lookup_tables: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.bec_epsilon) {
            return Err(Error::Config(format!(
                "--eps must be in [0, 1], got {}",
                self.bec_epsilon
            )));
        }
        if self.method == Method::Genie && self.genie_blocks == 0 {
            return Err(Error::Config("--genie-blocks must be at least 1".into()));
        }
        Ok(())
    }
}

/// Reliability profile for a length-`2^m` code designed for `channel`.
pub fn build_profile(
    params: &ConstructionParams,
    m: u32,
    channel: &ChannelModel,
    seed: u64,
    exec: Execution,
) -> Result<ReliabilityProfile> {
    params.validate()?;
    let num: &dyn GaussianNumerics = if params.lookup_tables {
        LookupTables::shared()
    } else {
        &Quadrature
    };
    match params.method {
        Method::EqSnr => eqsnr_profile_with(num, channel.snr(), m),
        Method::Dega => dega_profile_with(num, channel.base_llr(), m),
        Method::BecZ => bec_profile(params.bec_epsilon, m),
        Method::RmWeight => rm_profile(m),
        Method::Genie => {
            // Genie statistics need real noise even when the run is noiseless.
            let noisy = channel.with_noiseless(false);
            genie_profile_with(m, &noisy, params.genie_blocks, seed, exec)
        }
    }
}

/// Builds the code: profile, then the `k` best indices.
pub fn construct(
    params: &ConstructionParams,
    m: u32,
    k: usize,
    channel: &ChannelModel,
    seed: u64,
    exec: Execution,
) -> Result<(CodeSpec, ReliabilityProfile)> {
    let profile = build_profile(params, m, channel, seed, exec)?;
    let spec = select_info_set(&profile, k)?;
    Ok((spec, profile))
}

/// Per-index genie flags for an arbitrary transmitted message, accumulated
/// over `blocks` with the same streams [`genie_profile`] uses when `truth` is zero.
pub fn genie_counts_for(
    spec: &CodeSpec,
    truth: &MessageWord,
    channel: &ChannelModel,
    blocks: u64,
    seed: u64,
) -> Result<Vec<u64>> {
    let cw = crate::code::encode(truth, spec)?;
    let mut decoder = ScDecoder::scd(spec);
    let mut llr = vec![0.0; spec.n()];
    let mut flags = vec![false; spec.n()];
    let mut counts = vec![0u64; spec.n()];
    for b in 0..blocks {
        let mut rng = block_rng(seed, b, Purpose::Genie);
        channel.transmit_into(cw.bits(), &mut rng, &mut llr);
        decoder.decode_genie(&llr, truth, &mut flags)?;
        for (c, &f) in counts.iter_mut().zip(&flags) {
            *c += u64::from(f);
        }
    }
    Ok(counts)
}
