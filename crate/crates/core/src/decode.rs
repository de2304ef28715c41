//! Successive decoders over the recursive Plotkin structure.
//!
//! Both decoders walk the same schedule. At a node of length `2N` holding
//! soft values `s[0..2N)` for the codeword `(u, u ⊕ v)`:
//!
//! 1. combine `s[k]` and `s[N+k]` into the `v` channel and decode `v`
//!    (message indices in the lower half of the node);
//! 2. re-encode the `v` estimate, use each bit `ṽ_k` to combine `s[k]` and
//!    `s[N+k]` into the `u` channel, and decode `u`;
//! 3. return `(u, u ⊕ v)` as the node's codeword estimate.
//!
//! [`ProbDomain`] runs the schedule on differences of probabilities
//! `h = P(+1|y) - P(-1|y) = tanh(L/2)`; [`LlrDomain`] runs it on LLRs.
//!
//! The recursion is scheduled iteratively over per-level scratch buffers, so
//! decoding `n = 2^17` needs no deep call stack and no allocation per block.

use std::fmt;
use std::str::FromStr;

use crate::code::{CodeSpec, Codeword, MessageWord};
use crate::error::{Error, Result};
use crate::numerics::LLR_MAX;

/// Keeps `|h| < 1` where the upgrade rule would otherwise divide by zero.
pub const H_EPS: f64 = 1e-15;

/// One soft-value representation and its two combining rules.
pub trait SoftDomain: Copy + Send + Sync {
    /// Maps a raw observation into the domain's valid range.
    fn sanitize(&self, x: f64) -> f64;

    /// Soft value of the `v` bit-channel from the pair `(a, b) = (s[k], s[N+k])`.
    fn degrade(&self, a: f64, b: f64) -> f64;

    /// Soft value of the `u` bit-channel given the re-encoded `v` bit.
    fn upgrade(&self, a: f64, b: f64, v_bit: u8) -> f64;

    /// Hard decision: bit 0 (symbol +1) for non-negative values.
    #[inline]
    fn hard(&self, x: f64) -> u8 {
        u8::from(x < 0.0)
    }
}

/// Log-likelihood ratios `ln P(0|y)/P(1|y)`, clamped to `±llr_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlrDomain {
    pub llr_max: f64,
}

impl Default for LlrDomain {
    fn default() -> Self {
        LlrDomain { llr_max: LLR_MAX }
    }
}

impl SoftDomain for LlrDomain {
    #[inline]
    fn sanitize(&self, x: f64) -> f64 {
        x.clamp(-self.llr_max, self.llr_max)
    }

    /// `2 atanh(tanh(a/2) tanh(b/2))`, evaluated as
    /// `ln(1 + (1-x)(1-y) / (x+y))` with `x = e^{-|a|}`, `y = e^{-|b|}`.
    #[inline]
    fn degrade(&self, a: f64, b: f64) -> f64 {
        let (abs_a, abs_b) = (a.abs(), b.abs());
        let lo = abs_a.min(abs_b);
        let mag = if lo > 40.0 {
            // e^{-(|a|+|b|)} is below one ulp of the result.
            let d = (abs_a - abs_b).abs();
            if d > 40.0 {
                lo
            } else {
                lo - (-d).exp().ln_1p()
            }
        } else {
            let (ma, xa) = exp_pair(abs_a);
            let (mb, xb) = exp_pair(abs_b);
            (ma * mb / (xa + xb)).ln_1p()
        };
        let mag = mag.min(self.llr_max);
        if (a < 0.0) != (b < 0.0) {
            -mag
        } else {
            mag
        }
    }

    #[inline]
    fn upgrade(&self, a: f64, b: f64, v_bit: u8) -> f64 {
        let l = if v_bit == 0 { a + b } else { a - b };
        l.clamp(-self.llr_max, self.llr_max)
    }
}

/// `(1 - e^{-t}, e^{-t})` for `t >= 0`, each with full relative precision.
#[inline]
fn exp_pair(t: f64) -> (f64, f64) {
    if t < 2.0 {
        let e = (-t).exp_m1();
        (-e, 1.0 + e)
    } else {
        let x = (-t).exp();
        (1.0 - x, x)
    }
}

/// Differences of probabilities `h = tanh(L/2)` in `[-1, 1]`; `h = 0` is an erasure.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ProbDomain;

impl SoftDomain for ProbDomain {
    #[inline]
    fn sanitize(&self, x: f64) -> f64 {
        x.clamp(-1.0, 1.0)
    }

    #[inline]
    fn degrade(&self, a: f64, b: f64) -> f64 {
        a * b
    }

    /// `(h_k + ṽ h_{N+k}) / (1 + ṽ h_k h_{N+k})` with `ṽ = ±1`.
    #[inline]
    fn upgrade(&self, a: f64, b: f64, v_bit: u8) -> f64 {
        let b = if v_bit == 0 { b } else { -b };
        let den = 1.0 + a * b;
        if den > 0.0 {
            ((a + b) / den).clamp(-1.0, 1.0)
        } else {
            // Fully confident, contradictory inputs.
            let a = a.clamp(-1.0 + H_EPS, 1.0 - H_EPS);
            let b = b.clamp(-1.0 + H_EPS, 1.0 - H_EPS);
            ((a + b) / (1.0 + a * b)).clamp(-1.0, 1.0)
        }
    }
}

/// Decoded message together with its re-encoded codeword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeResult {
    pub message: MessageWord,
    pub codeword: Codeword,
}

/// Which successive decoder to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    /// LLR-domain successive cancellation, SCD(L).
    Scd,
    /// Difference-of-probabilities multistage decoding, MSD(h).
    Msd,
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecoderKind::Scd => "scd",
            DecoderKind::Msd => "msd",
        })
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scd" => Ok(DecoderKind::Scd),
            "msd" => Ok(DecoderKind::Msd),
            other => Err(Error::Config(format!("unknown decoder `{other}`"))),
        }
    }
}

/// Successive decoder for one code, owning its scratch buffers.
///
/// An instance is single-threaded; create one per worker.
#[derive(Debug, Clone)]
pub struct SuccessiveDecoder<D> {
    domain: D,
    m: u32,
    frozen: Vec<bool>,
    /// `soft[l]` holds the `2^l` soft values entering the current node at level `l`.
    soft: Vec<Vec<f64>>,
    /// `parts[l]` holds the `(v, u)` codeword halves of the current node at level `l + 1`.
    parts: Vec<Vec<u8>>,
    combine_ops: u64,
}

pub type ScDecoder = SuccessiveDecoder<LlrDomain>;
pub type MsdDecoder = SuccessiveDecoder<ProbDomain>;

impl<D: SoftDomain> SuccessiveDecoder<D> {
    pub fn new(spec: &CodeSpec, domain: D) -> Self {
        let m = spec.m();
        SuccessiveDecoder {
            domain,
            m,
            frozen: spec.frozen_mask().to_vec(),
            soft: (0..=m).map(|l| vec![0.0; 1 << l]).collect(),
            parts: (0..m).map(|l| vec![0u8; 2 << l]).collect(),
            combine_ops: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.frozen.len()
    }

    pub fn domain(&self) -> &D {
        &self.domain
    }

    /// Degrade plus upgrade evaluations performed by the last decode.
    pub fn combine_ops(&self) -> u64 {
        self.combine_ops
    }

    pub fn decode(&mut self, obs: &[f64]) -> Result<DecodeResult> {
        let n = self.n();
        let mut message = vec![0u8; n];
        let mut codeword = vec![0u8; n];
        self.decode_into(obs, &mut message, &mut codeword)?;
        Ok(DecodeResult {
            message: MessageWord::from_bits_unchecked(message),
            codeword: Codeword::from_bits_unchecked(codeword),
        })
    }

    /// Allocation-free decode into caller buffers of length `n`.
    pub fn decode_into(&mut self, obs: &[f64], message: &mut [u8], codeword: &mut [u8]) -> Result<()> {
        let domain = self.domain;
        self.decode_with(obs, message, codeword, |_, x| domain.hard(x))
    }

    /// Genie-aided decode: at each information index, records in `flags`
    /// whether the tentative decision differed from `truth` (a soft value of
    /// exactly zero counts as an error), then continues with the true bit.
    pub fn decode_genie(
        &mut self,
        obs: &[f64],
        truth: &MessageWord,
        flags: &mut [bool],
    ) -> Result<DecodeResult> {
        let n = self.n();
        if truth.len() != n || flags.len() != n {
            return Err(Error::Contract(format!(
                "genie buffers must have length n = {n}"
            )));
        }
        flags.fill(false);
        let truth = truth.bits();
        let mut message = vec![0u8; n];
        let mut codeword = vec![0u8; n];
        let domain = self.domain;
        self.decode_with(obs, &mut message, &mut codeword, |i, x| {
            flags[i] = x == 0.0 || domain.hard(x) != truth[i];
            truth[i]
        })?;
        Ok(DecodeResult {
            message: MessageWord::from_bits_unchecked(message),
            codeword: Codeword::from_bits_unchecked(codeword),
        })
    }

    /// Runs the successive schedule. `decide(index, soft)` is consulted at
    /// every information index with its soft value and returns the bit to commit.
    pub fn decode_with<F>(
        &mut self,
        obs: &[f64],
        message: &mut [u8],
        codeword: &mut [u8],
        mut decide: F,
    ) -> Result<()>
    where
        F: FnMut(usize, f64) -> u8,
    {
        let n = self.n();
        if obs.len() != n || message.len() != n || codeword.len() != n {
            return Err(Error::Contract(format!(
                "decoder expects length-{n} buffers, got obs {} / message {} / codeword {}",
                obs.len(),
                message.len(),
                codeword.len()
            )));
        }
        if let Some(p) = obs.iter().position(|x| x.is_nan()) {
            return Err(Error::Contract(format!("observation {p} is NaN")));
        }
        let m = self.m as usize;
        let domain = self.domain;
        for (dst, &x) in self.soft[m].iter_mut().zip(obs) {
            *dst = domain.sanitize(x);
        }
        self.combine_ops = 0;

        for i in 0..n {
            let top = if i == 0 {
                m
            } else {
                // Switch from the v branch to the u branch at level t + 1.
                let t = i.trailing_zeros() as usize;
                let (lower, upper) = self.soft.split_at_mut(t + 1);
                let parent = &upper[0];
                let half = 1usize << t;
                let v_bits = &self.parts[t][..half];
                for (k, out) in lower[t].iter_mut().enumerate() {
                    *out = domain.upgrade(parent[k], parent[half + k], v_bits[k]);
                }
                self.combine_ops += half as u64;
                t
            };
            for l in (1..=top).rev() {
                let (lower, upper) = self.soft.split_at_mut(l);
                let parent = &upper[0];
                let half = 1usize << (l - 1);
                for (k, out) in lower[l - 1].iter_mut().enumerate() {
                    *out = domain.degrade(parent[k], parent[half + k]);
                }
                self.combine_ops += half as u64;
            }

            let bit = if self.frozen[i] {
                0
            } else {
                decide(i, self.soft[0][0]) & 1
            };
            message[i] = bit;

            if m == 0 {
                codeword[0] = bit;
                continue;
            }
            self.parts[0][i & 1] = bit;
            // Fold finished (v, u) pairs into (u, u ⊕ v) up the tree.
            let mut l = 0;
            while (i >> l) & 1 == 1 {
                let half = 1usize << l;
                let (lower, upper) = self.parts.split_at_mut(l + 1);
                let pair = &lower[l];
                let target: &mut [u8] = if l + 1 == m {
                    &mut codeword[..]
                } else {
                    let offset = ((i >> (l + 1)) & 1) << (l + 1);
                    &mut upper[0][offset..offset + 2 * half]
                };
                for k in 0..half {
                    let v = pair[k];
                    let u = pair[half + k];
                    target[k] = u;
                    target[half + k] = u ^ v;
                }
                l += 1;
                if l == m {
                    break;
                }
            }
        }
        Ok(())
    }
}

impl ScDecoder {
    pub fn scd(spec: &CodeSpec) -> Self {
        SuccessiveDecoder::new(spec, LlrDomain::default())
    }
}

impl MsdDecoder {
    pub fn msd(spec: &CodeSpec) -> Self {
        SuccessiveDecoder::new(spec, ProbDomain)
    }
}

/// SCD(L): successive cancellation on channel LLRs.
pub fn scd_decode(obs: &[f64], spec: &CodeSpec) -> Result<DecodeResult> {
    ScDecoder::scd(spec).decode(obs)
}

/// MSD(h): multistage decoding on differences of probabilities.
pub fn msd_decode(obs: &[f64], spec: &CodeSpec) -> Result<DecodeResult> {
    MsdDecoder::msd(spec).decode(obs)
}

/// Genie-aided run of `decoder`; returns the per-index error flags.
pub fn genie_hook<D: SoftDomain>(
    decoder: &mut SuccessiveDecoder<D>,
    obs: &[f64],
    truth: &MessageWord,
) -> Result<Vec<bool>> {
    let mut flags = vec![false; decoder.n()];
    decoder.decode_genie(obs, truth, &mut flags)?;
    Ok(flags)
}

/// Re-encodes a message given as raw bits.
#[cfg(test)]
pub(crate) fn reencode(bits: &[u8]) -> Vec<u8> {
    use crate::code::encode_bytes_in_place;
    let mut out = bits.to_vec();
    encode_bytes_in_place(&mut out);
    out
}
