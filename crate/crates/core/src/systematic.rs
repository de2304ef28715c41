//! Systematic encoding by erasure decoding.
//!
//! The data bits are placed on the output coordinates as certain symbols
//! (`h = ±1`), every other coordinate is erased (`h = 0`), and MSD(h) fills
//! in the message. Products and quotients of `-1`, `0` and `+1` are exact, so
//! the pass is deterministic and noise-free.

use crate::code::{materialize_generator, CodeSpec, Codeword, MessageWord, MAX_MATERIALIZED_M};
use crate::decode::MsdDecoder;
use crate::error::{Error, Result};

/// A code together with the codeword coordinates that carry the data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SystematicSpec {
    base: CodeSpec,
    output_set: Vec<usize>,
}

impl SystematicSpec {
    pub fn base(&self) -> &CodeSpec {
        &self.base
    }

    pub fn output_set(&self) -> &[usize] {
        &self.output_set
    }

    /// Data bits as read from a codeword.
    pub fn data_from_codeword(&self, codeword: &[u8]) -> Vec<u8> {
        self.output_set.iter().map(|&j| codeword[j]).collect()
    }
}

/// Rank over GF(2) of bit-packed rows spanning `cols` columns.
pub(crate) fn gf2_rank(mut rows: Vec<Vec<u64>>, cols: usize) -> usize {
    let mut rank = 0;
    for col in 0..cols {
        let (w, bit) = (col / 64, 1u64 << (col % 64));
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][w] & bit != 0) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[w] & bit != 0 {
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    *x ^= p;
                }
            }
        }
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rank
}

/// True if every bitwise superset of an information index is also an
/// information index. Erasure encoding recovers every data word exactly for
/// such sets; for other sets it fails on some data words.
pub fn is_upward_closed(spec: &CodeSpec) -> bool {
    let m = spec.m();
    spec.info_set().iter().all(|&i| {
        (0..m)
            .map(|b| i | (1 << b))
            .all(|j| !spec.is_frozen(j))
    })
}

/// Uses the information indices as output coordinates. The set must be
/// upward closed (see [`is_upward_closed`]); for `m ≤ 12` the `k × k`
/// generator submatrix is also checked for invertibility.
pub fn choose_output_set(spec: &CodeSpec) -> Result<SystematicSpec> {
    if !is_upward_closed(spec) {
        return Err(Error::Contract(
            "systematic encoding needs an information set closed under bitwise supersets".into(),
        ));
    }
    let output_set = spec.info_set().to_vec();
    if spec.m() <= MAX_MATERIALIZED_M && spec.k() > 0 {
        let g = materialize_generator(spec.m())?;
        let k = spec.k();
        let rows: Vec<Vec<u64>> = spec
            .info_set()
            .iter()
            .map(|&i| {
                let mut packed = vec![0u64; k.div_ceil(64)];
                for (c, &j) in output_set.iter().enumerate() {
                    packed[c / 64] |= u64::from(g[i][j]) << (c % 64);
                }
                packed
            })
            .collect();
        let rank = gf2_rank(rows, k);
        if rank != k {
            return Err(Error::Internal(format!(
                "generator submatrix on the output set has rank {rank} < k = {k}"
            )));
        }
    }
    Ok(SystematicSpec {
        base: spec.clone(),
        output_set,
    })
}

/// Reusable systematic encoder owning its decoder scratch.
#[derive(Debug, Clone)]
pub struct SystematicEncoder {
    sspec: SystematicSpec,
    decoder: MsdDecoder,
    h: Vec<f64>,
    message: Vec<u8>,
    codeword: Vec<u8>,
}

impl SystematicEncoder {
    pub fn new(sspec: &SystematicSpec) -> Self {
        let n = sspec.base.n();
        SystematicEncoder {
            sspec: sspec.clone(),
            decoder: MsdDecoder::msd(&sspec.base),
            h: vec![0.0; n],
            message: vec![0; n],
            codeword: vec![0; n],
        }
    }

    pub fn spec(&self) -> &SystematicSpec {
        &self.sspec
    }

    /// Encodes into internal buffers; returns `(message, codeword)` views.
    pub fn encode_in_place(&mut self, data: &[u8]) -> Result<(&[u8], &[u8])> {
        let out = &self.sspec.output_set;
        if data.len() != out.len() {
            return Err(Error::Contract(format!(
                "expected {} data bits, got {}",
                out.len(),
                data.len()
            )));
        }
        self.h.fill(0.0);
        for (&j, &b) in out.iter().zip(data) {
            self.h[j] = match b {
                0 => 1.0,
                1 => -1.0,
                other => {
                    return Err(Error::Contract(format!("data bit has value {other}")));
                }
            };
        }
        self.decoder
            .decode_into(&self.h, &mut self.message, &mut self.codeword)?;
        if out.iter().zip(data).any(|(&j, &b)| self.codeword[j] != b) {
            return Err(Error::Internal(
                "erasure decoding did not reproduce the data on the output set".into(),
            ));
        }
        Ok((&self.message, &self.codeword))
    }

    pub fn encode(&mut self, data: &[u8]) -> Result<(MessageWord, Codeword)> {
        let (msg, cw) = self.encode_in_place(data)?;
        Ok((
            MessageWord::from_bits_unchecked(msg.to_vec()),
            Codeword::from_bits_unchecked(cw.to_vec()),
        ))
    }
}

/// One-shot systematic encoding of `data` (length `k`).
pub fn systematic_encode(data: &[u8], sspec: &SystematicSpec) -> Result<(MessageWord, Codeword)> {
    SystematicEncoder::new(sspec).encode(data)
}
