//! Code identity and the recursive Plotkin transform.
//!
//! The generator of a length `n = 2^m` code is the `m`-fold Kronecker power
//! of `[[0, 1], [1, 1]]`, equivalently
//!
//! ```text
//! B_{2N} = [[0,   B_N],
//!           [B_N, B_N]]
//! ```
//!
//! Writing a message as halves `(x_top, x_bot)`, the codeword is
//! `(x_bot·B_N, (x_top ⊕ x_bot)·B_N) = (u, u ⊕ v)`. Message indices `[0, n/2)`
//! therefore feed the `v` outer code (decoded first) and `[n/2, n)` feed `u`.
//! Applied recursively, the bits of a message index read MSB first select
//! degrade (0) or upgrade (1) at each level, and ascending index order is the
//! successive decoding order.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest `m` for which [`materialize_generator`] will build a dense matrix.
pub const MAX_MATERIALIZED_M: u32 = 12;
/// Largest supported log-length.
pub const MAX_M: u32 = 30;

/// Length, dimension and information set of a code. Frozen positions carry zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeSpec {
    m: u32,
    info_set: Vec<usize>,
    frozen: Vec<bool>,
}

impl CodeSpec {
    /// Builds a spec from a strictly increasing list of information indices.
    pub fn new(m: u32, info_set: Vec<usize>) -> Result<Self> {
        if m > MAX_M {
            return Err(Error::Contract(format!("m = {m} exceeds {MAX_M}")));
        }
        let n = 1usize << m;
        if info_set.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Contract(
                "information set must be strictly increasing".into(),
            ));
        }
        if let Some(&last) = info_set.last() {
            if last >= n {
                return Err(Error::Contract(format!(
                    "information index {last} out of range for n = {n}"
                )));
            }
        }
        let mut frozen = vec![true; n];
        for &i in &info_set {
            frozen[i] = false;
        }
        Ok(CodeSpec { m, info_set, frozen })
    }

    /// The rate-one code: every index carries information.
    pub fn full(m: u32) -> Result<Self> {
        Self::new(m, (0..1usize << m.min(MAX_M)).collect())
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn n(&self) -> usize {
        self.frozen.len()
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    pub fn rate(&self) -> f64 {
        self.k() as f64 / self.n() as f64
    }

    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen
    }

    pub fn is_frozen(&self, index: usize) -> bool {
        self.frozen[index]
    }

    pub fn frozen_set(&self) -> impl Iterator<Item = usize> + '_ {
        self.frozen
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
    }

    /// Places `data` on the information set, zeros elsewhere.
    pub fn message_from_data(&self, data: &[u8]) -> Result<MessageWord> {
        if data.len() != self.k() {
            return Err(Error::Contract(format!(
                "expected {} data bits, got {}",
                self.k(),
                data.len()
            )));
        }
        check_bits(data)?;
        let mut bits = vec![0u8; self.n()];
        for (&i, &b) in self.info_set.iter().zip(data) {
            bits[i] = b;
        }
        Ok(MessageWord(bits))
    }

    /// Reads the information bits back out of a message.
    pub fn data_from_message(&self, message: &MessageWord) -> Vec<u8> {
        self.info_set.iter().map(|&i| message.0[i]).collect()
    }
}

/// Info-set file format: `m=<int> k=<int>` then the ascending indices.
impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "m={} k={}", self.m, self.k())?;
        let mut first = true;
        for i in &self.info_set {
            if !first {
                f.write_str(" ")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        writeln!(f)
    }
}

impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty info-set file".into()))?;
        let mut m = None;
        let mut k = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field `{field}`")))?;
            let value: usize = value
                .parse()
                .map_err(|_| Error::Parse(format!("bad integer in `{field}`")))?;
            match key {
                "m" => m = Some(value),
                "k" => k = Some(value),
                _ => return Err(Error::Parse(format!("unknown header key `{key}`"))),
            }
        }
        let m = m.ok_or_else(|| Error::Parse("header is missing m=".into()))?;
        let k = k.ok_or_else(|| Error::Parse("header is missing k=".into()))?;
        let indices = lines
            .next()
            .unwrap_or("")
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad index `{t}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        if indices.len() != k {
            return Err(Error::Parse(format!(
                "header says k={k} but {} indices follow",
                indices.len()
            )));
        }
        let m = u32::try_from(m).map_err(|_| Error::Parse("m too large".into()))?;
        CodeSpec::new(m, indices).map_err(|e| Error::Parse(e.to_string()))
    }
}

fn check_bits(bits: &[u8]) -> Result<()> {
    match bits.iter().position(|&b| b > 1) {
        Some(p) => Err(Error::Contract(format!(
            "bit {p} has value {}, expected 0 or 1",
            bits[p]
        ))),
        None => Ok(()),
    }
}

/// A length-`n` message vector with zeros on the frozen set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MessageWord(Vec<u8>);

impl MessageWord {
    pub fn new(bits: Vec<u8>, spec: &CodeSpec) -> Result<Self> {
        if bits.len() != spec.n() {
            return Err(Error::Contract(format!(
                "message length {} does not match n = {}",
                bits.len(),
                spec.n()
            )));
        }
        check_bits(&bits)?;
        if let Some(i) = spec.frozen_set().find(|&i| bits[i] != 0) {
            return Err(Error::Contract(format!("frozen index {i} carries a one")));
        }
        Ok(MessageWord(bits))
    }

    pub fn zeros(n: usize) -> Self {
        MessageWord(vec![0; n])
    }

    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        MessageWord(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

/// A length-`n` codeword, the image of a message under the generator.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Codeword(Vec<u8>);

impl Codeword {
    pub(crate) fn from_bits_unchecked(bits: Vec<u8>) -> Self {
        Codeword(bits)
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }
}

/// Masks selecting bit positions `p` with `p & h == 0`, for `h = 1, 2, 4, .., 32`.
const LOWER_HALF_MASKS: [u64; 6] = [
    0x5555_5555_5555_5555,
    0x3333_3333_3333_3333,
    0x0f0f_0f0f_0f0f_0f0f,
    0x00ff_00ff_00ff_00ff,
    0x0000_ffff_0000_ffff,
    0x0000_0000_ffff_ffff,
];

/// Applies the generator to a bit-packed vector of length `n` (LSB of word 0
/// is index 0). The Kronecker factors act on independent index bits, so the
/// butterfly stages may run in any order.
pub fn encode_packed(words: &mut [u64], n: usize) {
    debug_assert!(n.is_power_of_two());
    debug_assert_eq!(words.len(), n.div_ceil(64));
    // Within-word stages.
    for (level, &mask) in LOWER_HALF_MASKS.iter().enumerate() {
        let h = 1usize << level;
        if h >= n {
            break;
        }
        for w in words.iter_mut() {
            let x = *w;
            let shifted = (x >> h) & mask;
            *w = shifted | (((x & mask) ^ shifted) << h);
        }
    }
    // Whole-word stages.
    let word_count = words.len();
    let mut half = 1;
    while half < word_count {
        for block in words.chunks_exact_mut(2 * half) {
            let (top, bot) = block.split_at_mut(half);
            for (t, b) in top.iter_mut().zip(bot.iter_mut()) {
                let x_top = *t;
                *t = *b;
                *b ^= x_top;
            }
        }
        half *= 2;
    }
}

/// Byte-per-bit form of the same transform.
pub(crate) fn encode_bytes_in_place(bits: &mut [u8]) {
    let n = bits.len();
    let mut half = 1;
    while half < n {
        for block in bits.chunks_exact_mut(2 * half) {
            let (top, bot) = block.split_at_mut(half);
            for (t, b) in top.iter_mut().zip(bot.iter_mut()) {
                let x_top = *t;
                *t = *b;
                *b ^= x_top;
            }
        }
        half *= 2;
    }
}

fn pack(bits: &[u8]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (i, &b) in bits.iter().enumerate() {
        words[i / 64] |= u64::from(b & 1) << (i % 64);
    }
    words
}

fn unpack(words: &[u64], n: usize) -> Vec<u8> {
    (0..n).map(|i| ((words[i / 64] >> (i % 64)) & 1) as u8).collect()
}

/// Non-systematic encoding: `msg · B_{2^m}`.
pub fn encode(msg: &MessageWord, spec: &CodeSpec) -> Result<Codeword> {
    if msg.len() != spec.n() {
        return Err(Error::Contract(format!(
            "message length {} does not match n = {}",
            msg.len(),
            spec.n()
        )));
    }
    let mut words = pack(msg.bits());
    encode_packed(&mut words, spec.n());
    Ok(Codeword(unpack(&words, spec.n())))
}

/// Hamming weight of row `index` of `B_{2^m}`, which is `2^popcount(index)`.
pub fn row_weight(index: usize, m: u32) -> Result<usize> {
    if m > MAX_M || index >= 1usize << m {
        return Err(Error::Contract(format!(
            "row {index} out of range for m = {m}"
        )));
    }
    Ok(1usize << index.count_ones())
}

/// Dense `2^m × 2^m` generator, built by the block recursion. Test-scale only.
pub fn materialize_generator(m: u32) -> Result<Vec<Vec<u8>>> {
    if m > MAX_MATERIALIZED_M {
        return Err(Error::Contract(format!(
            "refusing to materialize a 2^{m} square matrix (limit m = {MAX_MATERIALIZED_M})"
        )));
    }
    let mut g = vec![vec![1u8]];
    for _ in 0..m {
        let half = g.len();
        let mut next = vec![vec![0u8; 2 * half]; 2 * half];
        for (r, row) in g.iter().enumerate() {
            next[r][half..].copy_from_slice(row);
            next[half + r][..half].copy_from_slice(row);
            next[half + r][half..].copy_from_slice(row);
        }
        g = next;
    }
    Ok(g)
}
