//! Monte-Carlo BER/BLER measurement over the BIAWGN channel.
//!
//! Each operating point rebuilds the code for its own SNR, then runs
//! independent blocks (random data, encode, transmit, decode) and tallies
//! information-bit and block errors. Block `b` draws data and noise from
//! streams keyed by `(seed, b)`, and the stop rule is evaluated on the
//! ordered per-block outcomes, so a record is bit-identical for any worker
//! count.

pub mod channel;
pub mod exec;
pub mod rng;

use std::fmt::Write as _;

use rand::Rng;

use crate::code::{encode_bytes_in_place, CodeSpec};
use crate::construction::{construct, ConstructionParams, Method};
use crate::decode::{DecoderKind, LlrDomain, MsdDecoder, ProbDomain, ScDecoder, SuccessiveDecoder};
use crate::error::{Error, Result};
use crate::numerics::LLR_MAX;
use crate::systematic::{choose_output_set, SystematicEncoder, SystematicSpec};

pub use channel::{llr_to_h, transmit, ChannelModel};
pub use exec::Execution;
pub use rng::{block_rng, Purpose};

/// Default block-error target of [`BlockPolicy::UntilErrors`].
pub const DEFAULT_ERROR_TARGET: u64 = 100;
/// Default block cap of [`BlockPolicy::UntilErrors`].
pub const DEFAULT_MAX_BLOCKS: u64 = 10_000_000;

const FIRST_BATCH: u64 = 1024;
const MAX_BATCH: u64 = 1 << 16;

/// How many blocks to run at one point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockPolicy {
    Fixed(u64),
    /// Stop at the block that brings the block-error count to `target`, or
    /// after `max_blocks`.
    UntilErrors { target: u64, max_blocks: u64 },
}

impl Default for BlockPolicy {
    fn default() -> Self {
        BlockPolicy::UntilErrors {
            target: DEFAULT_ERROR_TARGET,
            max_blocks: DEFAULT_MAX_BLOCKS,
        }
    }
}

/// Deliberately corrupts decoder output to check the error counters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ErrorInjection {
    /// Corrupt blocks whose index is a multiple of `every`.
    pub every: u64,
    /// Number of leading data bits flipped in a corrupted block.
    pub bits: usize,
}

/// Everything that defines a simulation except the SNR and the seed.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m: u32,
    pub k: usize,
    pub construction: ConstructionParams,
    pub decoder: DecoderKind,
    pub systematic: bool,
    pub noiseless: bool,
    pub llr_max: f64,
    pub execution: Execution,
    pub error_injection: Option<ErrorInjection>,
}

impl SimConfig {
    pub fn new(m: u32, k: usize, method: Method, decoder: DecoderKind) -> Self {
        SimConfig {
            m,
            k,
            construction: ConstructionParams::new(method),
            decoder,
            systematic: false,
            noiseless: false,
            llr_max: LLR_MAX,
            execution: Execution::default(),
            error_injection: None,
        }
    }

    pub fn n(&self) -> usize {
        1usize << self.m
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n() as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.m > 24 {
            return Err(Error::Config(format!("--m {} is too large to simulate", self.m)));
        }
        if self.k == 0 || self.k > self.n() {
            return Err(Error::Config(format!(
                "--k must be in 1..={}, got {}",
                self.n(),
                self.k
            )));
        }
        if !(self.llr_max > 0.0 && self.llr_max.is_finite()) {
            return Err(Error::Config(format!(
                "--llr-max must be positive, got {}",
                self.llr_max
            )));
        }
        if let Some(inj) = self.error_injection {
            if inj.every == 0 || inj.bits > self.k {
                return Err(Error::Config("invalid error injection".into()));
            }
        }
        self.construction.validate()
    }
}

/// One measured operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRecord {
    pub n: usize,
    pub k: usize,
    pub rate: f64,
    pub construction: Method,
    pub decoder: DecoderKind,
    pub systematic: bool,
    pub ebn0_db: f64,
    pub blocks: u64,
    pub bit_errors: u64,
    pub block_errors: u64,
    pub ber: f64,
    pub bler: f64,
    pub seed: u64,
}

impl SimRecord {
    pub const CSV_HEADER: &'static str =
        "n,k,rate,construction,decoder,systematic,ebn0_db,blocks,bit_errors,block_errors,ber,bler,seed";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.k,
            format_sig6(self.rate),
            self.construction,
            self.decoder,
            u8::from(self.systematic),
            format_sig6(self.ebn0_db),
            self.blocks,
            self.bit_errors,
            self.block_errors,
            format_sig6(self.ber),
            format_sig6(self.bler),
            self.seed
        )
    }

    /// Wilson score interval for the BLER at confidence quantile `z`.
    pub fn bler_interval(&self, z: f64) -> (f64, f64) {
        wilson_interval(self.block_errors, self.blocks, z)
    }
}

/// Header plus one row per record.
pub fn records_to_csv(records: &[SimRecord]) -> String {
    let mut out = String::new();
    out.push_str(SimRecord::CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// `%.6g`-style formatting: six significant digits, trailing zeros dropped.
pub fn format_sig6(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.5e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&exp) {
        let decimals = (5 - exp).max(0) as usize;
        let fixed = format!("{:.*}", decimals, x);
        trim_zeros(&fixed).to_string()
    } else {
        let mut s = trim_zeros(mantissa).to_string();
        let _ = write!(s, "e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
        s
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct BlockOutcome {
    bit_errors: u32,
}

enum AnyDecoder {
    Scd(ScDecoder),
    Msd(MsdDecoder),
}

/// Per-worker scratch for one point.
struct BlockWorker<'a> {
    point: &'a PointSetup,
    decoder: AnyDecoder,
    systematic: Option<SystematicEncoder>,
    data: Vec<u8>,
    estimate: Vec<u8>,
    message: Vec<u8>,
    codeword: Vec<u8>,
    llr: Vec<f64>,
    h: Vec<f64>,
    dec_message: Vec<u8>,
    dec_codeword: Vec<u8>,
}

struct PointSetup {
    spec: CodeSpec,
    sspec: Option<SystematicSpec>,
    channel: ChannelModel,
    decoder: DecoderKind,
    llr_max: f64,
    seed: u64,
    injection: Option<ErrorInjection>,
}

impl<'a> BlockWorker<'a> {
    fn new(point: &'a PointSetup) -> Self {
        let n = point.spec.n();
        let k = point.spec.k();
        let decoder = match point.decoder {
            DecoderKind::Scd => AnyDecoder::Scd(SuccessiveDecoder::new(
                &point.spec,
                LlrDomain {
                    llr_max: point.llr_max,
                },
            )),
            DecoderKind::Msd => AnyDecoder::Msd(SuccessiveDecoder::new(&point.spec, ProbDomain)),
        };
        BlockWorker {
            point,
            decoder,
            systematic: point.sspec.as_ref().map(SystematicEncoder::new),
            data: vec![0; k],
            estimate: vec![0; k],
            message: vec![0; n],
            codeword: vec![0; n],
            llr: vec![0.0; n],
            h: vec![0.0; n],
            dec_message: vec![0; n],
            dec_codeword: vec![0; n],
        }
    }

    fn run(&mut self, block: u64) -> Result<BlockOutcome> {
        let p = self.point;
        let mut data_rng = block_rng(p.seed, block, Purpose::Data);
        for b in self.data.iter_mut() {
            *b = data_rng.gen_range(0..2);
        }

        match self.systematic.as_mut() {
            Some(enc) => {
                let (_, cw) = enc.encode_in_place(&self.data)?;
                self.codeword.copy_from_slice(cw);
            }
            None => {
                self.message.fill(0);
                for (&i, &b) in p.spec.info_set().iter().zip(&self.data) {
                    self.message[i] = b;
                }
                self.codeword.copy_from_slice(&self.message);
                encode_bytes_in_place(&mut self.codeword);
            }
        }

        let mut noise_rng = block_rng(p.seed, block, Purpose::Noise);
        p.channel
            .transmit_into(&self.codeword, &mut noise_rng, &mut self.llr);

        match &mut self.decoder {
            AnyDecoder::Scd(d) => d.decode_into(&self.llr, &mut self.dec_message, &mut self.dec_codeword)?,
            AnyDecoder::Msd(d) => {
                llr_to_h(&self.llr, &mut self.h);
                d.decode_into(&self.h, &mut self.dec_message, &mut self.dec_codeword)?
            }
        }

        match &p.sspec {
            Some(s) => {
                for (e, &j) in self.estimate.iter_mut().zip(s.output_set()) {
                    *e = self.dec_codeword[j];
                }
            }
            None => {
                for (e, &i) in self.estimate.iter_mut().zip(p.spec.info_set()) {
                    *e = self.dec_message[i];
                }
            }
        }
        if let Some(inj) = p.injection {
            if block % inj.every == 0 {
                for e in self.estimate.iter_mut().take(inj.bits) {
                    *e ^= 1;
                }
            }
        }

        let bit_errors = self
            .data
            .iter()
            .zip(&self.estimate)
            .filter(|(a, b)| a != b)
            .count() as u32;
        Ok(BlockOutcome { bit_errors })
    }
}

/// Measures one operating point, reconstructing the code for its SNR first.
pub fn run_point(config: &SimConfig, ebn0_db: f64, policy: BlockPolicy, seed: u64) -> Result<SimRecord> {
    config.validate()?;
    match policy {
        BlockPolicy::Fixed(0) => return Err(Error::Config("--blocks must be at least 1".into())),
        BlockPolicy::UntilErrors { target, max_blocks } if target == 0 || max_blocks == 0 => {
            return Err(Error::Config(
                "--error-target and --max-blocks must be at least 1".into(),
            ))
        }
        _ => {}
    }
    let channel = ChannelModel::from_ebn0_db(ebn0_db, config.rate())?
        .with_noiseless(config.noiseless)
        .with_llr_max(config.llr_max);
    let (spec, _) = construct(
        &config.construction,
        config.m,
        config.k,
        &channel,
        seed,
        config.execution,
    )?;
    let sspec = if config.systematic {
        Some(choose_output_set(&spec)?)
    } else {
        None
    };
    let point = PointSetup {
        spec,
        sspec,
        channel,
        decoder: config.decoder,
        llr_max: config.llr_max,
        seed,
        injection: config.error_injection,
    };

    let (max_blocks, target) = match policy {
        BlockPolicy::Fixed(b) => (b, None),
        BlockPolicy::UntilErrors { target, max_blocks } => (max_blocks, Some(target)),
    };
    let mut blocks = 0u64;
    let mut bit_errors = 0u64;
    let mut block_errors = 0u64;
    let mut batch = FIRST_BATCH;
    'outer: while blocks < max_blocks {
        let end = (blocks + batch).min(max_blocks);
        let outcomes = exec::map_blocks(
            config.execution,
            blocks..end,
            || BlockWorker::new(&point),
            |w, b| w.run(b),
        );
        for outcome in outcomes {
            let outcome = outcome?;
            blocks += 1;
            bit_errors += u64::from(outcome.bit_errors);
            if outcome.bit_errors > 0 {
                block_errors += 1;
                if target.is_some_and(|t| block_errors >= t) {
                    break 'outer;
                }
            }
        }
        batch = (batch * 2).min(MAX_BATCH);
    }

    let k = config.k as u64;
    Ok(SimRecord {
        n: config.n(),
        k: config.k,
        rate: config.rate(),
        construction: config.construction.method,
        decoder: config.decoder,
        systematic: config.systematic,
        ebn0_db,
        blocks,
        bit_errors,
        block_errors,
        ber: bit_errors as f64 / (blocks * k) as f64,
        bler: block_errors as f64 / blocks as f64,
        seed,
    })
}

/// Runs every point of `ebn0_db`, returning records sorted by Eb/N0.
pub fn run_sweep(config: &SimConfig, ebn0_db: &[f64], policy: BlockPolicy, seed: u64) -> Result<Vec<SimRecord>> {
    config.validate()?;
    let mut points = ebn0_db.to_vec();
    if let Some(bad) = points.iter().find(|x| !x.is_finite()) {
        return Err(Error::Config(format!("--ebn0-db value {bad} is not finite")));
    }
    points.sort_by(f64::total_cmp);
    points
        .into_iter()
        .map(|e| run_point(config, e, policy, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sig6_formatting() {
        assert_eq!(format_sig6(0.0), "0");
        assert_eq!(format_sig6(0.5), "0.5");
        assert_eq!(format_sig6(2.0), "2");
        assert_eq!(format_sig6(-1.5), "-1.5");
        assert_eq!(format_sig6(1.0 / 3.0), "0.333333");
        assert_eq!(format_sig6(123456.7), "123457");
        assert_eq!(format_sig6(1234567.0), "1.23457e+06");
        assert_eq!(format_sig6(1.234567e-5), "1.23457e-05");
        assert_eq!(format_sig6(0.0001), "0.0001");
        assert_eq!(format_sig6(1e-7), "1e-07");
    }

    #[test]
    fn wilson_bounds() {
        let (lo, hi) = wilson_interval(0, 100, 1.96);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.03 && hi < 0.04);
        let (lo, hi) = wilson_interval(50, 100, 1.96);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig::new(4, 8, Method::Dega, DecoderKind::Scd);
        assert!(c.validate().is_ok());
        c.k = 17;
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        c.k = 0;
        assert!(c.validate().is_err());
        c.k = 8;
        assert!(run_point(&c, 1.0, BlockPolicy::Fixed(0), 1).is_err());
        assert!(run_sweep(&c, &[f64::NAN], BlockPolicy::Fixed(1), 1).is_err());
        assert!(run_sweep(&c, &[], BlockPolicy::Fixed(1), 1).unwrap().is_empty());
    }

    #[test]
    fn noiseless_point_is_error_free() {
        let mut c = SimConfig::new(6, 32, Method::Dega, DecoderKind::Msd);
        c.noiseless = true;
        let r = run_point(&c, 0.0, BlockPolicy::Fixed(50), 3).unwrap();
        assert_eq!((r.bit_errors, r.block_errors, r.blocks), (0, 0, 50));
        assert_eq!(r.ber, 0.0);
    }

    #[test]
    fn stop_rule_counts_exactly_to_target() {
        let c = SimConfig::new(5, 32, Method::RmWeight, DecoderKind::Scd);
        let r = run_point(
            &c,
            -3.0,
            BlockPolicy::UntilErrors {
                target: 7,
                max_blocks: 1000,
            },
            9,
        )
        .unwrap();
        assert_eq!(r.block_errors, 7);
        assert!(r.blocks >= 7);
    }
}
