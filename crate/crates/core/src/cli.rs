//! Command-line front end: `construct`, `transfer`, `encode`, `decode`, `simulate`.
//!
//! Every subcommand is a pure function of its flags, input files and seed.
//! The `cmd_*` functions return the text they would write so they can be
//! exercised without touching the filesystem.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::code::{encode, CodeSpec};
use crate::construction::{construct, ConstructionParams, Method};
use crate::decode::{DecoderKind, LlrDomain, ProbDomain, SuccessiveDecoder};
use crate::error::{Error, Result};
use crate::numerics::{LookupTables, Quadrature, LLR_MAX};
use crate::sim::{
    self, format_sig6, records_to_csv, BlockPolicy, ChannelModel, Execution, SimConfig,
    DEFAULT_ERROR_TARGET, DEFAULT_MAX_BLOCKS,
};
use crate::systematic::{choose_output_set, SystematicEncoder};
use crate::transfer::{linear_grid, transfer_curve, SNR_LLR_MAP};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 1;

const SNR_CONVENTION: &str = "sigma^2 = 1/(2*rate*10^(ebn0_db/10)), unit-energy BPSK";

#[derive(Debug, Parser)]
#[command(name = "polar-ocbm", version, about = "Polar / OCBM code construction, coding and simulation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an information set and write it in info-set format.
    Construct(ConstructArgs),
    /// Degraded-channel transfer curve of DE-GA vs EqSNR.
    Transfer(TransferArgs),
    /// Encode one data word; writes BPSK symbols, one per line.
    Encode(EncodeArgs),
    /// Decode soft values (one float per line).
    Decode(DecodeArgs),
    /// Monte-Carlo BER/BLER sweep, CSV output.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Eqsnr,
    Dega,
    Bec,
    Genie,
    Rm,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Eqsnr => Method::EqSnr,
            MethodArg::Dega => Method::Dega,
            MethodArg::Bec => Method::BecZ,
            MethodArg::Genie => Method::Genie,
            MethodArg::Rm => Method::RmWeight,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DecoderArg {
    Scd,
    Msd,
}

impl From<DecoderArg> for DecoderKind {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Scd => DecoderKind::Scd,
            DecoderArg::Msd => DecoderKind::Msd,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SoftArg {
    /// Log-likelihood ratios.
    Llr,
    /// Differences of probabilities in [-1, 1].
    H,
}

/// Block length and dimension; exactly one of each pair is required.
#[derive(Debug, Clone, Args)]
pub struct ShapeArgs {
    /// Block length (power of two).
    #[arg(long)]
    pub n: Option<usize>,
    /// log2 of the block length.
    #[arg(long)]
    pub m: Option<u32>,
    /// Code dimension.
    #[arg(long)]
    pub k: Option<usize>,
    /// Code rate k/n.
    #[arg(long)]
    pub rate: Option<f64>,
}

impl ShapeArgs {
    /// Resolves `(m, k)`, rejecting ambiguous or invalid combinations.
    pub fn resolve(&self) -> Result<(u32, usize)> {
        let m = match (self.n, self.m) {
            (Some(_), Some(_)) => return Err(Error::Config("give only one of --n and --m".into())),
            (None, None) => return Err(Error::Config("one of --n or --m is required".into())),
            (Some(n), None) => {
                if !n.is_power_of_two() {
                    return Err(Error::Config(format!("--n {n} is not a power of two")));
                }
                n.trailing_zeros()
            }
            (None, Some(m)) => m,
        };
        if m > 24 {
            return Err(Error::Config(format!("--m {m} exceeds the supported 24")));
        }
        let n = 1usize << m;
        let k = match (self.k, self.rate) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give only one of --k and --rate".into()))
            }
            (None, None) => return Err(Error::Config("one of --k or --rate is required".into())),
            (Some(k), None) => k,
            (None, Some(r)) => {
                let k = r * n as f64;
                if !(r > 0.0 && r <= 1.0) || (k - k.round()).abs() > 1e-9 {
                    return Err(Error::Config(format!(
                        "--rate {r} does not give an integer dimension for n = {n}"
                    )));
                }
                k.round() as usize
            }
        };
        if k == 0 || k > n {
            return Err(Error::Config(format!("--k {k} must be in 1..={n}")));
        }
        Ok((m, k))
    }
}

/// Construction method and its knobs.
#[derive(Debug, Clone, Args)]
pub struct MethodArgs {
    #[arg(long, value_enum, default_value_t = MethodArg::Dega)]
    pub method: MethodArg,
    /// Design erasure probability for `--method bec`.
    #[arg(long, default_value_t = 0.5)]
    pub eps: f64,
    /// Monte-Carlo blocks for `--method genie`.
    #[arg(long, default_value_t = 10_000)]
    pub genie_blocks: u64,
    /// Use precomputed lookup tables instead of direct quadrature.
    #[arg(long)]
    pub lut: bool,
}

impl MethodArgs {
    fn params(&self) -> Result<ConstructionParams> {
        let params = ConstructionParams {
            method: self.method.into(),
            bec_epsilon: self.eps,
            genie_blocks: self.genie_blocks,
            lookup_tables: self.lut,
        };
        params.validate()?;
        Ok(params)
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConstructArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    /// Design Eb/N0 in dB for the SNR-dependent methods.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub ebn0_db: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Worker threads for genie construction.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Info-set output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional per-index CSV `index,score,selected`.
    #[arg(long)]
    pub scores: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TransferArgs {
    #[arg(long, default_value_t = 0.2)]
    pub l0_min: f64,
    #[arg(long, default_value_t = 20.0)]
    pub l0_max: f64,
    #[arg(long, default_value_t = 50)]
    pub points: usize,
    #[arg(long)]
    pub lut: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EncodeArgs {
    /// Info-set file.
    #[arg(long)]
    pub info_set: PathBuf,
    /// Data bits as a 0/1 string of length k.
    #[arg(long, conflicts_with = "random")]
    pub data: Option<String>,
    /// Draw the data bits from `--seed`.
    #[arg(long)]
    pub random: bool,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub systematic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    #[arg(long)]
    pub info_set: PathBuf,
    /// Soft values, one per line; `#` lines are ignored.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SoftArg::Llr)]
    pub soft: SoftArg,
    #[arg(long, value_enum, default_value_t = DecoderArg::Scd)]
    pub decoder: DecoderArg,
    /// Read the data from the output coordinates instead of the message.
    #[arg(long)]
    pub systematic: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[command(flatten)]
    pub method: MethodArgs,
    #[arg(long, value_enum, default_value_t = DecoderArg::Scd)]
    pub decoder: DecoderArg,
    #[arg(long)]
    pub systematic: bool,
    /// Comma-separated Eb/N0 points in dB.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    pub ebn0_db: Vec<f64>,
    /// Fixed number of blocks per point.
    #[arg(long, conflicts_with_all = ["error_target", "max_blocks"])]
    pub blocks: Option<u64>,
    /// Stop a point after this many block errors.
    #[arg(long)]
    pub error_target: Option<u64>,
    /// Block cap when stopping on errors.
    #[arg(long)]
    pub max_blocks: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Replace the channel by exact `±llr_max` symbols.
    #[arg(long)]
    pub noiseless: bool,
    #[arg(long, default_value_t = LLR_MAX)]
    pub llr_max: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs `f` on a pool of `workers` threads when parallelism is compiled in.
fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == Some(0) {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    if let Some(w) = workers {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::Config(format!("--workers {w}: {e}")))?;
        return Ok(pool.install(f));
    }
    Ok(f())
}

/// Output of `construct`: the info-set file and the score CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstructOutput {
    pub info_set: String,
    pub scores: String,
}

pub fn cmd_construct(args: &ConstructArgs) -> Result<ConstructOutput> {
    let (m, k) = args.shape.resolve()?;
    let params = args.method.params()?;
    let rate = k as f64 / (1usize << m) as f64;
    let channel = ChannelModel::from_ebn0_db(args.ebn0_db, rate)
        .map_err(|e| Error::Config(format!("--ebn0-db: {e}")))?;
    let (spec, profile) = with_workers(args.workers, || {
        construct(&params, m, k, &channel, args.seed, Execution::default())
    })??;
    let mut scores = String::from("index,score,selected\n");
    for (i, s) in profile.scores().iter().enumerate() {
        let _ = writeln!(scores, "{i},{},{}", format_sig6(*s), u8::from(!spec.is_frozen(i)));
    }
    Ok(ConstructOutput {
        info_set: spec.to_string(),
        scores,
    })
}

pub fn cmd_transfer(args: &TransferArgs) -> Result<String> {
    if args.points == 0 {
        return Err(Error::Config("--points must be at least 1".into()));
    }
    if !(args.l0_min >= 0.0 && args.l0_max >= args.l0_min && args.l0_max.is_finite()) {
        return Err(Error::Config(
            "--l0-min/--l0-max must satisfy 0 <= min <= max".into(),
        ));
    }
    let grid = linear_grid(args.l0_min, args.l0_max, args.points);
    let curve = if args.lut {
        transfer_curve(LookupTables::shared(), &grid)
    } else {
        transfer_curve(&Quadrature, &grid)
    };
    let mut out = format!("# map: {SNR_LLR_MAP}\nl0,lv_dega,lv_eqsnr,eqsnr_capped,dega_capped\n");
    for p in curve {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            format_sig6(p.l0),
            format_sig6(p.lv_dega),
            format_sig6(p.lv_eqsnr),
            u8::from(p.eqsnr_capped),
            u8::from(p.dega_capped)
        );
    }
    Ok(out)
}

fn read_info_set(path: &Path) -> Result<CodeSpec> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("--info-set {}: {e}", path.display())))?;
    text.parse()
}

fn parse_bit_string(s: &str, flag: &str) -> Result<Vec<u8>> {
    s.trim()
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(Error::Config(format!("{flag}: unexpected character `{other}`"))),
        })
        .collect()
}

fn bit_string(bits: &[u8]) -> String {
    bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
}

pub fn cmd_encode(args: &EncodeArgs) -> Result<String> {
    let spec = read_info_set(&args.info_set)?;
    let data = match (&args.data, args.random) {
        (Some(d), false) => parse_bit_string(d, "--data")?,
        (None, true) => {
            use rand::Rng;
            let mut rng = sim::block_rng(args.seed, 0, sim::Purpose::Data);
            (0..spec.k()).map(|_| rng.gen_range(0..2)).collect()
        }
        _ => return Err(Error::Config("give exactly one of --data or --random".into())),
    };
    if data.len() != spec.k() {
        return Err(Error::Config(format!(
            "--data has {} bits but the code has k = {}",
            data.len(),
            spec.k()
        )));
    }
    let (message, codeword) = if args.systematic {
        let sspec = choose_output_set(&spec)?;
        SystematicEncoder::new(&sspec).encode(&data)?
    } else {
        let msg = spec.message_from_data(&data)?;
        let cw = encode(&msg, &spec)?;
        (msg, cw)
    };
    let mut out = String::new();
    let _ = writeln!(out, "# data: {}", bit_string(&data));
    let _ = writeln!(out, "# message: {}", bit_string(message.bits()));
    let _ = writeln!(out, "# codeword: {}", bit_string(codeword.bits()));
    for &b in codeword.bits() {
        out.push_str(if b == 0 { "1\n" } else { "-1\n" });
    }
    Ok(out)
}

/// Parses one float per line, skipping blanks and `#` comments.
pub fn parse_soft_values(text: &str) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
        .map(|(i, l)| {
            l.parse::<f64>()
                .ok()
                .filter(|x| !x.is_nan())
                .ok_or_else(|| Error::Parse(format!("line {}: `{l}` is not a number", i + 1)))
        })
        .collect()
}

pub fn cmd_decode(args: &DecodeArgs) -> Result<String> {
    let spec = read_info_set(&args.info_set)?;
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Error::Config(format!("--input {}: {e}", args.input.display())))?;
    let values = parse_soft_values(&text)?;
    if values.len() != spec.n() {
        return Err(Error::Config(format!(
            "--input has {} values but n = {}",
            values.len(),
            spec.n()
        )));
    }
    if args.soft == SoftArg::H && values.iter().any(|h| h.abs() > 1.0) {
        return Err(Error::Config("--soft h values must lie in [-1, 1]".into()));
    }
    let result = match (DecoderKind::from(args.decoder), args.soft) {
        (DecoderKind::Scd, SoftArg::Llr) => {
            SuccessiveDecoder::new(&spec, LlrDomain::default()).decode(&values)?
        }
        (DecoderKind::Scd, SoftArg::H) => {
            let llr: Vec<f64> = values.iter().map(|h| 2.0 * h.atanh()).collect();
            SuccessiveDecoder::new(&spec, LlrDomain::default()).decode(&llr)?
        }
        (DecoderKind::Msd, SoftArg::H) => SuccessiveDecoder::new(&spec, ProbDomain).decode(&values)?,
        (DecoderKind::Msd, SoftArg::Llr) => {
            let h: Vec<f64> = values.iter().map(|l| (0.5 * l).tanh()).collect();
            SuccessiveDecoder::new(&spec, ProbDomain).decode(&h)?
        }
    };
    let data = if args.systematic {
        choose_output_set(&spec)?.data_from_codeword(result.codeword.bits())
    } else {
        spec.data_from_message(&result.message)
    };
    Ok(format!(
        "data={}\nmessage={}\ncodeword={}\n",
        bit_string(&data),
        bit_string(result.message.bits()),
        bit_string(result.codeword.bits())
    ))
}

pub fn cmd_simulate(args: &SimulateArgs, cmdline: &str) -> Result<String> {
    let (m, k) = args.shape.resolve()?;
    let construction = args.method.params()?;
    let policy = match (args.blocks, args.error_target, args.max_blocks) {
        (Some(0), _, _) => return Err(Error::Config("--blocks must be at least 1".into())),
        (Some(b), _, _) => BlockPolicy::Fixed(b),
        (None, target, max) => {
            let target = target.unwrap_or(DEFAULT_ERROR_TARGET);
            let max_blocks = max.unwrap_or(DEFAULT_MAX_BLOCKS);
            if target == 0 {
                return Err(Error::Config("--error-target must be at least 1".into()));
            }
            if max_blocks == 0 {
                return Err(Error::Config("--max-blocks must be at least 1".into()));
            }
            BlockPolicy::UntilErrors { target, max_blocks }
        }
    };
    let config = SimConfig {
        m,
        k,
        construction,
        decoder: args.decoder.into(),
        systematic: args.systematic,
        noiseless: args.noiseless,
        llr_max: args.llr_max,
        execution: Execution::default(),
        error_injection: None,
    };
    config.validate()?;
    let records = with_workers(args.workers, || {
        sim::run_sweep(&config, &args.ebn0_db, policy, args.seed)
    })??;
    let mut out = format!("# cmd: {cmdline}\n# snr: {SNR_CONVENTION}\n");
    out.push_str(&records_to_csv(&records));
    Ok(out)
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Runs a parsed command line, writing outputs to files or stdout.
pub fn run(cli: &Cli, cmdline: &str) -> Result<()> {
    match &cli.command {
        Command::Construct(a) => {
            let out = cmd_construct(a)?;
            emit(a.out.as_deref(), &out.info_set)?;
            if let Some(p) = &a.scores {
                fs::write(p, &out.scores)?;
            }
            Ok(())
        }
        Command::Transfer(a) => emit(a.out.as_deref(), &cmd_transfer(a)?),
        Command::Encode(a) => emit(a.out.as_deref(), &cmd_encode(a)?),
        Command::Decode(a) => emit(a.out.as_deref(), &cmd_decode(a)?),
        Command::Simulate(a) => emit(a.out.as_deref(), &cmd_simulate(a, cmdline)?),
    }
}

/// Process exit code for an error: 2 for bad input, 3 for broken postconditions.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Parse(_) | Error::Contract(_) | Error::Domain(_) => 2,
        Error::Internal(_) => 3,
        Error::Io(_) => 1,
    }
}
