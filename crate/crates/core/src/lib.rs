//! Binary polar codes viewed as optimized codes for bitwise multistage decoding.
//!
//! * [`code`]: code identity and the recursive Plotkin generator.
//! * [`numerics`]: BIAWGN capacity, the DE-GA `φ` function and their inverses.
//! * [`construction`]: EqSNR, DE-GA, BEC, genie and Reed-Muller reliability
//!   profiles and information-set selection.
//! * [`decode`]: SCD(L) and MSD(h) successive decoders.
//! * [`systematic`]: systematic encoding by erasure decoding.
//! * [`sim`]: BIAWGN Monte-Carlo harness.
//! * [`transfer`]: degraded-channel transfer curves of EqSNR vs DE-GA.
//! * [`cli`]: the `polar-ocbm` command-line front end.

pub mod cli;
pub mod code;
pub mod construction;
pub mod decode;
pub mod error;
pub mod numerics;
pub mod sim;
pub mod systematic;
pub mod transfer;

pub use code::{encode, materialize_generator, row_weight, CodeSpec, Codeword, MessageWord};
pub use construction::{
    bec_profile, dega_profile, dega_step, eqsnr_profile, eqsnr_step, genie_profile, rm_profile,
    select_info_set, ConstructionParams, Direction, Method, ReliabilityProfile,
};
pub use decode::{msd_decode, scd_decode, DecodeResult, DecoderKind, MsdDecoder, ScDecoder};
pub use error::{Error, Result};
pub use sim::{run_point, run_sweep, BlockPolicy, ChannelModel, Execution, SimConfig, SimRecord};
pub use systematic::{choose_output_set, is_upward_closed, systematic_encode, SystematicSpec};
