//! BPSK over real AWGN, with LLR and difference-of-probability outputs.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::code::Codeword;
use crate::error::{Error, Result};
use crate::numerics::LLR_MAX;

/// Binary-input AWGN channel with unit-energy BPSK (bit 0 → +1, bit 1 → -1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelModel {
    sigma2: f64,
    ebn0_db: f64,
    rate: f64,
    noiseless: bool,
    llr_max: f64,
}

impl ChannelModel {
    /// Noise variance `σ² = 1 / (2 R 10^{EbN0/10})`.
    pub fn from_ebn0_db(ebn0_db: f64, rate: f64) -> Result<Self> {
        if !ebn0_db.is_finite() {
            return Err(Error::Config(format!("Eb/N0 must be finite, got {ebn0_db}")));
        }
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::Config(format!("rate must be in (0, 1], got {rate}")));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
        Ok(ChannelModel {
            sigma2,
            ebn0_db,
            rate,
            noiseless: false,
            llr_max: LLR_MAX,
        })
    }

    /// Channel with the given noise variance; Eb/N0 is reported for rate 1.
    pub fn from_sigma2(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Config(format!("sigma2 must be positive, got {sigma2}")));
        }
        Ok(ChannelModel {
            sigma2,
            ebn0_db: 10.0 * (1.0 / (2.0 * sigma2)).log10(),
            rate: 1.0,
            noiseless: false,
            llr_max: LLR_MAX,
        })
    }

    /// In noiseless mode `transmit` emits `±llr_max` with the codeword signs.
    /// The nominal noise variance still drives SNR-dependent construction.
    pub fn with_noiseless(mut self, noiseless: bool) -> Self {
        self.noiseless = noiseless;
        self
    }

    pub fn with_llr_max(mut self, llr_max: f64) -> Self {
        self.llr_max = llr_max;
        self
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    /// Linear SNR `1/σ²`, the convention of the numerics module.
    pub fn snr(&self) -> f64 {
        1.0 / self.sigma2
    }

    /// Mean channel LLR `2/σ²` of a transmitted zero.
    pub fn base_llr(&self) -> f64 {
        2.0 / self.sigma2
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn is_noiseless(&self) -> bool {
        self.noiseless
    }

    pub fn llr_max(&self) -> f64 {
        self.llr_max
    }

    /// Fills `llr` with clamped channel LLRs `2y/σ²` for `codeword`.
    pub fn transmit_into<R: Rng + ?Sized>(&self, codeword: &[u8], rng: &mut R, llr: &mut [f64]) {
        debug_assert_eq!(codeword.len(), llr.len());
        if self.noiseless {
            for (l, &b) in llr.iter_mut().zip(codeword) {
                *l = if b == 0 { self.llr_max } else { -self.llr_max };
            }
            return;
        }
        let sigma = self.sigma();
        let scale = 2.0 / self.sigma2;
        for (l, &b) in llr.iter_mut().zip(codeword) {
            let symbol = if b == 0 { 1.0 } else { -1.0 };
            let noise: f64 = rng.sample(StandardNormal);
            let y = symbol + sigma * noise;
            *l = (scale * y).clamp(-self.llr_max, self.llr_max);
        }
    }
}

/// Converts LLRs to differences of probabilities `h = tanh(L/2)`.
pub fn llr_to_h(llr: &[f64], h: &mut [f64]) {
    for (o, &l) in h.iter_mut().zip(llr) {
        *o = (0.5 * l).tanh();
    }
}

/// BPSK + AWGN + soft demapping; returns the LLR block and its `h` form.
pub fn transmit<R: Rng + ?Sized>(
    codeword: &Codeword,
    channel: &ChannelModel,
    rng: &mut R,
) -> (Vec<f64>, Vec<f64>) {
    let mut llr = vec![0.0; codeword.len()];
    channel.transmit_into(codeword.bits(), rng, &mut llr);
    let mut h = vec![0.0; llr.len()];
    llr_to_h(&llr, &mut h);
    (llr, h)
}
