//! Degraded-channel transfer function of the two Gaussian construction methods.
//!
//! For an input mean LLR `l0`, DE-GA gives the degraded mean LLR directly;
//! EqSNR works on `snr = l0 / 2` and its degraded SNR is mapped back with
//! `mean_llr = 2 · snr`.

use crate::construction::{dega_step_with, eqsnr_step_with};
use crate::numerics::{GaussianNumerics, CAPACITY_EPS, LLR_MAX};

/// Mapping between linear SNR and mean LLR, as printed in CSV headers.
pub const SNR_LLR_MAP: &str = "mean_llr = 2*snr, snr = 1/sigma^2";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPoint {
    pub l0: f64,
    pub lv_dega: f64,
    pub lv_eqsnr: f64,
    /// The EqSNR step evaluated a capacity at the `1 - CAPACITY_EPS` cap.
    pub eqsnr_capped: bool,
    /// The DE-GA degraded output sits at `LLR_MAX`.
    pub dega_capped: bool,
}

impl TransferPoint {
    /// `|lv_dega - lv_eqsnr| / max(lv_dega, floor)`.
    pub fn relative_gap(&self, floor: f64) -> f64 {
        (self.lv_dega - self.lv_eqsnr).abs() / self.lv_dega.max(floor)
    }
}

pub fn transfer_point<N: GaussianNumerics + ?Sized>(num: &N, l0: f64) -> TransferPoint {
    let l0 = l0.max(0.0);
    let (_, lv_dega) = dega_step_with(num, l0, l0);
    let snr = 0.5 * l0;
    let (_, snr_v) = eqsnr_step_with(num, snr);
    TransferPoint {
        l0,
        lv_dega,
        lv_eqsnr: 2.0 * snr_v,
        eqsnr_capped: l0 > 0.0 && num.capacity(2.0 * snr) >= 1.0 - CAPACITY_EPS,
        dega_capped: lv_dega >= LLR_MAX,
    }
}

/// `points` evenly spaced values from `min` to `max` inclusive.
pub fn linear_grid(min: f64, max: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![min],
        _ => (0..points)
            .map(|i| min + (max - min) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

pub fn transfer_curve<N: GaussianNumerics + ?Sized>(num: &N, grid: &[f64]) -> Vec<TransferPoint> {
    grid.iter().map(|&l0| transfer_point(num, l0)).collect()
}

/// First grid input at which each branch is capped, as `(eqsnr, dega)`.
pub fn saturation_onsets(curve: &[TransferPoint]) -> (Option<f64>, Option<f64>) {
    let eq = curve.iter().find(|p| p.eqsnr_capped).map(|p| p.l0);
    let ga = curve.iter().find(|p| p.dega_capped).map(|p| p.l0);
    (eq, ga)
}
