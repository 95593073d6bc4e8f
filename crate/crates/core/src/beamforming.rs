//! Digital and analog beamformers on top of a fixed pinching configuration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{EffectiveChannel, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RfMode {
    Single,
    Multi,
}

impl RfMode {
    pub fn label(self) -> &'static str {
        match self {
            RfMode::Single => "single_rf",
            RfMode::Multi => "multi_rf",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformerSolution {
    pub mode: RfMode,
    /// `W_ana`, one row per waveguide and one column per RF chain.
    pub analog: Vec<Vec<Complex64>>,
    pub digital: Vec<Complex64>,
    pub snr: f64,
    pub capacity_bits: f64,
}

impl BeamformerSolution {
    /// The hybrid precoder `W_ana · w_dig`.
    pub fn precoder(&self) -> Vec<Complex64> {
        self.analog
            .iter()
            .map(|row| row.iter().zip(&self.digital).map(|(a, d)| a * d).sum())
            .collect()
    }

    /// `tr(W_ana w_dig w_digᴴ W_anaᴴ)`.
    pub fn transmit_power(&self) -> f64 {
        self.precoder().iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `log₂(1 + snr)` in bits/s/Hz.
pub fn capacity(snr: f64) -> Result<f64> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::Domain(format!("SNR must be non-negative, got {snr}")));
    }
    Ok(snr.ln_1p() / std::f64::consts::LN_2)
}

/// One RF chain: `w_dig = sqrt(P/M)` and co-phasing analog weights
/// `[w_ana]_m = exp(−j ∠(hᵀG)_m)`, giving `SNR₁ = P/(Mσ²)·(Σ_m |h_mᵀg_m|)²`.
pub fn single_rf_solution(effective: &EffectiveChannel, params: &SystemParams) -> BeamformerSolution {
    let m = effective.num_waveguides() as f64;
    let analog = effective
        .inner
        .iter()
        .map(|c| vec![Complex64::from_polar(1.0, -c.arg())])
        .collect();
    let digital = vec![Complex64::new((params.power_w / m).sqrt(), 0.0)];
    let amplitude: f64 = effective.gains().iter().sum();
    let snr = params.power_w / (m * params.noise_w) * amplitude * amplitude;
    BeamformerSolution {
        mode: RfMode::Single,
        analog,
        digital,
        snr,
        capacity_bits: capacity(snr).expect("SNR is non-negative"),
    }
}

/// Two or more RF chains: the precoder is matched to the effective channel,
/// `W_ana w_dig = sqrt(P) (hᵀG)ᴴ / ‖hᵀG‖`, so `SNR₂ = P‖hᵀG‖²/σ²`.
///
/// The factorization writes each precoder entry `t_m` as
/// `a(e^{jθ₁} + e^{jθ₂})` with `θ₁,₂ = ∠t_m ± arccos(|t_m| / 2a)`,
/// `a = max_m |t_m| / 2` and `w_dig = [a, a, 0, …]`. Only the product enters
/// the SNR, which is computed from `‖hᵀG‖²` directly.
pub fn multi_rf_solution(effective: &EffectiveChannel, params: &SystemParams) -> Result<BeamformerSolution> {
    if params.rf_chains < 2 {
        return Err(Error::Mode(format!(
            "matched precoding needs at least 2 RF chains, have {}; use single_rf_solution",
            params.rf_chains
        )));
    }
    let norm_sqr = effective.norm_sqr();
    if norm_sqr.is_nan() || norm_sqr <= 0.0 {
        return Err(Error::Domain("effective channel is zero".into()));
    }
    let scale = (params.power_w / norm_sqr).sqrt();
    let target: Vec<Complex64> = effective.inner.iter().map(|c| c.conj() * scale).collect();
    let a = target.iter().map(|t| t.norm()).fold(0.0, f64::max) / 2.0;

    let analog = target
        .iter()
        .map(|t| {
            let spread = (t.norm() / (2.0 * a)).min(1.0).acos();
            let mut row = vec![Complex64::new(1.0, 0.0); params.rf_chains];
            row[0] = Complex64::from_polar(1.0, t.arg() + spread);
            row[1] = Complex64::from_polar(1.0, t.arg() - spread);
            row
        })
        .collect();
    let mut digital = vec![Complex64::new(0.0, 0.0); params.rf_chains];
    digital[0] = Complex64::new(a, 0.0);
    digital[1] = Complex64::new(a, 0.0);

    let snr = params.power_w * norm_sqr / params.noise_w;
    Ok(BeamformerSolution {
        mode: RfMode::Multi,
        analog,
        digital,
        snr,
        capacity_bits: capacity(snr)?,
    })
}

/// Solution for `mode`.
pub fn solve(effective: &EffectiveChannel, params: &SystemParams, mode: RfMode) -> Result<BeamformerSolution> {
    match mode {
        RfMode::Single => Ok(single_rf_solution(effective, params)),
        RfMode::Multi => multi_rf_solution(effective, params),
    }
}
