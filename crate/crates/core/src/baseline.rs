//! Conventional hybrid beamforming from a fixed array at the region center.
//!
//! The array is a uniform linear array along y with half-wavelength spacing at
//! height `H`, one element per analog phase-shifter row, so the hybrid product
//! has the same dimensions as the tri-hybrid one with the pinching stage removed.

use crate::beamforming::{capacity, RfMode};
use crate::error::{Error, Result};
use crate::model::{los_coefficient, SystemParams, UserPosition};

#[derive(Debug, Clone, PartialEq)]
pub struct FixedArray {
    pub positions: Vec<[f64; 3]>,
    pub spacing: f64,
}

impl FixedArray {
    /// `elements` antennas centered at `(0, 0, H)`.
    pub fn centered(params: &SystemParams, elements: usize) -> Result<Self> {
        if elements == 0 {
            return Err(Error::invalid("elements", "baseline array needs at least one element"));
        }
        let spacing = params.wavelength() / 2.0;
        let mid = (elements as f64 - 1.0) / 2.0;
        let positions = (0..elements)
            .map(|k| [0.0, (k as f64 - mid) * spacing, params.height_m])
            .collect();
        Ok(Self { positions, spacing })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineReport {
    pub mode: RfMode,
    pub snr: f64,
    pub capacity_bits: f64,
}

/// Single RF: `P/(Mσ²)·(Σ|h_m|)²`; multi RF: `P/σ²·Σ|h_m|²`.
pub fn baseline_capacity(
    params: &SystemParams,
    array: &FixedArray,
    user: &UserPosition,
    mode: RfMode,
) -> Result<BaselineReport> {
    if array.is_empty() {
        return Err(Error::invalid("elements", "baseline array is empty"));
    }
    let gains = array
        .positions
        .iter()
        .map(|&p| los_coefficient(params, p, user).map(|h| h.norm()))
        .collect::<Result<Vec<_>>>()?;
    let p_over_noise = params.power_w / params.noise_w;
    let snr = match mode {
        RfMode::Single => {
            let s: f64 = gains.iter().sum();
            p_over_noise / gains.len() as f64 * s * s
        }
        RfMode::Multi => p_over_noise * gains.iter().map(|g| g * g).sum::<f64>(),
    };
    Ok(BaselineReport {
        mode,
        snr,
        capacity_bits: capacity(snr)?,
    })
}
