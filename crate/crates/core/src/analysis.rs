//! Closed-form array-gain bounds, SNR approximations and scaling laws.
//!
//! With phase alignment, the array gain of a waveguide whose `N` antennas sit
//! at offsets `(k − ½)·s` on both sides of the user is
//!
//! ```text
//! Σ_{k=1}^{N/2} 2√η / (√N · sqrt((k − ½)² s² + H_m²))
//! ```
//!
//! Evaluated at `s = Δ_min` it bounds the achievable gain from above; at the
//! realized `s = Δ_max` from below. Replacing the midpoint sum by its integral
//! gives `2√η/(√N s) · asinh(N s / 2H_m)`, which drives every SNR expression
//! here.

use crate::error::{Error, Result};
use crate::model::{SystemParams, UserPosition, WaveguideLayout};
use crate::beamforming::RfMode;
use crate::model::SPACING_TOLERANCE_M;

/// `ln(sqrt(1 + x²) + x)`, i.e. `asinh(x)`.
pub fn f_ub(x: f64) -> f64 {
    x.asinh()
}

/// Largest `N·Δ_min/(2H_m)` for which the linear SNR law is treated as accurate.
pub const LINEAR_REGIME_LIMIT: f64 = 0.05;

/// `Δ_min / H_m` beyond which the integral approximation is flagged.
pub const APPROX_QUALITY_LIMIT: f64 = 0.1;

fn check_gain_args(elevation: f64, n: usize, spacing: f64) -> Result<()> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::invalid("n", format!("must be a positive even integer, got {n}")));
    }
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(Error::invalid("spacing", format!("must be positive, got {spacing}")));
    }
    if !(elevation > 0.0 && elevation.is_finite()) {
        return Err(Error::invalid("elevation", format!("must be positive, got {elevation}")));
    }
    Ok(())
}

fn uniform_sum(eta: f64, elevation: f64, n: usize, spacing: f64) -> f64 {
    let scale = 2.0 * eta.sqrt() / (n as f64).sqrt();
    (1..=n / 2)
        .map(|k| {
            let offset = (k as f64 - 0.5) * spacing;
            scale / offset.hypot(elevation)
        })
        .sum()
}

/// Gain of a uniformly spaced, phase-aligned array: the upper bound at `spacing = Δ_min`.
pub fn gain_upper(params: &SystemParams, elevation: f64, n: usize, spacing: f64) -> Result<f64> {
    check_gain_args(elevation, n, spacing)?;
    Ok(uniform_sum(params.eta(), elevation, n, spacing))
}

/// Lower bound on the refined gain from its largest spacing.
pub fn gain_lower(params: &SystemParams, elevation: f64, n: usize, delta_max: f64) -> Result<f64> {
    check_gain_args(elevation, n, delta_max)?;
    if delta_max < params.min_spacing_m - SPACING_TOLERANCE_M {
        return Err(Error::invalid(
            "delta_max",
            format!("{delta_max} is below the minimum spacing {}", params.min_spacing_m),
        ));
    }
    Ok(uniform_sum(params.eta(), elevation, n, delta_max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ApproxGain {
    pub value: f64,
    /// False when `spacing / H_m ≥ 0.1`, where the integral form degrades.
    pub reliable: bool,
}

fn integral_gain(eta: f64, elevation: f64, n: usize, spacing: f64) -> f64 {
    let n = n as f64;
    2.0 * eta.sqrt() / (n.sqrt() * spacing) * f_ub(n * spacing / (2.0 * elevation))
}

/// Integral approximation `2√η/(√N s) · f_ub(N s / 2H_m)` of the aligned gain.
pub fn gain_approx(params: &SystemParams, elevation: f64, n: usize, spacing: f64) -> Result<ApproxGain> {
    check_gain_args(elevation, n, spacing)?;
    Ok(ApproxGain {
        value: integral_gain(params.eta(), elevation, n, spacing),
        reliable: spacing / elevation < APPROX_QUALITY_LIMIT,
    })
}

/// Where the largest spacing used by the lower bounds comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum DeltaMax {
    /// Per-waveguide values from an actual refinement.
    Realized(Vec<f64>),
    /// `Δ_min + λ/(n_eff − 1)` (or `Δ_min + 2λ` when `n_eff = 1`) on every waveguide.
    Surrogate,
}

pub fn surrogate_delta_max(params: &SystemParams) -> f64 {
    let lambda = params.wavelength();
    if params.n_eff > 1.0 {
        params.min_spacing_m + lambda / (params.n_eff - 1.0)
    } else {
        params.min_spacing_m + 2.0 * lambda
    }
}

/// Analytical SNR and capacity certificates for one user and antenna count.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsReport {
    pub n: usize,
    pub elevations: Vec<f64>,
    pub delta_max: Vec<f64>,
    pub delta_max_is_surrogate: bool,
    /// Midpoint sum at `Δ_min`, per waveguide.
    pub upper_gain: Vec<f64>,
    /// Integral form at `Δ_min`, per waveguide.
    pub approx_gain: Vec<f64>,
    /// Midpoint sum at `Δ_max`, per waveguide.
    pub lower_gain: Vec<f64>,
    pub snr1_upper: f64,
    pub snr1_lower: f64,
    pub snr1_linear: f64,
    pub snr2_upper: f64,
    pub snr2_lower: f64,
    pub snr2_linear: f64,
    /// Multi-RF bounds with the `P/(Mσ²)` prefactor instead of `P/σ²`.
    pub snr2_upper_per_waveguide_power: f64,
    pub snr2_lower_per_waveguide_power: f64,
    /// `max_m N·Δ_min/(2H_m) ≤ 0.05`.
    pub linear_regime: bool,
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / std::f64::consts::LN_2
}

impl BoundsReport {
    pub fn snr_bounds(&self, mode: RfMode) -> (f64, f64) {
        match mode {
            RfMode::Single => (self.snr1_lower, self.snr1_upper),
            RfMode::Multi => (self.snr2_lower, self.snr2_upper),
        }
    }

    pub fn snr_linear(&self, mode: RfMode) -> f64 {
        match mode {
            RfMode::Single => self.snr1_linear,
            RfMode::Multi => self.snr2_linear,
        }
    }

    /// `(lower, upper)` capacity bounds in bits/s/Hz.
    pub fn capacity_bounds(&self, mode: RfMode) -> (f64, f64) {
        let (lo, hi) = self.snr_bounds(mode);
        (log2_1p(lo), log2_1p(hi))
    }
}

/// Single- and multi-RF SNR bounds, approximations and capacity bounds.
///
/// Each waveguide uses its own elevation `H_m` and, when realized values are
/// supplied, its own `Δ_max`.
pub fn snr_bounds(
    params: &SystemParams,
    layout: &WaveguideLayout,
    user: &UserPosition,
    n: usize,
    delta_max: DeltaMax,
) -> Result<BoundsReport> {
    let elevations = layout.elevations(user);
    let m = elevations.len();
    let (delta_max, delta_max_is_surrogate) = match delta_max {
        DeltaMax::Realized(v) => {
            if v.len() != m {
                return Err(Error::invalid(
                    "delta_max",
                    format!("expected {m} values, got {}", v.len()),
                ));
            }
            (v, false)
        }
        DeltaMax::Surrogate => (vec![surrogate_delta_max(params); m], true),
    };
    let eta = params.eta();
    let spacing = params.min_spacing_m;

    let mut upper_gain = Vec::with_capacity(m);
    let mut approx_gain = Vec::with_capacity(m);
    let mut lower_gain = Vec::with_capacity(m);
    let mut integral_lower = Vec::with_capacity(m);
    for (&h, &dmax) in elevations.iter().zip(&delta_max) {
        upper_gain.push(gain_upper(params, h, n, spacing)?);
        approx_gain.push(gain_approx(params, h, n, spacing)?.value);
        lower_gain.push(gain_lower(params, h, n, dmax)?);
        integral_lower.push(integral_gain(eta, h, n, dmax));
    }

    let mf = m as f64;
    let p_over_noise = params.power_w / params.noise_w;
    let square_of_sum = |g: &[f64]| g.iter().sum::<f64>().powi(2);
    let sum_of_squares = |g: &[f64]| g.iter().map(|x| x * x).sum::<f64>();

    let snr2_upper = p_over_noise * sum_of_squares(&approx_gain);
    let snr2_lower = p_over_noise * sum_of_squares(&integral_lower);

    Ok(BoundsReport {
        n,
        snr1_upper: p_over_noise / mf * square_of_sum(&approx_gain),
        snr1_lower: p_over_noise / mf * square_of_sum(&integral_lower),
        snr1_linear: snr_linear(params, layout, user, n, RfMode::Single),
        snr2_upper,
        snr2_lower,
        snr2_linear: snr_linear(params, layout, user, n, RfMode::Multi),
        snr2_upper_per_waveguide_power: snr2_upper / mf,
        snr2_lower_per_waveguide_power: snr2_lower / mf,
        linear_regime: elevations
            .iter()
            .all(|h| n as f64 * spacing / (2.0 * h) <= LINEAR_REGIME_LIMIT),
        elevations,
        delta_max,
        delta_max_is_surrogate,
        upper_gain,
        approx_gain,
        lower_gain,
    })
}

/// Linear scaling law: `P N η/(Mσ²)·(Σ 1/H_m)²` (single RF) or
/// `P N η/σ²·Σ 1/H_m²` (multi RF). Independent of `Δ_min`.
pub fn snr_linear(params: &SystemParams, layout: &WaveguideLayout, user: &UserPosition, n: usize, mode: RfMode) -> f64 {
    let elevations = layout.elevations(user);
    let base = params.power_w * n as f64 * params.eta() / params.noise_w;
    match mode {
        RfMode::Single => {
            let s: f64 = elevations.iter().map(|h| 1.0 / h).sum();
            base / elevations.len() as f64 * s * s
        }
        RfMode::Multi => base * elevations.iter().map(|h| 1.0 / (h * h)).sum::<f64>(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeRow {
    pub n: usize,
    pub upper: f64,
    pub lower: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    pub mode: RfMode,
    pub rows: Vec<EnvelopeRow>,
    pub argmax_upper: usize,
    pub argmax_lower: usize,
    /// Both bounds strictly decrease at every step after their maximizer.
    pub decays: bool,
}

fn argmax_by(rows: &[EnvelopeRow], key: impl Fn(&EnvelopeRow) -> f64) -> usize {
    rows.iter()
        .enumerate()
        .max_by(|a, b| key(a.1).total_cmp(&key(b.1)))
        .map(|(i, _)| i)
        .unwrap_or(0)
}

/// SNR bounds over a range of antenna counts, using the surrogate `Δ_max`.
pub fn asymptotic_envelope(
    params: &SystemParams,
    layout: &WaveguideLayout,
    user: &UserPosition,
    ns: &[usize],
    mode: RfMode,
) -> Result<Envelope> {
    let rows = ns
        .iter()
        .map(|&n| {
            let report = snr_bounds(params, layout, user, n, DeltaMax::Surrogate)?;
            let (lower, upper) = report.snr_bounds(mode);
            Ok(EnvelopeRow { n, upper, lower })
        })
        .collect::<Result<Vec<_>>>()?;
    let iu = argmax_by(&rows, |r| r.upper);
    let il = argmax_by(&rows, |r| r.lower);
    let decreasing = |from: usize, key: &dyn Fn(&EnvelopeRow) -> f64| {
        rows[from..].windows(2).all(|w| key(&w[1]) < key(&w[0]))
    };
    let decays = decreasing(iu, &|r| r.upper) && decreasing(il, &|r| r.lower);
    Ok(Envelope {
        mode,
        argmax_upper: rows.get(iu).map_or(0, |r| r.n),
        argmax_lower: rows.get(il).map_or(0, |r| r.n),
        rows,
        decays,
    })
}

/// `|Σ_{k=1}^{N/2} ρ f_int((k − ½)ρ) − f_ub(Nρ/2)|` with `f_int(x) = 1/sqrt(1 + x²)`:
/// the error of replacing the normalized gain sum by its integral.
pub fn midpoint_deviation(n: usize, ratio: f64) -> f64 {
    let sum: f64 = (1..=n / 2)
        .map(|k| ratio / ((k as f64 - 0.5) * ratio).hypot(1.0))
        .sum();
    (sum - f_ub(n as f64 * ratio / 2.0)).abs()
}

/// Quadratic error budget `ρ² N / 8` for [`midpoint_deviation`].
pub fn midpoint_bound(n: usize, ratio: f64) -> f64 {
    ratio * ratio * n as f64 / 8.0
}
