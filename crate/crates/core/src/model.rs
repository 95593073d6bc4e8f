//! System geometry, line-of-sight channel and in-waveguide propagation.
//!
//! Waveguides run parallel to the x-axis at a common height `H`. Waveguide `m`
//! is fed at `x_0` and sits at lateral offset `y_m`; its pinching antennas (PAs)
//! are placed at `x_{m,n} ∈ [x_0, x_max]`. The user is on the ground plane.
//!
//! All quantities are SI (meters, watts, hertz). dBm/GHz conversions live in
//! [`crate::units`] and are applied only when reading configuration.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::units::{dbm_to_watts, SPEED_OF_LIGHT};

/// Numerical slack accepted when checking the minimum-spacing constraint.
pub const SPACING_TOLERANCE_M: f64 = 1e-9;

/// Physical and geometric parameters of one tri-hybrid system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub carrier_frequency_hz: f64,
    pub n_eff: f64,
    pub kappa_db_per_m: f64,
    pub power_w: f64,
    pub noise_w: f64,
    pub min_spacing_m: f64,
    pub region_x_m: f64,
    pub region_y_m: f64,
    pub height_m: f64,
    pub num_waveguides: usize,
    pub pas_per_waveguide: usize,
    pub rf_chains: usize,
}

impl Default for SystemParams {
    /// 28 GHz, n_eff = 1.4, κ = 0.08 dB/m, Δ_min = λ/2, P = 10 dBm,
    /// σ² = −90 dBm, 50 m × 20 m region, H = 3 m, M = 4, N = 16, two RF chains.
    fn default() -> Self {
        let carrier_frequency_hz = 28e9;
        let wavelength = SPEED_OF_LIGHT / carrier_frequency_hz;
        Self {
            carrier_frequency_hz,
            n_eff: 1.4,
            kappa_db_per_m: 0.08,
            power_w: dbm_to_watts(10.0),
            noise_w: dbm_to_watts(-90.0),
            min_spacing_m: wavelength / 2.0,
            region_x_m: 50.0,
            region_y_m: 20.0,
            height_m: 3.0,
            num_waveguides: 4,
            pas_per_waveguide: 16,
            rf_chains: 2,
        }
    }
}

/// Evaluation with or without in-waveguide loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossCase {
    /// κ = 0.
    Lossless,
    /// κ as configured.
    Lossy,
}

impl LossCase {
    pub fn label(self) -> &'static str {
        match self {
            LossCase::Lossless => "I",
            LossCase::Lossy => "II",
        }
    }
}

impl SystemParams {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_frequency_hz
    }

    pub fn guided_wavelength(&self) -> f64 {
        self.wavelength() / self.n_eff
    }

    /// Free-space channel-gain constant η = c² / (16 π² f_c²).
    pub fn eta(&self) -> f64 {
        let f = self.carrier_frequency_hz;
        SPEED_OF_LIGHT * SPEED_OF_LIGHT / (16.0 * PI * PI * f * f)
    }

    /// Copy of these parameters with κ set according to `case`.
    pub fn for_case(&self, case: LossCase) -> Self {
        let mut p = self.clone();
        if case == LossCase::Lossless {
            p.kappa_db_per_m = 0.0;
        }
        p
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive and finite, got {v}")))
            }
        };
        positive("carrier_frequency_hz", self.carrier_frequency_hz)?;
        positive("power_w", self.power_w)?;
        positive("noise_w", self.noise_w)?;
        positive("min_spacing_m", self.min_spacing_m)?;
        positive("region_x_m", self.region_x_m)?;
        positive("region_y_m", self.region_y_m)?;
        positive("height_m", self.height_m)?;
        if !(self.n_eff.is_finite() && self.n_eff >= 1.0) {
            return Err(Error::invalid("n_eff", format!("must be >= 1, got {}", self.n_eff)));
        }
        if !(self.kappa_db_per_m.is_finite() && self.kappa_db_per_m >= 0.0) {
            return Err(Error::invalid(
                "kappa_db_per_m",
                format!("must be >= 0, got {}", self.kappa_db_per_m),
            ));
        }
        if self.num_waveguides == 0 {
            return Err(Error::invalid("num_waveguides", "must be at least 1"));
        }
        if self.pas_per_waveguide == 0 || !self.pas_per_waveguide.is_multiple_of(2) {
            return Err(Error::invalid(
                "pas_per_waveguide",
                format!("must be a positive even integer, got {}", self.pas_per_waveguide),
            ));
        }
        if self.rf_chains == 0 {
            return Err(Error::invalid("rf_chains", "must be at least 1"));
        }
        if self.wavelength() >= self.height_m {
            return Err(Error::invalid(
                "height_m",
                format!(
                    "wavelength {} m must be smaller than the waveguide height",
                    self.wavelength()
                ),
            ));
        }
        Ok(())
    }
}

/// Ground-plane user location (z = 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPosition {
    pub x: f64,
    pub y: f64,
}

impl UserPosition {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn center() -> Self {
        Self { x: 0.0, y: 0.0 }
    }

    pub fn is_inside(&self, params: &SystemParams) -> bool {
        self.x.abs() <= params.region_x_m / 2.0 && self.y.abs() <= params.region_y_m / 2.0
    }
}

/// Feed point, lateral offsets and deployment range of the waveguides.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveguideLayout {
    pub feed_x: f64,
    pub x_max: f64,
    pub height: f64,
    pub y: Vec<f64>,
}

impl WaveguideLayout {
    /// Feeds at `-D_x/2`, deployment up to `+D_x/2`, waveguides spread
    /// uniformly across `[-D_y/2, D_y/2]` (a single waveguide sits at y = 0).
    pub fn from_params(params: &SystemParams) -> Self {
        let m = params.num_waveguides;
        let dy = params.region_y_m;
        let y = if m == 1 {
            vec![0.0]
        } else {
            (0..m)
                .map(|i| -dy / 2.0 + i as f64 / (m - 1) as f64 * dy)
                .collect()
        };
        Self {
            feed_x: -params.region_x_m / 2.0,
            x_max: params.region_x_m / 2.0,
            height: params.height_m,
            y,
        }
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    /// Distance from the user to waveguide `m`'s axis in the y–z plane.
    pub fn elevation(&self, m: usize, user: &UserPosition) -> f64 {
        (self.y[m] - user.y).hypot(self.height)
    }

    pub fn elevations(&self, user: &UserPosition) -> Vec<f64> {
        (0..self.len()).map(|m| self.elevation(m, user)).collect()
    }

    /// 3-D location of an antenna at `x` on waveguide `m`.
    pub fn antenna_point(&self, m: usize, x: f64) -> [f64; 3] {
        [x, self.y[m], self.height]
    }
}

/// The pinching beamformer: one row of PA x-coordinates per waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct PinchingConfig {
    pub positions: Vec<Vec<f64>>,
    pub min_spacing: f64,
    pub x_range: (f64, f64),
}

impl PinchingConfig {
    pub fn new(positions: Vec<Vec<f64>>, params: &SystemParams, layout: &WaveguideLayout) -> Self {
        Self {
            positions,
            min_spacing: params.min_spacing_m,
            x_range: (layout.feed_x, layout.x_max),
        }
    }

    /// Checks the deployment range and pairwise spacing of every row.
    pub fn check(&self) -> Result<()> {
        let (lo, hi) = self.x_range;
        for (m, row) in self.positions.iter().enumerate() {
            if let Some(&x) = row.iter().find(|&&x| !(x >= lo && x <= hi)) {
                return Err(Error::Infeasible {
                    waveguide: m,
                    reason: format!("position {x} outside [{lo}, {hi}]"),
                });
            }
            let mut sorted = row.clone();
            sorted.sort_by(f64::total_cmp);
            for pair in sorted.windows(2) {
                if pair[1] - pair[0] < self.min_spacing - SPACING_TOLERANCE_M {
                    return Err(Error::Infeasible {
                        waveguide: m,
                        reason: format!(
                            "antennas at {} and {} closer than {}",
                            pair[0], pair[1], self.min_spacing
                        ),
                    });
                }
            }
        }
        Ok(())
    }
}

/// LoS coefficient `√η · exp(−j 2π r / λ) / r` from an antenna to the user.
pub fn los_coefficient(params: &SystemParams, antenna: [f64; 3], user: &UserPosition) -> Result<Complex64> {
    let dx = antenna[0] - user.x;
    let dy = antenna[1] - user.y;
    let dz = antenna[2];
    let r = (dx * dx + dy * dy + dz * dz).sqrt();
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Domain(format!("antenna-user distance {r} is not positive")));
    }
    Ok(Complex64::from_polar(
        params.eta().sqrt() / r,
        -2.0 * PI / params.wavelength() * r,
    ))
}

/// In-waveguide propagation entries of waveguide `m`:
/// `√α_n · exp(−j 2π/λ_g (x_n − x_0))` with `α_n = 10^(−κ (x_n − x_0)/10) / N`.
pub fn waveguide_vector(
    params: &SystemParams,
    layout: &WaveguideLayout,
    m: usize,
    positions_row: &[f64],
) -> Result<Vec<Complex64>> {
    let n = positions_row.len() as f64;
    let k_g = 2.0 * PI / params.guided_wavelength();
    positions_row
        .iter()
        .map(|&x| {
            let travelled = x - layout.feed_x;
            if travelled.is_nan() || travelled < 0.0 {
                return Err(Error::Infeasible {
                    waveguide: m,
                    reason: format!("position {x} lies before the feed point {}", layout.feed_x),
                });
            }
            let alpha = 10f64.powf(-params.kappa_db_per_m * travelled / 10.0) / n;
            Ok(Complex64::from_polar(alpha.sqrt(), -k_g * travelled))
        })
        .collect()
}

/// Channel vectors `h_m`, in-waveguide vectors `g_m` and their inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub h: Vec<Vec<Complex64>>,
    pub g: Vec<Vec<Complex64>>,
    /// `h_mᵀ g_m`, i.e. the entries of the stacked row `hᵀG`.
    pub inner: Vec<Complex64>,
}

impl EffectiveChannel {
    pub fn num_waveguides(&self) -> usize {
        self.inner.len()
    }

    /// Per-waveguide array gains `|h_mᵀ g_m|`.
    pub fn gains(&self) -> Vec<f64> {
        self.inner.iter().map(|c| c.norm()).collect()
    }

    /// `‖hᵀG‖²`.
    pub fn norm_sqr(&self) -> f64 {
        self.inner.iter().map(|c| c.norm_sqr()).sum()
    }

    /// `hᵀG w` for an M-vector `w`.
    pub fn apply(&self, w: &[Complex64]) -> Complex64 {
        self.inner.iter().zip(w).map(|(a, b)| a * b).sum()
    }
}

pub fn effective_channel(
    params: &SystemParams,
    layout: &WaveguideLayout,
    pinching: &PinchingConfig,
    user: &UserPosition,
) -> Result<EffectiveChannel> {
    pinching.check()?;
    let mut h = Vec::with_capacity(pinching.positions.len());
    let mut g = Vec::with_capacity(pinching.positions.len());
    let mut inner = Vec::with_capacity(pinching.positions.len());
    for (m, row) in pinching.positions.iter().enumerate() {
        let h_m = row
            .iter()
            .map(|&x| los_coefficient(params, layout.antenna_point(m, x), user))
            .collect::<Result<Vec<_>>>()?;
        let g_m = waveguide_vector(params, layout, m, row)?;
        inner.push(h_m.iter().zip(&g_m).map(|(a, b)| a * b).sum());
        h.push(h_m);
        g.push(g_m);
    }
    Ok(EffectiveChannel { h, g, inner })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> SystemParams {
        SystemParams::default()
    }

    #[test]
    fn eta_at_28ghz() {
        // (λ / 4π)² evaluated independently.
        let lambda = 2.997_924_58e8 / 28e9;
        let expected = (lambda / (4.0 * PI)).powi(2);
        assert_relative_eq!(params().eta(), expected, max_relative = 1e-14);
        assert_relative_eq!(params().eta(), 7.2597e-7, max_relative = 1e-4);
    }

    #[test]
    fn los_directly_above_user() {
        let p = params();
        let user = UserPosition::center();
        let h = los_coefficient(&p, [0.0, 0.0, 3.0], &user).unwrap();
        assert_relative_eq!(h.norm(), p.eta().sqrt() / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn los_unit_distance_and_doubling() {
        let p = params();
        let user = UserPosition::center();
        let lambda = p.wavelength();
        let h1 = los_coefficient(&p, [0.0, 0.0, 1.0], &user).unwrap();
        assert_relative_eq!(h1.norm(), p.eta().sqrt(), max_relative = 1e-14);
        let expected_phase = (-2.0 * PI / lambda).rem_euclid(2.0 * PI);
        assert_relative_eq!(h1.arg().rem_euclid(2.0 * PI), expected_phase, epsilon = 1e-9);

        let h2 = los_coefficient(&p, [0.0, 0.0, 2.0], &user).unwrap();
        assert_relative_eq!(h2.norm(), h1.norm() / 2.0, max_relative = 1e-14);
        let dphase = (h2 / h1).arg();
        let expected = (-2.0 * PI / lambda * 1.0 + PI).rem_euclid(2.0 * PI) - PI;
        assert_relative_eq!(dphase, expected, epsilon = 1e-9);
    }

    #[test]
    fn los_rejects_zero_distance() {
        let p = params();
        let err = los_coefficient(&p, [1.0, 2.0, 0.0], &UserPosition::new(1.0, 2.0)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn waveguide_vector_lossless_and_feed() {
        let p = params().for_case(LossCase::Lossless);
        let layout = WaveguideLayout::from_params(&p);
        let row = [layout.feed_x, -3.1, 0.7, 12.0];
        let g = waveguide_vector(&p, &layout, 0, &row).unwrap();
        for entry in &g {
            assert_relative_eq!(entry.norm(), 0.5, max_relative = 1e-14);
        }
        assert_relative_eq!(g[0].re, 0.5);
        assert_eq!(g[0].im, 0.0);
    }

    #[test]
    fn waveguide_vector_lossy_25m() {
        let p = params();
        let layout = WaveguideLayout::from_params(&p);
        let row = [layout.feed_x + 25.0, 0.0, 1.0, 2.0];
        let g = waveguide_vector(&p, &layout, 0, &row).unwrap();
        // (1/4) · 10^(−0.2)
        assert_relative_eq!(g[0].norm_sqr(), 0.157_739_336_1, max_relative = 1e-9);
    }

    #[test]
    fn waveguide_vector_rejects_before_feed() {
        let p = params();
        let layout = WaveguideLayout::from_params(&p);
        let err = waveguide_vector(&p, &layout, 2, &[layout.feed_x - 0.1, 0.0]).unwrap_err();
        assert!(err.is_infeasible());
    }

    #[test]
    fn layout_default_and_single() {
        let layout = WaveguideLayout::from_params(&params());
        assert_eq!(layout.len(), 4);
        assert_relative_eq!(layout.y[0], -10.0);
        assert_relative_eq!(layout.y[1], -10.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(layout.y[3], 10.0);
        assert_eq!(layout.feed_x, -25.0);
        assert_eq!(layout.x_max, 25.0);

        let single = SystemParams {
            num_waveguides: 1,
            ..params()
        };
        assert_eq!(WaveguideLayout::from_params(&single).y, vec![0.0]);
    }

    /// Total path length (free space + guided) seen by the user from `x`.
    fn path_length(p: &SystemParams, layout: &WaveguideLayout, x: f64, user: &UserPosition) -> f64 {
        let r = (x - user.x).hypot(layout.elevation(0, user));
        r + p.n_eff * (x - layout.feed_x)
    }

    /// Bisection for the `x > lo` where the path length equals `target`.
    fn solve_path(p: &SystemParams, layout: &WaveguideLayout, user: &UserPosition, lo: f64, target: f64) -> f64 {
        let (mut a, mut b) = (lo, lo + 0.1);
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if path_length(p, layout, mid, user) < target {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    }

    #[test]
    fn coherent_and_destructive_pairs() {
        let p = SystemParams {
            num_waveguides: 1,
            pas_per_waveguide: 2,
            ..params().for_case(LossCase::Lossless)
        };
        let layout = WaveguideLayout::from_params(&p);
        let user = UserPosition::center();
        let lambda = p.wavelength();
        let x1 = 0.01;
        let base = path_length(&p, &layout, x1, &user);
        let magnitude_sum = |x2: f64| {
            let pin = PinchingConfig::new(vec![vec![x1, x2]], &p, &layout);
            let eff = effective_channel(&p, &layout, &pin, &user).unwrap();
            let terms: Vec<_> = eff.h[0].iter().zip(&eff.g[0]).map(|(a, b)| (a * b).norm()).collect();
            (eff.inner[0].norm(), terms[0], terms[1])
        };

        let aligned = solve_path(&p, &layout, &user, x1 + p.min_spacing_m, base + 2.0 * lambda);
        let (total, a, b) = magnitude_sum(aligned);
        assert_relative_eq!(total, a + b, max_relative = 1e-9);

        let opposed = solve_path(&p, &layout, &user, x1 + p.min_spacing_m, base + 2.5 * lambda);
        let (total, a, b) = magnitude_sum(opposed);
        assert!((total - (a - b).abs()).abs() < 1e-9 * (a + b));
    }

    #[test]
    fn validate_rejects_bad_params() {
        let odd = SystemParams {
            pas_per_waveguide: 3,
            ..params()
        };
        assert!(odd.validate().is_err());
        let low_h = SystemParams {
            height_m: 0.001,
            ..params()
        };
        assert!(low_h.validate().is_err());
        let neff = SystemParams {
            n_eff: 0.9,
            ..params()
        };
        assert!(neff.validate().is_err());
        assert!(params().validate().is_ok());
    }

    #[test]
    fn spacing_check() {
        let p = params();
        let layout = WaveguideLayout::from_params(&p);
        let ok = PinchingConfig::new(vec![vec![0.0, p.min_spacing_m]], &p, &layout);
        assert!(ok.check().is_ok());
        let tight = PinchingConfig::new(vec![vec![0.0, p.min_spacing_m * 0.9]], &p, &layout);
        assert!(tight.check().unwrap_err().is_infeasible());
        let outside = PinchingConfig::new(vec![vec![30.0]], &p, &layout);
        assert!(outside.check().is_err());
    }
}
