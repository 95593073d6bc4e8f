//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment. Powers are given in dBm,
//! the carrier in GHz, the waveguide loss in dB/m; everything is converted to
//! SI on load. Unknown keys are rejected.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::beamforming::RfMode;
use crate::error::{Error, Result};
use crate::model::{LossCase, SystemParams, UserPosition};
use crate::units::{dbm_to_watts, watts_to_dbm};

pub const DEFAULT_DRAWS: usize = 10_000;
pub const DEFAULT_SEED: u64 = 424_242;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Antennas per waveguide.
    Antennas,
    /// Region side length along x, meters.
    RegionX,
    /// Number of waveguides.
    Waveguides,
    /// Minimum antenna spacing, in wavelengths.
    MinSpacing,
}

impl SweepVariable {
    pub fn label(self) -> &'static str {
        match self {
            SweepVariable::Antennas => "N",
            SweepVariable::RegionX => "D_x",
            SweepVariable::Waveguides => "M",
            SweepVariable::MinSpacing => "delta_min",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "N" | "n" => Some(SweepVariable::Antennas),
            "D_x" | "d_x" | "region_x" => Some(SweepVariable::RegionX),
            "M" | "m" => Some(SweepVariable::Waveguides),
            "delta_min" => Some(SweepVariable::MinSpacing),
            _ => None,
        }
    }

    /// `params` with this variable set to `value`.
    pub fn apply(self, params: &SystemParams, value: f64) -> Result<SystemParams> {
        let mut p = params.clone();
        let as_count = |name: &'static str| {
            if value >= 1.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(Error::invalid(name, format!("sweep value {value} is not a positive integer")))
            }
        };
        match self {
            SweepVariable::Antennas => p.pas_per_waveguide = as_count("pas_per_waveguide")?,
            SweepVariable::Waveguides => p.num_waveguides = as_count("num_waveguides")?,
            SweepVariable::RegionX => p.region_x_m = value,
            SweepVariable::MinSpacing => p.min_spacing_m = value * params.wavelength(),
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UserModel {
    Fixed(UserPosition),
    /// Uniform over the service region, one draw per Monte Carlo sample.
    Uniform,
}

/// One output column family of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReportMode {
    TriHybrid(RfMode),
    Baseline(RfMode),
}

impl ReportMode {
    pub const ALL: [ReportMode; 4] = [
        ReportMode::TriHybrid(RfMode::Single),
        ReportMode::TriHybrid(RfMode::Multi),
        ReportMode::Baseline(RfMode::Single),
        ReportMode::Baseline(RfMode::Multi),
    ];

    pub fn label(self) -> &'static str {
        match self {
            ReportMode::TriHybrid(RfMode::Single) => "single_rf",
            ReportMode::TriHybrid(RfMode::Multi) => "multi_rf",
            ReportMode::Baseline(RfMode::Single) => "baseline_single_rf",
            ReportMode::Baseline(RfMode::Multi) => "baseline_multi_rf",
        }
    }

    /// Expands `single`, `multi`, `baseline` or `all`.
    pub fn parse_set(s: &str) -> Option<Vec<ReportMode>> {
        match s {
            "single" | "single_rf" => Some(vec![ReportMode::TriHybrid(RfMode::Single)]),
            "multi" | "multi_rf" => Some(vec![ReportMode::TriHybrid(RfMode::Multi)]),
            "baseline" => Some(vec![ReportMode::Baseline(RfMode::Single), ReportMode::Baseline(RfMode::Multi)]),
            "baseline_single_rf" => Some(vec![ReportMode::Baseline(RfMode::Single)]),
            "baseline_multi_rf" => Some(vec![ReportMode::Baseline(RfMode::Multi)]),
            "all" => Some(ReportMode::ALL.to_vec()),
            _ => None,
        }
    }
}

pub fn parse_case(s: &str) -> Option<Vec<LossCase>> {
    match s {
        "1" | "I" => Some(vec![LossCase::Lossless]),
        "2" | "II" => Some(vec![LossCase::Lossy]),
        "both" => Some(vec![LossCase::Lossless, LossCase::Lossy]),
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: SystemParams,
    pub sweep: SweepVariable,
    /// Empty means a single point at `params`.
    pub sweep_values: Vec<f64>,
    pub user: UserModel,
    pub draws: usize,
    pub seed: u64,
    pub cases: Vec<LossCase>,
    pub modes: Vec<ReportMode>,
    /// Fixed-array element count; `None` uses one element per waveguide.
    pub baseline_elements: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            sweep: SweepVariable::Antennas,
            sweep_values: Vec::new(),
            user: UserModel::Fixed(UserPosition::center()),
            draws: DEFAULT_DRAWS,
            seed: DEFAULT_SEED,
            cases: vec![LossCase::Lossless, LossCase::Lossy],
            modes: ReportMode::ALL.to_vec(),
            baseline_elements: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config {
            line: 0,
            message: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut spacing_m = None;
        let mut spacing_wavelengths = None;
        let (mut user_x, mut user_y, mut user_kind) = (0.0, 0.0, "fixed".to_string());

        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config { line, message };
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| err(format!("expected `key = value`, got `{content}`")))?;
            let num = || {
                value
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{key}` expects a number, got `{value}`")))
            };
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|_| err(format!("`{key}` expects a non-negative integer, got `{value}`")))
            };
            let p = &mut cfg.params;
            match key {
                "carrier_frequency_ghz" => p.carrier_frequency_hz = num()? * 1e9,
                "n_eff" => p.n_eff = num()?,
                "kappa_db_per_m" => p.kappa_db_per_m = num()?,
                "power_dbm" => p.power_w = dbm_to_watts(num()?),
                "noise_dbm" => p.noise_w = dbm_to_watts(num()?),
                "min_spacing_m" => spacing_m = Some(num()?),
                "min_spacing_wavelengths" => spacing_wavelengths = Some(num()?),
                "region_x_m" => p.region_x_m = num()?,
                "region_y_m" => p.region_y_m = num()?,
                "height_m" => p.height_m = num()?,
                "waveguides" => p.num_waveguides = count()?,
                "pas_per_waveguide" => p.pas_per_waveguide = count()?,
                "rf_chains" => p.rf_chains = count()?,
                "sweep" => {
                    cfg.sweep = SweepVariable::parse(value)
                        .ok_or_else(|| err(format!("unknown sweep variable `{value}` (N, D_x, M, delta_min)")))?
                }
                "sweep_values" => {
                    cfg.sweep_values = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| {
                            s.parse::<f64>()
                                .ok()
                                .filter(|v| v.is_finite() && *v > 0.0)
                                .ok_or_else(|| err(format!("sweep value `{s}` is not a positive number")))
                        })
                        .collect::<Result<_>>()?
                }
                "user" => {
                    if value != "fixed" && value != "uniform" {
                        return Err(err(format!("`user` must be fixed or uniform, got `{value}`")));
                    }
                    user_kind = value.to_string();
                }
                "user_x" => user_x = num()?,
                "user_y" => user_y = num()?,
                "draws" => cfg.draws = count()?,
                "seed" => {
                    cfg.seed = value
                        .parse()
                        .map_err(|_| err(format!("`seed` expects a 64-bit unsigned integer, got `{value}`")))?
                }
                "case" => {
                    cfg.cases =
                        parse_case(value).ok_or_else(|| err(format!("`case` must be 1, 2 or both, got `{value}`")))?
                }
                "modes" => {
                    let mut modes = Vec::new();
                    for part in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                        for mode in ReportMode::parse_set(part)
                            .ok_or_else(|| err(format!("unknown mode `{part}`")))?
                        {
                            if !modes.contains(&mode) {
                                modes.push(mode);
                            }
                        }
                    }
                    cfg.modes = modes;
                }
                "baseline_elements" => cfg.baseline_elements = Some(count()?),
                _ => return Err(err(format!("unknown key `{key}`"))),
            }
        }

        match (spacing_m, spacing_wavelengths) {
            (Some(_), Some(_)) => {
                return Err(Error::Config {
                    line: 0,
                    message: "give only one of min_spacing_m and min_spacing_wavelengths".into(),
                })
            }
            (Some(m), None) => cfg.params.min_spacing_m = m,
            (None, Some(w)) => cfg.params.min_spacing_m = w * cfg.params.wavelength(),
            // the default is λ/2 of the default carrier; follow a changed carrier
            (None, None) => cfg.params.min_spacing_m = cfg.params.wavelength() / 2.0,
        }
        cfg.user = if user_kind == "uniform" {
            UserModel::Uniform
        } else {
            UserModel::Fixed(UserPosition::new(user_x, user_y))
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let config_err = |message: String| Error::Config { line: 0, message };
        self.params
            .validate()
            .map_err(|e| config_err(e.to_string()))?;
        for &v in &self.sweep_values {
            self.sweep.apply(&self.params, v).map_err(|e| config_err(e.to_string()))?;
        }
        if self.draws == 0 {
            return Err(config_err("draws must be positive".into()));
        }
        if self.cases.is_empty() {
            return Err(config_err("no loss case selected".into()));
        }
        if self.modes.is_empty() {
            return Err(config_err("no mode selected".into()));
        }
        if self.baseline_elements == Some(0) {
            return Err(config_err("baseline_elements must be positive".into()));
        }
        if let UserModel::Fixed(u) = self.user {
            if !u.is_inside(&self.params) {
                return Err(config_err(format!("user ({}, {}) lies outside the region", u.x, u.y)));
            }
        }
        Ok(())
    }

    /// Sweep points as `(value, params)`; a single `(NaN, params)` without a sweep.
    pub fn points(&self) -> Result<Vec<(f64, SystemParams)>> {
        if self.sweep_values.is_empty() {
            return Ok(vec![(f64::NAN, self.params.clone())]);
        }
        self.sweep_values
            .iter()
            .map(|&v| Ok((v, self.sweep.apply(&self.params, v)?)))
            .collect()
    }

    /// Canonical `key = value` listing of the resolved configuration.
    pub fn canonical(&self) -> String {
        let p = &self.params;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("carrier_frequency_ghz", format!("{:?}", p.carrier_frequency_hz / 1e9));
        put("n_eff", format!("{:?}", p.n_eff));
        put("kappa_db_per_m", format!("{:?}", p.kappa_db_per_m));
        put("power_dbm", format!("{:?}", watts_to_dbm(p.power_w)));
        put("noise_dbm", format!("{:?}", watts_to_dbm(p.noise_w)));
        put("min_spacing_m", format!("{:?}", p.min_spacing_m));
        put("region_x_m", format!("{:?}", p.region_x_m));
        put("region_y_m", format!("{:?}", p.region_y_m));
        put("height_m", format!("{:?}", p.height_m));
        put("waveguides", p.num_waveguides.to_string());
        put("pas_per_waveguide", p.pas_per_waveguide.to_string());
        put("rf_chains", p.rf_chains.to_string());
        put("sweep", self.sweep.label().to_string());
        put(
            "sweep_values",
            self.sweep_values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(","),
        );
        match self.user {
            UserModel::Fixed(u) => {
                put("user", "fixed".into());
                put("user_x", format!("{:?}", u.x));
                put("user_y", format!("{:?}", u.y));
            }
            UserModel::Uniform => put("user", "uniform".into()),
        }
        put("draws", self.draws.to_string());
        put("seed", self.seed.to_string());
        let case = match self.cases.as_slice() {
            [LossCase::Lossless] => "1",
            [LossCase::Lossy] => "2",
            _ => "both",
        };
        put("case", case.into());
        put(
            "modes",
            self.modes.iter().map(|m| m.label()).collect::<Vec<_>>().join(","),
        );
        if let Some(k) = self.baseline_elements {
            put("baseline_elements", k.to_string());
        }
        s
    }

    /// First 16 hex digits of the SHA-256 of [`Self::canonical`].
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical().as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
