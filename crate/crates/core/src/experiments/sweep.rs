//! Parameter sweeps, Monte Carlo averaging and CSV emission.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{ExperimentConfig, ReportMode, UserModel};
use crate::analysis::{snr_bounds, BoundsReport, DeltaMax};
use crate::baseline::{baseline_capacity, FixedArray};
use crate::beamforming::{self, RfMode};
use crate::error::Result;
use crate::model::{effective_channel, LossCase, SystemParams, UserPosition, WaveguideLayout};
use crate::oracle::direct_phase_chain;
use crate::placement::{refine_all, Placement};
use crate::units::linear_to_db;

pub const CSV_SCHEMA: &str = "pass-trihybrid v1";

/// One output row: a (sweep value, mode, case) triple.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityReport {
    pub scenario: String,
    pub sweep_value: f64,
    pub case: LossCase,
    pub mode: ReportMode,
    pub n: usize,
    pub m: usize,
    pub region_x: f64,
    pub min_spacing: f64,
    /// SNR (mean SNR for Monte Carlo rows).
    pub snr: f64,
    /// Capacity (mean capacity for Monte Carlo rows), bits/s/Hz.
    pub capacity_bits: f64,
    pub capacity_std_err: Option<f64>,
    pub bounds: Option<RowBounds>,
    pub delta_max: Option<f64>,
    pub alignment_residual: Option<f64>,
    pub draws: usize,
    pub infeasible_draws: usize,
}

impl CapacityReport {
    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.snr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowBounds {
    pub snr_lower: f64,
    pub snr_upper: f64,
    pub snr_linear: f64,
    pub capacity_lower: f64,
    pub capacity_upper: f64,
}

impl RowBounds {
    fn from_report(report: &BoundsReport, mode: RfMode) -> Self {
        let (snr_lower, snr_upper) = report.snr_bounds(mode);
        let (capacity_lower, capacity_upper) = report.capacity_bounds(mode);
        Self {
            snr_lower,
            snr_upper,
            snr_linear: report.snr_linear(mode),
            capacity_lower,
            capacity_upper,
        }
    }
}

fn baseline_array(config: &ExperimentConfig, params: &SystemParams) -> Result<FixedArray> {
    FixedArray::centered(params, config.baseline_elements.unwrap_or(params.num_waveguides))
}

/// SNRs for every `(case, mode)` pair of the config, in config order.
fn evaluate(
    config: &ExperimentConfig,
    params: &SystemParams,
    layout: &WaveguideLayout,
    array: &FixedArray,
    placement: &Placement,
    user: &UserPosition,
) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(config.cases.len() * config.modes.len());
    for &case in &config.cases {
        let p = params.for_case(case);
        let channel = effective_channel(&p, layout, &placement.config, user)?;
        for &mode in &config.modes {
            let snr = match mode {
                ReportMode::TriHybrid(rf) => beamforming::solve(&channel, &p, rf)?.snr,
                ReportMode::Baseline(rf) => baseline_capacity(&p, array, user, rf)?.snr,
            };
            out.push(snr);
        }
    }
    Ok(out)
}

/// User for Monte Carlo draw `index`: every draw owns a ChaCha stream keyed by
/// its index, so results do not depend on scheduling. The same unit-square
/// sample is scaled to the region at every sweep point.
pub fn draw_user(seed: u64, index: u64, params: &SystemParams) -> UserPosition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    UserPosition::new((u - 0.5) * params.region_x_m, (v - 0.5) * params.region_y_m)
}

fn scenario_label(config: &ExperimentConfig, value: f64) -> String {
    if value.is_nan() {
        "base".to_string()
    } else {
        format!("{}={value}", config.sweep.label())
    }
}

/// Runs every sweep point of `config`.
///
/// Fixed-user points fail on infeasible geometry. Monte Carlo points skip
/// infeasible draws for all modes alike and count them in `infeasible_draws`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<CapacityReport>> {
    config.validate()?;
    let mut rows = Vec::new();
    for (value, params) in config.points()? {
        let layout = WaveguideLayout::from_params(&params);
        let array = baseline_array(config, &params)?;
        let base_row = |case, mode, snr: f64, capacity_bits: f64| CapacityReport {
            scenario: scenario_label(config, value),
            sweep_value: value,
            case,
            mode,
            n: params.pas_per_waveguide,
            m: params.num_waveguides,
            region_x: params.region_x_m,
            min_spacing: params.min_spacing_m,
            snr,
            capacity_bits,
            capacity_std_err: None,
            bounds: None,
            delta_max: None,
            alignment_residual: None,
            draws: 1,
            infeasible_draws: 0,
        };

        match config.user {
            UserModel::Fixed(user) => {
                let placement = refine_all(&params, &layout, &user)?;
                let bounds = snr_bounds(
                    &params,
                    &layout,
                    &user,
                    params.pas_per_waveguide,
                    DeltaMax::Realized(placement.delta_max()),
                )?;
                let snrs = evaluate(config, &params, &layout, &array, &placement, &user)?;
                let mut k = 0;
                for &case in &config.cases {
                    for &mode in &config.modes {
                        let snr = snrs[k];
                        k += 1;
                        let mut row = base_row(case, mode, snr, beamforming::capacity(snr)?);
                        if let ReportMode::TriHybrid(rf) = mode {
                            row.bounds = Some(RowBounds::from_report(&bounds, rf));
                            row.delta_max = Some(placement.delta_max().into_iter().fold(0.0, f64::max));
                            row.alignment_residual = Some(placement.max_alignment_residual());
                        }
                        rows.push(row);
                    }
                }
            }
            UserModel::Uniform => {
                let per_draw: Vec<Option<Vec<f64>>> = (0..config.draws as u64)
                    .into_par_iter()
                    .map(|i| {
                        let user = draw_user(config.seed, i, &params);
                        match refine_all(&params, &layout, &user) {
                            Ok(placement) => evaluate(config, &params, &layout, &array, &placement, &user).map(Some),
                            Err(e) if e.is_infeasible() => Ok(None),
                            Err(e) => Err(e),
                        }
                    })
                    .collect::<Result<_>>()?;
                let feasible: Vec<&Vec<f64>> = per_draw.iter().flatten().collect();
                let count = feasible.len();
                let infeasible = per_draw.len() - count;
                let mut k = 0;
                for &case in &config.cases {
                    for &mode in &config.modes {
                        let (mut snr_sum, mut cap_sum, mut cap_sq) = (0.0, 0.0, 0.0);
                        for draw in &feasible {
                            let c = beamforming::capacity(draw[k])?;
                            snr_sum += draw[k];
                            cap_sum += c;
                            cap_sq += c * c;
                        }
                        k += 1;
                        let denom = count.max(1) as f64;
                        let mean = cap_sum / denom;
                        let var = if count > 1 {
                            ((cap_sq - denom * mean * mean) / (denom - 1.0)).max(0.0)
                        } else {
                            0.0
                        };
                        let mut row = base_row(case, mode, snr_sum / denom, mean);
                        row.capacity_std_err = Some((var / denom).sqrt());
                        row.draws = count;
                        row.infeasible_draws = infeasible;
                        if count == 0 {
                            row.snr = f64::NAN;
                            row.capacity_bits = f64::NAN;
                        }
                        rows.push(row);
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

pub fn csv_header_line(config: &ExperimentConfig) -> String {
    format!("# {CSV_SCHEMA}, {}\n", config.hash())
}

/// CSV with the schema comment line, a header and one line per row.
pub fn to_csv(config: &ExperimentConfig, rows: &[CapacityReport]) -> String {
    let mut s = csv_header_line(config);
    s.push_str(
        "scenario,sweep,sweep_value,case,mode,N,M,D_x_m,delta_min_m,snr_linear,snr_db,capacity_bps_hz,\
capacity_std_err,snr_lower,snr_upper,snr_linear_law,capacity_lower,capacity_upper,delta_max_m,\
alignment_residual_m,draws,infeasible_draws\n",
    );
    for r in rows {
        let b = r.bounds;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scenario,
            config.sweep.label(),
            if r.sweep_value.is_nan() { String::new() } else { format!("{}", r.sweep_value) },
            r.case.label(),
            r.mode.label(),
            r.n,
            r.m,
            r.region_x,
            r.min_spacing,
            r.snr,
            r.snr_db(),
            r.capacity_bits,
            opt(r.capacity_std_err),
            opt(b.map(|b| b.snr_lower)),
            opt(b.map(|b| b.snr_upper)),
            opt(b.map(|b| b.snr_linear)),
            opt(b.map(|b| b.capacity_lower)),
            opt(b.map(|b| b.capacity_upper)),
            opt(r.delta_max),
            opt(r.alignment_residual),
            r.draws,
            r.infeasible_draws,
        );
    }
    s
}

/// Per-antenna positions and shifts for `user` at the base parameters.
pub fn dump_placement(config: &ExperimentConfig, user: &UserPosition) -> Result<String> {
    let params = &config.params;
    let layout = WaveguideLayout::from_params(params);
    let placement = refine_all(params, &layout, user)?;
    let mut s = csv_header_line(config);
    s.push_str("waveguide,index,side,x_m,shift_m,delta_max_m,alignment_residual_m,chain_residual_m\n");
    for r in &placement.waveguides {
        let chain = direct_phase_chain(&r.positions, user, &layout, r.waveguide, params);
        for (i, (&x, &v)) in r.positions.iter().zip(&r.shifts).enumerate() {
            let side = if i < r.left_count { "left" } else { "right" };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.waveguide, i, side, x, v, r.delta_max, r.alignment_residual, chain
            );
        }
    }
    Ok(s)
}

/// Analytical bounds only (surrogate `Δ_max`) at every sweep point.
pub fn bounds_table(config: &ExperimentConfig) -> Result<String> {
    config.validate()?;
    let user = match config.user {
        UserModel::Fixed(u) => u,
        UserModel::Uniform => UserPosition::center(),
    };
    let mut s = csv_header_line(config);
    s.push_str(
        "scenario,mode,N,M,delta_min_m,delta_max_surrogate_m,snr_lower,snr_upper,snr_linear_law,\
capacity_lower,capacity_upper,snr_lower_per_waveguide_power,snr_upper_per_waveguide_power,linear_regime\n",
    );
    for (value, params) in config.points()? {
        let layout = WaveguideLayout::from_params(&params);
        let report = snr_bounds(&params, &layout, &user, params.pas_per_waveguide, DeltaMax::Surrogate)?;
        for mode in [RfMode::Single, RfMode::Multi] {
            let (lo, hi) = report.snr_bounds(mode);
            let (clo, chi) = report.capacity_bounds(mode);
            let (plo, phi) = match mode {
                RfMode::Single => (String::new(), String::new()),
                RfMode::Multi => (
                    format!("{}", report.snr2_lower_per_waveguide_power),
                    format!("{}", report.snr2_upper_per_waveguide_power),
                ),
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
                scenario_label(config, value),
                mode.label(),
                params.pas_per_waveguide,
                params.num_waveguides,
                params.min_spacing_m,
                report.delta_max[0],
                lo,
                hi,
                report.snr_linear(mode),
                clo,
                chi,
                plo,
                phi,
                report.linear_regime
            );
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_uniform() -> ExperimentConfig {
        ExperimentConfig::parse("user = uniform\ndraws = 200\nsweep = D_x\nsweep_values = 10, 40\npas_per_waveguide = 8\n").unwrap()
    }

    #[test]
    fn draws_are_inside_region_and_keyed_by_index() {
        let p = SystemParams::default();
        let a = draw_user(1, 5, &p);
        assert_eq!(a, draw_user(1, 5, &p));
        assert_ne!(a, draw_user(1, 6, &p));
        assert_ne!(a, draw_user(2, 5, &p));
        for i in 0..1000 {
            assert!(draw_user(9, i, &p).is_inside(&p));
        }
    }

    #[test]
    fn fixed_user_rows() {
        let cfg = ExperimentConfig::parse("sweep = N\nsweep_values = 2, 8\n").unwrap();
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 2 * 2 * 4);
        for r in &rows {
            assert!(r.snr > 0.0);
            assert!((r.snr_db() - 10.0 * r.snr.log10()).abs() < 1e-12);
            match r.mode {
                ReportMode::TriHybrid(_) => {
                    let b = r.bounds.unwrap();
                    if r.case == LossCase::Lossless {
                        assert!(b.snr_lower <= r.snr && r.snr <= b.snr_upper, "{r:?}");
                    }
                    assert!(r.alignment_residual.unwrap() < 1e-8);
                }
                ReportMode::Baseline(_) => assert!(r.bounds.is_none()),
            }
        }
    }

    #[test]
    fn csv_is_deterministic() {
        let cfg = small_uniform();
        let a = to_csv(&cfg, &run_sweep(&cfg).unwrap());
        let b = to_csv(&cfg, &run_sweep(&cfg).unwrap());
        assert_eq!(a, b);
        assert!(a.starts_with(&format!("# pass-trihybrid v1, {}\n", cfg.hash())));
        let columns = a.lines().nth(1).unwrap().split(',').count();
        assert!(a.lines().skip(2).all(|l| l.split(',').count() == columns));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let cfg = small_uniform();
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = serial.install(|| run_sweep(&cfg)).unwrap();
        let b = wide.install(|| run_sweep(&cfg)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn infeasible_draws_are_counted() {
        let cfg = ExperimentConfig::parse(
            "user = uniform\ndraws = 50\nregion_x_m = 0.2\npas_per_waveguide = 64\nmodes = single\n",
        )
        .unwrap();
        let rows = run_sweep(&cfg).unwrap();
        for r in &rows {
            assert_eq!(r.draws + r.infeasible_draws, 50);
            assert!(r.infeasible_draws > 0);
        }
    }

    #[test]
    fn fixed_user_infeasible_is_an_error() {
        let cfg = ExperimentConfig::parse("region_x_m = 0.2\npas_per_waveguide = 64\n").unwrap();
        assert!(run_sweep(&cfg).unwrap_err().is_infeasible());
    }

    #[test]
    fn placement_dump_layout() {
        let cfg = ExperimentConfig::parse("pas_per_waveguide = 2\n").unwrap();
        let csv = dump_placement(&cfg, &UserPosition::center()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2 + 4 * 2);
        for l in &lines[2..] {
            let f: Vec<&str> = l.split(',').collect();
            let residual: f64 = f[7].parse().unwrap();
            assert!(residual < 1e-6 * cfg.params.wavelength());
        }
    }

    #[test]
    fn bounds_table_rows() {
        let cfg = ExperimentConfig::parse("sweep = N\nsweep_values = 2,4,8\n").unwrap();
        let t = bounds_table(&cfg).unwrap();
        assert_eq!(t.lines().count(), 2 + 3 * 2);
    }
}
