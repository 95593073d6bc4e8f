//! Fast invariant checks exposed through the CLI.

use crate::analysis::{snr_bounds, DeltaMax};
use crate::beamforming::{multi_rf_solution, single_rf_solution};
use crate::error::Result;
use crate::model::{effective_channel, LossCase, SystemParams, UserPosition, WaveguideLayout};
use crate::oracle::direct_phase_chain;
use crate::placement::refine_all;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

/// Runs the suite on `base` with a handful of user positions.
pub fn run(base: &SystemParams) -> Result<Vec<Check>> {
    base.validate()?;
    let layout = WaveguideLayout::from_params(base);
    let lambda = base.wavelength();
    let users = [
        UserPosition::center(),
        UserPosition::new(base.region_x_m / 5.0, -base.region_y_m / 4.0),
        UserPosition::new(-base.region_x_m / 3.0, base.region_y_m / 3.0),
    ];

    let mut worst_chain = 0.0_f64;
    let mut ordering = true;
    let mut loss_ordering = true;
    let mut modulus = 0.0_f64;
    let mut power = 0.0_f64;
    let mut sandwich = true;
    for user in &users {
        let placement = refine_all(base, &layout, user)?;
        for r in &placement.waveguides {
            worst_chain = worst_chain.max(direct_phase_chain(&r.positions, user, &layout, r.waveguide, base));
        }
        let mut snr2_by_case = Vec::new();
        for case in [LossCase::Lossless, LossCase::Lossy] {
            let p = base.for_case(case);
            let eff = effective_channel(&p, &layout, &placement.config, user)?;
            let s1 = single_rf_solution(&eff, &p);
            let s2 = multi_rf_solution(&eff, &p)?;
            ordering &= s1.snr <= s2.snr * (1.0 + 1e-12);
            for s in [&s1, &s2] {
                for row in &s.analog {
                    for z in row {
                        modulus = modulus.max((z.norm() - 1.0).abs());
                    }
                }
            }
            power = power.max((s2.transmit_power() - p.power_w).abs() / p.power_w);
            if case == LossCase::Lossless {
                let b = snr_bounds(&p, &layout, user, p.pas_per_waveguide, DeltaMax::Realized(placement.delta_max()))?;
                for (s, mode) in [(&s1, s1.mode), (&s2, s2.mode)] {
                    let (lo, hi) = b.snr_bounds(mode);
                    sandwich &= lo <= s.snr * (1.0 + 1e-9) && s.snr <= hi * (1.0 + 1e-9);
                }
            }
            snr2_by_case.push(s2.snr);
        }
        loss_ordering &= snr2_by_case[1] <= snr2_by_case[0] * (1.0 + 1e-12);
    }

    Ok(vec![
        check(
            "phase alignment",
            worst_chain < 1e-6 * lambda,
            format!("max residual {:.3e} wavelengths", worst_chain / lambda),
        ),
        check("single RF <= multi RF", ordering, String::new()),
        check("lossy <= lossless", loss_ordering, String::new()),
        check("unit-modulus analog", modulus < 1e-12, format!("max deviation {modulus:.3e}")),
        check("transmit power", power < 1e-9, format!("max relative error {power:.3e}")),
        check("bounds sandwich (lossless)", sandwich, String::new()),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_parameters_pass() {
        let checks = run(&SystemParams::default()).unwrap();
        assert_eq!(checks.len(), 6);
        for c in checks {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
