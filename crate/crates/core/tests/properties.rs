use num_complex::Complex64;
use proptest::prelude::*;
use trihybrid::beamforming::{multi_rf_solution, single_rf_solution};
use trihybrid::experiments::{run_sweep, ExperimentConfig};
use trihybrid::model::{
    effective_channel, los_coefficient, waveguide_vector, LossCase, SystemParams, UserPosition, WaveguideLayout,
};
use trihybrid::placement::{path_excess, refine_all, refine_shift, Side};

fn scenario() -> impl Strategy<Value = (SystemParams, UserPosition)> {
    (1usize..=6, 1usize..=16, 10.0..80.0f64, 4.0..30.0f64, 2.0..8.0f64, 0.0..0.2f64, -0.5..0.5f64, -0.5..0.5f64)
        .prop_map(|(m, half_n, dx, dy, h, kappa, ux, uy)| {
            let p = SystemParams {
                num_waveguides: m,
                pas_per_waveguide: 2 * half_n,
                region_x_m: dx,
                region_y_m: dy,
                height_m: h,
                kappa_db_per_m: kappa,
                ..SystemParams::default()
            };
            let u = UserPosition::new(ux * dx, uy * dy);
            (p, u)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn los_magnitude_is_inverse_distance(x in -25.0..25.0f64, y in -10.0..10.0f64, ux in -25.0..25.0f64, uy in -10.0..10.0f64) {
        let p = SystemParams::default();
        let user = UserPosition::new(ux, uy);
        let h = los_coefficient(&p, [x, y, p.height_m], &user).unwrap();
        let r = ((x - ux).powi(2) + (y - uy).powi(2) + p.height_m.powi(2)).sqrt();
        prop_assert!((h.norm() - p.eta().sqrt() / r).abs() <= 1e-12 * h.norm());
    }

    #[test]
    fn lossless_waveguide_conserves_power(half_n in 1usize..=32, offsets in prop::collection::vec(0.0..50.0f64, 64)) {
        let n = 2 * half_n;
        let p = SystemParams { pas_per_waveguide: n, ..SystemParams::default().for_case(LossCase::Lossless) };
        let layout = WaveguideLayout::from_params(&p);
        let row: Vec<f64> = offsets[..n].iter().map(|o| layout.feed_x + o).collect();
        let g = waveguide_vector(&p, &layout, 0, &row).unwrap();
        let total: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lossy_waveguide_attenuates_with_distance(kappa in 0.01..0.5f64, a in 0.0..50.0f64, b in 0.0..50.0f64) {
        let p = SystemParams { pas_per_waveguide: 2, kappa_db_per_m: kappa, ..SystemParams::default() };
        let layout = WaveguideLayout::from_params(&p);
        let (near, far) = (a.min(b), a.max(b));
        let g = waveguide_vector(&p, &layout, 0, &[layout.feed_x + near, layout.feed_x + far]).unwrap();
        let total: f64 = g.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!(total <= 1.0 + 1e-12);
        prop_assert!(g[1].norm() <= g[0].norm());
        if far > near + 1e-6 {
            prop_assert!(g[1].norm() < g[0].norm());
        }
    }

    #[test]
    fn effective_channel_matches_dense_block_diagonal((p, user) in scenario()) {
        let layout = WaveguideLayout::from_params(&p);
        let Ok(placement) = refine_all(&p, &layout, &user) else { return Ok(()); };
        let eff = effective_channel(&p, &layout, &placement.config, &user).unwrap();
        let (m, n) = (p.num_waveguides, p.pas_per_waveguide);
        // stacked h (length MN) times block-diagonal G (MN × M)
        let h: Vec<Complex64> = eff.h.iter().flatten().copied().collect();
        for col in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for (row, hv) in h.iter().enumerate() {
                let g = if row / n == col { eff.g[col][row % n] } else { Complex64::new(0.0, 0.0) };
                acc += hv * g;
            }
            prop_assert!((acc - eff.inner[col]).norm() <= 1e-12 * (1.0 + acc.norm()));
        }
    }

    #[test]
    fn refined_shift_lands_on_next_lattice_point(h in 2.0..12.0f64, delta in 0.0..5.0f64, n_eff in 1.0..2.0f64) {
        let lambda = SystemParams::default().wavelength();
        let v = refine_shift(h, delta, n_eff, lambda).unwrap();
        prop_assert!(v >= 0.0);
        let before = path_excess(h, delta, n_eff, Side::Right) / lambda;
        let after = path_excess(h, delta + v, n_eff, Side::Right) / lambda;
        prop_assert!((after - after.round()).abs() < 1e-9);
        prop_assert!(after.round() <= before.ceil() + 1e-9);
    }

    #[test]
    fn single_rf_never_beats_multi_rf((p, user) in scenario()) {
        let layout = WaveguideLayout::from_params(&p);
        let Ok(placement) = refine_all(&p, &layout, &user) else { return Ok(()); };
        for case in [LossCase::Lossless, LossCase::Lossy] {
            let pc = p.for_case(case);
            let eff = effective_channel(&pc, &layout, &placement.config, &user).unwrap();
            let s1 = single_rf_solution(&eff, &pc).snr;
            let s2 = multi_rf_solution(&eff, &pc).unwrap().snr;
            prop_assert!(s1 <= s2 * (1.0 + 1e-12));
        }
    }
}

fn uniform_capacity(draws: usize) -> (f64, f64) {
    let cfg = ExperimentConfig::parse(&format!("user = uniform\ndraws = {draws}\ncase = 1\nmodes = multi\nseed = 11\n")).unwrap();
    let row = &run_sweep(&cfg).unwrap()[0];
    (row.capacity_bits, row.capacity_std_err.unwrap())
}

#[test]
fn monte_carlo_mean_is_stable_under_doubling() {
    let (a, _) = uniform_capacity(2000);
    let (b, se) = uniform_capacity(4000);
    assert!((a - b).abs() < 3.0 * se, "{a} vs {b}, se {se}");
}

#[test]
fn monte_carlo_is_reproducible() {
    assert_eq!(uniform_capacity(500), uniform_capacity(500));
}
