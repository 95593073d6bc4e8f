//! Brute-force verifiers for the placement algorithm.
//!
//! Nothing here uses the refinement recursion or the closed-form bounds: the
//! grid search enumerates positions and sums channel terms, and the phase
//! chain is recomputed from raw coordinates.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{los_coefficient, waveguide_vector, SystemParams, UserPosition, WaveguideLayout};

#[derive(Debug, Clone, PartialEq)]
pub struct GridOptimum {
    pub gain: f64,
    pub positions: Vec<f64>,
    pub evaluated: u64,
}

struct Search<'a> {
    terms: &'a [Complex64],
    min_step: usize,
}

impl Search<'_> {
    /// Best `|partial + Σ chosen terms|²` choosing `remaining` more indices from `start`.
    fn best(&self, start: usize, remaining: usize, partial: Complex64, chosen: &mut Vec<usize>) -> (f64, Vec<usize>, u64) {
        let len = self.terms.len();
        let mut best = (f64::NEG_INFINITY, Vec::new(), 0u64);
        if remaining == 1 {
            let mut arg = usize::MAX;
            let mut value = f64::NEG_INFINITY;
            for j in start..len {
                let v = (partial + self.terms[j]).norm_sqr();
                if v > value {
                    value = v;
                    arg = j;
                }
            }
            if arg != usize::MAX {
                chosen.push(arg);
                best = (value, chosen.clone(), (len - start) as u64);
                chosen.pop();
            }
            return best;
        }
        let tail = (remaining - 1) * self.min_step;
        let mut evaluated = 0;
        for j in start..len.saturating_sub(tail) {
            chosen.push(j);
            let sub = self.best(j + self.min_step, remaining - 1, partial + self.terms[j], chosen);
            chosen.pop();
            evaluated += sub.2;
            if sub.0 > best.0 {
                best = (sub.0, sub.1, 0);
            }
        }
        best.2 = evaluated;
        best
    }
}

/// Exhaustive search for the best `n`-antenna placement on waveguide `m`
/// over a grid of step `resolution` anchored at the user's x-coordinate,
/// restricted to `[x_u − 2nΔ_min, x_u + 2nΔ_min] ∩ [x_0, x_max]`.
pub fn grid_search_gain(
    params: &SystemParams,
    layout: &WaveguideLayout,
    m: usize,
    user: &UserPosition,
    n: usize,
    resolution: f64,
) -> Result<GridOptimum> {
    if !(n == 2 || n == 4) {
        return Err(Error::invalid("n", format!("grid search supports 2 or 4 antennas, got {n}")));
    }
    let lambda = params.wavelength();
    if !(resolution > 0.0 && resolution <= lambda / 32.0 * (1.0 + 1e-12)) {
        return Err(Error::invalid("resolution", format!("must be in (0, λ/32], got {resolution}")));
    }
    let spacing = params.min_spacing_m;
    let half_width = 2.0 * n as f64 * spacing;
    let lo = (user.x - half_width).max(layout.feed_x);
    let hi = (user.x + half_width).min(layout.x_max);
    let k_lo = ((lo - user.x) / resolution).ceil() as i64;
    let k_hi = ((hi - user.x) / resolution).floor() as i64;
    let grid: Vec<f64> = (k_lo..=k_hi).map(|k| user.x + k as f64 * resolution).collect();

    let min_step = (1..)
        .find(|&s| s as f64 * resolution >= spacing - 1e-12)
        .expect("spacing is finite");
    if grid.is_empty() || (grid.len() - 1) < (n - 1) * min_step {
        return Err(Error::Infeasible {
            waveguide: m,
            reason: format!("search window [{lo}, {hi}] cannot hold {n} antennas"),
        });
    }

    let scale = 1.0 / (n as f64).sqrt();
    let terms = grid
        .iter()
        .map(|&x| {
            let h = los_coefficient(params, layout.antenna_point(m, x), user)?;
            let g = waveguide_vector(params, layout, m, &[x])?[0];
            Ok(h * g * scale)
        })
        .collect::<Result<Vec<_>>>()?;

    let search = Search {
        terms: &terms,
        min_step,
    };
    let tail = (n - 1) * min_step;
    let (value, idx, evaluated) = (0..terms.len() - tail)
        .into_par_iter()
        .map(|first| {
            let mut chosen = vec![first];
            search.best(first + min_step, n - 1, terms[first], &mut chosen)
        })
        .reduce(
            || (f64::NEG_INFINITY, Vec::new(), 0),
            |a, b| {
                let evaluated = a.2 + b.2;
                // ties resolve to the lower index tuple for determinism
                let keep_a = a.0 > b.0 || (a.0 == b.0 && a.1 <= b.1);
                if keep_a {
                    (a.0, a.1, evaluated)
                } else {
                    (b.0, b.1, evaluated)
                }
            },
        );
    Ok(GridOptimum {
        gain: value.sqrt(),
        positions: idx.iter().map(|&i| grid[i]).collect(),
        evaluated,
    })
}

/// Largest circular deviation, in meters, of `(r_n + n_eff·x_n) mod λ` from
/// that of the first antenna, recomputed from 3-D coordinates.
pub fn direct_phase_chain(
    positions: &[f64],
    user: &UserPosition,
    layout: &WaveguideLayout,
    m: usize,
    params: &SystemParams,
) -> f64 {
    let lambda = params.wavelength();
    let residue = |x: f64| {
        let [ax, ay, az] = layout.antenna_point(m, x);
        let (dx, dy) = (ax - user.x, ay - user.y);
        let r = (dx * dx + dy * dy + az * az).sqrt();
        // reduce each term separately to keep the sum small
        (r.rem_euclid(lambda) + (params.n_eff * x).rem_euclid(lambda)).rem_euclid(lambda)
    };
    let Some(&first) = positions.first() else {
        return 0.0;
    };
    let reference = residue(first);
    positions
        .iter()
        .map(|&x| {
            let d = (residue(x) - reference).rem_euclid(lambda);
            d.min(lambda - d)
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LossCase;
    use crate::placement::refine_all;

    fn single(n: usize) -> SystemParams {
        SystemParams {
            num_waveguides: 1,
            pas_per_waveguide: n,
            ..SystemParams::default().for_case(LossCase::Lossless)
        }
    }

    #[test]
    fn n2_optimum_is_nearly_symmetric() {
        let p = single(2);
        let layout = WaveguideLayout::from_params(&p);
        let user = UserPosition::center();
        let res = p.wavelength() / 64.0;
        let best = grid_search_gain(&p, &layout, 0, &user, 2, res).unwrap();
        assert_eq!(best.positions.len(), 2);
        let (a, b) = (best.positions[0], best.positions[1]);
        assert!(a < 0.0 && b > 0.0);
        // asymmetry bounded by the in-waveguide phase step plus grid resolution
        assert!((a + b).abs() <= p.wavelength() + res);
    }

    #[test]
    fn finer_grid_never_worse() {
        let p = single(2);
        let layout = WaveguideLayout::from_params(&p);
        let user = UserPosition::new(0.3, 0.0);
        let coarse = grid_search_gain(&p, &layout, 0, &user, 2, p.wavelength() / 32.0).unwrap();
        let fine = grid_search_gain(&p, &layout, 0, &user, 2, p.wavelength() / 64.0).unwrap();
        assert!(fine.gain >= coarse.gain);
    }

    #[test]
    fn rejects_out_of_scope_requests() {
        let p = single(2);
        let layout = WaveguideLayout::from_params(&p);
        let user = UserPosition::center();
        assert!(grid_search_gain(&p, &layout, 0, &user, 6, p.wavelength() / 64.0).is_err());
        assert!(grid_search_gain(&p, &layout, 0, &user, 2, p.wavelength() / 8.0).is_err());
    }

    #[test]
    fn phase_chain_of_refined_and_perturbed() {
        let p = SystemParams {
            pas_per_waveguide: 8,
            ..SystemParams::default()
        };
        let layout = WaveguideLayout::from_params(&p);
        let user = UserPosition::new(-4.0, 1.5);
        let placement = refine_all(&p, &layout, &user).unwrap();
        let lambda = p.wavelength();
        for r in &placement.waveguides {
            let residual = direct_phase_chain(&r.positions, &user, &layout, r.waveguide, &p);
            assert!(residual < 1e-6 * lambda);
            let mut moved = r.positions.clone();
            moved[3] += lambda / 4.0;
            assert!(direct_phase_chain(&moved, &user, &layout, r.waveguide, &p) >= lambda / 8.0);
            assert_eq!(direct_phase_chain(&r.positions, &user, &layout, r.waveguide, &p), residual);
        }
    }
}
