//! Pinching beamforming by antenna-position refinement.
//!
//! For a waveguide at elevation `H_m` above the user (in the y–z plane), the
//! total path from the feed to the user through an antenna at `x = x_u ± d`
//! differs from a common constant by the *path excess*
//!
//! ```text
//! right of the user (away from the feed):  sqrt(H_m² + d²) + n_eff·d
//! left of the user  (toward the feed):     sqrt(H_m² + d²) − n_eff·d
//! ```
//!
//! The right excess grows with `d` and the left one shrinks, so both can be
//! driven onto the same lattice `kλ`. Every antenna is started `Δ_min` past its
//! inner neighbour (the first one at `Δ_min/2` from the user) and pushed
//! outward by the smallest shift that lands its excess on the next lattice
//! point. All antennas then add in phase at the user.

use crate::error::{Error, Result};
use crate::model::{PinchingConfig, SystemParams, UserPosition, WaveguideLayout};

/// Fraction of a wavelength within which a path excess counts as already
/// sitting on the lattice (so the shift is zero rather than a full cycle).
const LATTICE_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `x > x_u`, farther from the feed.
    Right,
    /// `x < x_u`, closer to the feed.
    Left,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Right => 1.0,
            Side::Left => -1.0,
        }
    }
}

/// Path excess of an antenna at distance `d` from the user's x-coordinate.
pub fn path_excess(elevation: f64, d: f64, n_eff: f64, side: Side) -> f64 {
    elevation.hypot(d) + side.sign() * n_eff * d
}

fn lattice_point(value: f64, wavelength: f64, side: Side) -> f64 {
    let q = value / wavelength;
    let nearest = q.round();
    let k = if (q - nearest).abs() < LATTICE_TIE_TOLERANCE {
        nearest
    } else {
        match side {
            Side::Right => q.ceil(),
            Side::Left => q.floor(),
        }
    };
    k * wavelength
}

/// Distance `D ≥ delta` whose path excess equals the next lattice point
/// beyond `delta`, or `None` when no such point exists (left side with
/// `n_eff = 1`, where the excess decays towards zero without crossing it).
fn solve_distance(elevation: f64, delta: f64, n_eff: f64, wavelength: f64, side: Side) -> Option<f64> {
    let h = elevation;
    let target = lattice_point(path_excess(h, delta, n_eff, side), wavelength, side);
    let s = (target * target + h * h * (n_eff * n_eff - 1.0)).sqrt();
    let d = match side {
        // sqrt(H² + D²) + nD = T; the root in rationalized form avoids the
        // cancellation in (nT − S)/(n² − 1).
        Side::Right => {
            if n_eff == 1.0 {
                (target - h) * (target + h) / (2.0 * target)
            } else {
                (target - h) * (target + h) / (n_eff * target + s)
            }
        }
        // sqrt(H² + D²) − nD = T
        Side::Left => {
            if target > 0.0 {
                if n_eff == 1.0 {
                    (h - target) * (h + target) / (2.0 * target)
                } else {
                    (h - target) * (h + target) / (n_eff * target + s)
                }
            } else if n_eff > 1.0 {
                (s - n_eff * target) / (n_eff * n_eff - 1.0)
            } else {
                return None;
            }
        }
    };
    d.is_finite().then_some(d.max(delta))
}

fn check_shift_inputs(elevation: f64, delta: f64, n_eff: f64, wavelength: f64) -> Result<()> {
    if !(elevation > 0.0 && elevation.is_finite()) {
        return Err(Error::Domain(format!("elevation must be positive, got {elevation}")));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Domain(format!("delta must be non-negative, got {delta}")));
    }
    if !(n_eff >= 1.0 && n_eff.is_finite()) {
        return Err(Error::Domain(format!("n_eff must be >= 1, got {n_eff}")));
    }
    if !(wavelength > 0.0 && wavelength.is_finite()) {
        return Err(Error::Domain(format!("wavelength must be positive, got {wavelength}")));
    }
    Ok(())
}

/// Smallest non-negative shift `v` moving an antenna from distance `delta`
/// (right of the user) to `delta + v` such that
/// `sqrt(H_m² + (delta + v)²) + (delta + v)·n_eff` is a multiple of `λ`.
pub fn refine_shift(elevation: f64, delta: f64, n_eff: f64, wavelength: f64) -> Result<f64> {
    check_shift_inputs(elevation, delta, n_eff, wavelength)?;
    solve_distance(elevation, delta, n_eff, wavelength, Side::Right)
        .map(|d| d - delta)
        .ok_or_else(|| Error::Domain("no lattice point reachable".into()))
}

/// Mirror of [`refine_shift`] for an antenna left of the user, where the
/// excess is `sqrt(H_m² + d²) − d·n_eff` and the shift moves it towards the feed.
pub fn refine_shift_left(elevation: f64, delta: f64, n_eff: f64, wavelength: f64) -> Result<f64> {
    check_shift_inputs(elevation, delta, n_eff, wavelength)?;
    solve_distance(elevation, delta, n_eff, wavelength, Side::Left)
        .map(|d| d - delta)
        .ok_or_else(|| Error::Domain("path excess cannot reach the next lattice point".into()))
}

/// One side's refinement chain: distances from the user and the shifts used.
#[derive(Debug, Clone, Default)]
struct Chain {
    distances: Vec<f64>,
    shifts: Vec<f64>,
}

fn build_chain(
    elevation: f64,
    params: &SystemParams,
    side: Side,
    room: f64,
    max_count: usize,
) -> Chain {
    let mut chain = Chain::default();
    let spacing = params.min_spacing_m;
    let mut start = spacing / 2.0;
    while chain.distances.len() < max_count {
        let Some(d) = solve_distance(elevation, start, params.n_eff, params.wavelength(), side) else {
            break;
        };
        if d > room {
            break;
        }
        chain.distances.push(d);
        chain.shifts.push(d - start);
        start = d + spacing;
    }
    chain
}

/// Refined antenna positions of one waveguide.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinementResult {
    pub waveguide: usize,
    pub elevation: f64,
    /// Antenna x-coordinates, ascending.
    pub positions: Vec<f64>,
    /// Shift applied to each antenna, in the order of `positions`.
    pub shifts: Vec<f64>,
    pub left_count: usize,
    pub right_count: usize,
    /// Largest spacing in the refined array. The innermost antenna on each
    /// side contributes twice its offset from the user (the gap to its mirror
    /// image), so every antenna `k` on a side lies within `(k − ½)·delta_max`.
    pub delta_max: f64,
    /// Largest circular deviation of the path excess from the common lattice, meters.
    pub alignment_residual: f64,
}

impl RefinementResult {
    /// True when the antennas are split evenly about the user.
    pub fn is_balanced(&self) -> bool {
        self.left_count == self.right_count
    }
}

fn circular_distance(a: f64, b: f64, period: f64) -> f64 {
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}

/// Refines the `N` antennas of waveguide `m` for `user`.
///
/// Antennas are split N/2 per side. If one side runs out of room before
/// reaching `x_0` or `x_max`, the antennas that do not fit are added to the
/// other side's chain instead.
pub fn refine_waveguide(
    params: &SystemParams,
    layout: &WaveguideLayout,
    m: usize,
    user: &UserPosition,
) -> Result<RefinementResult> {
    let n = params.pas_per_waveguide;
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::invalid("pas_per_waveguide", format!("must be even and positive, got {n}")));
    }
    let elevation = layout.elevation(m, user);
    let right = build_chain(elevation, params, Side::Right, layout.x_max - user.x, n);
    let left = build_chain(elevation, params, Side::Left, user.x - layout.feed_x, n);

    let half = n / 2;
    let (cap_left, cap_right) = (left.distances.len(), right.distances.len());
    let (n_left, n_right) = if cap_left >= half && cap_right >= half {
        (half, half)
    } else if cap_right < half {
        (n - cap_right, cap_right)
    } else {
        (cap_left, n - cap_left)
    };
    if n_left > cap_left || n_right > cap_right {
        return Err(Error::Infeasible {
            waveguide: m,
            reason: format!(
                "only {} of {n} antennas fit ({cap_left} left, {cap_right} right of x = {})",
                cap_left + cap_right,
                user.x
            ),
        });
    }

    let mut positions = Vec::with_capacity(n);
    let mut shifts = Vec::with_capacity(n);
    for k in (0..n_left).rev() {
        positions.push(user.x - left.distances[k]);
        shifts.push(left.shifts[k]);
    }
    for k in 0..n_right {
        positions.push(user.x + right.distances[k]);
        shifts.push(right.shifts[k]);
    }

    let mut delta_max: f64 = 0.0;
    for d in [&left.distances[..n_left], &right.distances[..n_right]] {
        if let Some(first) = d.first() {
            delta_max = delta_max.max(2.0 * first);
        }
        for pair in d.windows(2) {
            delta_max = delta_max.max(pair[1] - pair[0]);
        }
    }

    let wavelength = params.wavelength();
    let residues: Vec<f64> = left.distances[..n_left]
        .iter()
        .map(|&d| path_excess(elevation, d, params.n_eff, Side::Left))
        .chain(
            right.distances[..n_right]
                .iter()
                .map(|&d| path_excess(elevation, d, params.n_eff, Side::Right)),
        )
        .map(|e| e.rem_euclid(wavelength))
        .collect();
    let alignment_residual = residues
        .iter()
        .map(|&r| circular_distance(r, residues[0], wavelength))
        .fold(0.0, f64::max);

    Ok(RefinementResult {
        waveguide: m,
        elevation,
        positions,
        shifts,
        left_count: n_left,
        right_count: n_right,
        delta_max,
        alignment_residual,
    })
}

/// Placement of all waveguides for one user.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub config: PinchingConfig,
    pub waveguides: Vec<RefinementResult>,
}

impl Placement {
    pub fn delta_max(&self) -> Vec<f64> {
        self.waveguides.iter().map(|w| w.delta_max).collect()
    }

    pub fn max_alignment_residual(&self) -> f64 {
        self.waveguides
            .iter()
            .map(|w| w.alignment_residual)
            .fold(0.0, f64::max)
    }
}

/// Refines every waveguide independently (the array-gain objective is
/// separable across waveguides).
pub fn refine_all(params: &SystemParams, layout: &WaveguideLayout, user: &UserPosition) -> Result<Placement> {
    params.validate()?;
    let mut waveguides = Vec::with_capacity(layout.len());
    let mut failed = Vec::new();
    let mut first_error = None;
    for m in 0..layout.len() {
        match refine_waveguide(params, layout, m, user) {
            Ok(r) => waveguides.push(r),
            Err(e) if e.is_infeasible() => {
                failed.push(m);
                first_error.get_or_insert(e);
            }
            Err(e) => return Err(e),
        }
    }
    match failed.len() {
        0 => {}
        1 => return Err(first_error.expect("recorded with the failure")),
        _ => return Err(Error::InfeasibleMany { waveguides: failed }),
    }
    let positions = waveguides.iter().map(|w| w.positions.clone()).collect();
    Ok(Placement {
        config: PinchingConfig::new(positions, params, layout),
        waveguides,
    })
}
