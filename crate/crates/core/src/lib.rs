//! Tri-hybrid (digital + analog + pinching) beamforming over dielectric
//! waveguides.
//!
//! The crate computes phase-aligned pinching-antenna placements, the optimal
//! digital/analog beamformers on top of them, the resulting SNR and capacity,
//! closed-form bounds and scaling laws, a conventional fixed-array baseline,
//! brute-force verifiers, and seeded Monte Carlo sweeps.
//!
//! ```
//! use trihybrid::prelude::*;
//!
//! let params = SystemParams::default().for_case(LossCase::Lossless);
//! let layout = WaveguideLayout::from_params(&params);
//! let user = UserPosition::center();
//! let placement = refine_all(&params, &layout, &user).unwrap();
//! let channel = effective_channel(&params, &layout, &placement.config, &user).unwrap();
//! let single = single_rf_solution(&channel, &params);
//! let multi = multi_rf_solution(&channel, &params).unwrap();
//! assert!(single.snr <= multi.snr * (1.0 + 1e-12));
//! ```

pub mod analysis;
pub mod baseline;
pub mod beamforming;
pub mod error;
pub mod experiments;
pub mod model;
pub mod oracle;
pub mod placement;
pub mod selftest;
pub mod units;

pub use error::{Error, Result};

pub mod prelude {
    pub use crate::analysis::{f_ub, gain_approx, gain_lower, gain_upper, snr_bounds, snr_linear, BoundsReport};
    pub use crate::baseline::{baseline_capacity, FixedArray};
    pub use crate::beamforming::{capacity, multi_rf_solution, single_rf_solution, BeamformerSolution, RfMode};
    pub use crate::model::{
        effective_channel, los_coefficient, waveguide_vector, EffectiveChannel, LossCase, PinchingConfig,
        SystemParams, UserPosition, WaveguideLayout,
    };
    pub use crate::placement::{refine_all, refine_shift, refine_waveguide, Placement, RefinementResult};
    pub use crate::{Error, Result};
}
