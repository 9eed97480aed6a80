//! Contact-dynamics identification for a football and the stochastic
//! utilities used when training kicking policies against the identified model.
//!
//! * [`dynamics`] simulates the drop and roll calibration experiments.
//! * [`cmaes`] and [`sysid`] fit [`ContactParams`] to recorded trajectories.
//! * [`randomization`] samples domain randomization terms, per-environment
//!   contact parameters, observation noise and ball/goal placements.
//! * [`curriculum`] steers episode starts toward frequently failed segments.
//! * [`reward`] scores logged state traces and kick outcomes.

pub mod cmaes;
pub mod curriculum;
pub mod dynamics;
pub mod error;
pub mod params;
pub mod randomization;
pub mod reward;
pub mod sysid;
pub mod trajectory;

pub use dynamics::{simulate_drop, simulate_roll, BallSpec, SimConfig};
pub use error::{Error, Result};
pub use params::{ContactParams, ParamBounds};
pub use trajectory::{Trajectory, TrajectoryKind};

/// Seeded random stream used by every stochastic component.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Creates the crate's seeded stream.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}
