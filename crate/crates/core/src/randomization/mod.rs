//! Training-time samplers: domain randomization terms, per-environment
//! contact parameters, state-dependent observation noise, and ball/goal
//! placement.

mod domain;
mod noise;
mod placement;
mod surface;

pub use domain::{sample_dr, DrSample, DrSpec, DrTerm, Uniform};
pub use noise::{apply_observation_noise, observation_noise_sigma, NoiseConfig, ObjectKind, ObjectObservation};
pub use placement::{sample_ball_placement, sample_goal, BallPlacement, PlacementSpec, MIN_SPAWN_RADIUS};
pub use surface::{assign_surface_params, perturb_nominal, Surface, SurfaceAssignment};
