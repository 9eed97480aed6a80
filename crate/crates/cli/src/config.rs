use std::fs;
use std::path::Path;

use contact_sysid::randomization::{DrSpec, NoiseConfig, ObjectKind, ObjectObservation, PlacementSpec};
use contact_sysid::reward::{Leg, RewardSpec};
use contact_sysid::sysid::SysIdConfig;
use contact_sysid::{BallSpec, Error, Result, SimConfig};
use serde::{Deserialize, Serialize};

/// Every module's settings in one file. Missing sections take defaults.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub ball: BallSpec,
    pub sim: SimConfig,
    pub sysid: SysIdConfig,
    pub dr: DrSpec,
    pub noise: NoiseConfig,
    pub placement: PlacementSpec,
    pub curriculum: CurriculumConfig,
    pub reward: RewardSpec,
    pub kick: KickConfig,
    pub probes: Probes,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurriculumConfig {
    pub motions: usize,
    pub bins: usize,
    pub smoothing_alpha: f64,
    pub decay: f64,
}

impl Default for CurriculumConfig {
    fn default() -> Self {
        Self {
            motions: 1,
            bins: contact_sysid::curriculum::DEFAULT_PHASE_BINS,
            smoothing_alpha: 1.0,
            decay: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KickConfig {
    pub labeled_leg: Leg,
    pub target_direction: [f64; 3],
}

impl Default for KickConfig {
    fn default() -> Self {
        Self {
            labeled_leg: Leg::Right,
            target_direction: [1.0, 0.0, 0.0],
        }
    }
}

/// Fixed inputs for samplers that need a state to draw around.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Probes {
    pub observation: ObjectObservation,
    pub nominal_ball_position: [f64; 2],
    pub nominal_ball_direction: f64,
    /// Standard deviation of the per-environment contact perturbation.
    pub surface_std: f64,
}

impl Default for Probes {
    fn default() -> Self {
        Self {
            observation: ObjectObservation {
                position: [0.0, 4.0, 0.0],
                velocity: [2.0, 0.0, 0.0],
                object_kind: ObjectKind::Ball,
            },
            nominal_ball_position: [0.5, 0.0],
            nominal_ball_direction: 0.0,
            surface_std: 1.0,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p)?;
                serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))
            }
        }
    }
}
