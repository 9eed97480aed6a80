//! Per-step reward evaluation for the two training stages, the kick-outcome
//! shaping logic, and the shooting metrics.

mod episode;
mod metrics;
mod spec;
mod trace;

pub use episode::{evaluate_step, tracking_kernel, EpisodeScorer, KickEvent, StepReward, TermValue};
pub use metrics::{kick_accuracy, success_rate};
pub use spec::{RewardSpec, Stage, Term, TermSpec};
pub use trace::{read_trace, write_rewards, write_trace};

use serde::{Deserialize, Serialize};

/// Foot that touched the ball, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContactFoot {
    #[default]
    None,
    Left,
    Right,
}

/// Kicking leg a reference motion is labelled with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Leg {
    Left,
    Right,
}

impl Leg {
    pub fn matches(self, foot: ContactFoot) -> bool {
        matches!(
            (self, foot),
            (Leg::Left, ContactFoot::Left) | (Leg::Right, ContactFoot::Right)
        )
    }

    /// Planar direction a side-foot swing of this leg should follow: a left
    /// foot strikes toward the robot's right (-y) and vice versa.
    pub fn lateral_direction(self) -> [f64; 2] {
        match self {
            Leg::Left => [0.0, -1.0],
            Leg::Right => [0.0, 1.0],
        }
    }
}

/// Ball quantities available in Stage II frames.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallFrame {
    /// Horizontal base-to-ball distance, m.
    pub distance_xy: f64,
    /// Ball velocity in the world frame, m/s.
    pub velocity: [f64; 3],
    /// Foot touching the ball on this step.
    pub contact: ContactFoot,
}

/// Robot/reference quantities for one control step. Tracking errors are
/// squared norms (or squared geodesic angles for orientations).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct StateFrame {
    pub step: usize,
    /// s
    pub time: f64,
    pub anchor_pos_err_sq: f64,
    pub anchor_ori_err_sq: f64,
    /// One entry per tracked body.
    pub body_pos_err_sq: Vec<f64>,
    pub body_ori_err_sq: Vec<f64>,
    pub lin_vel_err_sq: f64,
    pub ang_vel_err_sq: f64,
    pub foot_pos_err_sq: f64,
    pub action: Vec<f64>,
    pub prev_action: Vec<f64>,
    pub joint_limit_violations: u32,
    pub undesired_contacts: u32,
    /// Gravity direction in the pelvis frame.
    pub projected_gravity: [f64; 3],
    /// Horizontal distance between the feet, m.
    pub foot_separation: f64,
    /// Change in the waist action since the previous step.
    pub waist_action_delta: f64,
    /// Planar velocity of the kicking foot, m/s.
    pub swing_foot_velocity: [f64; 2],
    pub ball: Option<BallFrame>,
}

impl StateFrame {
    /// Frame with zero tracking error, no penalties and the given step/time.
    pub fn perfect(step: usize, time: f64, bodies: usize, actions: usize) -> Self {
        Self {
            step,
            time,
            body_pos_err_sq: vec![0.0; bodies],
            body_ori_err_sq: vec![0.0; bodies],
            action: vec![0.0; actions],
            prev_action: vec![0.0; actions],
            projected_gravity: [0.0, 0.0, -1.0],
            ..Self::default()
        }
    }
}
