use std::f64::consts::{PI, TAU};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::domain::Uniform;
use crate::error::{invalid, Result};
use crate::Rng;

/// Smallest radius a perturbed ball spawn may take, m.
pub const MIN_SPAWN_RADIUS: f64 = 0.05;

/// Ranges for ball spawn and goal sampling, all in the robot's start frame
/// (x forward, y left).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementSpec {
    /// Half-width of the spawn arc around the nominal direction, rad.
    pub angular_range: f64,
    /// Half-width of the radius perturbation, m.
    pub radial_range: f64,
    /// Spawn speed range, m/s.
    pub ball_speed_range: [f64; 2],
    /// Goal region centre, m.
    pub goal_center: [f64; 2],
    /// Goal region extent along y, m.
    pub goal_width: f64,
    /// Goal region extent along x, m.
    pub goal_depth: f64,
}

impl Default for PlacementSpec {
    fn default() -> Self {
        Self {
            angular_range: PI / 6.0,
            radial_range: 0.2,
            ball_speed_range: [0.1, 0.3],
            goal_center: [5.0, 0.0],
            goal_width: 1.0,
            goal_depth: 0.5,
        }
    }
}

impl PlacementSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("angular_range", self.angular_range),
            ("radial_range", self.radial_range),
            ("goal_width", self.goal_width),
            ("goal_depth", self.goal_depth),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(invalid(format!("{name} must be non-negative, got {v}")));
            }
        }
        let [lo, hi] = self.ball_speed_range;
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
            return Err(invalid(format!("invalid ball speed range [{lo}, {hi}]")));
        }
        if self.goal_center.iter().any(|v| !v.is_finite()) {
            return Err(invalid("goal centre must be finite"));
        }
        Ok(())
    }

    /// `(x range, y range)` of the goal rectangle.
    pub fn goal_region(&self) -> (Uniform, Uniform) {
        let [cx, cy] = self.goal_center;
        (
            Uniform::new(cx - 0.5 * self.goal_depth, cx + 0.5 * self.goal_depth),
            Uniform::new(cy - 0.5 * self.goal_width, cy + 0.5 * self.goal_width),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPlacement {
    pub position: [f64; 2],
    pub velocity: [f64; 2],
    /// Sampled polar angle of the spawn, rad.
    pub angle: f64,
    /// Sampled spawn radius, m.
    pub radius: f64,
}

/// Samples a ball spawn on the arc around a motion's nominal placement, and a
/// planar launch velocity with uniform heading.
pub fn sample_ball_placement(
    nominal_position: [f64; 2],
    nominal_direction: f64,
    spec: &PlacementSpec,
    rng: &mut Rng,
) -> Result<BallPlacement> {
    spec.validate()?;
    let nominal_radius = nominal_position[0].hypot(nominal_position[1]);
    if !(nominal_radius > 0.0 && nominal_radius.is_finite()) || !nominal_direction.is_finite() {
        return Err(invalid("nominal ball position must be finite and away from the origin"));
    }
    let angle = nominal_direction + Uniform::new(-spec.angular_range, spec.angular_range).sample(rng);
    let radius = (nominal_radius + Uniform::new(-spec.radial_range, spec.radial_range).sample(rng))
        .max(MIN_SPAWN_RADIUS);
    let speed = Uniform::new(spec.ball_speed_range[0], spec.ball_speed_range[1]).sample(rng);
    let velocity = if speed > 0.0 {
        let heading = rng.random::<f64>() * TAU;
        [speed * heading.cos(), speed * heading.sin()]
    } else {
        [0.0, 0.0]
    };
    Ok(BallPlacement {
        position: [radius * angle.cos(), radius * angle.sin()],
        velocity,
        angle,
        radius,
    })
}

/// Samples a goal position uniformly inside the goal rectangle.
pub fn sample_goal(spec: &PlacementSpec, rng: &mut Rng) -> Result<[f64; 2]> {
    spec.validate()?;
    let (xs, ys) = spec.goal_region();
    Ok([xs.sample(rng), ys.sample(rng)])
}
