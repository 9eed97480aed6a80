use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Rng;

/// Constants of the state-dependent noise magnitude
/// `sigma = c_min + |v| / c_vel + |p| / c_dist`.
///
/// The defaults are placeholders, not measured values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Noise floor, m.
    pub c_min: f64,
    /// Object speed per metre of added noise, (m/s)/m.
    pub c_vel: f64,
    /// Object distance per metre of added noise, m/m.
    pub c_dist: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            c_min: 0.01,
            c_vel: 10.0,
            c_dist: 20.0,
        }
    }
}

impl NoiseConfig {
    /// Config files must set all three constants strictly positive.
    pub fn validate(&self) -> Result<()> {
        self.validate_scales()?;
        if !(self.c_min > 0.0) {
            return Err(invalid(format!("c_min must be positive, got {}", self.c_min)));
        }
        Ok(())
    }

    /// Weaker check used at sampling time: a zero floor is allowed.
    fn validate_scales(&self) -> Result<()> {
        if !(self.c_min.is_finite() && self.c_min >= 0.0) {
            return Err(invalid(format!("c_min must be non-negative, got {}", self.c_min)));
        }
        for (name, v) in [("c_vel", self.c_vel), ("c_dist", self.c_dist)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectKind {
    Ball,
    Goal,
}

/// Position and velocity of an object expressed in the robot's root frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectObservation {
    pub position: [f64; 3],
    pub velocity: [f64; 3],
    pub object_kind: ObjectKind,
}

impl ObjectObservation {
    pub fn validate(&self) -> Result<()> {
        if self.position.iter().chain(&self.velocity).any(|v| !v.is_finite()) {
            return Err(invalid("observation components must be finite"));
        }
        Ok(())
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Noise standard deviation for one observation. The robot sits at the frame
/// origin, so the object distance is simply `|position|`.
pub fn observation_noise_sigma(obs: &ObjectObservation, cfg: &NoiseConfig) -> f64 {
    cfg.c_min + norm(&obs.velocity) / cfg.c_vel + norm(&obs.position) / cfg.c_dist
}

/// Perturbs the position by `sigma * N(0, I)`. Velocity passes through.
pub fn apply_observation_noise(
    obs: &ObjectObservation,
    cfg: &NoiseConfig,
    rng: &mut Rng,
) -> Result<ObjectObservation> {
    obs.validate()?;
    cfg.validate_scales()?;
    let sigma = observation_noise_sigma(obs, cfg);
    let mut out = *obs;
    for p in &mut out.position {
        let z: f64 = StandardNormal.sample(rng);
        *p += sigma * z;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn obs(position: [f64; 3], velocity: [f64; 3]) -> ObjectObservation {
        ObjectObservation {
            position,
            velocity,
            object_kind: ObjectKind::Ball,
        }
    }

    #[test]
    fn sigma_reduces_to_floor_at_rest_at_origin() {
        let cfg = NoiseConfig::default();
        assert_eq!(observation_noise_sigma(&obs([0.0; 3], [0.0; 3]), &cfg), cfg.c_min);
    }

    #[test]
    fn sigma_worked_example() {
        let cfg = NoiseConfig::default();
        let s = observation_noise_sigma(&obs([0.0, 4.0, 0.0], [1.2, 1.6, 0.0]), &cfg);
        assert!((s - 0.41).abs() < 1e-12);
    }

    #[test]
    fn doubling_speed_adds_speed_over_c_vel() {
        let cfg = NoiseConfig::default();
        let a = observation_noise_sigma(&obs([4.0, 0.0, 0.0], [2.0, 0.0, 0.0]), &cfg);
        let b = observation_noise_sigma(&obs([4.0, 0.0, 0.0], [4.0, 0.0, 0.0]), &cfg);
        assert!((b - a - 2.0 / cfg.c_vel).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let cfg = NoiseConfig {
            c_min: 0.0,
            ..NoiseConfig::default()
        };
        assert!(cfg.validate().is_err());
        let o = ObjectObservation {
            position: [0.0; 3],
            velocity: [0.0; 3],
            object_kind: ObjectKind::Goal,
        };
        assert_eq!(apply_observation_noise(&o, &cfg, &mut seeded_rng(1)).unwrap(), o);
    }

    #[test]
    fn seeded_and_velocity_preserving() {
        let cfg = NoiseConfig::default();
        let o = obs([1.0, 2.0, 0.1], [0.5, 0.0, 0.0]);
        let a = apply_observation_noise(&o, &cfg, &mut seeded_rng(4)).unwrap();
        let b = apply_observation_noise(&o, &cfg, &mut seeded_rng(4)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.velocity, o.velocity);
        assert_ne!(a.position, o.position);
    }

    #[test]
    fn rejects_non_finite_observation() {
        let o = obs([f64::NAN, 0.0, 0.0], [0.0; 3]);
        assert!(apply_observation_noise(&o, &NoiseConfig::default(), &mut seeded_rng(0)).is_err());
    }
}
