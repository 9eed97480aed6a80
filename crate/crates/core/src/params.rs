//! Ball contact parameters and their search bounds.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};

/// Number of identified contact parameters.
pub const PARAM_COUNT: usize = 5;

/// Parameter names in vector order.
pub const PARAM_NAMES: [&str; PARAM_COUNT] = [
    "static_friction",
    "dynamic_friction",
    "restitution",
    "linear_damping",
    "angular_damping",
];

/// The five ball contact parameters identified from drop and roll recordings.
///
/// `linear_damping` is a rate in 1/s. `angular_damping` is likewise a rate
/// in 1/s acting on the spin, so the resisting torque is
/// `angular_damping * I * omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContactParams {
    pub static_friction: f64,
    pub dynamic_friction: f64,
    pub restitution: f64,
    pub linear_damping: f64,
    pub angular_damping: f64,
}

impl ContactParams {
    /// Identified values for a rigid hard floor.
    pub const HARD_GROUND: ContactParams = ContactParams {
        static_friction: 0.77,
        dynamic_friction: 0.07,
        restitution: 0.75,
        linear_damping: 0.01,
        angular_damping: 4.28,
    };

    /// Identified values for a grass pitch.
    pub const GRASS: ContactParams = ContactParams {
        static_friction: 0.98,
        dynamic_friction: 0.15,
        restitution: 0.71,
        linear_damping: 0.01,
        angular_damping: 4.95,
    };

    /// Optimizer starting point.
    pub const INITIAL_GUESS: ContactParams = ContactParams {
        static_friction: 0.5,
        dynamic_friction: 0.5,
        restitution: 0.5,
        linear_damping: 1.0,
        angular_damping: 1.0,
    };

    pub fn to_array(&self) -> [f64; PARAM_COUNT] {
        [
            self.static_friction,
            self.dynamic_friction,
            self.restitution,
            self.linear_damping,
            self.angular_damping,
        ]
    }

    pub fn from_array(values: [f64; PARAM_COUNT]) -> Self {
        Self {
            static_friction: values[0],
            dynamic_friction: values[1],
            restitution: values[2],
            linear_damping: values[3],
            angular_damping: values[4],
        }
    }

    /// Checks finiteness and physical sign constraints.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in PARAM_NAMES.iter().zip(self.to_array()) {
            ensure_finite(name, value)?;
            if value < 0.0 {
                return Err(invalid(format!("{name} must be non-negative, got {value}")));
            }
        }
        if self.restitution > 1.0 {
            return Err(invalid(format!(
                "restitution must lie in [0, 1], got {}",
                self.restitution
            )));
        }
        Ok(())
    }

    /// Soft consistency checks that do not make the parameters unusable.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.dynamic_friction > self.static_friction {
            out.push(format!(
                "dynamic friction {} exceeds static friction {}",
                self.dynamic_friction, self.static_friction
            ));
        }
        out
    }
}

/// Per-parameter closed search interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamBounds {
    pub lower: [f64; PARAM_COUNT],
    pub upper: [f64; PARAM_COUNT],
}

impl Default for ParamBounds {
    fn default() -> Self {
        Self {
            lower: [0.0; PARAM_COUNT],
            upper: [1.0, 1.0, 1.0, 5.0, 5.0],
        }
    }
}

impl ParamBounds {
    pub fn validate(&self) -> Result<()> {
        for i in 0..PARAM_COUNT {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            ensure_finite(PARAM_NAMES[i], lo)?;
            ensure_finite(PARAM_NAMES[i], hi)?;
            if lo >= hi {
                return Err(invalid(format!(
                    "bounds for {} must satisfy lo < hi, got [{lo}, {hi}]",
                    PARAM_NAMES[i]
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, params: &ContactParams) -> bool {
        params
            .to_array()
            .iter()
            .enumerate()
            .all(|(i, v)| *v >= self.lower[i] && *v <= self.upper[i])
    }

    pub fn clip(&self, params: &ContactParams) -> ContactParams {
        let mut values = params.to_array();
        for (i, v) in values.iter_mut().enumerate() {
            *v = v.clamp(self.lower[i], self.upper[i]);
        }
        ContactParams::from_array(values)
    }

    /// Maps parameters into the unit box.
    pub fn normalize(&self, params: &ContactParams) -> [f64; PARAM_COUNT] {
        let mut out = params.to_array();
        for (i, v) in out.iter_mut().enumerate() {
            *v = (*v - self.lower[i]) / (self.upper[i] - self.lower[i]);
        }
        out
    }

    /// Inverse of [`ParamBounds::normalize`].
    pub fn denormalize(&self, unit: &[f64]) -> ContactParams {
        let mut out = [0.0; PARAM_COUNT];
        for (i, v) in out.iter_mut().enumerate() {
            let span = self.upper[i] - self.lower[i];
            *v = self.lower[i] + unit[i] * span;
        }
        ContactParams::from_array(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_are_valid_and_in_default_bounds() {
        let bounds = ParamBounds::default();
        for p in [
            ContactParams::HARD_GROUND,
            ContactParams::GRASS,
            ContactParams::INITIAL_GUESS,
        ] {
            p.validate().unwrap();
            assert!(bounds.contains(&p));
            assert!(p.warnings().is_empty());
        }
    }

    #[test]
    fn friction_ordering_is_a_warning_not_an_error() {
        let p = ContactParams {
            static_friction: 0.1,
            dynamic_friction: 0.4,
            ..ContactParams::HARD_GROUND
        };
        p.validate().unwrap();
        assert_eq!(p.warnings().len(), 1);
    }

    #[test]
    fn rejects_non_finite_and_negative() {
        let mut p = ContactParams::HARD_GROUND;
        p.linear_damping = f64::NAN;
        assert!(p.validate().is_err());
        p.linear_damping = -0.1;
        assert!(p.validate().is_err());
        p = ContactParams::HARD_GROUND;
        p.restitution = 1.2;
        assert!(p.validate().is_err());
    }

    #[test]
    fn bounds_reject_empty_interval() {
        let mut b = ParamBounds::default();
        b.upper[2] = 0.0;
        assert!(b.validate().is_err());
    }

    #[test]
    fn initial_guess_normalizes_to_expected_unit_point() {
        let unit = ParamBounds::default().normalize(&ContactParams::INITIAL_GUESS);
        assert_eq!(unit, [0.5, 0.5, 0.5, 0.2, 0.2]);
    }
}
