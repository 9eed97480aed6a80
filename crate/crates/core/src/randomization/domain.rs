use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::Rng;

/// Closed uniform distribution `U(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Uniform {
    pub lo: f64,
    pub hi: f64,
}

impl Uniform {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lo.is_finite() && self.hi.is_finite() && self.lo <= self.hi) {
            return Err(invalid(format!("invalid uniform range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        if self.lo == self.hi {
            return self.lo;
        }
        let u: f64 = rng.random();
        // u < 1, but lo + u*(hi-lo) can round up to hi; that is inside the support.
        (self.lo + u * (self.hi - self.lo)).min(self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Cumulative distribution function.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.lo {
            0.0
        } else if x >= self.hi {
            1.0
        } else {
            (x - self.lo) / (self.hi - self.lo)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrTerm {
    pub name: String,
    pub range: Uniform,
}

/// Named domain randomization terms, sampled independently.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrSpec {
    pub terms: Vec<DrTerm>,
}

impl Default for DrSpec {
    fn default() -> Self {
        let term = |name: &str, lo, hi| DrTerm {
            name: name.to_string(),
            range: Uniform::new(lo, hi),
        };
        Self {
            terms: vec![
                term("robot_static_friction", 0.3, 1.6),
                term("robot_dynamic_friction", 0.3, 1.2),
                term("robot_restitution", 0.0, 0.5),
                term("joint_default_pos", -0.01, 0.01),
                term("base_com_x", -0.025, 0.025),
                term("base_com_y", -0.05, 0.05),
                term("base_com_z", -0.05, 0.05),
                term("push_robot", -0.5, 0.5),
            ],
        }
    }
}

impl DrSpec {
    pub fn validate(&self) -> Result<()> {
        for (i, t) in self.terms.iter().enumerate() {
            t.range.validate()?;
            if self.terms[..i].iter().any(|o| o.name == t.name) {
                return Err(invalid(format!("duplicate randomization term `{}`", t.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&DrTerm> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// One draw of every term, in spec order.
#[derive(Debug, Clone, PartialEq)]
pub struct DrSample {
    pub values: Vec<(String, f64)>,
}

impl DrSample {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

pub fn sample_dr(spec: &DrSpec, rng: &mut Rng) -> Result<DrSample> {
    spec.validate()?;
    Ok(DrSample {
        values: spec
            .terms
            .iter()
            .map(|t| (t.name.clone(), t.range.sample(rng)))
            .collect(),
    })
}
