use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::params::{ContactParams, ParamBounds, PARAM_COUNT};
use crate::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Surface {
    HardGround,
    Grass,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceAssignment {
    pub surface: Surface,
    pub params: ContactParams,
}

/// Adds `std * N(0, 1)` independently to every parameter, without clipping.
pub fn perturb_nominal(nominal: &ContactParams, std: f64, rng: &mut Rng) -> [f64; PARAM_COUNT] {
    let mut values = nominal.to_array();
    for v in &mut values {
        let z: f64 = StandardNormal.sample(rng);
        *v += std * z;
    }
    values
}

/// Splits `n_envs` environments between the two surfaces (hard ground takes
/// the first `ceil(n/2)`), perturbs each nominal vector with Gaussian noise of
/// standard deviation `std`, and clips the result to `bounds`.
pub fn assign_surface_params(
    n_envs: usize,
    hard: &ContactParams,
    grass: &ContactParams,
    std: f64,
    bounds: &ParamBounds,
    rng: &mut Rng,
) -> Result<Vec<SurfaceAssignment>> {
    if n_envs < 2 {
        return Err(invalid(format!("need at least two environments, got {n_envs}")));
    }
    if !(std.is_finite() && std >= 0.0) {
        return Err(invalid(format!("perturbation std must be non-negative, got {std}")));
    }
    bounds.validate()?;
    let hard_count = n_envs.div_ceil(2);
    Ok((0..n_envs)
        .map(|env| {
            let (surface, nominal) = if env < hard_count {
                (Surface::HardGround, hard)
            } else {
                (Surface::Grass, grass)
            };
            let raw = ContactParams::from_array(perturb_nominal(nominal, std, rng));
            SurfaceAssignment {
                surface,
                params: bounds.clip(&raw),
            }
        })
        .collect())
}
