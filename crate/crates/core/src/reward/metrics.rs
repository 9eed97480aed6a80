use super::episode::planar_cosine;
use crate::error::{ensure_finite, Error, Result};

/// Cosine between the planar outgoing ball velocity and the planar
/// impact-to-goal direction.
pub fn kick_accuracy(ball_velocity: [f64; 3], impact_to_goal: [f64; 3]) -> Result<f64> {
    for v in ball_velocity.iter().chain(&impact_to_goal) {
        ensure_finite("kick vector", *v)?;
    }
    planar_cosine(
        [ball_velocity[0], ball_velocity[1]],
        [impact_to_goal[0], impact_to_goal[1]],
    )
}

/// Fraction of `true` outcomes.
pub fn success_rate(outcomes: &[bool]) -> Result<f64> {
    if outcomes.is_empty() {
        return Err(Error::UndefinedMetric("success rate of zero attempts".into()));
    }
    let hits = outcomes.iter().filter(|o| **o).count();
    Ok(hits as f64 / outcomes.len() as f64)
}
