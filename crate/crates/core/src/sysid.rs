//! Trajectory-matching loss and the CMA-ES identification loop.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::cmaes::CmaEs;
use crate::dynamics::{simulate_drop, simulate_roll, BallSpec, SimConfig};
use crate::error::{ensure_finite, invalid, Error, Result};
use crate::params::{ContactParams, ParamBounds};
use crate::seeded_rng;
use crate::trajectory::{Trajectory, TrajectoryKind};

/// Weights on the drop and roll residual sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub drop: f64,
    pub roll: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self { drop: 1.0, roll: 1.0 }
    }
}

/// Settings for [`identify`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SysIdConfig {
    pub initial_params: ContactParams,
    pub bounds: ParamBounds,
    /// Initial CMA-ES step size in the unit-normalized parameter box.
    pub search_scale: f64,
    pub population_size: usize,
    pub loss_weights: LossWeights,
    /// Divide each experiment's residuals by the range of its recording.
    pub normalize_residuals: bool,
    /// Stop once consecutive generation-best losses differ by less than this.
    pub tolerance: f64,
    pub max_generations: usize,
    pub seed: u64,
}

impl Default for SysIdConfig {
    fn default() -> Self {
        Self {
            initial_params: ContactParams::INITIAL_GUESS,
            bounds: ParamBounds::default(),
            search_scale: 0.2,
            population_size: 4,
            loss_weights: LossWeights::default(),
            normalize_residuals: true,
            tolerance: 1e-12,
            max_generations: 1000,
            seed: 0,
        }
    }
}

impl SysIdConfig {
    pub fn validate(&self) -> Result<()> {
        self.bounds.validate()?;
        if !self.bounds.contains(&self.initial_params) {
            return Err(invalid("initial parameters lie outside the bounds"));
        }
        if !(self.search_scale > 0.0 && self.search_scale <= 1.0) {
            return Err(invalid(format!(
                "search scale must lie in (0, 1], got {}",
                self.search_scale
            )));
        }
        if self.population_size < 2 {
            return Err(invalid("population size must be at least 2"));
        }
        for (name, w) in [("drop weight", self.loss_weights.drop), ("roll weight", self.loss_weights.roll)] {
            ensure_finite(name, w)?;
            if w < 0.0 {
                return Err(invalid(format!("{name} must be non-negative")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid("tolerance must be positive"));
        }
        if self.max_generations == 0 {
            return Err(invalid("max_generations must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    Tolerance,
    MaxGenerations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentificationResult {
    pub best_params: ContactParams,
    pub best_loss: f64,
    pub generations_used: usize,
    /// Lowest loss within each generation.
    pub generation_best: Vec<f64>,
    /// Lowest loss seen up to and including each generation.
    pub loss_history: Vec<f64>,
    pub terminated_by: Termination,
}

fn sum_sq(a: &Trajectory, b: &Trajectory) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).powi(2)).sum()
}

fn check_pair(sim: &Trajectory, real: &Trajectory, kind: TrajectoryKind) -> Result<()> {
    if sim.kind != kind || real.kind != kind {
        return Err(invalid(format!("expected a pair of {kind:?} trajectories")));
    }
    if sim.len() != real.len() {
        return Err(invalid(format!(
            "{kind:?} length mismatch: simulated {} vs recorded {}",
            sim.len(),
            real.len()
        )));
    }
    Ok(())
}

/// Weighted sum of squared drop-height and roll-displacement residuals.
pub fn sysid_loss(
    sim_drop: &Trajectory,
    sim_roll: &Trajectory,
    real_drop: &Trajectory,
    real_roll: &Trajectory,
    drop_weight: f64,
    roll_weight: f64,
) -> Result<f64> {
    check_pair(sim_drop, real_drop, TrajectoryKind::DropHeight)?;
    check_pair(sim_roll, real_roll, TrajectoryKind::RollDisplacement)?;
    Ok(drop_weight * sum_sq(real_drop, sim_drop) + roll_weight * sum_sq(real_roll, sim_roll))
}

/// Scores one parameter vector against the recordings.
struct Objective<'a> {
    real_drop: &'a Trajectory,
    real_roll: &'a Trajectory,
    spec: &'a BallSpec,
    drop_sim: SimConfig,
    roll_sim: SimConfig,
    h0: f64,
    v0: f64,
    drop_weight: f64,
    roll_weight: f64,
}

impl Objective<'_> {
    fn loss(&self, params: &ContactParams) -> Result<f64> {
        let sim_drop = simulate_drop(params, self.spec, self.h0, &self.drop_sim, self.real_drop.len())?;
        let sim_roll = simulate_roll(params, self.spec, self.v0, &self.roll_sim, self.real_roll.len())?;
        sysid_loss(
            &sim_drop,
            &sim_roll,
            self.real_drop,
            self.real_roll,
            self.drop_weight,
            self.roll_weight,
        )
    }
}

fn effective_weight(weight: f64, real: &Trajectory, normalize: bool) -> f64 {
    let range = real.range();
    if normalize && range > 0.0 {
        weight / (range * range)
    } else {
        weight
    }
}

/// Fits contact parameters to a drop recording (released at rest from `h0`)
/// and a roll recording (launched at `v0`).
///
/// Each generation asks CMA-ES for candidates in the unit-normalized box,
/// simulates both experiments per candidate, and tells the losses back. The
/// loop stops when two consecutive generation-best losses differ by less than
/// `cfg.tolerance`, or after `cfg.max_generations`.
pub fn identify(
    real_drop: &Trajectory,
    real_roll: &Trajectory,
    cfg: &SysIdConfig,
    spec: &BallSpec,
    sim: &SimConfig,
    h0: f64,
    v0: f64,
) -> Result<IdentificationResult> {
    cfg.validate()?;
    if real_drop.kind != TrajectoryKind::DropHeight || real_roll.kind != TrajectoryKind::RollDisplacement {
        return Err(invalid("recordings must be a drop-height and a roll-displacement trajectory"));
    }
    if real_drop.len() < 2 || real_roll.len() < 2 {
        return Err(invalid("recordings need at least two samples each"));
    }

    let objective = Objective {
        real_drop,
        real_roll,
        spec,
        drop_sim: sim.with_sample_interval(real_drop.dt),
        roll_sim: sim.with_sample_interval(real_roll.dt),
        h0,
        v0,
        drop_weight: effective_weight(cfg.loss_weights.drop, real_drop, cfg.normalize_residuals),
        roll_weight: effective_weight(cfg.loss_weights.roll, real_roll, cfg.normalize_residuals),
    };
    // surface bad h0/v0/spec before spending generations
    objective.loss(&cfg.initial_params)?;

    let x0 = cfg.bounds.normalize(&cfg.initial_params);
    let mut es = CmaEs::new(&x0, cfg.search_scale, cfg.population_size)?.with_box(0.0, 1.0)?;
    let mut rng = seeded_rng(cfg.seed);

    let mut best_params = cfg.initial_params;
    let mut best_loss = f64::INFINITY;
    let mut generation_best = Vec::new();
    let mut loss_history = Vec::new();
    let mut previous = f64::INFINITY;
    let mut terminated_by = Termination::MaxGenerations;

    for _ in 0..cfg.max_generations {
        let population = match es.ask(&mut rng) {
            Ok(c) => c,
            Err(Error::Numerical(_)) => {
                let mut state = es.state().clone();
                let n = state.mean.len();
                state.covariance = nalgebra::DMatrix::identity(n, n);
                state.path_c = DVector::zeros(n);
                state.path_sigma = DVector::zeros(n);
                state.step_size = (2.0 * state.step_size).clamp(cfg.search_scale, 1.0);
                es.set_state(state)?;
                es.ask(&mut rng)?
            }
            Err(e) => return Err(e),
        };

        let mut losses = Vec::with_capacity(population.len());
        for x in population.candidates() {
            let params = cfg.bounds.clip(&cfg.bounds.denormalize(x.as_slice()));
            let loss = objective.loss(&params)?;
            if loss < best_loss {
                best_loss = loss;
                best_params = params;
            }
            losses.push(loss);
        }
        es.tell(&population, &losses)?;

        let current = losses.iter().copied().fold(f64::INFINITY, f64::min);
        generation_best.push(current);
        loss_history.push(best_loss);
        if (previous - current).abs() < cfg.tolerance {
            terminated_by = Termination::Tolerance;
            break;
        }
        previous = current;
    }

    Ok(IdentificationResult {
        best_params,
        best_loss,
        generations_used: generation_best.len(),
        generation_best,
        loss_history,
        terminated_by,
    })
}
