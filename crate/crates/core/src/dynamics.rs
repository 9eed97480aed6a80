//! Reference forward model for the two calibration experiments.
//!
//! The drop test integrates `dv/dt = -g - c v` between impacts and applies an
//! instantaneous restitution law at the floor. The roll test integrates a
//! rolling-without-slipping deceleration
//!
//! ```text
//! a(v) = -(mu_d g + (c + f c_a) v) / (1 + f)
//! ```
//!
//! where `f = I / (m r^2)` is the ball's inertia factor, `c` the linear damping
//! rate and `c_a` the angular damping rate. Static friction has no effect in
//! this model.
//!
//! Both integrators use fixed-step RK4 with the step chosen to divide the
//! sampling interval exactly, and locate discrete events (floor impact, roll
//! stop) by bisection inside the step.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Result};
use crate::params::ContactParams;
use crate::trajectory::{Trajectory, TrajectoryKind};

/// Bisection tolerance on event times, in seconds.
pub const EVENT_TIME_TOLERANCE: f64 = 1e-8;

/// Ball geometry and mass properties.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BallSpec {
    /// m
    pub radius: f64,
    /// kg
    pub mass: f64,
    /// I / (m r^2); 2/3 for a thin spherical shell.
    pub inertia_factor: f64,
}

impl Default for BallSpec {
    /// Size-5 football.
    fn default() -> Self {
        Self {
            radius: 0.11,
            mass: 0.43,
            inertia_factor: 2.0 / 3.0,
        }
    }
}

impl BallSpec {
    pub fn validate(&self) -> Result<()> {
        ensure_finite("radius", self.radius)?;
        ensure_finite("mass", self.mass)?;
        ensure_finite("inertia_factor", self.inertia_factor)?;
        if self.radius <= 0.0 || self.mass <= 0.0 {
            return Err(invalid("ball radius and mass must be positive"));
        }
        if !(self.inertia_factor > 0.0 && self.inertia_factor <= 1.0) {
            return Err(invalid(format!(
                "inertia factor must lie in (0, 1], got {}",
                self.inertia_factor
            )));
        }
        Ok(())
    }

    /// Effective inertia multiplier of a ball rolling without slipping.
    pub fn rolling_inertia(&self) -> f64 {
        1.0 + self.inertia_factor
    }
}

/// Integrator and sampling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// m/s^2
    pub gravity: f64,
    /// Upper bound on the RK4 step, s.
    pub integrator_step: f64,
    /// Rebounds slower than this end the bounce sequence, m/s.
    pub bounce_cutoff_speed: f64,
    /// Rolling stops once the speed falls to this value, m/s.
    pub roll_stop_speed: f64,
    /// Interval between recorded samples, s.
    pub sample_interval: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            gravity: 9.81,
            integrator_step: 1e-4,
            bounce_cutoff_speed: 1e-3,
            roll_stop_speed: 1e-3,
            sample_interval: 0.1,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("gravity", self.gravity),
            ("integrator_step", self.integrator_step),
            ("bounce_cutoff_speed", self.bounce_cutoff_speed),
            ("roll_stop_speed", self.roll_stop_speed),
            ("sample_interval", self.sample_interval),
        ] {
            ensure_finite(name, v)?;
            if v <= 0.0 {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.integrator_step > self.sample_interval / 10.0 {
            return Err(invalid(format!(
                "integrator step {} exceeds a tenth of the sample interval {}",
                self.integrator_step, self.sample_interval
            )));
        }
        Ok(())
    }

    /// Substeps per sample and the resulting exact substep length.
    fn substeps(&self) -> (usize, f64) {
        let n = (self.sample_interval / self.integrator_step - 1e-9).ceil().max(1.0) as usize;
        (n, self.sample_interval / n as f64)
    }

    /// Copy with the sampling interval replaced.
    pub fn with_sample_interval(mut self, dt: f64) -> Self {
        self.sample_interval = dt;
        self
    }
}

/// One floor contact during a drop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Impact {
    pub time: f64,
    /// Downward speed just before contact.
    pub speed_in: f64,
    /// Upward speed just after contact; zero once the ball comes to rest.
    pub speed_out: f64,
}

/// A drop trajectory together with the impacts that produced it.
#[derive(Debug, Clone)]
pub struct DropRun {
    pub trajectory: Trajectory,
    pub impacts: Vec<Impact>,
}

/// Classic RK4 step for `x' = v, v' = accel(v)`.
fn rk4<F: Fn(f64) -> f64>(x: f64, v: f64, h: f64, accel: &F) -> (f64, f64) {
    let (k1x, k1v) = (v, accel(v));
    let v2 = v + 0.5 * h * k1v;
    let (k2x, k2v) = (v2, accel(v2));
    let v3 = v + 0.5 * h * k2v;
    let (k3x, k3v) = (v3, accel(v3));
    let v4 = v + h * k3v;
    let (k4x, k4v) = (v4, accel(v4));
    (
        x + h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Finds the first time in `(0, span]` where `still_before(tau)` turns false,
/// assuming it holds near 0 and fails at `span`.
fn bisect_event<P: Fn(f64) -> bool>(span: f64, still_before: P) -> f64 {
    let (mut lo, mut hi) = (0.0, span);
    while hi - lo > EVENT_TIME_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if still_before(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn check_common(params: &ContactParams, spec: &BallSpec, cfg: &SimConfig, n_samples: usize) -> Result<()> {
    params.validate()?;
    spec.validate()?;
    cfg.validate()?;
    if n_samples < 2 {
        return Err(invalid(format!("need at least 2 samples, got {n_samples}")));
    }
    Ok(())
}

/// Simulates a ball released at rest from height `h0`.
pub fn simulate_drop(
    params: &ContactParams,
    spec: &BallSpec,
    h0: f64,
    cfg: &SimConfig,
    n_samples: usize,
) -> Result<Trajectory> {
    simulate_drop_detailed(params, spec, h0, cfg, n_samples).map(|run| run.trajectory)
}

/// [`simulate_drop`], also returning the impact log.
pub fn simulate_drop_detailed(
    params: &ContactParams,
    spec: &BallSpec,
    h0: f64,
    cfg: &SimConfig,
    n_samples: usize,
) -> Result<DropRun> {
    check_common(params, spec, cfg, n_samples)?;
    ensure_finite("h0", h0)?;
    if h0 <= 0.0 {
        return Err(invalid(format!("drop height must be positive, got {h0}")));
    }

    let g = cfg.gravity;
    let damping = params.linear_damping;
    let accel = |v: f64| -g - damping * v;
    let (substeps, h) = cfg.substeps();

    let mut values = Vec::with_capacity(n_samples);
    let mut impacts = Vec::new();
    let (mut y, mut v) = (h0, 0.0);
    let mut resting = false;
    values.push(h0);

    for sample in 1..n_samples {
        for step in 0..substeps {
            if resting {
                break;
            }
            let step_start = (sample - 1) as f64 * cfg.sample_interval + step as f64 * h;
            let mut remaining = h;
            while remaining > 0.0 {
                let (y1, v1) = rk4(y, v, remaining, &accel);
                if y1 > 0.0 {
                    y = y1;
                    v = v1;
                    break;
                }
                let tau = bisect_event(remaining, |s| rk4(y, v, s, &accel).0 > 0.0);
                let (_, v_impact) = rk4(y, v, tau, &accel);
                let speed_in = -v_impact;
                let speed_out = params.restitution * speed_in;
                remaining -= tau;
                let time = step_start + (h - remaining);
                y = 0.0;
                if speed_out < cfg.bounce_cutoff_speed {
                    impacts.push(Impact { time, speed_in, speed_out: 0.0 });
                    v = 0.0;
                    resting = true;
                    break;
                }
                impacts.push(Impact { time, speed_in, speed_out });
                v = speed_out;
            }
        }
        values.push(if resting { 0.0 } else { y });
    }

    let trajectory = Trajectory::new(TrajectoryKind::DropHeight, cfg.sample_interval, values)?;
    Ok(DropRun { trajectory, impacts })
}

/// Simulates a ball launched along the floor at speed `v0`.
pub fn simulate_roll(
    params: &ContactParams,
    spec: &BallSpec,
    v0: f64,
    cfg: &SimConfig,
    n_samples: usize,
) -> Result<Trajectory> {
    check_common(params, spec, cfg, n_samples)?;
    ensure_finite("v0", v0)?;
    if v0 < 0.0 {
        return Err(invalid(format!("roll speed must be non-negative, got {v0}")));
    }

    let kappa = spec.rolling_inertia();
    let coulomb = params.dynamic_friction * cfg.gravity;
    let viscous = params.linear_damping + spec.inertia_factor * params.angular_damping;
    let accel = |v: f64| -(coulomb + viscous * v) / kappa;
    let stop = cfg.roll_stop_speed;
    let (substeps, h) = cfg.substeps();

    let mut values = Vec::with_capacity(n_samples);
    let (mut x, mut v) = (0.0, v0);
    let mut stopped = v0 <= stop;
    values.push(0.0);

    for _ in 1..n_samples {
        for _ in 0..substeps {
            if stopped {
                break;
            }
            let (x1, v1) = rk4(x, v, h, &accel);
            if v1 > stop {
                x = x1;
                v = v1;
                continue;
            }
            let tau = bisect_event(h, |s| rk4(x, v, s, &accel).1 > stop);
            x = rk4(x, v, tau, &accel).0;
            v = 0.0;
            stopped = true;
        }
        values.push(x);
    }

    Trajectory::new(TrajectoryKind::RollDisplacement, cfg.sample_interval, values)
}
