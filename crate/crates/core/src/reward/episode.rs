use serde::{Deserialize, Serialize};

use super::spec::{RewardSpec, Stage, Term};
use super::{BallFrame, ContactFoot, Leg, StateFrame};
use crate::error::{ensure_finite, invalid, Error, Result};

/// `exp(-error_sq / sigma^2)`.
pub fn tracking_kernel(error_sq: f64, sigma: f64) -> Result<f64> {
    ensure_finite("error_sq", error_sq)?;
    ensure_finite("sigma", sigma)?;
    if sigma <= 0.0 {
        return Err(invalid(format!("kernel sigma must be positive, got {sigma}")));
    }
    if error_sq < 0.0 {
        return Err(invalid(format!("squared error must be non-negative, got {error_sq}")));
    }
    Ok((-error_sq / (sigma * sigma)).exp())
}

/// Episode-level kick state: first contact, the frozen proximity value and
/// the outcome-shaping target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KickEvent {
    pub contact_foot: ContactFoot,
    pub labeled_leg: Leg,
    pub first_contact_step: Option<usize>,
    pub first_contact_time: Option<f64>,
    /// Most recent ball velocity observed at or after first contact, m/s.
    pub ball_velocity_after: [f64; 3],
    pub target_direction: [f64; 3],
    pub min_speed_threshold: f64,
    frozen_ball_prox: Option<f64>,
    last_ball_prox: Option<f64>,
}

impl KickEvent {
    /// `target_direction` is normalised; it must be nonzero.
    pub fn new(labeled_leg: Leg, target_direction: [f64; 3], min_speed_threshold: f64) -> Result<Self> {
        for v in target_direction {
            ensure_finite("target_direction", v)?;
        }
        let norm = norm3(target_direction);
        if norm == 0.0 {
            return Err(invalid("target direction must be nonzero"));
        }
        if !(min_speed_threshold.is_finite() && min_speed_threshold >= 0.0) {
            return Err(invalid("min_speed_threshold must be non-negative"));
        }
        Ok(Self {
            contact_foot: ContactFoot::None,
            labeled_leg,
            first_contact_step: None,
            first_contact_time: None,
            ball_velocity_after: [0.0; 3],
            target_direction: target_direction.map(|c| c / norm),
            min_speed_threshold,
            frozen_ball_prox: None,
            last_ball_prox: None,
        })
    }

    pub fn has_contact(&self) -> bool {
        self.first_contact_step.is_some()
    }

    pub fn correct_foot(&self) -> bool {
        self.labeled_leg.matches(self.contact_foot)
    }

    /// Proximity value held after first contact.
    pub fn frozen_ball_prox(&self) -> Option<f64> {
        self.frozen_ball_prox
    }

    /// Advance the episode state with `frame`. Frames without ball data
    /// leave the event untouched.
    pub fn observe(&mut self, frame: &StateFrame, spec: &RewardSpec) -> Result<()> {
        let Some(ball) = &frame.ball else {
            return Ok(());
        };
        validate_ball(ball)?;
        let prox = tracking_kernel(ball.distance_xy * ball.distance_xy, spec.sigma(Term::BallProx))?;
        if self.first_contact_step.is_none() {
            if ball.contact == ContactFoot::None {
                self.last_ball_prox = Some(prox);
            } else {
                self.contact_foot = ball.contact;
                self.first_contact_step = Some(frame.step);
                self.first_contact_time = Some(frame.time);
                self.frozen_ball_prox = Some(self.last_ball_prox.unwrap_or(prox));
            }
        }
        if self.first_contact_step.is_some() {
            self.ball_velocity_after = ball.velocity;
        }
        Ok(())
    }

    fn outcome_active(&self, frame: &StateFrame, ball: &BallFrame, window: f64) -> bool {
        let (Some(step), Some(t0)) = (self.first_contact_step, self.first_contact_time) else {
            return false;
        };
        self.correct_foot()
            && frame.step >= step
            && frame.time - t0 <= window
            && norm3(ball.velocity) > self.min_speed_threshold
    }
}

/// One term's unweighted value and its contribution to the total.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermValue {
    pub term: Term,
    pub value: f64,
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepReward {
    pub step: usize,
    pub time: f64,
    /// Active terms in canonical order.
    pub terms: Vec<TermValue>,
    pub total: f64,
}

impl StepReward {
    pub fn get(&self, term: Term) -> Option<&TermValue> {
        self.terms.iter().find(|t| t.term == term)
    }
}

/// Score one frame against an event that has already observed it.
pub fn evaluate_step(
    frame: &StateFrame,
    event: &KickEvent,
    spec: &RewardSpec,
    stage: Stage,
) -> Result<StepReward> {
    validate_frame(frame)?;
    let ball = match stage {
        Stage::I => None,
        Stage::II => Some(frame.ball.as_ref().ok_or_else(|| {
            invalid(format!("step {}: Stage II frame has no ball state", frame.step))
        })?),
    };
    let mut terms = Vec::new();
    let mut total = 0.0;
    for term in spec.active_terms(stage) {
        let weight = spec.weight(term, stage).unwrap_or(0.0);
        let value = term_value(term, frame, ball, event, spec)?;
        let weighted = weight * value;
        total += weighted;
        terms.push(TermValue { term, value, weighted });
    }
    Ok(StepReward {
        step: frame.step,
        time: frame.time,
        terms,
        total,
    })
}

fn term_value(
    term: Term,
    frame: &StateFrame,
    ball: Option<&BallFrame>,
    event: &KickEvent,
    spec: &RewardSpec,
) -> Result<f64> {
    let sigma = spec.sigma(term);
    let ball = || ball.ok_or_else(|| invalid(format!("{} needs ball state", term.name())));
    let pre_contact = event.first_contact_step.is_none_or(|s| frame.step < s);
    Ok(match term {
        Term::AnchorPos => tracking_kernel(frame.anchor_pos_err_sq, sigma)?,
        Term::AnchorOri => tracking_kernel(frame.anchor_ori_err_sq, sigma)?,
        Term::BodyPos => tracking_kernel(mean(&frame.body_pos_err_sq), sigma)?,
        Term::BodyOri => tracking_kernel(mean(&frame.body_ori_err_sq), sigma)?,
        Term::LinVel => tracking_kernel(frame.lin_vel_err_sq, sigma)?,
        Term::AngVel => tracking_kernel(frame.ang_vel_err_sq, sigma)?,
        Term::FootPos => tracking_kernel(frame.foot_pos_err_sq, sigma)?,
        Term::BallProx => {
            let b = ball()?;
            match event.frozen_ball_prox {
                Some(v) if !pre_contact => v,
                _ => tracking_kernel(b.distance_xy * b.distance_xy, sigma)?,
            }
        }
        Term::Contact => {
            ball()?;
            let fires = event.first_contact_step == Some(frame.step) && event.correct_foot();
            if fires {
                1.0
            } else {
                0.0
            }
        }
        Term::SideKick => {
            if pre_contact {
                planar_cosine(frame.swing_foot_velocity, event.labeled_leg.lateral_direction())
                    .map_or(0.0, |c| c.max(0.0))
            } else {
                0.0
            }
        }
        Term::VelAlign | Term::Speed | Term::ZSpeed => {
            let b = ball()?;
            if !event.outcome_active(frame, b, spec.outcome_window) {
                0.0
            } else {
                let v = b.velocity;
                match term {
                    Term::VelAlign => {
                        let d = event.target_direction;
                        planar_cosine([v[0], v[1]], [d[0], d[1]]).unwrap_or(0.0)
                    }
                    Term::Speed => (v[0].hypot(v[1]) / spec.speed_target).min(1.0),
                    _ => v[2].max(0.0),
                }
            }
        }
        Term::ActionRate => {
            if frame.action.len() != frame.prev_action.len() {
                return Err(invalid(format!(
                    "step {}: action has {} entries, previous action {}",
                    frame.step,
                    frame.action.len(),
                    frame.prev_action.len()
                )));
            }
            frame
                .action
                .iter()
                .zip(&frame.prev_action)
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        }
        Term::JointLimit => f64::from(frame.joint_limit_violations),
        Term::UndesiredContact => f64::from(frame.undesired_contacts),
        Term::FootSep => (frame.foot_separation / spec.foot_sep_target).min(1.0),
        Term::WaistRate => frame.waist_action_delta * frame.waist_action_delta,
        Term::Upright => {
            let g = frame.projected_gravity;
            g[0] * g[0] + g[1] * g[1]
        }
    })
}

/// Stateful scorer for a sequence of frames from one episode.
#[derive(Debug, Clone)]
pub struct EpisodeScorer {
    spec: RewardSpec,
    stage: Stage,
    event: KickEvent,
    last_step: Option<usize>,
}

impl EpisodeScorer {
    pub fn new(spec: RewardSpec, stage: Stage, event: KickEvent) -> Result<Self> {
        spec.validate()?;
        Ok(Self {
            spec,
            stage,
            event,
            last_step: None,
        })
    }

    pub fn event(&self) -> &KickEvent {
        &self.event
    }

    /// Frames must arrive in strictly increasing step order.
    pub fn score(&mut self, frame: &StateFrame) -> Result<StepReward> {
        if self.last_step.is_some_and(|s| frame.step <= s) {
            return Err(invalid(format!("step {} is not after the previous frame", frame.step)));
        }
        if self.stage == Stage::II {
            self.event.observe(frame, &self.spec)?;
        }
        let reward = evaluate_step(frame, &self.event, &self.spec, self.stage)?;
        self.last_step = Some(frame.step);
        Ok(reward)
    }

    pub fn score_all(&mut self, frames: &[StateFrame]) -> Result<Vec<StepReward>> {
        if frames.is_empty() {
            return Err(invalid("trace has no frames"));
        }
        frames.iter().map(|f| self.score(f)).collect()
    }
}

fn validate_frame(frame: &StateFrame) -> Result<()> {
    ensure_finite("time", frame.time)?;
    let errors = [
        ("anchor_pos_err_sq", frame.anchor_pos_err_sq),
        ("anchor_ori_err_sq", frame.anchor_ori_err_sq),
        ("lin_vel_err_sq", frame.lin_vel_err_sq),
        ("ang_vel_err_sq", frame.ang_vel_err_sq),
        ("foot_pos_err_sq", frame.foot_pos_err_sq),
        ("foot_separation", frame.foot_separation),
    ];
    let lists = frame.body_pos_err_sq.iter().chain(&frame.body_ori_err_sq);
    for (name, v) in errors.into_iter().chain(lists.map(|v| ("body error", *v))) {
        ensure_finite(name, v)?;
        if v < 0.0 {
            return Err(invalid(format!("step {}: {name} must be non-negative", frame.step)));
        }
    }
    let others = frame
        .action
        .iter()
        .chain(&frame.prev_action)
        .chain(&frame.projected_gravity)
        .chain(&frame.swing_foot_velocity)
        .chain(std::iter::once(&frame.waist_action_delta));
    for v in others {
        ensure_finite("frame value", *v)?;
    }
    Ok(())
}

fn validate_ball(ball: &BallFrame) -> Result<()> {
    ensure_finite("ball distance", ball.distance_xy)?;
    if ball.distance_xy < 0.0 {
        return Err(invalid("ball distance must be non-negative"));
    }
    for v in ball.velocity {
        ensure_finite("ball velocity", v)?;
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

fn norm3(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Cosine between two planar vectors; `UndefinedMetric` if either is zero.
pub(crate) fn planar_cosine(a: [f64; 2], b: [f64; 2]) -> Result<f64> {
    let na = a[0].hypot(a[1]);
    let nb = b[0].hypot(b[1]);
    if na == 0.0 || nb == 0.0 {
        return Err(Error::UndefinedMetric("zero-length planar vector".into()));
    }
    Ok(((a[0] * b[0] + a[1] * b[1]) / (na * nb)).clamp(-1.0, 1.0))
}
