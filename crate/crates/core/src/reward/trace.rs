//! State-trace CSV: one frame per row. List-valued columns
//! (`body_pos_err_sq`, `body_ori_err_sq`, `action`, `prev_action`) join
//! their entries with `;`. The `ball_*` columns are left empty on frames
//! without ball data; `ball_contact` is `none`, `left` or `right`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::episode::StepReward;
use super::spec::Term;
use super::{BallFrame, ContactFoot, StateFrame};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    step: usize,
    time: f64,
    anchor_pos_err_sq: f64,
    anchor_ori_err_sq: f64,
    body_pos_err_sq: String,
    body_ori_err_sq: String,
    lin_vel_err_sq: f64,
    ang_vel_err_sq: f64,
    foot_pos_err_sq: f64,
    action: String,
    prev_action: String,
    joint_limit_violations: u32,
    undesired_contacts: u32,
    gravity_x: f64,
    gravity_y: f64,
    gravity_z: f64,
    foot_separation: f64,
    waist_action_delta: f64,
    swing_foot_vx: f64,
    swing_foot_vy: f64,
    ball_distance_xy: Option<f64>,
    ball_vx: Option<f64>,
    ball_vy: Option<f64>,
    ball_vz: Option<f64>,
    ball_contact: Option<ContactFoot>,
}

fn join(values: &[f64]) -> String {
    values.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn split(field: &str, name: &str, row: usize) -> Result<Vec<f64>> {
    if field.trim().is_empty() {
        return Ok(Vec::new());
    }
    field
        .split(';')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad {name} entry {s:?}")))
        })
        .collect()
}

impl Row {
    fn from_frame(f: &StateFrame) -> Self {
        let b = f.ball.as_ref();
        Self {
            step: f.step,
            time: f.time,
            anchor_pos_err_sq: f.anchor_pos_err_sq,
            anchor_ori_err_sq: f.anchor_ori_err_sq,
            body_pos_err_sq: join(&f.body_pos_err_sq),
            body_ori_err_sq: join(&f.body_ori_err_sq),
            lin_vel_err_sq: f.lin_vel_err_sq,
            ang_vel_err_sq: f.ang_vel_err_sq,
            foot_pos_err_sq: f.foot_pos_err_sq,
            action: join(&f.action),
            prev_action: join(&f.prev_action),
            joint_limit_violations: f.joint_limit_violations,
            undesired_contacts: f.undesired_contacts,
            gravity_x: f.projected_gravity[0],
            gravity_y: f.projected_gravity[1],
            gravity_z: f.projected_gravity[2],
            foot_separation: f.foot_separation,
            waist_action_delta: f.waist_action_delta,
            swing_foot_vx: f.swing_foot_velocity[0],
            swing_foot_vy: f.swing_foot_velocity[1],
            ball_distance_xy: b.map(|b| b.distance_xy),
            ball_vx: b.map(|b| b.velocity[0]),
            ball_vy: b.map(|b| b.velocity[1]),
            ball_vz: b.map(|b| b.velocity[2]),
            ball_contact: b.map(|b| b.contact),
        }
    }

    fn into_frame(self, row: usize) -> Result<StateFrame> {
        let ball = match (
            self.ball_distance_xy,
            self.ball_vx,
            self.ball_vy,
            self.ball_vz,
            self.ball_contact,
        ) {
            (None, None, None, None, None) => None,
            (Some(d), Some(vx), Some(vy), Some(vz), c) => Some(BallFrame {
                distance_xy: d,
                velocity: [vx, vy, vz],
                contact: c.unwrap_or_default(),
            }),
            _ => {
                return Err(Error::Parse(format!("row {row}: ball columns are partially filled")))
            }
        };
        Ok(StateFrame {
            step: self.step,
            time: self.time,
            anchor_pos_err_sq: self.anchor_pos_err_sq,
            anchor_ori_err_sq: self.anchor_ori_err_sq,
            body_pos_err_sq: split(&self.body_pos_err_sq, "body_pos_err_sq", row)?,
            body_ori_err_sq: split(&self.body_ori_err_sq, "body_ori_err_sq", row)?,
            lin_vel_err_sq: self.lin_vel_err_sq,
            ang_vel_err_sq: self.ang_vel_err_sq,
            foot_pos_err_sq: self.foot_pos_err_sq,
            action: split(&self.action, "action", row)?,
            prev_action: split(&self.prev_action, "prev_action", row)?,
            joint_limit_violations: self.joint_limit_violations,
            undesired_contacts: self.undesired_contacts,
            projected_gravity: [self.gravity_x, self.gravity_y, self.gravity_z],
            foot_separation: self.foot_separation,
            waist_action_delta: self.waist_action_delta,
            swing_foot_velocity: [self.swing_foot_vx, self.swing_foot_vy],
            ball,
        })
    }
}

/// Parse a state trace. An empty trace is an error.
pub fn read_trace<R: Read>(reader: R) -> Result<Vec<StateFrame>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut frames = Vec::new();
    for (i, row) in r.deserialize::<Row>().enumerate() {
        frames.push(row?.into_frame(i + 1)?);
    }
    if frames.is_empty() {
        return Err(Error::Parse("trace has no frames".into()));
    }
    Ok(frames)
}

pub fn write_trace<W: Write>(frames: &[StateFrame], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for f in frames {
        w.serialize(Row::from_frame(f))?;
    }
    w.flush()?;
    Ok(())
}

/// Write weighted per-term contributions: `step,time,<term>...,total`.
/// Terms inactive in the scored stage are omitted.
pub fn write_rewards<W: Write>(rewards: &[StepReward], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let terms: Vec<Term> = rewards
        .first()
        .map(|r| r.terms.iter().map(|t| t.term).collect())
        .unwrap_or_default();
    let mut header = vec!["step".to_string(), "time".to_string()];
    header.extend(terms.iter().map(|t| t.name().to_string()));
    header.push("total".into());
    w.write_record(&header)?;
    for r in rewards {
        if r.terms.len() != terms.len() || r.terms.iter().zip(&terms).any(|(a, b)| a.term != *b) {
            return Err(Error::InvalidInput(format!("step {}: term set differs", r.step)));
        }
        let mut rec = vec![r.step.to_string(), r.time.to_string()];
        rec.extend(r.terms.iter().map(|t| t.weighted.to_string()));
        rec.push(r.total.to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
