use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Term {
    AnchorPos,
    AnchorOri,
    BodyPos,
    BodyOri,
    LinVel,
    AngVel,
    FootPos,
    BallProx,
    Contact,
    SideKick,
    VelAlign,
    Speed,
    ZSpeed,
    ActionRate,
    JointLimit,
    UndesiredContact,
    FootSep,
    WaistRate,
    Upright,
}

impl Term {
    pub const ALL: [Term; 19] = [
        Term::AnchorPos,
        Term::AnchorOri,
        Term::BodyPos,
        Term::BodyOri,
        Term::LinVel,
        Term::AngVel,
        Term::FootPos,
        Term::BallProx,
        Term::Contact,
        Term::SideKick,
        Term::VelAlign,
        Term::Speed,
        Term::ZSpeed,
        Term::ActionRate,
        Term::JointLimit,
        Term::UndesiredContact,
        Term::FootSep,
        Term::WaistRate,
        Term::Upright,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::AnchorPos => "anchor-pos",
            Term::AnchorOri => "anchor-ori",
            Term::BodyPos => "body-pos",
            Term::BodyOri => "body-ori",
            Term::LinVel => "lin-vel",
            Term::AngVel => "ang-vel",
            Term::FootPos => "foot-pos",
            Term::BallProx => "ball-prox",
            Term::Contact => "contact",
            Term::SideKick => "side-kick",
            Term::VelAlign => "vel-align",
            Term::Speed => "speed",
            Term::ZSpeed => "z-speed",
            Term::ActionRate => "action-rate",
            Term::JointLimit => "joint-limit",
            Term::UndesiredContact => "undesired-contact",
            Term::FootSep => "foot-sep",
            Term::WaistRate => "waist-rate",
            Term::Upright => "upright",
        }
    }

    /// Terms that read `StateFrame::ball` or the kick event.
    pub fn needs_ball(self) -> bool {
        matches!(
            self,
            Term::BallProx | Term::Contact | Term::VelAlign | Term::Speed | Term::ZSpeed
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    #[serde(rename = "I")]
    I,
    #[serde(rename = "II")]
    II,
}

/// Weights per stage (`None` = inactive in that stage) and kernel width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermSpec {
    pub weight_stage1: Option<f64>,
    pub weight_stage2: Option<f64>,
    pub sigma: f64,
}

/// The reward stack and its shaping constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardSpec {
    pub terms: BTreeMap<Term, TermSpec>,
    /// Length of the outcome-shaping window after first contact, s.
    pub outcome_window: f64,
    /// Minimum ball speed for outcome shaping, m/s.
    pub min_speed_threshold: f64,
    /// Planar ball speed at which the speed term saturates, m/s.
    pub speed_target: f64,
    /// Foot separation at which the foot-sep term saturates, m.
    pub foot_sep_target: f64,
}

impl Default for RewardSpec {
    fn default() -> Self {
        use Term::*;
        let rows: [(Term, Option<f64>, Option<f64>); 19] = [
            (AnchorPos, Some(1.0), None),
            (AnchorOri, Some(1.0), Some(0.5)),
            (BodyPos, Some(1.0), Some(0.8)),
            (BodyOri, Some(1.0), Some(0.8)),
            (LinVel, Some(1.0), Some(0.8)),
            (AngVel, Some(1.0), Some(0.8)),
            (FootPos, None, Some(1.0)),
            (BallProx, None, Some(1.0)),
            (Contact, None, Some(50.0)),
            (SideKick, None, Some(50.0)),
            (VelAlign, None, Some(30.0)),
            (Speed, None, Some(10.0)),
            (ZSpeed, None, Some(-0.2)),
            (ActionRate, Some(-0.1), Some(-0.1)),
            (JointLimit, Some(-10.0), Some(-10.0)),
            (UndesiredContact, Some(-0.1), Some(-0.1)),
            (FootSep, None, Some(0.2)),
            (WaistRate, None, Some(-0.25)),
            (Upright, None, Some(-1.0)),
        ];
        Self {
            terms: rows
                .into_iter()
                .map(|(t, w1, w2)| {
                    (
                        t,
                        TermSpec {
                            weight_stage1: w1,
                            weight_stage2: w2,
                            sigma: 0.5,
                        },
                    )
                })
                .collect(),
            outcome_window: 0.5,
            min_speed_threshold: 0.2,
            speed_target: 5.0,
            foot_sep_target: 0.2,
        }
    }
}

impl RewardSpec {
    pub fn weight(&self, term: Term, stage: Stage) -> Option<f64> {
        self.terms.get(&term).and_then(|t| match stage {
            Stage::I => t.weight_stage1,
            Stage::II => t.weight_stage2,
        })
    }

    pub fn sigma(&self, term: Term) -> f64 {
        self.terms.get(&term).map_or(0.5, |t| t.sigma)
    }

    /// Terms with a weight in `stage`, in canonical order.
    pub fn active_terms(&self, stage: Stage) -> Vec<Term> {
        Term::ALL
            .into_iter()
            .filter(|t| self.weight(*t, stage).is_some())
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        for (term, ts) in &self.terms {
            if !(ts.sigma.is_finite() && ts.sigma > 0.0) {
                return Err(invalid(format!("{}: sigma must be positive", term.name())));
            }
            if ts.weight_stage1.iter().chain(&ts.weight_stage2).any(|w| !w.is_finite()) {
                return Err(invalid(format!("{}: weights must be finite", term.name())));
            }
        }
        if self.active_terms(Stage::I).iter().any(|t| t.needs_ball()) {
            return Err(invalid("ball-dependent terms cannot be weighted in Stage I"));
        }
        for (name, v) in [
            ("outcome_window", self.outcome_window),
            ("speed_target", self.speed_target),
            ("foot_sep_target", self.foot_sep_target),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.min_speed_threshold.is_finite() && self.min_speed_threshold >= 0.0) {
            return Err(invalid("min_speed_threshold must be non-negative"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_one_tracking_weights_sum_to_six() {
        let spec = RewardSpec::default();
        let sum: f64 = spec
            .active_terms(Stage::I)
            .into_iter()
            .filter_map(|t| spec.weight(t, Stage::I))
            .filter(|w| *w > 0.0)
            .sum();
        assert_eq!(sum, 6.0);
        assert_eq!(spec.active_terms(Stage::I).len(), 9);
        assert_eq!(spec.active_terms(Stage::II).len(), 18);
        assert_eq!(spec.weight(Term::Contact, Stage::II), Some(50.0));
        assert_eq!(spec.weight(Term::AnchorPos, Stage::II), None);
        spec.validate().unwrap();
    }

    #[test]
    fn rejects_ball_terms_in_stage_one() {
        let mut spec = RewardSpec::default();
        spec.terms.get_mut(&Term::BallProx).unwrap().weight_stage1 = Some(1.0);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn serde_uses_table_names() {
        let json = serde_json::to_string(&RewardSpec::default()).unwrap();
        assert!(json.contains("\"undesired-contact\""));
        let back: RewardSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RewardSpec::default());
    }
}
