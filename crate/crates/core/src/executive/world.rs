//! The executive's complete persistent state and the pure event reducer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::event::{Event, EventBody, Telemetry};
use super::log::to_fixed_json;
use super::safety::Violation;
use crate::planner::{Goal, GoalStatus, Plan, StepStatus};
use crate::stores::{AssessmentRecord, BehaviorEntry, Binding, Fact, Stores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    #[default]
    Idle,
    Executing,
    SafetyHold,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExecutiveState {
    pub mode: Mode,
    pub active_goal: Option<u64>,
    pub active_plan: Option<Plan>,
    pub active_step: Option<usize>,
    pub sim_clock: f64,
    pub tick_count: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ApplyError {
    #[error("event {seq} is out of order (expected {expected})")]
    OutOfOrder { seq: u64, expected: u64 },
    #[error("event {seq} refers to unknown goal {goal_id}")]
    UnknownGoal { seq: u64, goal_id: u64 },
    #[error("event {seq}: {message}")]
    Inconsistent { seq: u64, message: String },
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct World {
    pub stores: Stores,
    pub exec: ExecutiveState,
    pub goals: BTreeMap<u64, Goal>,
    /// Operator plans waiting for their goal to become active.
    pub overrides: BTreeMap<u64, Plan>,
    pub violations: Vec<Violation>,
    pub telemetry: Option<Telemetry>,
    /// Plans adopted so far per goal.
    pub plan_counts: BTreeMap<u64, u32>,
    pub next_seq: u64,
}

/// Everything the digest covers, in a fixed serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldDump {
    pub behaviors: Vec<BehaviorEntry>,
    pub beliefs: Vec<Fact>,
    pub bindings: Vec<Binding>,
    pub assessments: Vec<AssessmentRecord>,
    pub executive: ExecutiveState,
    pub goals: Vec<Goal>,
    pub overrides: Vec<Plan>,
    pub violations: Vec<Violation>,
    pub telemetry: Option<Telemetry>,
    pub plan_counts: Vec<(u64, u32)>,
}

impl World {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dump(&self) -> WorldDump {
        let stores = self.stores.dump();
        WorldDump {
            behaviors: stores.behaviors,
            beliefs: stores.beliefs,
            bindings: stores.bindings,
            assessments: stores.assessments,
            executive: self.exec.clone(),
            goals: self.goals.values().cloned().collect(),
            overrides: self.overrides.values().cloned().collect(),
            violations: self.violations.clone(),
            telemetry: self.telemetry.clone(),
            plan_counts: self.plan_counts.iter().map(|(k, v)| (*k, *v)).collect(),
        }
    }

    /// SHA-256 of the canonical dump, hex encoded.
    pub fn digest(&self) -> String {
        let text = to_fixed_json(&self.dump()).expect("world dumps serialize");
        hex::encode(Sha256::digest(text.as_bytes()))
    }

    pub fn open_goals(&self) -> impl Iterator<Item = &Goal> {
        self.goals.values().filter(|g| g.is_open())
    }

    fn goal_mut(&mut self, seq: u64, id: u64) -> Result<&mut Goal, ApplyError> {
        self.goals
            .get_mut(&id)
            .ok_or(ApplyError::UnknownGoal { seq, goal_id: id })
    }

    fn close_goal(&mut self, seq: u64, id: u64, status: GoalStatus) -> Result<(), ApplyError> {
        self.goal_mut(seq, id)?.status = status;
        self.overrides.remove(&id);
        if self.exec.active_goal == Some(id) {
            self.exec.active_goal = None;
            self.exec.active_plan = None;
            self.exec.active_step = None;
            self.exec.mode = Mode::Idle;
        }
        Ok(())
    }

    fn step_status(&mut self, seq: u64, step: usize, status: StepStatus) -> Result<(), ApplyError> {
        let plan = self.exec.active_plan.as_mut().ok_or_else(|| ApplyError::Inconsistent {
            seq,
            message: "behavior event without an active plan".into(),
        })?;
        let s = plan.steps.get_mut(step).ok_or_else(|| ApplyError::Inconsistent {
            seq,
            message: format!("step {step} outside the active plan"),
        })?;
        s.status = status;
        Ok(())
    }

    fn finish_step(
        &mut self,
        seq: u64,
        step: usize,
        status: StepStatus,
        assessment: &Option<AssessmentRecord>,
    ) -> Result<(), ApplyError> {
        self.step_status(seq, step, status)?;
        self.exec.active_step = None;
        if let Some(rec) = assessment {
            self.stores.assessments.record_outcome(rec.clone());
        }
        Ok(())
    }

    /// Folds one event into the world. Pure: consults nothing but the event.
    pub fn apply(&mut self, event: &Event) -> Result<(), ApplyError> {
        let seq = event.seq;
        if seq != self.next_seq {
            return Err(ApplyError::OutOfOrder {
                seq,
                expected: self.next_seq,
            });
        }
        match &event.body {
            EventBody::Tick { tick, vehicle } => {
                self.exec.tick_count = *tick;
                self.telemetry = Some(vehicle.clone());
            }
            EventBody::GoalInjected { goal } => {
                self.goals.insert(goal.id, goal.clone());
            }
            EventBody::GoalAchieved { goal_id } => self.close_goal(seq, *goal_id, GoalStatus::Achieved)?,
            EventBody::GoalAbandoned { goal_id, .. } => self.close_goal(seq, *goal_id, GoalStatus::Abandoned)?,
            EventBody::PlanCreated { plan } => {
                let id = plan.goal_id;
                self.goal_mut(seq, id)?.status = GoalStatus::Active;
                self.overrides.remove(&id);
                *self.plan_counts.entry(id).or_default() += 1;
                self.exec.active_goal = Some(id);
                self.exec.active_plan = Some(plan.clone());
                self.exec.active_step = None;
                self.exec.mode = Mode::Executing;
            }
            EventBody::PlanOverridden { plan, .. } => {
                let id = plan.goal_id;
                self.goal_mut(seq, id)?;
                if self.exec.active_goal == Some(id) && self.exec.mode == Mode::Executing {
                    self.exec.active_plan = Some(plan.clone());
                    self.exec.active_step = None;
                } else {
                    self.overrides.insert(id, plan.clone());
                }
            }
            EventBody::PlanInvalidated { goal_id, .. } => {
                if self.exec.active_goal == Some(*goal_id) {
                    self.exec.active_plan = None;
                    self.exec.active_step = None;
                }
            }
            EventBody::BehaviorStarted { behavior } => {
                if behavior.is_step() {
                    self.step_status(seq, behavior.step, StepStatus::Running)?;
                    self.exec.active_step = Some(behavior.step);
                }
            }
            EventBody::BehaviorDone { behavior, assessment } => {
                if behavior.is_step() {
                    self.finish_step(seq, behavior.step, StepStatus::Done, assessment)?;
                }
            }
            EventBody::BehaviorFailed { behavior, assessment, .. }
            | EventBody::BehaviorHalted { behavior, assessment, .. } => {
                if behavior.is_step() {
                    self.finish_step(seq, behavior.step, StepStatus::Failed, assessment)?;
                }
            }
            EventBody::FactAsserted { fact } => {
                self.stores
                    .beliefs
                    .assert_fact(fact.atom.clone(), fact.truth, fact.provenance, fact.timestamp);
            }
            EventBody::MismatchDetected { .. } => {}
            EventBody::SafetyViolation { active, .. } | EventBody::SafetyCleared { active } => {
                self.violations = active.clone();
            }
            EventBody::SafetyHold { goal_id, .. } => {
                self.goal_mut(seq, *goal_id)?.status = GoalStatus::Active;
                self.exec.active_goal = Some(*goal_id);
                self.exec.active_plan = None;
                self.exec.active_step = None;
                self.exec.mode = Mode::SafetyHold;
            }
            EventBody::BindingChanged { binding } => self.stores.numerics.restore(binding.clone()),
            EventBody::BehaviorRegistered { entry } => self.stores.behaviors.restore(entry.clone()),
            EventBody::BehaviorReplaced {
                name,
                version,
                implementation,
            } => {
                if !self
                    .stores
                    .behaviors
                    .restore_implementation(name, implementation.clone(), *version)
                {
                    return Err(ApplyError::Inconsistent {
                        seq,
                        message: format!("replacement of unknown behavior {name}"),
                    });
                }
            }
            EventBody::AcousticLink { .. } | EventBody::Warning { .. } => {}
        }
        self.exec.sim_clock = event.t;
        self.next_seq = seq + 1;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::{GoalSource, PlanProvenance, PlanStep, Priority};
    use crate::stores::Provenance;

    fn ev(seq: u64, t: f64, body: EventBody) -> Event {
        Event { seq, t, body }
    }

    fn goal(id: u64) -> Goal {
        Goal {
            id,
            condition: "did_survey(zone_a)".parse().unwrap(),
            priority: Priority::Operator,
            source: GoalSource::Operator,
            injected_at: 0.0,
            status: GoalStatus::Pending,
        }
    }

    #[test]
    fn plan_lifecycle() {
        let mut w = World::new();
        w.apply(&ev(0, 0.0, EventBody::GoalInjected { goal: goal(0) })).unwrap();
        let plan = Plan {
            goal_id: 0,
            steps: vec![PlanStep::parse("descend()").unwrap()],
            created_at: 0.0,
            provenance: PlanProvenance::Planned,
        };
        w.apply(&ev(1, 1.0, EventBody::PlanCreated { plan })).unwrap();
        assert_eq!(w.exec.mode, Mode::Executing);
        assert_eq!(w.goals[&0].status, GoalStatus::Active);
        w.apply(&ev(2, 1.0, EventBody::GoalAchieved { goal_id: 0 })).unwrap();
        assert_eq!(w.exec.mode, Mode::Idle);
        assert!(w.exec.active_plan.is_none());
        assert_eq!(w.exec.sim_clock, 1.0);
    }

    #[test]
    fn rejects_gaps_and_unknown_goals() {
        let mut w = World::new();
        assert!(matches!(
            w.apply(&ev(3, 0.0, EventBody::Warning { message: "x".into() })),
            Err(ApplyError::OutOfOrder { .. })
        ));
        assert!(matches!(
            w.apply(&ev(0, 0.0, EventBody::GoalAchieved { goal_id: 9 })),
            Err(ApplyError::UnknownGoal { .. })
        ));
    }

    #[test]
    fn facts_fold_into_beliefs() {
        let mut w = World::new();
        let fact = Fact {
            atom: "at_depth(surface)".parse().unwrap(),
            truth: true,
            provenance: Provenance::Observed,
            timestamp: 2.0,
        };
        w.apply(&ev(0, 2.0, EventBody::FactAsserted { fact })).unwrap();
        assert!(w.stores.beliefs.query(&"at_depth(surface)".parse().unwrap()));
    }
}
