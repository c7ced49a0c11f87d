//! The event vocabulary. Every change to the executive's world is one of
//! these, and the world is exactly the fold of its event log.

use serde::{Deserialize, Serialize};

use super::safety::Violation;
use crate::planner::{Goal, Plan, Verdict};
use crate::stores::{AssessmentRecord, BehaviorEntry, Binding, Fact, Implementation, Mismatch};
use crate::symbolic::{Atom, Symbol};

/// Vehicle snapshot carried by every tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Telemetry {
    pub x: f64,
    pub y: f64,
    pub depth: f64,
    pub nav_x: f64,
    pub nav_y: f64,
    pub heading: f64,
    pub speed: f64,
    pub vertical_rate: f64,
    pub battery: f64,
    pub dvl_altitude: Option<f64>,
    pub descent_weights_dropped: bool,
    pub ascent_weights_dropped: bool,
}

/// Identifies the behavior an event refers to. `primitive` is set for the
/// primitives a composite step expands into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorRef {
    pub goal_id: u64,
    pub step: usize,
    pub invocation: Atom,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub primitive: Option<Atom>,
}

impl BehaviorRef {
    pub fn is_step(&self) -> bool {
        self.primitive.is_none()
    }

    /// The invocation actually being executed.
    pub fn current(&self) -> &Atom {
        self.primitive.as_ref().unwrap_or(&self.invocation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkStatus {
    Queued,
    Delivered,
    Acknowledged,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventBody {
    Tick {
        tick: u64,
        vehicle: Telemetry,
    },
    GoalInjected {
        goal: Goal,
    },
    GoalAchieved {
        goal_id: u64,
    },
    GoalAbandoned {
        goal_id: u64,
        reason: String,
    },
    PlanCreated {
        plan: Plan,
    },
    PlanOverridden {
        plan: Plan,
        verdict: Verdict,
    },
    PlanInvalidated {
        goal_id: u64,
        reason: String,
    },
    BehaviorStarted {
        behavior: BehaviorRef,
    },
    BehaviorDone {
        behavior: BehaviorRef,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        assessment: Option<AssessmentRecord>,
    },
    BehaviorFailed {
        behavior: BehaviorRef,
        reason: String,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        assessment: Option<AssessmentRecord>,
    },
    BehaviorHalted {
        behavior: BehaviorRef,
        reason: String,
        #[serde(skip_serializing_if = "Option::is_none", default)]
        assessment: Option<AssessmentRecord>,
    },
    FactAsserted {
        fact: Fact,
    },
    MismatchDetected {
        mismatch: Mismatch,
    },
    SafetyViolation {
        violations: Vec<Violation>,
        active: Vec<Violation>,
    },
    SafetyCleared {
        active: Vec<Violation>,
    },
    SafetyHold {
        goal_id: u64,
        reason: String,
    },
    BindingChanged {
        binding: Binding,
    },
    BehaviorRegistered {
        entry: BehaviorEntry,
    },
    BehaviorReplaced {
        name: Symbol,
        version: u64,
        implementation: Implementation,
    },
    AcousticLink {
        seq: u8,
        status: LinkStatus,
        detail: String,
    },
    Warning {
        message: String,
    },
}

impl EventBody {
    pub fn kind(&self) -> &'static str {
        match self {
            EventBody::Tick { .. } => "tick",
            EventBody::GoalInjected { .. } => "goal_injected",
            EventBody::GoalAchieved { .. } => "goal_achieved",
            EventBody::GoalAbandoned { .. } => "goal_abandoned",
            EventBody::PlanCreated { .. } => "plan_created",
            EventBody::PlanOverridden { .. } => "plan_overridden",
            EventBody::PlanInvalidated { .. } => "plan_invalidated",
            EventBody::BehaviorStarted { .. } => "behavior_started",
            EventBody::BehaviorDone { .. } => "behavior_done",
            EventBody::BehaviorFailed { .. } => "behavior_failed",
            EventBody::BehaviorHalted { .. } => "behavior_halted",
            EventBody::FactAsserted { .. } => "fact_asserted",
            EventBody::MismatchDetected { .. } => "mismatch_detected",
            EventBody::SafetyViolation { .. } => "safety_violation",
            EventBody::SafetyCleared { .. } => "safety_cleared",
            EventBody::SafetyHold { .. } => "safety_hold",
            EventBody::BindingChanged { .. } => "binding_changed",
            EventBody::BehaviorRegistered { .. } => "behavior_registered",
            EventBody::BehaviorReplaced { .. } => "behavior_replaced",
            EventBody::AcousticLink { .. } => "acoustic_link",
            EventBody::Warning { .. } => "warning",
        }
    }
}

/// One log record; serialized with fields in the order `seq, t, kind, payload`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub seq: u64,
    pub t: f64,
    #[serde(flatten)]
    pub body: EventBody,
}

impl Event {
    pub fn kind(&self) -> &'static str {
        self.body.kind()
    }
}
