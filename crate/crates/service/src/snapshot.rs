//! Immutable views of the executive, published after every tick.

use benthic::executive::{Executive, Mode, Telemetry, Violation};
use benthic::planner::{plan_report, Goal, PlanReport};
use benthic::stores::StoreDump;
use serde::Serialize;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateView {
    pub mode: Mode,
    pub sim_clock: f64,
    pub tick_count: u64,
    /// Sequence number of the newest event folded into this view.
    pub last_seq: Option<u64>,
    pub active_goal: Option<u64>,
    pub active_step: Option<usize>,
    pub goals: Vec<Goal>,
    pub violations: Vec<Violation>,
    pub telemetry: Option<Telemetry>,
    pub link_idle: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub state: StateView,
    pub plan: Option<PlanReport>,
    pub stores: StoreDump,
}

impl Snapshot {
    pub fn capture(exec: &Executive) -> Self {
        let world = exec.world();
        let state = StateView {
            mode: world.exec.mode,
            sim_clock: exec.now(),
            tick_count: world.exec.tick_count,
            last_seq: world.next_seq.checked_sub(1),
            active_goal: world.exec.active_goal,
            active_step: world.exec.active_step,
            goals: world.goals.values().cloned().collect(),
            violations: world.violations.clone(),
            telemetry: world.telemetry.clone(),
            link_idle: exec.link_idle(),
        };
        Snapshot {
            state,
            plan: world.exec.active_plan.as_ref().map(|p| plan_report(p, &world.stores)),
            stores: world.stores.dump(),
        }
    }
}
