//! The tick loop: sense, check safety, select a goal, plan, dispatch and
//! monitor behaviors. Every decision is recorded as an event before it takes
//! effect on the world.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::event::{BehaviorRef, Event, EventBody, LinkStatus, Telemetry};
use super::library::GOTO_CAPTURE_M;
use super::log::canonicalize;
use super::safety::{check_safety, SafetyEnvelope, Violation};
use super::world::{Mode, World};
use crate::acoustic::{AcousticCommand, AcousticLink, ChannelModel, TransferOutcome};
use crate::planner::{
    expand_composite, ground_step, make_plan, repair_plan, substitution_for, validate_plan, Goal,
    GoalSource, GoalStatus, Plan, PlanProvenance, PlanStep, Priority, StepStatus, Verdict,
};
use crate::sim::{ActuationCmd, Fins, SensorFrame, Simulator, ThrusterMode, WeightSet};
use crate::stores::{
    Amount, AssessmentRecord, BehaviorEntry, BehaviorSpec, Binding, CommandTemplate, Fact,
    Implementation, Outcome, Provenance, TerminationCond,
};
use crate::survey::{plan_survey, survey_name};
use crate::symbolic::{entails, Atom, Conjunction, PredicateTable, State, Substitution, Symbol, Term};
use crate::values::ConcreteValue;
use crate::Point;

/// Capture radius used for each waypoint of a followed path.
pub const PATH_CAPTURE_M: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExecutiveConfig {
    pub dt: f64,
    /// A primitive running longer than this fails.
    pub max_primitive_s: f64,
    pub max_plans_per_goal: u32,
}

impl Default for ExecutiveConfig {
    fn default() -> Self {
        ExecutiveConfig {
            dt: 1.0,
            max_primitive_s: 20_000.0,
            max_plans_per_goal: 10,
        }
    }
}

/// Coverage parameters remembered per zone so a rebinding can regenerate
/// its survey.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageSetup {
    pub zone: Symbol,
    pub spacing: f64,
    pub heading: f64,
    #[serde(default)]
    pub sensors: Vec<Symbol>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Command {
    InjectGoal {
        condition: String,
        priority: Priority,
        #[serde(default = "operator_source")]
        source: GoalSource,
    },
    OverridePlan {
        goal_id: u64,
        steps: Vec<String>,
    },
    Bind {
        symbol: String,
        value: ConcreteValue,
    },
    RegisterBehavior {
        spec: BehaviorSpec,
    },
    ReplaceImplementation {
        name: String,
        implementation: Implementation,
    },
    Abort,
    AcousticSend {
        command: AcousticCommand,
    },
}

fn operator_source() -> GoalSource {
    GoalSource::Operator
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reply", rename_all = "snake_case")]
pub enum CommandReply {
    Goal { goal_id: u64 },
    Plan { goal_id: u64, verdict: Verdict },
    Binding { symbol: Symbol, version: u64 },
    Behavior { id: u64 },
    Replaced { name: Symbol, version: u64 },
    Acoustic { seq: u8 },
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "error", content = "detail", rename_all = "snake_case")]
pub enum CommandError {
    #[error("malformed goal: {0}")]
    MalformedGoal(String),
    #[error("unknown goal {0}")]
    UnknownGoal(u64),
    #[error("unknown behavior {0}")]
    UnknownBehavior(String),
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid binding: {0}")]
    InvalidBinding(String),
    #[error("invalid behavior: {0}")]
    InvalidBehavior(String),
    #[error("acoustic link: {0}")]
    Link(String),
}

pub type CommandResult = Result<CommandReply, CommandError>;
pub type ReplyFn = Box<dyn FnOnce(CommandResult) + Send>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecutiveError {
    #[error("simulator: {0}")]
    Sim(#[from] crate::sim::SimError),
    #[error("replay: {0}")]
    Apply(#[from] super::world::ApplyError),
    #[error("log sink: {0}")]
    Io(String),
}

#[derive(Debug, Clone)]
enum Watch {
    Waypoint { target: Point, radius: f64 },
    Depth { target: f64, band: f64, prev: f64 },
    Dvl { threshold: f64 },
    Elapsed { until: f64 },
    Immediate,
    Path { points: Vec<Point>, next: usize, speed: f64 },
}

#[derive(Debug, Clone)]
struct PrimitiveRun {
    invocation: Atom,
    watch: Watch,
    started: f64,
}

#[derive(Debug, Clone)]
struct StepRun {
    goal_id: u64,
    step: usize,
    invocation: Atom,
    composite: bool,
    queue: VecDeque<Atom>,
    current: Option<PrimitiveRun>,
    started: f64,
    battery_at_start: f64,
}

impl StepRun {
    fn step_ref(&self) -> BehaviorRef {
        BehaviorRef {
            goal_id: self.goal_id,
            step: self.step,
            invocation: self.invocation.clone(),
            primitive: None,
        }
    }

    fn primitive_ref(&self, primitive: &Atom) -> BehaviorRef {
        BehaviorRef {
            primitive: Some(primitive.clone()),
            ..self.step_ref()
        }
    }
}

enum Progress {
    Running,
    Done,
    Failed(String),
}

pub struct Executive {
    world: World,
    sim: Simulator,
    config: ExecutiveConfig,
    safety: SafetyEnvelope,
    link: AcousticLink,
    predicates: PredicateTable,
    coverage: BTreeMap<Symbol, CoverageSetup>,
    scripted_plans: Vec<Vec<Atom>>,
    lines: Vec<String>,
    events: Vec<Event>,
    sink: Option<Box<dyn Write + Send>>,
    queue: VecDeque<(Command, Option<ReplyFn>)>,
    run: Option<StepRun>,
    next_dispatch_tick: u64,
    violation_keys: BTreeSet<String>,
    seen_mismatches: BTreeSet<(Atom, u64, u64)>,
    hold_snapshot: Option<State>,
    frame: SensorFrame,
}

impl Executive {
    pub fn new(sim: Simulator, safety: SafetyEnvelope, channel: ChannelModel, config: ExecutiveConfig) -> Self {
        let frame = sim.sense();
        Executive {
            world: World::new(),
            sim,
            config,
            safety,
            link: AcousticLink::new(channel),
            predicates: PredicateTable::new(),
            coverage: BTreeMap::new(),
            scripted_plans: Vec::new(),
            lines: Vec::new(),
            events: Vec::new(),
            sink: None,
            queue: VecDeque::new(),
            run: None,
            next_dispatch_tick: 0,
            violation_keys: BTreeSet::new(),
            seen_mismatches: BTreeSet::new(),
            hold_snapshot: None,
            frame,
        }
    }

    /// Streams every event line to `sink` as it is emitted.
    pub fn set_sink(&mut self, sink: Box<dyn Write + Send>) {
        self.sink = Some(sink);
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn sim(&self) -> &Simulator {
        &self.sim
    }

    pub fn config(&self) -> &ExecutiveConfig {
        &self.config
    }

    pub fn safety(&self) -> &SafetyEnvelope {
        &self.safety
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn lines(&self) -> &[String] {
        &self.lines
    }

    pub fn now(&self) -> f64 {
        self.sim.state().t
    }

    pub fn digest(&self) -> String {
        self.world.digest()
    }

    pub fn link_idle(&self) -> bool {
        self.link.is_idle()
    }

    pub fn has_pending_commands(&self) -> bool {
        !self.queue.is_empty()
    }

    /// True once no goal is open and nothing is in flight.
    pub fn is_quiescent(&self) -> bool {
        self.world.open_goals().next().is_none()
            && self.run.is_none()
            && self.queue.is_empty()
            && self.link.is_idle()
    }

    pub fn set_coverage(&mut self, setup: CoverageSetup) {
        self.coverage.insert(setup.zone.clone(), setup);
    }

    pub fn set_scripted_plans(&mut self, plans: Vec<Vec<Atom>>) {
        self.scripted_plans = plans;
    }

    pub fn predicates_mut(&mut self) -> &mut PredicateTable {
        &mut self.predicates
    }

    fn emit(&mut self, body: EventBody) {
        let event = Event {
            seq: self.world.next_seq,
            t: self.now(),
            body,
        };
        let (line, parsed) = canonicalize(&event);
        self.world
            .apply(&parsed)
            .expect("the executive only emits events its own world accepts");
        if let Some(sink) = self.sink.as_mut() {
            // a failing sink must not stop the vehicle; the in-memory log stays complete
            let _ = writeln!(sink, "{line}");
        }
        self.lines.push(line);
        self.events.push(parsed);
    }

    /// Records a belief supplied by the mission rather than derived by the
    /// executive.
    pub fn assert_belief(&mut self, atom: Atom, truth: bool) -> Result<(), CommandError> {
        self.predicates
            .register(&atom)
            .map_err(|e| CommandError::MalformedGoal(e.to_string()))?;
        self.emit(EventBody::FactAsserted {
            fact: Fact {
                atom,
                truth,
                provenance: Provenance::Inferred,
                timestamp: self.now(),
            },
        });
        Ok(())
    }

    fn warn(&mut self, message: String) {
        self.emit(EventBody::Warning { message });
    }

    // ---- commands -------------------------------------------------------

    /// Queues a command for the next tick's ingest phase.
    pub fn enqueue(&mut self, command: Command, reply: Option<ReplyFn>) {
        self.queue.push_back((command, reply));
    }

    /// Applies a command immediately, at the current sim time.
    pub fn execute(&mut self, command: Command) -> CommandResult {
        match command {
            Command::InjectGoal {
                condition,
                priority,
                source,
            } => self.inject_goal(&condition, priority, source),
            Command::OverridePlan { goal_id, steps } => {
                let atoms = steps
                    .iter()
                    .map(|s| s.parse::<Atom>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CommandError::InvalidPlan(e.to_string()))?;
                self.override_plan(goal_id, atoms)
            }
            Command::Bind { symbol, value } => {
                let symbol = Symbol::new(&symbol).map_err(|e| CommandError::InvalidBinding(e.to_string()))?;
                self.bind(symbol, value)
            }
            Command::RegisterBehavior { spec } => self.register_behavior(spec),
            Command::ReplaceImplementation { name, implementation } => {
                self.replace_implementation(&name, implementation)
            }
            Command::Abort => self.abort(),
            Command::AcousticSend { command } => {
                let seq = self
                    .link
                    .send(&command, self.now())
                    .map_err(|e| CommandError::Link(e.to_string()))?;
                self.emit(EventBody::AcousticLink {
                    seq,
                    status: LinkStatus::Queued,
                    detail: format!("{:?}", command.kind()).to_lowercase(),
                });
                Ok(CommandReply::Acoustic { seq })
            }
        }
    }

    fn inject_goal(&mut self, text: &str, priority: Priority, source: GoalSource) -> CommandResult {
        let mut table = self.predicates.clone();
        let condition = table
            .parse_conjunction(text)
            .map_err(|e| CommandError::MalformedGoal(e.to_string()))?;
        self.predicates = table;
        Ok(CommandReply::Goal {
            goal_id: self.add_goal(condition, priority, source),
        })
    }

    fn add_goal(&mut self, condition: Conjunction, priority: Priority, source: GoalSource) -> u64 {
        let id = self.world.goals.keys().next_back().map_or(0, |k| k + 1);
        self.emit(EventBody::GoalInjected {
            goal: Goal {
                id,
                condition,
                priority,
                source,
                injected_at: self.now(),
                status: GoalStatus::Pending,
            },
        });
        id
    }

    fn override_plan(&mut self, goal_id: u64, steps: Vec<Atom>) -> CommandResult {
        let goal = self
            .world
            .goals
            .get(&goal_id)
            .filter(|g| g.is_open())
            .cloned()
            .ok_or(CommandError::UnknownGoal(goal_id))?;
        for s in &steps {
            if self.world.stores.behaviors.get(&s.predicate).is_none() {
                return Err(CommandError::UnknownBehavior(s.predicate.to_string()));
            }
        }
        let steps: Vec<PlanStep> = steps.into_iter().map(PlanStep::new).collect();
        let verdict = validate_plan(
            &steps,
            &self.world.stores.beliefs.state(),
            &goal.condition,
            &self.world.stores.behaviors,
        )
        .map_err(|e| CommandError::InvalidPlan(e.to_string()))?;
        if self.world.exec.active_goal == Some(goal_id) {
            self.halt_running("plan overridden");
        }
        let plan = Plan {
            goal_id,
            steps,
            created_at: self.now(),
            provenance: PlanProvenance::OperatorOverride,
        };
        self.emit(EventBody::PlanOverridden {
            plan,
            verdict: verdict.clone(),
        });
        Ok(CommandReply::Plan { goal_id, verdict })
    }

    fn next_binding(&self, symbol: Symbol, value: ConcreteValue) -> Result<Binding, CommandError> {
        value
            .validate()
            .map_err(|e| CommandError::InvalidBinding(e.to_string()))?;
        let version = self.world.stores.numerics.binding(&symbol).map_or(1, |b| b.version + 1);
        Ok(Binding {
            symbol,
            value,
            version,
            timestamp: self.now(),
        })
    }

    fn bind(&mut self, symbol: Symbol, value: ConcreteValue) -> CommandResult {
        let binding = self.next_binding(symbol.clone(), value)?;
        let version = binding.version;
        self.emit(EventBody::BindingChanged { binding });
        if let Some(setup) = self.coverage.get(&symbol).cloned() {
            let name = survey_name(&symbol);
            if self.world.stores.behaviors.get(&name).is_some() {
                self.resynthesize(&setup)?;
            }
        }
        Ok(CommandReply::Binding { symbol, version })
    }

    /// Regenerates a zone's survey after its polygon changed.
    fn resynthesize(&mut self, setup: &CoverageSetup) -> Result<(), CommandError> {
        let synthesis = plan_survey(
            &setup.zone,
            setup.spacing,
            setup.heading,
            None,
            &setup.sensors,
            &self.world.stores.numerics,
        )
        .map_err(|e| CommandError::InvalidBinding(e.to_string()))?;
        for (symbol, value) in synthesis.waypoints {
            let binding = self.next_binding(symbol, value)?;
            self.emit(EventBody::BindingChanged { binding });
        }
        let name = synthesis.spec.name.clone();
        let version = self.world.stores.behaviors.get(&name).map_or(1, |e| e.version + 1);
        self.emit(EventBody::BehaviorReplaced {
            name: name.clone(),
            version,
            implementation: synthesis.spec.implementation,
        });
        self.invalidate_users(&name, "survey regenerated");
        Ok(())
    }

    /// Registers a synthesized survey, binding its waypoints first.
    pub fn install_survey(&mut self, setup: CoverageSetup) -> Result<u64, CommandError> {
        let synthesis = plan_survey(
            &setup.zone,
            setup.spacing,
            setup.heading,
            None,
            &setup.sensors,
            &self.world.stores.numerics,
        )
        .map_err(|e| CommandError::InvalidBehavior(e.to_string()))?;
        for (symbol, value) in synthesis.waypoints {
            let binding = self.next_binding(symbol, value)?;
            self.emit(EventBody::BindingChanged { binding });
        }
        self.coverage.insert(setup.zone.clone(), setup);
        match self.register_behavior(synthesis.spec)? {
            CommandReply::Behavior { id } => Ok(id),
            _ => unreachable!("register_behavior replies with an id"),
        }
    }

    fn register_behavior(&mut self, spec: BehaviorSpec) -> CommandResult {
        self.world
            .stores
            .behaviors
            .check(&spec)
            .map_err(|e| CommandError::InvalidBehavior(e.to_string()))?;
        let mut table = self.predicates.clone();
        for a in spec_atoms(&spec) {
            table
                .check(&a.0, a.1)
                .map_err(|e| CommandError::InvalidBehavior(e.to_string()))?;
        }
        self.predicates = table;
        let id = self.world.stores.behaviors.next_id();
        self.emit(EventBody::BehaviorRegistered {
            entry: BehaviorEntry { id, version: 1, spec },
        });
        Ok(CommandReply::Behavior { id })
    }

    fn replace_implementation(&mut self, name: &str, implementation: Implementation) -> CommandResult {
        let name = Symbol::new(name).map_err(|_| CommandError::UnknownBehavior(name.to_string()))?;
        let entry = self
            .world
            .stores
            .behaviors
            .get(&name)
            .ok_or_else(|| CommandError::UnknownBehavior(name.to_string()))?;
        let version = entry.version + 1;
        self.world
            .stores
            .behaviors
            .check_replacement(&name, &implementation)
            .map_err(|e| CommandError::InvalidBehavior(e.to_string()))?;
        self.emit(EventBody::BehaviorReplaced {
            name: name.clone(),
            version,
            implementation,
        });
        self.invalidate_users(&name, "implementation replaced");
        Ok(CommandReply::Replaced { name, version })
    }

    /// Drops the active plan if any of its steps is or expands through `name`.
    fn invalidate_users(&mut self, name: &Symbol, reason: &str) {
        let Some(plan) = self.world.exec.active_plan.clone() else {
            return;
        };
        let uses = plan.steps.iter().any(|s| {
            s.behavior() == name
                || expand_composite(&self.world.stores.behaviors, &s.invocation)
                    .map(|prims| prims.iter().any(|p| &p.predicate == name))
                    .unwrap_or(false)
        });
        if uses {
            self.halt_running(reason);
            self.emit(EventBody::PlanInvalidated {
                goal_id: plan.goal_id,
                reason: reason.to_string(),
            });
        }
    }

    fn abort(&mut self) -> CommandResult {
        let superseded: Vec<u64> = self
            .world
            .open_goals()
            .filter(|g| g.priority != Priority::Safety)
            .map(|g| g.id)
            .collect();
        for id in superseded {
            if self.run.as_ref().is_some_and(|r| r.goal_id == id) {
                self.halt_running("aborted to recovery");
            }
            self.emit(EventBody::GoalAbandoned {
                goal_id: id,
                reason: "superseded by abort to recovery".into(),
            });
        }
        self.inject_goal("ready_for_recovery()", Priority::Operator, GoalSource::Operator)
    }

    fn apply_acoustic(&mut self, command: AcousticCommand) -> CommandResult {
        match command {
            AcousticCommand::InjectGoal { condition, priority } => {
                self.inject_goal(&condition.to_string(), priority, GoalSource::Acoustic)
            }
            AcousticCommand::OverridePlanRef { goal_id, plan_index } => {
                let steps = self
                    .scripted_plans
                    .get(usize::from(plan_index))
                    .cloned()
                    .ok_or_else(|| CommandError::InvalidPlan(format!("no stored plan {plan_index}")))?;
                self.override_plan(u64::from(goal_id), steps)
            }
            AcousticCommand::AbortToRecovery => self.abort(),
            AcousticCommand::SetBinding { symbol, value } => self.bind(symbol, value),
            AcousticCommand::Ack => Err(CommandError::Link("bare ack delivered as a command".into())),
        }
    }

    // ---- tick -----------------------------------------------------------

    pub fn tick(&mut self) -> Result<(), ExecutiveError> {
        self.sim.step(self.config.dt)?;
        let tick = self.world.exec.tick_count + 1;
        self.emit(EventBody::Tick {
            tick,
            vehicle: telemetry(&self.sim),
        });
        self.ingest();
        self.frame = self.sim.sense();
        self.check_safety();
        self.check_mismatches();
        self.select_goal();
        self.advance();
        self.finish_goal();
        Ok(())
    }

    /// Ticks until `stop` holds or sim time reaches `until`.
    pub fn run_until(&mut self, until: f64, mut stop: impl FnMut(&Executive) -> bool) -> Result<(), ExecutiveError> {
        while self.now() < until && !stop(self) {
            self.tick()?;
        }
        Ok(())
    }

    fn ingest(&mut self) {
        let out = self.link.advance(self.now());
        for d in out.deliveries {
            self.emit(EventBody::AcousticLink {
                seq: d.seq,
                status: LinkStatus::Delivered,
                detail: format!("{:?}", d.command.kind()).to_lowercase(),
            });
            if let Err(e) = self.apply_acoustic(d.command) {
                self.warn(format!("acoustic command {} rejected: {e}", d.seq));
            }
        }
        for o in out.outcomes {
            let (seq, status, detail) = match o {
                TransferOutcome::Acknowledged { seq, latency, attempts } => (
                    seq,
                    LinkStatus::Acknowledged,
                    format!("acknowledged after {attempts} attempts, {latency:.0} s"),
                ),
                TransferOutcome::TimedOut { seq, retries } => {
                    (seq, LinkStatus::TimedOut, format!("no acknowledgement after {retries} retries"))
                }
            };
            self.emit(EventBody::AcousticLink { seq, status, detail });
        }
        while let Some((command, reply)) = self.queue.pop_front() {
            let result = self.execute(command);
            if let Some(reply) = reply {
                reply(result);
            }
        }
    }

    fn envelope(&self) -> SafetyEnvelope {
        let mut env = self.safety.clone();
        for zone in &mut env.keep_out {
            if let Some(p) = self.world.stores.numerics.resolve(&zone.name).and_then(ConcreteValue::as_polygon) {
                zone.polygon = p.clone();
            }
        }
        env
    }

    fn check_safety(&mut self) {
        let active = check_safety(&self.frame, &self.envelope());
        let keys: BTreeSet<String> = active.iter().map(Violation::key).collect();
        let fresh: Vec<Violation> = active
            .iter()
            .filter(|v| !self.violation_keys.contains(&v.key()))
            .cloned()
            .collect();
        let cleared = self.violation_keys.iter().any(|k| !keys.contains(k));
        self.violation_keys = keys;
        if !fresh.is_empty() {
            self.emit(EventBody::SafetyViolation {
                violations: fresh.clone(),
                active: active.clone(),
            });
            let running_safety = self
                .run
                .as_ref()
                .and_then(|r| self.world.goals.get(&r.goal_id))
                .is_some_and(|g| g.priority == Priority::Safety);
            if !running_safety {
                self.halt_running("safety violation");
            }
            for v in &fresh {
                let condition = v.recovery_goal();
                for lit in condition.literals() {
                    self.emit(EventBody::FactAsserted {
                        fact: Fact {
                            atom: lit.atom.clone(),
                            truth: !lit.positive,
                            provenance: Provenance::Observed,
                            timestamp: self.now(),
                        },
                    });
                }
                let duplicate = self
                    .world
                    .open_goals()
                    .any(|g| g.priority == Priority::Safety && g.condition == condition);
                if !duplicate {
                    self.add_goal(condition, Priority::Safety, GoalSource::Internal);
                }
            }
        } else if cleared {
            self.emit(EventBody::SafetyCleared { active });
        }
    }

    fn check_mismatches(&mut self) {
        let mismatches = self.world.stores.beliefs.detect_mismatches();
        let mut relevant = false;
        for m in mismatches {
            let key = (
                m.atom.clone(),
                m.inferred.timestamp.to_bits(),
                m.observed.timestamp.to_bits(),
            );
            if !self.seen_mismatches.insert(key) {
                continue;
            }
            relevant |= self.plan_mentions(&m.atom);
            self.emit(EventBody::MismatchDetected { mismatch: m });
        }
        if relevant {
            self.sim.realign_nav();
            self.frame = self.sim.sense();
            self.halt_running("belief contradicted by observation");
            if let Some(goal_id) = self.world.exec.active_plan.as_ref().map(|p| p.goal_id) {
                self.emit(EventBody::PlanInvalidated {
                    goal_id,
                    reason: "belief contradicted by observation".into(),
                });
            }
        }
    }

    fn plan_mentions(&self, atom: &Atom) -> bool {
        let Some(plan) = &self.world.exec.active_plan else {
            return false;
        };
        if self
            .world
            .goals
            .get(&plan.goal_id)
            .is_some_and(|g| g.condition.atoms().any(|a| a == atom))
        {
            return true;
        }
        plan.steps.iter().any(|s| {
            ground_step(&self.world.stores.behaviors, &s.invocation).is_ok_and(|a| {
                a.pre.iter().any(|l| &l.atom == atom)
                    || a.add.contains(atom)
                    || a.del.contains(atom)
                    || a.cond.iter().any(|(w, add)| add.contains(atom) || w.iter().any(|l| &l.atom == atom))
            })
        })
    }

    fn select_goal(&mut self) {
        let safety_only = !self.world.violations.is_empty()
            || self
                .world
                .open_goals()
                .any(|g| g.priority == Priority::Safety);
        let selected = self
            .world
            .open_goals()
            .filter(|g| !safety_only || g.priority == Priority::Safety)
            .min_by_key(|g| (g.priority, std::cmp::Reverse(g.id)))
            .map(|g| g.id);
        let active = self.world.exec.active_goal;
        if active.is_some() && active != selected {
            self.preempt();
        }
        let Some(id) = selected else {
            return;
        };
        let has_plan = self.world.exec.active_goal == Some(id) && self.world.exec.active_plan.is_some();
        if has_plan {
            return;
        }
        if self.world.exec.mode == Mode::SafetyHold && self.world.exec.active_goal == Some(id) {
            let state = self.world.stores.beliefs.state();
            if self.hold_snapshot.as_ref() == Some(&state) {
                return;
            }
        }
        self.plan_for(id);
    }

    fn preempt(&mut self) {
        self.halt_running("preempted");
        if let Some(goal_id) = self.world.exec.active_plan.as_ref().map(|p| p.goal_id) {
            self.emit(EventBody::PlanInvalidated {
                goal_id,
                reason: "preempted".into(),
            });
        }
    }

    fn plan_for(&mut self, id: u64) {
        let goal = self.world.goals[&id].clone();
        let state = self.world.stores.beliefs.state();
        if entails(&state, &goal.condition) {
            self.emit(EventBody::GoalAchieved { goal_id: id });
            return;
        }
        if let Some(plan) = self.world.overrides.get(&id).cloned() {
            self.adopt(plan);
            return;
        }
        if self.world.plan_counts.get(&id).copied().unwrap_or(0) >= self.config.max_plans_per_goal {
            self.give_up(&goal, "replanning limit reached".into(), &state);
            return;
        }
        let result = make_plan(id, &goal.condition, &state, &self.world.stores, self.now());
        self.settle(&goal, result, &state);
    }

    fn settle(&mut self, goal: &Goal, result: Result<Plan, crate::planner::PlanError>, state: &State) {
        match result {
            Ok(plan) => {
                match validate_plan(&plan.steps, state, &goal.condition, &self.world.stores.behaviors) {
                    Ok(Verdict::Ok) => self.adopt(plan),
                    Ok(v) => self.give_up(goal, format!("planner produced an invalid plan: {v:?}"), state),
                    Err(e) => self.give_up(goal, e.to_string(), state),
                }
            }
            Err(e) => self.give_up(goal, e.to_string(), state),
        }
    }

    fn adopt(&mut self, plan: Plan) {
        self.hold_snapshot = None;
        self.emit(EventBody::PlanCreated { plan });
    }

    fn give_up(&mut self, goal: &Goal, reason: String, state: &State) {
        if goal.priority == Priority::Safety {
            self.hold_snapshot = Some(state.clone());
            if self.world.exec.mode != Mode::SafetyHold || self.world.exec.active_goal != Some(goal.id) {
                self.emit(EventBody::SafetyHold {
                    goal_id: goal.id,
                    reason,
                });
                let _ = self.actuate(ActuationCmd::AllStop);
            }
        } else {
            self.emit(EventBody::GoalAbandoned {
                goal_id: goal.id,
                reason,
            });
        }
    }

    fn actuate(&mut self, cmd: ActuationCmd) -> Result<(), String> {
        match self.sim.command(cmd) {
            Ok(Some(w)) => {
                self.warn(w);
                Ok(())
            }
            Ok(None) => Ok(()),
            Err(e) => Err(e.to_string()),
        }
    }

    /// Stops the running step, if any, and holds station.
    fn halt_running(&mut self, reason: &str) {
        let Some(run) = self.run.take() else {
            return;
        };
        if let (true, Some(p)) = (run.composite, &run.current) {
            self.emit(EventBody::BehaviorHalted {
                behavior: run.primitive_ref(&p.invocation),
                reason: reason.to_string(),
                assessment: None,
            });
        }
        let assessment = self.assessment(&run, Outcome::Halted);
        self.emit(EventBody::BehaviorHalted {
            behavior: run.step_ref(),
            reason: reason.to_string(),
            assessment: Some(assessment),
        });
        let _ = self.actuate(ActuationCmd::HoldStation);
        self.next_dispatch_tick = self.world.exec.tick_count + 1;
    }

    fn assessment(&self, run: &StepRun, outcome: Outcome) -> AssessmentRecord {
        AssessmentRecord {
            behavior: run.invocation.predicate.clone(),
            outcome,
            duration: self.now() - run.started,
            energy: run.battery_at_start - self.frame.battery,
            timestamp: self.now(),
        }
    }

    fn advance(&mut self) {
        if self.run.is_none() {
            if self.world.exec.mode != Mode::Executing || self.world.exec.tick_count < self.next_dispatch_tick {
                return;
            }
            let Some(plan) = self.world.exec.active_plan.clone() else {
                return;
            };
            let Some(index) = plan.steps.iter().position(|s| s.status == StepStatus::Pending) else {
                return;
            };
            if !self.dispatch(&plan, index) {
                return;
            }
        }
        self.monitor();
    }

    /// Starts plan step `index`; false if its preconditions fail.
    fn dispatch(&mut self, plan: &Plan, index: usize) -> bool {
        let step = &plan.steps[index];
        let state = self.world.stores.beliefs.state();
        let behaviors = &self.world.stores.behaviors;
        let grounded = ground_step(behaviors, &step.invocation);
        let expansion = expand_composite(behaviors, &step.invocation);
        let composite = behaviors.spec(step.behavior()).is_ok_and(BehaviorSpec::is_composite);
        let failure = match (&grounded, &expansion) {
            (Err(e), _) | (_, Err(e)) => Some(e.to_string()),
            (Ok(a), Ok(_)) => a
                .pre
                .iter()
                .find(|l| !l.holds_in(&state))
                .map(|l| format!("precondition {l} does not hold")),
        };
        let reference = BehaviorRef {
            goal_id: plan.goal_id,
            step: index,
            invocation: step.invocation.clone(),
            primitive: None,
        };
        if let Some(reason) = failure {
            self.emit(EventBody::BehaviorFailed {
                behavior: reference,
                reason,
                assessment: None,
            });
            self.repair(plan, index);
            return false;
        }
        self.emit(EventBody::BehaviorStarted { behavior: reference });
        self.run = Some(StepRun {
            goal_id: plan.goal_id,
            step: index,
            invocation: step.invocation.clone(),
            composite,
            queue: expansion.expect("checked").into(),
            current: None,
            started: self.now(),
            battery_at_start: self.frame.battery,
        });
        true
    }

    fn repair(&mut self, plan: &Plan, failed: usize) {
        let Some(goal) = self.world.goals.get(&plan.goal_id).cloned() else {
            return;
        };
        if !goal.is_open() {
            return;
        }
        self.next_dispatch_tick = self.world.exec.tick_count + 1;
        if self.world.plan_counts.get(&goal.id).copied().unwrap_or(0) >= self.config.max_plans_per_goal {
            let state = self.world.stores.beliefs.state();
            self.give_up(&goal, "replanning limit reached".into(), &state);
            return;
        }
        let state = self.world.stores.beliefs.state();
        let result = repair_plan(plan, failed, &goal.condition, &state, &self.world.stores, self.now());
        self.settle(&goal, result, &state);
    }

    fn monitor(&mut self) {
        let Some(mut run) = self.run.take() else {
            return;
        };
        // bounded: each pass either returns or consumes one queued primitive
        loop {
            if run.current.is_none() {
                let Some(next) = run.queue.pop_front() else {
                    self.complete_step(run);
                    return;
                };
                if run.composite {
                    self.emit(EventBody::BehaviorStarted {
                        behavior: run.primitive_ref(&next),
                    });
                }
                match self.start_primitive(&next) {
                    Ok(p) => run.current = Some(p),
                    Err(reason) => {
                        self.fail_step(run, &next, reason);
                        return;
                    }
                }
            }
            let current = run.current.as_mut().expect("set above");
            match self.progress(current) {
                Progress::Running => {
                    self.run = Some(run);
                    return;
                }
                Progress::Failed(reason) => {
                    let inv = current.invocation.clone();
                    self.fail_step(run, &inv, reason);
                    return;
                }
                Progress::Done => {
                    let inv = current.invocation.clone();
                    run.current = None;
                    if run.composite {
                        self.emit(EventBody::BehaviorDone {
                            behavior: run.primitive_ref(&inv),
                            assessment: None,
                        });
                    }
                }
            }
        }
    }

    fn fail_step(&mut self, run: StepRun, primitive: &Atom, reason: String) {
        if run.composite {
            self.emit(EventBody::BehaviorFailed {
                behavior: run.primitive_ref(primitive),
                reason: reason.clone(),
                assessment: None,
            });
        }
        let assessment = self.assessment(&run, Outcome::Failure);
        self.emit(EventBody::BehaviorFailed {
            behavior: run.step_ref(),
            reason,
            assessment: Some(assessment),
        });
        let _ = self.actuate(ActuationCmd::HoldStation);
        if let Some(plan) = self.world.exec.active_plan.clone() {
            self.repair(&plan, run.step);
        }
    }

    fn complete_step(&mut self, run: StepRun) {
        let assessment = self.assessment(&run, Outcome::Success);
        self.emit(EventBody::BehaviorDone {
            behavior: run.step_ref(),
            assessment: Some(assessment),
        });
        self.next_dispatch_tick = self.world.exec.tick_count + 1;
        let Ok(action) = ground_step(&self.world.stores.behaviors, &run.invocation) else {
            return;
        };
        let before = self.world.stores.beliefs.state();
        let mut changes: Vec<(Atom, bool)> = Vec::new();
        changes.extend(action.del.iter().map(|a| (a.clone(), false)));
        changes.extend(action.add.iter().map(|a| (a.clone(), true)));
        for (when, add) in &action.cond {
            if when.iter().all(|l| l.holds_in(&before)) {
                changes.extend(add.iter().map(|a| (a.clone(), true)));
            }
        }
        let t = self.now();
        for (atom, truth) in &changes {
            self.emit(EventBody::FactAsserted {
                fact: Fact {
                    atom: atom.clone(),
                    truth: *truth,
                    provenance: Provenance::Inferred,
                    timestamp: t,
                },
            });
        }
        let mut observed = BTreeSet::new();
        for (atom, _) in changes {
            if !observed.insert(atom.clone()) {
                continue;
            }
            if let Some(truth) = self.observe(&atom) {
                self.emit(EventBody::FactAsserted {
                    fact: Fact {
                        atom,
                        truth,
                        provenance: Provenance::Observed,
                        timestamp: t,
                    },
                });
            }
        }
    }

    /// Ground truth for the atoms the vehicle can sense directly.
    fn observe(&self, atom: &Atom) -> Option<bool> {
        let here = self.frame.position.xy();
        let numerics = &self.world.stores.numerics;
        match (atom.predicate.as_str(), atom.args.as_slice()) {
            ("at", [w]) => numerics
                .resolve(w)
                .and_then(ConcreteValue::as_point)
                .map(|p| p.xy().dist(here) <= GOTO_CAPTURE_M),
            ("at_depth", [d]) if d.as_str() == "surface" => Some(self.frame.depth <= 1.0),
            ("clear_of", [z]) => numerics
                .resolve(z)
                .and_then(ConcreteValue::as_polygon)
                .map(|poly| !poly.contains(here)),
            _ => None,
        }
    }

    fn resolve(&self, term: &Term, subst: &Substitution) -> Result<Symbol, String> {
        term.resolve(subst).map_err(|e| e.to_string())
    }

    fn value_of(&self, term: &Term, subst: &Substitution) -> Result<ConcreteValue, String> {
        let s = self.resolve(term, subst)?;
        self.world
            .stores
            .numerics
            .resolve(&s)
            .cloned()
            .ok_or_else(|| format!("symbol {s} is not bound"))
    }

    fn amount(&self, a: &Amount, subst: &Substitution) -> Result<f64, String> {
        match a {
            Amount::Value(v) => Ok(*v),
            Amount::Ref(t) => self
                .value_of(t, subst)?
                .as_scalar()
                .ok_or_else(|| "threshold is not a scalar".to_string()),
        }
    }

    fn start_primitive(&mut self, invocation: &Atom) -> Result<PrimitiveRun, String> {
        let spec = self
            .world
            .stores
            .behaviors
            .spec(&invocation.predicate)
            .map_err(|e| e.to_string())?
            .clone();
        let subst = substitution_for(&spec, &invocation.args);
        let Implementation::Primitive { command } = &spec.implementation else {
            return Err(format!("{invocation} is not a primitive"));
        };
        let here = self.frame.nav_position;
        let mut target = None;
        let mut path_watch = None;
        let cmd = match command {
            CommandTemplate::Goto { target: t, speed } => {
                let p = self
                    .value_of(t, &subst)?
                    .as_point()
                    .ok_or("goto target is not a point")?
                    .xy();
                target = Some(p);
                Some(ActuationCmd::Goto { target: p, speed: *speed })
            }
            CommandTemplate::FollowPath { path, speed } => {
                let points: Vec<Point> = self
                    .value_of(path, &subst)?
                    .as_path()
                    .ok_or("follow_path argument is not a path")?
                    .iter()
                    .map(|p| p.xy())
                    .collect();
                let first = points[0];
                path_watch = Some(Watch::Path {
                    points,
                    next: 0,
                    speed: *speed,
                });
                Some(ActuationCmd::Goto {
                    target: first,
                    speed: *speed,
                })
            }
            CommandTemplate::LeavePolygon { zone, margin, speed } => {
                let value = self.value_of(zone, &subst)?;
                let poly = value.as_polygon().ok_or("keep-out zone is not a polygon")?;
                let p = exit_point(poly, here, *margin);
                target = Some(p);
                Some(ActuationCmd::Goto { target: p, speed: *speed })
            }
            CommandTemplate::SetFins { cfg } => Some(ActuationCmd::SetFins {
                cfg: parse_fins(&self.resolve(cfg, &subst)?)?,
            }),
            CommandTemplate::DropWeights { which } => Some(ActuationCmd::DropWeights {
                which: parse_weights(&self.resolve(which, &subst)?)?,
            }),
            CommandTemplate::SetThrusterMode { mode } => Some(ActuationCmd::SetThrusterMode {
                mode: parse_thruster(&self.resolve(mode, &subst)?)?,
            }),
            CommandTemplate::VerticalThrust { state } => {
                let on = match self.resolve(state, &subst)?.as_str() {
                    "on" => true,
                    "off" => false,
                    other => return Err(format!("vertical thrust state {other} is neither on nor off")),
                };
                Some(ActuationCmd::SetThrusterMode {
                    mode: if on { ThrusterMode::Vertical } else { ThrusterMode::Off },
                })
            }
            CommandTemplate::HoldStation => Some(ActuationCmd::HoldStation),
            CommandTemplate::AllStop => Some(ActuationCmd::AllStop),
            CommandTemplate::Wait => None,
        };
        let watch = match path_watch {
            Some(w) => w,
            None => match &spec.termination {
                TerminationCond::ReachedWaypoint { capture_radius } => Watch::Waypoint {
                    target: target.ok_or("waypoint termination without a target")?,
                    radius: *capture_radius,
                },
                TerminationCond::DepthWithin { target, band } => Watch::Depth {
                    target: self.amount(target, &subst)?,
                    band: *band,
                    prev: self.frame.depth,
                },
                TerminationCond::DvlAltitudeBelow { threshold } => Watch::Dvl {
                    threshold: self.amount(threshold, &subst)?,
                },
                TerminationCond::Elapsed { seconds } => Watch::Elapsed {
                    until: self.now() + self.amount(seconds, &subst)?,
                },
                TerminationCond::Immediate => Watch::Immediate,
            },
        };
        if let Some(cmd) = cmd {
            self.actuate(cmd)?;
        }
        Ok(PrimitiveRun {
            invocation: invocation.clone(),
            watch,
            started: self.now(),
        })
    }

    fn progress(&mut self, run: &mut PrimitiveRun) -> Progress {
        let frame = &self.frame;
        let t = self.now();
        let done = match &mut run.watch {
            Watch::Waypoint { target, radius } => frame.nav_position.dist(*target) <= *radius,
            Watch::Depth { target, band, prev } => {
                let d = frame.depth;
                let crossed = (*prev - *target) * (d - *target) < 0.0;
                *prev = d;
                (d - *target).abs() <= *band || crossed
            }
            Watch::Dvl { threshold } => frame.dvl_altitude.is_some_and(|a| a < *threshold),
            Watch::Elapsed { until } => t >= *until - 1e-9,
            Watch::Immediate => true,
            Watch::Path { points, next, speed } => {
                while *next < points.len() && frame.nav_position.dist(points[*next]) <= PATH_CAPTURE_M {
                    *next += 1;
                }
                if *next < points.len() {
                    let cmd = ActuationCmd::Goto {
                        target: points[*next],
                        speed: *speed,
                    };
                    let stale = !matches!(
                        self.sim.state().guidance,
                        crate::sim::Guidance::Goto { target, .. } if target == points[*next]
                    );
                    if stale {
                        if let Err(e) = self.actuate(cmd) {
                            return Progress::Failed(e);
                        }
                    }
                    false
                } else {
                    true
                }
            }
        };
        if done {
            Progress::Done
        } else if t - run.started > self.config.max_primitive_s {
            Progress::Failed(format!("{} exceeded {} s", run.invocation, self.config.max_primitive_s))
        } else {
            Progress::Running
        }
    }

    fn finish_goal(&mut self) {
        if self.run.is_some() || self.world.exec.mode != Mode::Executing {
            return;
        }
        let (Some(goal_id), Some(plan)) = (self.world.exec.active_goal, self.world.exec.active_plan.clone()) else {
            return;
        };
        let state = self.world.stores.beliefs.state();
        let goal = &self.world.goals[&goal_id];
        if entails(&state, &goal.condition) {
            self.emit(EventBody::GoalAchieved { goal_id });
            return;
        }
        if plan.steps.iter().all(|s| s.status == StepStatus::Done) {
            self.emit(EventBody::PlanInvalidated {
                goal_id,
                reason: "plan finished without reaching the goal".into(),
            });
        }
    }
}

fn spec_atoms(spec: &BehaviorSpec) -> Vec<(Symbol, usize)> {
    let mut out: Vec<(Symbol, usize)> = Vec::new();
    for l in &spec.preconditions {
        out.push((l.atom.predicate.clone(), l.atom.args.len()));
    }
    for a in spec.add.iter().chain(&spec.delete) {
        out.push((a.predicate.clone(), a.args.len()));
    }
    for c in &spec.conditional {
        for l in &c.when {
            out.push((l.atom.predicate.clone(), l.atom.args.len()));
        }
        for a in &c.add {
            out.push((a.predicate.clone(), a.args.len()));
        }
    }
    out
}

/// Point `margin` metres outside the polygon edge nearest to `from`.
pub fn exit_point(poly: &crate::Polygon, from: Point, margin: f64) -> Point {
    if !poly.contains(from) {
        return from;
    }
    let mut best = (f64::INFINITY, from, crate::geometry::Point2::new(0.0, 0.0));
    for (a, b) in poly.edges() {
        let q = crate::geometry::closest_on_segment(from, a, b);
        let d = q.dist(from);
        if d < best.0 {
            let e = b.sub(a);
            // counterclockwise vertices put the outside on the right of each edge
            let n = crate::geometry::Point2::new(e.y, -e.x).scale(1.0 / e.norm());
            best = (d, q, n);
        }
    }
    best.1.add(best.2.scale(margin))
}

fn parse_fins(s: &Symbol) -> Result<Fins, String> {
    match s.as_str() {
        "level" => Ok(Fins::Level),
        "descent_cfg" => Ok(Fins::DescentCfg),
        "ascent_cfg" => Ok(Fins::AscentCfg),
        other => Err(format!("unknown fin configuration {other}")),
    }
}

fn parse_weights(s: &Symbol) -> Result<WeightSet, String> {
    match s.as_str() {
        "descent" => Ok(WeightSet::Descent),
        "ascent" => Ok(WeightSet::Ascent),
        other => Err(format!("unknown weight set {other}")),
    }
}

fn parse_thruster(s: &Symbol) -> Result<ThrusterMode, String> {
    match s.as_str() {
        "off" => Ok(ThrusterMode::Off),
        "cruise" => Ok(ThrusterMode::Cruise),
        "vertical" => Ok(ThrusterMode::Vertical),
        "ascent" => Ok(ThrusterMode::Ascent),
        other => Err(format!("unknown thruster mode {other}")),
    }
}

pub fn telemetry(sim: &Simulator) -> Telemetry {
    let s = sim.state();
    let nav = s.nav_position();
    Telemetry {
        x: s.position.x,
        y: s.position.y,
        depth: s.position.depth,
        nav_x: nav.x,
        nav_y: nav.y,
        heading: s.heading,
        speed: s.speed,
        vertical_rate: s.vertical_rate,
        battery: s.battery,
        dvl_altitude: s.dvl_altitude,
        descent_weights_dropped: s.descent_weights_dropped,
        ascent_weights_dropped: s.ascent_weights_dropped,
    }
}
