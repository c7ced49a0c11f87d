//! Loading missions, running them to completion and replaying their logs.

mod schema;

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use schema::{
    AcousticSpec, BindingSpec, EnvironmentSpec, GoalSpec, MissionSpec, ScriptedPlan, VehicleSpec,
    DEFAULT_DURATION_S,
};

use crate::acoustic::ChannelModel;
use crate::executive::library;
use crate::executive::log::{parse_line, to_fixed_json};
use crate::executive::{ApplyError, Command, CommandError, Executive, ExecutiveError, World};
use crate::planner::{GoalStatus, Priority};
use crate::sim::{Bathymetry, Environment, SimError, Simulator, VehicleState};
use crate::stores::{BehaviorSpec, Implementation};
use crate::symbolic::{Atom, Symbol, Term};
use crate::values::{ConcreteValue, ValueKind};

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("mission schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("unbound symbols: {}", .0.join(", "))]
    UnboundSymbol(Vec<String>),
    #[error("unknown behavior module `{0}`")]
    UnknownModule(String),
    #[error("bathymetry: {0}")]
    Bathymetry(#[from] SimError),
    #[error("mission setup: {0}")]
    Setup(#[from] CommandError),
    #[error("run: {0}")]
    Run(#[from] ExecutiveError),
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("corrupt log at line {line}: {message}")]
    CorruptLog { line: usize, message: String },
    #[error("log line {line} does not apply: {source}")]
    Apply { line: usize, source: ApplyError },
}

/// A parsed mission together with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct Mission {
    pub spec: MissionSpec,
    pub dir: PathBuf,
    /// SHA-256 of the mission in canonical JSON form.
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub mission: String,
    pub seed: u64,
    pub config_digest: String,
    pub log_path: Option<PathBuf>,
    pub final_digest: String,
    pub sim_time: f64,
    pub events: usize,
    pub goals: Vec<(u64, GoalStatus)>,
}

pub fn parse_mission(text: &str, dir: &Path) -> Result<Mission, MissionError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: MissionSpec = serde_path_to_error::deserialize(de).map_err(|e| MissionError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    let canonical = to_fixed_json(&spec).expect("mission specs serialize");
    let config_digest = hex::encode(Sha256::digest(canonical.as_bytes()));
    let mission = Mission {
        spec,
        dir: dir.to_path_buf(),
        config_digest,
    };
    mission.check_symbols()?;
    Ok(mission)
}

pub fn load_mission(path: impl AsRef<Path>) -> Result<Mission, MissionError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| MissionError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    parse_mission(&text, &dir)
}

impl Mission {
    fn modules(&self) -> Result<Vec<BehaviorSpec>, MissionError> {
        let mut out = Vec::new();
        for name in &self.spec.behavior_modules {
            out.extend(library::module(name).ok_or_else(|| MissionError::UnknownModule(name.clone()))?);
        }
        Ok(out)
    }

    /// Every constant passed to a typed parameter must have a binding.
    fn check_symbols(&self) -> Result<(), MissionError> {
        let specs = self.modules()?;
        let mut bound: BTreeSet<String> = self.spec.bindings.iter().map(|b| b.symbol.clone()).collect();
        bound.extend(self.spec.safety.keep_out.iter().map(|z| z.name.to_string()));
        let kinds = |name: &Symbol| -> Option<Vec<ValueKind>> {
            specs
                .iter()
                .find(|s| &s.name == name)
                .map(|s| s.params.iter().map(|p| p.kind).collect())
        };
        let mut missing = BTreeSet::new();
        let mut need = |predicate: &Symbol, args: Vec<&Symbol>| {
            if let Some(kinds) = kinds(predicate) {
                for (kind, arg) in kinds.iter().zip(args) {
                    if *kind != ValueKind::Any && !bound.contains(arg.as_str()) {
                        missing.insert(arg.to_string());
                    }
                }
            }
        };
        for spec in &specs {
            if let Implementation::Composite { children } = &spec.implementation {
                for c in children {
                    let consts: Vec<&Symbol> = c
                        .args
                        .iter()
                        .filter_map(|t| match t {
                            Term::Const(s) => Some(s),
                            Term::Var(_) => None,
                        })
                        .collect();
                    if consts.len() == c.args.len() {
                        need(&c.predicate, consts);
                    }
                }
            }
        }
        for plan in &self.spec.scripted_plans {
            for step in &plan.steps {
                if let Ok(atom) = step.parse::<Atom>() {
                    need(&atom.predicate, atom.args.iter().collect());
                }
            }
        }
        for c in &self.spec.coverage {
            if !bound.contains(c.zone.as_str()) {
                missing.insert(c.zone.to_string());
            }
        }
        if missing.is_empty() {
            Ok(())
        } else {
            Err(MissionError::UnboundSymbol(missing.into_iter().collect()))
        }
    }

    pub fn bathymetry_path(&self) -> PathBuf {
        self.dir.join(&self.spec.environment.bathymetry)
    }

    pub fn simulator(&self, seed: u64) -> Result<Simulator, MissionError> {
        let path = self.bathymetry_path();
        let bathymetry = Bathymetry::load(&path)?;
        let env = &self.spec.environment;
        let environment = Environment {
            bathymetry,
            current: env.current,
            current_noise: env.current_noise,
            seed,
            nav_drift: env.nav_drift,
            faults: env.faults.clone(),
        };
        let v = &self.spec.vehicle;
        let mut state = VehicleState::at_surface(v.start.x, v.start.y, v.config.battery);
        state.position.depth = v.start.depth;
        Ok(Simulator::new(environment, v.config.clone(), state))
    }

    pub fn channel(&self, seed: u64) -> ChannelModel {
        ChannelModel {
            drop_probability: self.spec.acoustic.drop_probability,
            one_way_latency: self.spec.acoustic.one_way_latency,
            seed: seed.rotate_left(32) ^ 0xAC0,
        }
    }

    /// Builds an executive and replays the mission setup into it as t = 0
    /// events.
    pub fn executive(&self, seed: u64) -> Result<Executive, MissionError> {
        let sim = self.simulator(seed)?;
        let mut exec = Executive::new(
            sim,
            self.spec.safety.clone(),
            self.channel(seed),
            self.spec.executive.clone(),
        );
        for spec in self.modules()? {
            exec.execute(Command::RegisterBehavior { spec })?;
        }
        for b in &self.spec.bindings {
            exec.execute(Command::Bind {
                symbol: b.symbol.clone(),
                value: b.value.clone(),
            })?;
        }
        for zone in &self.spec.safety.keep_out {
            if exec.world().stores.numerics.resolve(&zone.name).is_none() {
                exec.execute(Command::Bind {
                    symbol: zone.name.to_string(),
                    value: ConcreteValue::Polygon(zone.polygon.clone()),
                })?;
            }
        }
        for c in &self.spec.coverage {
            exec.install_survey(c.clone())?;
        }
        for text in &self.spec.initial_beliefs {
            let atom: Atom = text
                .parse()
                .map_err(|e: crate::symbolic::SymbolicError| CommandError::MalformedGoal(e.to_string()))?;
            exec.assert_belief(atom, true)?;
        }
        for g in &self.spec.goals {
            exec.execute(Command::InjectGoal {
                condition: g.condition.clone(),
                priority: g.priority,
                source: crate::planner::GoalSource::Operator,
            })?;
        }
        let mut stored = Vec::new();
        for plan in &self.spec.scripted_plans {
            let steps = plan
                .steps
                .iter()
                .map(|s| s.parse::<Atom>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| CommandError::InvalidPlan(e.to_string()))?;
            stored.push(steps);
            if let Some(goal_id) = plan.goal {
                exec.execute(Command::OverridePlan {
                    goal_id,
                    steps: plan.steps.clone(),
                })?;
            }
        }
        exec.set_scripted_plans(stored);
        Ok(exec)
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub log_path: Option<PathBuf>,
    /// Overrides the mission's own duration limit.
    pub max_duration: Option<f64>,
}

/// Ticks until every goal is closed or the duration limit is hit.
pub fn drive(exec: &mut Executive, until: f64) -> Result<(), ExecutiveError> {
    exec.run_until(until, Executive::is_quiescent)
}

pub fn record(mission: &Mission, exec: &Executive, seed: u64, log_path: Option<PathBuf>) -> RunRecord {
    RunRecord {
        mission: mission.spec.name.clone(),
        seed,
        config_digest: mission.config_digest.clone(),
        log_path,
        final_digest: exec.digest(),
        sim_time: exec.now(),
        events: exec.events().len(),
        goals: exec.world().goals.values().map(|g| (g.id, g.status)).collect(),
    }
}

pub fn run_mission(mission: &Mission, opts: &RunOptions) -> Result<(RunRecord, Executive), MissionError> {
    let mut exec = mission.executive(opts.seed)?;
    let until = opts.max_duration.unwrap_or(mission.spec.duration);
    drive(&mut exec, until)?;
    if let Some(path) = &opts.log_path {
        write_log(path, exec.lines())?;
    }
    Ok((record(mission, &exec, opts.seed, opts.log_path.clone()), exec))
}

pub fn write_log(path: &Path, lines: &[String]) -> Result<(), MissionError> {
    let mut text = lines.join("\n");
    text.push('\n');
    fs::write(path, text).map_err(|e| MissionError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Folds log lines into a fresh world. Blank lines are skipped.
pub fn replay_lines<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<World, ReplayError> {
    let mut world = World::new();
    for (i, line) in lines.into_iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let event = parse_line(line).map_err(|e| ReplayError::CorruptLog {
            line: i + 1,
            message: e.to_string(),
        })?;
        world
            .apply(&event)
            .map_err(|source| ReplayError::Apply { line: i + 1, source })?;
    }
    Ok(world)
}

pub fn replay_file(path: impl AsRef<Path>) -> Result<World, ReplayError> {
    let path = path.as_ref();
    let io = |e: std::io::Error| ReplayError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    };
    let file = fs::File::open(path).map_err(io)?;
    let mut world = World::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io)?;
        if line.trim().is_empty() {
            continue;
        }
        let event = parse_line(&line).map_err(|e| ReplayError::CorruptLog {
            line: i + 1,
            message: e.to_string(),
        })?;
        world
            .apply(&event)
            .map_err(|source| ReplayError::Apply { line: i + 1, source })?;
    }
    Ok(world)
}

/// Goals still open when a run stopped, highest priority first.
pub fn open_goal_summary(world: &World) -> Vec<(u64, Priority)> {
    let mut open: Vec<(u64, Priority)> = world.open_goals().map(|g| (g.id, g.priority)).collect();
    open.sort_by_key(|&(id, p)| (p, id));
    open
}
