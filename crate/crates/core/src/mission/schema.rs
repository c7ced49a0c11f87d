//! On-disk mission description.

use serde::{Deserialize, Serialize};

use crate::acoustic::ChannelModel;
use crate::executive::{CoverageSetup, ExecutiveConfig, SafetyEnvelope};
use crate::planner::Priority;
use crate::sim::{Fault, VehicleConfig};
use crate::values::{ConcreteValue, Point3};

pub const DEFAULT_DURATION_S: f64 = 86_400.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionSpec {
    pub name: String,
    #[serde(default)]
    pub behavior_modules: Vec<String>,
    #[serde(default)]
    pub bindings: Vec<BindingSpec>,
    #[serde(default)]
    pub initial_beliefs: Vec<String>,
    #[serde(default)]
    pub coverage: Vec<CoverageSetup>,
    #[serde(default)]
    pub goals: Vec<GoalSpec>,
    #[serde(default)]
    pub scripted_plans: Vec<ScriptedPlan>,
    pub safety: SafetyEnvelope,
    pub environment: EnvironmentSpec,
    pub vehicle: VehicleSpec,
    #[serde(default)]
    pub acoustic: AcousticSpec,
    #[serde(default)]
    pub executive: ExecutiveConfig,
    /// Sim-time limit of a run, in seconds.
    #[serde(default = "default_duration")]
    pub duration: f64,
}

fn default_duration() -> f64 {
    DEFAULT_DURATION_S
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BindingSpec {
    pub symbol: String,
    pub value: ConcreteValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoalSpec {
    pub condition: String,
    #[serde(default = "operator")]
    pub priority: Priority,
}

fn operator() -> Priority {
    Priority::Operator
}

/// A stored plan. Addressable by index from the acoustic link; applied to
/// `goal` at load time when one is given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptedPlan {
    #[serde(default)]
    pub goal: Option<u64>,
    pub steps: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvironmentSpec {
    /// CSV grid, relative to the mission file.
    pub bathymetry: String,
    #[serde(default)]
    pub current: (f64, f64),
    #[serde(default)]
    pub current_noise: f64,
    #[serde(default)]
    pub nav_drift: (f64, f64),
    #[serde(default)]
    pub faults: Vec<Fault>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VehicleSpec {
    pub start: Point3,
    #[serde(default)]
    pub config: VehicleConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcousticSpec {
    pub drop_probability: f64,
    pub one_way_latency: f64,
}

impl Default for AcousticSpec {
    fn default() -> Self {
        let c = ChannelModel::default();
        AcousticSpec {
            drop_probability: c.drop_probability,
            one_way_latency: c.one_way_latency,
        }
    }
}
