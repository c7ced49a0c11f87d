//! Deterministic stand-in for the vehicle and its environment.

mod bathymetry;
mod vehicle;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bathymetry::Bathymetry;
pub use vehicle::{
    apply_command, sense, step, ActuationCmd, Fins, Guidance, SensorFrame, StepOutput, ThrusterMode,
    VehicleConfig, VehicleState, WeightSet,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid command: {0}")]
    InvalidCommand(String),
    #[error("dt {0} outside (0, 10]")]
    InvalidDt(f64),
    #[error("({x}, {y}) is outside the bathymetry grid")]
    OutOfExtent { x: f64, y: f64 },
    #[error("bathymetry: {0}")]
    Bathymetry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FaultKind {
    /// Extra downward rate in m/s.
    Sink { rate: f64 },
    /// Extra current in m/s.
    Current { east: f64, north: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fault {
    pub start: f64,
    pub end: f64,
    #[serde(flatten)]
    pub kind: FaultKind,
}

impl Fault {
    pub fn active(&self, t: f64) -> bool {
        t >= self.start && t < self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub bathymetry: Bathymetry,
    /// Steady current (east, north) in m/s.
    pub current: (f64, f64),
    pub current_noise: f64,
    pub seed: u64,
    /// Dead-reckoning drift (east, north) in m/s.
    pub nav_drift: (f64, f64),
    pub faults: Vec<Fault>,
}

/// A vehicle, its environment and the currently latched command.
#[derive(Debug, Clone)]
pub struct Simulator {
    pub env: Environment,
    pub config: VehicleConfig,
    state: VehicleState,
    pending: Vec<ActuationCmd>,
}

impl Simulator {
    pub fn new(env: Environment, config: VehicleConfig, state: VehicleState) -> Self {
        Simulator {
            env,
            config,
            state,
            pending: Vec::new(),
        }
    }

    pub fn state(&self) -> &VehicleState {
        &self.state
    }

    /// Applies a command to the latched configuration; motion follows on the
    /// next step. Returns a warning for harmless no-ops.
    pub fn command(&mut self, cmd: ActuationCmd) -> Result<Option<String>, SimError> {
        let warning = apply_command(&mut self.state, &cmd, &self.config)?;
        self.pending.push(cmd);
        Ok(warning)
    }

    /// Commands applied since the last step, oldest first.
    pub fn pending(&self) -> &[ActuationCmd] {
        &self.pending
    }

    pub fn step(&mut self, dt: f64) -> Result<(), SimError> {
        self.pending.clear();
        self.state = step(&self.state, &self.env, &self.config, None, dt)?.state;
        Ok(())
    }

    pub fn sense(&self) -> SensorFrame {
        sense(&self.state, &self.env, &self.config)
    }

    /// Resets the dead-reckoning error, as after an external position fix.
    pub fn realign_nav(&mut self) {
        self.state.nav_error = crate::geometry::Point2::new(0.0, 0.0);
    }
}
