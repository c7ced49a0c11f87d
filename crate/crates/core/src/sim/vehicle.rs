//! Kinematic vehicle model: horizontal guidance, ballast-driven vertical
//! motion, DVL altitude and battery drain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Environment, FaultKind, SimError};
use crate::geometry::{angle_diff_deg, bearing_deg, Point2};
use crate::values::Point3;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fins {
    Level,
    DescentCfg,
    AscentCfg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThrusterMode {
    Off,
    Cruise,
    Vertical,
    Ascent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightSet {
    Descent,
    Ascent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum ActuationCmd {
    Goto { target: Point, speed: f64 },
    SetFins { cfg: Fins },
    DropWeights { which: WeightSet },
    SetThrusterMode { mode: ThrusterMode },
    HoldStation,
    AllStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Guidance {
    Idle,
    Goto { target: Point, speed: f64 },
    Hold { at: Point },
}

/// Rates and power draws. Every tunable of the model lives here.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleConfig {
    pub descent_rate: f64,
    pub ascent_rate: f64,
    pub thrust_rate: f64,
    pub max_turn_rate: f64,
    pub max_speed: f64,
    pub min_speed_factor: f64,
    pub cruise_power: f64,
    pub hover_power: f64,
    pub vertical_power: f64,
    pub dvl_range: f64,
    pub battery: f64,
}

impl Default for VehicleConfig {
    fn default() -> Self {
        VehicleConfig {
            descent_rate: 0.7,
            ascent_rate: 0.8,
            thrust_rate: 0.2,
            max_turn_rate: 20.0,
            max_speed: 2.5,
            min_speed_factor: 0.25,
            cruise_power: 150.0,
            hover_power: 60.0,
            vertical_power: 250.0,
            dvl_range: 100.0,
            battery: 2000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    /// True position; `depth` is positive down.
    pub position: Point3,
    pub heading: f64,
    pub speed: f64,
    pub vertical_rate: f64,
    pub battery: f64,
    pub descent_weights_dropped: bool,
    pub ascent_weights_dropped: bool,
    pub fins: Fins,
    pub thruster_mode: ThrusterMode,
    pub dvl_altitude: Option<f64>,
    pub t: f64,
    pub guidance: Guidance,
    /// Dead-reckoning error: navigated position minus true position.
    pub nav_error: Point,
}

impl VehicleState {
    pub fn at_surface(x: f64, y: f64, battery: f64) -> Self {
        VehicleState {
            position: Point3::new(x, y, 0.0),
            heading: 0.0,
            speed: 0.0,
            vertical_rate: 0.0,
            battery,
            descent_weights_dropped: false,
            ascent_weights_dropped: false,
            fins: Fins::Level,
            thruster_mode: ThrusterMode::Off,
            dvl_altitude: None,
            t: 0.0,
            guidance: Guidance::Idle,
            nav_error: Point2::new(0.0, 0.0),
        }
    }

    pub fn nav_position(&self) -> Point {
        self.position.xy().add(self.nav_error)
    }

    pub fn power(&self, cfg: &VehicleConfig) -> f64 {
        match (self.thruster_mode, self.guidance) {
            (ThrusterMode::Vertical | ThrusterMode::Ascent, _) => cfg.vertical_power,
            (_, Guidance::Goto { .. }) => cfg.cruise_power,
            _ => cfg.hover_power,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorFrame {
    /// Externally fixed position, as used for observation.
    pub position: Point3,
    /// Dead-reckoned position, as used for guidance and waypoint capture.
    pub nav_position: Point,
    pub depth: f64,
    pub dvl_altitude: Option<f64>,
    pub battery: f64,
    pub heading: f64,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepOutput {
    pub state: VehicleState,
    pub warnings: Vec<String>,
}

/// Applies an actuation command to the latched vehicle configuration.
pub fn apply_command(
    state: &mut VehicleState,
    cmd: &ActuationCmd,
    cfg: &VehicleConfig,
) -> Result<Option<String>, SimError> {
    match cmd {
        ActuationCmd::Goto { target, speed } => {
            if !(*speed > 0.0 && *speed <= cfg.max_speed) || !target.x.is_finite() || !target.y.is_finite() {
                return Err(SimError::InvalidCommand(format!(
                    "goto speed {speed} outside (0, {}]",
                    cfg.max_speed
                )));
            }
            state.guidance = Guidance::Goto {
                target: *target,
                speed: *speed,
            };
            state.thruster_mode = ThrusterMode::Cruise;
        }
        ActuationCmd::SetFins { cfg } => state.fins = *cfg,
        ActuationCmd::DropWeights { which } => {
            let flag = match which {
                WeightSet::Descent => &mut state.descent_weights_dropped,
                WeightSet::Ascent => &mut state.ascent_weights_dropped,
            };
            if *flag {
                return Ok(Some(format!("{which:?} weights already dropped").to_lowercase()));
            }
            *flag = true;
        }
        ActuationCmd::SetThrusterMode { mode } => state.thruster_mode = *mode,
        ActuationCmd::HoldStation => {
            state.guidance = Guidance::Hold {
                at: state.nav_position(),
            }
        }
        ActuationCmd::AllStop => {
            state.guidance = Guidance::Idle;
            state.thruster_mode = ThrusterMode::Off;
        }
    }
    Ok(None)
}

/// Uniform current noise in `[-amp, amp]²`, a pure function of `(seed, t)`.
fn current_noise(seed: u64, t: f64, amp: f64) -> Point {
    if amp <= 0.0 {
        return Point2::new(0.0, 0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ t.to_bits().rotate_left(17));
    Point2::new(rng.gen_range(-amp..=amp), rng.gen_range(-amp..=amp))
}

fn vertical_rate(state: &VehicleState, cfg: &VehicleConfig) -> f64 {
    let mut rate = if state.ascent_weights_dropped {
        -cfg.ascent_rate
    } else if !state.descent_weights_dropped && state.fins == Fins::DescentCfg {
        cfg.descent_rate
    } else {
        0.0
    };
    match state.thruster_mode {
        ThrusterMode::Vertical if rate > 0.0 => rate = (rate - cfg.thrust_rate).max(0.0),
        ThrusterMode::Ascent => rate -= cfg.thrust_rate,
        _ => {}
    }
    rate
}

/// Advances the vehicle by `dt` seconds, optionally applying `cmd` first.
pub fn step(
    state: &VehicleState,
    env: &Environment,
    cfg: &VehicleConfig,
    cmd: Option<&ActuationCmd>,
    dt: f64,
) -> Result<StepOutput, SimError> {
    if !(dt > 0.0 && dt <= 10.0) {
        return Err(SimError::InvalidDt(dt));
    }
    let mut s = state.clone();
    let mut warnings = Vec::new();
    if let Some(cmd) = cmd {
        warnings.extend(apply_command(&mut s, cmd, cfg)?);
    }
    let t = s.t;

    // current first, guidance second
    let mut current = Point2::new(env.current.0, env.current.1).add(current_noise(env.seed, t, env.current_noise));
    let mut sink = 0.0;
    for fault in env.faults.iter().filter(|f| f.active(t)) {
        match fault.kind {
            FaultKind::Current { east, north } => current = current.add(Point2::new(east, north)),
            FaultKind::Sink { rate } => sink += rate,
        }
    }
    let start = s.position.xy();
    if !matches!(s.guidance, Guidance::Hold { .. }) {
        let p = start.add(current.scale(dt));
        s.position.x = p.x;
        s.position.y = p.y;
    }
    match s.guidance {
        Guidance::Goto { target, speed } => {
            let nav = s.nav_position();
            let to_go = target.sub(nav);
            let remaining = to_go.norm();
            if remaining <= speed * dt {
                if remaining > 0.0 {
                    s.heading = bearing_deg(to_go);
                }
                let p = target.sub(s.nav_error);
                s.position.x = p.x;
                s.position.y = p.y;
            } else {
                let want = bearing_deg(to_go);
                let err = angle_diff_deg(s.heading, want);
                let max_turn = cfg.max_turn_rate * dt;
                let turned = err.clamp(-max_turn, max_turn);
                s.heading = (s.heading + turned).rem_euclid(360.0);
                let residual = (err - turned).to_radians();
                let v = speed * residual.cos().max(cfg.min_speed_factor);
                let h = s.heading.to_radians();
                s.position.x += h.sin() * v * dt;
                s.position.y += h.cos() * v * dt;
            }
        }
        Guidance::Hold { at } => {
            let p = at.sub(s.nav_error);
            s.position.x = p.x;
            s.position.y = p.y;
        }
        Guidance::Idle => {}
    }
    s.speed = s.position.xy().dist(start) / dt;

    let rate = vertical_rate(&s, cfg) + sink;
    s.vertical_rate = rate;
    let floor = env.bathymetry.depth_clamped(s.position.x, s.position.y);
    s.position.depth = (s.position.depth + rate * dt).clamp(0.0, floor);

    let drain = s.power(cfg) * dt / 3600.0;
    s.battery = (s.battery - drain).max(0.0);
    s.nav_error = s.nav_error.add(Point2::new(env.nav_drift.0, env.nav_drift.1).scale(dt));
    s.t = t + dt;
    let altitude = floor - s.position.depth;
    s.dvl_altitude = (altitude <= cfg.dvl_range).then_some(altitude);
    Ok(StepOutput { state: s, warnings })
}

pub fn sense(state: &VehicleState, env: &Environment, cfg: &VehicleConfig) -> SensorFrame {
    let floor = env.bathymetry.depth_clamped(state.position.x, state.position.y);
    let altitude = floor - state.position.depth;
    SensorFrame {
        position: state.position,
        nav_position: state.nav_position(),
        depth: state.position.depth,
        dvl_altitude: (altitude <= cfg.dvl_range).then_some(altitude),
        battery: state.battery,
        heading: state.heading,
        t: state.t,
    }
}
