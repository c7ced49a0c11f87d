//! Built-in behavior modules a mission can load by name.

use crate::stores::{
    Amount, BehaviorSpec, CommandTemplate, Implementation, Origin, Param, TerminationCond,
};
use crate::symbolic::{sym, ParamAtom, ParamLiteral, Term};
use crate::values::ValueKind;

pub const MODULES: &[&str] = &["sentry_core", "navigation"];

/// Capture radius of a plain goto, in metres.
pub const GOTO_CAPTURE_M: f64 = 5.0;
/// Distance kept from a keep-out boundary when leaving it.
pub const EXIT_MARGIN_M: f64 = 10.0;
pub const DEFAULT_SPEED: f64 = 1.0;
pub const CALIBRATION_S: f64 = 120.0;

fn var(name: &str) -> Term {
    Term::Var(name.parse().expect("variable"))
}

fn atom(text: &str) -> ParamAtom {
    text.parse().expect("template atom")
}

fn lit(text: &str) -> ParamLiteral {
    let (positive, body) = match text.strip_prefix('!') {
        Some(rest) => (false, rest),
        None => (true, text),
    };
    ParamLiteral {
        atom: atom(body),
        positive,
    }
}

struct Spec {
    inner: BehaviorSpec,
}

impl Spec {
    fn primitive(name: &str, command: CommandTemplate, termination: TerminationCond) -> Self {
        Spec {
            inner: BehaviorSpec {
                name: sym(name),
                params: vec![],
                preconditions: vec![],
                add: vec![],
                delete: vec![],
                conditional: vec![],
                termination,
                implementation: Implementation::Primitive { command },
                origin: Origin::Builtin,
            },
        }
    }

    fn composite(name: &str, children: &[&str]) -> Self {
        let mut s = Spec::primitive(name, CommandTemplate::Wait, TerminationCond::Immediate);
        s.inner.implementation = Implementation::Composite {
            children: children.iter().map(|c| atom(c)).collect(),
        };
        s
    }

    fn param(mut self, name: &str, kind: ValueKind) -> Self {
        self.inner.params.push(Param::new(name, kind));
        self
    }

    fn pre(mut self, lits: &[&str]) -> Self {
        self.inner.preconditions = lits.iter().map(|l| lit(l)).collect();
        self
    }

    fn add(mut self, atoms: &[&str]) -> Self {
        self.inner.add = atoms.iter().map(|a| atom(a)).collect();
        self
    }

    fn del(mut self, atoms: &[&str]) -> Self {
        self.inner.delete = atoms.iter().map(|a| atom(a)).collect();
        self
    }
}

fn sentry_core() -> Vec<BehaviorSpec> {
    use CommandTemplate as C;
    use TerminationCond as T;
    let immediate = || T::Immediate;
    vec![
        Spec::primitive("set_fins", C::SetFins { cfg: var("?cfg") }, immediate()).param("cfg", ValueKind::Any),
        Spec::primitive(
            "wait_until_depth",
            C::Wait,
            T::DepthWithin {
                target: Amount::Ref(var("?target")),
                band: 1.0,
            },
        )
        .param("target", ValueKind::Scalar),
        Spec::primitive(
            "wait_until_dvl",
            C::Wait,
            T::DvlAltitudeBelow {
                threshold: Amount::Ref(var("?threshold")),
            },
        )
        .param("threshold", ValueKind::Scalar),
        Spec::primitive("vertical_thrust", C::VerticalThrust { state: var("?state") }, immediate())
            .param("state", ValueKind::Any),
        Spec::primitive("drop_weights", C::DropWeights { which: var("?which") }, immediate())
            .param("which", ValueKind::Any),
        Spec::primitive("set_thruster_mode", C::SetThrusterMode { mode: var("?mode") }, immediate())
            .param("mode", ValueKind::Any),
        Spec::primitive("hold_station", C::HoldStation, immediate()),
        Spec::composite(
            "descend",
            &[
                "set_fins(descent_cfg)",
                "wait_until_depth(op_depth_band)",
                "wait_until_dvl(alt_threshold)",
                "vertical_thrust(on)",
                "drop_weights(descent)",
            ],
        )
        .pre(&["at_depth(surface)", "!weights_dropped(descent)"])
        .add(&["at_depth(operating)", "weights_dropped(descent)"])
        .del(&["at_depth(surface)"]),
        Spec::composite(
            "ascend",
            &[
                "drop_weights(ascent)",
                "set_thruster_mode(ascent)",
                "wait_until_depth(surface_band)",
            ],
        )
        .pre(&["at_depth(operating)"])
        .add(&["at_depth(surface)"])
        .del(&["at_depth(operating)"]),
        Spec::composite(
            "ready_for_recovery_seq",
            &[
                "drop_weights(ascent)",
                "set_thruster_mode(ascent)",
                "wait_until_depth(surface_band)",
                "hold_station()",
            ],
        )
        .add(&["ready_for_recovery()", "at_depth(surface)"])
        .del(&["at_depth(operating)"]),
        Spec::primitive(
            "emergency_ascent",
            C::DropWeights {
                which: Term::Const(sym("ascent")),
            },
            T::DepthWithin {
                target: Amount::Value(0.0),
                band: 1.0,
            },
        )
        .add(&["at_depth(surface)"])
        .del(&["at_depth(operating)"]),
        Spec::primitive(
            "calibrate_magnetometer",
            C::HoldStation,
            T::Elapsed {
                seconds: Amount::Value(CALIBRATION_S),
            },
        )
        .pre(&["at_depth(operating)"])
        .add(&["calibrated(magnetometer)"]),
    ]
    .into_iter()
    .map(|s| s.inner)
    .collect()
}

fn navigation() -> Vec<BehaviorSpec> {
    use CommandTemplate as C;
    use TerminationCond as T;
    vec![
        Spec::primitive(
            "goto",
            C::Goto {
                target: var("?wp"),
                speed: DEFAULT_SPEED,
            },
            T::ReachedWaypoint {
                capture_radius: GOTO_CAPTURE_M,
            },
        )
        .param("wp", ValueKind::Point)
        .add(&["at(?wp)"]),
        Spec::primitive(
            "follow_path",
            C::FollowPath {
                path: var("?path"),
                speed: DEFAULT_SPEED,
            },
            T::Immediate,
        )
        .param("path", ValueKind::Path)
        .add(&["followed(?path)"]),
        Spec::primitive(
            "exit_keep_out",
            C::LeavePolygon {
                zone: var("?z"),
                margin: EXIT_MARGIN_M,
                speed: DEFAULT_SPEED,
            },
            T::ReachedWaypoint { capture_radius: 1.0 },
        )
        .param("z", ValueKind::Polygon)
        .add(&["clear_of(?z)"]),
        Spec::primitive("sample", C::HoldStation, T::Immediate)
            .param("wp", ValueKind::Point)
            .pre(&["at(?wp)"])
            .add(&["sampled(?wp)"]),
    ]
    .into_iter()
    .map(|s| s.inner)
    .collect()
}

/// Specs of a named module in registration order (children before parents).
pub fn module(name: &str) -> Option<Vec<BehaviorSpec>> {
    match name {
        "sentry_core" => Some(sentry_core()),
        "navigation" => Some(navigation()),
        _ => None,
    }
}
