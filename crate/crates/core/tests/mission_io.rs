//! Mission loading, log replay and operator command errors.

use std::path::Path;

use benthic::executive::{Command, CommandError, CommandReply, EventBody};
use benthic::mission::{load_mission, parse_mission, replay_lines, Mission, MissionError, ReplayError};
use benthic::planner::Priority;
use benthic::geometry::Point2;
use benthic::values::{ConcreteValue, Unit};
use benthic::Polygon;
use proptest::prelude::*;
use serde_json::Value;

fn fixtures() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures"))
}

fn base_json() -> Value {
    let text = std::fs::read_to_string(fixtures().join("dive768.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

fn parse(v: &Value) -> Result<Mission, MissionError> {
    parse_mission(&v.to_string(), fixtures())
}

#[test]
fn schema_errors_name_the_offending_path() {
    let mut v = base_json();
    v["vehicle"]["start"]["x"] = Value::String("east".into());
    match parse(&v) {
        Err(MissionError::Schema { path, .. }) => assert_eq!(path, "vehicle.start.x"),
        other => panic!("{other:?}"),
    }

    let mut v = base_json();
    v["safety"]["max_dpeth"] = 10.into();
    match parse(&v) {
        Err(MissionError::Schema { path, message }) => {
            assert_eq!(path, "safety.max_dpeth");
            assert!(message.contains("max_dpeth"), "{message}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unbound_symbols_are_reported_together() {
    let mut v = base_json();
    let bindings = v["bindings"].as_array_mut().unwrap();
    bindings.retain(|b| b["symbol"] != "op_depth_band" && b["symbol"] != "zone_a");
    match parse(&v) {
        Err(MissionError::UnboundSymbol(names)) => {
            assert!(names.contains(&"op_depth_band".to_string()), "{names:?}");
            assert!(names.contains(&"zone_a".to_string()), "{names:?}");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_module_is_rejected() {
    let mut v = base_json();
    v["behavior_modules"].as_array_mut().unwrap().push("teleport".into());
    assert!(matches!(parse(&v), Err(MissionError::UnknownModule(m)) if m == "teleport"));
}

#[test]
fn missing_bathymetry_fails_at_setup() {
    let mut v = base_json();
    v["environment"]["bathymetry"] = "nowhere.csv".into();
    let mission = parse(&v).unwrap();
    assert!(matches!(mission.executive(1), Err(MissionError::Bathymetry(_))));
}

#[test]
fn config_digest_tracks_content() {
    let a = load_mission(fixtures().join("dive768.json")).unwrap();
    let b = parse(&base_json()).unwrap();
    assert_eq!(a.config_digest, b.config_digest);
    let mut v = base_json();
    v["duration"] = 100.0.into();
    assert_ne!(parse(&v).unwrap().config_digest, a.config_digest);
}

fn short_log() -> Vec<String> {
    let mission = load_mission(fixtures().join("dive768.json")).unwrap();
    let mut exec = mission.executive(3).unwrap();
    exec.run_until(50.0, |_| false).unwrap();
    exec.lines().to_vec()
}

#[test]
fn corrupt_line_is_located() {
    let mut lines = short_log();
    lines[40] = lines[40][..lines[40].len() / 2].to_string();
    match replay_lines(lines.iter().map(String::as_str)) {
        Err(ReplayError::CorruptLog { line, .. }) => assert_eq!(line, 41),
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_line_breaks_the_sequence() {
    let mut lines = short_log();
    lines.remove(10);
    match replay_lines(lines.iter().map(String::as_str)) {
        Err(ReplayError::Apply { line, .. }) => assert_eq!(line, 11),
        other => panic!("{other:?}"),
    }
}

#[test]
fn prefix_replay_matches_live_state_at_that_point() {
    let mission = load_mission(fixtures().join("dive768.json")).unwrap();
    let mut exec = mission.executive(3).unwrap();
    exec.run_until(20.0, |_| false).unwrap();
    let mid = exec.digest();
    let cut = exec.lines().len();
    exec.run_until(60.0, |_| false).unwrap();
    let world = replay_lines(exec.lines()[..cut].iter().map(String::as_str)).unwrap();
    assert_eq!(world.digest(), mid);
}

#[test]
fn command_errors() {
    let mission = load_mission(fixtures().join("dive768.json")).unwrap();
    let mut exec = mission.executive(1).unwrap();
    let bad_goal = exec.execute(Command::InjectGoal {
        condition: "did_survey(".into(),
        priority: Priority::Operator,
        source: benthic::planner::GoalSource::Operator,
    });
    assert!(matches!(bad_goal, Err(CommandError::MalformedGoal(_))), "{bad_goal:?}");
    let unknown = exec.execute(Command::OverridePlan {
        goal_id: 42,
        steps: vec!["ascend()".into()],
    });
    assert!(matches!(unknown, Err(CommandError::UnknownGoal(42))), "{unknown:?}");
    let garbled = exec.execute(Command::OverridePlan {
        goal_id: 0,
        steps: vec!["ascend(".into()],
    });
    assert!(matches!(garbled, Err(CommandError::InvalidPlan(_))), "{garbled:?}");
    let nonsense = exec.execute(Command::OverridePlan {
        goal_id: 0,
        steps: vec!["teleport(home)".into()],
    });
    assert!(matches!(nonsense, Err(CommandError::UnknownBehavior(_))), "{nonsense:?}");
    let wrong_kind = exec.execute(Command::Bind {
        symbol: "zone_a".into(),
        value: ConcreteValue::scalar(3.0, Unit::Metres),
    });
    assert!(matches!(wrong_kind, Err(CommandError::InvalidBinding(_))), "{wrong_kind:?}");
    let unknown_behavior = exec.execute(Command::ReplaceImplementation {
        name: "teleport".into(),
        implementation: benthic::stores::Implementation::Composite { children: vec![] },
    });
    assert!(
        matches!(unknown_behavior, Err(CommandError::UnknownBehavior(_))),
        "{unknown_behavior:?}"
    );
}

#[test]
fn rebinding_a_zone_resynthesizes_its_survey() {
    let mission = load_mission(fixtures().join("dive768.json")).unwrap();
    let mut exec = mission.executive(1).unwrap();
    let before = exec.events().len();
    let square = |s: f64| {
        ConcreteValue::Polygon(
            Polygon::new(vec![
                Point2::new(0.0, 0.0),
                Point2::new(s, 0.0),
                Point2::new(s, s),
                Point2::new(0.0, s),
            ])
            .unwrap(),
        )
    };
    let reply = exec
        .execute(Command::Bind {
            symbol: "zone_a".into(),
            value: square(600.0),
        })
        .unwrap();
    assert!(matches!(reply, CommandReply::Binding { version: 2, .. }), "{reply:?}");
    let kinds: Vec<&str> = exec.events()[before..].iter().map(|e| e.kind()).collect();
    assert_eq!(kinds.first(), Some(&"binding_changed"));
    assert!(kinds.contains(&"behavior_replaced"), "{kinds:?}");
    let replaced_at = kinds.iter().position(|k| *k == "behavior_replaced").unwrap();
    assert!(kinds[1..replaced_at].iter().all(|k| *k == "binding_changed"));
    assert!(exec.events().iter().any(|e| matches!(
        &e.body,
        EventBody::BehaviorReplaced { name, version: 2, .. } if name.as_str() == "survey_zone_a"
    )));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn replay_reproduces_any_binding_history(
        values in prop::collection::vec((0usize..3, 1.0f64..5000.0), 1..20),
        gaps in prop::collection::vec(0u32..5, 20),
    ) {
        let mission = load_mission(fixtures().join("dive768.json")).unwrap();
        let mut exec = mission.executive(9).unwrap();
        let names = ["op_depth_band", "alt_threshold", "probe"];
        for (i, (which, v)) in values.iter().enumerate() {
            exec.execute(Command::Bind {
                symbol: names[*which].into(),
                value: ConcreteValue::scalar(*v, Unit::Metres),
            })
            .unwrap();
            for _ in 0..gaps[i] {
                exec.tick().unwrap();
            }
        }
        let world = replay_lines(exec.lines().iter().map(String::as_str)).unwrap();
        prop_assert_eq!(world.digest(), exec.digest());
        let probes = values.iter().filter(|(w, _)| *w == 2).count() as u64;
        let symbol = benthic::symbolic::Symbol::new("probe").unwrap();
        let version = exec.world().stores.numerics.binding(&symbol).map_or(0, |b| b.version);
        prop_assert_eq!(version, probes);
    }
}
