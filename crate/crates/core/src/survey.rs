//! Packages generated tracklines as a registered `survey_<zone>` composite.

use thiserror::Error;

use crate::coverage::{generate_tracklines, CoverageError, CoverageRequest, Tracklines};
use crate::stores::{
    BehaviorSpec, CondEffect, Implementation, NumericsStore, Origin, TerminationCond,
};
use crate::symbolic::{sym, ParamAtom, ParamLiteral, Symbol, SymbolicError, Term};
use crate::values::{ConcreteValue, Point3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurveyError {
    #[error("zone `{0}` is not bound to a polygon")]
    UnboundZone(Symbol),
    #[error(transparent)]
    Coverage(#[from] CoverageError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
}

/// A synthesized behavior plus the waypoint bindings it refers to.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveySynthesis {
    pub spec: BehaviorSpec,
    pub waypoints: Vec<(Symbol, ConcreteValue)>,
    pub tracklines: Tracklines<f64>,
}

pub fn survey_name(zone: &Symbol) -> Symbol {
    sym(&format!("survey_{zone}"))
}

pub fn waypoint_symbol(zone: &Symbol, i: usize) -> Symbol {
    sym(&format!("wp_{zone}_{i}"))
}

fn atom(text: &str) -> ParamAtom {
    text.parse().expect("well-formed template atom")
}

/// Builds `survey_<zone>` as a sequence of `goto(wp_<zone>_<i>)` children.
///
/// Each coverage sensor `s` contributes a conditional effect: when
/// `calibrated(s)` holds at completion, `logged(s_data)` is added.
pub fn synthesize_survey_behavior(
    zone: &Symbol,
    lines: &Tracklines<f64>,
    sensors: &[Symbol],
    numerics: &NumericsStore,
) -> Result<SurveySynthesis, SurveyError> {
    if numerics.resolve(zone).and_then(ConcreteValue::as_polygon).is_none() {
        return Err(SurveyError::UnboundZone(zone.clone()));
    }
    let mut waypoints = Vec::with_capacity(lines.path.len());
    let mut children = Vec::with_capacity(lines.path.len());
    for (i, p) in lines.path.iter().enumerate() {
        let name = waypoint_symbol(zone, i);
        waypoints.push((name.clone(), ConcreteValue::Point(Point3::new(p.x, p.y, 0.0))));
        children.push(ParamAtom {
            predicate: sym("goto"),
            args: vec![Term::Const(name)],
        });
    }
    let conditional = sensors
        .iter()
        .map(|s| CondEffect {
            when: vec![ParamLiteral {
                atom: atom(&format!("calibrated({s})")),
                positive: true,
            }],
            add: vec![atom(&format!("logged({s}_data)"))],
        })
        .collect();
    let spec = BehaviorSpec {
        name: survey_name(zone),
        params: vec![],
        preconditions: vec![ParamLiteral {
            atom: atom("at_depth(operating)"),
            positive: true,
        }],
        add: vec![atom(&format!("did_survey({zone})"))],
        delete: vec![],
        conditional,
        termination: TerminationCond::Immediate,
        implementation: Implementation::Composite { children },
        origin: Origin::Synthesized,
    };
    Ok(SurveySynthesis {
        spec,
        waypoints,
        tracklines: lines.clone(),
    })
}

/// Resolves the zone polygon, generates tracklines and synthesizes the survey.
pub fn plan_survey(
    zone: &Symbol,
    spacing: f64,
    heading_deg: f64,
    entry_hint: Option<crate::Point>,
    sensors: &[Symbol],
    numerics: &NumericsStore,
) -> Result<SurveySynthesis, SurveyError> {
    let polygon = numerics
        .resolve(zone)
        .and_then(ConcreteValue::as_polygon)
        .ok_or_else(|| SurveyError::UnboundZone(zone.clone()))?;
    let lines = generate_tracklines(&CoverageRequest {
        zone: polygon.clone(),
        spacing,
        heading_deg,
        entry_hint,
    })?;
    synthesize_survey_behavior(zone, &lines, sensors, numerics)
}
