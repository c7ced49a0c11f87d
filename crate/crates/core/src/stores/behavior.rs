//! Behavior library: specs, composition graph and implementation swaps.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::symbolic::{ParamAtom, ParamLiteral, Symbol, Term, Var};
use crate::values::ValueKind;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Param {
    pub var: Var,
    #[serde(default)]
    pub kind: ValueKind,
}

impl Param {
    pub fn new(var: &str, kind: ValueKind) -> Self {
        Param {
            var: Var::new(var).expect("valid variable name"),
            kind,
        }
    }
}

/// A threshold given directly or through a bound symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amount {
    Value(f64),
    Ref(Term),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TerminationCond {
    ReachedWaypoint { capture_radius: f64 },
    DepthWithin { target: Amount, band: f64 },
    DvlAltitudeBelow { threshold: Amount },
    Elapsed { seconds: Amount },
    Immediate,
}

impl TerminationCond {
    fn positive(&self) -> bool {
        let ok = |a: &Amount| !matches!(a, Amount::Value(v) if *v <= 0.0 || !v.is_finite());
        match self {
            TerminationCond::ReachedWaypoint { capture_radius } => *capture_radius > 0.0,
            TerminationCond::DepthWithin { band, .. } => *band > 0.0,
            TerminationCond::DvlAltitudeBelow { threshold } => ok(threshold),
            TerminationCond::Elapsed { seconds } => ok(seconds),
            TerminationCond::Immediate => true,
        }
    }

    fn terms(&self) -> Vec<&Term> {
        fn amount(a: &Amount) -> Option<&Term> {
            match a {
                Amount::Ref(t) => Some(t),
                Amount::Value(_) => None,
            }
        }
        match self {
            TerminationCond::DepthWithin { target, .. } => amount(target).into_iter().collect(),
            TerminationCond::DvlAltitudeBelow { threshold } => amount(threshold).into_iter().collect(),
            TerminationCond::Elapsed { seconds } => amount(seconds).into_iter().collect(),
            _ => vec![],
        }
    }
}

/// Actuation issued when a primitive is dispatched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandTemplate {
    Goto { target: Term, speed: f64 },
    FollowPath { path: Term, speed: f64 },
    LeavePolygon { zone: Term, margin: f64, speed: f64 },
    SetFins { cfg: Term },
    DropWeights { which: Term },
    SetThrusterMode { mode: Term },
    VerticalThrust { state: Term },
    HoldStation,
    AllStop,
    Wait,
}

impl CommandTemplate {
    fn terms(&self) -> Vec<&Term> {
        match self {
            CommandTemplate::Goto { target, .. } => vec![target],
            CommandTemplate::FollowPath { path, .. } => vec![path],
            CommandTemplate::LeavePolygon { zone, .. } => vec![zone],
            CommandTemplate::SetFins { cfg } => vec![cfg],
            CommandTemplate::DropWeights { which } => vec![which],
            CommandTemplate::SetThrusterMode { mode } => vec![mode],
            CommandTemplate::VerticalThrust { state } => vec![state],
            CommandTemplate::HoldStation | CommandTemplate::AllStop | CommandTemplate::Wait => vec![],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Implementation {
    Primitive { command: CommandTemplate },
    Composite { children: Vec<ParamAtom> },
}

impl Implementation {
    pub fn children(&self) -> &[ParamAtom] {
        match self {
            Implementation::Composite { children } => children,
            Implementation::Primitive { .. } => &[],
        }
    }
}

/// Extra atoms added when `when` holds as the behavior completes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondEffect {
    pub when: Vec<ParamLiteral>,
    pub add: Vec<ParamAtom>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Builtin,
    Synthesized,
    Operator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorSpec {
    pub name: Symbol,
    #[serde(default)]
    pub params: Vec<Param>,
    #[serde(default)]
    pub preconditions: Vec<ParamLiteral>,
    #[serde(default)]
    pub add: Vec<ParamAtom>,
    #[serde(default)]
    pub delete: Vec<ParamAtom>,
    #[serde(default)]
    pub conditional: Vec<CondEffect>,
    pub termination: TerminationCond,
    pub implementation: Implementation,
    pub origin: Origin,
}

impl BehaviorSpec {
    pub fn is_composite(&self) -> bool {
        matches!(self.implementation, Implementation::Composite { .. })
    }

    pub fn has_effects(&self) -> bool {
        !self.add.is_empty() || !self.delete.is_empty() || !self.conditional.is_empty()
    }

    fn validate(&self) -> Result<(), StoreError> {
        let invalid = |msg: String| Err(StoreError::InvalidSpec(self.name.clone(), msg));
        let declared: BTreeSet<&Var> = self.params.iter().map(|p| &p.var).collect();
        if declared.len() != self.params.len() {
            return invalid("duplicate parameter".into());
        }
        let mut used: Vec<&Var> = Vec::new();
        for lit in &self.preconditions {
            used.extend(lit.atom.vars());
        }
        for a in self.add.iter().chain(&self.delete).chain(self.implementation.children()) {
            used.extend(a.vars());
        }
        for c in &self.conditional {
            for lit in &c.when {
                used.extend(lit.atom.vars());
            }
            for a in &c.add {
                used.extend(a.vars());
            }
        }
        let mut terms = self.termination.terms();
        if let Implementation::Primitive { command } = &self.implementation {
            terms.extend(command.terms());
        }
        used.extend(terms.into_iter().filter_map(|t| match t {
            Term::Var(v) => Some(v),
            Term::Const(_) => None,
        }));
        if let Some(v) = used.iter().find(|v| !declared.contains(*v)) {
            return invalid(format!("variable {v} is not a parameter"));
        }
        if let Some(a) = self.add.iter().find(|a| self.delete.contains(a)) {
            return invalid(format!("{a} is both added and deleted"));
        }
        if !self.termination.positive() {
            return invalid("termination thresholds must be positive".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorEntry {
    pub id: u64,
    pub version: u64,
    pub spec: BehaviorSpec,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BehaviorStore {
    entries: BTreeMap<Symbol, BehaviorEntry>,
    next_id: u64,
}

impl BehaviorStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, name: &Symbol) -> Option<&BehaviorEntry> {
        self.entries.get(name)
    }

    pub fn spec(&self, name: &Symbol) -> Result<&BehaviorSpec, StoreError> {
        self.entries
            .get(name)
            .map(|e| &e.spec)
            .ok_or_else(|| StoreError::UnknownBehavior(name.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &BehaviorEntry> {
        self.entries.values()
    }

    pub fn specs(&self) -> impl Iterator<Item = &BehaviorSpec> {
        self.entries.values().map(|e| &e.spec)
    }

    /// Checks a spec without registering it.
    pub fn check(&self, spec: &BehaviorSpec) -> Result<(), StoreError> {
        if self.entries.contains_key(&spec.name) {
            return Err(StoreError::DuplicateName(spec.name.clone()));
        }
        spec.validate()?;
        self.check_children(&spec.name, &spec.implementation)
    }

    pub fn register(&mut self, spec: BehaviorSpec) -> Result<u64, StoreError> {
        self.check(&spec)?;
        let id = self.next_id;
        self.next_id += 1;
        self.entries.insert(
            spec.name.clone(),
            BehaviorEntry {
                id,
                version: 1,
                spec,
            },
        );
        Ok(id)
    }

    pub fn check_replacement(&self, name: &Symbol, imp: &Implementation) -> Result<(), StoreError> {
        let entry = self
            .entries
            .get(name)
            .ok_or_else(|| StoreError::UnknownBehavior(name.clone()))?;
        let mut candidate = entry.spec.clone();
        candidate.implementation = imp.clone();
        candidate.validate()?;
        self.check_children(name, imp)?;
        let mut graph = self.clone();
        graph.entries.get_mut(name).expect("present").spec = candidate;
        if let Some(cycle) = graph.find_cycle(name) {
            return Err(StoreError::CycleDetected(cycle));
        }
        Ok(())
    }

    /// Restores an entry exactly as recorded, bypassing validation.
    pub fn restore(&mut self, entry: BehaviorEntry) {
        self.next_id = self.next_id.max(entry.id + 1);
        self.entries.insert(entry.spec.name.clone(), entry);
    }

    /// Restores a recorded implementation swap. Returns false for unknown names.
    pub fn restore_implementation(&mut self, name: &Symbol, imp: Implementation, version: u64) -> bool {
        match self.entries.get_mut(name) {
            Some(entry) => {
                entry.spec.implementation = imp;
                entry.version = version;
                true
            }
            None => false,
        }
    }

    pub fn next_id(&self) -> u64 {
        self.next_id
    }

    /// Swaps the implementation, leaving preconditions and effects untouched.
    pub fn replace_implementation(
        &mut self,
        name: &Symbol,
        imp: Implementation,
    ) -> Result<u64, StoreError> {
        self.check_replacement(name, &imp)?;
        let entry = self.entries.get_mut(name).expect("checked");
        entry.spec.implementation = imp;
        entry.version += 1;
        Ok(entry.version)
    }

    fn check_children(&self, name: &Symbol, imp: &Implementation) -> Result<(), StoreError> {
        for child in imp.children() {
            if &child.predicate == name {
                return Err(StoreError::CycleDetected(vec![name.clone(), name.clone()]));
            }
            let spec = self
                .entries
                .get(&child.predicate)
                .map(|e| &e.spec)
                .ok_or_else(|| StoreError::UnknownChild(child.predicate.clone()))?;
            if spec.params.len() != child.args.len() {
                return Err(StoreError::InvalidSpec(
                    name.clone(),
                    format!(
                        "child {child} passes {} arguments, {} expected",
                        child.args.len(),
                        spec.params.len()
                    ),
                ));
            }
        }
        Ok(())
    }

    fn find_cycle(&self, start: &Symbol) -> Option<Vec<Symbol>> {
        fn dfs(
            store: &BehaviorStore,
            node: &Symbol,
            stack: &mut Vec<Symbol>,
            done: &mut BTreeSet<Symbol>,
        ) -> Option<Vec<Symbol>> {
            if let Some(pos) = stack.iter().position(|s| s == node) {
                let mut cycle = stack[pos..].to_vec();
                cycle.push(node.clone());
                return Some(cycle);
            }
            if done.contains(node) {
                return None;
            }
            stack.push(node.clone());
            if let Some(entry) = store.entries.get(node) {
                for child in entry.spec.implementation.children() {
                    if let Some(c) = dfs(store, &child.predicate, stack, done) {
                        return Some(c);
                    }
                }
            }
            stack.pop();
            done.insert(node.clone());
            None
        }
        dfs(self, start, &mut Vec::new(), &mut BTreeSet::new())
    }

    pub fn is_acyclic(&self) -> bool {
        self.entries.keys().all(|k| self.find_cycle(k).is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::sym;

    fn primitive(name: &str, params: &[&str], add: &[&str]) -> BehaviorSpec {
        BehaviorSpec {
            name: sym(name),
            params: params.iter().map(|p| Param::new(p, ValueKind::Any)).collect(),
            preconditions: vec![],
            add: add.iter().map(|a| a.parse().unwrap()).collect(),
            delete: vec![],
            conditional: vec![],
            termination: TerminationCond::Immediate,
            implementation: Implementation::Primitive {
                command: CommandTemplate::Wait,
            },
            origin: Origin::Builtin,
        }
    }

    fn composite(name: &str, children: &[&str]) -> BehaviorSpec {
        BehaviorSpec {
            implementation: Implementation::Composite {
                children: children.iter().map(|c| c.parse().unwrap()).collect(),
            },
            ..primitive(name, &[], &[])
        }
    }

    #[test]
    fn register_first_behavior() {
        let mut store = BehaviorStore::new();
        let id = store.register(primitive("goto", &["wp"], &["at(?wp)"])).unwrap();
        assert_eq!(id, 0);
        assert_eq!(store.len(), 1);
        assert_eq!(
            store.register(primitive("goto", &["wp"], &["at(?wp)"])),
            Err(StoreError::DuplicateName(sym("goto")))
        );
    }

    #[test]
    fn composite_requires_registered_children() {
        let mut store = BehaviorStore::new();
        assert_eq!(
            store.register(composite("descend", &["set_fins(descent_cfg)"])),
            Err(StoreError::UnknownChild(sym("set_fins")))
        );
        store.register(primitive("set_fins", &["cfg"], &[])).unwrap();
        store.register(composite("descend", &["set_fins(descent_cfg)"])).unwrap();
        assert!(matches!(
            store.register(composite("bad", &["set_fins()"])),
            Err(StoreError::InvalidSpec(..))
        ));
    }

    #[test]
    fn self_reference_is_a_cycle() {
        let mut store = BehaviorStore::new();
        assert_eq!(
            store.register(composite("loop", &["loop()"])),
            Err(StoreError::CycleDetected(vec![sym("loop"), sym("loop")]))
        );
    }

    #[test]
    fn replacement_cycle_is_rejected() {
        let mut store = BehaviorStore::new();
        store.register(primitive("leaf", &[], &[])).unwrap();
        store.register(composite("a", &["leaf()"])).unwrap();
        store.register(composite("b", &["a()"])).unwrap();
        let err = store
            .replace_implementation(
                &sym("a"),
                Implementation::Composite {
                    children: vec!["b()".parse().unwrap()],
                },
            )
            .unwrap_err();
        assert_eq!(
            err,
            StoreError::CycleDetected(vec![sym("a"), sym("b"), sym("a")])
        );
        assert!(store.is_acyclic());
    }

    #[test]
    fn replacement_keeps_interface_and_bumps_version() {
        let mut store = BehaviorStore::new();
        store.register(primitive("leaf", &[], &[])).unwrap();
        store.register(primitive("survey", &[], &["did_survey(zone_a)"])).unwrap();
        let before = store.spec(&sym("survey")).unwrap().clone();
        let same = before.implementation.clone();
        assert_eq!(store.replace_implementation(&sym("survey"), same).unwrap(), 2);
        let v = store
            .replace_implementation(
                &sym("survey"),
                Implementation::Composite {
                    children: vec!["leaf()".parse().unwrap()],
                },
            )
            .unwrap();
        assert_eq!(v, 3);
        let after = store.spec(&sym("survey")).unwrap();
        assert_eq!(after.add, before.add);
        assert_eq!(after.preconditions, before.preconditions);
        assert_eq!(
            store.replace_implementation(&sym("nope"), before.implementation),
            Err(StoreError::UnknownBehavior(sym("nope")))
        );
    }

    #[test]
    fn spec_validation() {
        let mut store = BehaviorStore::new();
        let stray = primitive("p", &[], &["at(?wp)"]);
        assert!(matches!(store.register(stray), Err(StoreError::InvalidSpec(..))));
        let mut both = primitive("q", &[], &["a()"]);
        both.delete = vec!["a()".parse().unwrap()];
        assert!(matches!(store.register(both), Err(StoreError::InvalidSpec(..))));
        let mut bad_threshold = primitive("r", &[], &[]);
        bad_threshold.termination = TerminationCond::ReachedWaypoint {
            capture_radius: 0.0,
        };
        assert!(matches!(store.register(bad_threshold), Err(StoreError::InvalidSpec(..))));
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = composite("descend", &["set_fins(descent_cfg)"]);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<BehaviorSpec>(&text).unwrap(), spec);
    }
}
