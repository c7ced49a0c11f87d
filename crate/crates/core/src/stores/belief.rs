//! Belief store: at most one inferred and one observed fact per atom.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::symbolic::{Atom, State};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Inferred,
    Observed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fact {
    pub atom: Atom,
    pub truth: bool,
    pub provenance: Provenance,
    pub timestamp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mismatch {
    pub atom: Atom,
    pub inferred: Fact,
    pub observed: Fact,
}

#[derive(Debug, Clone, Default, PartialEq)]
struct Slot {
    inferred: Option<Fact>,
    observed: Option<Fact>,
}

impl Slot {
    fn effective(&self) -> Option<&Fact> {
        self.observed.as_ref().or(self.inferred.as_ref())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BeliefStore {
    slots: BTreeMap<Atom, Slot>,
}

impl BeliefStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Latest wins per (atom, provenance).
    pub fn assert_fact(&mut self, atom: Atom, truth: bool, provenance: Provenance, t: f64) {
        let slot = self.slots.entry(atom.clone()).or_default();
        let fact = Fact {
            atom,
            truth,
            provenance,
            timestamp: t,
        };
        match provenance {
            Provenance::Inferred => slot.inferred = Some(fact),
            Provenance::Observed => slot.observed = Some(fact),
        }
    }

    /// Believed truth, preferring observation over inference.
    pub fn query(&self, atom: &Atom) -> bool {
        self.slots
            .get(atom)
            .and_then(Slot::effective)
            .is_some_and(|f| f.truth)
    }

    pub fn fact(&self, atom: &Atom, provenance: Provenance) -> Option<&Fact> {
        let slot = self.slots.get(atom)?;
        match provenance {
            Provenance::Inferred => slot.inferred.as_ref(),
            Provenance::Observed => slot.observed.as_ref(),
        }
    }

    pub fn state(&self) -> State {
        self.slots
            .iter()
            .filter(|(_, s)| s.effective().is_some_and(|f| f.truth))
            .map(|(a, _)| a.clone())
            .collect()
    }

    pub fn facts(&self) -> impl Iterator<Item = &Fact> {
        self.slots
            .values()
            .flat_map(|s| s.inferred.iter().chain(s.observed.iter()))
    }

    pub fn len(&self) -> usize {
        self.facts().count()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn detect_mismatches(&self) -> Vec<Mismatch> {
        self.slots
            .iter()
            .filter_map(|(atom, slot)| match (&slot.inferred, &slot.observed) {
                (Some(i), Some(o)) if i.truth != o.truth => Some(Mismatch {
                    atom: atom.clone(),
                    inferred: i.clone(),
                    observed: o.clone(),
                }),
                _ => None,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn atom(s: &str) -> Atom {
        s.parse().unwrap()
    }

    #[test]
    fn assert_then_query() {
        let mut b = BeliefStore::new();
        b.assert_fact(atom("at(wp_3)"), true, Provenance::Inferred, 100.0);
        assert!(b.query(&atom("at(wp_3)")));
        assert!(b.detect_mismatches().is_empty());
        b.assert_fact(atom("at(wp_3)"), false, Provenance::Observed, 101.0);
        let m = b.detect_mismatches();
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].atom, atom("at(wp_3)"));
        assert!(!b.query(&atom("at(wp_3)")));
    }

    #[test]
    fn latest_wins_single_entry() {
        let mut b = BeliefStore::new();
        b.assert_fact(atom("p()"), true, Provenance::Inferred, 1.0);
        b.assert_fact(atom("p()"), true, Provenance::Inferred, 5.0);
        assert_eq!(b.len(), 1);
        assert_eq!(b.fact(&atom("p()"), Provenance::Inferred).unwrap().timestamp, 5.0);
    }

    #[test]
    fn agreement_is_not_a_mismatch() {
        let mut b = BeliefStore::new();
        assert!(b.detect_mismatches().is_empty());
        b.assert_fact(atom("p()"), true, Provenance::Inferred, 1.0);
        b.assert_fact(atom("p()"), true, Provenance::Observed, 2.0);
        assert!(b.detect_mismatches().is_empty());
    }

    proptest! {
        #[test]
        fn mismatches_match_brute_force(
            ops in prop::collection::vec((0usize..12, any::<bool>(), any::<bool>()), 0..50)
        ) {
            let atoms: Vec<Atom> = (0..12).map(|i| atom(&format!("f{i}()"))).collect();
            let mut store = BeliefStore::new();
            let mut log = Vec::new();
            for (t, (i, truth, observed)) in ops.iter().enumerate() {
                let prov = if *observed { Provenance::Observed } else { Provenance::Inferred };
                store.assert_fact(atoms[*i].clone(), *truth, prov, t as f64);
                log.push((*i, *truth, prov));
            }
            let mut expected = Vec::new();
            for (i, a) in atoms.iter().enumerate() {
                let last = |p| log.iter().rev().find(|(j, _, q)| *j == i && *q == p).map(|x| x.1);
                let entries = log.iter().filter(|(j, _, _)| *j == i).map(|x| x.2).collect::<std::collections::BTreeSet<_>>();
                prop_assert!(entries.len() <= 2);
                if let (Some(x), Some(y)) = (last(Provenance::Inferred), last(Provenance::Observed)) {
                    if x != y {
                        expected.push(a.clone());
                    }
                }
            }
            expected.sort();
            let got: Vec<Atom> = store.detect_mismatches().into_iter().map(|m| m.atom).collect();
            prop_assert_eq!(got, expected);
        }
    }
}
