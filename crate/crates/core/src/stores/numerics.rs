//! Numerics store: symbol to concrete value bindings with versions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::StoreError;
use crate::symbolic::Symbol;
use crate::values::ConcreteValue;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Binding {
    pub symbol: Symbol,
    pub value: ConcreteValue,
    pub version: u64,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NumericsStore {
    bindings: BTreeMap<Symbol, Binding>,
}

impl NumericsStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(&mut self, symbol: Symbol, value: ConcreteValue, t: f64) -> Result<u64, StoreError> {
        value.validate().map_err(StoreError::InvalidValue)?;
        let version = self.bindings.get(&symbol).map_or(1, |b| b.version + 1);
        self.bindings.insert(
            symbol.clone(),
            Binding {
                symbol,
                value,
                version,
                timestamp: t,
            },
        );
        Ok(version)
    }

    /// Restores a binding exactly as recorded.
    pub fn restore(&mut self, binding: Binding) {
        self.bindings.insert(binding.symbol.clone(), binding);
    }

    pub fn resolve(&self, symbol: &Symbol) -> Option<&ConcreteValue> {
        self.bindings.get(symbol).map(|b| &b.value)
    }

    pub fn binding(&self, symbol: &Symbol) -> Option<&Binding> {
        self.bindings.get(symbol)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Binding> {
        self.bindings.values()
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.bindings.keys()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::sym;
    use crate::values::{Unit, ValueError};
    use proptest::prelude::*;

    #[test]
    fn bind_and_rebind_zone() {
        let mut n = NumericsStore::new();
        let square = ConcreteValue::polygon(&[(0.0, 0.0), (1000.0, 0.0), (1000.0, 1000.0), (0.0, 1000.0)])
            .unwrap();
        assert_eq!(n.bind(sym("zone_a"), square, 0.0).unwrap(), 1);
        let shifted = ConcreteValue::polygon(&[(500.0, 0.0), (1500.0, 0.0), (1500.0, 1000.0), (500.0, 1000.0)])
            .unwrap();
        assert_eq!(n.bind(sym("zone_a"), shifted.clone(), 500.0).unwrap(), 2);
        assert_eq!(n.resolve(&sym("zone_a")), Some(&shifted));
    }

    #[test]
    fn invalid_value_is_rejected() {
        let mut n = NumericsStore::new();
        assert_eq!(
            n.bind(sym("p"), ConcreteValue::Path(vec![]), 0.0),
            Err(StoreError::InvalidValue(ValueError::EmptyPath))
        );
        assert!(n.is_empty());
    }

    proptest! {
        #[test]
        fn resolve_matches_sequential_oracle(seq in prop::collection::vec((0usize..4, -1e3f64..1e3), 0..40)) {
            let names = ["a", "b", "c", "d"];
            let mut store = NumericsStore::new();
            let mut oracle: BTreeMap<&str, (u64, f64)> = BTreeMap::new();
            for (t, (i, v)) in seq.iter().enumerate() {
                let version = store.bind(sym(names[*i]), ConcreteValue::scalar(*v, Unit::Metres), t as f64).unwrap();
                let e = oracle.entry(names[*i]).or_insert((0, 0.0));
                *e = (e.0 + 1, *v);
                prop_assert_eq!(version, e.0);
            }
            for name in names {
                let got = store.binding(&sym(name)).map(|b| (b.version, b.value.as_scalar().unwrap()));
                prop_assert_eq!(got, oracle.get(name).copied());
            }
        }
    }
}
