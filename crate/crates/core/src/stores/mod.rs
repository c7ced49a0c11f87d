//! The four knowledge stores behind a single owner.

pub mod assessment;
pub mod behavior;
pub mod belief;
pub mod numerics;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use assessment::{AssessmentRecord, AssessmentStore, CostEstimate, Outcome};
pub use behavior::{
    Amount, BehaviorEntry, BehaviorSpec, BehaviorStore, CommandTemplate, CondEffect, Implementation,
    Origin, Param, TerminationCond,
};
pub use belief::{BeliefStore, Fact, Mismatch, Provenance};
pub use numerics::{Binding, NumericsStore};

use crate::symbolic::Symbol;
use crate::values::ValueError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StoreError {
    #[error("behavior {0} already registered")]
    DuplicateName(Symbol),
    #[error("composition cycle: {}", fmt_cycle(.0))]
    CycleDetected(Vec<Symbol>),
    #[error("unknown child behavior {0}")]
    UnknownChild(Symbol),
    #[error("unknown behavior {0}")]
    UnknownBehavior(Symbol),
    #[error("invalid behavior {0}: {1}")]
    InvalidSpec(Symbol, String),
    #[error("invalid value: {0}")]
    InvalidValue(ValueError),
}

fn fmt_cycle(c: &[Symbol]) -> String {
    c.iter().map(Symbol::as_str).collect::<Vec<_>>().join(" -> ")
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stores {
    pub behaviors: BehaviorStore,
    pub beliefs: BeliefStore,
    pub numerics: NumericsStore,
    pub assessments: AssessmentStore,
}

/// Serializable snapshot of every store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreDump {
    pub behaviors: Vec<BehaviorEntry>,
    pub beliefs: Vec<Fact>,
    pub bindings: Vec<Binding>,
    pub assessments: Vec<AssessmentRecord>,
}

impl Stores {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn dump(&self) -> StoreDump {
        StoreDump {
            behaviors: self.behaviors.iter().cloned().collect(),
            beliefs: self.beliefs.facts().cloned().collect(),
            bindings: self.numerics.iter().cloned().collect(),
            assessments: self.assessments.records().to_vec(),
        }
    }
}
