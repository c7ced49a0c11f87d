//! Self-assessment records and cost estimates derived from them.

use serde::{Deserialize, Serialize};

use crate::symbolic::Symbol;

pub const DEFAULT_DURATION_S: f64 = 60.0;
pub const DEFAULT_ENERGY_WH: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Failure,
    Halted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentRecord {
    pub behavior: Symbol,
    pub outcome: Outcome,
    pub duration: f64,
    pub energy: f64,
    pub timestamp: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub duration: f64,
    pub energy: f64,
    pub success_rate: f64,
    pub no_history: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AssessmentStore {
    records: Vec<AssessmentRecord>,
}

impl AssessmentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_outcome(&mut self, mut rec: AssessmentRecord) {
        rec.duration = rec.duration.max(0.0);
        rec.energy = rec.energy.max(0.0);
        self.records.push(rec);
    }

    pub fn records(&self) -> &[AssessmentRecord] {
        &self.records
    }

    pub fn estimate_cost(&self, behavior: &Symbol) -> CostEstimate {
        let mut n = 0usize;
        let (mut dur, mut energy, mut ok) = (0.0, 0.0, 0usize);
        for r in self.records.iter().filter(|r| &r.behavior == behavior) {
            n += 1;
            dur += r.duration;
            energy += r.energy;
            ok += usize::from(r.outcome == Outcome::Success);
        }
        if n == 0 {
            return CostEstimate {
                duration: DEFAULT_DURATION_S,
                energy: DEFAULT_ENERGY_WH,
                success_rate: 1.0,
                no_history: true,
            };
        }
        let n_f = n as f64;
        CostEstimate {
            duration: dur / n_f,
            energy: energy / n_f,
            success_rate: ok as f64 / n_f,
            no_history: false,
        }
    }
}
