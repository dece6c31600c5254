//! Verification report shared by the lemma checkers.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::median::FiniteMedianComplex;

/// Number of witnesses retained per report; the violation count is exact.
pub const MAX_WITNESSES: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub lemma: String,
    pub complex_hash: String,
    pub cases_checked: u64,
    /// Cases where the lemma's hypothesis held (equal to `cases_checked` for
    /// unconditional statements).
    pub hypothesis_cases: u64,
    pub violations: u64,
    pub witnesses: Vec<Value>,
}

impl VerificationReport {
    pub fn new(lemma: &str, c: &FiniteMedianComplex) -> Self {
        Self::with_hash(lemma, c.content_hash())
    }

    pub fn with_hash(lemma: &str, complex_hash: String) -> Self {
        VerificationReport {
            lemma: lemma.to_string(),
            complex_hash,
            cases_checked: 0,
            hypothesis_cases: 0,
            violations: 0,
            witnesses: Vec::new(),
        }
    }

    pub fn violation(&mut self, witness: Value) {
        self.violations += 1;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(witness);
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }

    pub fn merge(&mut self, other: &VerificationReport) {
        self.cases_checked += other.cases_checked;
        self.hypothesis_cases += other.hypothesis_cases;
        self.violations += other.violations;
        for w in &other.witnesses {
            if self.witnesses.len() < MAX_WITNESSES {
                self.witnesses.push(w.clone());
            }
        }
    }
}
