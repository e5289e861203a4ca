//! JSONL record formats for derivations.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{equation_to_latex, parse_equation, parse_latex, to_latex, ParseError, RenderError, SymbolTable};
use crate::ops::{Derivation, OpId, Role, Step};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PerturbationKind {
    VR,
    EE,
    AG,
    SR,
}

impl PerturbationKind {
    pub fn parse(s: &str) -> Option<PerturbationKind> {
        match s.to_ascii_lowercase().as_str() {
            "vr" => Some(PerturbationKind::VR),
            "ee" => Some(PerturbationKind::EE),
            "ag" => Some(PerturbationKind::AG),
            "sr" => Some(PerturbationKind::SR),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub latex: String,
    pub op: OpId,
    pub parents: Vec<usize>,
    pub operand_latex: Option<String>,
    pub role: Role,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationRecord {
    pub schema_version: u32,
    pub id: u64,
    pub seed: u64,
    pub steps: Vec<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub static_id: Option<u64>,
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("step {step}: {source}")]
    Parse { step: usize, source: ParseError },
    #[error("step {step}: {source}")]
    Render { step: usize, source: RenderError },
    #[error("unsupported schema version {0}")]
    Schema(u32),
}

impl DerivationRecord {
    pub fn from_derivation(
        d: &Derivation,
        id: u64,
        seed: u64,
        table: &SymbolTable,
    ) -> Result<DerivationRecord, RecordError> {
        let mut steps = Vec::with_capacity(d.len());
        for (i, s) in d.steps.iter().enumerate() {
            let latex = equation_to_latex(&s.equation, table)
                .map_err(|source| RecordError::Render { step: i, source })?;
            let operand_latex = match &s.operand {
                Some(o) => Some(to_latex(o, table).map_err(|source| RecordError::Render { step: i, source })?),
                None => None,
            };
            steps.push(StepRecord {
                latex,
                op: s.op,
                parents: s.parents.clone(),
                operand_latex,
                role: s.role,
            });
        }
        Ok(DerivationRecord {
            schema_version: SCHEMA_VERSION,
            id,
            seed,
            steps,
            perturbation: None,
            static_id: None,
        })
    }

    pub fn to_derivation(&self, table: &SymbolTable) -> Result<Derivation, RecordError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RecordError::Schema(self.schema_version));
        }
        let mut steps = Vec::with_capacity(self.steps.len());
        for (i, s) in self.steps.iter().enumerate() {
            let equation = parse_equation(&s.latex, table).map_err(|source| RecordError::Parse { step: i, source })?;
            let operand = match &s.operand_latex {
                Some(o) => Some(parse_latex(o, table).map_err(|source| RecordError::Parse { step: i, source })?),
                None => None,
            };
            steps.push(Step {
                equation,
                op: s.op,
                parents: s.parents.clone(),
                operand,
                role: s.role,
            });
        }
        Ok(Derivation::new(steps))
    }

    /// Identifier of the unperturbed record this one derives from.
    pub fn static_key(&self) -> u64 {
        self.static_id.unwrap_or(self.id)
    }
}
