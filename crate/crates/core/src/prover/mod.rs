//! Prover9/Mace4 bridge: input-file emission in two modes, a checker for
//! the emitted syntax, output classification, and an external runner.
//!
//! Emitted files use only the operators `-`, `|`, `&`, `->`, `<->`, `all`,
//! `exists`, `=` and `!=`. Constants that Prover9 would lex as variables
//! (leading `u`..`z`) are renamed with a `C_` prefix.

mod emit;
pub mod grammar;
mod run;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use emit::{emit_assumptions, emit_goal, mangle};
pub use grammar::{check_emission, EmissionStats, GrammarError};
pub use run::{find_binary, run_external, BridgeError, RunnerConfig, PROVER_PATH_ENV};

use crate::constraint::{Polarity, Status};
use crate::ident::Identifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EmissionMode {
    /// Universal claims expanded into explicit constant disjunctions.
    Enumerate,
    /// Assumptions completed with every absent fact negated, unique names,
    /// domain closure and sort axioms; goals quantify directly.
    Complete,
}

impl std::str::FromStr for EmissionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "enumerate" => Ok(EmissionMode::Enumerate),
            "complete" => Ok(EmissionMode::Complete),
            other => Err(format!(
                "unknown emission mode `{other}` (expected enumerate or complete)"
            )),
        }
    }
}

/// One prover run: assumptions, the goal, and how to read the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProverEmission {
    pub title: String,
    pub assumptions: String,
    pub goal: String,
    pub polarity: Polarity,
    pub mangled_names: BTreeMap<Identifier, String>,
}

impl ProverEmission {
    /// The complete input file: an assumptions list followed by a goals
    /// list. Byte-identical for identical inputs.
    pub fn render(&self) -> String {
        let reading = match self.polarity {
            Polarity::PositiveForm => "proof => satisfied",
            Polarity::NegativeForm => "proof => violated",
        };
        format!(
            "% {}\n% polarity: {} ({reading})\n\nformulas(assumptions).\n{}end_of_list.\n\nformulas(goals).\n{}end_of_list.\n",
            self.title, self.polarity, self.assumptions, self.goal
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    Proved,
    CounterexampleFound,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProverOutcome {
    pub kind: OutcomeKind,
    pub raw: String,
    /// Set when the run was cut short, e.g. by the timeout.
    pub note: Option<String>,
}

const PROVED_MARKER: &str = "THEOREM PROVED";
const MODEL_MARKERS: [&str; 2] = ["============================== MODEL", "interpretation("];

pub fn classify(raw: &str) -> OutcomeKind {
    if raw.contains(PROVED_MARKER) {
        OutcomeKind::Proved
    } else if MODEL_MARKERS.iter().any(|m| raw.contains(m)) {
        OutcomeKind::CounterexampleFound
    } else {
        OutcomeKind::Unresolved
    }
}

/// Constraint status implied by a prover outcome. `Unresolved` never
/// yields a status.
pub fn status_of(kind: OutcomeKind, polarity: Polarity) -> Option<Status> {
    match kind {
        OutcomeKind::Proved => Some(polarity.status_when(true)),
        OutcomeKind::CounterexampleFound => Some(polarity.status_when(false)),
        OutcomeKind::Unresolved => None,
    }
}

pub fn interpret_output(raw: &str, polarity: Polarity) -> (ProverOutcome, Option<Status>) {
    let kind = classify(raw);
    (
        ProverOutcome {
            kind,
            raw: raw.to_string(),
            note: None,
        },
        status_of(kind, polarity),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_mapping() {
        use OutcomeKind::*;
        use Polarity::*;
        assert_eq!(status_of(Proved, PositiveForm), Some(Status::Satisfied));
        assert_eq!(status_of(Proved, NegativeForm), Some(Status::Violated));
        assert_eq!(
            status_of(CounterexampleFound, PositiveForm),
            Some(Status::Violated)
        );
        assert_eq!(
            status_of(CounterexampleFound, NegativeForm),
            Some(Status::Satisfied)
        );
        assert_eq!(status_of(Unresolved, PositiveForm), None);
        assert_eq!(status_of(Unresolved, NegativeForm), None);
    }

    #[test]
    fn interpret_markers() {
        let proof = "============================== PROOF =================================\n\
                     % Proof 1 at 0.01 seconds.\n\nTHEOREM PROVED\n";
        let (o, s) = interpret_output(proof, Polarity::NegativeForm);
        assert_eq!(o.kind, OutcomeKind::Proved);
        assert_eq!(s, Some(Status::Violated));

        let model = "============================== MODEL =================================\n\n\
                     interpretation( 6, [number=1, seconds=0], [\n  function(Dean, [ 5 ]) ]).\n";
        let (o, s) = interpret_output(model, Polarity::PositiveForm);
        assert_eq!(o.kind, OutcomeKind::CounterexampleFound);
        assert_eq!(s, Some(Status::Violated));

        let (o, s) = interpret_output("", Polarity::PositiveForm);
        assert_eq!(o.kind, OutcomeKind::Unresolved);
        assert_eq!(s, None);

        let (o, _) = interpret_output("SEARCH FAILED\n", Polarity::NegativeForm);
        assert_eq!(o.kind, OutcomeKind::Unresolved);
    }

    #[test]
    fn mode_from_str() {
        assert_eq!(
            "complete".parse::<EmissionMode>(),
            Ok(EmissionMode::Complete)
        );
        assert!("open".parse::<EmissionMode>().is_err());
    }
}
