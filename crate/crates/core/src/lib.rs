//! Verification of role-based access-control policies against a catalogue
//! of fourteen static constraint families.
//!
//! Policies are closed under role implications and checked under
//! closed-world semantics by [`evaluator`]; [`formula`] provides an
//! exhaustive first-order oracle for cross-checking, and [`prover`] emits
//! Prover9/Mace4 input files and interprets their output.

pub mod constraint;
pub mod differential;
pub mod dsl;
pub mod error;
pub mod evaluator;
pub mod formula;
pub mod ident;
pub mod policy;
pub mod prover;
pub mod report;
pub mod translate;

pub use constraint::{
    describe, polarity_of, ConstraintSpec, Family, Polarity, Status, VerificationResult,
};
pub use dsl::{parse_constraints, parse_document, parse_policy, print_canonical, Document};
pub use error::{Class, Error, SourceError, SourceErrorKind};
pub use evaluator::{check, check_all, check_with, CheckOptions};
pub use formula::{oracle_eval, Formula, Term};
pub use ident::Identifier;
pub use policy::{close_roles, derive_access, validate_policy, ClosedPolicy, Policy};
pub use translate::constraint_to_formula;
