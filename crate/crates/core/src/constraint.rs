//! The fourteen constraint families, their parameters, and the polarity
//! convention that maps a prover verdict onto satisfaction.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Class, Error};
use crate::ident::Identifier;
use crate::policy::Policy;

/// How a proof of the family's defining formula relates to satisfaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarity {
    /// Formula provable iff the constraint holds.
    PositiveForm,
    /// Formula provable iff the constraint is violated.
    NegativeForm,
}

impl Polarity {
    /// Status implied by the truth value of the defining formula.
    pub fn status_when(self, formula_holds: bool) -> Status {
        match (self, formula_holds) {
            (Polarity::PositiveForm, true) | (Polarity::NegativeForm, false) => Status::Satisfied,
            _ => Status::Violated,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Polarity::PositiveForm => "positive",
            Polarity::NegativeForm => "negative",
        }
    }
}

impl fmt::Display for Polarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Satisfied,
    Violated,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Satisfied => "satisfied",
            Status::Violated => "violated",
        })
    }
}

/// Discriminant of [`ConstraintSpec`], numbered as in the constraint catalogue.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Prerequisite = 1,
    SodRoles = 2,
    RoleCoverage = 3,
    UserCoverage = 4,
    ExclusiveChoice = 5,
    ForbiddenAssignment = 6,
    RecordCoverage = 7,
    PermissionCoverage = 8,
    MinRolesPerRecord = 9,
    UniqueRolePerRecord = 10,
    SodRecords = 11,
    AccessCoverage = 12,
    MinUsersPerRecord = 13,
    AccessDiversity = 14,
}

impl Family {
    pub const ALL: [Family; 14] = [
        Family::Prerequisite,
        Family::SodRoles,
        Family::RoleCoverage,
        Family::UserCoverage,
        Family::ExclusiveChoice,
        Family::ForbiddenAssignment,
        Family::RecordCoverage,
        Family::PermissionCoverage,
        Family::MinRolesPerRecord,
        Family::UniqueRolePerRecord,
        Family::SodRecords,
        Family::AccessCoverage,
        Family::MinUsersPerRecord,
        Family::AccessDiversity,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }

    /// Leading keyword in the constraint file syntax.
    pub fn keyword(self) -> &'static str {
        match self {
            Family::Prerequisite => "prerequisite",
            Family::SodRoles => "sod-roles",
            Family::RoleCoverage => "role-coverage",
            Family::UserCoverage => "user-coverage",
            Family::ExclusiveChoice => "exclusive",
            Family::ForbiddenAssignment => "forbid",
            Family::RecordCoverage => "record-coverage",
            Family::PermissionCoverage => "permission-coverage",
            Family::MinRolesPerRecord => "min-roles",
            Family::UniqueRolePerRecord => "unique-role",
            Family::SodRecords => "sod-records",
            Family::AccessCoverage => "access-coverage",
            Family::MinUsersPerRecord => "min-users",
            Family::AccessDiversity => "diversity",
        }
    }

    pub fn polarity(self) -> Polarity {
        match self {
            Family::SodRoles
            | Family::ExclusiveChoice
            | Family::ForbiddenAssignment
            | Family::SodRecords
            | Family::UniqueRolePerRecord => Polarity::NegativeForm,
            _ => Polarity::PositiveForm,
        }
    }
}

pub type IdSet = BTreeSet<Identifier>;

/// One constraint instance.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum ConstraintSpec {
    /// Every holder of `trigger` also holds `required`.
    Prerequisite {
        trigger: Identifier,
        required: Identifier,
    },
    /// No user holds two roles of the conflict set.
    SodRoles {
        conflict: IdSet,
    },
    RoleCoverage,
    UserCoverage,
    /// Holders of a `trigger` role hold at most one of `choices`.
    ExclusiveChoice {
        trigger: IdSet,
        choices: IdSet,
    },
    /// None of `users` holds any of `roles`.
    ForbiddenAssignment {
        users: IdSet,
        roles: IdSet,
    },
    RecordCoverage,
    PermissionCoverage,
    MinRolesPerRecord {
        record: Identifier,
        k: usize,
    },
    /// Exactly one role holds the record.
    UniqueRolePerRecord {
        record: Identifier,
    },
    /// No role holds two records of the conflict set.
    SodRecords {
        conflict: IdSet,
    },
    AccessCoverage,
    MinUsersPerRecord {
        record: Identifier,
        k: usize,
    },
    /// At least `users` distinct users access `record`, and their witnessing
    /// roles span at least `roles` distinct roles.
    AccessDiversity {
        record: Identifier,
        users: usize,
        roles: usize,
    },
}

impl ConstraintSpec {
    pub fn family(&self) -> Family {
        match self {
            ConstraintSpec::Prerequisite { .. } => Family::Prerequisite,
            ConstraintSpec::SodRoles { .. } => Family::SodRoles,
            ConstraintSpec::RoleCoverage => Family::RoleCoverage,
            ConstraintSpec::UserCoverage => Family::UserCoverage,
            ConstraintSpec::ExclusiveChoice { .. } => Family::ExclusiveChoice,
            ConstraintSpec::ForbiddenAssignment { .. } => Family::ForbiddenAssignment,
            ConstraintSpec::RecordCoverage => Family::RecordCoverage,
            ConstraintSpec::PermissionCoverage => Family::PermissionCoverage,
            ConstraintSpec::MinRolesPerRecord { .. } => Family::MinRolesPerRecord,
            ConstraintSpec::UniqueRolePerRecord { .. } => Family::UniqueRolePerRecord,
            ConstraintSpec::SodRecords { .. } => Family::SodRecords,
            ConstraintSpec::AccessCoverage => Family::AccessCoverage,
            ConstraintSpec::MinUsersPerRecord { .. } => Family::MinUsersPerRecord,
            ConstraintSpec::AccessDiversity { .. } => Family::AccessDiversity,
        }
    }

    /// Checks parameter shapes and that every name is declared in `policy`
    /// with the right class.
    pub fn validate(&self, policy: &Policy) -> Result<(), Error> {
        let relation = self.family().keyword();
        let names = |set: &IdSet, class: Class| -> Result<(), Error> {
            set.iter()
                .try_for_each(|n| policy.require(n, class, relation))
        };
        let at_least = |set: &IdSet, n: usize, what: &str| -> Result<(), Error> {
            if set.len() < n {
                Err(Error::InvalidConstraint(format!(
                    "{relation}: {what} needs at least {n} member(s), got {}",
                    set.len()
                )))
            } else {
                Ok(())
            }
        };
        let threshold = |k: usize, what: &str| -> Result<(), Error> {
            if k == 0 {
                Err(Error::BadThreshold(format!(
                    "{relation}: {what} must be at least 1"
                )))
            } else {
                Ok(())
            }
        };
        match self {
            ConstraintSpec::Prerequisite { trigger, required } => {
                policy.require(trigger, Class::Role, relation)?;
                policy.require(required, Class::Role, relation)
            }
            ConstraintSpec::SodRoles { conflict } => {
                at_least(conflict, 2, "conflict set")?;
                names(conflict, Class::Role)
            }
            ConstraintSpec::ExclusiveChoice { trigger, choices } => {
                at_least(trigger, 1, "trigger set")?;
                at_least(choices, 2, "choice set")?;
                names(trigger, Class::Role)?;
                names(choices, Class::Role)
            }
            ConstraintSpec::ForbiddenAssignment { users, roles } => {
                at_least(users, 1, "user set")?;
                at_least(roles, 1, "role set")?;
                names(users, Class::User)?;
                names(roles, Class::Role)
            }
            ConstraintSpec::MinRolesPerRecord { record, k }
            | ConstraintSpec::MinUsersPerRecord { record, k } => {
                threshold(*k, "k")?;
                policy.require(record, Class::Record, relation)
            }
            ConstraintSpec::UniqueRolePerRecord { record } => {
                policy.require(record, Class::Record, relation)
            }
            ConstraintSpec::SodRecords { conflict } => {
                at_least(conflict, 2, "conflict set")?;
                names(conflict, Class::Record)
            }
            ConstraintSpec::AccessDiversity {
                record,
                users,
                roles,
            } => {
                threshold(*users, "user threshold")?;
                threshold(*roles, "role threshold")?;
                if roles > users {
                    return Err(Error::BadThreshold(format!(
                        "{relation}: role threshold {roles} exceeds user threshold {users}"
                    )));
                }
                policy.require(record, Class::Record, relation)
            }
            ConstraintSpec::RoleCoverage
            | ConstraintSpec::UserCoverage
            | ConstraintSpec::RecordCoverage
            | ConstraintSpec::PermissionCoverage
            | ConstraintSpec::AccessCoverage => Ok(()),
        }
    }
}

pub fn polarity_of(c: &ConstraintSpec) -> Polarity {
    c.family().polarity()
}

fn list(set: &IdSet) -> String {
    set.iter()
        .map(Identifier::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

/// One-sentence English rendering for reports.
pub fn describe(c: &ConstraintSpec) -> String {
    match c {
        ConstraintSpec::Prerequisite { trigger, required } => {
            format!("every user holding role {trigger} must also hold role {required}")
        }
        ConstraintSpec::SodRoles { conflict } => {
            format!(
                "no user holds two of the conflicting roles {{{}}}",
                list(conflict)
            )
        }
        ConstraintSpec::RoleCoverage => "every role has at least one user".into(),
        ConstraintSpec::UserCoverage => "every user is assigned at least one role".into(),
        ConstraintSpec::ExclusiveChoice { trigger, choices } => format!(
            "a user holding any of {{{}}} holds at most one of {{{}}}",
            list(trigger),
            list(choices)
        ),
        ConstraintSpec::ForbiddenAssignment { users, roles } => format!(
            "no user in {{{}}} is assigned a role in {{{}}}",
            list(users),
            list(roles)
        ),
        ConstraintSpec::RecordCoverage => "every record is assigned to at least one role".into(),
        ConstraintSpec::PermissionCoverage => {
            "every role is given permission to at least one record".into()
        }
        ConstraintSpec::MinRolesPerRecord { record, k } => {
            format!("at least {k} role(s) hold permission on {record}")
        }
        ConstraintSpec::UniqueRolePerRecord { record } => {
            format!("exactly one role holds permission on {record}")
        }
        ConstraintSpec::SodRecords { conflict } => format!(
            "no role holds permission on two of the conflicting records {{{}}}",
            list(conflict)
        ),
        ConstraintSpec::AccessCoverage => "every user can access at least one record".into(),
        ConstraintSpec::MinUsersPerRecord { record, k } => {
            format!("at least {k} user(s) can access {record}")
        }
        ConstraintSpec::AccessDiversity {
            record,
            users,
            roles,
        } => {
            format!("at least {users} users spanning at least {roles} roles can access {record}")
        }
    }
}

/// Outcome of checking one constraint against a closed policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationResult {
    pub constraint: ConstraintSpec,
    pub status: Status,
    pub polarity: Polarity,
    /// Tuples demonstrating the violation, sorted. Empty when satisfied.
    pub witnesses: Vec<Vec<Identifier>>,
    /// Total number of violating tuples, which may exceed `witnesses.len()`
    /// when only representative witnesses were collected.
    pub violation_count: usize,
    pub explanation: String,
}

impl VerificationResult {
    pub fn is_satisfied(&self) -> bool {
        self.status == Status::Satisfied
    }
}
