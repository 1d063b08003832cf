//! Closed-world decision procedures for every constraint family.
//!
//! Each `check_*` function reports every violating tuple in lexicographic
//! order. [`check_with`] then trims the list to one representative per
//! offending leading element unless exhaustive witnesses are requested.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::constraint::{ConstraintSpec, IdSet, Status, VerificationResult};
use crate::error::Error;
use crate::ident::Identifier;
use crate::policy::ClosedPolicy;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Keep every violating tuple instead of the first per leading element.
    pub exhaustive: bool,
}

/// Which side of which relation a totality constraint quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Totality {
    /// Every role has a user.
    RoleHasUser,
    /// Every user has a role.
    UserHasRole,
    /// Every record is held by a role.
    RecordHasRole,
    /// Every role holds a record.
    RoleHasRecord,
}

type Tuple = Vec<Identifier>;

fn names(set: &BTreeSet<Identifier>) -> String {
    set.iter()
        .map(Identifier::as_str)
        .collect::<Vec<_>>()
        .join(", ")
}

fn tuple_text(t: &Tuple) -> String {
    format!(
        "({})",
        t.iter()
            .map(Identifier::as_str)
            .collect::<Vec<_>>()
            .join(", ")
    )
}

fn tuples_text(ts: &[Tuple]) -> String {
    ts.iter().map(tuple_text).collect::<Vec<_>>().join(", ")
}

fn result(
    constraint: ConstraintSpec,
    witnesses: Vec<Tuple>,
    satisfied_note: impl FnOnce() -> String,
    violated_note: impl FnOnce(&[Tuple]) -> String,
) -> VerificationResult {
    let polarity = constraint.family().polarity();
    if witnesses.is_empty() {
        VerificationResult {
            constraint,
            status: Status::Satisfied,
            polarity,
            witnesses,
            violation_count: 0,
            explanation: satisfied_note(),
        }
    } else {
        let explanation = violated_note(&witnesses);
        VerificationResult {
            constraint,
            status: Status::Violated,
            polarity,
            violation_count: witnesses.len(),
            witnesses,
            explanation,
        }
    }
}

/// Decides `c` against `p` with representative witnesses.
pub fn check(p: &ClosedPolicy, c: &ConstraintSpec) -> Result<VerificationResult, Error> {
    check_with(p, c, CheckOptions::default())
}

pub fn check_with(
    p: &ClosedPolicy,
    c: &ConstraintSpec,
    opts: CheckOptions,
) -> Result<VerificationResult, Error> {
    c.validate(p.base())?;
    let mut r = dispatch(p, c);
    if !opts.exhaustive {
        r.witnesses = first_per_leader(std::mem::take(&mut r.witnesses));
    }
    Ok(r)
}

/// Checks all constraints in parallel; results keep input order.
pub fn check_all(
    p: &ClosedPolicy,
    cs: &[ConstraintSpec],
    opts: CheckOptions,
) -> Result<Vec<VerificationResult>, Error> {
    cs.par_iter().map(|c| check_with(p, c, opts)).collect()
}

fn first_per_leader(ws: Vec<Tuple>) -> Vec<Tuple> {
    let mut out: Vec<Tuple> = Vec::new();
    for w in ws {
        let repeat = match (out.last(), w.first()) {
            (Some(prev), Some(lead)) => w.len() > 1 && prev.first() == Some(lead),
            _ => false,
        };
        if !repeat {
            out.push(w);
        }
    }
    out
}

fn dispatch(p: &ClosedPolicy, c: &ConstraintSpec) -> VerificationResult {
    match c {
        ConstraintSpec::Prerequisite { trigger, required } => {
            check_prerequisite(p, trigger, required)
        }
        ConstraintSpec::SodRoles { conflict } => check_sod_roles(p, conflict),
        ConstraintSpec::RoleCoverage => check_totality(p, Totality::RoleHasUser),
        ConstraintSpec::UserCoverage => check_totality(p, Totality::UserHasRole),
        ConstraintSpec::ExclusiveChoice { trigger, choices } => {
            check_exclusive_choice(p, trigger, choices)
        }
        ConstraintSpec::ForbiddenAssignment { users, roles } => {
            check_forbidden_assignment(p, users, roles)
        }
        ConstraintSpec::RecordCoverage => check_totality(p, Totality::RecordHasRole),
        ConstraintSpec::PermissionCoverage => check_totality(p, Totality::RoleHasRecord),
        ConstraintSpec::MinRolesPerRecord { record, k } => {
            check_min_roles_per_record(p, record, *k)
        }
        ConstraintSpec::UniqueRolePerRecord { record } => check_unique_role_per_record(p, record),
        ConstraintSpec::SodRecords { conflict } => check_sod_records(p, conflict),
        ConstraintSpec::AccessCoverage => check_access_coverage(p),
        ConstraintSpec::MinUsersPerRecord { record, k } => {
            check_min_users_per_record(p, record, *k)
        }
        ConstraintSpec::AccessDiversity {
            record,
            users,
            roles,
        } => check_access_diversity(p, record, *users, *roles),
    }
}

pub fn check_prerequisite(
    p: &ClosedPolicy,
    trigger: &Identifier,
    required: &Identifier,
) -> VerificationResult {
    let offenders: Vec<Tuple> = p
        .users_of(trigger)
        .iter()
        .filter(|u| !p.has_role(u, required))
        .map(|u| vec![u.clone()])
        .collect();
    result(
        ConstraintSpec::Prerequisite {
            trigger: trigger.clone(),
            required: required.clone(),
        },
        offenders,
        || format!("every holder of {trigger} also holds {required}"),
        |ws| format!("{} hold(s) {trigger} without {required}", tuples_text(ws)),
    )
}

/// Pairs `(a, b)` with `a < b` drawn from `held ∩ set`.
fn conflicting_pairs<'a>(held: &'a IdSet, set: &'a IdSet) -> Vec<(&'a Identifier, &'a Identifier)> {
    let hits: Vec<&Identifier> = held.intersection(set).collect();
    let mut out = Vec::new();
    for (i, a) in hits.iter().enumerate() {
        for b in &hits[i + 1..] {
            out.push((*a, *b));
        }
    }
    out
}

pub fn check_sod_roles(p: &ClosedPolicy, conflict: &IdSet) -> VerificationResult {
    let mut ws = Vec::new();
    for user in &p.base().users {
        for (a, b) in conflicting_pairs(p.roles_of(user), conflict) {
            ws.push(vec![user.clone(), a.clone(), b.clone()]);
        }
    }
    result(
        ConstraintSpec::SodRoles {
            conflict: conflict.clone(),
        },
        ws,
        || format!("no user holds two of {{{}}}", names(conflict)),
        |ws| {
            format!(
                "conflicting roles held as (user, role, role): {}",
                tuples_text(ws)
            )
        },
    )
}

pub fn check_totality(p: &ClosedPolicy, side: Totality) -> VerificationResult {
    let base = p.base();
    let (constraint, universe, noun, relation): (_, &IdSet, _, _) = match side {
        Totality::RoleHasUser => (
            ConstraintSpec::RoleCoverage,
            &base.roles,
            "role",
            "has no user",
        ),
        Totality::UserHasRole => (
            ConstraintSpec::UserCoverage,
            &base.users,
            "user",
            "has no role",
        ),
        Totality::RecordHasRole => (
            ConstraintSpec::RecordCoverage,
            &base.records,
            "record",
            "is held by no role",
        ),
        Totality::RoleHasRecord => (
            ConstraintSpec::PermissionCoverage,
            &base.roles,
            "role",
            "holds no record",
        ),
    };
    let covered = |x: &Identifier| match side {
        Totality::RoleHasUser => !p.users_of(x).is_empty(),
        Totality::UserHasRole => !p.roles_of(x).is_empty(),
        Totality::RecordHasRole => !p.roles_of_record(x).is_empty(),
        Totality::RoleHasRecord => !p.records_of_role(x).is_empty(),
    };
    let ws: Vec<Tuple> = universe
        .iter()
        .filter(|x| !covered(x))
        .map(|x| vec![x.clone()])
        .collect();
    let count = universe.len();
    result(
        constraint,
        ws,
        || format!("all {count} {noun}(s) covered"),
        |ws| format!("{noun}(s) {} {relation}", tuples_text(ws)),
    )
}

pub fn check_exclusive_choice(
    p: &ClosedPolicy,
    trigger: &IdSet,
    choices: &IdSet,
) -> VerificationResult {
    let mut ws = Vec::new();
    for user in &p.base().users {
        let held = p.roles_of(user);
        for t in held.intersection(trigger) {
            for (a, b) in conflicting_pairs(held, choices) {
                if t != a && t != b {
                    ws.push(vec![user.clone(), t.clone(), a.clone(), b.clone()]);
                }
            }
        }
    }
    result(
        ConstraintSpec::ExclusiveChoice {
            trigger: trigger.clone(),
            choices: choices.clone(),
        },
        ws,
        || {
            format!(
                "no holder of {{{}}} holds two of {{{}}}",
                names(trigger),
                names(choices)
            )
        },
        |ws| format!("(user, trigger, choice, choice): {}", tuples_text(ws)),
    )
}

pub fn check_forbidden_assignment(
    p: &ClosedPolicy,
    users: &IdSet,
    roles: &IdSet,
) -> VerificationResult {
    let mut ws = Vec::new();
    for user in users {
        for role in p.roles_of(user).intersection(roles) {
            ws.push(vec![user.clone(), role.clone()]);
        }
    }
    result(
        ConstraintSpec::ForbiddenAssignment {
            users: users.clone(),
            roles: roles.clone(),
        },
        ws,
        || {
            format!(
                "none of {{{}}} holds any of {{{}}}",
                names(users),
                names(roles)
            )
        },
        |ws| format!("forbidden (user, role) assignments: {}", tuples_text(ws)),
    )
}

pub fn check_min_roles_per_record(
    p: &ClosedPolicy,
    record: &Identifier,
    k: usize,
) -> VerificationResult {
    let holders = p.roles_of_record(record);
    let ws = if holders.len() >= k {
        vec![]
    } else {
        vec![vec![record.clone()]]
    };
    result(
        ConstraintSpec::MinRolesPerRecord {
            record: record.clone(),
            k,
        },
        ws,
        || {
            format!(
                "{record} is held by {} role(s): {}",
                holders.len(),
                names(holders)
            )
        },
        |_| {
            format!(
                "{record} is held by {} role(s) ({}); at least {k} required",
                holders.len(),
                names(holders)
            )
        },
    )
}

pub fn check_unique_role_per_record(p: &ClosedPolicy, record: &Identifier) -> VerificationResult {
    let holders = p.roles_of_record(record);
    let ws: Vec<Tuple> = if holders.is_empty() {
        vec![vec![]]
    } else {
        conflicting_pairs(holders, holders)
            .into_iter()
            .map(|(a, b)| vec![a.clone(), b.clone()])
            .collect()
    };
    result(
        ConstraintSpec::UniqueRolePerRecord {
            record: record.clone(),
        },
        ws,
        || format!("{record} is held only by {}", names(holders)),
        |ws| {
            if holders.is_empty() {
                format!("{record} is held by no role")
            } else {
                format!("{record} is held by several roles: {}", tuples_text(ws))
            }
        },
    )
}

pub fn check_sod_records(p: &ClosedPolicy, conflict: &IdSet) -> VerificationResult {
    let mut ws = Vec::new();
    for role in &p.base().roles {
        for (a, b) in conflicting_pairs(p.records_of_role(role), conflict) {
            ws.push(vec![role.clone(), a.clone(), b.clone()]);
        }
    }
    result(
        ConstraintSpec::SodRecords {
            conflict: conflict.clone(),
        },
        ws,
        || format!("no role holds two of {{{}}}", names(conflict)),
        |ws| {
            format!(
                "conflicting records held as (role, record, record): {}",
                tuples_text(ws)
            )
        },
    )
}

pub fn check_access_coverage(p: &ClosedPolicy) -> VerificationResult {
    let users = &p.base().users;
    let ws: Vec<Tuple> = users
        .iter()
        .filter(|u| p.records_of_user(u).is_empty())
        .map(|u| vec![u.clone()])
        .collect();
    result(
        ConstraintSpec::AccessCoverage,
        ws,
        || format!("all {} user(s) can access some record", users.len()),
        |ws| format!("user(s) {} can access no record", tuples_text(ws)),
    )
}

pub fn check_min_users_per_record(
    p: &ClosedPolicy,
    record: &Identifier,
    k: usize,
) -> VerificationResult {
    let users = p.users_of_record(record);
    let ws = if users.len() >= k {
        vec![]
    } else {
        vec![vec![record.clone()]]
    };
    result(
        ConstraintSpec::MinUsersPerRecord {
            record: record.clone(),
            k,
        },
        ws,
        || {
            format!(
                "{record} is accessible to {} user(s): {}",
                users.len(),
                names(users)
            )
        },
        |_| {
            format!(
                "{record} is accessible to {} user(s) ({}); at least {k} required",
                users.len(),
                names(users)
            )
        },
    )
}

/// Maximum matching of users to distinct closed roles, built with augmenting
/// paths over users and roles in sorted order. Returns `(user, role)` pairs
/// sorted by user.
fn max_role_matching<'a>(
    p: &'a ClosedPolicy,
    users: &[&'a Identifier],
) -> Vec<(&'a Identifier, &'a Identifier)> {
    use std::collections::BTreeMap;

    fn augment<'a>(
        p: &'a ClosedPolicy,
        user: &'a Identifier,
        owner: &mut BTreeMap<&'a Identifier, &'a Identifier>,
        visited: &mut BTreeSet<&'a Identifier>,
    ) -> bool {
        for role in p.roles_of(user) {
            if !visited.insert(role) {
                continue;
            }
            let free = match owner.get(role) {
                None => true,
                Some(&other) => augment(p, other, owner, visited),
            };
            if free {
                owner.insert(role, user);
                return true;
            }
        }
        false
    }

    let mut owner: BTreeMap<&Identifier, &Identifier> = BTreeMap::new();
    for &u in users {
        augment(p, u, &mut owner, &mut BTreeSet::new());
    }
    let mut pairs: Vec<_> = owner.into_iter().map(|(r, u)| (u, r)).collect();
    pairs.sort();
    pairs
}

pub fn check_access_diversity(
    p: &ClosedPolicy,
    record: &Identifier,
    k_users: usize,
    m_roles: usize,
) -> VerificationResult {
    let accessors: Vec<&Identifier> = p.users_of_record(record).iter().collect();
    let matching = max_role_matching(p, &accessors);
    let ok = accessors.len() >= k_users && matching.len() >= m_roles;
    let constraint = ConstraintSpec::AccessDiversity {
        record: record.clone(),
        users: k_users,
        roles: m_roles,
    };
    let ws = if ok {
        vec![]
    } else {
        vec![vec![record.clone()]]
    };
    result(
        constraint,
        ws,
        || {
            // Witness: m matched users with distinct roles, then the
            // remaining users in sorted order with their first closed role.
            let mut chosen: Vec<(&Identifier, &Identifier)> = matching[..m_roles].to_vec();
            for &u in &accessors {
                if chosen.len() >= k_users {
                    break;
                }
                if chosen.iter().all(|(c, _)| *c != u) {
                    let role = p.roles_of(u).iter().next().expect("accessor holds a role");
                    chosen.push((u, role));
                }
            }
            chosen.sort();
            let list: Vec<String> = chosen.iter().map(|(u, r)| format!("{u}/{r}")).collect();
            format!("{record} is accessible to {}", list.join(", "))
        },
        |_| {
            format!(
                "{record} is accessible to {} user(s) ({}) covering at most {} distinct role(s); need {k_users} user(s) spanning {m_roles} role(s)",
                accessors.len(),
                accessors.iter().map(|u| u.as_str()).collect::<Vec<_>>().join(", "),
                matching.len().min(k_users),
            )
        },
    )
}
