//! Randomized agreement testing between the family checks and the
//! first-order oracle, with greedy shrinking of disagreeing cases.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::constraint::{ConstraintSpec, Family, IdSet, Status};
use crate::evaluator::check;
use crate::formula::oracle_truth;
use crate::ident::Identifier;
use crate::policy::{close_roles, ClosedPolicy, Policy};
use crate::translate::constraint_to_formula;

pub const MAX_USERS: usize = 6;
pub const MAX_ROLES: usize = 6;
pub const MAX_RECORDS: usize = 8;

/// A family check under test.
pub type Checker = dyn Fn(&ClosedPolicy, &ConstraintSpec) -> Status + Sync;

pub fn engine_status(p: &ClosedPolicy, c: &ConstraintSpec) -> Status {
    check(p, c).expect("generated constraint is valid").status
}

/// Status implied by evaluating the family's defining formula.
pub fn oracle_status(p: &ClosedPolicy, c: &ConstraintSpec) -> Status {
    let (f, polarity) = constraint_to_formula(c);
    polarity.status_when(oracle_truth(p, &f).expect("generated formulas are well sorted"))
}

fn names(prefix: &str, n: usize) -> Vec<Identifier> {
    (0..n)
        .map(|i| Identifier::new(format!("{prefix}{i}")).expect("valid"))
        .collect()
}

/// A random policy within the size bounds above.
pub fn random_policy<R: Rng>(rng: &mut R) -> Policy {
    let users = names("U", rng.gen_range(0..=MAX_USERS));
    let roles = names("R", rng.gen_range(0..=MAX_ROLES));
    let records = names("D", rng.gen_range(0..=MAX_RECORDS));
    let density = *[0.15, 0.3, 0.5].choose(rng).expect("non-empty");
    let implication_density = *[0.0, 0.1, 0.25].choose(rng).expect("non-empty");

    let mut p = Policy {
        users: users.iter().cloned().collect(),
        roles: roles.iter().cloned().collect(),
        records: records.iter().cloned().collect(),
        ..Policy::default()
    };
    for u in &users {
        for r in &roles {
            if rng.gen_bool(density) {
                p.assignments.insert((u.clone(), r.clone()));
            }
        }
    }
    for a in &roles {
        for b in &roles {
            if a != b && rng.gen_bool(implication_density) {
                p.implications.insert((a.clone(), b.clone()));
            }
        }
    }
    for r in &roles {
        for o in &records {
            if rng.gen_bool(density) {
                p.permissions.insert((r.clone(), o.clone()));
            }
        }
    }
    p
}

fn subset<R: Rng>(rng: &mut R, from: &IdSet, min: usize) -> Option<IdSet> {
    if from.len() < min {
        return None;
    }
    let items: Vec<&Identifier> = from.iter().collect();
    let size = rng.gen_range(min..=items.len());
    Some(
        items
            .choose_multiple(rng, size)
            .map(|i| (*i).clone())
            .collect(),
    )
}

fn pick<R: Rng>(rng: &mut R, from: &IdSet) -> Option<Identifier> {
    from.iter()
        .collect::<Vec<_>>()
        .choose(rng)
        .map(|i| (*i).clone())
}

/// A random valid instance of `family` over `p`, or `None` when `p` has too
/// few names for it.
pub fn random_constraint<R: Rng>(
    rng: &mut R,
    p: &Policy,
    family: Family,
) -> Option<ConstraintSpec> {
    Some(match family {
        Family::Prerequisite => ConstraintSpec::Prerequisite {
            trigger: pick(rng, &p.roles)?,
            required: pick(rng, &p.roles)?,
        },
        Family::SodRoles => ConstraintSpec::SodRoles {
            conflict: subset(rng, &p.roles, 2)?,
        },
        Family::RoleCoverage => ConstraintSpec::RoleCoverage,
        Family::UserCoverage => ConstraintSpec::UserCoverage,
        Family::ExclusiveChoice => ConstraintSpec::ExclusiveChoice {
            trigger: subset(rng, &p.roles, 1)?,
            choices: subset(rng, &p.roles, 2)?,
        },
        Family::ForbiddenAssignment => ConstraintSpec::ForbiddenAssignment {
            users: subset(rng, &p.users, 1)?,
            roles: subset(rng, &p.roles, 1)?,
        },
        Family::RecordCoverage => ConstraintSpec::RecordCoverage,
        Family::PermissionCoverage => ConstraintSpec::PermissionCoverage,
        Family::MinRolesPerRecord => ConstraintSpec::MinRolesPerRecord {
            record: pick(rng, &p.records)?,
            k: rng.gen_range(1..=4),
        },
        Family::UniqueRolePerRecord => ConstraintSpec::UniqueRolePerRecord {
            record: pick(rng, &p.records)?,
        },
        Family::SodRecords => ConstraintSpec::SodRecords {
            conflict: subset(rng, &p.records, 2)?,
        },
        Family::AccessCoverage => ConstraintSpec::AccessCoverage,
        Family::MinUsersPerRecord => ConstraintSpec::MinUsersPerRecord {
            record: pick(rng, &p.records)?,
            k: rng.gen_range(1..=4),
        },
        Family::AccessDiversity => {
            let users = rng.gen_range(1..=3);
            ConstraintSpec::AccessDiversity {
                record: pick(rng, &p.records)?,
                users,
                roles: rng.gen_range(1..=users),
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Disagreement {
    pub case: usize,
    pub policy: Policy,
    pub constraint: ConstraintSpec,
    pub engine: Status,
    pub oracle: Status,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiffReport {
    pub cases: usize,
    pub checks: usize,
    /// Checks skipped because a policy was too small for the family.
    pub skipped: usize,
    pub disagreements: Vec<Disagreement>,
    /// The first disagreement after shrinking.
    pub minimized: Option<Disagreement>,
}

impl DiffReport {
    pub fn agreed(&self) -> bool {
        self.disagreements.is_empty()
    }
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

/// Generates `cases` random policies from `seed` and compares `checker`
/// with the oracle on one random instance of every family per policy.
pub fn run_differential(seed: u64, cases: usize, checker: &Checker) -> DiffReport {
    let per_case: Vec<(usize, usize, Vec<Disagreement>)> = (0..cases)
        .into_par_iter()
        .map(|case| {
            let mut rng = case_rng(seed, case);
            let policy = random_policy(&mut rng);
            let closed = close_roles(&policy);
            let mut checks = 0;
            let mut skipped = 0;
            let mut found = Vec::new();
            for family in Family::ALL {
                let Some(c) = random_constraint(&mut rng, &policy, family) else {
                    skipped += 1;
                    continue;
                };
                checks += 1;
                let engine = checker(&closed, &c);
                let oracle = oracle_status(&closed, &c);
                if engine != oracle {
                    found.push(Disagreement {
                        case,
                        policy: policy.clone(),
                        constraint: c,
                        engine,
                        oracle,
                    });
                }
            }
            (checks, skipped, found)
        })
        .collect();

    let checks = per_case.iter().map(|(c, _, _)| c).sum();
    let skipped = per_case.iter().map(|(_, s, _)| s).sum();
    let disagreements: Vec<Disagreement> = per_case.into_iter().flat_map(|(_, _, d)| d).collect();
    let minimized = disagreements.first().map(|d| minimize(d, checker));
    DiffReport {
        cases,
        checks,
        skipped,
        disagreements,
        minimized,
    }
}

fn disagrees(p: &Policy, c: &ConstraintSpec, checker: &Checker) -> Option<(Status, Status)> {
    c.validate(p).ok()?;
    let closed = close_roles(p);
    let (engine, oracle) = (checker(&closed, c), oracle_status(&closed, c));
    (engine != oracle).then_some((engine, oracle))
}

/// Greedily drops facts and unused declarations while the disagreement
/// persists.
pub fn minimize(d: &Disagreement, checker: &Checker) -> Disagreement {
    let mut best = d.clone();
    loop {
        let mut improved = false;
        for candidate in shrink_candidates(&best.policy) {
            if let Some((engine, oracle)) = disagrees(&candidate, &best.constraint, checker) {
                best = Disagreement {
                    policy: candidate,
                    engine,
                    oracle,
                    ..best
                };
                improved = true;
                break;
            }
        }
        if !improved {
            return best;
        }
    }
}

fn shrink_candidates(p: &Policy) -> Vec<Policy> {
    let mut out = Vec::new();
    for pair in &p.assignments {
        let mut q = p.clone();
        q.assignments.remove(pair);
        out.push(q);
    }
    for pair in &p.implications {
        let mut q = p.clone();
        q.implications.remove(pair);
        out.push(q);
    }
    for pair in &p.permissions {
        let mut q = p.clone();
        q.permissions.remove(pair);
        out.push(q);
    }
    for u in &p.users {
        let mut q = p.clone();
        q.users.remove(u);
        q.assignments.retain(|(x, _)| x != u);
        out.push(q);
    }
    for r in &p.roles {
        let mut q = p.clone();
        q.roles.remove(r);
        q.assignments.retain(|(_, x)| x != r);
        q.implications.retain(|(a, b)| a != r && b != r);
        q.permissions.retain(|(x, _)| x != r);
        out.push(q);
    }
    for o in &p.records {
        let mut q = p.clone();
        q.records.remove(o);
        q.permissions.retain(|(_, x)| x != o);
        out.push(q);
    }
    out
}

/// A deliberately wrong separation-of-duty check that ignores role
/// implications. Used to confirm the harness detects real faults.
pub fn mutant_checker(p: &ClosedPolicy, c: &ConstraintSpec) -> Status {
    if let ConstraintSpec::SodRoles { conflict } = c {
        let base = p.base();
        let violated = base.users.iter().any(|u| {
            base.assignments
                .iter()
                .filter(|(x, r)| x == u && conflict.contains(r))
                .count()
                >= 2
        });
        return if violated {
            Status::Violated
        } else {
            Status::Satisfied
        };
    }
    engine_status(p, c)
}
