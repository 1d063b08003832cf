#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rbacv_core::constraint::Family;
use rbacv_core::differential::random_constraint;
use rbacv_core::ident::id;
use rbacv_core::{parse_constraints, parse_policy, ConstraintSpec, Identifier, Policy};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap()
}

/// The university policy with the three implication axioms.
pub fn university() -> Policy {
    parse_policy(&fixture_text("university.policy")).unwrap()
}

pub fn university_without_implications() -> Policy {
    let mut p = university();
    p.implications.clear();
    p
}

pub fn university_constraints(p: &Policy) -> Vec<ConstraintSpec> {
    parse_constraints(&fixture_text("university.constraints"), p).unwrap()
}

pub fn set(names: &[&str]) -> BTreeSet<Identifier> {
    names.iter().map(|n| id(n)).collect()
}

pub fn tuple(names: &[&str]) -> Vec<Identifier> {
    names.iter().map(|n| id(n)).collect()
}

pub type Pairs = BTreeSet<(Identifier, Identifier)>;

/// Closure by naive iteration: apply every implication to every assignment
/// until nothing changes.
pub fn brute_closure(p: &Policy) -> Pairs {
    let mut closed = p.assignments.clone();
    loop {
        let mut added = Vec::new();
        for (u, r) in &closed {
            for (a, b) in &p.implications {
                if a == r && !closed.contains(&(u.clone(), b.clone())) {
                    added.push((u.clone(), b.clone()));
                }
            }
        }
        if added.is_empty() {
            return closed;
        }
        closed.extend(added);
    }
}

/// Triple loop over users, roles and records.
pub fn brute_access(p: &Policy) -> Pairs {
    let closed = brute_closure(p);
    let mut out = BTreeSet::new();
    for u in &p.users {
        for r in &p.roles {
            for o in &p.records {
                if closed.contains(&(u.clone(), r.clone()))
                    && p.permissions.contains(&(r.clone(), o.clone()))
                {
                    out.insert((u.clone(), o.clone()));
                }
            }
        }
    }
    out
}

fn names(prefix: &str, n: usize) -> Vec<Identifier> {
    (0..n).map(|i| id(&format!("{prefix}{i}"))).collect()
}

/// Random policies with at most 6 users, 6 roles and 8 records.
pub fn policy_strategy() -> impl Strategy<Value = Policy> {
    (0usize..=6, 0usize..=6, 0usize..=8).prop_flat_map(|(nu, nr, no)| {
        (
            proptest::collection::vec(proptest::bool::weighted(0.3), nu * nr),
            proptest::collection::vec(proptest::bool::weighted(0.15), nr * nr),
            proptest::collection::vec(proptest::bool::weighted(0.3), nr * no),
        )
            .prop_map(move |(assign, imply, permit)| {
                let users = names("U", nu);
                let roles = names("R", nr);
                let records = names("D", no);
                let mut p = Policy {
                    users: users.iter().cloned().collect(),
                    roles: roles.iter().cloned().collect(),
                    records: records.iter().cloned().collect(),
                    ..Policy::default()
                };
                for (i, u) in users.iter().enumerate() {
                    for (j, r) in roles.iter().enumerate() {
                        if assign[i * nr + j] {
                            p.assignments.insert((u.clone(), r.clone()));
                        }
                    }
                }
                for (i, a) in roles.iter().enumerate() {
                    for (j, b) in roles.iter().enumerate() {
                        if i != j && imply[i * nr + j] {
                            p.implications.insert((a.clone(), b.clone()));
                        }
                    }
                }
                for (i, r) in roles.iter().enumerate() {
                    for (j, o) in records.iter().enumerate() {
                        if permit[i * no + j] {
                            p.permissions.insert((r.clone(), o.clone()));
                        }
                    }
                }
                p
            })
    })
}

/// A policy plus every family instance that fits it.
pub fn policy_with_constraints() -> impl Strategy<Value = (Policy, Vec<ConstraintSpec>)> {
    (policy_strategy(), any::<u64>()).prop_map(|(p, seed)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cs = Family::ALL
            .iter()
            .filter_map(|f| random_constraint(&mut rng, &p, *f))
            .collect();
        (p, cs)
    })
}
