//! Inputs shared by the criterion benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbacv_core::ident::Identifier;
use rbacv_core::Policy;

pub const UNIVERSITY_POLICY: &str = include_str!("../../../fixtures/university.policy");
pub const UNIVERSITY_CONSTRAINTS: &str = include_str!("../../../fixtures/university.constraints");

pub fn university() -> Policy {
    rbacv_core::parse_policy(UNIVERSITY_POLICY).expect("fixture parses")
}

fn names(prefix: &str, n: usize) -> Vec<Identifier> {
    (0..n)
        .map(|i| Identifier::new(format!("{prefix}{i}")).expect("valid name"))
        .collect()
}

/// A synthetic policy with `users` users, `users / 10 + 2` roles and
/// `users / 5 + 2` records. Each user gets about two roles, each role about
/// three records, and roles form a sparse forward implication graph.
pub fn synthetic(users: usize, seed: u64) -> Policy {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let us = names("U", users);
    let rs = names("R", users / 10 + 2);
    let os = names("D", users / 5 + 2);
    let mut p = Policy {
        users: us.iter().cloned().collect(),
        roles: rs.iter().cloned().collect(),
        records: os.iter().cloned().collect(),
        ..Policy::default()
    };
    for u in &us {
        for _ in 0..2 {
            p.assignments
                .insert((u.clone(), rs[rng.gen_range(0..rs.len())].clone()));
        }
    }
    for (i, r) in rs.iter().enumerate() {
        if i + 1 < rs.len() && rng.gen_bool(0.3) {
            p.implications
                .insert((r.clone(), rs[rng.gen_range(i + 1..rs.len())].clone()));
        }
        for _ in 0..3 {
            p.permissions
                .insert((r.clone(), os[rng.gen_range(0..os.len())].clone()));
        }
    }
    p
}
