mod common;

use common::*;
use proptest::prelude::*;
use rbacv_core::differential::{engine_status, oracle_status};
use rbacv_core::{
    check, check_with, close_roles, CheckOptions, ClosedPolicy, ConstraintSpec, Identifier, Status,
};

fn holds(p: &ClosedPolicy, c: &ConstraintSpec, w: &[Identifier]) -> bool {
    use ConstraintSpec::*;
    let s = |i: usize| w[i].as_str();
    match c {
        Prerequisite { trigger, required } => {
            w.len() == 1 && p.has_role(s(0), trigger) && !p.has_role(s(0), required)
        }
        SodRoles { conflict } => {
            w.len() == 3
                && w[1] != w[2]
                && conflict.contains(&w[1])
                && conflict.contains(&w[2])
                && p.has_role(s(0), s(1))
                && p.has_role(s(0), s(2))
        }
        RoleCoverage => w.len() == 1 && p.users_of(s(0)).is_empty(),
        UserCoverage => w.len() == 1 && p.roles_of(s(0)).is_empty(),
        RecordCoverage => w.len() == 1 && p.roles_of_record(s(0)).is_empty(),
        PermissionCoverage => w.len() == 1 && p.records_of_role(s(0)).is_empty(),
        ExclusiveChoice { trigger, choices } => {
            w.len() == 4
                && trigger.contains(&w[1])
                && choices.contains(&w[2])
                && choices.contains(&w[3])
                && w[1] != w[2]
                && w[1] != w[3]
                && w[2] != w[3]
                && (1..4).all(|i| p.has_role(s(0), s(i)))
        }
        ForbiddenAssignment { users, roles } => {
            w.len() == 2 && users.contains(&w[0]) && roles.contains(&w[1]) && p.has_role(s(0), s(1))
        }
        SodRecords { conflict } => {
            w.len() == 3
                && w[1] != w[2]
                && conflict.contains(&w[1])
                && conflict.contains(&w[2])
                && p.permits(s(0), s(1))
                && p.permits(s(0), s(2))
        }
        UniqueRolePerRecord { record } => {
            (w.is_empty() && p.roles_of_record(record).is_empty())
                || (w.len() == 2
                    && w[0] != w[1]
                    && p.permits(s(0), record)
                    && p.permits(s(1), record))
        }
        AccessCoverage => w.len() == 1 && p.records_of_user(s(0)).is_empty(),
        MinRolesPerRecord { record, k } => {
            w == [record.clone()] && p.roles_of_record(record).len() < *k
        }
        MinUsersPerRecord { record, k } => {
            w == [record.clone()] && p.users_of_record(record).len() < *k
        }
        AccessDiversity { record, .. } => w == [record.clone()],
    }
}

/// Tries every k-subset of accessors and every role choice for it.
fn brute_diversity(p: &ClosedPolicy, record: &str, k: usize, m: usize) -> bool {
    fn choose(
        p: &ClosedPolicy,
        users: &[&Identifier],
        picked: &mut Vec<Identifier>,
        k: usize,
        m: usize,
    ) -> bool {
        if picked.len() == k {
            let distinct: std::collections::BTreeSet<_> = picked.iter().collect();
            return distinct.len() >= m;
        }
        let Some((first, rest)) = users.split_first() else {
            return false;
        };
        if users.len() < k - picked.len() {
            return false;
        }
        for r in p.roles_of(first) {
            picked.push(r.clone());
            if choose(p, rest, picked, k, m) {
                return true;
            }
            picked.pop();
        }
        choose(p, rest, picked, k, m)
    }
    let users: Vec<&Identifier> = p.users_of_record(record).iter().collect();
    choose(p, &users, &mut Vec::new(), k, m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn engine_agrees_with_oracle((p, cs) in policy_with_constraints()) {
        let cp = close_roles(&p);
        for c in &cs {
            prop_assert_eq!(engine_status(&cp, c), oracle_status(&cp, c), "{:?}", c);
        }
    }

    #[test]
    fn witnesses_are_genuine((p, cs) in policy_with_constraints()) {
        let cp = close_roles(&p);
        for c in &cs {
            let r = check_with(&cp, c, CheckOptions { exhaustive: true }).unwrap();
            prop_assert_eq!(r.status == Status::Violated, !r.witnesses.is_empty());
            prop_assert_eq!(r.violation_count, r.witnesses.len());
            let mut sorted = r.witnesses.clone();
            sorted.sort();
            sorted.dedup();
            prop_assert_eq!(&sorted, &r.witnesses);
            for w in &r.witnesses {
                prop_assert!(holds(&cp, c, w), "{:?} {:?}", c, w);
            }
            let short = check(&cp, c).unwrap();
            prop_assert_eq!(short.status, r.status);
            prop_assert_eq!(short.violation_count, r.violation_count);
            prop_assert!(short.witnesses.iter().all(|w| r.witnesses.contains(w)));
        }
    }

    #[test]
    fn checks_are_deterministic((p, cs) in policy_with_constraints()) {
        let a = close_roles(&p);
        let b = close_roles(&p.clone());
        for c in &cs {
            prop_assert_eq!(check(&a, c).unwrap(), check(&b, c).unwrap());
        }
    }

    #[test]
    fn thresholds_are_monotone(p in policy_strategy(), k in 1usize..5) {
        let cp = close_roles(&p);
        for rec in &p.records {
            let roles_k = check(&cp, &ConstraintSpec::MinRolesPerRecord { record: rec.clone(), k }).unwrap();
            let roles_k1 = check(&cp, &ConstraintSpec::MinRolesPerRecord { record: rec.clone(), k: k + 1 }).unwrap();
            prop_assert!(roles_k1.status == Status::Violated || roles_k.status == Status::Satisfied);
            let users_k = check(&cp, &ConstraintSpec::MinUsersPerRecord { record: rec.clone(), k }).unwrap();
            let users_k1 = check(&cp, &ConstraintSpec::MinUsersPerRecord { record: rec.clone(), k: k + 1 }).unwrap();
            prop_assert!(users_k1.status == Status::Violated || users_k.status == Status::Satisfied);
        }
    }

    #[test]
    fn degenerate_thresholds(p in policy_strategy(), k in 1usize..5) {
        let cp = close_roles(&p);
        for rec in &p.records {
            let div = check(&cp, &ConstraintSpec::AccessDiversity { record: rec.clone(), users: k, roles: 1 }).unwrap();
            let min = check(&cp, &ConstraintSpec::MinUsersPerRecord { record: rec.clone(), k }).unwrap();
            prop_assert_eq!(div.status, min.status);
            let one = check(&cp, &ConstraintSpec::MinRolesPerRecord { record: rec.clone(), k: 1 }).unwrap();
            let covered = !cp.roles_of_record(rec).is_empty();
            prop_assert_eq!(one.status == Status::Satisfied, covered);
        }
    }

    #[test]
    fn diversity_matches_brute_force(p in policy_strategy(), k in 1usize..5, m in 1usize..5) {
        prop_assume!(m <= k);
        let cp = close_roles(&p);
        for rec in &p.records {
            let c = ConstraintSpec::AccessDiversity { record: rec.clone(), users: k, roles: m };
            let engine = check(&cp, &c).unwrap().status == Status::Satisfied;
            prop_assert_eq!(engine, brute_diversity(&cp, rec, k, m), "{:?}", c);
        }
    }

    #[test]
    fn user_and_permission_coverage_imply_access_coverage(p in policy_strategy()) {
        let cp = close_roles(&p);
        let c4 = check(&cp, &ConstraintSpec::UserCoverage).unwrap().status;
        let c8 = check(&cp, &ConstraintSpec::PermissionCoverage).unwrap().status;
        let c12 = check(&cp, &ConstraintSpec::AccessCoverage).unwrap().status;
        if c4 == Status::Satisfied && c8 == Status::Satisfied {
            prop_assert_eq!(c12, Status::Satisfied);
        }
    }
}
