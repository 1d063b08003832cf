//! Defining first-order formula of each constraint family.

use crate::constraint::{ConstraintSpec, IdSet, Polarity};
use crate::error::Class;
use crate::formula::{cst, var, Formula, Term};

/// Names for `k` existentially bound variables: `x, y, v` up to three,
/// `{prefix}1..{prefix}k` beyond that.
pub(crate) fn var_names(k: usize, prefix: &str) -> Vec<String> {
    if k <= 3 {
        ["x", "y", "v"][..k].iter().map(|s| s.to_string()).collect()
    } else {
        (1..=k).map(|i| format!("{prefix}{i}")).collect()
    }
}

pub(crate) fn role_var_names(k: usize) -> Vec<String> {
    (1..=k).map(|i| format!("r{i}")).collect()
}

/// All index pairs `(i, j)` with `i < j < n`, in lexicographic order.
pub(crate) fn index_pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// All `m`-element index subsets of `0..n`, lexicographic.
pub(crate) fn combinations(n: usize, m: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, m, &mut Vec::new(), &mut out);
    out
}

fn pairwise_distinct(names: &[String]) -> Vec<Formula> {
    index_pairs(names.len())
        .map(|(i, j)| Formula::neq(var(&names[i]), var(&names[j])))
        .collect()
}

fn member(v: &str, set: &IdSet) -> Formula {
    Formula::Member(var(v), set.clone())
}

/// "At least `m` distinct values among `names`" as a disjunction of
/// disequalities. For `m = 2` this is "not all equal to the first".
pub(crate) fn at_least_distinct(names: &[String], m: usize) -> Option<Formula> {
    match m {
        0 | 1 => None,
        2 => Some(Formula::Or(
            names[1..]
                .iter()
                .map(|n| Formula::neq(var(&names[0]), var(n)))
                .collect(),
        )),
        _ => Some(Formula::Or(
            combinations(names.len(), m)
                .into_iter()
                .map(|combo| {
                    let picked: Vec<String> = combo.iter().map(|&i| names[i].clone()).collect();
                    Formula::And(pairwise_distinct(&picked))
                })
                .collect(),
        )),
    }
}

fn threshold_body(
    record: &Term,
    names: &[String],
    sort: Class,
    atom: fn(Term, Term) -> Formula,
) -> Formula {
    let mut conj: Vec<Formula> = names.iter().map(|n| atom(var(n), record.clone())).collect();
    conj.extend(pairwise_distinct(names));
    let vars: Vec<(String, Class)> = names.iter().map(|n| (n.clone(), sort)).collect();
    Formula::exists_all(&vars, Formula::And(conj))
}

/// `all z (z = record -> body)`, the pinned-record shape used for the
/// threshold families.
fn at_record(record: &crate::ident::Identifier, body: Formula) -> Formula {
    Formula::forall(
        "z",
        Class::Record,
        Formula::implies(Formula::Eq(var("z"), cst(record)), body),
    )
}

/// The family's defining formula with concrete constants substituted, and the
/// polarity under which its truth value decides the constraint.
pub fn constraint_to_formula(c: &ConstraintSpec) -> (Formula, Polarity) {
    use Class::{Record, Role, User};
    let f = match c {
        ConstraintSpec::Prerequisite { trigger, required } => Formula::forall(
            "x",
            User,
            Formula::implies(
                Formula::HasRole(var("x"), cst(trigger)),
                Formula::HasRole(var("x"), cst(required)),
            ),
        ),
        ConstraintSpec::SodRoles { conflict } => Formula::exists(
            "x",
            User,
            Formula::exists(
                "y",
                Role,
                Formula::exists(
                    "z",
                    Role,
                    Formula::And(vec![
                        Formula::HasRole(var("x"), var("y")),
                        Formula::HasRole(var("x"), var("z")),
                        Formula::neq(var("y"), var("z")),
                        member("y", conflict),
                        member("z", conflict),
                    ]),
                ),
            ),
        ),
        ConstraintSpec::RoleCoverage => Formula::forall(
            "x",
            Role,
            Formula::exists("y", User, Formula::HasRole(var("y"), var("x"))),
        ),
        ConstraintSpec::UserCoverage => Formula::forall(
            "x",
            User,
            Formula::exists("y", Role, Formula::HasRole(var("x"), var("y"))),
        ),
        ConstraintSpec::ExclusiveChoice { trigger, choices } => Formula::exists_all(
            &[
                ("x".into(), User),
                ("y".into(), Role),
                ("z".into(), Role),
                ("v".into(), Role),
            ],
            Formula::And(vec![
                Formula::HasRole(var("x"), var("y")),
                Formula::HasRole(var("x"), var("z")),
                Formula::HasRole(var("x"), var("v")),
                member("y", trigger),
                member("z", choices),
                member("v", choices),
                Formula::neq(var("y"), var("z")),
                Formula::neq(var("y"), var("v")),
                Formula::neq(var("z"), var("v")),
            ]),
        ),
        ConstraintSpec::ForbiddenAssignment { users, roles } => Formula::exists(
            "x",
            User,
            Formula::exists(
                "y",
                Role,
                Formula::And(vec![
                    member("x", users),
                    member("y", roles),
                    Formula::HasRole(var("x"), var("y")),
                ]),
            ),
        ),
        ConstraintSpec::RecordCoverage => Formula::forall(
            "x",
            Record,
            Formula::exists("y", Role, Formula::Permission(var("y"), var("x"))),
        ),
        ConstraintSpec::PermissionCoverage => Formula::forall(
            "x",
            Role,
            Formula::exists("y", Record, Formula::Permission(var("x"), var("y"))),
        ),
        ConstraintSpec::MinRolesPerRecord { record, k } => at_record(
            record,
            threshold_body(&var("z"), &var_names(*k, "x"), Role, Formula::Permission),
        ),
        ConstraintSpec::UniqueRolePerRecord { record } => Formula::Or(vec![
            threshold_body(&cst(record), &var_names(2, "x"), Role, Formula::Permission),
            Formula::not(Formula::exists(
                "w",
                Role,
                Formula::Permission(var("w"), cst(record)),
            )),
        ]),
        ConstraintSpec::SodRecords { conflict } => Formula::exists(
            "x",
            Role,
            Formula::exists(
                "y",
                Record,
                Formula::exists(
                    "z",
                    Record,
                    Formula::And(vec![
                        Formula::Permission(var("x"), var("y")),
                        Formula::Permission(var("x"), var("z")),
                        Formula::neq(var("y"), var("z")),
                        member("y", conflict),
                        member("z", conflict),
                    ]),
                ),
            ),
        ),
        ConstraintSpec::AccessCoverage => Formula::forall(
            "x",
            User,
            Formula::exists("y", Record, Formula::HasAccess(var("x"), var("y"))),
        ),
        ConstraintSpec::MinUsersPerRecord { record, k } => at_record(
            record,
            threshold_body(&var("z"), &var_names(*k, "x"), User, Formula::HasAccess),
        ),
        ConstraintSpec::AccessDiversity {
            record,
            users,
            roles,
        } => {
            let us = var_names(*users, "x");
            let rs = role_var_names(*users);
            let mut conj: Vec<Formula> = us
                .iter()
                .map(|u| Formula::HasAccess(var(u), var("z")))
                .collect();
            conj.extend(
                us.iter()
                    .zip(&rs)
                    .map(|(u, r)| Formula::HasRole(var(u), var(r))),
            );
            conj.extend(at_least_distinct(&rs, *roles));
            conj.extend(pairwise_distinct(&us));
            let mut vars: Vec<(String, Class)> = us.iter().map(|u| (u.clone(), User)).collect();
            vars.extend(rs.iter().map(|r| (r.clone(), Role)));
            at_record(record, Formula::exists_all(&vars, Formula::And(conj)))
        }
    };
    (f, c.family().polarity())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ident::id;

    #[test]
    fn min_users_three_expands_to_three_existentials() {
        let (f, pol) = constraint_to_formula(&ConstraintSpec::MinUsersPerRecord {
            record: id("REC3"),
            k: 3,
        });
        assert_eq!(pol, Polarity::PositiveForm);
        let Formula::Forall(_, _, body) = f else {
            panic!()
        };
        let Formula::Implies(_, ex) = *body else {
            panic!()
        };
        let mut vars = Vec::new();
        let mut g = *ex;
        while let Formula::Exists(v, _, inner) = g {
            vars.push(v);
            g = *inner;
        }
        assert_eq!(vars, ["x", "y", "v"]);
        let Formula::And(conj) = g else { panic!() };
        let neqs: Vec<_> = conj
            .iter()
            .filter(|c| matches!(c, Formula::Not(_)))
            .collect();
        assert_eq!(neqs.len(), 3);
        assert!(conj.contains(&Formula::neq(var("x"), var("v"))));
        assert!(conj.contains(&Formula::neq(var("y"), var("v"))));
    }

    #[test]
    fn prerequisite_is_a_universal_implication() {
        let (f, _) = constraint_to_formula(&ConstraintSpec::Prerequisite {
            trigger: id("TA"),
            required: id("Student"),
        });
        let expected = Formula::forall(
            "x",
            Class::User,
            Formula::implies(
                Formula::HasRole(var("x"), cst(&id("TA"))),
                Formula::HasRole(var("x"), cst(&id("Student"))),
            ),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn diversity_two_roles_is_not_all_equal() {
        let names = role_var_names(3);
        let f = at_least_distinct(&names, 2).unwrap();
        assert_eq!(
            f,
            Formula::Or(vec![
                Formula::neq(var("r1"), var("r2")),
                Formula::neq(var("r1"), var("r3")),
            ])
        );
    }

    #[test]
    fn combinations_are_lexicographic() {
        assert_eq!(
            combinations(4, 3),
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert_eq!(combinations(2, 0), vec![Vec::<usize>::new()]);
    }
}
