mod common;

use common::*;
use rbacv_core::error::Class;
use rbacv_core::formula::{cst, var, Term};
use rbacv_core::ident::id;
use rbacv_core::{
    close_roles, constraint_to_formula, oracle_eval, polarity_of, ConstraintSpec, Error, Formula,
    Polarity,
};

fn sod_formula() -> Formula {
    let set = set(&["Instructor", "Secretary", "Student"]);
    Formula::exists(
        "x",
        Class::User,
        Formula::exists(
            "y",
            Class::Role,
            Formula::exists(
                "z",
                Class::Role,
                Formula::And(vec![
                    Formula::HasRole(var("x"), var("y")),
                    Formula::HasRole(var("x"), var("z")),
                    Formula::neq(var("y"), var("z")),
                    Formula::Member(var("y"), set.clone()),
                    Formula::Member(var("z"), set),
                ]),
            ),
        ),
    )
}

#[test]
fn sod_formula_witnesses_david() {
    let v = oracle_eval(&close_roles(&university()), &sod_formula()).unwrap();
    assert!(v.truth);
    let david_pair = vec![
        ("x".to_string(), id("David")),
        ("y".to_string(), id("Instructor")),
        ("z".to_string(), id("Student")),
    ];
    assert!(v.witnesses.contains(&david_pair));
    assert!(v.witnesses.iter().all(|b| b[0].1.as_str() == "David"));
    assert_eq!(v.witnesses.len(), 2);
}

#[test]
fn every_user_has_a_role() {
    let users = university().users;
    let f = Formula::forall(
        "x",
        Class::User,
        Formula::implies(
            Formula::Member(var("x"), users),
            Formula::exists("y", Class::Role, Formula::HasRole(var("x"), var("y"))),
        ),
    );
    let v = oracle_eval(&close_roles(&university()), &f).unwrap();
    assert!(v.truth);
    assert!(v.witnesses.is_empty());
}

#[test]
fn reflexivity_on_any_policy() {
    for p in [university(), Default::default()] {
        for sort in [Class::User, Class::Role, Class::Record] {
            let f = Formula::forall("x", sort, Formula::Eq(var("x"), var("x")));
            assert!(oracle_eval(&close_roles(&p), &f).unwrap().truth);
        }
    }
}

#[test]
fn empty_sorts_are_vacuous() {
    let p = close_roles(&Default::default());
    let e = Formula::exists("x", Class::User, Formula::True);
    assert!(!oracle_eval(&p, &e).unwrap().truth);
    let a = Formula::forall("x", Class::User, Formula::False);
    assert!(oracle_eval(&p, &a).unwrap().truth);
}

#[test]
fn ill_sorted_formulas_are_rejected() {
    let p = close_roles(&university());
    let bad = [
        Formula::exists("x", Class::Role, Formula::HasRole(var("x"), var("x"))),
        Formula::HasRole(cst(&id("REC1")), cst(&id("Student"))),
        Formula::HasRole(var("free"), cst(&id("Student"))),
        Formula::exists(
            "x",
            Class::User,
            Formula::exists("x", Class::User, Formula::True),
        ),
        Formula::exists("x", Class::User, Formula::Eq(var("x"), cst(&id("Dean")))),
        Formula::exists("x", Class::User, Formula::Member(var("x"), set(&["Dean"]))),
        Formula::HasRole(cst(&id("Nobody")), cst(&id("Student"))),
    ];
    for f in &bad {
        assert!(
            matches!(oracle_eval(&p, f), Err(Error::IllSortedFormula(_))),
            "{f:?}"
        );
    }
}

#[test]
fn ground_atoms_read_the_closed_relations() {
    let p = close_roles(&university());
    let t = |f: Formula| oracle_eval(&p, &f).unwrap().truth;
    let c = |s: &str| -> Term { cst(&id(s)) };
    assert!(t(Formula::HasRole(c("David"), c("Student"))));
    assert!(!t(Formula::HasRole(c("Sam"), c("TA"))));
    assert!(t(Formula::Permission(c("Secretary"), c("REC3"))));
    assert!(t(Formula::HasAccess(c("James"), c("REC4"))));
    assert!(!t(Formula::HasAccess(c("Mary"), c("REC4"))));
    assert!(t(Formula::iff(Formula::True, Formula::not(Formula::False))));
}

fn exists_vars(f: &Formula, out: &mut Vec<String>) {
    match f {
        Formula::Exists(v, _, b) => {
            out.push(v.clone());
            exists_vars(b, out);
        }
        Formula::Forall(_, _, b) | Formula::Not(b) => exists_vars(b, out),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            exists_vars(a, out);
            exists_vars(b, out);
        }
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| exists_vars(g, out)),
        _ => {}
    }
}

fn disequalities(f: &Formula, out: &mut Vec<(String, String)>) {
    match f {
        Formula::Not(b) => match &**b {
            Formula::Eq(Term::Var(a), Term::Var(c)) => out.push((a.clone(), c.clone())),
            other => disequalities(other, out),
        },
        Formula::Exists(_, _, b) | Formula::Forall(_, _, b) => disequalities(b, out),
        Formula::Implies(a, b) | Formula::Iff(a, b) => {
            disequalities(a, out);
            disequalities(b, out);
        }
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| disequalities(g, out)),
        _ => {}
    }
}

#[test]
fn min_users_formula_has_three_distinct_existentials() {
    let (f, pol) = constraint_to_formula(&ConstraintSpec::MinUsersPerRecord {
        record: id("REC3"),
        k: 3,
    });
    assert_eq!(pol, Polarity::PositiveForm);
    let mut vs = Vec::new();
    exists_vars(&f, &mut vs);
    assert_eq!(vs, ["x", "y", "v"]);
    let mut ds = Vec::new();
    disequalities(&f, &mut ds);
    let pairs: Vec<(&str, &str)> = ds.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    assert_eq!(pairs, [("x", "y"), ("x", "v"), ("y", "v")]);
}

#[test]
fn prerequisite_formula_shape() {
    let (f, pol) = constraint_to_formula(&ConstraintSpec::Prerequisite {
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
    assert_eq!(pol, Polarity::PositiveForm);
}

#[test]
fn diversity_formula_has_role_disjunction() {
    let (f, _) = constraint_to_formula(&ConstraintSpec::AccessDiversity {
        record: id("REC3"),
        users: 3,
        roles: 2,
    });
    let mut vs = Vec::new();
    exists_vars(&f, &mut vs);
    assert_eq!(vs, ["x", "y", "v", "r1", "r2", "r3"]);
    fn find_or(f: &Formula) -> Option<&Formula> {
        match f {
            Formula::Or(_) => Some(f),
            Formula::Exists(_, _, b) | Formula::Forall(_, _, b) => find_or(b),
            Formula::Implies(a, b) => find_or(a).or_else(|| find_or(b)),
            Formula::And(fs) => fs.iter().find_map(find_or),
            _ => None,
        }
    }
    let expected = Formula::Or(vec![
        Formula::neq(var("r1"), var("r2")),
        Formula::neq(var("r1"), var("r3")),
    ]);
    assert_eq!(find_or(&f), Some(&expected));
}

#[test]
fn polarity_agrees_with_family_table() {
    let p = university();
    for c in university_constraints(&p) {
        let negative = matches!(
            c,
            ConstraintSpec::SodRoles { .. }
                | ConstraintSpec::ExclusiveChoice { .. }
                | ConstraintSpec::ForbiddenAssignment { .. }
                | ConstraintSpec::UniqueRolePerRecord { .. }
                | ConstraintSpec::SodRecords { .. }
        );
        let want = if negative {
            Polarity::NegativeForm
        } else {
            Polarity::PositiveForm
        };
        assert_eq!(polarity_of(&c), want);
        assert_eq!(constraint_to_formula(&c).1, want);
    }
}
