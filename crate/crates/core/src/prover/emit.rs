use std::collections::BTreeMap;
use std::fmt::Write;

use super::{EmissionMode, ProverEmission};
use crate::constraint::{describe, ConstraintSpec, IdSet};
use crate::ident::Identifier;
use crate::policy::ClosedPolicy;
use crate::translate::{combinations, index_pairs, role_var_names, var_names};

const RESERVED: [&str; 7] = [
    "all",
    "exists",
    "formulas",
    "end_of_list",
    "Has_Role",
    "Permission",
    "Has_Access",
];

/// Emitted token for a declared name.
///
/// Names that would lex as a Prover9 variable, that already start with
/// `C_`, that are reserved words, or that look like the `r1`, `r2`, ...
/// variables used in goals get a `C_` prefix. The mapping is injective.
pub fn mangle(name: &str) -> String {
    let variable_like = name.starts_with(|c: char| ('u'..='z').contains(&c));
    let role_var =
        name.len() > 1 && name.starts_with('r') && name[1..].bytes().all(|b| b.is_ascii_digit());
    if variable_like || role_var || name.starts_with("C_") || RESERVED.contains(&name) {
        format!("C_{name}")
    } else {
        name.to_string()
    }
}

struct Emitter<'a> {
    p: &'a ClosedPolicy,
    names: BTreeMap<Identifier, String>,
}

impl<'a> Emitter<'a> {
    fn new(p: &'a ClosedPolicy) -> Self {
        let base = p.base();
        let names = base
            .users
            .iter()
            .chain(&base.roles)
            .chain(&base.records)
            .map(|n| (n.clone(), mangle(n)))
            .collect();
        Emitter { p, names }
    }

    fn n<'s>(&'s self, id: &'s Identifier) -> &'s str {
        self.names
            .get(id)
            .map(String::as_str)
            .unwrap_or(id.as_str())
    }

    /// `v=A | v=B | ...`, or `None` for an empty set.
    fn any_of<'s>(&self, v: &str, set: impl IntoIterator<Item = &'s Identifier>) -> Option<String> {
        let parts: Vec<String> = set
            .into_iter()
            .map(|c| format!("{v}={}", self.n(c)))
            .collect();
        (!parts.is_empty()).then(|| parts.join(" | "))
    }

    fn guard(&self, v: &str, set: &IdSet) -> String {
        format!(
            "({})",
            self.any_of(v, set).expect("validated sets are non-empty")
        )
    }

    fn distinct(&self, out: &mut String, set: &IdSet) {
        let items: Vec<&Identifier> = set.iter().collect();
        for (i, j) in index_pairs(items.len()) {
            let _ = writeln!(out, "{} != {}.", self.n(items[i]), self.n(items[j]));
        }
    }

    fn assumptions(&self, mode: EmissionMode) -> String {
        let base = self.p.base();
        let mut out = String::new();
        if !base.assignments.is_empty() {
            out.push_str("% Has_Role facts\n");
            for (u, r) in &base.assignments {
                let _ = writeln!(out, "Has_Role({},{}).", self.n(u), self.n(r));
            }
        }
        if !base.implications.is_empty() {
            out.push_str("% role implications\n");
            for (a, b) in &base.implications {
                let _ = writeln!(
                    out,
                    "all x (Has_Role(x,{}) -> Has_Role(x,{})).",
                    self.n(a),
                    self.n(b)
                );
            }
        }
        if !base.permissions.is_empty() {
            out.push_str("% Permission facts\n");
            for (r, o) in &base.permissions {
                let _ = writeln!(out, "Permission({},{}).", self.n(r), self.n(o));
            }
        }
        out.push_str("% access derivation\n");
        out.push_str("all x all y all z (Has_Role(x,y) & Permission(y,z) -> Has_Access(x,z)).\n");

        if mode == EmissionMode::Complete && base.constant_count() > 0 {
            self.completion(&mut out);
        }
        out
    }

    fn completion(&self, out: &mut String) {
        let base = self.p.base();
        let derived: Vec<_> = self
            .p
            .closed_assignments()
            .iter()
            .filter(|pair| !base.assignments.contains(*pair))
            .collect();
        if !derived.is_empty() {
            out.push_str("% Has_Role facts derived through implications\n");
            for (u, r) in derived {
                let _ = writeln!(out, "Has_Role({},{}).", self.n(u), self.n(r));
            }
        }
        out.push_str("% absent Has_Role pairs\n");
        for u in &base.users {
            for r in &base.roles {
                if !self.p.has_role(u, r) {
                    let _ = writeln!(out, "-Has_Role({},{}).", self.n(u), self.n(r));
                }
            }
        }
        out.push_str("% absent Permission pairs\n");
        for r in &base.roles {
            for o in &base.records {
                if !base.permissions.contains(&(r.clone(), o.clone())) {
                    let _ = writeln!(out, "-Permission({},{}).", self.n(r), self.n(o));
                }
            }
        }
        let all: IdSet = self.names.keys().cloned().collect();
        out.push_str("% unique names\n");
        self.distinct(out, &all);
        out.push_str("% domain closure\n");
        let _ = writeln!(
            out,
            "all x ({}).",
            self.any_of("x", &all).expect("non-empty")
        );
        out.push_str("% sorts\n");
        for (pred, left, right) in [
            ("Has_Role", &base.users, &base.roles),
            ("Permission", &base.roles, &base.records),
            ("Has_Access", &base.users, &base.records),
        ] {
            match (self.any_of("x", left), self.any_of("y", right)) {
                (Some(l), Some(r)) => {
                    let _ = writeln!(out, "all x all y ({pred}(x,y) -> ({l}) & ({r})).");
                }
                _ => {
                    let _ = writeln!(out, "all x all y -{pred}(x,y).");
                }
            }
        }
        out.push_str("% access completion\n");
        out.push_str(
            "all x all z (Has_Access(x,z) -> exists y (Has_Role(x,y) & Permission(y,z))).\n",
        );
    }

    /// `all x (guard -> body)` in complete mode, `guard -> body` with a free
    /// variable in enumerate mode. An empty guard yields a tautology.
    fn universal(&self, mode: EmissionMode, v: &str, guard: Option<String>, body: &str) -> String {
        match (guard, mode) {
            (None, EmissionMode::Enumerate) => format!("{v}={v}."),
            (None, EmissionMode::Complete) => format!("all {v} ({v}={v})."),
            (Some(g), EmissionMode::Enumerate) => format!("{g} -> {body}."),
            (Some(g), EmissionMode::Complete) => format!("all {v} ({g} -> {body})."),
        }
    }

    fn threshold(
        &self,
        mode: EmissionMode,
        record: &Identifier,
        vars: &[String],
        pred: &str,
    ) -> String {
        let mut conj: Vec<String> = vars.iter().map(|v| format!("{pred}({v},z)")).collect();
        conj.extend(index_pairs(vars.len()).map(|(i, j)| format!("{} != {}", vars[i], vars[j])));
        let body = format!("{}({})", quantifiers(vars), conj.join(" & "));
        self.universal(mode, "z", Some(format!("z={}", self.n(record))), &body)
    }

    fn goal(&self, c: &ConstraintSpec, mode: EmissionMode) -> String {
        let base = self.p.base();
        match c {
            ConstraintSpec::Prerequisite { trigger, required } => {
                let (t, q) = (self.n(trigger), self.n(required));
                match mode {
                    EmissionMode::Enumerate => self.universal(
                        mode,
                        "x",
                        self.any_of("x", self.p.users_of(trigger)),
                        &format!("Has_Role(x,{q})"),
                    ),
                    EmissionMode::Complete => format!("all x (Has_Role(x,{t}) -> Has_Role(x,{q}))."),
                }
            }
            ConstraintSpec::SodRoles { conflict } => format!(
                "exists x exists y exists z (Has_Role(x,y) & Has_Role(x,z) & y != z & {} & {}).",
                self.guard("y", conflict),
                self.guard("z", conflict)
            ),
            ConstraintSpec::RoleCoverage => {
                self.universal(mode, "x", self.any_of("x", &base.roles), "exists y (Has_Role(y,x))")
            }
            ConstraintSpec::UserCoverage => {
                self.universal(mode, "x", self.any_of("x", &base.users), "exists y (Has_Role(x,y))")
            }
            ConstraintSpec::ExclusiveChoice { trigger, choices } => format!(
                "exists x exists y exists z exists v (Has_Role(x,y) & Has_Role(x,z) & Has_Role(x,v) & {} & {} & {} & y != z & y != v & z != v).",
                self.guard("y", trigger),
                self.guard("z", choices),
                self.guard("v", choices)
            ),
            ConstraintSpec::ForbiddenAssignment { users, roles } => format!(
                "exists x exists y ({} & {} & Has_Role(x,y)).",
                self.guard("x", users),
                self.guard("y", roles)
            ),
            ConstraintSpec::RecordCoverage => {
                self.universal(mode, "x", self.any_of("x", &base.records), "exists y (Permission(y,x))")
            }
            ConstraintSpec::PermissionCoverage => {
                self.universal(mode, "x", self.any_of("x", &base.roles), "exists y (Permission(x,y))")
            }
            ConstraintSpec::MinRolesPerRecord { record, k } => {
                self.threshold(mode, record, &var_names(*k, "x"), "Permission")
            }
            ConstraintSpec::UniqueRolePerRecord { record } => {
                let o = self.n(record);
                format!(
                    "(exists x exists y (Permission(x,{o}) & Permission(y,{o}) & x != y)) | -(exists w (Permission(w,{o})))."
                )
            }
            ConstraintSpec::SodRecords { conflict } => format!(
                "exists x exists y exists z (Permission(x,y) & Permission(x,z) & y != z & {} & {}).",
                self.guard("y", conflict),
                self.guard("z", conflict)
            ),
            ConstraintSpec::AccessCoverage => {
                self.universal(mode, "x", self.any_of("x", &base.users), "exists y (Has_Access(x,y))")
            }
            ConstraintSpec::MinUsersPerRecord { record, k } => {
                self.threshold(mode, record, &var_names(*k, "x"), "Has_Access")
            }
            ConstraintSpec::AccessDiversity { record, users, roles } => {
                let us = var_names(*users, "x");
                let rs = role_var_names(*users);
                let mut conj: Vec<String> = us.iter().map(|u| format!("Has_Access({u},z)")).collect();
                conj.extend(us.iter().zip(&rs).map(|(u, r)| format!("Has_Role({u},{r})")));
                match *roles {
                    0 | 1 => {}
                    2 => conj.push(format!(
                        "({})",
                        rs[1..].iter().map(|r| format!("{} != {r}", rs[0])).collect::<Vec<_>>().join(" | ")
                    )),
                    m => conj.push(format!(
                        "({})",
                        combinations(rs.len(), m)
                            .iter()
                            .map(|combo| {
                                let ds: Vec<String> = index_pairs(combo.len())
                                    .map(|(i, j)| format!("{} != {}", rs[combo[i]], rs[combo[j]]))
                                    .collect();
                                format!("({})", ds.join(" & "))
                            })
                            .collect::<Vec<_>>()
                            .join(" | ")
                    )),
                }
                conj.extend(index_pairs(us.len()).map(|(i, j)| format!("{} != {}", us[i], us[j])));
                let all_vars: Vec<String> = us.iter().chain(&rs).cloned().collect();
                let body = format!("{}({})", quantifiers(&all_vars), conj.join(" & "));
                self.universal(mode, "z", Some(format!("z={}", self.n(record))), &body)
            }
        }
    }

    /// Constants whose pairwise distinctness the goal relies on. Complete
    /// mode already asserts unique names for every constant.
    fn goal_distinctness(&self, c: &ConstraintSpec) -> Vec<IdSet> {
        let base = self.p.base();
        match c {
            ConstraintSpec::SodRoles { conflict } | ConstraintSpec::SodRecords { conflict } => {
                vec![conflict.clone()]
            }
            ConstraintSpec::ExclusiveChoice { trigger, choices } => vec![trigger | choices],
            ConstraintSpec::MinRolesPerRecord { .. }
            | ConstraintSpec::UniqueRolePerRecord { .. } => {
                vec![base.roles.clone()]
            }
            ConstraintSpec::MinUsersPerRecord { .. } => vec![base.users.clone()],
            ConstraintSpec::AccessDiversity { .. } => vec![base.users.clone(), base.roles.clone()],
            _ => vec![],
        }
    }
}

fn quantifiers(vars: &[String]) -> String {
    vars.iter().map(|v| format!("exists {v} ")).collect()
}

/// Assumption block for `p`: facts, implication axioms and the access
/// rule, plus the closed-world completion in [`EmissionMode::Complete`].
pub fn emit_assumptions(p: &ClosedPolicy, mode: EmissionMode) -> String {
    Emitter::new(p).assumptions(mode)
}

/// Full prover input for one constraint. `c` must be valid for `p`.
pub fn emit_goal(c: &ConstraintSpec, p: &ClosedPolicy, mode: EmissionMode) -> ProverEmission {
    let e = Emitter::new(p);
    let mut assumptions = e.assumptions(mode);
    if mode == EmissionMode::Enumerate {
        let sets: Vec<IdSet> = e
            .goal_distinctness(c)
            .into_iter()
            .filter(|s| s.len() > 1)
            .collect();
        if !sets.is_empty() {
            assumptions.push_str("% distinct constants\n");
            for s in &sets {
                e.distinct(&mut assumptions, s);
            }
        }
    }
    ProverEmission {
        title: describe(c),
        assumptions,
        goal: e.goal(c, mode) + "\n",
        polarity: c.family().polarity(),
        mangled_names: e.names,
    }
}
