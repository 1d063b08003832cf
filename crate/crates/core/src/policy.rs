//! The relational RBAC model: users, roles, records, the `Has_Role` and
//! `Permission` relations, role implications, and the derived `Has_Access`
//! relation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Class, Error};
use crate::ident::Identifier;

pub type Pair = (Identifier, Identifier);

/// A declared RBAC policy.
///
/// `implications` holds `(a, b)` edges meaning every holder of role `a` also
/// holds role `b`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy {
    pub users: BTreeSet<Identifier>,
    pub roles: BTreeSet<Identifier>,
    pub records: BTreeSet<Identifier>,
    /// `(user, role)`
    pub assignments: BTreeSet<Pair>,
    /// `(role, role)`
    pub implications: BTreeSet<Pair>,
    /// `(role, record)`
    pub permissions: BTreeSet<Pair>,
}

impl Policy {
    pub fn class_of(&self, name: &str) -> Option<Class> {
        if self.users.contains(name) {
            Some(Class::User)
        } else if self.roles.contains(name) {
            Some(Class::Role)
        } else if self.records.contains(name) {
            Some(Class::Record)
        } else {
            None
        }
    }

    pub fn declared(&self, class: Class) -> &BTreeSet<Identifier> {
        match class {
            Class::User => &self.users,
            Class::Role => &self.roles,
            Class::Record => &self.records,
        }
    }

    pub fn require(
        &self,
        name: &Identifier,
        class: Class,
        relation: &'static str,
    ) -> Result<(), Error> {
        if self.declared(class).contains(name) {
            Ok(())
        } else {
            Err(Error::UndeclaredIdentifier {
                name: name.to_string(),
                class,
                relation,
            })
        }
    }

    pub fn validate(self) -> Result<Policy, Error> {
        validate_policy(self)
    }

    pub fn close(&self) -> ClosedPolicy {
        close_roles(self)
    }

    /// Number of declared names across all three classes.
    pub fn constant_count(&self) -> usize {
        self.users.len() + self.roles.len() + self.records.len()
    }
}

/// Checks referential integrity, that no name is declared in two classes,
/// and that no role implies itself.
pub fn validate_policy(raw: Policy) -> Result<Policy, Error> {
    let classes = [
        (Class::User, &raw.users),
        (Class::Role, &raw.roles),
        (Class::Record, &raw.records),
    ];
    for (i, (first, a)) in classes.iter().enumerate() {
        for (second, b) in &classes[i + 1..] {
            if let Some(name) = a.intersection(b).next() {
                return Err(Error::DuplicateDeclaration {
                    name: name.to_string(),
                    first: *first,
                    second: *second,
                });
            }
        }
    }
    for (u, r) in &raw.assignments {
        raw.require(u, Class::User, "assign")?;
        raw.require(r, Class::Role, "assign")?;
    }
    for (a, b) in &raw.implications {
        raw.require(a, Class::Role, "implies")?;
        raw.require(b, Class::Role, "implies")?;
        if a == b {
            return Err(Error::SelfImplication(a.to_string()));
        }
    }
    for (r, o) in &raw.permissions {
        raw.require(r, Class::Role, "permit")?;
        raw.require(o, Class::Record, "permit")?;
    }
    Ok(raw)
}

/// A policy whose role assignments are closed under implication, together
/// with the derived access relation and lookup indexes over both.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedPolicy {
    base: Policy,
    closed_assignments: BTreeSet<Pair>,
    access: BTreeSet<Pair>,
    roles_of_user: BTreeMap<Identifier, BTreeSet<Identifier>>,
    users_of_role: BTreeMap<Identifier, BTreeSet<Identifier>>,
    records_of_role: BTreeMap<Identifier, BTreeSet<Identifier>>,
    roles_of_record: BTreeMap<Identifier, BTreeSet<Identifier>>,
    records_of_user: BTreeMap<Identifier, BTreeSet<Identifier>>,
    users_of_record: BTreeMap<Identifier, BTreeSet<Identifier>>,
}

/// Least fixpoint of the assignments under the implication edges, plus the
/// access join. Cycles among implications are fine.
pub fn close_roles(p: &Policy) -> ClosedPolicy {
    let mut successors: BTreeMap<&Identifier, Vec<&Identifier>> = BTreeMap::new();
    for (a, b) in &p.implications {
        successors.entry(a).or_default().push(b);
    }

    let mut direct: BTreeMap<&Identifier, Vec<&Identifier>> = BTreeMap::new();
    for (u, r) in &p.assignments {
        direct.entry(u).or_default().push(r);
    }

    let mut closed_assignments = BTreeSet::new();
    for (user, roles) in direct {
        let mut seen: BTreeSet<&Identifier> = roles.iter().copied().collect();
        let mut queue: VecDeque<&Identifier> = roles.into_iter().collect();
        while let Some(role) = queue.pop_front() {
            for next in successors.get(role).into_iter().flatten() {
                if seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        closed_assignments.extend(seen.into_iter().map(|r| (user.clone(), r.clone())));
    }

    ClosedPolicy::from_parts(p.clone(), closed_assignments)
}

fn index<'a>(
    keys: impl IntoIterator<Item = &'a Identifier>,
    pairs: impl IntoIterator<Item = (&'a Identifier, &'a Identifier)>,
) -> BTreeMap<Identifier, BTreeSet<Identifier>> {
    let mut map: BTreeMap<Identifier, BTreeSet<Identifier>> = keys
        .into_iter()
        .map(|k| (k.clone(), BTreeSet::new()))
        .collect();
    for (k, v) in pairs {
        map.entry(k.clone()).or_default().insert(v.clone());
    }
    map
}

impl ClosedPolicy {
    fn from_parts(base: Policy, closed_assignments: BTreeSet<Pair>) -> Self {
        let roles_of_user = index(&base.users, closed_assignments.iter().map(|(u, r)| (u, r)));
        let users_of_role = index(&base.roles, closed_assignments.iter().map(|(u, r)| (r, u)));
        let records_of_role = index(&base.roles, base.permissions.iter().map(|(r, o)| (r, o)));
        let roles_of_record = index(&base.records, base.permissions.iter().map(|(r, o)| (o, r)));

        let mut access = BTreeSet::new();
        for (user, roles) in &roles_of_user {
            for role in roles {
                for record in &records_of_role[role] {
                    access.insert((user.clone(), record.clone()));
                }
            }
        }
        let records_of_user = index(&base.users, access.iter().map(|(u, o)| (u, o)));
        let users_of_record = index(&base.records, access.iter().map(|(u, o)| (o, u)));

        ClosedPolicy {
            base,
            closed_assignments,
            access,
            roles_of_user,
            users_of_role,
            records_of_role,
            roles_of_record,
            records_of_user,
            users_of_record,
        }
    }

    pub fn base(&self) -> &Policy {
        &self.base
    }

    pub fn closed_assignments(&self) -> &BTreeSet<Pair> {
        &self.closed_assignments
    }

    pub fn access(&self) -> &BTreeSet<Pair> {
        &self.access
    }

    /// The base policy with its assignments replaced by the closed ones.
    pub fn saturated(&self) -> Policy {
        Policy {
            assignments: self.closed_assignments.clone(),
            ..self.base.clone()
        }
    }

    pub fn has_role(&self, user: &str, role: &str) -> bool {
        self.roles_of_user
            .get(user)
            .is_some_and(|rs| rs.contains(role))
    }

    pub fn permits(&self, role: &str, record: &str) -> bool {
        self.records_of_role
            .get(role)
            .is_some_and(|os| os.contains(record))
    }

    pub fn has_access(&self, user: &str, record: &str) -> bool {
        self.records_of_user
            .get(user)
            .is_some_and(|os| os.contains(record))
    }

    /// Closed roles of `user`; empty for unknown names.
    pub fn roles_of(&self, user: &str) -> &BTreeSet<Identifier> {
        self.roles_of_user.get(user).unwrap_or(empty())
    }

    pub fn users_of(&self, role: &str) -> &BTreeSet<Identifier> {
        self.users_of_role.get(role).unwrap_or(empty())
    }

    pub fn records_of_role(&self, role: &str) -> &BTreeSet<Identifier> {
        self.records_of_role.get(role).unwrap_or(empty())
    }

    pub fn roles_of_record(&self, record: &str) -> &BTreeSet<Identifier> {
        self.roles_of_record.get(record).unwrap_or(empty())
    }

    pub fn records_of_user(&self, user: &str) -> &BTreeSet<Identifier> {
        self.records_of_user.get(user).unwrap_or(empty())
    }

    pub fn users_of_record(&self, record: &str) -> &BTreeSet<Identifier> {
        self.users_of_record.get(record).unwrap_or(empty())
    }
}

fn empty() -> &'static BTreeSet<Identifier> {
    static EMPTY: BTreeSet<Identifier> = BTreeSet::new();
    &EMPTY
}

/// The derived `Has_Access` relation: the join of closed assignments with
/// permissions.
pub fn derive_access(p: &ClosedPolicy) -> &BTreeSet<Pair> {
    p.access()
}
