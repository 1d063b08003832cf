//! Line-oriented policy and constraint files.
//!
//! ```text
//! users Sam David          # declarations
//! roles Student TA
//! records REC1
//! assign David TA          # Has_Role
//! implies TA Student       # every TA is a Student
//! permit Student REC1      # Permission
//!
//! sod-roles { Instructor Student }
//! diversity REC1 3 2
//! ```
//!
//! Names must be declared before use. `#` starts a comment.

use std::collections::BTreeSet;

use crate::constraint::{ConstraintSpec, Family, IdSet};
use crate::error::{Class, SourceError, SourceErrorKind};
use crate::ident::{self, Identifier};
use crate::policy::Policy;

/// A policy together with an ordered list of constraints over it.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Document {
    pub policy: Policy,
    pub constraints: Vec<ConstraintSpec>,
}

#[derive(Debug, Clone, Copy)]
struct Token<'a> {
    text: &'a str,
    /// 1-based character column.
    column: usize,
}

fn tokenize(line: &str) -> Vec<Token<'_>> {
    let code = match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    };
    let mut out = Vec::new();
    let mut start: Option<usize> = None;
    let column_of = |byte: usize| line[..byte].chars().count() + 1;
    for (i, ch) in code.char_indices() {
        if ch.is_whitespace() || ch == '{' || ch == '}' {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &code[s..i],
                    column: column_of(s),
                });
            }
            if ch == '{' || ch == '}' {
                out.push(Token {
                    text: &code[i..i + 1],
                    column: column_of(i),
                });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &code[s..],
            column: column_of(s),
        });
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Policy,
    Constraints,
    Document,
}

struct Line<'a> {
    number: usize,
    text: &'a str,
    tokens: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Line<'a> {
    fn error_at(
        &self,
        column: usize,
        kind: SourceErrorKind,
        message: impl Into<String>,
    ) -> SourceError {
        SourceError {
            kind,
            line: self.number,
            column,
            message: message.into(),
            snippet: self.text.to_string(),
        }
    }

    fn error(
        &self,
        tok: Token<'_>,
        kind: SourceErrorKind,
        message: impl Into<String>,
    ) -> SourceError {
        self.error_at(tok.column, kind, message)
    }

    /// Column just past the end of the line's content, for "missing" errors.
    fn end_column(&self) -> usize {
        let code = self.text.split('#').next().unwrap_or("");
        code.trim_end().chars().count() + 1
    }

    fn next(&mut self) -> Option<Token<'a>> {
        let t = self.tokens.get(self.pos).copied();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    fn expect(&mut self, what: &str) -> Result<Token<'a>, SourceError> {
        self.next().ok_or_else(|| {
            self.error_at(
                self.end_column(),
                SourceErrorKind::Syntax,
                format!("expected {what}"),
            )
        })
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SourceError> {
        let t = self.expect(&format!("`{kw}`"))?;
        if t.text == kw {
            Ok(())
        } else {
            Err(self.error(
                t,
                SourceErrorKind::Syntax,
                format!("expected `{kw}`, found `{}`", t.text),
            ))
        }
    }

    fn finish(&mut self) -> Result<(), SourceError> {
        match self.next() {
            None => Ok(()),
            Some(t) => Err(self.error(
                t,
                SourceErrorKind::Syntax,
                format!("unexpected `{}`", t.text),
            )),
        }
    }

    fn identifier(&mut self, what: &str) -> Result<(Identifier, Token<'a>), SourceError> {
        let t = self.expect(what)?;
        if !ident::is_valid(t.text) {
            return Err(self.error(
                t,
                SourceErrorKind::Syntax,
                format!("expected {what}, found `{}`", t.text),
            ));
        }
        Ok((Identifier::new(t.text).expect("validated"), t))
    }

    fn threshold(&mut self, what: &str) -> Result<(usize, Token<'a>), SourceError> {
        let t = self.expect(what)?;
        let bad = |msg: String| self.error(t, SourceErrorKind::BadThreshold, msg);
        if !t.text.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad(format!(
                "{what} must be a positive integer, found `{}`",
                t.text
            )));
        }
        match t.text.parse::<usize>() {
            Ok(0) => Err(bad(format!("{what} must be at least 1"))),
            Ok(k) => Ok((k, t)),
            Err(_) => Err(bad(format!("{what} `{}` is out of range", t.text))),
        }
    }
}

struct Parser {
    mode: Mode,
    policy: Policy,
    constraints: Vec<ConstraintSpec>,
}

impl Parser {
    fn declared(
        &self,
        line: &Line<'_>,
        tok: Token<'_>,
        name: &Identifier,
        class: Class,
    ) -> Result<(), SourceError> {
        match self.policy.class_of(name) {
            Some(c) if c == class => Ok(()),
            Some(other) => Err(line.error(
                tok,
                SourceErrorKind::UndeclaredIdentifier,
                format!("`{name}` is declared as a {other}, expected a {class}"),
            )),
            None => Err(line.error(
                tok,
                SourceErrorKind::UndeclaredIdentifier,
                format!("undeclared {class} `{name}`"),
            )),
        }
    }

    fn name(&self, line: &mut Line<'_>, class: Class) -> Result<Identifier, SourceError> {
        let (name, tok) = line.identifier(&format!("a {class} name"))?;
        self.declared(line, tok, &name, class)?;
        Ok(name)
    }

    /// `{ id+ }` with at least `min` distinct declared members.
    fn set(&self, line: &mut Line<'_>, class: Class, min: usize) -> Result<IdSet, SourceError> {
        let open = line.expect("`{`")?;
        if open.text != "{" {
            return Err(line.error(
                open,
                SourceErrorKind::Syntax,
                format!("expected `{{`, found `{}`", open.text),
            ));
        }
        let mut set = BTreeSet::new();
        loop {
            match line.peek() {
                Some(t) if t.text == "}" => {
                    line.next();
                    break;
                }
                Some(_) => {
                    let (name, tok) = line.identifier(&format!("a {class} name or `}}`"))?;
                    self.declared(line, tok, &name, class)?;
                    if !set.insert(name) {
                        return Err(line.error(
                            tok,
                            SourceErrorKind::Syntax,
                            format!("`{}` listed twice", tok.text),
                        ));
                    }
                }
                None => {
                    return Err(line.error_at(
                        line.end_column(),
                        SourceErrorKind::Syntax,
                        "expected `}`",
                    ));
                }
            }
        }
        if set.len() < min {
            return Err(line.error(
                open,
                SourceErrorKind::InvalidConstraint,
                format!("set needs at least {min} {class}(s), found {}", set.len()),
            ));
        }
        Ok(set)
    }

    fn line(&mut self, mut line: Line<'_>) -> Result<(), SourceError> {
        let head = match line.next() {
            Some(t) => t,
            None => return Ok(()),
        };
        let policy_ok = self.mode != Mode::Constraints;
        let constraints_ok = self.mode != Mode::Policy;
        match head.text {
            "users" | "roles" | "records" if policy_ok => {
                let class = match head.text {
                    "users" => Class::User,
                    "roles" => Class::Role,
                    _ => Class::Record,
                };
                if line.peek().is_none() {
                    return Err(line.error_at(
                        line.end_column(),
                        SourceErrorKind::Syntax,
                        "expected at least one name",
                    ));
                }
                while line.peek().is_some() {
                    let (name, tok) = line.identifier(&format!("a {class} name"))?;
                    if let Some(prev) = self.policy.class_of(&name) {
                        return Err(line.error(
                            tok,
                            SourceErrorKind::DuplicateDeclaration,
                            format!("`{name}` is already declared as a {prev}"),
                        ));
                    }
                    match class {
                        Class::User => self.policy.users.insert(name),
                        Class::Role => self.policy.roles.insert(name),
                        Class::Record => self.policy.records.insert(name),
                    };
                }
            }
            "assign" if policy_ok => {
                let u = self.name(&mut line, Class::User)?;
                let r = self.name(&mut line, Class::Role)?;
                line.finish()?;
                self.policy.assignments.insert((u, r));
            }
            "implies" if policy_ok => {
                let a = self.name(&mut line, Class::Role)?;
                let b_tok = line.peek();
                let b = self.name(&mut line, Class::Role)?;
                if a == b {
                    let tok = b_tok.expect("name was read");
                    return Err(line.error(
                        tok,
                        SourceErrorKind::SelfImplication,
                        format!("role `{a}` implies itself"),
                    ));
                }
                line.finish()?;
                self.policy.implications.insert((a, b));
            }
            "permit" if policy_ok => {
                let r = self.name(&mut line, Class::Role)?;
                let o = self.name(&mut line, Class::Record)?;
                line.finish()?;
                self.policy.permissions.insert((r, o));
            }
            kw if constraints_ok => {
                let parsed = self.constraint(kw, head, &mut line)?;
                line.finish()?;
                self.constraints.extend(parsed);
            }
            other => {
                return Err(line.error(
                    head,
                    SourceErrorKind::Syntax,
                    format!("unknown statement `{other}`"),
                ));
            }
        }
        Ok(())
    }

    fn constraint(
        &self,
        kw: &str,
        head: Token<'_>,
        line: &mut Line<'_>,
    ) -> Result<Vec<ConstraintSpec>, SourceError> {
        let one = |c| Ok(vec![c]);
        match kw {
            "prerequisite" => {
                let trigger = self.name(line, Class::Role)?;
                line.keyword("requires")?;
                let required = self.name(line, Class::Role)?;
                one(ConstraintSpec::Prerequisite { trigger, required })
            }
            "sod-roles" => one(ConstraintSpec::SodRoles {
                conflict: self.set(line, Class::Role, 2)?,
            }),
            "role-coverage" => one(ConstraintSpec::RoleCoverage),
            "user-coverage" => one(ConstraintSpec::UserCoverage),
            "record-coverage" => one(ConstraintSpec::RecordCoverage),
            "permission-coverage" => one(ConstraintSpec::PermissionCoverage),
            "access-coverage" => one(ConstraintSpec::AccessCoverage),
            "exclusive" => {
                let trigger = self.set(line, Class::Role, 1)?;
                line.keyword("choose-one-of")?;
                let choices = self.set(line, Class::Role, 2)?;
                one(ConstraintSpec::ExclusiveChoice { trigger, choices })
            }
            "forbid" => {
                let users = self.set(line, Class::User, 1)?;
                line.keyword("from")?;
                let roles = self.set(line, Class::Role, 1)?;
                one(ConstraintSpec::ForbiddenAssignment { users, roles })
            }
            "min-roles" => {
                let record = self.name(line, Class::Record)?;
                let (k, _) = line.threshold("role threshold")?;
                one(ConstraintSpec::MinRolesPerRecord { record, k })
            }
            "unique-role" => one(ConstraintSpec::UniqueRolePerRecord {
                record: self.name(line, Class::Record)?,
            }),
            "unique-roles-all" => Ok(self
                .policy
                .records
                .iter()
                .map(|r| ConstraintSpec::UniqueRolePerRecord { record: r.clone() })
                .collect()),
            "sod-records" => one(ConstraintSpec::SodRecords {
                conflict: self.set(line, Class::Record, 2)?,
            }),
            "min-users" => {
                let record = self.name(line, Class::Record)?;
                let (k, _) = line.threshold("user threshold")?;
                one(ConstraintSpec::MinUsersPerRecord { record, k })
            }
            "diversity" => {
                let record = self.name(line, Class::Record)?;
                let (users, _) = line.threshold("user threshold")?;
                let (roles, tok) = line.threshold("role threshold")?;
                if roles > users {
                    return Err(line.error(
                        tok,
                        SourceErrorKind::BadThreshold,
                        format!("role threshold {roles} exceeds user threshold {users}"),
                    ));
                }
                one(ConstraintSpec::AccessDiversity {
                    record,
                    users,
                    roles,
                })
            }
            other => Err(line.error(
                head,
                SourceErrorKind::UnknownConstraintKeyword,
                format!("unknown constraint `{other}`"),
            )),
        }
    }
}

fn run(mode: Mode, text: &str, policy: Policy) -> Result<Parser, SourceError> {
    let mut parser = Parser {
        mode,
        policy,
        constraints: Vec::new(),
    };
    for (i, raw) in text.lines().enumerate() {
        let line = Line {
            number: i + 1,
            text: raw,
            tokens: tokenize(raw),
            pos: 0,
        };
        parser.line(line)?;
    }
    Ok(parser)
}

/// Parses a policy file. The result satisfies every [`Policy`] invariant.
pub fn parse_policy(text: &str) -> Result<Policy, SourceError> {
    Ok(run(Mode::Policy, text, Policy::default())?.policy)
}

/// Parses a constraint file against an already validated policy.
pub fn parse_constraints(text: &str, policy: &Policy) -> Result<Vec<ConstraintSpec>, SourceError> {
    Ok(run(Mode::Constraints, text, policy.clone())?.constraints)
}

/// Parses a combined file holding policy statements and constraints.
pub fn parse_document(text: &str) -> Result<Document, SourceError> {
    let p = run(Mode::Document, text, Policy::default())?;
    Ok(Document {
        policy: p.policy,
        constraints: p.constraints,
    })
}

fn join(set: &IdSet) -> String {
    set.iter()
        .map(Identifier::as_str)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Canonical one-line rendering of a constraint.
pub fn print_constraint(c: &ConstraintSpec) -> String {
    let kw = c.family().keyword();
    match c {
        ConstraintSpec::Prerequisite { trigger, required } => {
            format!("{kw} {trigger} requires {required}")
        }
        ConstraintSpec::SodRoles { conflict } | ConstraintSpec::SodRecords { conflict } => {
            format!("{kw} {{ {} }}", join(conflict))
        }
        ConstraintSpec::ExclusiveChoice { trigger, choices } => {
            format!(
                "{kw} {{ {} }} choose-one-of {{ {} }}",
                join(trigger),
                join(choices)
            )
        }
        ConstraintSpec::ForbiddenAssignment { users, roles } => {
            format!("{kw} {{ {} }} from {{ {} }}", join(users), join(roles))
        }
        ConstraintSpec::MinRolesPerRecord { record, k }
        | ConstraintSpec::MinUsersPerRecord { record, k } => {
            format!("{kw} {record} {k}")
        }
        ConstraintSpec::UniqueRolePerRecord { record } => format!("{kw} {record}"),
        ConstraintSpec::AccessDiversity {
            record,
            users,
            roles,
        } => format!("{kw} {record} {users} {roles}"),
        ConstraintSpec::RoleCoverage
        | ConstraintSpec::UserCoverage
        | ConstraintSpec::RecordCoverage
        | ConstraintSpec::PermissionCoverage
        | ConstraintSpec::AccessCoverage => kw.to_string(),
    }
}

pub fn print_policy(p: &Policy) -> String {
    let mut out = String::new();
    for (kw, set) in [
        ("users", &p.users),
        ("roles", &p.roles),
        ("records", &p.records),
    ] {
        if !set.is_empty() {
            out.push_str(&format!("{kw} {}\n", join(set)));
        }
    }
    for (kw, rel) in [
        ("assign", &p.assignments),
        ("implies", &p.implications),
        ("permit", &p.permissions),
    ] {
        for (a, b) in rel {
            out.push_str(&format!("{kw} {a} {b}\n"));
        }
    }
    out
}

pub fn print_constraints(cs: &[ConstraintSpec]) -> String {
    cs.iter().map(|c| print_constraint(c) + "\n").collect()
}

/// Deterministic rendering that [`parse_document`] maps back to `d`.
pub fn print_canonical(d: &Document) -> String {
    format!(
        "# policy\n{}# constraints\n{}",
        print_policy(&d.policy),
        print_constraints(&d.constraints)
    )
}

/// Keyword list in catalogue order, for help output.
pub fn constraint_keywords() -> impl Iterator<Item = &'static str> {
    Family::ALL
        .iter()
        .map(|f| f.keyword())
        .chain(std::iter::once("unique-roles-all"))
}
