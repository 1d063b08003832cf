//! Sorted first-order formulas over the RBAC signature and an exhaustive
//! finite-domain evaluator used as an independent oracle for the
//! constraint checks.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Class, Error};
use crate::ident::Identifier;
use crate::policy::ClosedPolicy;

pub type Sort = Class;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Var(String),
    Const(Identifier),
}

pub fn var(name: &str) -> Term {
    Term::Var(name.to_string())
}

pub fn cst(name: &Identifier) -> Term {
    Term::Const(name.clone())
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    False,
    /// `(user, role)` over the closed assignments.
    HasRole(Term, Term),
    /// `(role, record)`
    Permission(Term, Term),
    /// `(user, record)`
    HasAccess(Term, Term),
    Eq(Term, Term),
    /// Membership in a finite set of declared constants.
    Member(Term, BTreeSet<Identifier>),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Forall(String, Sort, Box<Formula>),
    Exists(String, Sort, Box<Formula>),
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn neq(a: Term, b: Term) -> Formula {
        Formula::not(Formula::Eq(a, b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn forall(v: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Forall(v.to_string(), sort, Box::new(body))
    }

    pub fn exists(v: &str, sort: Sort, body: Formula) -> Formula {
        Formula::Exists(v.to_string(), sort, Box::new(body))
    }

    /// Nests `exists` over `vars` in order, outermost first.
    pub fn exists_all(vars: &[(String, Sort)], body: Formula) -> Formula {
        vars.iter().rev().fold(body, |acc, (v, s)| {
            Formula::Exists(v.clone(), *s, Box::new(acc))
        })
    }
}

/// A satisfying assignment of the outermost existential block, in binding
/// order.
pub type Binding = Vec<(String, Identifier)>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub truth: bool,
    /// All satisfying bindings of the outermost existential block; empty
    /// unless the formula starts with `exists`.
    pub witnesses: Vec<Binding>,
}

/// Truth value only; skips witness enumeration.
pub fn oracle_truth(p: &ClosedPolicy, f: &Formula) -> Result<bool, Error> {
    let model = Model::new(p);
    let compiled = Compiler::new(&model).compile_closed(f)?;
    let mut env = vec![0; compiled.slots];
    Ok(model.eval(&compiled.root, &mut env))
}

/// The policy as dense boolean matrices over sorted universes.
struct Model {
    universe: [Vec<Identifier>; 3],
    position: BTreeMap<Identifier, (Sort, usize)>,
    has_role: Vec<Vec<bool>>,
    permission: Vec<Vec<bool>>,
    has_access: Vec<Vec<bool>>,
}

fn sort_index(s: Sort) -> usize {
    match s {
        Class::User => 0,
        Class::Role => 1,
        Class::Record => 2,
    }
}

impl Model {
    fn new(p: &ClosedPolicy) -> Self {
        let base = p.base();
        let universe = [
            base.users.iter().cloned().collect::<Vec<_>>(),
            base.roles.iter().cloned().collect::<Vec<_>>(),
            base.records.iter().cloned().collect::<Vec<_>>(),
        ];
        let mut position = BTreeMap::new();
        for (s, sort) in [Class::User, Class::Role, Class::Record]
            .into_iter()
            .enumerate()
        {
            for (i, name) in universe[s].iter().enumerate() {
                position.insert(name.clone(), (sort, i));
            }
        }
        let matrix = |a: usize, b: usize, pairs: &BTreeSet<(Identifier, Identifier)>| {
            let mut m = vec![vec![false; universe[b].len()]; universe[a].len()];
            for (x, y) in pairs {
                if let (Some(&(_, i)), Some(&(_, j))) = (position.get(x), position.get(y)) {
                    m[i][j] = true;
                }
            }
            m
        };
        let has_role = matrix(0, 1, p.closed_assignments());
        let permission = matrix(1, 2, &base.permissions);
        let has_access = matrix(0, 2, p.access());
        Model {
            universe,
            position,
            has_role,
            permission,
            has_access,
        }
    }

    fn size(&self, s: Sort) -> usize {
        self.universe[sort_index(s)].len()
    }

    fn value(&self, t: &CTerm, env: &[usize]) -> usize {
        match *t {
            CTerm::Slot(i) => env[i],
            CTerm::Const(v) => v,
        }
    }

    fn eval(&self, n: &Node, env: &mut Vec<usize>) -> bool {
        match n {
            Node::Const(b) => *b,
            Node::HasRole(a, b) => self.has_role[self.value(a, env)][self.value(b, env)],
            Node::Permission(a, b) => self.permission[self.value(a, env)][self.value(b, env)],
            Node::HasAccess(a, b) => self.has_access[self.value(a, env)][self.value(b, env)],
            Node::Eq(a, b) => self.value(a, env) == self.value(b, env),
            Node::Member(t, mask) => mask[self.value(t, env)],
            Node::Not(f) => !self.eval(f, env),
            Node::And(fs) => fs.iter().all(|f| self.eval(f, env)),
            Node::Or(fs) => fs.iter().any(|f| self.eval(f, env)),
            Node::Implies(a, b) => !self.eval(a, env) || self.eval(b, env),
            Node::Iff(a, b) => self.eval(a, env) == self.eval(b, env),
            Node::Block {
                exists,
                vars,
                conjuncts,
            } => {
                if *exists {
                    self.exists_block(vars, conjuncts, 0, env)
                } else {
                    let (slot, sort) = vars[0];
                    (0..self.size(sort)).all(|v| {
                        env[slot] = v;
                        self.eval(&conjuncts[0].1, env)
                    })
                }
            }
        }
    }

    /// Binds `vars[depth..]` one at a time; each conjunct is tested as soon
    /// as every variable it mentions is bound.
    fn exists_block(
        &self,
        vars: &[(usize, Sort)],
        conjuncts: &[(usize, Node)],
        depth: usize,
        env: &mut Vec<usize>,
    ) -> bool {
        if !self.ready_conjuncts_hold(conjuncts, depth, env) {
            return false;
        }
        if depth == vars.len() {
            return true;
        }
        let (slot, sort) = vars[depth];
        for v in 0..self.size(sort) {
            env[slot] = v;
            if self.exists_block(vars, conjuncts, depth + 1, env) {
                return true;
            }
        }
        false
    }

    fn ready_conjuncts_hold(
        &self,
        conjuncts: &[(usize, Node)],
        depth: usize,
        env: &mut Vec<usize>,
    ) -> bool {
        conjuncts
            .iter()
            .filter(|(d, _)| *d == depth)
            .all(|(_, c)| self.eval(c, env))
    }

    fn collect_bindings(
        &self,
        vars: &[(usize, Sort)],
        conjuncts: &[(usize, Node)],
        depth: usize,
        env: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if !self.ready_conjuncts_hold(conjuncts, depth, env) {
            return;
        }
        if depth == vars.len() {
            out.push(vars.iter().map(|&(slot, _)| env[slot]).collect());
            return;
        }
        let (slot, sort) = vars[depth];
        for v in 0..self.size(sort) {
            env[slot] = v;
            self.collect_bindings(vars, conjuncts, depth + 1, env, out);
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum CTerm {
    Slot(usize),
    Const(usize),
}

#[derive(Debug)]
enum Node {
    Const(bool),
    HasRole(CTerm, CTerm),
    Permission(CTerm, CTerm),
    HasAccess(CTerm, CTerm),
    Eq(CTerm, CTerm),
    Member(CTerm, Vec<bool>),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
    Implies(Box<Node>, Box<Node>),
    Iff(Box<Node>, Box<Node>),
    /// A run of same-kind quantifiers. For `exists`, the body is split into
    /// conjuncts tagged with the block depth at which they become closed.
    /// A `forall` block always has a single variable and one conjunct.
    Block {
        exists: bool,
        vars: Vec<(usize, Sort)>,
        conjuncts: Vec<(usize, Node)>,
    },
}

struct Compiled {
    root: Node,
    slots: usize,
}

struct Compiler<'m> {
    model: &'m Model,
    scope: Vec<(String, usize, Sort)>,
    bound: BTreeSet<String>,
    slots: usize,
}

fn ill(msg: String) -> Error {
    Error::IllSortedFormula(msg)
}

impl<'m> Compiler<'m> {
    fn new(model: &'m Model) -> Self {
        Compiler {
            model,
            scope: Vec::new(),
            bound: BTreeSet::new(),
            slots: 0,
        }
    }

    fn compile_closed(mut self, f: &Formula) -> Result<Compiled, Error> {
        let root = self.compile(f)?;
        Ok(Compiled {
            root,
            slots: self.slots,
        })
    }

    fn term(&self, t: &Term) -> Result<(CTerm, Sort), Error> {
        match t {
            Term::Var(v) => self
                .scope
                .iter()
                .rev()
                .find(|(name, _, _)| name == v)
                .map(|&(_, slot, sort)| (CTerm::Slot(slot), sort))
                .ok_or_else(|| ill(format!("free variable `{v}`"))),
            Term::Const(c) => self
                .model
                .position
                .get(c)
                .map(|&(sort, i)| (CTerm::Const(i), sort))
                .ok_or_else(|| ill(format!("undeclared constant `{c}`"))),
        }
    }

    fn sorted(&self, t: &Term, want: Sort, atom: &str) -> Result<CTerm, Error> {
        let (ct, got) = self.term(t)?;
        if got == want {
            Ok(ct)
        } else {
            Err(ill(format!(
                "{atom}: expected a {want} term, found {got} term {t:?}"
            )))
        }
    }

    fn compile(&mut self, f: &Formula) -> Result<Node, Error> {
        Ok(match f {
            Formula::True => Node::Const(true),
            Formula::False => Node::Const(false),
            Formula::HasRole(a, b) => Node::HasRole(
                self.sorted(a, Class::User, "HasRole")?,
                self.sorted(b, Class::Role, "HasRole")?,
            ),
            Formula::Permission(a, b) => Node::Permission(
                self.sorted(a, Class::Role, "Permission")?,
                self.sorted(b, Class::Record, "Permission")?,
            ),
            Formula::HasAccess(a, b) => Node::HasAccess(
                self.sorted(a, Class::User, "HasAccess")?,
                self.sorted(b, Class::Record, "HasAccess")?,
            ),
            Formula::Eq(a, b) => {
                let (ca, sa) = self.term(a)?;
                let (cb, sb) = self.term(b)?;
                if sa != sb {
                    return Err(ill(format!("equality between {sa} and {sb} terms")));
                }
                Node::Eq(ca, cb)
            }
            Formula::Member(t, set) => {
                let (ct, sort) = self.term(t)?;
                let mut mask = vec![false; self.model.size(sort)];
                for name in set {
                    match self.model.position.get(name) {
                        Some(&(s, i)) if s == sort => mask[i] = true,
                        _ => return Err(ill(format!("`{name}` is not a declared {sort}"))),
                    }
                }
                Node::Member(ct, mask)
            }
            Formula::Not(g) => Node::Not(Box::new(self.compile(g)?)),
            Formula::And(gs) => Node::And(
                gs.iter()
                    .map(|g| self.compile(g))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Or(gs) => Node::Or(
                gs.iter()
                    .map(|g| self.compile(g))
                    .collect::<Result<_, _>>()?,
            ),
            Formula::Implies(a, b) => {
                Node::Implies(Box::new(self.compile(a)?), Box::new(self.compile(b)?))
            }
            Formula::Iff(a, b) => Node::Iff(Box::new(self.compile(a)?), Box::new(self.compile(b)?)),
            Formula::Forall(v, sort, body) => {
                let slot = self.bind(v, *sort)?;
                let body = self.compile(body)?;
                self.scope.pop();
                Node::Block {
                    exists: false,
                    vars: vec![(slot, *sort)],
                    conjuncts: vec![(1, body)],
                }
            }
            Formula::Exists(..) => self.exists_block(f)?,
        })
    }

    fn bind(&mut self, v: &str, sort: Sort) -> Result<usize, Error> {
        if !self.bound.insert(v.to_string()) {
            return Err(ill(format!("variable `{v}` is bound more than once")));
        }
        let slot = self.slots;
        self.slots += 1;
        self.scope.push((v.to_string(), slot, sort));
        Ok(slot)
    }

    fn exists_block(&mut self, f: &Formula) -> Result<Node, Error> {
        let mut vars = Vec::new();
        let mut body = f;
        while let Formula::Exists(v, sort, inner) = body {
            vars.push((self.bind(v, *sort)?, *sort));
            body = inner;
        }
        let parts: Vec<&Formula> = match body {
            Formula::And(gs) => gs.iter().collect(),
            other => vec![other],
        };
        let mut conjuncts = Vec::with_capacity(parts.len());
        for part in parts {
            let node = self.compile(part)?;
            let mut used = BTreeSet::new();
            slots_used(&node, &mut used);
            let depth = vars
                .iter()
                .rposition(|(slot, _)| used.contains(slot))
                .map_or(0, |i| i + 1);
            conjuncts.push((depth, node));
        }
        for _ in &vars {
            self.scope.pop();
        }
        Ok(Node::Block {
            exists: true,
            vars,
            conjuncts,
        })
    }
}

fn slots_used(n: &Node, out: &mut BTreeSet<usize>) {
    let term = |t: &CTerm, out: &mut BTreeSet<usize>| {
        if let CTerm::Slot(s) = t {
            out.insert(*s);
        }
    };
    match n {
        Node::Const(_) => {}
        Node::HasRole(a, b) | Node::Permission(a, b) | Node::HasAccess(a, b) | Node::Eq(a, b) => {
            term(a, out);
            term(b, out);
        }
        Node::Member(t, _) => term(t, out),
        Node::Not(g) => slots_used(g, out),
        Node::And(gs) | Node::Or(gs) => gs.iter().for_each(|g| slots_used(g, out)),
        Node::Implies(a, b) | Node::Iff(a, b) => {
            slots_used(a, out);
            slots_used(b, out);
        }
        Node::Block { conjuncts, .. } => conjuncts.iter().for_each(|(_, g)| slots_used(g, out)),
    }
}

// Bindings are collected as universe indices and resolved to names here.
impl Model {
    fn name(&self, sort: Sort, i: usize) -> &Identifier {
        &self.universe[sort_index(sort)][i]
    }
}

fn resolve(model: &Model, names: &[(String, Sort)], raw: Vec<Vec<usize>>) -> Vec<Binding> {
    raw.into_iter()
        .map(|vals| {
            names
                .iter()
                .zip(vals)
                .map(|((n, s), v)| (n.clone(), model.name(*s, v).clone()))
                .collect()
        })
        .collect()
}

/// Tarskian evaluation of a closed, well-sorted formula over the finite
/// sorts of `p`.
pub fn oracle_eval(p: &ClosedPolicy, f: &Formula) -> Result<OracleVerdict, Error> {
    let model = Model::new(p);
    let compiled = Compiler::new(&model).compile_closed(f)?;
    let mut env = vec![0; compiled.slots];
    let truth = model.eval(&compiled.root, &mut env);
    let mut names = Vec::new();
    let mut g = f;
    while let Formula::Exists(v, s, inner) = g {
        names.push((v.clone(), *s));
        g = inner;
    }
    let witnesses = match &compiled.root {
        Node::Block {
            exists: true,
            vars,
            conjuncts,
        } => {
            let mut raw = Vec::new();
            model.collect_bindings(vars, conjuncts, 0, &mut env, &mut raw);
            resolve(&model, &names, raw)
        }
        _ => Vec::new(),
    };
    Ok(OracleVerdict { truth, witnesses })
}
