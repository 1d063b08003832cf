//! Recognizer for the Prover9 subset this crate emits.
//!
//! Accepts exactly one `formulas(assumptions).` list followed by one
//! `formulas(goals).` list. Statements are period-terminated formulas over
//! `Has_Role/2`, `Permission/2` and `Has_Access/2` using only
//! `- | & -> <-> all exists = !=`. `%` starts a comment.

use std::collections::BTreeSet;

use thiserror::Error;

pub const PREDICATES: [&str; 3] = ["Has_Role", "Permission", "Has_Access"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct GrammarError {
    pub line: usize,
    pub message: String,
}

/// Counts gathered while checking an emitted file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EmissionStats {
    pub assumptions: usize,
    pub goals: usize,
    /// Ground `Has_Role(c,d).` statements.
    pub has_role_positive: usize,
    /// Ground `-Has_Role(c,d).` statements.
    pub has_role_negative: usize,
    pub permission_positive: usize,
    pub permission_negative: usize,
    pub constants: BTreeSet<String>,
    /// Unbound variable tokens in goals (Prover9 closes them universally).
    pub free_goal_variables: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Open,
    Close,
    Comma,
    Period,
    Not,
    Or,
    And,
    Implies,
    Iff,
    Eq,
    Neq,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, GrammarError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let code = raw.split('%').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut k = 0;
        while k < chars.len() {
            let c = chars[k];
            let rest: String = chars[k..chars.len().min(k + 3)].iter().collect();
            let (tok, width) = if c.is_whitespace() {
                k += 1;
                continue;
            } else if c.is_ascii_alphanumeric() || c == '_' || c == '$' {
                let start = k;
                while k < chars.len()
                    && (chars[k].is_ascii_alphanumeric() || chars[k] == '_' || chars[k] == '$')
                {
                    k += 1;
                }
                out.push((Tok::Ident(chars[start..k].iter().collect()), line));
                continue;
            } else if rest.starts_with("<->") {
                (Tok::Iff, 3)
            } else if rest.starts_with("->") {
                (Tok::Implies, 2)
            } else if rest.starts_with("!=") {
                (Tok::Neq, 2)
            } else {
                let t = match c {
                    '(' => Tok::Open,
                    ')' => Tok::Close,
                    ',' => Tok::Comma,
                    '.' => Tok::Period,
                    '-' => Tok::Not,
                    '|' => Tok::Or,
                    '&' => Tok::And,
                    '=' => Tok::Eq,
                    other => {
                        return Err(GrammarError {
                            line,
                            message: format!("unexpected character `{other}`"),
                        });
                    }
                };
                (t, 1)
            };
            out.push((tok, line));
            k += width;
        }
    }
    Ok(out)
}

fn is_variable_name(s: &str) -> bool {
    s.starts_with(|c: char| ('u'..='z').contains(&c))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Assumptions,
    Goals,
}

struct Checker {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    scope: Vec<String>,
    section: Section,
    stats: EmissionStats,
}

impl Checker {
    fn line(&self) -> usize {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map_or(1, |(_, l)| *l)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, GrammarError> {
        Err(GrammarError {
            line: self.line(),
            message: message.into(),
        })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), GrammarError> {
        match self.peek() {
            Some(t) if *t == want => {
                self.pos += 1;
                Ok(())
            }
            other => {
                let found = format!("{other:?}");
                self.err(format!("expected {what}, found {found}"))
            }
        }
    }

    fn word(&mut self, w: &str) -> Result<(), GrammarError> {
        self.expect(Tok::Ident(w.to_string()), &format!("`{w}`"))
    }

    fn file(&mut self) -> Result<(), GrammarError> {
        for (name, section) in [
            ("assumptions", Section::Assumptions),
            ("goals", Section::Goals),
        ] {
            self.section = section;
            self.word("formulas")?;
            self.expect(Tok::Open, "`(`")?;
            self.word(name)?;
            self.expect(Tok::Close, "`)`")?;
            self.expect(Tok::Period, "`.`")?;
            loop {
                if self.peek() == Some(&Tok::Ident("end_of_list".into())) {
                    self.pos += 1;
                    self.expect(Tok::Period, "`.` after end_of_list")?;
                    break;
                }
                if self.peek().is_none() {
                    return self.err("missing end_of_list");
                }
                self.statement()?;
            }
        }
        if self.peek().is_some() {
            return self.err("text after the goals list");
        }
        Ok(())
    }

    fn statement(&mut self) -> Result<(), GrammarError> {
        let start = self.pos;
        self.formula()?;
        self.expect(Tok::Period, "`.` terminating the statement")?;
        match self.section {
            Section::Assumptions => self.stats.assumptions += 1,
            Section::Goals => self.stats.goals += 1,
        }
        if self.section == Section::Assumptions {
            self.count_ground_literal(start);
        }
        Ok(())
    }

    fn count_ground_literal(&mut self, start: usize) {
        let toks: Vec<&Tok> = self.toks[start..self.pos].iter().map(|(t, _)| t).collect();
        let (negated, rest) = match toks.first() {
            Some(Tok::Not) => (true, &toks[1..]),
            _ => (false, &toks[..]),
        };
        let [Tok::Ident(pred), Tok::Open, Tok::Ident(a), Tok::Comma, Tok::Ident(b), Tok::Close, Tok::Period] =
            rest
        else {
            return;
        };
        if is_variable_name(a) || is_variable_name(b) {
            return;
        }
        let counter = match (pred.as_str(), negated) {
            ("Has_Role", false) => &mut self.stats.has_role_positive,
            ("Has_Role", true) => &mut self.stats.has_role_negative,
            ("Permission", false) => &mut self.stats.permission_positive,
            ("Permission", true) => &mut self.stats.permission_negative,
            _ => return,
        };
        *counter += 1;
    }

    fn formula(&mut self) -> Result<(), GrammarError> {
        self.implication()?;
        if self.peek() == Some(&Tok::Iff) {
            self.pos += 1;
            self.implication()?;
        }
        Ok(())
    }

    fn implication(&mut self) -> Result<(), GrammarError> {
        self.disjunction()?;
        if self.peek() == Some(&Tok::Implies) {
            self.pos += 1;
            self.disjunction()?;
        }
        Ok(())
    }

    fn disjunction(&mut self) -> Result<(), GrammarError> {
        self.conjunction()?;
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            self.conjunction()?;
        }
        Ok(())
    }

    fn conjunction(&mut self) -> Result<(), GrammarError> {
        self.unary()?;
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            self.unary()?;
        }
        Ok(())
    }

    fn unary(&mut self) -> Result<(), GrammarError> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.pos += 1;
                self.unary()
            }
            Some(Tok::Open) => {
                self.pos += 1;
                self.formula()?;
                self.expect(Tok::Close, "`)`")
            }
            Some(Tok::Ident(q)) if q == "all" || q == "exists" => {
                self.pos += 1;
                let Some(Tok::Ident(v)) = self.bump() else {
                    return self.err(format!("expected a variable after `{q}`"));
                };
                if PREDICATES.contains(&v.as_str()) || v == "all" || v == "exists" {
                    return self.err(format!("`{v}` cannot be bound"));
                }
                self.scope.push(v);
                let body = self.unary();
                self.scope.pop();
                body
            }
            Some(Tok::Ident(_)) => self.atom(),
            other => self.err(format!("expected a formula, found {other:?}")),
        }
    }

    fn atom(&mut self) -> Result<(), GrammarError> {
        let Some(Tok::Ident(head)) = self.bump() else {
            unreachable!()
        };
        if PREDICATES.contains(&head.as_str()) {
            self.expect(Tok::Open, "`(`")?;
            self.term()?;
            self.expect(Tok::Comma, "`,`")?;
            self.term()?;
            return self.expect(Tok::Close, "`)`");
        }
        self.pos -= 1;
        self.term()?;
        match self.bump() {
            Some(Tok::Eq) | Some(Tok::Neq) => self.term(),
            other => self.err(format!("expected `=` or `!=`, found {other:?}")),
        }
    }

    fn term(&mut self) -> Result<(), GrammarError> {
        let Some(Tok::Ident(t)) = self.bump() else {
            return self.err("expected a term");
        };
        if PREDICATES.contains(&t.as_str()) || t == "all" || t == "exists" {
            return self.err(format!("`{t}` is not a term"));
        }
        if self.peek() == Some(&Tok::Open) {
            return self.err(format!("unknown function or predicate `{t}`"));
        }
        if self.scope.contains(&t) {
            return Ok(());
        }
        if is_variable_name(&t) {
            if self.section == Section::Assumptions {
                return self.err(format!("`{t}` would be read as a free variable"));
            }
            self.stats.free_goal_variables.insert(t);
        } else {
            self.stats.constants.insert(t);
        }
        Ok(())
    }
}

/// Checks an emitted input file and returns statement and literal counts.
pub fn check_emission(text: &str) -> Result<EmissionStats, GrammarError> {
    let mut c = Checker {
        toks: lex(text)?,
        pos: 0,
        scope: Vec::new(),
        section: Section::Assumptions,
        stats: EmissionStats::default(),
    };
    c.file()?;
    Ok(c.stats)
}
