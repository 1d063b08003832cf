//! Aggregated verification report, rendered as text or serialized as JSON.

use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::constraint::{Status, VerificationResult};
use crate::dsl::print_constraint;
use crate::policy::ClosedPolicy;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub users: usize,
    pub roles: usize,
    pub records: usize,
    pub assignments: usize,
    pub implications: usize,
    pub permissions: usize,
    pub closed_assignments: usize,
    pub access_pairs: usize,
}

impl PolicySummary {
    pub fn of(p: &ClosedPolicy) -> Self {
        let b = p.base();
        PolicySummary {
            users: b.users.len(),
            roles: b.roles.len(),
            records: b.records.len(),
            assignments: b.assignments.len(),
            implications: b.implications.len(),
            permissions: b.permissions.len(),
            closed_assignments: p.closed_assignments().len(),
            access_pairs: p.access().len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub policy_summary: PolicySummary,
    /// In constraint-file order.
    pub results: Vec<VerificationResult>,
    pub overall: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<u64>,
}

impl Report {
    pub fn new(
        p: &ClosedPolicy,
        results: Vec<VerificationResult>,
        elapsed_ms: Option<u64>,
    ) -> Self {
        let overall = if results.iter().all(VerificationResult::is_satisfied) {
            Status::Satisfied
        } else {
            Status::Violated
        };
        Report {
            policy_summary: PolicySummary::of(p),
            results,
            overall,
            elapsed_ms,
        }
    }

    /// Keeps at most `limit` witnesses per result. `violation_count` is
    /// left untouched so truncation stays visible.
    pub fn truncate_witnesses(&mut self, limit: usize) {
        for r in &mut self.results {
            r.witnesses.truncate(limit);
        }
    }

    pub fn violated(&self) -> usize {
        self.results.iter().filter(|r| !r.is_satisfied()).count()
    }

    pub fn render_text(&self) -> String {
        let s = &self.policy_summary;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "policy: {} users, {} roles, {} records, {} assignments ({} after closure), {} implications, {} permissions, {} access pairs",
            s.users, s.roles, s.records, s.assignments, s.closed_assignments, s.implications, s.permissions, s.access_pairs
        );
        for r in &self.results {
            let tag = match r.status {
                Status::Satisfied => "[ok]  ",
                Status::Violated => "[FAIL]",
            };
            let _ = writeln!(
                out,
                "{tag} C{} {} ({})",
                r.constraint.family().number(),
                print_constraint(&r.constraint),
                crate::constraint::describe(&r.constraint)
            );
            let _ = writeln!(out, "       {}", r.explanation);
            for w in &r.witnesses {
                let names: Vec<&str> = w.iter().map(|i| i.as_str()).collect();
                let _ = writeln!(out, "       witness: ({})", names.join(", "));
            }
            if r.violation_count > r.witnesses.len() {
                let _ = writeln!(
                    out,
                    "       ... {} violating tuple(s) in total",
                    r.violation_count
                );
            }
        }
        let _ = writeln!(
            out,
            "overall: {} ({} of {} constraint(s) violated)",
            self.overall,
            self.violated(),
            self.results.len()
        );
        if let Some(ms) = self.elapsed_ms {
            let _ = writeln!(out, "elapsed: {ms} ms");
        }
        out
    }
}
