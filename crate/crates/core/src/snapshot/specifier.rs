//! Version specifiers.
//!
//! A specifier set is a conjunction of comparison clauses
//! (`>=2.0,<3.0`). `==` and `!=` additionally accept a wildcard pattern
//! (`==1.8.*`) that tests a release-segment prefix. An empty set matches
//! every version.

use std::fmt;

use serde::Serialize;

use crate::error::AuditError;
use crate::snapshot::version::{parse_version, Version};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    fn as_str(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub enum VersionPattern {
    Exact(Version),
    /// Wildcard release prefix, e.g. `1.8.*` stores `[1, 8]`.
    Prefix(Vec<u64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Clause {
    pub op: CmpOp,
    pub pattern: VersionPattern,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct SpecifierSet {
    clauses: Vec<Clause>,
}

impl SpecifierSet {
    /// The empty conjunction; matches every version.
    pub fn any() -> Self {
        SpecifierSet::default()
    }

    /// Parse a comma-separated clause list. Whitespace around clauses is
    /// ignored; an empty (or all-whitespace) string yields the empty set.
    pub fn parse(text: &str) -> Result<Self, AuditError> {
        let malformed = || AuditError::MalformedSpecifier {
            text: text.to_owned(),
        };
        let mut clauses = Vec::new();
        for raw in text.split(',') {
            let raw = raw.trim();
            if raw.is_empty() {
                if text.trim().is_empty() {
                    continue;
                }
                return Err(malformed());
            }
            let (op, rest) = if let Some(r) = raw.strip_prefix("==") {
                (CmpOp::Eq, r)
            } else if let Some(r) = raw.strip_prefix("!=") {
                (CmpOp::Ne, r)
            } else if let Some(r) = raw.strip_prefix("<=") {
                (CmpOp::Le, r)
            } else if let Some(r) = raw.strip_prefix(">=") {
                (CmpOp::Ge, r)
            } else if let Some(r) = raw.strip_prefix('<') {
                (CmpOp::Lt, r)
            } else if let Some(r) = raw.strip_prefix('>') {
                (CmpOp::Gt, r)
            } else {
                return Err(malformed());
            };
            let rest = rest.trim();
            let pattern = if let Some(prefix) = rest.strip_suffix(".*") {
                if !matches!(op, CmpOp::Eq | CmpOp::Ne) {
                    return Err(malformed());
                }
                let version = parse_version(prefix).map_err(|_| malformed())?;
                if version.pre().is_some() {
                    return Err(malformed());
                }
                VersionPattern::Prefix(version.release().to_vec())
            } else {
                VersionPattern::Exact(parse_version(rest).map_err(|_| malformed())?)
            };
            clauses.push(Clause { op, pattern });
        }
        Ok(SpecifierSet { clauses })
    }

    pub fn is_any(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// True iff every clause holds for `v`.
    pub fn matches(&self, v: &Version) -> bool {
        self.clauses.iter().all(|c| clause_matches(c, v))
    }
}

fn release_starts_with(v: &Version, prefix: &[u64]) -> bool {
    (0..prefix.len()).all(|i| v.release().get(i).copied().unwrap_or(0) == prefix[i])
}

fn clause_matches(clause: &Clause, v: &Version) -> bool {
    match (&clause.pattern, clause.op) {
        (VersionPattern::Prefix(p), CmpOp::Eq) => release_starts_with(v, p),
        (VersionPattern::Prefix(p), CmpOp::Ne) => !release_starts_with(v, p),
        (VersionPattern::Prefix(_), _) => unreachable!("parser rejects ordered wildcards"),
        (VersionPattern::Exact(p), op) => match op {
            CmpOp::Eq => v == p,
            CmpOp::Ne => v != p,
            CmpOp::Lt => v < p,
            CmpOp::Le => v <= p,
            CmpOp::Gt => v > p,
            CmpOp::Ge => v >= p,
        },
    }
}

/// Free-function form of [`SpecifierSet::matches`].
pub fn version_matches(v: &Version, s: &SpecifierSet) -> bool {
    s.matches(v)
}

impl fmt::Display for SpecifierSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for clause in &self.clauses {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            f.write_str(clause.op.as_str())?;
            match &clause.pattern {
                VersionPattern::Exact(v) => write!(f, "{v}")?,
                VersionPattern::Prefix(p) => {
                    for (i, seg) in p.iter().enumerate() {
                        if i > 0 {
                            f.write_str(".")?;
                        }
                        write!(f, "{seg}")?;
                    }
                    f.write_str(".*")?;
                }
            }
        }
        Ok(())
    }
}
