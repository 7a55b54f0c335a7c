//! Canonical package names.
//!
//! Registry metadata spells the same project many ways (`Django`,
//! `python__dateutil.x`). All matching in this crate happens on the
//! canonical form: lowercase, with every run of non-alphanumeric
//! characters collapsed to a single hyphen.

use std::fmt;

use serde::Serialize;

use crate::error::AuditError;

/// A normalized package name over `[a-z0-9-]`.
///
/// Values are produced only by [`canonical_name`], so two names compare
/// equal iff they differ at most in case or separator style.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct CanonicalName(String);

impl CanonicalName {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }
}

impl fmt::Display for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for CanonicalName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl AsRef<str> for CanonicalName {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl std::borrow::Borrow<str> for CanonicalName {
    fn borrow(&self) -> &str {
        &self.0
    }
}

/// Normalize a raw package name.
///
/// Lowercases ASCII alphanumerics and treats every other character as a
/// separator; separator runs collapse to one `-` and leading/trailing
/// separators are dropped. Idempotent on its own output.
pub fn canonical_name(raw: &str) -> Result<CanonicalName, AuditError> {
    let mut out = String::with_capacity(raw.len());
    let mut pending_sep = false;
    for ch in raw.trim().chars() {
        if ch.is_ascii_alphanumeric() {
            if pending_sep && !out.is_empty() {
                out.push('-');
            }
            pending_sep = false;
            out.push(ch.to_ascii_lowercase());
        } else {
            pending_sep = true;
        }
    }
    if out.is_empty() {
        return Err(AuditError::EmptyName {
            raw: raw.to_owned(),
        });
    }
    Ok(CanonicalName(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn canon(raw: &str) -> String {
        canonical_name(raw).unwrap().into_string()
    }

    #[test]
    fn folds_case() {
        assert_eq!(canon("Django"), "django");
    }

    #[test]
    fn collapses_separator_runs() {
        assert_eq!(canon("python__dateutil.x"), "python-dateutil-x");
    }

    #[test]
    fn fixed_point_on_canonical_input() {
        assert_eq!(canon("aws-cli"), "aws-cli");
    }

    #[test]
    fn trims_edge_separators() {
        assert_eq!(canon("--weird-name--"), "weird-name");
        assert_eq!(canon("  spaced out  "), "spaced-out");
    }

    #[test]
    fn rejects_empty() {
        assert!(matches!(
            canonical_name("  -._-  "),
            Err(AuditError::EmptyName { .. })
        ));
        assert!(matches!(canonical_name(""), Err(AuditError::EmptyName { .. })));
    }

    #[test]
    fn idempotent() {
        for raw in ["JelIyfish", "a.b_c-d", "X__Y"] {
            let once = canon(raw);
            assert_eq!(canon(&once), once);
        }
    }
}
