//! Release versions.
//!
//! The grammar is deliberately small: dotted release segments plus an
//! optional `a`/`b`/`rc` pre-release, e.g. `1.8.9`, `2.0rc1`, `v0.3a2`.
//! Epochs, post/dev releases and local versions are rejected; keeping the
//! dialect closed keeps the ordering a provable total order.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::Serialize;

use crate::error::AuditError;

/// Pre-release phase, ordered `a < b < rc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PrePhase {
    A,
    B,
    Rc,
}

impl PrePhase {
    fn as_str(self) -> &'static str {
        match self {
            PrePhase::A => "a",
            PrePhase::B => "b",
            PrePhase::Rc => "rc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct PreRelease {
    pub phase: PrePhase,
    pub number: u64,
}

/// A parsed version. Ordering pads the shorter release with zeros
/// (`1.0 == 1.0.0`) and sorts a pre-release before its final release
/// (`2.0rc1 < 2.0`).
#[derive(Debug, Clone, Serialize)]
pub struct Version {
    release: Vec<u64>,
    pre: Option<PreRelease>,
}

impl Version {
    pub fn new(release: Vec<u64>, pre: Option<PreRelease>) -> Self {
        assert!(!release.is_empty(), "version needs at least one segment");
        Version { release, pre }
    }

    pub fn release(&self) -> &[u64] {
        &self.release
    }

    pub fn pre(&self) -> Option<PreRelease> {
        self.pre
    }

    /// Release segments without trailing zeros (never empty); this is the
    /// form equality and hashing are defined over.
    fn trimmed_release(&self) -> &[u64] {
        let mut len = self.release.len();
        while len > 1 && self.release[len - 1] == 0 {
            len -= 1;
        }
        &self.release[..len]
    }
}

/// Parse a version string: `N(.N)*((a|b|rc)N)?`, optionally prefixed
/// with `v`.
pub fn parse_version(text: &str) -> Result<Version, AuditError> {
    let malformed = || AuditError::MalformedVersion {
        text: text.to_owned(),
    };
    let t = text.trim();
    let t = t.strip_prefix(['v', 'V']).unwrap_or(t);
    let bytes = t.as_bytes();
    let mut pos = 0usize;

    let read_number = |pos: &mut usize| -> Option<u64> {
        let start = *pos;
        let mut value: u64 = 0;
        while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
            value = value
                .checked_mul(10)?
                .checked_add(u64::from(bytes[*pos] - b'0'))?;
            *pos += 1;
        }
        (*pos > start).then_some(value)
    };

    let mut release = Vec::new();
    release.push(read_number(&mut pos).ok_or_else(malformed)?);
    while pos < bytes.len() && bytes[pos] == b'.' {
        pos += 1;
        release.push(read_number(&mut pos).ok_or_else(malformed)?);
    }

    let pre = if pos < bytes.len() {
        let phase = if bytes[pos..].starts_with(b"rc") {
            pos += 2;
            PrePhase::Rc
        } else if bytes[pos] == b'a' {
            pos += 1;
            PrePhase::A
        } else if bytes[pos] == b'b' {
            pos += 1;
            PrePhase::B
        } else {
            return Err(malformed());
        };
        let number = read_number(&mut pos).ok_or_else(malformed)?;
        Some(PreRelease { phase, number })
    } else {
        None
    };

    if pos != bytes.len() {
        return Err(malformed());
    }
    Ok(Version { release, pre })
}

fn cmp_padded(a: &[u64], b: &[u64]) -> Ordering {
    let len = a.len().max(b.len());
    for i in 0..len {
        let x = a.get(i).copied().unwrap_or(0);
        let y = b.get(i).copied().unwrap_or(0);
        match x.cmp(&y) {
            Ordering::Equal => {}
            other => return other,
        }
    }
    Ordering::Equal
}

impl Ord for Version {
    fn cmp(&self, other: &Self) -> Ordering {
        cmp_padded(&self.release, &other.release).then_with(|| {
            match (&self.pre, &other.pre) {
                (None, None) => Ordering::Equal,
                // A pre-release precedes the plain release.
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (Some(a), Some(b)) => a.cmp(b),
            }
        })
    }
}

impl PartialOrd for Version {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Version {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Version {}

impl Hash for Version {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.trimmed_release().hash(state);
        self.pre.hash(state);
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for seg in &self.release {
            if !first {
                f.write_str(".")?;
            }
            write!(f, "{seg}")?;
            first = false;
        }
        if let Some(pre) = &self.pre {
            write!(f, "{}{}", pre.phase.as_str(), pre.number)?;
        }
        Ok(())
    }
}
