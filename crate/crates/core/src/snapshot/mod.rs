//! Snapshot data model: the canonical in-memory form of a registry
//! metadata dump, plus name/version/specifier semantics.
//!
//! A loaded [`Snapshot`] is immutable; every analysis module reads it
//! concurrently without locking.

pub mod load;
pub mod name;
pub mod specifier;
pub mod stats;
pub mod version;

use std::collections::{BTreeMap, BTreeSet};

use chrono::NaiveDate;
use serde::Serialize;

pub use load::{load_snapshot, LoadOptions, LoadReport, SkippedRecord};
pub use name::{canonical_name, CanonicalName};
pub use specifier::{version_matches, SpecifierSet};
pub use stats::{ecosystem_stats, YearCounts, YearlyStats};
pub use version::{parse_version, PrePhase, PreRelease, Version};

/// One release of a package: version, publication date and the
/// dependency specifiers declared for it.
#[derive(Debug, Clone, Serialize)]
pub struct ReleaseRecord {
    pub version: Version,
    pub date: NaiveDate,
    /// Canonicalized dependency targets; free of duplicates and
    /// self-references.
    pub requires: Vec<(CanonicalName, SpecifierSet)>,
}

/// One registry project.
#[derive(Debug, Clone, Serialize)]
pub struct PackageRecord {
    pub name: CanonicalName,
    /// Lowercased maintainer email addresses.
    pub maintainers: BTreeSet<String>,
    /// The raw free-text license field.
    pub license_text: String,
    /// Free-text project description, when the metadata carries one.
    pub description: String,
    /// Sorted ascending by date, ties broken by version order.
    pub releases: Vec<ReleaseRecord>,
    pub downloads: Option<u64>,
    pub classifiers: Vec<String>,
}

impl PackageRecord {
    /// A record with the given name and no other metadata.
    pub fn new(name: CanonicalName) -> Self {
        PackageRecord {
            name,
            maintainers: BTreeSet::new(),
            license_text: String::new(),
            description: String::new(),
            releases: Vec::new(),
            downloads: None,
            classifiers: Vec::new(),
        }
    }

    /// Latest release by version order (ties broken by date). The
    /// package's dependency set is read from this release.
    pub fn latest_release(&self) -> Option<&ReleaseRecord> {
        self.releases
            .iter()
            .max_by(|a, b| a.version.cmp(&b.version).then(a.date.cmp(&b.date)))
    }

    pub fn first_release_date(&self) -> Option<NaiveDate> {
        self.releases.first().map(|r| r.date)
    }
}

/// An immutable registry snapshot keyed by canonical name.
#[derive(Debug, Clone, Serialize)]
pub struct Snapshot {
    pub packages: BTreeMap<CanonicalName, PackageRecord>,
    pub snapshot_date: NaiveDate,
}

impl Snapshot {
    pub fn get(&self, name: &str) -> Option<&PackageRecord> {
        self.packages.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.packages.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.packages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packages.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &CanonicalName> {
        self.packages.keys()
    }
}
