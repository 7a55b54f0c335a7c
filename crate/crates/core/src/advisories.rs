//! Vulnerability advisories joined against the snapshot.
//!
//! The advisory file is newline-delimited JSON:
//!
//! ```json
//! {"id": "SAFE-2016-01", "package": "Django", "affected": "<1.8.10",
//!  "cves": ["CVE-2016-0001"], "severity": 7.5,
//!  "published": "2016-02-01", "fixed": "2016-03-01"}
//! ```
//!
//! On top of the join sit exposure sets (who can be hit through the
//! dependency graph), patch lag (how long dependents took to release
//! after a fix) and per-package vulnerability timelines.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::depgraph::DepGraph;
use crate::error::AuditError;
use crate::snapshot::{canonical_name, CanonicalName, SkippedRecord, Snapshot, SpecifierSet, Version};

#[derive(Debug, Clone, Serialize)]
pub struct Advisory {
    pub id: String,
    pub package: CanonicalName,
    pub affected: SpecifierSet,
    pub cves: Vec<String>,
    /// CVSS-style score in [0, 10].
    pub severity: Option<f64>,
    pub published: NaiveDate,
    pub fixed: Option<NaiveDate>,
}

/// Advisories plus load diagnostics.
#[derive(Debug, Clone, Default, Serialize)]
pub struct AdvisorySet {
    pub advisories: Vec<Advisory>,
    pub skipped: Vec<SkippedRecord>,
    /// Ids of advisories whose package is not in the snapshot; they stay
    /// in `advisories` but graph lookups on them will fail.
    pub unknown_packages: Vec<String>,
}

impl AdvisorySet {
    pub fn for_package<'a>(&'a self, package: &'a str) -> impl Iterator<Item = &'a Advisory> {
        self.advisories
            .iter()
            .filter(move |a| a.package.as_str() == package)
    }
}

#[derive(Deserialize)]
struct RawAdvisory {
    id: String,
    package: String,
    #[serde(default)]
    affected: String,
    #[serde(default)]
    cves: Vec<String>,
    #[serde(default)]
    severity: Option<f64>,
    published: NaiveDate,
    #[serde(default)]
    fixed: Option<NaiveDate>,
}

fn convert(raw: RawAdvisory) -> Result<Advisory, String> {
    let package = canonical_name(&raw.package).map_err(|e| e.to_string())?;
    let affected = SpecifierSet::parse(&raw.affected).map_err(|e| e.to_string())?;
    if let Some(s) = raw.severity {
        if !(0.0..=10.0).contains(&s) {
            return Err(format!("severity {s} outside [0, 10]"));
        }
    }
    if let Some(fixed) = raw.fixed {
        if fixed < raw.published {
            return Err(format!(
                "fixed date {fixed} precedes published date {}",
                raw.published
            ));
        }
    }
    Ok(Advisory {
        id: raw.id,
        package,
        affected,
        cves: raw.cves,
        severity: raw.severity,
        published: raw.published,
        fixed: raw.fixed,
    })
}

/// Load an advisory file. Malformed records are skipped and reported
/// (or abort the load when `strict`); advisories naming packages absent
/// from the snapshot are retained and flagged.
pub fn load_advisories(
    path: impl AsRef<Path>,
    snapshot: &Snapshot,
    strict: bool,
) -> Result<AdvisorySet, AuditError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AuditError::io(path, e))?;
    let reader = BufReader::new(file);

    let mut set = AdvisorySet::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| AuditError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str::<RawAdvisory>(&line)
            .map_err(|e| e.to_string())
            .and_then(convert);
        match parsed {
            Ok(advisory) => {
                if !snapshot.contains(advisory.package.as_str()) {
                    set.unknown_packages.push(advisory.id.clone());
                }
                set.advisories.push(advisory);
            }
            Err(reason) => {
                if strict {
                    return Err(AuditError::MalformedRecord {
                        path: path.to_path_buf(),
                        line: line_no,
                        reason,
                    });
                }
                set.skipped.push(SkippedRecord {
                    line: line_no,
                    reason,
                });
            }
        }
    }
    Ok(set)
}

/// Releases of the advisory's package whose version is in the affected
/// range.
pub fn affected_releases(
    snapshot: &Snapshot,
    advisory: &Advisory,
) -> Result<Vec<(Version, NaiveDate)>, AuditError> {
    let record = snapshot
        .get(advisory.package.as_str())
        .ok_or_else(|| AuditError::UnknownPackage(advisory.package.to_string()))?;
    Ok(record
        .releases
        .iter()
        .filter(|r| advisory.affected.matches(&r.version))
        .map(|r| (r.version.clone(), r.date))
        .collect())
}

/// Packages reachable from a vulnerable package through reverse
/// dependencies: everything the advisory can hit.
#[derive(Debug, Clone, Serialize)]
pub struct ExposureRecord {
    pub advisory: String,
    pub depth: Option<usize>,
    pub exposed: BTreeSet<CanonicalName>,
}

pub fn exposure_set(
    graph: &DepGraph,
    advisory: &Advisory,
    depth: Option<usize>,
) -> Result<ExposureRecord, AuditError> {
    let reach = graph.package_reach(advisory.package.as_str(), depth)?;
    Ok(ExposureRecord {
        advisory: advisory.id.clone(),
        depth,
        exposed: reach.members,
    })
}

/// Group an exposure set by maintainer email domain: distinct exposed
/// packages per domain (a package with maintainers in several domains
/// counts toward each).
pub fn exposure_by_domain(
    snapshot: &Snapshot,
    exposure: &ExposureRecord,
) -> BTreeMap<String, u64> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for name in &exposure.exposed {
        let Some(record) = snapshot.get(name.as_str()) else {
            continue;
        };
        let domains: BTreeSet<&str> = record
            .maintainers
            .iter()
            .filter_map(|email| email.rsplit_once('@').map(|(_, d)| d))
            .collect();
        for domain in domains {
            *counts.entry(domain.to_owned()).or_default() += 1;
        }
    }
    counts
}

/// Days from the advisory's fix to the dependent's first release strictly
/// after it; `None` while the dependent has not released since the fix.
///
/// A release on the fix date itself does not count. Only direct
/// dependents (by their latest release) qualify.
pub fn patch_lag(
    snapshot: &Snapshot,
    advisory: &Advisory,
    dependent: &str,
) -> Result<Option<u64>, AuditError> {
    let record = snapshot
        .get(dependent)
        .ok_or_else(|| AuditError::UnknownPackage(dependent.to_owned()))?;
    let depends = record
        .latest_release()
        .map(|r| r.requires.iter().any(|(t, _)| *t == advisory.package))
        .unwrap_or(false);
    if !depends {
        return Err(AuditError::NotADependent {
            dependent: dependent.to_owned(),
            package: advisory.package.to_string(),
        });
    }
    let fixed = advisory
        .fixed
        .ok_or_else(|| AuditError::NoFixDate(advisory.id.clone()))?;
    Ok(record
        .releases
        .iter()
        .map(|r| r.date)
        .filter(|d| *d > fixed)
        .min()
        .map(|d| (d - fixed).num_days() as u64))
}

/// Patch-lag aggregate over every direct dependent of the advisory's
/// package. Unpatched dependents are excluded from the mean and counted
/// separately.
#[derive(Debug, Clone, Serialize)]
pub struct PatchLagSummary {
    pub advisory: String,
    pub per_dependent: BTreeMap<CanonicalName, Option<u64>>,
    pub mean_days: Option<f64>,
    pub patched: u64,
    pub unpatched: u64,
}

pub fn mean_patch_lag(
    snapshot: &Snapshot,
    graph: &DepGraph,
    advisory: &Advisory,
) -> Result<PatchLagSummary, AuditError> {
    if advisory.fixed.is_none() {
        return Err(AuditError::NoFixDate(advisory.id.clone()));
    }
    let mut summary = PatchLagSummary {
        advisory: advisory.id.clone(),
        per_dependent: BTreeMap::new(),
        mean_days: None,
        patched: 0,
        unpatched: 0,
    };
    for dependent in graph.dependents_of(advisory.package.as_str())? {
        let lag = patch_lag(snapshot, advisory, dependent.as_str())?;
        match lag {
            Some(_) => summary.patched += 1,
            None => summary.unpatched += 1,
        }
        summary.per_dependent.insert(dependent.clone(), lag);
    }
    if summary.patched > 0 {
        let total: u64 = summary.per_dependent.values().flatten().sum();
        summary.mean_days = Some(total as f64 / summary.patched as f64);
    }
    Ok(summary)
}

/// One row per advisory on a package: how long the attack window stayed
/// (or has stayed) open.
#[derive(Debug, Clone, Serialize)]
pub struct TimelineRow {
    pub advisory: String,
    pub published: NaiveDate,
    pub fixed: Option<NaiveDate>,
    pub severity: Option<f64>,
    /// `fixed - published` when fixed, else `snapshot_date - published`.
    pub open_window_days: i64,
}

pub fn vulnerability_timeline(
    snapshot: &Snapshot,
    advisories: &[Advisory],
    package: &str,
) -> Result<Vec<TimelineRow>, AuditError> {
    if !snapshot.contains(package) {
        return Err(AuditError::UnknownPackage(package.to_owned()));
    }
    let mut rows: Vec<TimelineRow> = advisories
        .iter()
        .filter(|a| a.package.as_str() == package)
        .map(|a| TimelineRow {
            advisory: a.id.clone(),
            published: a.published,
            fixed: a.fixed,
            severity: a.severity,
            open_window_days: match a.fixed {
                Some(fixed) => (fixed - a.published).num_days(),
                None => (snapshot.snapshot_date - a.published).num_days(),
            },
        })
        .collect();
    rows.sort_by(|a, b| (a.published, &a.advisory).cmp(&(b.published, &b.advisory)));
    Ok(rows)
}
