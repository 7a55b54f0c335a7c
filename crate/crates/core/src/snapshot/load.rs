//! Snapshot file ingestion.
//!
//! The on-disk format is newline-delimited JSON, one object per package:
//!
//! ```json
//! {"name": "Django", "maintainers": ["team@djangoproject.com"],
//!  "license": "BSD", "downloads": 2000000, "classifiers": [],
//!  "releases": [{"version": "1.8.9", "date": "2016-02-01",
//!                "requires": ["pytz>=2015.0"]}]}
//! ```
//!
//! Each `requires` entry is `NAME` or `NAME<cmp>VERSION[,<cmp>VERSION...]`;
//! extras (`[...]` after the name) and environment markers (anything after
//! `;`) are stripped before parsing.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::AuditError;
use crate::snapshot::name::{canonical_name, CanonicalName};
use crate::snapshot::specifier::SpecifierSet;
use crate::snapshot::version::parse_version;
use crate::snapshot::{PackageRecord, ReleaseRecord, Snapshot};

#[derive(Debug, Clone, Default)]
pub struct LoadOptions {
    /// Abort on the first invalid or duplicate record instead of
    /// skipping it.
    pub strict: bool,
    /// Override the derived snapshot date (defaults to the latest
    /// release date seen).
    pub snapshot_date: Option<NaiveDate>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SkippedRecord {
    pub line: usize,
    pub reason: String,
}

/// What the loader accepted, skipped and could not resolve.
#[derive(Debug, Clone, Default, Serialize)]
pub struct LoadReport {
    pub records: usize,
    pub loaded: usize,
    pub skipped: Vec<SkippedRecord>,
    /// Dependency targets named by a package's latest release that do not
    /// exist in the snapshot. These stay out of graph adjacency and reach
    /// computations, but dropping them silently would bias the metrics,
    /// so they are surfaced here.
    pub dangling: BTreeMap<CanonicalName, BTreeSet<CanonicalName>>,
}

#[derive(Deserialize)]
struct RawPackage {
    name: String,
    #[serde(default)]
    maintainers: Vec<String>,
    #[serde(default)]
    license: String,
    #[serde(default)]
    description: String,
    #[serde(default)]
    downloads: Option<u64>,
    #[serde(default)]
    classifiers: Vec<String>,
    #[serde(default)]
    releases: Vec<RawRelease>,
}

#[derive(Deserialize)]
struct RawRelease {
    version: String,
    date: NaiveDate,
    #[serde(default)]
    requires: Vec<String>,
}

/// Parse one `requires` entry into a canonical target and specifier set.
pub fn parse_requirement(entry: &str) -> Result<(CanonicalName, SpecifierSet), String> {
    // Environment marker, if any, is everything after ';'.
    let entry = entry.split(';').next().unwrap_or("").trim();
    if entry.is_empty() {
        return Err("empty requirement".to_owned());
    }
    let name_end = entry
        .find(|c: char| !(c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_')))
        .unwrap_or(entry.len());
    let (name_part, mut rest) = entry.split_at(name_end);
    let name = canonical_name(name_part).map_err(|e| e.to_string())?;
    rest = rest.trim_start();
    if let Some(after) = rest.strip_prefix('[') {
        match after.find(']') {
            Some(close) => rest = after[close + 1..].trim_start(),
            None => return Err(format!("unterminated extras in {entry:?}")),
        }
    }
    let spec = SpecifierSet::parse(rest).map_err(|e| e.to_string())?;
    Ok((name, spec))
}

fn convert_record(raw: RawPackage) -> Result<PackageRecord, String> {
    let name = canonical_name(&raw.name).map_err(|e| e.to_string())?;
    let maintainers: BTreeSet<String> = raw
        .maintainers
        .iter()
        .map(|m| m.trim().to_lowercase())
        .filter(|m| !m.is_empty())
        .collect();

    let mut releases = Vec::with_capacity(raw.releases.len());
    for rel in raw.releases {
        let version =
            parse_version(&rel.version).map_err(|e| format!("release {}: {e}", rel.version))?;
        let mut requires = Vec::new();
        let mut seen = BTreeSet::new();
        for entry in &rel.requires {
            let (target, spec) =
                parse_requirement(entry).map_err(|e| format!("requirement {entry:?}: {e}"))?;
            if target == name || !seen.insert(target.clone()) {
                continue;
            }
            requires.push((target, spec));
        }
        releases.push(ReleaseRecord {
            version,
            date: rel.date,
            requires,
        });
    }
    releases.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.version.cmp(&b.version)));

    Ok(PackageRecord {
        name,
        maintainers,
        license_text: raw.license,
        description: raw.description,
        releases,
        downloads: raw.downloads,
        classifiers: raw.classifiers,
    })
}

/// Load and validate a snapshot file.
///
/// In the default lenient mode, records failing validation (and
/// duplicates of an already-loaded name) are skipped and reported; with
/// [`LoadOptions::strict`] the first such record aborts the load.
pub fn load_snapshot(
    path: impl AsRef<Path>,
    options: &LoadOptions,
) -> Result<(Snapshot, LoadReport), AuditError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| AuditError::io(path, e))?;
    let reader = BufReader::new(file);

    let mut packages: BTreeMap<CanonicalName, PackageRecord> = BTreeMap::new();
    let mut report = LoadReport::default();
    let mut first_seen_line: BTreeMap<CanonicalName, usize> = BTreeMap::new();

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| AuditError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        report.records += 1;

        let fail = |reason: String, report: &mut LoadReport| -> Result<(), AuditError> {
            if options.strict {
                Err(AuditError::MalformedRecord {
                    path: path.to_path_buf(),
                    line: line_no,
                    reason,
                })
            } else {
                report.skipped.push(SkippedRecord {
                    line: line_no,
                    reason,
                });
                Ok(())
            }
        };

        let raw: RawPackage = match serde_json::from_str(&line) {
            Ok(raw) => raw,
            Err(e) => {
                fail(e.to_string(), &mut report)?;
                continue;
            }
        };
        let record = match convert_record(raw) {
            Ok(record) => record,
            Err(reason) => {
                fail(reason, &mut report)?;
                continue;
            }
        };

        if let Some(&first) = first_seen_line.get(&record.name) {
            if options.strict {
                return Err(AuditError::DuplicatePackage {
                    path: path.to_path_buf(),
                    line: line_no,
                    name: record.name.to_string(),
                });
            }
            report.skipped.push(SkippedRecord {
                line: line_no,
                reason: format!(
                    "duplicate of package {:?} first seen on line {first}",
                    record.name.as_str()
                ),
            });
            continue;
        }
        first_seen_line.insert(record.name.clone(), line_no);
        packages.insert(record.name.clone(), record);
    }

    report.loaded = packages.len();
    for record in packages.values() {
        if let Some(latest) = record.latest_release() {
            for (target, _) in &latest.requires {
                if !packages.contains_key(target) {
                    report
                        .dangling
                        .entry(record.name.clone())
                        .or_default()
                        .insert(target.clone());
                }
            }
        }
    }

    let snapshot_date = options.snapshot_date.unwrap_or_else(|| {
        packages
            .values()
            .flat_map(|p| p.releases.iter().map(|r| r.date))
            .max()
            .unwrap_or(NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date"))
    });

    Ok((
        Snapshot {
            packages,
            snapshot_date,
        },
        report,
    ))
}
