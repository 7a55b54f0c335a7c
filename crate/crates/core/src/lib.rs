//! Supply-chain risk analysis over package-registry metadata snapshots.
//!
//! The crate takes an offline snapshot of registry metadata (newline-
//! delimited JSON) plus an optional advisory feed, and offers:
//!
//! * [`snapshot`] — ingestion, canonical names, version and specifier
//!   semantics, per-year growth stats;
//! * [`depgraph`] — dependency/ownership graphs and the reach / implicit
//!   trust metrics, including their historical evolution;
//! * [`squat`] — typosquat and impersonation candidate detection with
//!   offensive/defensive classification;
//! * [`license`] — license normalization and direct plus inherited
//!   violation detection;
//! * [`advisories`] — vulnerability exposure, patch lag and timelines;
//! * [`installscan`] — static risk scanning of install scripts.
//!
//! Everything operates on immutable in-memory data and is safe to read
//! from multiple threads.

pub mod advisories;
pub mod depgraph;
pub mod error;
pub mod installscan;
pub mod license;
pub mod snapshot;
pub mod squat;

pub use error::AuditError;
pub use snapshot::{
    canonical_name, ecosystem_stats, load_snapshot, parse_version, version_matches, CanonicalName,
    LoadOptions, LoadReport, PackageRecord, ReleaseRecord, Snapshot, SpecifierSet, Version,
    YearlyStats,
};

pub use depgraph::{DepGraph, DepGraphBuilder, Metric, ReachResult, DEFAULT_DEPTH};

pub use squat::{
    classify_candidate, default_builtins, detect_builtin_shadow, detect_rename_variants,
    edit_distance, find_typosquats, scan_all, FuzzyIndex, SquatCandidate, SquatConfig,
    SquatReport, SquatRule, Verdict,
};

pub use license::{
    compatible, find_violations, find_violations_with, license_of, license_of_with,
    normalize_license, normalize_license_with, transitive_violations, transitive_violations_with,
    violation_pair_counts, Compat, LicenseAliases, LicenseId, Violation, ViolationKind,
    ViolationScan,
};

pub use advisories::{
    affected_releases, exposure_by_domain, exposure_set, load_advisories, mean_patch_lag,
    patch_lag, vulnerability_timeline, Advisory, AdvisorySet, ExposureRecord, PatchLagSummary,
    TimelineRow,
};

pub use installscan::{
    corpus_summary, scan_bytes, scan_script, scan_tree, CorpusSummary, Flag, FlagKind,
    ScanConfig, ScanTreeReport, ScanWeights, ScriptFindings,
};
