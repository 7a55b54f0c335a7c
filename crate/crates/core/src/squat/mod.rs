//! Package impersonation detection.
//!
//! Candidates come from five detectors over canonical names: close edit
//! distance, word reordering around separators, separator collapse, the
//! "3"-suffix family and standard-library shadowing. Each candidate pair
//! is oriented suspect→target by popularity and classified as offensive,
//! defensive (same owner), a warning stub, or unknown.
//!
//! Because detection runs on canonical names, case tricks such as the
//! capital-I "JelIyfish" collapse into ordinary edit-distance hits.

pub mod index;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

pub use index::{edit_distance, FuzzyIndex};

use crate::error::AuditError;
use crate::snapshot::{canonical_name, CanonicalName, PackageRecord, Snapshot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SquatRule {
    EditDistance,
    WordReorder,
    SeparatorCollapse,
    VersionSuffix,
    BuiltinShadow,
}

impl fmt::Display for SquatRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SquatRule::EditDistance => "EDIT_DISTANCE",
            SquatRule::WordReorder => "WORD_REORDER",
            SquatRule::SeparatorCollapse => "SEPARATOR_COLLAPSE",
            SquatRule::VersionSuffix => "VERSION_SUFFIX",
            SquatRule::BuiltinShadow => "BUILTIN_SHADOW",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    OffensiveSuspect,
    Defensive,
    WarningStub,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Verdict::OffensiveSuspect => "OFFENSIVE_SUSPECT",
            Verdict::Defensive => "DEFENSIVE",
            Verdict::WarningStub => "WARNING_STUB",
            Verdict::Unknown => "UNKNOWN",
        };
        f.write_str(s)
    }
}

/// One (suspect, target) impersonation candidate.
///
/// For [`SquatRule::BuiltinShadow`] the target is the reserved module
/// name, which is not a snapshot package (and equals the suspect).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SquatCandidate {
    pub suspect: CanonicalName,
    pub target: CanonicalName,
    pub rule: SquatRule,
    /// Edit distance for [`SquatRule::EditDistance`], 0 for other rules.
    pub distance: usize,
    pub verdict: Verdict,
    pub suspect_downloads: Option<u64>,
    pub target_downloads: Option<u64>,
}

/// Knobs for [`scan_all`].
#[derive(Debug, Clone)]
pub struct SquatConfig {
    /// Maximum edit distance for the fuzzy pass (1 to 3).
    pub max_distance: usize,
    /// Module names that never need installing; shipped as data so the
    /// tool stays registry- and version-agnostic.
    pub reserved_builtins: Vec<String>,
    /// Phrases (matched case-insensitively against description and
    /// classifier text) that mark a candidate as a guardian-style stub.
    pub warning_phrases: Vec<String>,
}

impl Default for SquatConfig {
    fn default() -> Self {
        SquatConfig {
            max_distance: 3,
            reserved_builtins: default_builtins(),
            warning_phrases: vec!["did you mean to install".to_owned()],
        }
    }
}

/// The bundled standard-library module list.
pub fn default_builtins() -> Vec<String> {
    include_str!("../../data/python_builtins.txt")
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct SquatReport {
    pub candidates: Vec<SquatCandidate>,
    pub rule_counts: BTreeMap<SquatRule, u64>,
    pub verdict_counts: BTreeMap<Verdict, u64>,
}

impl SquatReport {
    pub fn offensive_count(&self) -> u64 {
        self.verdict_counts
            .get(&Verdict::OffensiveSuspect)
            .copied()
            .unwrap_or(0)
    }

    /// CSV rows: suspect, target, rule, distance, verdict,
    /// suspect_downloads, target_downloads.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "suspect",
            "target",
            "rule",
            "distance",
            "verdict",
            "suspect_downloads",
            "target_downloads",
        ])
        .expect("csv header");
        for c in &self.candidates {
            let fmt_dl = |d: Option<u64>| d.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([
                c.suspect.to_string(),
                c.target.to_string(),
                c.rule.to_string(),
                c.distance.to_string(),
                c.verdict.to_string(),
                fmt_dl(c.suspect_downloads),
                fmt_dl(c.target_downloads),
            ])
            .expect("csv row");
        }
        String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
    }
}

/// Order a pair so the likely original comes second (as target): the
/// member with strictly more downloads wins; on equal or missing
/// downloads the earlier first release wins (a dated package beats an
/// undated one); as a last resort the lexicographically smaller name is
/// the target. Deterministic by construction.
fn orient<'a>(
    a: &'a CanonicalName,
    b: &'a CanonicalName,
    snapshot: &Snapshot,
) -> (&'a CanonicalName, &'a CanonicalName) {
    let (pa, pb) = (snapshot.get(a.as_str()), snapshot.get(b.as_str()));
    let downloads = |p: Option<&PackageRecord>| p.and_then(|p| p.downloads);
    if let (Some(da), Some(db)) = (downloads(pa), downloads(pb)) {
        if da != db {
            return if da > db { (b, a) } else { (a, b) };
        }
    }
    let first = |p: Option<&PackageRecord>| p.and_then(|p| p.first_release_date());
    match (first(pa), first(pb)) {
        (Some(fa), Some(fb)) if fa != fb => {
            if fa < fb {
                (b, a)
            } else {
                (a, b)
            }
        }
        (Some(_), None) => (b, a),
        (None, Some(_)) => (a, b),
        _ => {
            if a < b {
                (b, a)
            } else {
                (a, b)
            }
        }
    }
}

fn candidate(
    a: &CanonicalName,
    b: &CanonicalName,
    rule: SquatRule,
    distance: usize,
    snapshot: &Snapshot,
) -> SquatCandidate {
    let (suspect, target) = orient(a, b, snapshot);
    SquatCandidate {
        suspect: suspect.clone(),
        target: target.clone(),
        rule,
        distance,
        verdict: Verdict::Unknown,
        suspect_downloads: snapshot.get(suspect.as_str()).and_then(|p| p.downloads),
        target_downloads: snapshot.get(target.as_str()).and_then(|p| p.downloads),
    }
}

/// Edit-distance candidates for every close pair in the index.
pub fn find_typosquats(
    index: &FuzzyIndex,
    snapshot: &Snapshot,
    max_d: usize,
) -> Vec<SquatCandidate> {
    index
        .all_pairs(max_d)
        .into_iter()
        .map(|(a, b, d)| candidate(&a, &b, SquatRule::EditDistance, d, snapshot))
        .collect()
}

fn tokens(name: &CanonicalName) -> Vec<&str> {
    name.as_str().split('-').collect()
}

/// "3"-suffix spellings of `name`: the trailing digit stripped, a
/// standalone `3` token removed, or a leading `python3` swapped for
/// `python`/`py`.
fn version_suffix_variants(name: &CanonicalName) -> Vec<String> {
    let toks = tokens(name);
    let mut variants = Vec::new();
    if let Some(last) = toks.last() {
        if last.len() > 1 && last.ends_with('3') {
            let mut t = toks.clone();
            let shortened = &last[..last.len() - 1];
            *t.last_mut().expect("non-empty") = shortened;
            variants.push(t.join("-"));
        }
    }
    for (i, tok) in toks.iter().enumerate() {
        if *tok == "3" && toks.len() > 1 {
            let mut t = toks.clone();
            t.remove(i);
            variants.push(t.join("-"));
        }
    }
    if toks.first() == Some(&"python3") {
        for swap in ["python", "py"] {
            let mut t = toks.clone();
            t[0] = swap;
            variants.push(t.join("-"));
        }
    }
    variants.sort_unstable();
    variants.dedup();
    variants
}

/// Word-reorder, separator-collapse and "3"-suffix candidates.
pub fn detect_rename_variants(snapshot: &Snapshot) -> Vec<SquatCandidate> {
    let mut pairs: BTreeSet<(CanonicalName, CanonicalName, SquatRule)> = BTreeSet::new();
    let mut pair = |a: &CanonicalName, b: &CanonicalName, rule: SquatRule| {
        let (x, y) = if a < b { (a, b) } else { (b, a) };
        pairs.insert((x.clone(), y.clone(), rule));
    };

    let mut reorder_groups: BTreeMap<Vec<&str>, Vec<&CanonicalName>> = BTreeMap::new();
    let mut collapse_groups: BTreeMap<String, Vec<&CanonicalName>> = BTreeMap::new();
    for name in snapshot.names() {
        let toks = tokens(name);
        if toks.len() >= 2 {
            let mut key = toks.clone();
            key.sort_unstable();
            reorder_groups.entry(key).or_default().push(name);
        }
        collapse_groups
            .entry(name.as_str().replace('-', ""))
            .or_default()
            .push(name);
    }
    // Same token multiset, different order; canonical names are unique so
    // members of a group always differ in sequence.
    for group in reorder_groups.values().filter(|g| g.len() > 1) {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                pair(a, b, SquatRule::WordReorder);
            }
        }
    }
    for group in collapse_groups.values().filter(|g| g.len() > 1) {
        for (i, a) in group.iter().enumerate() {
            for b in &group[i + 1..] {
                pair(a, b, SquatRule::SeparatorCollapse);
            }
        }
    }
    for name in snapshot.names() {
        for variant in version_suffix_variants(name) {
            if variant != name.as_str() {
                if let Some(other) = snapshot.packages.get_key_value(variant.as_str()) {
                    pair(name, other.0, SquatRule::VersionSuffix);
                }
            }
        }
    }

    pairs
        .into_iter()
        .map(|(a, b, rule)| candidate(&a, &b, rule, 0, snapshot))
        .collect()
}

/// Snapshot packages whose canonical name equals a reserved builtin
/// module name.
pub fn detect_builtin_shadow(snapshot: &Snapshot, reserved: &[String]) -> Vec<SquatCandidate> {
    let reserved: BTreeSet<CanonicalName> = reserved
        .iter()
        .filter_map(|r| canonical_name(r).ok())
        .collect();
    snapshot
        .names()
        .filter(|name| reserved.contains(name.as_str()))
        .map(|name| SquatCandidate {
            suspect: name.clone(),
            target: name.clone(),
            rule: SquatRule::BuiltinShadow,
            distance: 0,
            verdict: Verdict::Unknown,
            suspect_downloads: snapshot.get(name.as_str()).and_then(|p| p.downloads),
            target_downloads: None,
        })
        .collect()
}

fn warning_haystack(record: &PackageRecord) -> String {
    let mut text = record.description.to_lowercase();
    for classifier in &record.classifiers {
        text.push('\n');
        text.push_str(&classifier.to_lowercase());
    }
    text.trim().to_owned()
}

/// Fill in the candidate's verdict.
///
/// Shared maintainership marks a pair defensive; a warning phrase in the
/// suspect's description or classifiers marks a guardian stub; otherwise
/// the candidate is an offensive suspect, or unknown when there is no
/// metadata to judge by. Builtin shadows never qualify as defensive
/// through ownership, since the shadowed name is not a package.
pub fn classify_candidate(
    mut c: SquatCandidate,
    snapshot: &Snapshot,
    config: &SquatConfig,
) -> Result<SquatCandidate, AuditError> {
    let suspect = snapshot
        .get(c.suspect.as_str())
        .ok_or_else(|| AuditError::UnknownPackage(c.suspect.to_string()))?;

    let mut ownership_known = false;
    if c.rule != SquatRule::BuiltinShadow {
        let target = snapshot
            .get(c.target.as_str())
            .ok_or_else(|| AuditError::UnknownPackage(c.target.to_string()))?;
        ownership_known = !suspect.maintainers.is_empty() && !target.maintainers.is_empty();
        if ownership_known && !suspect.maintainers.is_disjoint(&target.maintainers) {
            c.verdict = Verdict::Defensive;
            return Ok(c);
        }
    }

    let haystack = warning_haystack(suspect);
    if !haystack.is_empty()
        && config
            .warning_phrases
            .iter()
            .any(|p| haystack.contains(&p.to_lowercase()))
    {
        c.verdict = Verdict::WarningStub;
        return Ok(c);
    }

    let shadow_metadata_known = c.rule == SquatRule::BuiltinShadow
        && (!suspect.maintainers.is_empty() || !haystack.is_empty());
    c.verdict = if ownership_known || shadow_metadata_known || !haystack.is_empty() {
        Verdict::OffensiveSuspect
    } else {
        Verdict::Unknown
    };
    Ok(c)
}

/// Run every detector, classify, deduplicate per (suspect, target, rule)
/// and tally. A pair matched by several rules keeps one candidate per
/// rule. Output order is fixed, so repeated runs are byte-identical.
pub fn scan_all(snapshot: &Snapshot, config: &SquatConfig) -> SquatReport {
    let index = FuzzyIndex::build(snapshot.names().cloned(), config.max_distance);

    let mut candidates = find_typosquats(&index, snapshot, config.max_distance);
    candidates.extend(detect_rename_variants(snapshot));
    candidates.extend(detect_builtin_shadow(snapshot, &config.reserved_builtins));

    let mut seen: BTreeSet<(CanonicalName, CanonicalName, SquatRule)> = BTreeSet::new();
    let mut report = SquatReport::default();
    for c in candidates {
        if !seen.insert((c.suspect.clone(), c.target.clone(), c.rule)) {
            continue;
        }
        let classified =
            classify_candidate(c, snapshot, config).expect("detectors only emit snapshot names");
        report.candidates.push(classified);
    }
    report
        .candidates
        .sort_by(|a, b| (&a.suspect, &a.target, a.rule).cmp(&(&b.suspect, &b.target, b.rule)));
    for c in &report.candidates {
        *report.rule_counts.entry(c.rule).or_default() += 1;
        *report.verdict_counts.entry(c.verdict).or_default() += 1;
    }
    report
}
