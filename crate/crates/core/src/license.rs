//! License normalization and violation detection.
//!
//! Registry license fields are free text (the same license shows up under
//! thousands of spellings), so detection starts by collapsing each field
//! onto a small set of identifiers ordered by restrictiveness. A
//! dependency edge violates when the dependency's license is more
//! restrictive than the importer's; packages that reach a violating
//! importer inherit its violation with a witness path.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::depgraph::DepGraph;
use crate::snapshot::{CanonicalName, PackageRecord, Snapshot};

/// Canonical license identifiers, ordered by the restrictiveness scale
/// used for violation checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LicenseId {
    #[serde(rename = "PUBLIC_DOMAIN")]
    PublicDomain,
    #[serde(rename = "MIT")]
    Mit,
    #[serde(rename = "BSD")]
    Bsd,
    #[serde(rename = "APACHE_2")]
    Apache2,
    #[serde(rename = "MPL_2")]
    Mpl2,
    #[serde(rename = "LGPL_2")]
    Lgpl2,
    #[serde(rename = "LGPL_3")]
    Lgpl3,
    #[serde(rename = "GPL_2")]
    Gpl2,
    #[serde(rename = "GPL_3")]
    Gpl3,
    #[serde(rename = "AGPL_3")]
    Agpl3,
    #[serde(rename = "PROPRIETARY")]
    Proprietary,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

impl LicenseId {
    /// Restrictiveness rank. `None` for licenses excluded from violation
    /// logic (unknown or proprietary).
    pub fn rank(self) -> Option<u8> {
        match self {
            LicenseId::PublicDomain => Some(0),
            LicenseId::Mit | LicenseId::Bsd => Some(1),
            LicenseId::Apache2 => Some(2),
            LicenseId::Mpl2 => Some(3),
            LicenseId::Lgpl2 | LicenseId::Lgpl3 => Some(4),
            LicenseId::Gpl2 | LicenseId::Gpl3 => Some(5),
            LicenseId::Agpl3 => Some(6),
            LicenseId::Proprietary | LicenseId::Unknown => None,
        }
    }

    /// Rank used only to pick the most restrictive match during
    /// normalization; proprietary sorts above everything ranked.
    fn match_score(self) -> Option<u8> {
        match self {
            LicenseId::Proprietary => Some(7),
            LicenseId::Unknown => None,
            other => other.rank(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LicenseId::PublicDomain => "PUBLIC_DOMAIN",
            LicenseId::Mit => "MIT",
            LicenseId::Bsd => "BSD",
            LicenseId::Apache2 => "APACHE_2",
            LicenseId::Mpl2 => "MPL_2",
            LicenseId::Lgpl2 => "LGPL_2",
            LicenseId::Lgpl3 => "LGPL_3",
            LicenseId::Gpl2 => "GPL_2",
            LicenseId::Gpl3 => "GPL_3",
            LicenseId::Agpl3 => "AGPL_3",
            LicenseId::Proprietary => "PROPRIETARY",
            LicenseId::Unknown => "UNKNOWN",
        }
    }

    pub fn from_name(name: &str) -> Option<LicenseId> {
        let all = [
            LicenseId::PublicDomain,
            LicenseId::Mit,
            LicenseId::Bsd,
            LicenseId::Apache2,
            LicenseId::Mpl2,
            LicenseId::Lgpl2,
            LicenseId::Lgpl3,
            LicenseId::Gpl2,
            LicenseId::Gpl3,
            LicenseId::Agpl3,
            LicenseId::Proprietary,
            LicenseId::Unknown,
        ];
        all.into_iter().find(|id| id.as_str() == name)
    }
}

/// User-supplied exact aliases, consulted before the built-in tables.
#[derive(Debug, Clone, Default)]
pub struct LicenseAliases {
    entries: Vec<(String, LicenseId)>,
}

impl LicenseAliases {
    pub fn new(entries: impl IntoIterator<Item = (String, LicenseId)>) -> Self {
        LicenseAliases {
            entries: entries
                .into_iter()
                .map(|(alias, id)| (squash(&alias), id))
                .collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn lookup(&self, squashed: &str) -> Option<LicenseId> {
        self.entries
            .iter()
            .find(|(alias, _)| alias == squashed)
            .map(|(_, id)| *id)
    }
}

/// Lowercase and collapse whitespace runs.
fn squash(text: &str) -> String {
    text.to_lowercase()
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

impl fmt::Display for LicenseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Exact alias table, matched after lowercasing and whitespace collapse.
const EXACT_ALIASES: &[(&str, LicenseId)] = &[
    ("public domain", LicenseId::PublicDomain),
    ("unlicense", LicenseId::PublicDomain),
    ("the unlicense", LicenseId::PublicDomain),
    ("cc0", LicenseId::PublicDomain),
    ("cc0 1.0", LicenseId::PublicDomain),
    ("wtfpl", LicenseId::PublicDomain),
    ("mit", LicenseId::Mit),
    ("mit license", LicenseId::Mit),
    ("mit licence", LicenseId::Mit),
    ("the mit license", LicenseId::Mit),
    ("expat", LicenseId::Mit),
    ("x11", LicenseId::Mit),
    ("bsd", LicenseId::Bsd),
    ("bsd license", LicenseId::Bsd),
    ("new bsd license", LicenseId::Bsd),
    ("simplified bsd", LicenseId::Bsd),
    ("bsd-2-clause", LicenseId::Bsd),
    ("bsd-3-clause", LicenseId::Bsd),
    ("bsd 2-clause", LicenseId::Bsd),
    ("bsd 3-clause", LicenseId::Bsd),
    ("isc", LicenseId::Bsd),
    ("apache", LicenseId::Apache2),
    ("apache 2", LicenseId::Apache2),
    ("apache 2.0", LicenseId::Apache2),
    ("apache-2.0", LicenseId::Apache2),
    ("apache license", LicenseId::Apache2),
    ("apache license 2.0", LicenseId::Apache2),
    ("apache license, version 2.0", LicenseId::Apache2),
    ("apache software license", LicenseId::Apache2),
    ("asl 2.0", LicenseId::Apache2),
    ("mpl", LicenseId::Mpl2),
    ("mpl 2.0", LicenseId::Mpl2),
    ("mpl-2.0", LicenseId::Mpl2),
    ("mozilla public license 2.0", LicenseId::Mpl2),
    ("mozilla public license 2.0 (mpl 2.0)", LicenseId::Mpl2),
    ("lgpl", LicenseId::Lgpl2),
    ("lgpl-2.1", LicenseId::Lgpl2),
    ("lgpl 2.1", LicenseId::Lgpl2),
    ("lgplv2", LicenseId::Lgpl2),
    ("lgplv2.1", LicenseId::Lgpl2),
    ("gnu lesser general public license v2 (lgplv2)", LicenseId::Lgpl2),
    ("lgpl-3.0", LicenseId::Lgpl3),
    ("lgpl 3.0", LicenseId::Lgpl3),
    ("lgplv3", LicenseId::Lgpl3),
    ("lgplv3+", LicenseId::Lgpl3),
    ("gnu lesser general public license v3", LicenseId::Lgpl3),
    ("gnu lesser general public license v3 (lgplv3)", LicenseId::Lgpl3),
    ("gpl", LicenseId::Gpl2),
    ("gpl-2.0", LicenseId::Gpl2),
    ("gpl 2.0", LicenseId::Gpl2),
    ("gplv2", LicenseId::Gpl2),
    ("gplv2+", LicenseId::Gpl2),
    ("gnu general public license v2", LicenseId::Gpl2),
    ("gnu general public license v2 (gplv2)", LicenseId::Gpl2),
    ("gpl-3.0", LicenseId::Gpl3),
    ("gpl 3.0", LicenseId::Gpl3),
    ("gplv3", LicenseId::Gpl3),
    ("gplv3+", LicenseId::Gpl3),
    ("gnu general public license v3", LicenseId::Gpl3),
    ("gnu general public license v3 (gplv3)", LicenseId::Gpl3),
    ("gnu gplv3", LicenseId::Gpl3),
    ("agpl", LicenseId::Agpl3),
    ("agpl-3.0", LicenseId::Agpl3),
    ("agplv3", LicenseId::Agpl3),
    ("agplv3+", LicenseId::Agpl3),
    ("gnu affero general public license v3", LicenseId::Agpl3),
    ("proprietary", LicenseId::Proprietary),
    ("commercial", LicenseId::Proprietary),
    ("all rights reserved", LicenseId::Proprietary),
    ("other/proprietary license", LicenseId::Proprietary),
    ("closed source", LicenseId::Proprietary),
];

fn is_word_char(c: u8) -> bool {
    c.is_ascii_alphanumeric()
}

/// Occurrences of `needle` in `text` that start at a word boundary.
/// With `bound_right`, the match must end at one too (used for short
/// needles like `mit` that hide inside ordinary words).
fn word_positions(text: &str, needle: &str, bound_right: bool) -> Vec<usize> {
    let (t, n) = (text.as_bytes(), needle.as_bytes());
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(pos) = text[from..].find(needle).map(|p| p + from) {
        let left_ok = pos == 0 || !is_word_char(t[pos - 1]);
        let end = pos + n.len();
        let right_ok = !bound_right || end >= t.len() || !is_word_char(t[end]);
        if left_ok && right_ok {
            out.push(pos);
        }
        from = pos + 1;
    }
    out
}

/// First digit in the window after a family match decides v2 vs v3;
/// absent a digit the older version is assumed (ranks tie anyway).
fn gpl_version_after(text: &str, end: usize, v2: LicenseId, v3: LicenseId) -> LicenseId {
    const WINDOW: usize = 24;
    let tail = &text[end.min(text.len())..];
    let tail = &tail[..tail.len().min(WINDOW)];
    match tail.chars().find(|c| c.is_ascii_digit()) {
        Some('3') => v3,
        _ => v2,
    }
}

fn substring_hits(text: &str) -> Vec<LicenseId> {
    let mut hits = Vec::new();

    for pos in word_positions(text, "agpl", false) {
        hits.push(gpl_version_after(text, pos + 4, LicenseId::Agpl3, LicenseId::Agpl3));
    }
    if text.contains("affero") {
        hits.push(LicenseId::Agpl3);
    }
    for pos in word_positions(text, "lgpl", false) {
        hits.push(gpl_version_after(text, pos + 4, LicenseId::Lgpl2, LicenseId::Lgpl3));
    }
    for pos in word_positions(text, "lesser general public", false) {
        hits.push(gpl_version_after(text, pos + 21, LicenseId::Lgpl2, LicenseId::Lgpl3));
    }
    // Word boundaries keep "gpl" from re-matching inside lgpl/agpl.
    for pos in word_positions(text, "gpl", false) {
        hits.push(gpl_version_after(text, pos + 3, LicenseId::Gpl2, LicenseId::Gpl3));
    }
    for pos in word_positions(text, "general public", false) {
        let shielded = ["lesser ", "affero "].iter().any(|prefix| {
            pos >= prefix.len() && text[..pos].ends_with(prefix)
        });
        if !shielded {
            hits.push(gpl_version_after(text, pos + 14, LicenseId::Gpl2, LicenseId::Gpl3));
        }
    }
    if text.contains("mozilla") || !word_positions(text, "mpl", true).is_empty() {
        hits.push(LicenseId::Mpl2);
    }
    if text.contains("apache") {
        hits.push(LicenseId::Apache2);
    }
    if !word_positions(text, "bsd", false).is_empty()
        || !word_positions(text, "isc", true).is_empty()
    {
        hits.push(LicenseId::Bsd);
    }
    if !word_positions(text, "mit", true).is_empty()
        || !word_positions(text, "expat", true).is_empty()
        || !word_positions(text, "x11", true).is_empty()
    {
        hits.push(LicenseId::Mit);
    }
    if text.contains("public domain")
        || text.contains("unlicense")
        || text.contains("wtfpl")
        || !word_positions(text, "cc0", false).is_empty()
    {
        hits.push(LicenseId::PublicDomain);
    }
    if text.contains("proprietary")
        || text.contains("commercial")
        || text.contains("all rights reserved")
        || text.contains("closed source")
    {
        hits.push(LicenseId::Proprietary);
    }
    hits
}

/// Collapse a free-text license field onto a [`LicenseId`].
///
/// Exact aliases are tried first (user-supplied, then built-in); failing
/// that, substring rules run and the most restrictive hit wins.
/// Unmatched text is [`LicenseId::Unknown`]. The function is total and
/// deterministic; the pattern tables are the only thing that changes its
/// output.
pub fn normalize_license_with(freetext: &str, aliases: &LicenseAliases) -> LicenseId {
    let text = squash(freetext);
    if text.is_empty() {
        return LicenseId::Unknown;
    }
    if let Some(id) = aliases.lookup(&text) {
        return id;
    }
    for (alias, id) in EXACT_ALIASES {
        if text == *alias {
            return *id;
        }
    }
    substring_hits(&text)
        .into_iter()
        .max_by_key(|id| id.match_score())
        .unwrap_or(LicenseId::Unknown)
}

/// [`normalize_license_with`] under the built-in tables only.
pub fn normalize_license(freetext: &str) -> LicenseId {
    normalize_license_with(freetext, &LicenseAliases::default())
}

/// License of a package: the free-text field, falling back to classifier
/// text only when the field normalizes to unknown.
pub fn license_of_with(record: &PackageRecord, aliases: &LicenseAliases) -> LicenseId {
    let from_field = normalize_license_with(&record.license_text, aliases);
    if from_field != LicenseId::Unknown {
        return from_field;
    }
    record
        .classifiers
        .iter()
        .map(|c| normalize_license_with(c, aliases))
        .filter(|id| *id != LicenseId::Unknown)
        .max_by_key(|id| id.match_score())
        .unwrap_or(LicenseId::Unknown)
}

pub fn license_of(record: &PackageRecord) -> LicenseId {
    license_of_with(record, &LicenseAliases::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Compat {
    Ok,
    Violation,
    Indeterminate,
}

/// Violation test for one import edge: the dependency being more
/// restrictive than the importer is a violation; protective importers may
/// include permissive dependencies. Unknown or proprietary on either
/// side is indeterminate.
pub fn compatible(importer: LicenseId, dep: LicenseId) -> Compat {
    match (importer.rank(), dep.rank()) {
        (Some(i), Some(d)) if d > i => Compat::Violation,
        (Some(_), Some(_)) => Compat::Ok,
        _ => Compat::Indeterminate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ViolationKind {
    Direct,
    Inherited,
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ViolationKind::Direct => "DIRECT",
            ViolationKind::Inherited => "INHERITED",
        })
    }
}

/// A (possibly inherited) license violation. `path` lists the nodes from
/// the importer to the offending dependency; the final edge is always a
/// direct violation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub importer: CanonicalName,
    pub importer_license: LicenseId,
    pub dependency: CanonicalName,
    pub dependency_license: LicenseId,
    pub kind: ViolationKind,
    pub path: Vec<CanonicalName>,
}

/// Output of the direct scan: violations plus the count of edges whose
/// endpoints could not be ranked.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ViolationScan {
    pub violations: Vec<Violation>,
    pub indeterminate_edges: u64,
}

fn license_map<'a>(
    snapshot: &'a Snapshot,
    aliases: &LicenseAliases,
) -> BTreeMap<&'a CanonicalName, LicenseId> {
    snapshot
        .packages
        .iter()
        .map(|(name, record)| (name, license_of_with(record, aliases)))
        .collect()
}

/// Scan every dependency edge for direct violations, in deterministic
/// (importer, dependency) order.
pub fn find_violations(graph: &DepGraph, snapshot: &Snapshot) -> ViolationScan {
    find_violations_with(graph, snapshot, &LicenseAliases::default())
}

pub fn find_violations_with(
    graph: &DepGraph,
    snapshot: &Snapshot,
    aliases: &LicenseAliases,
) -> ViolationScan {
    let licenses = license_map(snapshot, aliases);
    let mut scan = ViolationScan::default();
    for (name, &importer_license) in &licenses {
        let Ok(deps) = graph.dependencies_of(name.as_str()) else {
            continue;
        };
        for dep in deps {
            let Some(&dep_license) = licenses.get(dep) else {
                continue;
            };
            match compatible(importer_license, dep_license) {
                Compat::Violation => scan.violations.push(Violation {
                    importer: (*name).clone(),
                    importer_license,
                    dependency: dep.clone(),
                    dependency_license: dep_license,
                    kind: ViolationKind::Direct,
                    path: vec![(*name).clone(), dep.clone()],
                }),
                Compat::Indeterminate => scan.indeterminate_edges += 1,
                Compat::Ok => {}
            }
        }
    }
    scan
}

/// Propagate each direct violation to every package that reaches its
/// importer. One inherited record per (package, offending dependency),
/// carrying a witness path; the first (shortest, then lexicographically
/// earliest) witness wins.
pub fn transitive_violations(
    graph: &DepGraph,
    snapshot: &Snapshot,
    direct: &[Violation],
    depth: Option<usize>,
) -> Vec<Violation> {
    transitive_violations_with(graph, snapshot, direct, depth, &LicenseAliases::default())
}

pub fn transitive_violations_with(
    graph: &DepGraph,
    snapshot: &Snapshot,
    direct: &[Violation],
    depth: Option<usize>,
    aliases: &LicenseAliases,
) -> Vec<Violation> {
    let licenses = license_map(snapshot, aliases);
    let mut seen: BTreeSet<(CanonicalName, CanonicalName)> = BTreeSet::new();
    let mut inherited = Vec::new();

    for violation in direct {
        let Ok(reach) = graph.package_reach(violation.importer.as_str(), depth) else {
            continue;
        };
        // Parent pointers for witness paths: BFS from the importer along
        // reverse edges mirrors the reach computation.
        let mut parent: HashMap<CanonicalName, CanonicalName> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back(violation.importer.clone());
        let mut visited: BTreeSet<CanonicalName> = BTreeSet::new();
        visited.insert(violation.importer.clone());
        while let Some(node) = queue.pop_front() {
            let Ok(dependents) = graph.dependents_of(node.as_str()) else {
                continue;
            };
            for dependent in dependents {
                if reach.members.contains(dependent) && visited.insert(dependent.clone()) {
                    parent.insert(dependent.clone(), node.clone());
                    queue.push_back(dependent.clone());
                }
            }
        }

        for member in &reach.members {
            let key = (member.clone(), violation.dependency.clone());
            if seen.contains(&key) {
                continue;
            }
            let mut path = vec![member.clone()];
            let mut cursor = member;
            while let Some(next) = parent.get(cursor) {
                path.push(next.clone());
                cursor = next;
            }
            if cursor != &violation.importer {
                continue; // outside this violation's witness tree
            }
            path.push(violation.dependency.clone());
            seen.insert(key);
            inherited.push(Violation {
                importer: member.clone(),
                importer_license: licenses
                    .get(member)
                    .copied()
                    .unwrap_or(LicenseId::Unknown),
                dependency: violation.dependency.clone(),
                dependency_license: violation.dependency_license,
                kind: ViolationKind::Inherited,
                path,
            });
        }
    }
    inherited.sort_by(|a, b| {
        (&a.importer, &a.dependency, &a.path).cmp(&(&b.importer, &b.dependency, &b.path))
    });
    inherited
}

/// Tally violations per (importer license, dependency license) pair —
/// the "X importing Y" table layout.
pub fn violation_pair_counts(violations: &[Violation]) -> BTreeMap<(LicenseId, LicenseId), u64> {
    let mut counts = BTreeMap::new();
    for v in violations {
        *counts
            .entry((v.importer_license, v.dependency_license))
            .or_default() += 1;
    }
    counts
}

/// CSV rows: importer, importer_license, dependency, dependency_license,
/// kind, path (arrow separated).
pub fn violations_to_csv(violations: &[Violation]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "importer",
        "importer_license",
        "dependency",
        "dependency_license",
        "kind",
        "path",
    ])
    .expect("csv header");
    for v in violations {
        let path = v
            .path
            .iter()
            .map(|n| n.as_str())
            .collect::<Vec<_>>()
            .join(" -> ");
        w.write_record([
            v.importer.to_string(),
            v.importer_license.to_string(),
            v.dependency.to_string(),
            v.dependency_license.to_string(),
            v.kind.to_string(),
            path,
        ])
        .expect("csv row");
    }
    String::from_utf8(w.into_inner().expect("csv flush")).expect("csv utf8")
}
