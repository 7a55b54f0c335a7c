//! Subcommand implementations: compute, render (table/json/csv), and
//! report whether findings were present (drives the exit code).

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use pkgaudit_core::advisories::{exposure_by_domain, exposure_set, mean_patch_lag};
use pkgaudit_core::depgraph::Metric;
use pkgaudit_core::license::{
    find_violations_with, transitive_violations_with, violation_pair_counts, LicenseId, Violation,
};
use pkgaudit_core::snapshot::{canonical_name, CanonicalName, YearCounts};
use pkgaudit_core::squat::scan_all;
use pkgaudit_core::{
    affected_releases, corpus_summary, ecosystem_stats, scan_tree, vulnerability_timeline,
    CorpusSummary, DepGraph, ScriptFindings,
};

use crate::{AnyError, Context, Format};

fn emit_json<T: Serialize>(value: &T) -> Result<(), AnyError> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn csv_from_rows(header: &[&str], rows: &[Vec<String>]) -> Result<(), AnyError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    print!("{}", String::from_utf8(w.into_inner()?)?);
    Ok(())
}

fn canonical(package: &str) -> Result<CanonicalName, AnyError> {
    Ok(canonical_name(package)?)
}

// ─── stats ──────────────────────────────────────────────────────────

#[derive(Serialize)]
struct StatsOutput {
    snapshot_date: NaiveDate,
    packages: usize,
    releases: u64,
    maintainers: u64,
    records_read: usize,
    records_skipped: usize,
    packages_with_dangling_deps: usize,
    years: BTreeMap<i32, YearCounts>,
    top_classifiers: Vec<ClassifierCount>,
}

#[derive(Serialize)]
struct ClassifierCount {
    classifier: String,
    packages: u64,
}

pub fn stats(ctx: &Context) -> Result<bool, AnyError> {
    let (snapshot, report) = ctx.load_snapshot()?;
    let yearly = ecosystem_stats(&snapshot);

    let releases: u64 = snapshot
        .packages
        .values()
        .map(|p| p.releases.len() as u64)
        .sum();
    let maintainers = snapshot
        .packages
        .values()
        .flat_map(|p| p.maintainers.iter())
        .collect::<BTreeSet<_>>()
        .len() as u64;

    let mut classifier_counts: BTreeMap<&str, u64> = BTreeMap::new();
    for record in snapshot.packages.values() {
        for classifier in record.classifiers.iter().collect::<BTreeSet<_>>() {
            *classifier_counts.entry(classifier).or_default() += 1;
        }
    }
    let mut top_classifiers: Vec<ClassifierCount> = classifier_counts
        .into_iter()
        .map(|(classifier, packages)| ClassifierCount {
            classifier: classifier.to_owned(),
            packages,
        })
        .collect();
    top_classifiers.sort_by(|a, b| b.packages.cmp(&a.packages).then(a.classifier.cmp(&b.classifier)));
    top_classifiers.truncate(20);

    let out = StatsOutput {
        snapshot_date: snapshot.snapshot_date,
        packages: snapshot.len(),
        releases,
        maintainers,
        records_read: report.records,
        records_skipped: report.skipped.len(),
        packages_with_dangling_deps: report.dangling.len(),
        years: yearly.years,
        top_classifiers,
    };

    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = out
                .years
                .iter()
                .map(|(year, c)| {
                    vec![
                        year.to_string(),
                        c.new_packages.to_string(),
                        c.new_maintainers.to_string(),
                        c.new_releases.to_string(),
                    ]
                })
                .collect();
            csv_from_rows(
                &["year", "new_packages", "new_maintainers", "new_releases"],
                &rows,
            )?;
        }
        Format::Table => {
            println!("snapshot date : {}", out.snapshot_date);
            println!(
                "packages      : {} ({} records read, {} skipped)",
                out.packages, out.records_read, out.records_skipped
            );
            println!("releases      : {}", out.releases);
            println!("maintainers   : {}", out.maintainers);
            println!(
                "dangling deps : {} packages reference missing targets",
                out.packages_with_dangling_deps
            );
            println!();
            println!("{:<6} {:>12} {:>16} {:>13}", "year", "new packages", "new maintainers", "new releases");
            for (year, c) in &out.years {
                println!(
                    "{:<6} {:>12} {:>16} {:>13}",
                    year, c.new_packages, c.new_maintainers, c.new_releases
                );
            }
            if !out.top_classifiers.is_empty() {
                println!();
                println!("top classifiers:");
                for c in &out.top_classifiers {
                    println!("  {:>6}  {}", c.packages, c.classifier);
                }
            }
        }
    }
    Ok(false)
}

// ─── reach / trust / top ────────────────────────────────────────────

#[derive(Serialize)]
struct ReachOutput {
    origin: String,
    kind: &'static str,
    depth: Option<usize>,
    size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    members: Option<BTreeSet<CanonicalName>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<BTreeMap<i32, usize>>,
}

fn capped<T: Ord>(set: BTreeSet<T>, limit: usize) -> Option<BTreeSet<T>> {
    (set.len() <= limit).then_some(set)
}

pub fn reach(
    ctx: &Context,
    package: Option<String>,
    maintainer: Option<String>,
    series: bool,
) -> Result<bool, AnyError> {
    let (snapshot, _) = ctx.load_snapshot()?;
    let graph = DepGraph::build(&snapshot);
    let depth = ctx.depth();

    let out = match (&package, &maintainer) {
        (Some(package), None) => {
            let name = canonical(package)?;
            if series {
                let series_map = graph.reach_series(name.as_str(), depth)?;
                let size = series_map.values().last().copied().unwrap_or(0);
                ReachOutput {
                    origin: name.to_string(),
                    kind: "package",
                    depth,
                    size,
                    members: None,
                    series: Some(series_map),
                }
            } else {
                let result = graph.package_reach(name.as_str(), depth)?;
                ReachOutput {
                    origin: result.origin,
                    kind: "package",
                    depth,
                    size: result.members.len(),
                    members: capped(result.members, ctx.globals.members_limit),
                    series: None,
                }
            }
        }
        (None, Some(email)) => {
            let result = graph.maintainer_reach(&email.to_lowercase(), depth)?;
            ReachOutput {
                origin: result.origin,
                kind: "maintainer",
                depth,
                size: result.members.len(),
                members: capped(result.members, ctx.globals.members_limit),
                series: None,
            }
        }
        _ => return Err("provide a package name or --maintainer EMAIL".into()),
    };

    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => match &out.series {
            Some(series) => {
                let rows: Vec<Vec<String>> = series
                    .iter()
                    .map(|(y, s)| vec![y.to_string(), s.to_string()])
                    .collect();
                csv_from_rows(&["year", "reach"], &rows)?;
            }
            None => {
                let rows: Vec<Vec<String>> = out
                    .members
                    .iter()
                    .flatten()
                    .map(|m| vec![m.to_string()])
                    .collect();
                csv_from_rows(&["member"], &rows)?;
            }
        },
        Format::Table => {
            let depth_str = out.depth.map_or("unbounded".to_owned(), |d| d.to_string());
            println!(
                "{} reach of {} (depth {}): {}",
                out.kind, out.origin, depth_str, out.size
            );
            if let Some(series) = &out.series {
                for (year, size) in series {
                    println!("  {year}: {size}");
                }
            } else if let Some(members) = &out.members {
                for member in members {
                    println!("  {member}");
                }
            }
        }
    }
    Ok(false)
}

#[derive(Serialize)]
struct TrustOutput {
    package: String,
    depth: Option<usize>,
    itp_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    itp: Option<BTreeSet<CanonicalName>>,
    itm_size: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    itm: Option<BTreeSet<String>>,
}

pub fn trust(ctx: &Context, package: &str) -> Result<bool, AnyError> {
    let (snapshot, _) = ctx.load_snapshot()?;
    let graph = DepGraph::build(&snapshot);
    let name = canonical(package)?;
    let depth = ctx.depth();
    let itp = graph.implicit_trust_packages(name.as_str(), depth)?;
    let itm = graph.implicit_trust_maintainers(name.as_str(), depth)?;
    let out = TrustOutput {
        package: name.to_string(),
        depth,
        itp_size: itp.len(),
        itp: capped(itp, ctx.globals.members_limit),
        itm_size: itm.len(),
        itm: capped(itm, ctx.globals.members_limit),
    };

    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => {
            let mut rows = Vec::new();
            for p in out.itp.iter().flatten() {
                rows.push(vec!["itp".to_owned(), p.to_string()]);
            }
            for m in out.itm.iter().flatten() {
                rows.push(vec!["itm".to_owned(), m.clone()]);
            }
            csv_from_rows(&["kind", "name"], &rows)?;
        }
        Format::Table => {
            println!(
                "{}: trusts {} packages and {} maintainers",
                out.package, out.itp_size, out.itm_size
            );
            if let Some(itp) = &out.itp {
                println!("implicitly trusted packages (ITP):");
                for p in itp {
                    println!("  {p}");
                }
            }
            if let Some(itm) = &out.itm {
                println!("implicitly trusted maintainers (ITM):");
                for m in itm {
                    println!("  {m}");
                }
            }
        }
    }
    Ok(false)
}

#[derive(Serialize)]
struct TopOutput {
    metric: Metric,
    k: usize,
    depth: Option<usize>,
    entries: Vec<TopEntry>,
}

#[derive(Serialize)]
struct TopEntry {
    key: String,
    size: usize,
}

pub fn top(ctx: &Context, metric: Metric, k: usize) -> Result<bool, AnyError> {
    let (snapshot, _) = ctx.load_snapshot()?;
    let graph = DepGraph::build(&snapshot);
    let entries: Vec<TopEntry> = graph
        .top_k(metric, k, ctx.depth())
        .into_iter()
        .map(|(key, size)| TopEntry { key, size })
        .collect();
    let out = TopOutput {
        metric,
        k,
        depth: ctx.depth(),
        entries,
    };

    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = out
                .entries
                .iter()
                .map(|e| vec![e.key.clone(), e.size.to_string()])
                .collect();
            csv_from_rows(&["key", "size"], &rows)?;
        }
        Format::Table => {
            for (rank, e) in out.entries.iter().enumerate() {
                println!("{:>3}. {:<40} {}", rank + 1, e.key, e.size);
            }
        }
    }
    Ok(false)
}

// ─── squat ──────────────────────────────────────────────────────────

pub fn squat(ctx: &Context) -> Result<bool, AnyError> {
    let (snapshot, _) = ctx.load_snapshot()?;
    let report = scan_all(&snapshot, &ctx.squat_config);
    let findings = report.offensive_count() > 0;

    match ctx.globals.format {
        Format::Json => emit_json(&report)?,
        Format::Csv => print!("{}", report.to_csv()),
        Format::Table => {
            println!(
                "{} candidates over {} packages",
                report.candidates.len(),
                snapshot.len()
            );
            for (rule, count) in &report.rule_counts {
                println!("  {rule}: {count}");
            }
            for (verdict, count) in &report.verdict_counts {
                println!("  {verdict}: {count}");
            }
            if !report.candidates.is_empty() {
                println!();
                println!(
                    "{:<28} {:<28} {:<20} {:>3}  {}",
                    "suspect", "target", "rule", "d", "verdict"
                );
                for c in &report.candidates {
                    println!(
                        "{:<28} {:<28} {:<20} {:>3}  {}",
                        c.suspect, c.target, c.rule.to_string(), c.distance, c.verdict
                    );
                }
            }
        }
    }
    Ok(findings)
}

// ─── license-check ──────────────────────────────────────────────────

#[derive(Serialize)]
struct PairCount {
    importer_license: LicenseId,
    dependency_license: LicenseId,
    count: u64,
}

#[derive(Serialize)]
struct LicenseOutput {
    direct: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    inherited: Option<Vec<Violation>>,
    /// Direct-violation tally per license pair (the "X importing Y" table).
    pair_counts: Vec<PairCount>,
    indeterminate_edges: u64,
}

pub fn license_check(ctx: &Context, transitive: bool) -> Result<bool, AnyError> {
    let (snapshot, _) = ctx.load_snapshot()?;
    let graph = DepGraph::build(&snapshot);
    let scan = find_violations_with(&graph, &snapshot, &ctx.aliases);
    let inherited = transitive.then(|| {
        transitive_violations_with(&graph, &snapshot, &scan.violations, ctx.depth(), &ctx.aliases)
    });

    let pair_counts: Vec<PairCount> = violation_pair_counts(&scan.violations)
        .into_iter()
        .map(|((importer_license, dependency_license), count)| PairCount {
            importer_license,
            dependency_license,
            count,
        })
        .collect();

    let findings =
        !scan.violations.is_empty() || inherited.as_ref().is_some_and(|i| !i.is_empty());
    let out = LicenseOutput {
        direct: scan.violations,
        inherited,
        pair_counts,
        indeterminate_edges: scan.indeterminate_edges,
    };

    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => {
            let mut all = out.direct.clone();
            if let Some(inherited) = &out.inherited {
                all.extend(inherited.iter().cloned());
            }
            print!("{}", pkgaudit_core::license::violations_to_csv(&all));
        }
        Format::Table => {
            println!("violation type x occurrences:");
            for pc in &out.pair_counts {
                println!(
                    "  {} importing {}  {}",
                    pc.importer_license, pc.dependency_license, pc.count
                );
            }
            println!("  (indeterminate edges: {})", out.indeterminate_edges);
            println!();
            println!("{} direct violations", out.direct.len());
            for v in &out.direct {
                println!(
                    "  {} ({}) -> {} ({})",
                    v.importer, v.importer_license, v.dependency, v.dependency_license
                );
            }
            if let Some(inherited) = &out.inherited {
                println!("{} inherited violations", inherited.len());
                for v in inherited {
                    let path: Vec<&str> = v.path.iter().map(|p| p.as_str()).collect();
                    println!(
                        "  {} ({}) inherits {} via {}",
                        v.importer,
                        v.importer_license,
                        v.dependency,
                        path.join(" -> ")
                    );
                }
            }
        }
    }
    Ok(findings)
}

// ─── advisories ─────────────────────────────────────────────────────

#[derive(Serialize)]
struct AdvisoryListRow {
    id: String,
    package: CanonicalName,
    published: NaiveDate,
    fixed: Option<NaiveDate>,
    severity: Option<f64>,
    cves: Vec<String>,
    affected_releases: usize,
    in_snapshot: bool,
}

#[derive(Serialize)]
struct AdvisoryListOutput {
    advisories: Vec<AdvisoryListRow>,
    records_skipped: usize,
}

#[derive(Serialize)]
struct TimelinePackageOutput {
    package: String,
    rows: Vec<pkgaudit_core::TimelineRow>,
}

#[derive(Serialize)]
struct ExposureRow {
    advisory: String,
    package: CanonicalName,
    exposed_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exposed: Option<BTreeSet<CanonicalName>>,
    by_domain: BTreeMap<String, u64>,
}

#[derive(Serialize)]
struct ExposureOutput {
    depth: Option<usize>,
    records: Vec<ExposureRow>,
}

#[derive(Serialize)]
struct LagOutput {
    advisories: Vec<pkgaudit_core::PatchLagSummary>,
    advisories_without_fix: Vec<String>,
    /// Pooled over every (advisory, dependent) pair with a fix date.
    mean_days: Option<f64>,
    patched: u64,
    unpatched: u64,
}

pub fn advisories(
    ctx: &Context,
    package: Option<String>,
    exposure: bool,
    lag: bool,
) -> Result<bool, AnyError> {
    let (snapshot, _) = ctx.load_snapshot()?;
    let set = ctx.load_advisories(&snapshot)?;
    let filter = package.map(|p| canonical(&p)).transpose()?;
    let selected: Vec<&pkgaudit_core::Advisory> = set
        .advisories
        .iter()
        .filter(|a| filter.as_ref().map_or(true, |f| a.package == *f))
        .collect();

    if exposure {
        let graph = DepGraph::build(&snapshot);
        let mut records = Vec::new();
        for advisory in &selected {
            if !snapshot.contains(advisory.package.as_str()) {
                continue;
            }
            let record = exposure_set(&graph, advisory, ctx.depth())?;
            let by_domain = exposure_by_domain(&snapshot, &record);
            records.push(ExposureRow {
                advisory: record.advisory,
                package: advisory.package.clone(),
                exposed_count: record.exposed.len(),
                exposed: capped(record.exposed, ctx.globals.members_limit),
                by_domain,
            });
        }
        let findings = records.iter().any(|r| r.exposed_count > 0);
        let out = ExposureOutput {
            depth: ctx.depth(),
            records,
        };
        match ctx.globals.format {
            Format::Json => emit_json(&out)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = out
                    .records
                    .iter()
                    .map(|r| {
                        vec![
                            r.advisory.clone(),
                            r.package.to_string(),
                            r.exposed_count.to_string(),
                        ]
                    })
                    .collect();
                csv_from_rows(&["advisory", "package", "exposed_count"], &rows)?;
            }
            Format::Table => {
                for r in &out.records {
                    println!("{} ({}): {} exposed packages", r.advisory, r.package, r.exposed_count);
                    for (domain, count) in &r.by_domain {
                        println!("    {domain}: {count}");
                    }
                }
            }
        }
        return Ok(findings);
    }

    if lag {
        let graph = DepGraph::build(&snapshot);
        let mut summaries = Vec::new();
        let mut without_fix = Vec::new();
        let (mut patched, mut unpatched, mut total_days) = (0u64, 0u64, 0u64);
        for advisory in &selected {
            if !snapshot.contains(advisory.package.as_str()) {
                continue;
            }
            if advisory.fixed.is_none() {
                without_fix.push(advisory.id.clone());
                continue;
            }
            let summary = mean_patch_lag(&snapshot, &graph, advisory)?;
            patched += summary.patched;
            unpatched += summary.unpatched;
            total_days += summary.per_dependent.values().flatten().sum::<u64>();
            summaries.push(summary);
        }
        let out = LagOutput {
            advisories: summaries,
            advisories_without_fix: without_fix,
            mean_days: (patched > 0).then(|| total_days as f64 / patched as f64),
            patched,
            unpatched,
        };
        match ctx.globals.format {
            Format::Json => emit_json(&out)?,
            Format::Csv => {
                let mut rows = Vec::new();
                for summary in &out.advisories {
                    for (dependent, lag) in &summary.per_dependent {
                        rows.push(vec![
                            summary.advisory.clone(),
                            dependent.to_string(),
                            lag.map(|d| d.to_string()).unwrap_or_default(),
                        ]);
                    }
                }
                csv_from_rows(&["advisory", "dependent", "lag_days"], &rows)?;
            }
            Format::Table => {
                for summary in &out.advisories {
                    let mean = summary
                        .mean_days
                        .map(|d| format!("{d:.1}"))
                        .unwrap_or_else(|| "-".to_owned());
                    println!(
                        "{}: mean lag {} days over {} patched dependents ({} unpatched)",
                        summary.advisory, mean, summary.patched, summary.unpatched
                    );
                }
                match out.mean_days {
                    Some(mean) => println!(
                        "overall: mean {mean:.1} days ({} patched, {} unpatched, {} advisories without fix)",
                        out.patched, out.unpatched, out.advisories_without_fix.len()
                    ),
                    None => println!("overall: no patched dependents"),
                }
            }
        }
        return Ok(false);
    }

    if let Some(name) = &filter {
        let rows = vulnerability_timeline(&snapshot, &set.advisories, name.as_str())?;
        let out = TimelinePackageOutput {
            package: name.to_string(),
            rows,
        };
        match ctx.globals.format {
            Format::Json => emit_json(&out)?,
            Format::Csv => {
                let rows: Vec<Vec<String>> = out
                    .rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.advisory.clone(),
                            r.published.to_string(),
                            r.fixed.map(|d| d.to_string()).unwrap_or_default(),
                            r.severity.map(|s| s.to_string()).unwrap_or_default(),
                            r.open_window_days.to_string(),
                        ]
                    })
                    .collect();
                csv_from_rows(
                    &["advisory", "published", "fixed", "severity", "open_window_days"],
                    &rows,
                )?;
            }
            Format::Table => {
                println!("vulnerability timeline for {}:", out.package);
                for r in &out.rows {
                    let fixed = r
                        .fixed
                        .map(|d| d.to_string())
                        .unwrap_or_else(|| "unfixed".to_owned());
                    let severity = r
                        .severity
                        .map(|s| format!("{s:.1}"))
                        .unwrap_or_else(|| "-".to_owned());
                    println!(
                        "  {}  published {}  fixed {}  severity {}  window {} days",
                        r.advisory, r.published, fixed, severity, r.open_window_days
                    );
                }
            }
        }
        return Ok(false);
    }

    let rows: Vec<AdvisoryListRow> = selected
        .iter()
        .map(|a| {
            let affected = if snapshot.contains(a.package.as_str()) {
                affected_releases(&snapshot, a).map(|r| r.len()).unwrap_or(0)
            } else {
                0
            };
            AdvisoryListRow {
                id: a.id.clone(),
                package: a.package.clone(),
                published: a.published,
                fixed: a.fixed,
                severity: a.severity,
                cves: a.cves.clone(),
                affected_releases: affected,
                in_snapshot: snapshot.contains(a.package.as_str()),
            }
        })
        .collect();
    let out = AdvisoryListOutput {
        advisories: rows,
        records_skipped: set.skipped.len(),
    };
    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = out
                .advisories
                .iter()
                .map(|r| {
                    vec![
                        r.id.clone(),
                        r.package.to_string(),
                        r.published.to_string(),
                        r.fixed.map(|d| d.to_string()).unwrap_or_default(),
                        r.severity.map(|s| s.to_string()).unwrap_or_default(),
                        r.affected_releases.to_string(),
                        r.in_snapshot.to_string(),
                    ]
                })
                .collect();
            csv_from_rows(
                &[
                    "id",
                    "package",
                    "published",
                    "fixed",
                    "severity",
                    "affected_releases",
                    "in_snapshot",
                ],
                &rows,
            )?;
        }
        Format::Table => {
            for r in &out.advisories {
                let fixed = r
                    .fixed
                    .map(|d| d.to_string())
                    .unwrap_or_else(|| "unfixed".to_owned());
                let marker = if r.in_snapshot { "" } else { "  [package not in snapshot]" };
                println!(
                    "{}  {}  published {}  fixed {}  {} affected releases{}",
                    r.id, r.package, r.published, fixed, r.affected_releases, marker
                );
            }
            if out.records_skipped > 0 {
                println!("({} malformed records skipped)", out.records_skipped);
            }
        }
    }
    Ok(false)
}

// ─── scan-setup ─────────────────────────────────────────────────────

#[derive(Serialize)]
struct ScanOutput {
    findings: Vec<ScriptFindings>,
    errors: Vec<pkgaudit_core::installscan::ScanIssue>,
    summary: CorpusSummary,
}

pub fn scan_setup(ctx: &Context, path: &Path) -> Result<bool, AnyError> {
    if !path.exists() {
        return Err(format!("{}: no such file or directory", path.display()).into());
    }
    let report = if path.is_file() {
        let bytes = std::fs::read(path)?;
        let mut findings = pkgaudit_core::scan_bytes(&bytes, &ctx.scan_config);
        findings.path = path.to_path_buf();
        pkgaudit_core::ScanTreeReport {
            findings: vec![findings],
            errors: Vec::new(),
        }
    } else {
        scan_tree(path, &ctx.scan_config)
    };
    let summary = corpus_summary(&report.findings);
    let findings_present = report.findings.iter().any(|f| !f.flags.is_empty());
    let out = ScanOutput {
        findings: report.findings,
        errors: report.errors,
        summary,
    };

    match ctx.globals.format {
        Format::Json => emit_json(&out)?,
        Format::Csv => print!("{}", pkgaudit_core::installscan::findings_to_csv(&out.findings)),
        Format::Table => {
            for f in &out.findings {
                println!("{} (risk {})", f.path.display(), f.risk_score);
                for flag in &f.flags {
                    println!("  line {:>4}  {:<20} {}", flag.line, flag.kind.to_string(), flag.detail);
                }
                if f.decode_warning {
                    println!("  (input was not valid UTF-8; decoded lossily)");
                }
            }
            for e in &out.errors {
                println!("{}: unreadable: {}", e.path.display(), e.error);
            }
            println!();
            println!(
                "{} scripts scanned, {} with findings",
                out.summary.scripts,
                out.findings.iter().filter(|f| !f.flags.is_empty()).count()
            );
            for (kind, count) in &out.summary.flag_script_counts {
                let fraction = out.summary.flag_fractions.get(kind).copied().unwrap_or(0.0);
                println!("  {kind}: {count} scripts ({:.1}%)", fraction * 100.0);
            }
            if !out.summary.top_imports.is_empty() {
                println!("top install-time imports:");
                for (module, count) in out.summary.top_imports.iter().take(15) {
                    println!("  {:>5}  {}", count, module);
                }
            }
        }
    }
    Ok(findings_present)
}
