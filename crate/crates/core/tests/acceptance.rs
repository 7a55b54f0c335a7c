//! Acceptance suite. Each test checks one release criterion at its
//! stated tolerance and prints a `ACCEPTANCE <name>: PASS` line; a
//! failing criterion fails its test.
//!
//! The graph-metric criteria are checked against an independent
//! boolean-bit-matrix transitive-closure oracle; the fuzzy-index
//! criterion against a naive pairwise Levenshtein scan.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::time::Instant;

use chrono::NaiveDate;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use pkgaudit_core::depgraph::{DepGraph, DepGraphBuilder};
use pkgaudit_core::snapshot::{
    canonical_name, parse_version, CanonicalName, PackageRecord, ReleaseRecord, Snapshot,
    SpecifierSet,
};
use pkgaudit_core::squat::{edit_distance, scan_all, FuzzyIndex, SquatConfig, SquatRule, Verdict};
use pkgaudit_core::{
    compatible, exposure_set, find_violations, patch_lag, scan_script, transitive_violations,
    vulnerability_timeline, Advisory, Compat, FlagKind, LicenseId, ScanConfig, ViolationKind,
};

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).unwrap()
}

fn name_of(i: usize) -> String {
    format!("pkg-{i:03}")
}

// ─── Bit-matrix closure oracle ──────────────────────────────────────

#[derive(Clone, PartialEq)]
struct BitMatrix {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BitMatrix {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64);
        BitMatrix {
            n,
            words,
            rows: vec![0; n * words],
        }
    }

    fn set(&mut self, i: usize, j: usize) {
        self.rows[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / 64] & (1 << (j % 64)) != 0
    }

    fn or(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (dst, src) in out.rows.iter_mut().zip(&other.rows) {
            *dst |= src;
        }
        out
    }

    /// Boolean product: out[i][j] = OR_k self[i][k] AND other[k][j].
    fn multiply(&self, other: &Self) -> Self {
        let mut out = BitMatrix::new(self.n);
        for i in 0..self.n {
            for k in 0..self.n {
                if self.get(i, k) {
                    let (dst, src) = (i * self.words, k * self.words);
                    for w in 0..self.words {
                        out.rows[dst + w] |= other.rows[src + w];
                    }
                }
            }
        }
        out
    }
}

/// Paths of length 1..=depth (depth None = unbounded).
fn closure(adj: &BitMatrix, depth: Option<usize>) -> BitMatrix {
    match depth {
        Some(d) => {
            let mut reach = adj.clone();
            for _ in 1..d {
                reach = adj.or(&adj.multiply(&reach));
            }
            reach
        }
        None => {
            let mut reach = adj.clone();
            loop {
                let next = reach.or(&reach.multiply(&reach));
                if next == reach {
                    return reach;
                }
                reach = next;
            }
        }
    }
}

// ─── Random graph suite ─────────────────────────────────────────────

struct TestGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    owners: Vec<Vec<String>>, // per node
    graph: DepGraph,
}

fn random_graphs() -> Vec<TestGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_2019);
    let densities = [0.004, 0.01, 0.02, 0.05, 0.1];
    (0..50)
        .map(|g| {
            let n = rng.gen_range(10..=200);
            let density = densities[g % densities.len()];
            let target_edges = ((n * n) as f64 * density).ceil() as usize;
            let mut edges = BTreeSet::new();
            for _ in 0..target_edges {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                if a != b {
                    edges.insert((a, b));
                }
            }
            // Stitch in a couple of guaranteed cycles.
            if n >= 4 {
                edges.insert((0, 1));
                edges.insert((1, 0));
                edges.insert((1, 2));
                edges.insert((2, 3));
                edges.insert((3, 1));
            }
            let edges: Vec<(usize, usize)> = edges.into_iter().collect();

            let email_count = (n / 3).max(1);
            let mut owners = vec![Vec::new(); n];
            let mut builder = DepGraphBuilder::new();
            for (i, owner_list) in owners.iter_mut().enumerate() {
                let node = canonical_name(&name_of(i)).unwrap();
                builder.node(node.clone());
                builder.first_release(node.clone(), date(2015, 1, 1));
                let primary = format!("m{}@example.org", i % email_count);
                builder.owner(&primary, node.clone());
                owner_list.push(primary);
                if i % 3 == 0 {
                    let secondary = format!("m{}@example.org", (i * 7 + 3) % email_count);
                    builder.owner(&secondary, node.clone());
                    if !owner_list.contains(&secondary) {
                        owner_list.push(secondary);
                    }
                }
            }
            for &(a, b) in &edges {
                builder.edge(
                    canonical_name(&name_of(a)).unwrap(),
                    canonical_name(&name_of(b)).unwrap(),
                );
            }
            builder.snapshot_date(date(2019, 12, 9));
            TestGraph {
                n,
                edges,
                owners,
                graph: builder.build(),
            }
        })
        .collect()
}

fn adjacency(tg: &TestGraph) -> BitMatrix {
    let mut adj = BitMatrix::new(tg.n);
    for &(a, b) in &tg.edges {
        adj.set(a, b);
    }
    adj
}

fn members_as_indices(members: &BTreeSet<CanonicalName>) -> BTreeSet<usize> {
    members
        .iter()
        .map(|m| m.as_str()[4..].parse::<usize>().unwrap())
        .collect()
}

#[test]
fn acceptance_graph_metric_oracle_equivalence() {
    let started = Instant::now();
    let graphs = random_graphs();
    let depths = [Some(1), Some(3), Some(5), None];

    for tg in &graphs {
        let adj = adjacency(tg);
        for depth in depths {
            let reach_oracle = closure(&adj, depth);
            for p in 0..tg.n {
                let got = members_as_indices(
                    &tg.graph.package_reach(&name_of(p), depth).unwrap().members,
                );
                let want: BTreeSet<usize> = (0..tg.n)
                    .filter(|&q| q != p && reach_oracle.get(q, p))
                    .collect();
                assert_eq!(got, want, "package_reach({p}, {depth:?})");

                let got_itp: BTreeSet<usize> = tg
                    .graph
                    .implicit_trust_packages(&name_of(p), depth)
                    .unwrap()
                    .iter()
                    .map(|m| m.as_str()[4..].parse::<usize>().unwrap())
                    .collect();
                let want_itp: BTreeSet<usize> = (0..tg.n)
                    .filter(|&q| q != p && reach_oracle.get(p, q))
                    .collect();
                assert_eq!(got_itp, want_itp, "itp({p}, {depth:?})");

                // ITM oracle: owners over ITP and self, minus own owners.
                let mut want_itm: BTreeSet<String> = BTreeSet::new();
                for &q in want_itp.iter().chain(std::iter::once(&p)) {
                    want_itm.extend(tg.owners[q].iter().cloned());
                }
                for own in &tg.owners[p] {
                    want_itm.remove(own);
                }
                let got_itm = tg
                    .graph
                    .implicit_trust_maintainers(&name_of(p), depth)
                    .unwrap();
                assert_eq!(got_itm, want_itm, "itm({p}, {depth:?})");
            }

            // Maintainer reach oracle: union of owned-package reaches
            // minus owned packages.
            let mut owned_by_email: BTreeMap<&str, BTreeSet<usize>> = BTreeMap::new();
            for (i, owner_list) in tg.owners.iter().enumerate() {
                for email in owner_list {
                    owned_by_email.entry(email).or_default().insert(i);
                }
            }
            for (email, owned) in owned_by_email {
                let mut want: BTreeSet<usize> = BTreeSet::new();
                for &x in &owned {
                    want.extend((0..tg.n).filter(|&q| reach_oracle.get(q, x)));
                }
                for x in &owned {
                    want.remove(x);
                }
                let got = members_as_indices(
                    &tg.graph.maintainer_reach(email, depth).unwrap().members,
                );
                assert_eq!(got, want, "maintainer_reach({email}, {depth:?})");
            }
        }
    }

    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "oracle equivalence took {elapsed:?}, budget is 10s"
    );
    println!(
        "ACCEPTANCE graph_metric_oracle_equivalence: PASS \
         (50 graphs, 4 depths, 4 metrics, {:.2?})",
        elapsed
    );
}

#[test]
fn acceptance_duality_property() {
    let graphs = random_graphs();
    let mut pairs_checked = 0usize;
    for tg in &graphs {
        let reach: Vec<BTreeSet<usize>> = (0..tg.n)
            .map(|p| {
                members_as_indices(&tg.graph.package_reach(&name_of(p), None).unwrap().members)
            })
            .collect();
        let itp: Vec<BTreeSet<usize>> = (0..tg.n)
            .map(|q| {
                tg.graph
                    .implicit_trust_packages(&name_of(q), None)
                    .unwrap()
                    .iter()
                    .map(|m| m.as_str()[4..].parse::<usize>().unwrap())
                    .collect()
            })
            .collect();
        for p in 0..tg.n {
            for q in 0..tg.n {
                assert_eq!(
                    reach[p].contains(&q),
                    itp[q].contains(&p),
                    "duality violated for p={p}, q={q}"
                );
                pairs_checked += 1;
            }
        }
    }
    println!("ACCEPTANCE duality_property: PASS ({pairs_checked} ordered pairs, 0 exceptions)");
}

// ─── Fuzzy index ────────────────────────────────────────────────────

fn random_canonical_name(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize) -> CanonicalName {
    loop {
        let len = rng.gen_range(min_len..=max_len);
        let raw: String = (0..len)
            .map(|i| {
                let roll = rng.gen_range(0u32..100);
                if roll < 8 && i > 0 && i + 1 < len {
                    '-'
                } else if roll < 30 {
                    char::from(b'0' + rng.gen_range(0u8..10))
                } else {
                    char::from(b'a' + rng.gen_range(0u8..26))
                }
            })
            .collect();
        if let Ok(name) = canonical_name(&raw) {
            if name.as_str().len() >= min_len {
                return name;
            }
        }
    }
}

#[test]
fn acceptance_fuzzy_index_correctness() {
    // Exactness on 500 random names, lengths 3..=30.
    let mut rng = ChaCha8Rng::seed_from_u64(0xf022);
    let mut names: BTreeSet<CanonicalName> = BTreeSet::new();
    while names.len() < 500 {
        names.insert(random_canonical_name(&mut rng, 3, 30));
    }
    let names: Vec<CanonicalName> = names.into_iter().collect();
    let index = FuzzyIndex::build(names.clone(), 3);
    for d in 1..=3 {
        let mut naive = Vec::new();
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                let dist = edit_distance(names[i].as_str(), names[j].as_str());
                if dist >= 1 && dist <= d {
                    naive.push((names[i].clone(), names[j].clone(), dist));
                }
            }
        }
        naive.sort();
        assert_eq!(index.all_pairs(d), naive, "all_pairs({d}) differs from naive scan");
    }

    // Throughput: index-based all-pairs over 50k synthetic names < 60s.
    let stems = [
        "data", "cloud", "py", "dev", "net", "json", "http", "auth", "test", "util", "core",
        "async", "fast", "micro", "meta", "open", "smart", "deep", "web", "api", "task", "flow",
        "grid", "lab", "bot", "kit", "hub", "log", "sync", "cache", "queue", "form", "text",
        "time", "geo", "mail", "file", "code", "safe", "pack",
    ];
    let mut synthetic: BTreeSet<CanonicalName> = BTreeSet::new();
    let mut counter = 0usize;
    while synthetic.len() < 50_000 {
        let a = stems[rng.gen_range(0..stems.len())];
        let b = stems[rng.gen_range(0..stems.len())];
        let raw = match rng.gen_range(0u32..5) {
            0 => format!("{a}{b}"),
            1 => format!("{a}-{b}"),
            2 => format!("{a}-{b}{}", rng.gen_range(0..100)),
            3 => format!("{a}{b}{}", counter % 977),
            _ => format!(
                "{a}-{b}-{}",
                stems[rng.gen_range(0..stems.len())]
            ),
        };
        counter += 1;
        if let Ok(name) = canonical_name(&raw) {
            synthetic.insert(name);
        }
    }
    let started = Instant::now();
    let big_index = FuzzyIndex::build(synthetic.into_iter().collect::<Vec<_>>(), 3);
    let pairs = big_index.all_pairs(3);
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "50k all-pairs took {elapsed:?}, budget is 60s"
    );
    println!(
        "ACCEPTANCE fuzzy_index_correctness: PASS \
         (500-name oracle exact at d=1..3; 50k names -> {} pairs in {:.2?})",
        pairs.len(),
        elapsed
    );
}

// ─── Squat regression pairs ─────────────────────────────────────────

struct FixturePackage {
    name: &'static str,
    downloads: Option<u64>,
    maintainers: &'static [&'static str],
    description: &'static str,
}

fn squat_fixture_snapshot(packages: &[FixturePackage]) -> Snapshot {
    let mut map = BTreeMap::new();
    for (i, p) in packages.iter().enumerate() {
        let cname = canonical_name(p.name).unwrap();
        let mut record = PackageRecord::new(cname.clone());
        record.downloads = p.downloads;
        record.maintainers = p.maintainers.iter().map(|m| m.to_string()).collect();
        record.description = p.description.to_owned();
        record.releases = vec![ReleaseRecord {
            version: parse_version("1.0").unwrap(),
            date: date(2016, 1, 1) + chrono::Days::new(i as u64),
            requires: Vec::new(),
        }];
        map.insert(cname, record);
    }
    Snapshot {
        packages: map,
        snapshot_date: date(2019, 12, 9),
    }
}

#[test]
fn acceptance_paper_pair_regression() {
    let pkg = |name, downloads| FixturePackage {
        name,
        downloads: Some(downloads),
        maintainers: &[],
        description: "",
    };
    let snapshot = squat_fixture_snapshot(&[
        pkg("numpy", 1_000_000),
        pkg("numpi", 10),
        pkg("jellyfish", 300_000),
        pkg("JelIyfish", 500), // canonicalizes to jeliyfish
        pkg("test-vision-client", 40_000),
        pkg("client-vision-test", 25),
        pkg("aws-cli", 800_000),
        pkg("awscli", 790_000),
        pkg("python-dateutil", 2_000_000),
        pkg("python3-dateutil", 2_300),
        pkg("subprocess", 900),
    ]);
    let report = scan_all(&snapshot, &SquatConfig::default());

    let has_pair = |a: &str, b: &str, rule: SquatRule, dist: Option<usize>| {
        report.candidates.iter().any(|c| {
            c.rule == rule
                && dist.map_or(true, |d| c.distance == d)
                && ((c.suspect.as_str() == a && c.target.as_str() == b)
                    || (c.suspect.as_str() == b && c.target.as_str() == a))
        })
    };

    assert!(has_pair("numpi", "numpy", SquatRule::EditDistance, Some(1)));
    assert!(has_pair("jeliyfish", "jellyfish", SquatRule::EditDistance, Some(1)));
    assert!(has_pair(
        "test-vision-client",
        "client-vision-test",
        SquatRule::WordReorder,
        None
    ));
    assert!(has_pair("aws-cli", "awscli", SquatRule::SeparatorCollapse, None));
    assert!(has_pair(
        "python3-dateutil",
        "python-dateutil",
        SquatRule::VersionSuffix,
        None
    ));
    assert!(report
        .candidates
        .iter()
        .any(|c| c.rule == SquatRule::BuiltinShadow && c.suspect.as_str() == "subprocess"));

    println!("ACCEPTANCE paper_pair_regression: PASS (all 6 pairs detected with stated rules)");
}

#[test]
fn acceptance_defensive_classification() {
    let snapshot = squat_fixture_snapshot(&[
        FixturePackage {
            name: "simple-crypt",
            downloads: Some(168_031),
            maintainers: &["owner@crypt.example"],
            description: "Simple encryption",
        },
        FixturePackage {
            name: "simplecrypt",
            downloads: Some(6_934),
            maintainers: &["owner@crypt.example"],
            description: "Reserved spelling",
        },
        FixturePackage {
            name: "python-vagrant",
            downloads: Some(40_000),
            maintainers: &["author@vagrant.example"],
            description: "Python bindings for vagrant",
        },
        FixturePackage {
            name: "pythonvagrant",
            downloads: Some(120),
            maintainers: &["guardian@watch.example"],
            description: "Did you mean to install python-vagrant instead?",
        },
    ]);
    let report = scan_all(&snapshot, &SquatConfig::default());

    let verdict = |suspect: &str| {
        report
            .candidates
            .iter()
            .find(|c| c.suspect.as_str() == suspect)
            .map(|c| c.verdict)
            .unwrap_or_else(|| panic!("no candidate with suspect {suspect}"))
    };
    assert_eq!(verdict("simplecrypt"), Verdict::Defensive);
    assert_eq!(verdict("pythonvagrant"), Verdict::WarningStub);

    println!(
        "ACCEPTANCE defensive_classification: PASS (shared-maintainer -> DEFENSIVE, \
         warning text -> WARNING_STUB)"
    );
}

// ─── License matrix and inheritance ─────────────────────────────────

#[test]
fn acceptance_license_matrix() {
    let permissive = [LicenseId::Mit, LicenseId::Bsd, LicenseId::Apache2];
    let protective = [LicenseId::Gpl3, LicenseId::Lgpl3];
    for importer in permissive {
        for dep in protective {
            assert_eq!(
                compatible(importer, dep),
                Compat::Violation,
                "{importer} importing {dep}"
            );
            assert_eq!(
                compatible(dep, importer),
                Compat::Ok,
                "{dep} importing {importer}"
            );
        }
    }

    // Genie/restview shape: one Apache package importing a GPLv3 package,
    // with three packages reaching the importer.
    let mut packages = BTreeMap::new();
    let mut add = |name: &str, license: &str, requires: &[&str]| {
        let cname = canonical_name(name).unwrap();
        let mut record = PackageRecord::new(cname.clone());
        record.license_text = license.to_owned();
        record.releases = vec![ReleaseRecord {
            version: parse_version("1.0").unwrap(),
            date: date(2018, 1, 1),
            requires: requires
                .iter()
                .map(|r| (canonical_name(r).unwrap(), SpecifierSet::any()))
                .collect(),
        }];
        packages.insert(cname, record);
    };
    add("genie", "Apache 2.0", &["restview"]);
    add("restview", "GPLv3", &[]);
    add("robot-helper", "Apache 2.0", &["genie"]);
    add("ci-runner", "Apache 2.0", &["genie"]);
    add("release-bot", "Apache 2.0", &["ci-runner"]);
    let snapshot = Snapshot {
        packages,
        snapshot_date: date(2019, 12, 9),
    };
    let graph = DepGraph::build(&snapshot);

    let reach = graph.package_reach("genie", None).unwrap().size();
    assert_eq!(reach, 3);
    let scan = find_violations(&graph, &snapshot);
    assert_eq!(scan.violations.len(), 1, "exactly one direct violation");
    assert_eq!(scan.violations[0].kind, ViolationKind::Direct);
    let inherited = transitive_violations(&graph, &snapshot, &scan.violations, None);
    assert_eq!(inherited.len(), 3, "inherited count equals importer reach");
    assert!(inherited.iter().all(|v| v.kind == ViolationKind::Inherited
        && v.dependency.as_str() == "restview"
        && v.path.len() >= 3));

    println!(
        "ACCEPTANCE license_matrix: PASS (6 violation types + reverses OK; \
         genie-shaped fixture: 1 direct + 3 inherited)"
    );
}

// ─── Advisory math ──────────────────────────────────────────────────

#[test]
fn acceptance_advisory_math() {
    // Attack window: published 2015-01-01, fixed 2018-02-01 -> 1127 days.
    let core_name = canonical_name("webframework").unwrap();
    let mut core_rec = PackageRecord::new(core_name.clone());
    core_rec.releases = vec![ReleaseRecord {
        version: parse_version("1.8.9").unwrap(),
        date: date(2014, 6, 1),
        requires: Vec::new(),
    }];
    let dep_name = canonical_name("site").unwrap();
    let mut dep_rec = PackageRecord::new(dep_name.clone());
    dep_rec.releases = vec![
        ReleaseRecord {
            version: parse_version("0.9").unwrap(),
            date: date(2016, 5, 1),
            requires: vec![(core_name.clone(), SpecifierSet::any())],
        },
        ReleaseRecord {
            version: parse_version("1.0").unwrap(),
            date: date(2017, 2, 1),
            requires: vec![(core_name.clone(), SpecifierSet::any())],
        },
    ];
    let snapshot = Snapshot {
        packages: [
            (core_name.clone(), core_rec),
            (dep_name.clone(), dep_rec),
        ]
        .into(),
        snapshot_date: date(2019, 12, 9),
    };

    let window_advisory = Advisory {
        id: "WINDOW".to_owned(),
        package: core_name.clone(),
        affected: SpecifierSet::parse("<1.8.10").unwrap(),
        cves: Vec::new(),
        severity: Some(9.8),
        published: date(2015, 1, 1),
        fixed: Some(date(2018, 2, 1)),
    };
    let rows = vulnerability_timeline(
        &snapshot,
        std::slice::from_ref(&window_advisory),
        "webframework",
    )
    .unwrap();
    assert_eq!(rows[0].open_window_days, 1127);
    assert!(rows[0].open_window_days > 3 * 365, "window exceeds 3 years");

    // Patch lag: fix 2017-01-01, dependent releases 2017-02-01 -> 31.
    let lag_advisory = Advisory {
        id: "LAG".to_owned(),
        fixed: Some(date(2017, 1, 1)),
        published: date(2016, 11, 1),
        ..window_advisory.clone()
    };
    assert_eq!(patch_lag(&snapshot, &lag_advisory, "site").unwrap(), Some(31));

    // Exposure monotonicity across the random graph suite.
    let graphs = random_graphs();
    for tg in &graphs {
        let advisory = Advisory {
            id: "EXP".to_owned(),
            package: canonical_name(&name_of(0)).unwrap(),
            affected: SpecifierSet::any(),
            cves: Vec::new(),
            severity: None,
            published: date(2016, 1, 1),
            fixed: None,
        };
        let mut last: BTreeSet<CanonicalName> = BTreeSet::new();
        for depth in [Some(1), Some(2), Some(3), Some(5), None] {
            let exposed = exposure_set(&tg.graph, &advisory, depth).unwrap().exposed;
            assert!(
                last.is_subset(&exposed),
                "exposure shrank when depth grew ({depth:?})"
            );
            last = exposed;
        }
    }

    println!(
        "ACCEPTANCE advisory_math: PASS (window=1127d, lag=31d, exposure monotone over 50 graphs)"
    );
}

// ─── Scanner exploit corpus ─────────────────────────────────────────

#[test]
fn acceptance_scanner_exploit_corpus() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scanner");
    let config = ScanConfig::default();

    let mut fixtures: Vec<PathBuf> = std::fs::read_dir(&dir)
        .expect("fixture dir")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "py"))
        .collect();
    fixtures.sort();
    assert!(
        fixtures.len() >= 10,
        "corpus must hold at least 10 fixtures, found {}",
        fixtures.len()
    );

    let mut matched = 0usize;
    for fixture in &fixtures {
        let source = std::fs::read_to_string(fixture).unwrap();
        let expected_path = fixture.with_extension("expected");
        let expected: BTreeSet<FlagKind> = std::fs::read_to_string(&expected_path)
            .unwrap_or_else(|_| panic!("missing sidecar {expected_path:?}"))
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| match l {
                "IMPORT_AT_INSTALL" => FlagKind::ImportAtInstall,
                "DANGEROUS_IMPORT" => FlagKind::DangerousImport,
                "NON_SETUP_CALL" => FlagKind::NonSetupCall,
                "CMDCLASS_OVERRIDE" => FlagKind::CmdclassOverride,
                "NETWORK_AT_INSTALL" => FlagKind::NetworkAtInstall,
                "OBFUSCATED_EXEC" => FlagKind::ObfuscatedExec,
                other => panic!("unknown flag kind {other:?} in {expected_path:?}"),
            })
            .collect();
        let findings = scan_script(&source, &config);
        assert_eq!(
            findings.kinds(),
            expected,
            "flag mismatch for {:?}: flags {:?}",
            fixture.file_name().unwrap(),
            findings.flags
        );
        matched += 1;
    }

    // The two headline reproductions and the clean baseline.
    let shell = std::fs::read_to_string(dir.join("01_post_install_reverse_shell.py")).unwrap();
    let kinds = scan_script(&shell, &config).kinds();
    for required in [
        FlagKind::CmdclassOverride,
        FlagKind::NetworkAtInstall,
        FlagKind::DangerousImport,
    ] {
        assert!(kinds.contains(&required), "reverse shell must raise {required}");
    }
    let decomp = std::fs::read_to_string(dir.join("02_exec_decompress.py")).unwrap();
    let kinds = scan_script(&decomp, &config).kinds();
    for required in [FlagKind::ObfuscatedExec, FlagKind::NonSetupCall] {
        assert!(kinds.contains(&required), "exec-decompress must raise {required}");
    }
    let clean = std::fs::read_to_string(dir.join("03_minimal_clean.py")).unwrap();
    assert!(scan_script(&clean, &config).flags.is_empty());

    println!(
        "ACCEPTANCE scanner_exploit_corpus: PASS ({matched}/{} fixtures match expected flags)",
        fixtures.len()
    );
}
