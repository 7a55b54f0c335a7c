//! Dependency and ownership graphs.
//!
//! Two relations over one node set: package→package edges taken from each
//! package's latest release, and maintainer↔package ownership. On top of
//! them sit the four trust metrics:
//!
//! * package reach — packages that require the origin, directly or
//!   transitively;
//! * maintainer reach — the union of the reaches of a maintainer's
//!   packages, minus the packages they own;
//! * implicitly trusted packages (ITP) — the transitive dependency set an
//!   install of the origin pulls in;
//! * implicitly trusted maintainers (ITM) — owners of anything in the ITP.
//!
//! Traversals are breadth-first with a visited set, so cycles terminate
//! and each node counts once. The default depth bound is
//! [`DEFAULT_DEPTH`]; passing `None` removes the bound.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::AuditError;
use crate::snapshot::{CanonicalName, Snapshot};

/// Depth bound used by the CLI and the headline metrics.
pub const DEFAULT_DEPTH: usize = 5;

fn epoch() -> NaiveDate {
    NaiveDate::from_ymd_opt(1970, 1, 1).expect("valid date")
}

#[derive(Debug, Clone)]
pub struct DepGraph {
    names: Vec<CanonicalName>,
    index: HashMap<CanonicalName, u32>,
    forward: Vec<Vec<u32>>,
    reverse: Vec<Vec<u32>>,
    /// Date each forward edge first existed: the earliest release of the
    /// source whose requirements name the target. Removals in between are
    /// ignored; an edge present in the latest release is treated as
    /// continuous since its first mention.
    edge_date: HashMap<(u32, u32), NaiveDate>,
    first_release: Vec<Option<NaiveDate>>,
    owned_by: Vec<BTreeSet<String>>,
    owners: BTreeMap<String, Vec<u32>>,
    /// Latest-release dependency targets absent from the snapshot; kept
    /// out of adjacency but reported.
    dangling: BTreeMap<CanonicalName, BTreeSet<CanonicalName>>,
    snapshot_date: NaiveDate,
}

/// Result of a reach query. `members` excludes the origin package (and,
/// for maintainer reach, every package the maintainer owns).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReachResult {
    pub origin: String,
    pub depth: Option<usize>,
    pub members: BTreeSet<CanonicalName>,
}

impl ReachResult {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    PackageReach,
    MaintainerReach,
    Itp,
    Itm,
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "package-reach" | "package_reach" | "reach" => Ok(Metric::PackageReach),
            "maintainer-reach" | "maintainer_reach" => Ok(Metric::MaintainerReach),
            "itp" => Ok(Metric::Itp),
            "itm" => Ok(Metric::Itm),
            other => Err(format!(
                "unknown metric {other:?} (expected package-reach, maintainer-reach, itp or itm)"
            )),
        }
    }
}

impl DepGraph {
    /// Build both graphs from a snapshot. Dependencies come from each
    /// package's latest release; duplicate targets collapse to one edge,
    /// self-loops are dropped, unknown targets go to the dangling report.
    pub fn build(snapshot: &Snapshot) -> DepGraph {
        let names: Vec<CanonicalName> = snapshot.packages.keys().cloned().collect();
        let index: HashMap<CanonicalName, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        let n = names.len();

        let mut forward: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut edge_date = HashMap::new();
        let mut first_release = vec![None; n];
        let mut owned_by = vec![BTreeSet::new(); n];
        let mut owners: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut dangling: BTreeMap<CanonicalName, BTreeSet<CanonicalName>> = BTreeMap::new();

        for (name, record) in &snapshot.packages {
            let from = index[name];
            first_release[from as usize] = record.first_release_date();
            for email in &record.maintainers {
                owned_by[from as usize].insert(email.clone());
                owners.entry(email.clone()).or_default().push(from);
            }
            let Some(latest) = record.latest_release() else {
                continue;
            };
            for (target, _) in &latest.requires {
                if target == name {
                    continue;
                }
                let Some(&to) = index.get(target) else {
                    dangling
                        .entry(name.clone())
                        .or_default()
                        .insert(target.clone());
                    continue;
                };
                if edge_date.contains_key(&(from, to)) {
                    continue;
                }
                // Releases are date-sorted, so the first mention wins.
                let born = record
                    .releases
                    .iter()
                    .find(|r| r.requires.iter().any(|(t, _)| t == target))
                    .map(|r| r.date)
                    .unwrap_or_else(epoch);
                edge_date.insert((from, to), born);
                forward[from as usize].push(to);
                reverse[to as usize].push(from);
            }
        }

        for adj in forward.iter_mut().chain(reverse.iter_mut()) {
            adj.sort_unstable();
            adj.dedup();
        }
        for packages in owners.values_mut() {
            packages.sort_unstable();
            packages.dedup();
        }

        DepGraph {
            names,
            index,
            forward,
            reverse,
            edge_date,
            first_release,
            owned_by,
            owners,
            dangling,
            snapshot_date: snapshot.snapshot_date,
        }
    }

    pub fn package_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.forward.iter().map(Vec::len).sum()
    }

    pub fn packages(&self) -> impl Iterator<Item = &CanonicalName> {
        self.names.iter()
    }

    pub fn maintainers(&self) -> impl Iterator<Item = &str> {
        self.owners.keys().map(String::as_str)
    }

    pub fn dangling(&self) -> &BTreeMap<CanonicalName, BTreeSet<CanonicalName>> {
        &self.dangling
    }

    pub fn snapshot_date(&self) -> NaiveDate {
        self.snapshot_date
    }

    fn id_of(&self, package: &str) -> Result<u32, AuditError> {
        self.index
            .get(package)
            .copied()
            .ok_or_else(|| AuditError::UnknownPackage(package.to_owned()))
    }

    pub fn dependencies_of(&self, package: &str) -> Result<BTreeSet<&CanonicalName>, AuditError> {
        let id = self.id_of(package)?;
        Ok(self.forward[id as usize]
            .iter()
            .map(|&i| &self.names[i as usize])
            .collect())
    }

    pub fn dependents_of(&self, package: &str) -> Result<BTreeSet<&CanonicalName>, AuditError> {
        let id = self.id_of(package)?;
        Ok(self.reverse[id as usize]
            .iter()
            .map(|&i| &self.names[i as usize])
            .collect())
    }

    pub fn owners_of(&self, package: &str) -> Result<&BTreeSet<String>, AuditError> {
        let id = self.id_of(package)?;
        Ok(&self.owned_by[id as usize])
    }

    pub fn packages_of(&self, email: &str) -> Result<Vec<&CanonicalName>, AuditError> {
        let ids = self
            .owners
            .get(email)
            .ok_or_else(|| AuditError::UnknownMaintainer(email.to_owned()))?;
        Ok(ids.iter().map(|&i| &self.names[i as usize]).collect())
    }

    /// Multi-source BFS. Returns every node visited within `depth` hops,
    /// sources excluded.
    fn bfs(&self, sources: &[u32], adj: &[Vec<u32>], depth: Option<usize>) -> Vec<u32> {
        let mut visited = vec![false; self.names.len()];
        let mut queue = VecDeque::new();
        for &s in sources {
            if !visited[s as usize] {
                visited[s as usize] = true;
                queue.push_back((s, 0usize));
            }
        }
        let mut out = Vec::new();
        while let Some((node, dist)) = queue.pop_front() {
            if depth.is_some_and(|d| dist >= d) {
                continue;
            }
            for &next in &adj[node as usize] {
                if !visited[next as usize] {
                    visited[next as usize] = true;
                    out.push(next);
                    queue.push_back((next, dist + 1));
                }
            }
        }
        out
    }

    fn names_of(&self, ids: impl IntoIterator<Item = u32>) -> BTreeSet<CanonicalName> {
        ids.into_iter()
            .map(|i| self.names[i as usize].clone())
            .collect()
    }

    /// Packages that require `package` directly or transitively, within
    /// `depth` hops (`None` = unbounded). The origin is excluded even
    /// when a cycle makes it reachable from itself.
    pub fn package_reach(
        &self,
        package: &str,
        depth: Option<usize>,
    ) -> Result<ReachResult, AuditError> {
        let id = self.id_of(package)?;
        let members = self.bfs(&[id], &self.reverse, depth);
        Ok(ReachResult {
            origin: package.to_owned(),
            depth,
            members: self.names_of(members),
        })
    }

    /// Union of the reaches of every package `email` owns, minus the
    /// owned packages themselves.
    pub fn maintainer_reach(
        &self,
        email: &str,
        depth: Option<usize>,
    ) -> Result<ReachResult, AuditError> {
        let owned = self
            .owners
            .get(email)
            .ok_or_else(|| AuditError::UnknownMaintainer(email.to_owned()))?;
        let owned_set: BTreeSet<u32> = owned.iter().copied().collect();
        let members = self
            .bfs(owned, &self.reverse, depth)
            .into_iter()
            .filter(|i| !owned_set.contains(i));
        Ok(ReachResult {
            origin: email.to_owned(),
            depth,
            members: self.names_of(members),
        })
    }

    /// Distinct packages reachable through forward edges: everything an
    /// install of `package` implicitly trusts.
    pub fn implicit_trust_packages(
        &self,
        package: &str,
        depth: Option<usize>,
    ) -> Result<BTreeSet<CanonicalName>, AuditError> {
        let id = self.id_of(package)?;
        Ok(self.names_of(self.bfs(&[id], &self.forward, depth)))
    }

    /// Maintainers owning the package or anything in its ITP, minus the
    /// package's own maintainers.
    pub fn implicit_trust_maintainers(
        &self,
        package: &str,
        depth: Option<usize>,
    ) -> Result<BTreeSet<String>, AuditError> {
        let id = self.id_of(package)?;
        let mut emails = BTreeSet::new();
        emails.extend(self.owned_by[id as usize].iter().cloned());
        for node in self.bfs(&[id], &self.forward, depth) {
            emails.extend(self.owned_by[node as usize].iter().cloned());
        }
        for own in &self.owned_by[id as usize] {
            emails.remove(own);
        }
        Ok(emails)
    }

    /// Reach of `package` recomputed per calendar year, from its first
    /// release to the snapshot year. Year `Y` sees only edges born on or
    /// before Dec 31 of `Y` between packages first released by then.
    pub fn reach_series(
        &self,
        package: &str,
        depth: Option<usize>,
    ) -> Result<BTreeMap<i32, usize>, AuditError> {
        let id = self.id_of(package)?;
        let mut series = BTreeMap::new();
        let Some(first) = self.first_release[id as usize] else {
            return Ok(series);
        };
        for year in first.year()..=self.snapshot_date.year() {
            let cutoff = NaiveDate::from_ymd_opt(year, 12, 31).expect("valid date");
            series.insert(year, self.reach_at(id, depth, cutoff));
        }
        Ok(series)
    }

    /// Reverse BFS restricted to the subgraph existing at `cutoff`.
    fn reach_at(&self, start: u32, depth: Option<usize>, cutoff: NaiveDate) -> usize {
        let mut visited = vec![false; self.names.len()];
        visited[start as usize] = true;
        let mut queue = VecDeque::new();
        queue.push_back((start, 0usize));
        let mut count = 0usize;
        while let Some((node, dist)) = queue.pop_front() {
            if depth.is_some_and(|d| dist >= d) {
                continue;
            }
            for &dep in &self.reverse[node as usize] {
                if visited[dep as usize] {
                    continue;
                }
                let born = self.edge_date[&(dep, node)];
                let existed = self.first_release[dep as usize].is_some_and(|f| f <= cutoff);
                if born <= cutoff && existed {
                    visited[dep as usize] = true;
                    count += 1;
                    queue.push_back((dep, dist + 1));
                }
            }
        }
        count
    }

    /// Rank packages (or maintainers) by a metric, descending; ties break
    /// lexicographically. `k` larger than the key space returns everything.
    pub fn top_k(&self, metric: Metric, k: usize, depth: Option<usize>) -> Vec<(String, usize)> {
        let mut ranked: Vec<(String, usize)> = match metric {
            Metric::PackageReach => (0..self.names.len() as u32)
                .into_par_iter()
                .map(|id| {
                    let size = self.bfs(&[id], &self.reverse, depth).len();
                    (self.names[id as usize].to_string(), size)
                })
                .collect(),
            Metric::Itp => (0..self.names.len() as u32)
                .into_par_iter()
                .map(|id| {
                    let size = self.bfs(&[id], &self.forward, depth).len();
                    (self.names[id as usize].to_string(), size)
                })
                .collect(),
            Metric::Itm => self
                .names
                .par_iter()
                .map(|name| {
                    let size = self
                        .implicit_trust_maintainers(name.as_str(), depth)
                        .expect("known package")
                        .len();
                    (name.to_string(), size)
                })
                .collect(),
            Metric::MaintainerReach => self
                .owners
                .par_iter()
                .map(|(email, _)| {
                    let size = self
                        .maintainer_reach(email, depth)
                        .expect("known maintainer")
                        .size();
                    (email.clone(), size)
                })
                .collect(),
        };
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(k);
        ranked
    }
}

/// Direct graph construction for callers that do not start from a
/// snapshot (tests, benchmarks, other front ends).
#[derive(Debug, Default)]
pub struct DepGraphBuilder {
    nodes: BTreeSet<CanonicalName>,
    edges: BTreeMap<(CanonicalName, CanonicalName), Option<NaiveDate>>,
    owners: BTreeMap<String, BTreeSet<CanonicalName>>,
    first_release: BTreeMap<CanonicalName, NaiveDate>,
    snapshot_date: Option<NaiveDate>,
}

impl DepGraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(&mut self, name: CanonicalName) -> &mut Self {
        self.nodes.insert(name);
        self
    }

    /// Add a dependency edge; self-loops are ignored.
    pub fn edge(&mut self, from: CanonicalName, to: CanonicalName) -> &mut Self {
        self.dated_edge(from, to, None)
    }

    pub fn dated_edge(
        &mut self,
        from: CanonicalName,
        to: CanonicalName,
        date: Option<NaiveDate>,
    ) -> &mut Self {
        if from != to {
            self.nodes.insert(from.clone());
            self.nodes.insert(to.clone());
            self.edges.entry((from, to)).or_insert(date);
        }
        self
    }

    pub fn owner(&mut self, email: &str, package: CanonicalName) -> &mut Self {
        self.nodes.insert(package.clone());
        self.owners
            .entry(email.to_lowercase())
            .or_default()
            .insert(package);
        self
    }

    pub fn first_release(&mut self, package: CanonicalName, date: NaiveDate) -> &mut Self {
        self.nodes.insert(package.clone());
        self.first_release.insert(package, date);
        self
    }

    pub fn snapshot_date(&mut self, date: NaiveDate) -> &mut Self {
        self.snapshot_date = Some(date);
        self
    }

    pub fn build(&self) -> DepGraph {
        let names: Vec<CanonicalName> = self.nodes.iter().cloned().collect();
        let index: HashMap<CanonicalName, u32> = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i as u32))
            .collect();
        let n = names.len();
        let mut forward: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut reverse: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut edge_date = HashMap::new();
        let mut first_release = vec![None; n];
        for (name, date) in &self.first_release {
            first_release[index[name] as usize] = Some(*date);
        }
        for ((from, to), date) in &self.edges {
            let (f, t) = (index[from], index[to]);
            forward[f as usize].push(t);
            reverse[t as usize].push(f);
            let born = date
                .or(first_release[f as usize])
                .unwrap_or_else(epoch);
            edge_date.insert((f, t), born);
        }
        for adj in forward.iter_mut().chain(reverse.iter_mut()) {
            adj.sort_unstable();
        }
        let mut owned_by = vec![BTreeSet::new(); n];
        let mut owners: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        for (email, packages) in &self.owners {
            for package in packages {
                let id = index[package];
                owned_by[id as usize].insert(email.clone());
                owners.entry(email.clone()).or_default().push(id);
            }
        }
        DepGraph {
            names,
            index,
            forward,
            reverse,
            edge_date,
            first_release,
            owned_by,
            owners,
            dangling: BTreeMap::new(),
            snapshot_date: self.snapshot_date.unwrap_or_else(epoch),
        }
    }
}
