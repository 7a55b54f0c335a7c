//! Per-year ecosystem growth counts.

use std::collections::BTreeMap;

use chrono::Datelike;
use serde::Serialize;

use crate::snapshot::Snapshot;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct YearCounts {
    pub new_packages: u64,
    pub new_maintainers: u64,
    pub new_releases: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct YearlyStats {
    pub years: BTreeMap<i32, YearCounts>,
}

impl YearlyStats {
    pub fn get(&self, year: i32) -> YearCounts {
        self.years.get(&year).copied().unwrap_or_default()
    }

    pub fn total_new_packages(&self) -> u64 {
        self.years.values().map(|c| c.new_packages).sum()
    }
}

/// Count ecosystem growth per calendar year.
///
/// A package (and likewise a maintainer) counts toward the year of its
/// earliest release date; each release counts toward its own year.
/// Packages without releases contribute nothing.
pub fn ecosystem_stats(snapshot: &Snapshot) -> YearlyStats {
    let mut stats = YearlyStats::default();
    let mut maintainer_first: BTreeMap<&str, i32> = BTreeMap::new();

    for record in snapshot.packages.values() {
        let Some(first) = record.first_release_date() else {
            continue;
        };
        stats.years.entry(first.year()).or_default().new_packages += 1;
        for release in &record.releases {
            stats
                .years
                .entry(release.date.year())
                .or_default()
                .new_releases += 1;
        }
        for email in &record.maintainers {
            maintainer_first
                .entry(email)
                .and_modify(|y| *y = (*y).min(first.year()))
                .or_insert_with(|| first.year());
        }
    }
    for year in maintainer_first.values() {
        stats.years.entry(*year).or_default().new_maintainers += 1;
    }
    stats
}
