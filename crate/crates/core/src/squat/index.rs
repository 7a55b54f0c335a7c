//! Levenshtein distance and an all-pairs fuzzy index.
//!
//! The index is a deletion neighborhood: every name contributes the
//! hashes of all strings reachable by deleting up to `max_d` characters.
//! Two names within edit distance `d <= max_d` always share at least one
//! such variant (take the matched characters of an optimal alignment), so
//! bucket collisions are a complete candidate set, and candidates are
//! confirmed with a bounded distance computation. Hash collisions only
//! ever add candidates, never hide a pair, so query results are exactly
//! what a naive pairwise scan returns — the oracle tests assert this.
//!
//! Construction and all-pairs cost scale with the neighborhood size
//! rather than the number of name pairs, which keeps joins over
//! registry-sized name sets (hundreds of thousands) practical.

use std::collections::HashSet;

use rayon::prelude::*;

use crate::snapshot::CanonicalName;

/// Unit-cost Levenshtein distance.
pub fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            curr[j + 1] = (prev[j] + cost).min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Levenshtein distance if it does not exceed `max`, computed over bytes
/// with early abandonment. Byte-wise equals char-wise on ASCII input,
/// which is all a canonical name can contain.
pub(crate) fn edit_distance_within(a: &[u8], b: &[u8], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    if a.is_empty() || b.is_empty() {
        let d = a.len().max(b.len());
        return (d <= max).then_some(d);
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        curr[0] = i + 1;
        let mut row_min = curr[0];
        for (j, &cb) in b.iter().enumerate() {
            let cost = usize::from(ca != cb);
            let val = (prev[j] + cost).min(prev[j + 1] + 1).min(curr[j] + 1);
            curr[j + 1] = val;
            row_min = row_min.min(val);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    let d = prev[b.len()];
    (d <= max).then_some(d)
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

#[inline]
fn fnv_step(state: u64, byte: u8) -> u64 {
    (state ^ u64::from(byte)).wrapping_mul(FNV_PRIME)
}

/// Hashes of every subsequence of `bytes` reachable by deleting at most
/// `budget` characters (the string itself included).
fn deletion_variant_hashes(bytes: &[u8], budget: usize, out: &mut Vec<u64>) {
    fn walk(bytes: &[u8], i: usize, budget: usize, state: u64, out: &mut Vec<u64>) {
        if i == bytes.len() {
            out.push(state);
            return;
        }
        walk(bytes, i + 1, budget, fnv_step(state, bytes[i]), out);
        if budget > 0 {
            walk(bytes, i + 1, budget - 1, state, out);
        }
    }
    walk(bytes, 0, budget, FNV_OFFSET, out);
    out.sort_unstable();
    out.dedup();
}

/// All-pairs / nearest-neighbor index over a fixed name set for edit
/// distances up to `max_d` (1 to 3).
#[derive(Debug, Clone)]
pub struct FuzzyIndex {
    names: Vec<CanonicalName>,
    max_d: usize,
    /// `(variant hash, name id)` sorted by hash; equal-hash runs are the
    /// candidate buckets.
    entries: Vec<(u64, u32)>,
}

impl FuzzyIndex {
    /// Build the index. `max_d` must be 1, 2 or 3.
    pub fn build(names: impl IntoIterator<Item = CanonicalName>, max_d: usize) -> FuzzyIndex {
        assert!((1..=3).contains(&max_d), "max_d must be 1, 2 or 3");
        let mut names: Vec<CanonicalName> = names.into_iter().collect();
        names.sort_unstable();
        names.dedup();

        let mut entries: Vec<(u64, u32)> = names
            .par_iter()
            .enumerate()
            .map(|(id, name)| {
                let mut hashes = Vec::new();
                deletion_variant_hashes(name.as_str().as_bytes(), max_d, &mut hashes);
                hashes
                    .into_iter()
                    .map(|h| (h, id as u32))
                    .collect::<Vec<_>>()
            })
            .flatten()
            .collect();
        entries.par_sort_unstable();

        FuzzyIndex {
            names,
            max_d,
            entries,
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn max_distance(&self) -> usize {
        self.max_d
    }

    pub fn names(&self) -> &[CanonicalName] {
        &self.names
    }

    /// Indexed names within distance `d` of `query` (1 <= d <= max_d),
    /// excluding an exact self match.
    pub fn neighbors(&self, query: &str, d: usize) -> Vec<(CanonicalName, usize)> {
        assert!(d >= 1 && d <= self.max_d, "d must be within the built bound");
        let mut hashes = Vec::new();
        deletion_variant_hashes(query.as_bytes(), d, &mut hashes);
        let mut seen: HashSet<u32> = HashSet::new();
        let mut out = Vec::new();
        for h in hashes {
            let start = self.entries.partition_point(|&(eh, _)| eh < h);
            for &(eh, id) in &self.entries[start..] {
                if eh != h {
                    break;
                }
                if !seen.insert(id) {
                    continue;
                }
                let name = &self.names[id as usize];
                if name.as_str() == query {
                    continue;
                }
                if let Some(dist) =
                    edit_distance_within(query.as_bytes(), name.as_str().as_bytes(), d)
                {
                    out.push((name.clone(), dist));
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Every unordered pair of distinct indexed names within distance `d`
    /// (1 <= d <= max_d), with the exact distance. Pairs come back sorted
    /// and deduplicated.
    pub fn all_pairs(&self, d: usize) -> Vec<(CanonicalName, CanonicalName, usize)> {
        assert!(d >= 1 && d <= self.max_d, "d must be within the built bound");
        let mut tested: HashSet<(u32, u32)> = HashSet::new();
        let mut out = Vec::new();
        let mut run_start = 0usize;
        while run_start < self.entries.len() {
            let hash = self.entries[run_start].0;
            let mut run_end = run_start + 1;
            while run_end < self.entries.len() && self.entries[run_end].0 == hash {
                run_end += 1;
            }
            let bucket = &self.entries[run_start..run_end];
            for (i, &(_, a)) in bucket.iter().enumerate() {
                for &(_, b) in &bucket[i + 1..] {
                    if a == b {
                        continue;
                    }
                    let key = (a.min(b), a.max(b));
                    if !tested.insert(key) {
                        continue;
                    }
                    let left = &self.names[key.0 as usize];
                    let right = &self.names[key.1 as usize];
                    if let Some(dist) = edit_distance_within(
                        left.as_str().as_bytes(),
                        right.as_str().as_bytes(),
                        d,
                    ) {
                        if dist >= 1 {
                            out.push((left.clone(), right.clone(), dist));
                        }
                    }
                }
            }
            run_start = run_end;
        }
        out.sort_unstable();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::snapshot::canonical_name;

    fn n(s: &str) -> CanonicalName {
        canonical_name(s).unwrap()
    }

    #[test]
    fn distance_basics() {
        assert_eq!(edit_distance("numpy", "numpi"), 1);
        assert_eq!(edit_distance("a", "a"), 0);
        assert_eq!(edit_distance("", "abc"), 3);
        assert_eq!(edit_distance("kitten", "sitting"), 3);
    }

    #[test]
    fn distance_on_canonicalized_case_attack() {
        // "JelIyfish" (capital i for l) canonicalizes to "jeliyfish",
        // one substitution away from the real name.
        assert_eq!(
            edit_distance(n("jellyfish").as_str(), n("JelIyfish").as_str()),
            1
        );
    }

    #[test]
    fn bounded_distance_matches_full() {
        let words = ["numpy", "numpi", "nmpy", "flask", "fl", ""];
        for a in words {
            for b in words {
                let full = edit_distance(a, b);
                for max in 0..=4 {
                    let bounded = edit_distance_within(a.as_bytes(), b.as_bytes(), max);
                    assert_eq!(bounded, (full <= max).then_some(full), "{a:?} vs {b:?}");
                }
            }
        }
    }

    #[test]
    fn small_index_all_pairs() {
        let idx = FuzzyIndex::build([n("numpy"), n("numpi"), n("flask")], 1);
        let pairs = idx.all_pairs(1);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].0.as_str(), "numpi");
        assert_eq!(pairs[0].1.as_str(), "numpy");
        assert_eq!(pairs[0].2, 1);
    }

    #[test]
    fn empty_and_singleton_indexes() {
        let idx = FuzzyIndex::build([], 3);
        assert!(idx.all_pairs(3).is_empty());
        let idx = FuzzyIndex::build([n("ab")], 2);
        assert!(idx.neighbors("ab", 2).is_empty());
        assert!(idx.all_pairs(2).is_empty());
    }

    #[test]
    fn neighbors_query() {
        let idx = FuzzyIndex::build([n("requests"), n("request"), n("flask")], 2);
        let hits = idx.neighbors("requests", 2);
        assert_eq!(hits.len(), 1);
        assert_eq!(hits[0].0.as_str(), "request");
        assert_eq!(hits[0].1, 1);
        // Unindexed query strings work too.
        let hits = idx.neighbors("requets", 2);
        assert_eq!(hits.len(), 2);
    }

    #[test]
    fn all_pairs_matches_naive_scan() {
        // Deterministic small corpus with heavy near-duplication.
        let mut names = Vec::new();
        for stem in ["pkg", "lib", "tool"] {
            for i in 0..12 {
                names.push(n(&format!("{stem}{i}")));
                names.push(n(&format!("{stem}-{i}")));
            }
        }
        let idx = FuzzyIndex::build(names.clone(), 3);
        names.sort_unstable();
        names.dedup();
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
            naive.sort_unstable();
            assert_eq!(idx.all_pairs(d), naive, "d = {d}");
        }
    }
}
