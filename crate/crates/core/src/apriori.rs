//! Levelwise Apriori mining.
//!
//! Each level `k+1` is produced from the frequent `k`-itemsets by a prefix
//! join, pruned by downward closure, and counted with one pass over the
//! database. Mining stops at the first empty level.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::mem::size_of;

use thiserror::Error;

use crate::dataset::{ItemId, Itemset, TransactionDb};
use crate::frequent::FrequentItemsets;
use crate::rules::MinConfidence;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MiningError {
    #[error("itemsets of mixed sizes: expected {expected}, found {found}")]
    MixedSizes { expected: usize, found: usize },
    #[error("candidate item {item} is outside the catalog of {catalog_size} items")]
    UnknownItem { item: ItemId, catalog_size: usize },
    #[error("minimum support must be at least 1")]
    ZeroSupport,
}

/// Thresholds for one mining run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MiningParams {
    min_support: u64,
    min_confidence: MinConfidence,
}

impl MiningParams {
    pub fn new(min_support: u64, min_confidence: MinConfidence) -> Result<Self, MiningError> {
        if min_support == 0 {
            return Err(MiningError::ZeroSupport);
        }
        Ok(MiningParams {
            min_support,
            min_confidence,
        })
    }

    pub fn min_support(&self) -> u64 {
        self.min_support
    }

    pub fn min_confidence(&self) -> &MinConfidence {
        &self.min_confidence
    }
}

/// Candidate itemsets of one size.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CandidateSet {
    k: usize,
    itemsets: BTreeSet<Itemset>,
}

impl CandidateSet {
    pub fn new<I>(itemsets: I) -> Result<Self, MiningError>
    where
        I: IntoIterator<Item = Itemset>,
    {
        let itemsets: BTreeSet<Itemset> = itemsets.into_iter().collect();
        let k = itemsets.iter().next().map_or(0, Itemset::len);
        if let Some(bad) = itemsets.iter().find(|s| s.len() != k) {
            return Err(MiningError::MixedSizes {
                expected: k,
                found: bad.len(),
            });
        }
        Ok(CandidateSet { k, itemsets })
    }

    /// Size of every member; 0 for an empty set.
    pub fn itemset_len(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.itemsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.itemsets.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Itemset> {
        self.itemsets.iter()
    }

    pub fn contains(&self, set: &Itemset) -> bool {
        self.itemsets.contains(set)
    }
}

impl IntoIterator for CandidateSet {
    type Item = Itemset;
    type IntoIter = std::collections::btree_set::IntoIter<Itemset>;

    fn into_iter(self) -> Self::IntoIter {
        self.itemsets.into_iter()
    }
}

/// Counters collected while mining, used by the benchmark harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AprioriStats {
    /// Itemsets whose support was counted against the database, level 1
    /// included.
    pub candidates_tested: u64,
    /// Peak bytes held in candidate and frequent itemset storage.
    pub peak_bytes: u64,
}

fn itemset_footprint(k: usize) -> u64 {
    (size_of::<Itemset>() + k * size_of::<ItemId>() + size_of::<u64>()) as u64
}

/// Items whose count reaches `min_support`, as 1-itemsets.
pub fn threshold_singletons(
    counts: &BTreeMap<ItemId, u64>,
    min_support: u64,
) -> BTreeMap<Itemset, u64> {
    counts
        .iter()
        .filter(|(_, &c)| c >= min_support)
        .map(|(&item, &c)| (Itemset::single(item), c))
        .collect()
}

/// Joins every pair of `k`-itemsets that agree on their first `k-1` items.
pub fn join_candidates<'a, I>(level: I) -> Result<CandidateSet, MiningError>
where
    I: IntoIterator<Item = &'a Itemset>,
{
    let mut sorted: Vec<&Itemset> = level.into_iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    let k = sorted.first().map_or(0, |s| s.len());
    if let Some(bad) = sorted.iter().find(|s| s.len() != k) {
        return Err(MiningError::MixedSizes {
            expected: k,
            found: bad.len(),
        });
    }
    let mut joined = BTreeSet::new();
    if k == 0 {
        return Ok(CandidateSet::default());
    }
    // Sorted order keeps itemsets with a shared prefix contiguous.
    for (i, a) in sorted.iter().enumerate() {
        let prefix = &a.items()[..k - 1];
        for b in &sorted[i + 1..] {
            if &b.items()[..k - 1] != prefix {
                break;
            }
            let mut items = a.items().to_vec();
            items.push(b.items()[k - 1]);
            joined.insert(Itemset::from_sorted(items));
        }
    }
    Ok(CandidateSet {
        k: k + 1,
        itemsets: joined,
    })
}

/// Drops every candidate with a `k`-subset missing from `frequent`.
pub fn prune_candidates(candidates: CandidateSet, frequent: &HashSet<Itemset>) -> CandidateSet {
    let k = candidates.k;
    let itemsets = candidates
        .itemsets
        .into_iter()
        .filter(|c| (0..c.len()).all(|pos| frequent.contains(&c.without_index(pos))))
        .collect();
    CandidateSet { k, itemsets }
}

/// Number of transactions containing each candidate.
pub fn count_support(
    db: &TransactionDb,
    candidates: &CandidateSet,
) -> Result<BTreeMap<Itemset, u64>, MiningError> {
    let catalog_size = db.catalog().len();
    if let Some(&item) = candidates
        .iter()
        .flat_map(|c| c.items())
        .find(|i| i.index() >= catalog_size)
    {
        return Err(MiningError::UnknownItem { item, catalog_size });
    }
    let list: Vec<&Itemset> = candidates.iter().collect();
    let counts = count_checked(db, &list);
    Ok(list.into_iter().cloned().zip(counts).collect())
}

/// Transaction-major counting pass. Every transaction is loaded into a
/// membership table once, then every candidate is tested against it.
/// Candidates are copied into one flat buffer of stride `k` first.
fn count_checked(db: &TransactionDb, candidates: &[&Itemset]) -> Vec<u64> {
    let mut counts = vec![0u64; candidates.len()];
    let k = match candidates.first() {
        Some(c) => c.len(),
        None => return counts,
    };
    let flat: Vec<u32> = candidates
        .iter()
        .flat_map(|c| c.items().iter().map(|i| i.0))
        .collect();
    let mut member = vec![false; db.catalog().len()];
    for t in db.transactions() {
        if t.len() < k {
            continue;
        }
        for &item in t.items() {
            member[item.index()] = true;
        }
        for (count, cand) in counts.iter_mut().zip(flat.chunks_exact(k)) {
            if cand.iter().all(|&i| member[i as usize]) {
                *count += 1;
            }
        }
        for &item in t.items() {
            member[item.index()] = false;
        }
    }
    counts
}

/// All itemsets with support at least `min_support`.
pub fn apriori_mine(db: &TransactionDb, min_support: u64) -> FrequentItemsets {
    apriori_mine_with_stats(db, min_support).0
}

pub fn apriori_mine_with_stats(
    db: &TransactionDb,
    min_support: u64,
) -> (FrequentItemsets, AprioriStats) {
    let min_support = min_support.max(1);
    let mut stats = AprioriStats::default();
    let mut result = FrequentItemsets::new(db.len());

    let singles = crate::dataset::item_frequencies(db);
    stats.candidates_tested = singles.len() as u64;
    let mut level = threshold_singletons(&singles, min_support);
    let mut stored_bytes = level.len() as u64 * itemset_footprint(1);
    stats.peak_bytes = singles.len() as u64 * itemset_footprint(1);

    while !level.is_empty() {
        let k = level.keys().next().map_or(0, Itemset::len);
        let frequent: HashSet<Itemset> = level.keys().cloned().collect();
        let joined = join_candidates(level.keys()).expect("levels are uniform");
        let candidates = prune_candidates(joined, &frequent);
        for (set, count) in std::mem::take(&mut level) {
            result.insert(set, count);
        }
        if candidates.is_empty() {
            break;
        }

        stats.candidates_tested += candidates.len() as u64;
        let candidate_bytes = candidates.len() as u64 * itemset_footprint(k + 1);
        stats.peak_bytes = stats.peak_bytes.max(stored_bytes + candidate_bytes);

        let list: Vec<&Itemset> = candidates.iter().collect();
        let counts = count_checked(db, &list);
        level = list
            .into_iter()
            .zip(counts)
            .filter(|&(_, c)| c >= min_support)
            .map(|(s, c)| (s.clone(), c))
            .collect();
        stored_bytes += level.len() as u64 * itemset_footprint(k + 1);
    }
    (result, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::parse_transactions;

    const DB5: &[u8] = b"a,b,c\na,b\na,c\nb,c\na,b,c,d\n";

    fn set(db: &TransactionDb, labels: &str) -> Itemset {
        Itemset::from_unsorted(
            labels
                .chars()
                .map(|c| db.catalog().get(&c.to_string()).unwrap())
                .collect(),
        )
    }

    fn ids(v: &[u32]) -> Itemset {
        Itemset::from_unsorted(v.iter().map(|&i| ItemId(i)).collect())
    }

    fn rendered(db: &TransactionDb, freq: &FrequentItemsets) -> Vec<(String, u64)> {
        freq.sorted_rows(db.catalog())
            .into_iter()
            .map(|(s, c)| (db.catalog().labels_of(s.items()).concat(), c))
            .collect()
    }

    #[test]
    fn singleton_threshold_is_inclusive() {
        let counts: BTreeMap<ItemId, u64> = [(ItemId(0), 3), (ItemId(1), 2), (ItemId(2), 5)].into();
        let l1 = threshold_singletons(&counts, 3);
        assert_eq!(
            l1.keys().cloned().collect::<Vec<_>>(),
            [ids(&[0]), ids(&[2])]
        );
        assert_eq!(threshold_singletons(&counts, 1).len(), 3);
        assert!(threshold_singletons(&counts, 6).is_empty());
    }

    #[test]
    fn join_examples() {
        let l2 = [ids(&[0, 1]), ids(&[0, 2]), ids(&[1, 2])];
        let c3 = join_candidates(&l2).unwrap();
        assert_eq!(c3.iter().cloned().collect::<Vec<_>>(), [ids(&[0, 1, 2])]);
        assert_eq!(c3.itemset_len(), 3);

        let l1 = [ids(&[2]), ids(&[0]), ids(&[1])];
        let c2 = join_candidates(&l1).unwrap();
        assert_eq!(
            c2.iter().cloned().collect::<Vec<_>>(),
            [ids(&[0, 1]), ids(&[0, 2]), ids(&[1, 2])]
        );

        assert!(join_candidates(&[]).unwrap().is_empty());
    }

    #[test]
    fn join_rejects_mixed_sizes() {
        assert_eq!(
            join_candidates(&[ids(&[0]), ids(&[0, 1])]).unwrap_err(),
            MiningError::MixedSizes {
                expected: 1,
                found: 2
            }
        );
    }

    #[test]
    fn prune_examples() {
        let l3: HashSet<Itemset> = [ids(&[0, 1, 2]), ids(&[0, 1, 3]), ids(&[0, 2, 3])].into();
        let c4 = CandidateSet::new([ids(&[0, 1, 2, 3])]).unwrap();
        assert!(prune_candidates(c4, &l3).is_empty());

        let l2: HashSet<Itemset> = [ids(&[0, 1]), ids(&[0, 2]), ids(&[1, 2])].into();
        let c3 = CandidateSet::new([ids(&[0, 1, 2])]).unwrap();
        assert_eq!(prune_candidates(c3.clone(), &l2), c3);

        assert!(prune_candidates(CandidateSet::default(), &l2).is_empty());
    }

    #[test]
    fn count_support_db5() {
        let db = parse_transactions(DB5).unwrap();
        let cands = CandidateSet::new(["ab", "ac", "bc", "ad"].map(|l| set(&db, l))).unwrap();
        let counts = count_support(&db, &cands).unwrap();
        assert_eq!(counts[&set(&db, "ab")], 3);
        assert_eq!(counts[&set(&db, "ac")], 3);
        assert_eq!(counts[&set(&db, "bc")], 3);
        assert_eq!(counts[&set(&db, "ad")], 1);

        let d = CandidateSet::new([set(&db, "d")]).unwrap();
        assert_eq!(count_support(&db, &d).unwrap()[&set(&db, "d")], 1);
    }

    #[test]
    fn count_support_empty_db_and_unknown_items() {
        let db = parse_transactions(b"").unwrap();
        assert_eq!(
            count_support(&db, &CandidateSet::new([ids(&[0])]).unwrap()).unwrap_err(),
            MiningError::UnknownItem {
                item: ItemId(0),
                catalog_size: 0
            }
        );
        let db = parse_transactions(b"x\n,\n").unwrap();
        let db = TransactionDb::new(db.catalog().clone(), vec![]).unwrap();
        let counts = count_support(&db, &CandidateSet::new([ids(&[0])]).unwrap()).unwrap();
        assert_eq!(counts[&ids(&[0])], 0);
    }

    #[test]
    fn mines_db5() {
        let db = parse_transactions(DB5).unwrap();
        let freq = apriori_mine(&db, 3);
        let expected: Vec<(String, u64)> = [
            ("a", 4),
            ("b", 4),
            ("c", 4),
            ("ab", 3),
            ("ac", 3),
            ("bc", 3),
        ]
        .map(|(l, c)| (l.to_string(), c))
        .into();
        assert_eq!(rendered(&db, &freq), expected);
        assert_eq!(freq.n_transactions(), 5);
    }

    #[test]
    fn mines_trivial_dbs() {
        let db = parse_transactions(b"").unwrap();
        assert!(apriori_mine(&db, 1).is_empty());

        let db = parse_transactions(b"a,b\n").unwrap();
        let freq = apriori_mine(&db, 1);
        assert_eq!(
            rendered(&db, &freq),
            [("a".into(), 1), ("b".into(), 1), ("ab".into(), 1)]
        );
    }

    #[test]
    fn stats_count_every_candidate() {
        let db = parse_transactions(DB5).unwrap();
        let (_, stats) = apriori_mine_with_stats(&db, 3);
        // 4 singletons, then C2 = {ab, ac, bc}, then C3 = {abc}
        assert_eq!(stats.candidates_tested, 4 + 3 + 1);
        assert!(stats.peak_bytes > 0);
    }
}
