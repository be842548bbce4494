//! FP-Growth mining over an FP-tree.
//!
//! Transactions are reduced to their frequent items, ordered by descending
//! support (ties by ascending label) and inserted into a prefix tree whose
//! shared prefixes share counted nodes. A header table threads every node of
//! an item into a node-link chain, in insertion order. Mining walks the
//! header from the least supported item upwards, reading each item's
//! conditional pattern base off its chain and recursing into the
//! conditional tree built from it.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::mem::size_of;

use thiserror::Error;

use crate::dataset::{ItemCatalog, ItemId, Itemset, TransactionDb};
use crate::frequent::FrequentItemsets;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FpError {
    #[error("item {0} is not in the header table")]
    NotInHeader(ItemId),
}

/// Arena index of the root node.
pub const ROOT: usize = 0;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpNode {
    /// `None` only for the root.
    pub item: Option<ItemId>,
    pub count: u64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub next_same_item: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FpTree {
    nodes: Vec<FpNode>,
}

impl Default for FpTree {
    fn default() -> Self {
        FpTree {
            nodes: vec![FpNode {
                item: None,
                count: 0,
                parent: None,
                children: Vec::new(),
                next_same_item: None,
            }],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderEntry {
    pub item: ItemId,
    pub total: u64,
    pub head: Option<usize>,
    tail: Option<usize>,
}

/// Frequent items by descending support, ties by ascending label, each with
/// the head of its node-link chain.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeaderTable {
    entries: Vec<HeaderEntry>,
    /// Entry index per `ItemId`, `None` for items not in the table.
    position: Vec<Option<u32>>,
}

impl HeaderTable {
    pub fn entries(&self) -> &[HeaderEntry] {
        &self.entries
    }

    pub fn get(&self, item: ItemId) -> Option<&HeaderEntry> {
        self.position_of(item).map(|p| &self.entries[p])
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn position_of(&self, item: ItemId) -> Option<usize> {
        self.position
            .get(item.index())
            .copied()
            .flatten()
            .map(|p| p as usize)
    }
}

impl FpTree {
    pub fn node(&self, idx: usize) -> &FpNode {
        &self.nodes[idx]
    }

    pub fn root(&self) -> &FpNode {
        &self.nodes[ROOT]
    }

    /// Number of nodes excluding the root.
    pub fn node_count(&self) -> usize {
        self.nodes.len() - 1
    }

    /// Indices of the nodes on `item`'s node-link chain, head first.
    pub fn chain<'a>(&'a self, header: &HeaderTable, item: ItemId) -> ChainIter<'a> {
        ChainIter {
            tree: self,
            next: header.get(item).and_then(|e| e.head),
        }
    }

    fn child_with(&self, parent: usize, item: ItemId) -> Option<usize> {
        self.nodes[parent]
            .children
            .iter()
            .copied()
            .find(|&c| self.nodes[c].item == Some(item))
    }

    /// Inserts an ordered path carrying `count` transactions.
    fn insert(&mut self, header: &mut HeaderTable, path: &[ItemId], count: u64) {
        let mut cur = ROOT;
        self.nodes[ROOT].count += count;
        for &item in path {
            cur = match self.child_with(cur, item) {
                Some(child) => {
                    self.nodes[child].count += count;
                    child
                }
                None => {
                    let idx = self.nodes.len();
                    self.nodes.push(FpNode {
                        item: Some(item),
                        count,
                        parent: Some(cur),
                        children: Vec::new(),
                        next_same_item: None,
                    });
                    self.nodes[cur].children.push(idx);
                    let pos = header
                        .position_of(item)
                        .expect("path items are in the header");
                    let entry = &mut header.entries[pos];
                    match entry.tail {
                        Some(tail) => self.nodes[tail].next_same_item = Some(idx),
                        None => entry.head = Some(idx),
                    }
                    entry.tail = Some(idx);
                    idx
                }
            };
        }
    }

    /// Items from the root down to (excluding) `idx`.
    fn prefix_path(&self, idx: usize) -> Vec<ItemId> {
        let mut path = Vec::new();
        let mut cur = self.nodes[idx].parent;
        while let Some(p) = cur {
            if let Some(item) = self.nodes[p].item {
                path.push(item);
            }
            cur = self.nodes[p].parent;
        }
        path.reverse();
        path
    }

    /// Checks the structural invariants: child counts never exceed their
    /// parent's, chains link only nodes of their item without cycles, and
    /// chain counts sum to the header totals.
    pub fn check_invariants(&self, header: &HeaderTable) -> Result<(), String> {
        for (idx, node) in self.nodes.iter().enumerate().skip(1) {
            let children: u64 = node.children.iter().map(|&c| self.nodes[c].count).sum();
            if children > node.count {
                return Err(format!(
                    "node {idx} count {} < children {children}",
                    node.count
                ));
            }
            if node.item.is_none() {
                return Err(format!("non-root node {idx} has no item"));
            }
        }
        let mut linked = 0;
        for entry in &header.entries {
            let mut sum = 0;
            let mut steps = 0;
            for idx in self.chain(header, entry.item) {
                steps += 1;
                if steps > self.nodes.len() {
                    return Err(format!("chain of {} cycles", entry.item));
                }
                if self.nodes[idx].item != Some(entry.item) {
                    return Err(format!("chain of {} links node {idx}", entry.item));
                }
                sum += self.nodes[idx].count;
            }
            if sum != entry.total {
                return Err(format!(
                    "chain of {} sums to {sum}, header says {}",
                    entry.item, entry.total
                ));
            }
            linked += steps;
        }
        if linked != self.node_count() {
            return Err(format!(
                "{linked} nodes on chains, {} in tree",
                self.node_count()
            ));
        }
        Ok(())
    }

    /// Indented `label:count` lines, children sorted by label.
    pub fn dump(&self, catalog: &ItemCatalog) -> String {
        fn walk(tree: &FpTree, catalog: &ItemCatalog, idx: usize, depth: usize, out: &mut String) {
            let mut children = tree.nodes[idx].children.clone();
            children.sort_by_key(|&c| catalog.label(tree.nodes[c].item.expect("non-root")));
            for c in children {
                let node = &tree.nodes[c];
                let label = catalog.label(node.item.expect("non-root"));
                let _ = writeln!(
                    out,
                    "{:indent$}{label}:{}",
                    "",
                    node.count,
                    indent = depth * 2
                );
                walk(tree, catalog, c, depth + 1, out);
            }
        }
        let mut out = String::new();
        walk(self, catalog, ROOT, 0, &mut out);
        out
    }
}

pub struct ChainIter<'a> {
    tree: &'a FpTree,
    next: Option<usize>,
}

impl Iterator for ChainIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let cur = self.next?;
        self.next = self.tree.nodes[cur].next_same_item;
        Some(cur)
    }
}

/// Prefix paths leading to every node of one item, with the node counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConditionalPatternBase {
    /// Root-to-parent item sequences; empty for nodes hanging off the root.
    pub paths: Vec<(Vec<ItemId>, u64)>,
}

impl ConditionalPatternBase {
    /// Support of the conditioning item: every path count.
    pub fn total(&self) -> u64 {
        self.paths.iter().map(|(_, c)| c).sum()
    }
}

/// Keeps the items of `t` with count at least `min_support`, ordered by
/// descending count and then ascending label.
pub fn order_transaction(
    t: &Itemset,
    counts: &BTreeMap<ItemId, u64>,
    min_support: u64,
    catalog: &ItemCatalog,
) -> Vec<ItemId> {
    let count = |i: &ItemId| counts.get(i).copied().unwrap_or(0);
    let mut items: Vec<ItemId> = t
        .items()
        .iter()
        .copied()
        .filter(|i| count(i) >= min_support)
        .collect();
    items.sort_by(|a, b| {
        count(b)
            .cmp(&count(a))
            .then_with(|| catalog.label(*a).cmp(catalog.label(*b)))
            .then(a.cmp(b))
    });
    items
}

/// Builds a tree from weighted paths: totals over all paths, drop items
/// below `min_support`, order the rest and insert every path in input order.
fn build_weighted<'a, I>(paths: I, min_support: u64, ranks: &[u32]) -> (FpTree, HeaderTable)
where
    I: Iterator<Item = (&'a [ItemId], u64)> + Clone,
{
    let mut totals = vec![0u64; ranks.len()];
    for (path, count) in paths.clone() {
        for &item in path {
            totals[item.index()] += count;
        }
    }
    let mut frequent: Vec<ItemId> = (0..totals.len())
        .filter(|&i| totals[i] > 0 && totals[i] >= min_support)
        .map(|i| ItemId(i as u32))
        .collect();
    frequent.sort_by(|a, b| {
        totals[b.index()]
            .cmp(&totals[a.index()])
            .then(ranks[a.index()].cmp(&ranks[b.index()]))
    });

    let mut header = HeaderTable {
        entries: Vec::with_capacity(frequent.len()),
        position: vec![None; ranks.len()],
    };
    for (pos, &item) in frequent.iter().enumerate() {
        header.position[item.index()] = Some(pos as u32);
        header.entries.push(HeaderEntry {
            item,
            total: totals[item.index()],
            head: None,
            tail: None,
        });
    }

    let mut tree = FpTree::default();
    let mut ordered = Vec::new();
    for (path, count) in paths {
        ordered.clear();
        ordered.extend(
            path.iter()
                .copied()
                .filter(|&i| header.position_of(i).is_some()),
        );
        ordered.sort_unstable_by_key(|&i| header.position_of(i));
        if !ordered.is_empty() {
            tree.insert(&mut header, &ordered, count);
        }
    }
    (tree, header)
}

/// FP-tree and header table of `db` at `min_support`.
pub fn build_fptree(db: &TransactionDb, min_support: u64) -> (FpTree, HeaderTable) {
    let ranks = db.catalog().label_ranks();
    build_weighted(
        db.transactions().iter().map(|t| (t.items(), 1)),
        min_support.max(1),
        &ranks,
    )
}

/// Reads `item`'s conditional pattern base off its node-link chain.
pub fn conditional_pattern_base(
    tree: &FpTree,
    header: &HeaderTable,
    item: ItemId,
) -> Result<ConditionalPatternBase, FpError> {
    if header.get(item).is_none() {
        return Err(FpError::NotInHeader(item));
    }
    Ok(ConditionalPatternBase {
        paths: tree
            .chain(header, item)
            .map(|idx| (tree.prefix_path(idx), tree.node(idx).count))
            .collect(),
    })
}

/// Conditional FP-tree of a pattern base. Empty paths carry no items and
/// add nothing to the tree.
pub fn build_conditional_tree(
    base: &ConditionalPatternBase,
    min_support: u64,
    catalog: &ItemCatalog,
) -> (FpTree, HeaderTable) {
    let ranks = catalog.label_ranks();
    build_conditional_ranked(base, min_support, &ranks)
}

fn build_conditional_ranked(
    base: &ConditionalPatternBase,
    min_support: u64,
    ranks: &[u32],
) -> (FpTree, HeaderTable) {
    build_weighted(
        base.paths.iter().map(|(p, c)| (p.as_slice(), *c)),
        min_support.max(1),
        ranks,
    )
}

/// Counters collected while mining, used by the benchmark harness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FpGrowthStats {
    /// Non-root nodes created across the initial and all conditional trees.
    pub nodes_created: u64,
    /// Non-root nodes of the initial tree alone.
    pub initial_nodes: u64,
    /// Peak bytes of simultaneously live trees and header tables.
    pub peak_bytes: u64,
}

fn tree_bytes(tree: &FpTree, header: &HeaderTable) -> u64 {
    let nodes = tree.nodes.len() * size_of::<FpNode>() + tree.node_count() * size_of::<usize>();
    let entries =
        header.len() * size_of::<HeaderEntry>() + header.position.len() * size_of::<Option<u32>>();
    (nodes + entries) as u64
}

struct Miner<'a> {
    min_support: u64,
    ranks: &'a [u32],
    out: BTreeMap<Itemset, u64>,
    stats: FpGrowthStats,
    live_bytes: u64,
}

impl Miner<'_> {
    fn grow(&mut self, tree: &FpTree, header: &HeaderTable, suffix: &Itemset) {
        // ascending support, ties by descending label
        for entry in header.entries.iter().rev() {
            let pattern = suffix.with(entry.item);
            self.out.insert(pattern.clone(), entry.total);

            let base = conditional_pattern_base(tree, header, entry.item)
                .expect("entry comes from this header");
            let (cond, cond_header) = build_conditional_ranked(&base, self.min_support, self.ranks);
            let bytes = tree_bytes(&cond, &cond_header);
            self.stats.nodes_created += cond.node_count() as u64;
            self.live_bytes += bytes;
            self.stats.peak_bytes = self.stats.peak_bytes.max(self.live_bytes);
            if !cond_header.is_empty() {
                self.grow(&cond, &cond_header, &pattern);
            }
            self.live_bytes -= bytes;
        }
    }
}

/// All itemsets with support at least `min_support`, without candidate
/// generation.
pub fn fpgrowth_mine(db: &TransactionDb, min_support: u64) -> FrequentItemsets {
    fpgrowth_mine_with_stats(db, min_support).0
}

pub fn fpgrowth_mine_with_stats(
    db: &TransactionDb,
    min_support: u64,
) -> (FrequentItemsets, FpGrowthStats) {
    let min_support = min_support.max(1);
    let ranks = db.catalog().label_ranks();
    let (tree, header) = build_weighted(
        db.transactions().iter().map(|t| (t.items(), 1)),
        min_support,
        &ranks,
    );
    let bytes = tree_bytes(&tree, &header);
    let mut miner = Miner {
        min_support,
        ranks: &ranks,
        out: BTreeMap::new(),
        stats: FpGrowthStats {
            nodes_created: tree.node_count() as u64,
            initial_nodes: tree.node_count() as u64,
            peak_bytes: bytes,
        },
        live_bytes: bytes,
    };
    miner.grow(&tree, &header, &Itemset::empty());
    let stats = miner.stats;
    (FrequentItemsets::from_map(miner.out, db.len()), stats)
}
