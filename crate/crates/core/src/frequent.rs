//! Frequent itemsets with absolute support counts, shared by every miner.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dataset::{ItemCatalog, ItemId, Itemset};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FrequentFormatError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("itemset {0:?} appears twice with different counts")]
    Conflict(String),
}

/// Itemset to absolute support count, plus the size of the source database.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FrequentItemsets {
    support: BTreeMap<Itemset, u64>,
    n: usize,
}

impl FrequentItemsets {
    pub fn new(n: usize) -> Self {
        FrequentItemsets {
            support: BTreeMap::new(),
            n,
        }
    }

    pub fn from_map(support: BTreeMap<Itemset, u64>, n: usize) -> Self {
        FrequentItemsets { support, n }
    }

    pub fn insert(&mut self, itemset: Itemset, count: u64) {
        self.support.insert(itemset, count);
    }

    pub fn get(&self, itemset: &Itemset) -> Option<u64> {
        self.support.get(itemset).copied()
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    /// Transaction count of the database these supports were counted in.
    pub fn n_transactions(&self) -> usize {
        self.n
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Itemset, u64)> {
        self.support.iter().map(|(k, &v)| (k, v))
    }

    pub fn as_map(&self) -> &BTreeMap<Itemset, u64> {
        &self.support
    }

    pub fn max_len(&self) -> usize {
        self.support.keys().map(Itemset::len).max().unwrap_or(0)
    }

    /// Itemsets of exactly `k` items.
    pub fn level(&self, k: usize) -> impl Iterator<Item = (&Itemset, u64)> {
        self.iter().filter(move |(s, _)| s.len() == k)
    }

    /// Keeps only the itemsets with support at least `min_support`.
    pub fn restricted(&self, min_support: u64) -> FrequentItemsets {
        FrequentItemsets {
            support: self
                .support
                .iter()
                .filter(|(_, &c)| c >= min_support)
                .map(|(k, &c)| (k.clone(), c))
                .collect(),
            n: self.n,
        }
    }

    /// First stored itemset that has a missing (k-1)-subset or a subset with
    /// a smaller count than itself.
    pub fn closure_violation(&self) -> Option<&Itemset> {
        self.support.iter().find_map(|(set, &count)| {
            if set.len() < 2 {
                return None;
            }
            let broken = (0..set.len()).any(|pos| {
                self.get(&set.without_index(pos))
                    .is_none_or(|sub| sub < count)
            });
            broken.then_some(set)
        })
    }

    /// Rows ordered by size, then by the labels of the itemset.
    pub fn sorted_rows<'a>(&'a self, catalog: &'a ItemCatalog) -> Vec<(&'a Itemset, u64)> {
        let mut rows: Vec<(&Itemset, u64)> = self.iter().collect();
        rows.sort_by_cached_key(|(set, _)| (set.len(), catalog.labels_of(set.items())));
        rows
    }

    /// `itemset,support` CSV with `|`-joined labels.
    pub fn to_csv(&self, catalog: &ItemCatalog) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer
            .write_record(["itemset", "support"])
            .expect("writing to memory");
        for (set, count) in self.sorted_rows(catalog) {
            writer
                .write_record([catalog.join(set.items()), count.to_string()])
                .expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("labels are UTF-8")
    }
}

/// Reads an `itemset,support` CSV (header optional) into a fresh catalog.
///
/// Labels are interned in order of first appearance. `n` defaults to the
/// largest count in the file when not given.
pub fn parse_support_csv(
    content: &str,
    n: Option<usize>,
) -> Result<(ItemCatalog, FrequentItemsets), FrequentFormatError> {
    let mut catalog = ItemCatalog::new();
    let mut support: BTreeMap<Itemset, u64> = BTreeMap::new();
    let reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(content.as_bytes());
    for (idx, record) in reader.into_records().enumerate() {
        let record = record.map_err(|e| FrequentFormatError::Row {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let row_err = |message: String| FrequentFormatError::Row { line, message };
        if record.len() == 1 && record[0].trim().is_empty() {
            continue;
        }
        if record.len() != 2 {
            return Err(row_err(format!(
                "expected 2 fields, found {}",
                record.len()
            )));
        }
        let count_text = record[1].trim();
        let count: u64 = match count_text.parse() {
            Ok(c) => c,
            Err(_) if idx == 0 => continue, // header row
            Err(_) => return Err(row_err(format!("support {count_text:?} is not a count"))),
        };
        let mut items: Vec<ItemId> = Vec::new();
        for label in record[0].split('|') {
            match catalog.intern(label) {
                Some(id) => items.push(id),
                None => return Err(row_err("blank label in itemset".into())),
            }
        }
        let set = Itemset::from_unsorted(items);
        match support.get(&set) {
            Some(&prev) if prev != count => {
                return Err(FrequentFormatError::Conflict(record[0].to_string()))
            }
            _ => {
                support.insert(set, count);
            }
        }
    }
    let n = n.unwrap_or_else(|| support.values().copied().max().unwrap_or(0) as usize);
    Ok((catalog, FrequentItemsets::from_map(support, n)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_preserves_rows() {
        let text = "itemset,support\nb,4\na,4\na|b,3\n";
        let (catalog, freq) = parse_support_csv(text, Some(5)).unwrap();
        assert_eq!(freq.len(), 3);
        assert_eq!(freq.n_transactions(), 5);
        let emitted = freq.to_csv(&catalog);
        assert_eq!(emitted, "itemset,support\na,4\nb,4\nb|a,3\n");
        let (catalog2, freq2) = parse_support_csv(&emitted, Some(5)).unwrap();
        assert_eq!(
            freq2.to_csv(&catalog2),
            "itemset,support\na,4\nb,4\na|b,3\n"
        );
    }

    #[test]
    fn duplicate_rows_must_agree() {
        assert!(parse_support_csv("a|b,3\nb|a,3\n", None).is_ok());
        assert_eq!(
            parse_support_csv("a|b,3\nB|a,4\n", None).unwrap_err(),
            FrequentFormatError::Conflict("B|a".into())
        );
    }

    #[test]
    fn bad_rows() {
        assert!(matches!(
            parse_support_csv("a,1\nb,x\n", None),
            Err(FrequentFormatError::Row { line: 2, .. })
        ));
        assert!(matches!(
            parse_support_csv("a,1,2\n", None),
            Err(FrequentFormatError::Row { line: 1, .. })
        ));
        assert!(matches!(
            parse_support_csv("a||b,1\n", None),
            Err(FrequentFormatError::Row { line: 1, .. })
        ));
    }

    #[test]
    fn closure_violation_detects_missing_subset() {
        let (_, freq) = parse_support_csv("a,4\nb,4\nc,4\na|b,3\na|b|c,2\n", None).unwrap();
        assert!(freq.closure_violation().is_some());
        let (_, freq) = parse_support_csv("a,4\nb,2\na|b,3\n", None).unwrap();
        assert!(freq.closure_violation().is_some());
        let (_, freq) = parse_support_csv("a,4\nb,4\na|b,3\n", None).unwrap();
        assert_eq!(freq.closure_violation(), None);
    }
}
