//! Brute-force reference miners for small databases.
//!
//! Transactions are mapped to bitmasks over the items that occur in the
//! database; every nonempty subset of that universe is counted by scanning
//! all transactions. Exponential on purpose, and refused above
//! [`MAX_ORACLE_ITEMS`] distinct items.

use thiserror::Error;

use crate::apriori::MiningParams;
use crate::dataset::{ItemCatalog, ItemId, Itemset, TransactionDb};
use crate::frequent::FrequentItemsets;
use crate::rules::{rule_confidence, sort_rules, AssociationRule, RuleStatus};

pub const MAX_ORACLE_ITEMS: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{items} distinct items exceed the brute-force limit of {limit}")]
    TooManyItems { items: usize, limit: usize },
}

struct Universe {
    items: Vec<ItemId>,
    masks: Vec<u32>,
}

impl Universe {
    fn of(db: &TransactionDb) -> Result<Self, OracleError> {
        let mut items: Vec<ItemId> = db
            .transactions()
            .iter()
            .flat_map(|t| t.items().iter().copied())
            .collect();
        items.sort_unstable();
        items.dedup();
        if items.len() > MAX_ORACLE_ITEMS {
            return Err(OracleError::TooManyItems {
                items: items.len(),
                limit: MAX_ORACLE_ITEMS,
            });
        }
        let masks = db
            .transactions()
            .iter()
            .map(|t| {
                t.items().iter().fold(0u32, |m, item| {
                    m | 1 << items.binary_search(item).expect("item is in universe")
                })
            })
            .collect();
        Ok(Universe { items, masks })
    }

    fn support(&self, subset: u32) -> u64 {
        self.masks.iter().filter(|&&t| t & subset == subset).count() as u64
    }

    fn itemset(&self, subset: u32) -> Itemset {
        Itemset::from_unsorted(
            (0..self.items.len())
                .filter(|&b| subset >> b & 1 == 1)
                .map(|b| self.items[b])
                .collect(),
        )
    }

    fn mask_of(&self, set: &Itemset) -> u32 {
        set.items().iter().fold(0, |m, item| {
            m | 1 << self.items.binary_search(item).expect("item is in universe")
        })
    }
}

/// Every itemset with support at least `min_support`, by exhaustive
/// enumeration.
pub fn brute_force_frequent(
    db: &TransactionDb,
    min_support: u64,
) -> Result<FrequentItemsets, OracleError> {
    let universe = Universe::of(db)?;
    let min_support = min_support.max(1);
    let mut out = FrequentItemsets::new(db.len());
    let all: u32 = ((1u64 << universe.items.len()) - 1) as u32;
    for subset in 1..=all {
        let count = universe.support(subset);
        if count >= min_support {
            out.insert(universe.itemset(subset), count);
        }
    }
    Ok(out)
}

/// Every rule from every frequent itemset, Accepted and Rejected alike.
/// Both supports of each rule are recounted from the transactions.
pub fn brute_force_rules(
    db: &TransactionDb,
    params: &MiningParams,
) -> Result<Vec<AssociationRule>, OracleError> {
    let universe = Universe::of(db)?;
    let frequent = brute_force_frequent(db, params.min_support())?;
    let (min_num, min_den) = params.min_confidence().ratio();
    let mut rules = Vec::new();
    for (whole, _) in frequent.iter().filter(|(s, _)| s.len() >= 2) {
        let whole_mask = universe.mask_of(whole);
        let sup_whole = universe.support(whole_mask);
        // proper nonempty submasks
        let mut sub = (whole_mask - 1) & whole_mask;
        while sub != 0 {
            let sup_sub = universe.support(sub);
            let confidence = rule_confidence(sup_whole, sup_sub)
                .expect("a subset is at least as frequent as its superset");
            let accepted = sup_whole as u128 * min_den as u128 >= min_num as u128 * sup_sub as u128;
            rules.push(AssociationRule {
                antecedent: universe.itemset(sub),
                consequent: universe.itemset(whole_mask & !sub),
                support: sup_whole,
                confidence,
                status: if accepted {
                    RuleStatus::Accepted
                } else {
                    RuleStatus::Rejected
                },
            });
            sub = (sub - 1) & whole_mask;
        }
    }
    sort_rules(&mut rules, db.catalog());
    Ok(rules)
}

/// Rules of `brute_force_rules` that are accepted.
pub fn accepted_only(rules: Vec<AssociationRule>) -> Vec<AssociationRule> {
    rules
        .into_iter()
        .filter(|r| r.status == RuleStatus::Accepted)
        .collect()
}

/// Renders an itemset map as sorted label rows, for readable diffs.
pub fn describe(freq: &FrequentItemsets, catalog: &ItemCatalog) -> Vec<(String, u64)> {
    freq.sorted_rows(catalog)
        .into_iter()
        .map(|(s, c)| (catalog.join(s.items()), c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{parse_transactions, DbBuilder};
    use crate::rules::MinConfidence;

    const DB5: &[u8] = b"a,b,c\na,b\na,c\nb,c\na,b,c,d\n";

    fn params(min_support: u64, conf: &str) -> MiningParams {
        MiningParams::new(min_support, conf.parse::<MinConfidence>().unwrap()).unwrap()
    }

    #[test]
    fn db5_frequent() {
        let db = parse_transactions(DB5).unwrap();
        let freq = brute_force_frequent(&db, 3).unwrap();
        assert_eq!(
            describe(&freq, db.catalog()),
            [
                ("a", 4),
                ("b", 4),
                ("c", 4),
                ("a|b", 3),
                ("a|c", 3),
                ("b|c", 3)
            ]
            .map(|(l, c)| (l.to_string(), c))
        );
        assert!(brute_force_frequent(&db, 6).unwrap().is_empty());
    }

    #[test]
    fn single_transaction_lattice() {
        let db = parse_transactions(b"a,b,c,d,e\n").unwrap();
        let freq = brute_force_frequent(&db, 1).unwrap();
        assert_eq!(freq.len(), 31);
        assert!(freq.iter().all(|(_, c)| c == 1));
    }

    #[test]
    fn refuses_large_universes() {
        let mut b = DbBuilder::new();
        let labels: Vec<String> = (0..21).map(|i| format!("i{i}")).collect();
        b.push(labels.iter().map(String::as_str));
        let db = b.finish();
        assert_eq!(
            brute_force_frequent(&db, 1).unwrap_err(),
            OracleError::TooManyItems {
                items: 21,
                limit: 20
            }
        );
    }

    #[test]
    fn db5_rules() {
        let db = parse_transactions(DB5).unwrap();
        let rules = brute_force_rules(&db, &params(3, "0.75")).unwrap();
        assert_eq!(rules.len(), 6);
        assert!(rules.iter().all(|r| r.status == RuleStatus::Accepted
            && (r.confidence.numerator, r.confidence.denominator) == (3, 4)));
        let strict = brute_force_rules(&db, &params(3, "0.76")).unwrap();
        assert!(accepted_only(strict).is_empty());
        let empty = parse_transactions(b"").unwrap();
        assert!(brute_force_rules(&empty, &params(1, "0.5"))
            .unwrap()
            .is_empty());
    }
}
