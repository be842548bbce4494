//! Randomized three-way equivalence checking between Apriori, FP-Growth and
//! the brute-force oracle, with counterexample minimization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::apriori::{apriori_mine, MiningParams};
use crate::dataset::{DbBuilder, Itemset, TransactionDb};
use crate::fpgrowth::{build_fptree, fpgrowth_mine};
use crate::oracle::{brute_force_frequent, brute_force_rules, describe};
use crate::rules::{generate_rules, MinConfidence};

/// One randomized case.
#[derive(Debug, Clone)]
pub struct Case {
    pub db: TransactionDb,
    pub min_support: u64,
    pub min_confidence: MinConfidence,
}

#[derive(Debug, Clone, Copy)]
pub struct CaseLimits {
    pub max_items: usize,
    pub max_transactions: usize,
}

impl Default for CaseLimits {
    fn default() -> Self {
        CaseLimits {
            max_items: 12,
            max_transactions: 200,
        }
    }
}

/// Deterministic stream of random cases for a seed.
pub struct CaseGenerator {
    rng: ChaCha8Rng,
    limits: CaseLimits,
}

impl CaseGenerator {
    pub fn new(seed: u64, limits: CaseLimits) -> Self {
        CaseGenerator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            limits,
        }
    }

    pub fn next_case(&mut self) -> Case {
        let rng = &mut self.rng;
        let n_items = rng.gen_range(1..=self.limits.max_items.max(1));
        let n_transactions = rng.gen_range(0..=self.limits.max_transactions);
        let density: f64 = rng.gen_range(0.05..0.8);
        let labels: Vec<String> = (0..n_items).map(|i| format!("i{i}")).collect();
        let mut builder = DbBuilder::new();
        for _ in 0..n_transactions {
            let row: Vec<&str> = labels
                .iter()
                .filter(|_| rng.gen_bool(density))
                .map(String::as_str)
                .collect();
            builder.push(row);
        }
        let db = builder.finish();
        let min_support = rng.gen_range(1..=(db.len() as u64 / 3).max(1));
        let den = rng.gen_range(1..=20u64);
        let min_confidence =
            MinConfidence::from_ratio(rng.gen_range(0..=den), den).expect("num <= den");
        Case {
            db,
            min_support,
            min_confidence,
        }
    }
}

/// Describes the first disagreement between the miners on `case`.
pub fn find_mismatch(case: &Case) -> Option<String> {
    let db = &case.db;
    let catalog = db.catalog();
    let oracle = match brute_force_frequent(db, case.min_support) {
        Ok(f) => f,
        Err(e) => return Some(format!("oracle refused: {e}")),
    };
    let apriori = apriori_mine(db, case.min_support);
    let fpgrowth = fpgrowth_mine(db, case.min_support);
    if apriori != oracle {
        return Some(format!(
            "apriori {:?} != oracle {:?}",
            describe(&apriori, catalog),
            describe(&oracle, catalog)
        ));
    }
    if fpgrowth != oracle {
        return Some(format!(
            "fpgrowth {:?} != oracle {:?}",
            describe(&fpgrowth, catalog),
            describe(&oracle, catalog)
        ));
    }
    let (tree, header) = build_fptree(db, case.min_support);
    if let Err(e) = tree.check_invariants(&header) {
        return Some(format!("fp-tree invariant: {e}"));
    }
    let params = MiningParams::new(case.min_support, case.min_confidence).expect("support >= 1");
    let expected = brute_force_rules(db, &params).expect("bound already checked");
    match generate_rules(&apriori, catalog, &case.min_confidence, true) {
        Ok(rules) if rules == expected => None,
        Ok(rules) => Some(format!(
            "{} generated rules differ from {} oracle rules",
            rules.len(),
            expected.len()
        )),
        Err(e) => Some(format!("rule generation failed: {e}")),
    }
}

fn rebuild(db: &TransactionDb, transactions: &[Itemset]) -> TransactionDb {
    let mut builder = DbBuilder::new();
    for t in transactions {
        builder.push(db.catalog().labels_of(t.items()));
    }
    builder.finish()
}

/// Greedily drops transactions, then single items, while `fails` still
/// holds. The result is 1-minimal under both removals.
pub fn minimize<F>(db: &TransactionDb, mut fails: F) -> TransactionDb
where
    F: FnMut(&TransactionDb) -> bool,
{
    let mut current: Vec<Itemset> = db.transactions().to_vec();
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < current.len() {
            let mut trial = current.clone();
            trial.remove(i);
            if fails(&rebuild(db, &trial)) {
                current = trial;
                changed = true;
            } else {
                i += 1;
            }
        }
        for t in 0..current.len() {
            let mut pos = 0;
            while pos < current[t].len() {
                let mut trial = current.clone();
                trial[t] = trial[t].without_index(pos);
                if fails(&rebuild(db, &trial)) {
                    current = trial;
                    changed = true;
                } else {
                    pos += 1;
                }
            }
        }
        if !changed {
            return rebuild(db, &current);
        }
    }
}
