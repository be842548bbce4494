//! Frequent itemset and association rule mining.
//!
//! Two miners produce identical [`FrequentItemsets`]: levelwise
//! [`apriori_mine`] and tree-based [`fpgrowth_mine`]. The [`oracle`] module
//! holds exhaustive reference implementations used to cross-check them, and
//! [`bench`] compares their cost on synthetic data.

pub mod apriori;
pub mod bench;
pub mod check;
pub mod cli;
pub mod dataset;
pub mod fpgrowth;
pub mod frequent;
pub mod oracle;
pub mod rules;

pub use apriori::{apriori_mine, MiningParams};
pub use dataset::{
    item_frequencies, parse_survey, parse_transactions, ItemCatalog, ItemId, Itemset, SurveySchema,
    TransactionDb,
};
pub use fpgrowth::fpgrowth_mine;
pub use frequent::FrequentItemsets;
pub use rules::{generate_rules, AssociationRule, MinConfidence, RuleStatus};
