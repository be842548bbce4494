//! Association rules `X => Y` generated from frequent itemsets.
//!
//! Confidences are kept as exact count pairs next to their `f64` quotient,
//! and the minimum confidence is a rational number, so acceptance at the
//! threshold boundary is decided exactly.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dataset::{ItemCatalog, Itemset};
use crate::frequent::FrequentItemsets;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RulesError {
    #[error("support of {union} for the whole itemset exceeds antecedent support {antecedent}")]
    ConfidenceContract { union: u64, antecedent: u64 },
    #[error("itemset {0} has no stored support; the frequent itemsets are not downward closed")]
    MissingSupport(String),
    #[error(
        "invalid minimum confidence {0:?}: expected a fraction in [0, 1], a percentage or p/q"
    )]
    InvalidMinConfidence(String),
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Minimum confidence as an exact fraction in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinConfidence {
    num: u64,
    den: u64,
}

impl MinConfidence {
    pub fn from_ratio(num: u64, den: u64) -> Option<Self> {
        if den == 0 || num > den {
            return None;
        }
        let g = gcd(num, den).max(1);
        Some(MinConfidence {
            num: num / g,
            den: den / g,
        })
    }

    /// Exact value of the shortest decimal that round-trips to `value`.
    pub fn from_f64(value: f64) -> Option<Self> {
        if !value.is_finite() {
            return None;
        }
        format!("{value}").parse().ok()
    }

    pub fn ratio(&self) -> (u64, u64) {
        (self.num, self.den)
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// `union / antecedent >= self`, by cross-multiplication.
    pub fn accepts(&self, union: u64, antecedent: u64) -> bool {
        union as u128 * self.den as u128 >= self.num as u128 * antecedent as u128
    }
}

impl FromStr for MinConfidence {
    type Err = RulesError;

    /// Accepts `0.4`, `40%` or `2/5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RulesError::InvalidMinConfidence(s.to_string());
        let text = s.trim();
        if let Some((n, d)) = text.split_once('/') {
            let n = n.trim().parse().map_err(|_| bad())?;
            let d = d.trim().parse().map_err(|_| bad())?;
            return MinConfidence::from_ratio(n, d).ok_or_else(bad);
        }
        let (digits, percent) = match text.strip_suffix('%') {
            Some(rest) => (rest.trim(), true),
            None => (text, false),
        };
        let (whole, frac) = digits.split_once('.').unwrap_or((digits, ""));
        if whole.is_empty() && frac.is_empty()
            || !whole
                .bytes()
                .chain(frac.bytes())
                .all(|b| b.is_ascii_digit())
            || frac.len() > 18
        {
            return Err(bad());
        }
        let mut num: u64 = 0;
        for b in whole.bytes().chain(frac.bytes()) {
            num = num
                .checked_mul(10)
                .and_then(|n| n.checked_add((b - b'0') as u64))
                .ok_or_else(bad)?;
        }
        let mut den = 10u64.pow(frac.len() as u32);
        if percent {
            den = den.checked_mul(100).ok_or_else(bad)?;
        }
        MinConfidence::from_ratio(num, den).ok_or_else(bad)
    }
}

impl fmt::Display for MinConfidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// `numerator / denominator` with its correctly rounded quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Confidence {
    pub numerator: u64,
    pub denominator: u64,
    pub value: f64,
}

impl Eq for Confidence {}

/// Shortest decimal that round-trips, e.g. `0.40425531914893614`, `1.0`.
pub fn format_confidence(value: f64) -> String {
    format!("{value:?}")
}

pub fn rule_confidence(sup_union: u64, sup_antecedent: u64) -> Result<Confidence, RulesError> {
    if sup_union == 0 || sup_union > sup_antecedent {
        return Err(RulesError::ConfidenceContract {
            union: sup_union,
            antecedent: sup_antecedent,
        });
    }
    Ok(Confidence {
        numerator: sup_union,
        denominator: sup_antecedent,
        value: sup_union as f64 / sup_antecedent as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleStatus {
    Accepted,
    Rejected,
}

impl fmt::Display for RuleStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleStatus::Accepted => "Accepted",
            RuleStatus::Rejected => "Rejected",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationRule {
    pub antecedent: Itemset,
    pub consequent: Itemset,
    /// Support of `antecedent ∪ consequent`.
    pub support: u64,
    pub confidence: Confidence,
    pub status: RuleStatus,
}

impl AssociationRule {
    /// Builds the rule `antecedent => consequent` from the two support
    /// counts and classifies it against `min_confidence`.
    pub fn new(
        antecedent: Itemset,
        consequent: Itemset,
        sup_union: u64,
        sup_antecedent: u64,
        min_confidence: &MinConfidence,
    ) -> Result<Self, RulesError> {
        let confidence = rule_confidence(sup_union, sup_antecedent)?;
        let status = if min_confidence.accepts(sup_union, sup_antecedent) {
            RuleStatus::Accepted
        } else {
            RuleStatus::Rejected
        };
        Ok(AssociationRule {
            antecedent,
            consequent,
            support: sup_union,
            confidence,
            status,
        })
    }

    pub fn itemset(&self) -> Itemset {
        self.antecedent.union(&self.consequent)
    }
}

/// Every nonempty proper subset of `set`, by bitmask over its positions.
pub(crate) fn proper_subsets(set: &Itemset) -> impl Iterator<Item = Itemset> + '_ {
    let k = set.len();
    assert!(k < 64, "itemset too large to split");
    let full = (1u64 << k) - 1;
    (1..full).map(move |mask| {
        Itemset::from_sorted(
            set.items()
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &item)| item)
                .collect(),
        )
    })
}

/// Orders rules by (itemset size, itemset labels, antecedent labels).
pub fn sort_rules(rules: &mut [AssociationRule], catalog: &ItemCatalog) {
    rules.sort_by_cached_key(|r| {
        let whole = r.itemset();
        (
            whole.len(),
            catalog
                .labels_of(whole.items())
                .into_iter()
                .map(str::to_owned)
                .collect::<Vec<_>>(),
            catalog
                .labels_of(r.antecedent.items())
                .into_iter()
                .map(str::to_owned)
                .collect::<Vec<_>>(),
        )
    });
}

/// Splits every stored itemset of two or more items into all rules
/// `s => l - s`. Rejected rules are kept only when `include_rejected`.
pub fn generate_rules(
    freq: &FrequentItemsets,
    catalog: &ItemCatalog,
    min_confidence: &MinConfidence,
    include_rejected: bool,
) -> Result<Vec<AssociationRule>, RulesError> {
    let mut rules = Vec::new();
    for (whole, support) in freq.iter().filter(|(s, _)| s.len() >= 2) {
        for antecedent in proper_subsets(whole) {
            let sup_antecedent = freq
                .get(&antecedent)
                .ok_or_else(|| RulesError::MissingSupport(catalog.join(antecedent.items())))?;
            let consequent = whole.difference(&antecedent);
            let rule = AssociationRule::new(
                antecedent,
                consequent,
                support,
                sup_antecedent,
                min_confidence,
            )?;
            if include_rejected || rule.status == RuleStatus::Accepted {
                rules.push(rule);
            }
        }
    }
    sort_rules(&mut rules, catalog);
    Ok(rules)
}

/// `antecedent,consequent,support,confidence,status` CSV.
pub fn rules_to_csv(rules: &[AssociationRule], catalog: &ItemCatalog) -> String {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer
        .write_record([
            "antecedent",
            "consequent",
            "support",
            "confidence",
            "status",
        ])
        .expect("writing to memory");
    for r in rules {
        writer
            .write_record([
                catalog.join(r.antecedent.items()),
                catalog.join(r.consequent.items()),
                r.support.to_string(),
                format_confidence(r.confidence.value),
                r.status.to_string(),
            ])
            .expect("writing to memory");
    }
    String::from_utf8(writer.into_inner().expect("flush to memory")).expect("labels are UTF-8")
}
