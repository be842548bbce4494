//! Transaction databases: item interning, transaction CSV ingestion and
//! survey recoding.
//!
//! Every item label is interned into an [`ItemCatalog`] which hands out
//! dense [`ItemId`]s in first-seen order. Label identity is decided on a
//! normalized key (trimmed, internal whitespace collapsed, case-folded),
//! while the first-seen trimmed spelling is kept for display.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DatasetError {
    #[error("malformed CSV at line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error("input is not valid UTF-8 (line {line})")]
    Encoding { line: u64 },
    #[error("survey header has no column named {0:?}")]
    MissingColumn(String),
    #[error("line {line}: negative age {age}")]
    NegativeAge { line: u64, age: i64 },
    #[error("line {line}: age {value:?} is not an integer")]
    InvalidAge { line: u64, value: String },
    #[error("invalid survey schema: {0}")]
    InvalidSchema(String),
}

/// Dense handle of an interned item label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Identity key of a label: trimmed, whitespace runs collapsed, lowercased.
pub fn normalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ItemCatalog {
    labels: Vec<String>,
    lookup: HashMap<String, ItemId>,
}

impl ItemCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns the id for `raw`, interning it if unseen. Blank labels are
    /// rejected with `None`.
    pub fn intern(&mut self, raw: &str) -> Option<ItemId> {
        let key = normalize_label(raw);
        if key.is_empty() {
            return None;
        }
        if let Some(&id) = self.lookup.get(&key) {
            return Some(id);
        }
        let id = ItemId(self.labels.len() as u32);
        self.labels.push(raw.trim().to_string());
        self.lookup.insert(key, id);
        Some(id)
    }

    pub fn get(&self, raw: &str) -> Option<ItemId> {
        self.lookup.get(&normalize_label(raw)).copied()
    }

    pub fn label(&self, id: ItemId) -> &str {
        &self.labels[id.index()]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> {
        (0..self.labels.len() as u32).map(ItemId)
    }

    /// Position of every item when the catalog is sorted by display label,
    /// indexed by `ItemId`. Used for deterministic tie-breaking.
    pub fn label_ranks(&self) -> Vec<u32> {
        let mut order: Vec<usize> = (0..self.labels.len()).collect();
        order.sort_by(|&a, &b| self.labels[a].cmp(&self.labels[b]).then(a.cmp(&b)));
        let mut ranks = vec![0; order.len()];
        for (rank, idx) in order.into_iter().enumerate() {
            ranks[idx] = rank as u32;
        }
        ranks
    }

    /// Display labels of `items`, in the given order.
    pub fn labels_of<'a>(&'a self, items: &'a [ItemId]) -> Vec<&'a str> {
        items.iter().map(|&id| self.label(id)).collect()
    }

    /// Display labels joined with `|`, the itemset notation used by every
    /// CSV emitter in this crate.
    pub fn join(&self, items: &[ItemId]) -> String {
        self.labels_of(items).join("|")
    }
}

/// A sorted, duplicate-free set of items.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Itemset(Vec<ItemId>);

impl Itemset {
    pub fn empty() -> Self {
        Itemset(Vec::new())
    }

    /// Builds an itemset from items in any order; duplicates are dropped.
    pub fn from_unsorted(mut items: Vec<ItemId>) -> Self {
        items.sort_unstable();
        items.dedup();
        Itemset(items)
    }

    /// Wraps an already strictly increasing sequence.
    ///
    /// Panics in debug builds if `items` is not strictly increasing.
    pub fn from_sorted(items: Vec<ItemId>) -> Self {
        debug_assert!(items.windows(2).all(|w| w[0] < w[1]));
        Itemset(items)
    }

    pub fn single(item: ItemId) -> Self {
        Itemset(vec![item])
    }

    pub fn items(&self) -> &[ItemId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, item: ItemId) -> bool {
        self.0.binary_search(&item).is_ok()
    }

    /// Subset test by merging the two sorted sequences.
    pub fn is_subset_of(&self, other: &Itemset) -> bool {
        let mut theirs = other.0.iter();
        'outer: for &mine in &self.0 {
            for &t in theirs.by_ref() {
                if t == mine {
                    continue 'outer;
                }
                if t > mine {
                    return false;
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Itemset) -> Itemset {
        let mut items = Vec::with_capacity(self.len() + other.len());
        items.extend_from_slice(&self.0);
        items.extend_from_slice(&other.0);
        Itemset::from_unsorted(items)
    }

    pub fn difference(&self, other: &Itemset) -> Itemset {
        Itemset(
            self.0
                .iter()
                .copied()
                .filter(|&i| !other.contains(i))
                .collect(),
        )
    }

    /// Copy of this itemset with `item` inserted.
    pub fn with(&self, item: ItemId) -> Itemset {
        let mut items = self.0.clone();
        if let Err(pos) = items.binary_search(&item) {
            items.insert(pos, item);
        }
        Itemset(items)
    }

    /// Copy of this itemset without the element at `pos`.
    pub fn without_index(&self, pos: usize) -> Itemset {
        let mut items = self.0.clone();
        items.remove(pos);
        Itemset(items)
    }
}

impl From<Vec<ItemId>> for Itemset {
    fn from(items: Vec<ItemId>) -> Self {
        Itemset::from_unsorted(items)
    }
}

/// Raw label to canonical label substitutions applied before interning.
#[derive(Debug, Clone, Default)]
pub struct Aliases {
    map: HashMap<String, String>,
}

impl Aliases {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, raw: &str, canonical: &str) {
        self.map
            .insert(normalize_label(raw), canonical.trim().to_string());
    }

    pub fn resolve<'a>(&'a self, raw: &'a str) -> &'a str {
        match self.map.get(&normalize_label(raw)) {
            Some(canonical) => canonical.as_str(),
            None => raw,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Parses a headerless two-column `raw_label,canonical_label` CSV.
    pub fn parse(content: &[u8]) -> Result<Self, DatasetError> {
        let text = decode(content)?;
        check_quoting(text)?;
        let mut aliases = Aliases::new();
        for record in csv_reader(text, false).records() {
            let record = record.map_err(csv_error)?;
            let line = record.position().map_or(0, |p| p.line());
            let fields: Vec<&str> = record.iter().collect();
            match fields.as_slice() {
                [raw, canonical] if !raw.trim().is_empty() && !canonical.trim().is_empty() => {
                    aliases.insert(raw, canonical)
                }
                [raw] if raw.trim().is_empty() => {}
                _ => {
                    return Err(DatasetError::Csv {
                        line,
                        message: "alias rows need exactly raw_label,canonical_label".into(),
                    })
                }
            }
        }
        Ok(aliases)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TransactionDb {
    catalog: ItemCatalog,
    transactions: Vec<Itemset>,
}

impl TransactionDb {
    /// Assembles a database, checking that every item is in the catalog.
    pub fn new(catalog: ItemCatalog, transactions: Vec<Itemset>) -> Option<Self> {
        let size = catalog.len();
        transactions
            .iter()
            .all(|t| t.items().iter().all(|i| i.index() < size))
            .then_some(TransactionDb {
                catalog,
                transactions,
            })
    }

    pub fn catalog(&self) -> &ItemCatalog {
        &self.catalog
    }

    pub fn transactions(&self) -> &[Itemset] {
        &self.transactions
    }

    /// Number of transactions, empty ones included.
    pub fn len(&self) -> usize {
        self.transactions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transactions.is_empty()
    }

    /// Sum of transaction lengths.
    pub fn item_volume(&self) -> usize {
        self.transactions.iter().map(Itemset::len).sum()
    }

    /// Number of items that occur in at least one transaction.
    pub fn distinct_items(&self) -> usize {
        self.item_counts().iter().filter(|&&c| c > 0).count()
    }

    /// Per-item presence counts indexed by `ItemId`.
    pub fn item_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.catalog.len()];
        for t in &self.transactions {
            for &item in t.items() {
                counts[item.index()] += 1;
            }
        }
        counts
    }

    /// Serializes one row per transaction, labels in `ItemId` order.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .flexible(true)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        for t in &self.transactions {
            writer
                .write_record(self.catalog.labels_of(t.items()))
                .expect("writing to memory");
        }
        String::from_utf8(writer.into_inner().expect("flush to memory")).expect("labels are UTF-8")
    }
}

/// Incrementally interns rows into a [`TransactionDb`].
#[derive(Debug, Default)]
pub struct DbBuilder {
    catalog: ItemCatalog,
    transactions: Vec<Itemset>,
    aliases: Aliases,
}

impl DbBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_aliases(aliases: Aliases) -> Self {
        DbBuilder {
            aliases,
            ..Self::default()
        }
    }

    /// Interns `label` without adding a transaction, fixing its id.
    pub fn declare(&mut self, label: &str) -> Option<ItemId> {
        let label = self.aliases.resolve(label);
        self.catalog.intern(label)
    }

    pub fn push<'a, I>(&mut self, labels: I)
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut items = Vec::new();
        for raw in labels {
            let label = self.aliases.resolve(raw);
            if let Some(id) = self.catalog.intern(label) {
                items.push(id);
            }
        }
        self.transactions.push(Itemset::from_unsorted(items));
    }

    pub fn finish(self) -> TransactionDb {
        TransactionDb {
            catalog: self.catalog,
            transactions: self.transactions,
        }
    }
}

fn decode(content: &[u8]) -> Result<&str, DatasetError> {
    std::str::from_utf8(content).map_err(|e| {
        let valid = &content[..e.valid_up_to()];
        let line = 1 + valid.iter().filter(|&&b| b == b'\n').count() as u64;
        DatasetError::Encoding { line }
    })
}

/// Strict RFC-4180 quoting check. The csv reader accepts stray quotes
/// literally, so malformed quoting is caught here with its line number.
fn check_quoting(text: &str) -> Result<(), DatasetError> {
    #[derive(PartialEq)]
    enum State {
        FieldStart,
        Unquoted,
        Quoted,
        QuoteInQuoted,
    }
    let mut state = State::FieldStart;
    let mut line = 1u64;
    let mut quote_line = 1u64;
    let bad = |line: u64, message: &str| DatasetError::Csv {
        line,
        message: message.to_string(),
    };
    for c in text.chars() {
        state = match (state, c) {
            (State::Quoted, '"') => State::QuoteInQuoted,
            (State::Quoted, _) => State::Quoted,
            (State::QuoteInQuoted, '"') => State::Quoted,
            (State::QuoteInQuoted, ',') => State::FieldStart,
            (State::QuoteInQuoted, '\r' | '\n') => State::FieldStart,
            (State::QuoteInQuoted, _) => {
                return Err(bad(line, "unexpected character after closing quote"))
            }
            (State::FieldStart, '"') => {
                quote_line = line;
                State::Quoted
            }
            (State::Unquoted, '"') => return Err(bad(line, "quote inside an unquoted field")),
            (State::FieldStart | State::Unquoted, ',' | '\r' | '\n') => State::FieldStart,
            (State::FieldStart | State::Unquoted, _) => State::Unquoted,
        };
        if c == '\n' {
            line += 1;
        }
    }
    if state == State::Quoted {
        return Err(bad(quote_line, "unterminated quoted field"));
    }
    Ok(())
}

fn csv_reader(text: &str, headers: bool) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(headers)
        .flexible(true)
        .from_reader(text.as_bytes())
}

fn csv_error(e: csv::Error) -> DatasetError {
    let line = e.position().map_or(0, |p| p.line());
    match e.kind() {
        csv::ErrorKind::Utf8 { .. } => DatasetError::Encoding { line },
        _ => DatasetError::Csv {
            line,
            message: e.to_string(),
        },
    }
}

/// Parses a transactions CSV: one transaction per row, fields are labels.
///
/// Blank fields are skipped, so a row of only empty fields is an empty
/// transaction. Fully blank lines are not records and are ignored.
pub fn parse_transactions(content: &[u8]) -> Result<TransactionDb, DatasetError> {
    parse_transactions_with(content, Aliases::new())
}

pub fn parse_transactions_with(
    content: &[u8],
    aliases: Aliases,
) -> Result<TransactionDb, DatasetError> {
    let text = decode(content)?;
    check_quoting(text)?;
    let mut builder = DbBuilder::with_aliases(aliases);
    for record in csv_reader(text, false).records() {
        let record = record.map_err(csv_error)?;
        builder.push(record.iter());
    }
    Ok(builder.finish())
}

pub const UNDER_18: &str = "Under 18";
pub const AGE_18_24: &str = "18-24";
pub const AGE_25_34: &str = "25-34";
pub const ABOVE_35: &str = "Above 35";

/// Recodes an age in years into its age-group label. `None` is a missing
/// answer and maps to `missing_label`.
pub fn bucket_age(age: Option<i64>, missing_label: &str) -> Result<&str, i64> {
    match age {
        None => Ok(missing_label),
        Some(a) if a < 0 => Err(a),
        Some(a) if a < 18 => Ok(UNDER_18),
        Some(a) if a < 25 => Ok(AGE_18_24),
        Some(a) if a < 35 => Ok(AGE_25_34),
        Some(_) => Ok(ABOVE_35),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SurveySchema {
    pub age_column: String,
    pub impact_column: String,
    pub multiselect_delimiter: char,
    pub missing_age_label: String,
}

impl Default for SurveySchema {
    fn default() -> Self {
        SurveySchema {
            age_column: "age".into(),
            impact_column: "impacts".into(),
            multiselect_delimiter: ';',
            missing_age_label: "Don't remember".into(),
        }
    }
}

impl SurveySchema {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.multiselect_delimiter == ',' {
            return Err(DatasetError::InvalidSchema(
                "multi-select delimiter cannot be ',' (the field separator)".into(),
            ));
        }
        if normalize_label(&self.missing_age_label).is_empty() {
            return Err(DatasetError::InvalidSchema(
                "missing-age label is blank".into(),
            ));
        }
        Ok(())
    }
}

/// Recodes a survey CSV into one transaction per respondent: the age bucket
/// plus every selected impact.
pub fn parse_survey(content: &[u8], schema: &SurveySchema) -> Result<TransactionDb, DatasetError> {
    parse_survey_with(content, schema, Aliases::new())
}

pub fn parse_survey_with(
    content: &[u8],
    schema: &SurveySchema,
    aliases: Aliases,
) -> Result<TransactionDb, DatasetError> {
    schema.validate()?;
    let text = decode(content)?;
    check_quoting(text)?;
    let mut reader = csv_reader(text, true);
    let headers = reader.headers().map_err(csv_error)?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name.trim())
            .ok_or_else(|| DatasetError::MissingColumn(name.to_string()))
    };
    let age_col = column(&schema.age_column)?;
    let impact_col = column(&schema.impact_column)?;
    let missing_key = normalize_label(&schema.missing_age_label);

    let mut builder = DbBuilder::with_aliases(aliases);
    for record in reader.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let age_cell = record.get(age_col).unwrap_or("").trim();
        let age = if age_cell.is_empty() || normalize_label(age_cell) == missing_key {
            None
        } else {
            Some(
                age_cell
                    .parse::<i64>()
                    .map_err(|_| DatasetError::InvalidAge {
                        line,
                        value: age_cell.to_string(),
                    })?,
            )
        };
        let bucket = bucket_age(age, &schema.missing_age_label)
            .map_err(|age| DatasetError::NegativeAge { line, age })?;
        let impacts = record.get(impact_col).unwrap_or("");
        builder.push(std::iter::once(bucket).chain(impacts.split(schema.multiselect_delimiter)));
    }
    Ok(builder.finish())
}

/// Number of transactions containing each item. Items that never occur are
/// absent from the map.
pub fn item_frequencies(db: &TransactionDb) -> BTreeMap<ItemId, u64> {
    db.item_counts()
        .into_iter()
        .enumerate()
        .filter(|&(_, c)| c > 0)
        .map(|(i, c)| (ItemId(i as u32), c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const DB5: &str = "a,b,c\na,b\na,c\nb,c\na,b,c,d\n";

    fn labels(db: &TransactionDb, t: usize) -> Vec<&str> {
        db.catalog().labels_of(db.transactions()[t].items())
    }

    fn counts_by_label(db: &TransactionDb) -> BTreeMap<String, u64> {
        item_frequencies(db)
            .into_iter()
            .map(|(id, c)| (db.catalog().label(id).to_string(), c))
            .collect()
    }

    #[test]
    fn parses_simple_rows() {
        let db = parse_transactions(b"a,b,c\na,b\n").unwrap();
        assert_eq!(db.len(), 2);
        assert_eq!(db.catalog().len(), 3);
        assert_eq!(labels(&db, 0), ["a", "b", "c"]);
        assert_eq!(labels(&db, 1), ["a", "b"]);
    }

    #[test]
    fn normalization_folds_case_and_whitespace() {
        let db = parse_transactions(b"Anxiety , anxiety\n").unwrap();
        assert_eq!(db.len(), 1);
        assert_eq!(db.transactions()[0].len(), 1);
        assert_eq!(db.catalog().label(ItemId(0)), "Anxiety");

        let db = parse_transactions(b"\"Intense   fear\",intense fear\n").unwrap();
        assert_eq!(db.catalog().len(), 1);
        assert_eq!(db.catalog().label(ItemId(0)), "Intense   fear");
    }

    #[test]
    fn apostrophe_variants_stay_distinct() {
        let db = parse_transactions(b"Don't remember,I dont remember\n").unwrap();
        assert_eq!(db.catalog().len(), 2);
    }

    #[test]
    fn db5_counts() {
        let db = parse_transactions(DB5.as_bytes()).unwrap();
        assert_eq!(db.len(), 5);
        assert_eq!(db.catalog().len(), 4);
        let expected: BTreeMap<String, u64> = [("a", 4), ("b", 4), ("c", 4), ("d", 1)]
            .map(|(l, c)| (l.to_string(), c))
            .into();
        assert_eq!(counts_by_label(&db), expected);
    }

    #[test]
    fn empty_and_repeated_dbs() {
        let db = parse_transactions(b"").unwrap();
        assert!(item_frequencies(&db).is_empty());

        let db = parse_transactions(b"x,y\ny,x\nx,y\n").unwrap();
        let freq = item_frequencies(&db);
        assert_eq!(freq.values().copied().collect::<Vec<_>>(), [3, 3]);
    }

    #[test]
    fn blank_fields_and_empty_rows() {
        let db = parse_transactions(b"a,,b\n,\n\"\"\nb,b\r\n").unwrap();
        assert_eq!(db.len(), 4);
        assert_eq!(labels(&db, 0), ["a", "b"]);
        assert!(db.transactions()[1].is_empty());
        assert!(db.transactions()[2].is_empty());
        assert_eq!(labels(&db, 3), ["b"]);
    }

    #[test]
    fn malformed_quoting_reports_line() {
        let line_of = |input: &[u8]| match parse_transactions(input) {
            Err(DatasetError::Csv { line, .. }) => line,
            other => panic!("expected CSV error, got {other:?}"),
        };
        assert_eq!(line_of(b"a,b\n\"c\"x,d\n"), 2);
        assert_eq!(line_of(b"a,b\nc,d\"e\n"), 2);
        assert_eq!(line_of(b"a\nb\n\"open,c\nd\n"), 3);
        // escaped quotes and embedded newlines are fine
        let db = parse_transactions(b"\"say \"\"hi\"\"\",\"two\nlines\"\r\nx\n").unwrap();
        assert_eq!(db.len(), 2);
        assert_eq!(db.catalog().label(ItemId(0)), "say \"hi\"");
    }

    #[test]
    fn invalid_utf8_reports_line() {
        let err = parse_transactions(b"a,b\n\xff,c\n").unwrap_err();
        assert_eq!(err, DatasetError::Encoding { line: 2 });
    }

    #[test]
    fn aliases_apply_before_interning() {
        let aliases = Aliases::parse(b"I dont remember,Don't remember\n").unwrap();
        let db = parse_transactions_with(b"Don't remember\ni DONT remember\n", aliases).unwrap();
        assert_eq!(db.catalog().len(), 1);
        assert_eq!(item_frequencies(&db)[&ItemId(0)], 2);
    }

    #[test]
    fn alias_rows_must_have_two_fields() {
        assert!(matches!(
            Aliases::parse(b"a,b,c\n"),
            Err(DatasetError::Csv { line: 1, .. })
        ));
    }

    #[test]
    fn age_buckets() {
        let missing = "Don't remember";
        assert_eq!(bucket_age(Some(17), missing), Ok(UNDER_18));
        assert_eq!(bucket_age(Some(0), missing), Ok(UNDER_18));
        assert_eq!(bucket_age(Some(18), missing), Ok(AGE_18_24));
        assert_eq!(bucket_age(Some(24), missing), Ok(AGE_18_24));
        assert_eq!(bucket_age(Some(25), missing), Ok(AGE_25_34));
        assert_eq!(bucket_age(Some(34), missing), Ok(AGE_25_34));
        assert_eq!(bucket_age(Some(35), missing), Ok(ABOVE_35));
        assert_eq!(bucket_age(Some(80), missing), Ok(ABOVE_35));
        assert_eq!(bucket_age(None, missing), Ok("Don't remember"));
        assert_eq!(bucket_age(Some(-1), missing), Err(-1));
    }

    #[test]
    fn survey_rows_recode() {
        let csv = "id,age,impacts\n1,16,Anxiety;Depressions\n2,,\n";
        let db = parse_survey(csv.as_bytes(), &SurveySchema::default()).unwrap();
        assert_eq!(db.len(), 2);
        let mut first = labels(&db, 0);
        first.sort();
        assert_eq!(first, ["Anxiety", "Depressions", "Under 18"]);
        assert_eq!(labels(&db, 1), ["Don't remember"]);
    }

    #[test]
    fn survey_counts() {
        let csv = "age,impacts\n16,Anxiety;Intense fear\n20,Anxiety\n16,Anxiety\n";
        let db = parse_survey(csv.as_bytes(), &SurveySchema::default()).unwrap();
        let counts = counts_by_label(&db);
        assert_eq!(counts["Anxiety"], 3);
        assert_eq!(counts["Under 18"], 2);
        assert_eq!(counts["Intense fear"], 1);
        assert_eq!(counts["18-24"], 1);
        assert_eq!(counts.len(), 4);
    }

    #[test]
    fn survey_missing_age_label_in_cell() {
        let csv = "age,impacts\nDon't remember,Headaches\n";
        let db = parse_survey(csv.as_bytes(), &SurveySchema::default()).unwrap();
        let mut row = labels(&db, 0);
        row.sort();
        assert_eq!(row, ["Don't remember", "Headaches"]);
    }

    #[test]
    fn survey_errors() {
        let schema = SurveySchema::default();
        assert_eq!(
            parse_survey(b"age,other\n1,x\n", &schema).unwrap_err(),
            DatasetError::MissingColumn("impacts".into())
        );
        assert_eq!(
            parse_survey(b"age,impacts\n-3,x\n", &schema).unwrap_err(),
            DatasetError::NegativeAge { line: 2, age: -3 }
        );
        assert!(matches!(
            parse_survey(b"age,impacts\nold,x\n", &schema).unwrap_err(),
            DatasetError::InvalidAge { line: 2, .. }
        ));
        let comma = SurveySchema {
            multiselect_delimiter: ',',
            ..SurveySchema::default()
        };
        assert!(matches!(
            parse_survey(b"age,impacts\n", &comma).unwrap_err(),
            DatasetError::InvalidSchema(_)
        ));
    }

    #[test]
    fn itemset_ops() {
        let s = |v: &[u32]| Itemset::from_unsorted(v.iter().map(|&i| ItemId(i)).collect());
        assert!(s(&[1, 3]).is_subset_of(&s(&[0, 1, 2, 3])));
        assert!(!s(&[1, 4]).is_subset_of(&s(&[0, 1, 2, 3])));
        assert!(s(&[]).is_subset_of(&s(&[])));
        assert!(!s(&[0]).is_subset_of(&s(&[])));
        assert_eq!(s(&[3, 1, 3]), s(&[1, 3]));
        assert_eq!(s(&[1, 3]).union(&s(&[2, 3])), s(&[1, 2, 3]));
        assert_eq!(s(&[1, 2, 3]).difference(&s(&[2])), s(&[1, 3]));
        assert_eq!(s(&[1, 3]).with(ItemId(2)), s(&[1, 2, 3]));
    }

    #[test]
    fn label_ranks_sort_by_display_label() {
        let db = parse_transactions(b"c,a,b\n").unwrap();
        // ids follow first appearance: c=0, a=1, b=2
        assert_eq!(db.catalog().label_ranks(), [2, 0, 1]);
    }
}
