//! Synthetic workloads and the Apriori / FP-Growth comparison harness.
//!
//! ## Generator
//!
//! [`generate_synthetic`] is deterministic for a given [`SynthParams`]. It
//! draws from `ChaCha8Rng::seed_from_u64(seed)` (rand_chacha 0.3), using
//! `Rng::gen::<f64>()` for every uniform in `[0, 1)`:
//!
//! 1. Item `r` (1-based popularity rank) has weight `1 / r^skew` and label
//!    `iNN`, zero-padded to the width of `n_items`. Labels are interned in
//!    rank order, so item ids follow rank.
//! 2. A transaction length is `1 + Binomial(n_items - 1, p)` with
//!    `p = (mean_len - 1) / (n_items - 1)`, drawn as `n_items - 1`
//!    Bernoulli trials `u < p`. Its mean is exactly `mean_len` and it always
//!    lies in `[1, n_items]`.
//! 3. That many distinct items are drawn by successive weighted sampling
//!    without replacement: `u * remaining_weight` is located by a linear
//!    scan over the ranks still available.
//!
//! ## Axes
//!
//! The swept parameters are read as: `min_support` (threshold),
//! `n_transactions` (database size), `mean_len` (transaction length) and
//! `n_items` (item universe size). The last three regenerate the database
//! with the base seed for every value; `min_support` mines one database at
//! each threshold.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::apriori::apriori_mine_with_stats;
use crate::dataset::{DbBuilder, TransactionDb};
use crate::fpgrowth::fpgrowth_mine_with_stats;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("invalid synthetic parameters: {0}")]
    InvalidParams(String),
    #[error("axis value {value} is invalid: {reason}")]
    InvalidAxisValue { value: f64, reason: String },
    #[error("invalid sweep: {0}")]
    InvalidSweep(String),
    #[error("malformed report: {0}")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub n_transactions: usize,
    pub n_items: usize,
    pub mean_len: f64,
    pub skew: f64,
    pub seed: u64,
}

impl SynthParams {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidParams(m));
        if self.n_items == 0 {
            return bad("n_items must be at least 1".into());
        }
        if !(self.mean_len.is_finite() && self.mean_len >= 1.0) {
            return bad(format!("mean_len {} must be at least 1", self.mean_len));
        }
        if self.mean_len > self.n_items as f64 {
            return bad(format!(
                "mean_len {} exceeds n_items {}",
                self.mean_len, self.n_items
            ));
        }
        if !(self.skew.is_finite() && self.skew >= 0.0) {
            return bad(format!("skew {} must be a finite value >= 0", self.skew));
        }
        Ok(())
    }
}

pub fn generate_synthetic(p: &SynthParams) -> Result<TransactionDb, BenchError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let width = p.n_items.to_string().len();
    let mut builder = DbBuilder::new();
    let labels: Vec<String> = (1..=p.n_items).map(|r| format!("i{r:0width$}")).collect();
    for label in &labels {
        builder.declare(label);
    }
    let weights: Vec<f64> = (1..=p.n_items).map(|r| (r as f64).powf(-p.skew)).collect();
    let extra_p = if p.n_items > 1 {
        (p.mean_len - 1.0) / (p.n_items - 1) as f64
    } else {
        0.0
    };

    let mut available = vec![true; p.n_items];
    let mut chosen: Vec<usize> = Vec::with_capacity(p.n_items);
    for _ in 0..p.n_transactions {
        let len = 1
            + (1..p.n_items)
                .filter(|_| rng.gen::<f64>() < extra_p)
                .count();
        available.iter_mut().for_each(|a| *a = true);
        chosen.clear();
        let mut remaining: f64 = weights.iter().sum();
        for _ in 0..len {
            let target = rng.gen::<f64>() * remaining;
            let mut acc = 0.0;
            let mut pick = None;
            for (r, &w) in weights.iter().enumerate() {
                if !available[r] {
                    continue;
                }
                pick = Some(r);
                acc += w;
                if target < acc {
                    break;
                }
            }
            let r = pick.expect("fewer draws than items");
            available[r] = false;
            remaining -= weights[r];
            chosen.push(r);
        }
        builder.push(chosen.iter().map(|&r| labels[r].as_str()));
    }
    Ok(builder.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Apriori,
    #[serde(rename = "fpgrowth")]
    FpGrowth,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Apriori => "apriori",
            Algorithm::FpGrowth => "fpgrowth",
        })
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "apriori" => Ok(Algorithm::Apriori),
            "fpgrowth" | "fp-growth" => Ok(Algorithm::FpGrowth),
            _ => Err(format!("unknown algorithm {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialMeasurement {
    pub algorithm: Algorithm,
    pub wall_ns: u64,
    /// Peak bytes of algorithm-owned structures, from structure counts.
    pub mem_proxy_bytes: u64,
    /// Process peak resident set size, or -1 where unavailable.
    pub rss_peak_bytes: i64,
    pub n_frequent: u64,
    /// Candidates counted (Apriori) or tree nodes created (FP-Growth).
    pub work_counter: u64,
}

/// Peak RSS from `/proc/self/status` (`VmHWM`), or -1.
pub fn peak_rss_bytes() -> i64 {
    std::fs::read_to_string("/proc/self/status")
        .ok()
        .and_then(|status| {
            status.lines().find_map(|line| {
                let kb = line.strip_prefix("VmHWM:")?.trim().strip_suffix("kB")?;
                kb.trim().parse::<i64>().ok()
            })
        })
        .map_or(-1, |kb| kb * 1024)
}

/// Runs one miner once and records its cost; the itemsets are dropped.
pub fn run_trial(db: &TransactionDb, min_support: u64, algorithm: Algorithm) -> TrialMeasurement {
    let start = Instant::now();
    let (n_frequent, mem, work) = match algorithm {
        Algorithm::Apriori => {
            let (freq, stats) = apriori_mine_with_stats(db, min_support);
            (freq.len(), stats.peak_bytes, stats.candidates_tested)
        }
        Algorithm::FpGrowth => {
            let (freq, stats) = fpgrowth_mine_with_stats(db, min_support);
            (freq.len(), stats.peak_bytes, stats.nodes_created)
        }
    };
    let elapsed = start.elapsed().as_nanos().max(1);
    TrialMeasurement {
        algorithm,
        wall_ns: u64::try_from(elapsed).unwrap_or(u64::MAX),
        mem_proxy_bytes: mem,
        rss_peak_bytes: peak_rss_bytes(),
        n_frequent: n_frequent as u64,
        work_counter: work,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    MinSupport,
    NTransactions,
    MeanLen,
    NItems,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::MinSupport => "min_support",
            Axis::NTransactions => "n_transactions",
            Axis::MeanLen => "mean_len",
            Axis::NItems => "n_items",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "min_support" | "min-support" => Ok(Axis::MinSupport),
            "n_transactions" | "n-transactions" => Ok(Axis::NTransactions),
            "mean_len" | "mean-len" => Ok(Axis::MeanLen),
            "n_items" | "n-items" => Ok(Axis::NItems),
            _ => Err(format!("unknown axis {s:?}")),
        }
    }
}

/// A support threshold as an absolute count or a fraction of the database.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Absolute(u64),
    Fraction(f64),
}

impl Threshold {
    /// Absolute count for a database of `n` transactions: fractions become
    /// `ceil(f * n)`, never below 1.
    pub fn resolve(&self, n: usize) -> u64 {
        match *self {
            Threshold::Absolute(c) => c.max(1),
            Threshold::Fraction(f) => ((f * n as f64).ceil() as u64).max(1),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            Threshold::Absolute(0) => Err("absolute minimum support must be at least 1".into()),
            Threshold::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                Err(format!("support fraction {f} must be in (0, 1]"))
            }
            _ => Ok(()),
        }
    }

    /// Whole numbers are counts; values in `(0, 1)` are fractions.
    pub fn from_axis_value(v: f64) -> Option<Threshold> {
        if v >= 1.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
            Some(Threshold::Absolute(v as u64))
        } else if v > 0.0 && v < 1.0 {
            Some(Threshold::Fraction(v))
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub base: SynthParams,
    pub threshold: Threshold,
    pub axis: Axis,
    pub values: Vec<f64>,
    pub repetitions: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub axis: Axis,
    pub axis_value: f64,
    pub algorithm: Algorithm,
    pub rep_count: usize,
    pub wall_ns_median: u64,
    pub mem_proxy_bytes: u64,
    pub rss_peak_bytes: i64,
    pub n_frequent: u64,
    pub work_counter: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    /// Copy with the timing-dependent columns (wall time, RSS) zeroed.
    pub fn without_timing(&self) -> BenchReport {
        let mut r = self.clone();
        for row in &mut r.rows {
            row.wall_ns_median = 0;
            row.rss_peak_bytes = 0;
        }
        r
    }

    pub fn row(&self, axis_value: f64, algorithm: Algorithm) -> Option<&BenchRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == axis_value && r.algorithm == algorithm)
    }
}

fn median(mut xs: Vec<u64>) -> u64 {
    xs.sort_unstable();
    let mid = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[mid]
    } else {
        ((xs[mid - 1] as u128 + xs[mid] as u128) / 2) as u64
    }
}

fn measure(
    db: &TransactionDb,
    min_support: u64,
    algorithm: Algorithm,
    axis: Axis,
    axis_value: f64,
    repetitions: usize,
) -> BenchRow {
    let trials: Vec<TrialMeasurement> = (0..repetitions)
        .map(|_| run_trial(db, min_support, algorithm))
        .collect();
    let first = trials[0];
    BenchRow {
        axis,
        axis_value,
        algorithm,
        rep_count: repetitions,
        wall_ns_median: median(trials.iter().map(|t| t.wall_ns).collect()),
        mem_proxy_bytes: first.mem_proxy_bytes,
        rss_peak_bytes: trials.iter().map(|t| t.rss_peak_bytes).max().unwrap_or(-1),
        n_frequent: first.n_frequent,
        work_counter: first.work_counter,
    }
}

/// Sweeps one parameter, running both miners `repetitions` times per value.
/// Rows are ordered by axis value, Apriori before FP-Growth.
pub fn sweep(
    base: &SynthParams,
    threshold: Threshold,
    axis: Axis,
    values: &[f64],
    repetitions: usize,
) -> Result<BenchReport, BenchError> {
    if values.is_empty() {
        return Err(BenchError::InvalidSweep("no axis values".into()));
    }
    if repetitions == 0 {
        return Err(BenchError::InvalidSweep(
            "repetitions must be at least 1".into(),
        ));
    }
    threshold.validate().map_err(BenchError::InvalidSweep)?;
    base.validate()?;

    let mut ordered = values.to_vec();
    if ordered.iter().any(|v| v.is_nan()) {
        return Err(BenchError::InvalidAxisValue {
            value: f64::NAN,
            reason: "not a number".into(),
        });
    }
    ordered.sort_by(f64::total_cmp);

    // Validate every point before spending time on any of them.
    let mut points = Vec::with_capacity(ordered.len());
    for &value in &ordered {
        let invalid = |reason: String| BenchError::InvalidAxisValue { value, reason };
        let count = || -> Result<usize, BenchError> {
            if value >= 0.0 && value.fract() == 0.0 {
                Ok(value as usize)
            } else {
                Err(invalid("expected a whole number".into()))
            }
        };
        let (params, th) = match axis {
            Axis::MinSupport => (
                *base,
                Threshold::from_axis_value(value).ok_or_else(|| {
                    invalid("expected a count >= 1 or a fraction in (0, 1)".into())
                })?,
            ),
            Axis::NTransactions => (
                SynthParams {
                    n_transactions: count()?,
                    ..*base
                },
                threshold,
            ),
            Axis::MeanLen => (
                SynthParams {
                    mean_len: value,
                    ..*base
                },
                threshold,
            ),
            Axis::NItems => (
                SynthParams {
                    n_items: count()?,
                    ..*base
                },
                threshold,
            ),
        };
        params.validate().map_err(|e| invalid(e.to_string()))?;
        points.push((value, params, th));
    }

    let mut rows = Vec::new();
    let mut cached: Option<TransactionDb> = None;
    for (value, params, th) in points {
        let db = match (axis, &cached) {
            (Axis::MinSupport, Some(db)) => db.clone(),
            _ => generate_synthetic(&params)?,
        };
        let min_support = th.resolve(db.len());
        for algorithm in [Algorithm::Apriori, Algorithm::FpGrowth] {
            rows.push(measure(
                &db,
                min_support,
                algorithm,
                axis,
                value,
                repetitions,
            ));
        }
        if axis == Axis::MinSupport {
            cached = Some(db);
        }
    }
    Ok(BenchReport {
        config: BenchConfig {
            base: *base,
            threshold,
            axis,
            values: ordered,
            repetitions,
        },
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(format!("unknown format {s:?}")),
        }
    }
}

pub const REPORT_COLUMNS: [&str; 9] = [
    "axis",
    "axis_value",
    "algorithm",
    "rep_count",
    "wall_ns_median",
    "mem_proxy_bytes",
    "rss_peak_bytes",
    "n_frequent",
    "work_counter",
];

/// CSV carries one row per (axis value, algorithm); JSON adds the config.
pub fn emit_report(r: &BenchReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            w.write_record(REPORT_COLUMNS).expect("writing to memory");
            for row in &r.rows {
                w.serialize(row).expect("writing to memory");
            }
            String::from_utf8(w.into_inner().expect("flush to memory")).expect("ascii")
        }
    }
}

pub fn parse_report_json(text: &str) -> Result<BenchReport, BenchError> {
    serde_json::from_str(text).map_err(|e| BenchError::Format(e.to_string()))
}

pub fn parse_report_csv(text: &str) -> Result<Vec<BenchRow>, BenchError> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| BenchError::Format(e.to_string()))?;
    if headers.iter().ne(REPORT_COLUMNS) {
        return Err(BenchError::Format(format!("unexpected header {headers:?}")));
    }
    reader
        .deserialize()
        .collect::<Result<Vec<BenchRow>, _>>()
        .map_err(|e| BenchError::Format(e.to_string()))
}
