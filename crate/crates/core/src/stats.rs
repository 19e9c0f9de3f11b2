//! Complexity metrics over augmented output and test-set recovery.
//!
//! Lengths are counted two ways: utterances in whitespace tokens, programs
//! both with parentheses/commas counted as tokens and symbols-only, so
//! either counting convention can be compared against. Segment lengths
//! measure the inserted donor material, available directly from each
//! record's provenance.

use std::collections::HashSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Serialize, Serializer};

use crate::augment::AugmentedExample;
use crate::corpus::ExampleRecord;

fn two_dp<S: Serializer>(value: &f64, serializer: S) -> Result<S::Ok, S::Error> {
    serializer.serialize_f64((value * 100.0).round() / 100.0)
}

/// Length statistics of an augmented set, in the shape of the usual
/// complexity table.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub n_train: usize,
    pub n_augmented: usize,
    #[serde(serialize_with = "two_dp")]
    pub avg_att_l: f64,
    pub max_att_l: usize,
    #[serde(serialize_with = "two_dp")]
    pub avg_prg_l: f64,
    pub max_prg_l: usize,
    #[serde(serialize_with = "two_dp")]
    pub avg_prg_l_symbols: f64,
    pub max_prg_l_symbols: usize,
    #[serde(serialize_with = "two_dp")]
    pub avg_att_seg_l: f64,
    pub max_att_seg_l: usize,
    #[serde(serialize_with = "two_dp")]
    pub avg_prg_seg_l: f64,
    pub max_prg_seg_l: usize,
    #[serde(serialize_with = "two_dp")]
    pub avg_prg_seg_l_symbols: f64,
    pub max_prg_seg_l_symbols: usize,
}

impl StatsReport {
    pub fn with_train_count(mut self, n_train: usize) -> StatsReport {
        self.n_train = n_train;
        self
    }
}

struct Column {
    sum: u64,
    max: usize,
    n: usize,
}

impl Column {
    fn new() -> Column {
        Column { sum: 0, max: 0, n: 0 }
    }

    fn add(&mut self, value: usize) {
        self.sum += value as u64;
        self.max = self.max.max(value);
        self.n += 1;
    }

    fn avg(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum as f64 / self.n as f64
        }
    }
}

/// Aggregate utterance, program, and inserted-segment lengths.
pub fn complexity_stats(augmented: &[AugmentedExample]) -> StatsReport {
    let mut att = Column::new();
    let mut prg = Column::new();
    let mut prg_symbols = Column::new();
    let mut att_seg = Column::new();
    let mut prg_seg = Column::new();
    let mut prg_seg_symbols = Column::new();
    for example in augmented {
        att.add(example.tokens.len());
        prg.add(example.program.token_len());
        prg_symbols.add(example.program.symbol_len());
        let (i2, j2) = example.provenance.donor_span;
        att_seg.add(j2 - i2);
        prg_seg.add(example.provenance.donor_program.token_len());
        prg_seg_symbols.add(example.provenance.donor_program.symbol_len());
    }
    StatsReport {
        n_train: 0,
        n_augmented: augmented.len(),
        avg_att_l: att.avg(),
        max_att_l: att.max,
        avg_prg_l: prg.avg(),
        max_prg_l: prg.max,
        avg_prg_l_symbols: prg_symbols.avg(),
        max_prg_l_symbols: prg_symbols.max,
        avg_att_seg_l: att_seg.avg(),
        max_att_seg_l: att_seg.max,
        avg_prg_seg_l: prg_seg.avg(),
        max_prg_seg_l: prg_seg.max,
        avg_prg_seg_l_symbols: prg_seg_symbols.avg(),
        max_prg_seg_l_symbols: prg_seg_symbols.max,
    }
}

/// How much of a test set the augmented output reproduces verbatim.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Recovery {
    pub hits: usize,
    pub total: usize,
    pub fraction: f64,
}

impl fmt::Display for Recovery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} ({:.2}%)", self.hits, self.total, self.fraction * 100.0)
    }
}

/// Count test records whose exact (utterance, canonical program) pair
/// occurs in the augmented set. Utterances are whitespace-normalized on
/// both sides.
pub fn test_recovery(augmented: &[AugmentedExample], test: &[ExampleRecord]) -> Recovery {
    let pool: HashSet<(String, String)> = augmented
        .iter()
        .map(|e| (e.utterance(), e.program.render()))
        .collect();
    let hits = test
        .iter()
        .filter(|t| {
            let utterance = t.tokens().join(" ");
            pool.contains(&(utterance, t.program.render()))
        })
        .count();
    let fraction = if test.is_empty() { 0.0 } else { hits as f64 / test.len() as f64 };
    Recovery { hits, total: test.len(), fraction }
}

/// Render the report as an aligned two-row table, one row per
/// program-token counting convention.
pub fn render_table(report: &StatsReport) -> String {
    let headers = [
        "convention",
        "n train",
        "n aug",
        "avg att l",
        "max att l",
        "avg prg l",
        "max prg l",
        "avg att seg l",
        "max att seg l",
        "avg prg seg l",
        "max prg seg l",
    ];
    let rows = [
        [
            "with parens".to_string(),
            report.n_train.to_string(),
            report.n_augmented.to_string(),
            format!("{:.2}", report.avg_att_l),
            report.max_att_l.to_string(),
            format!("{:.2}", report.avg_prg_l),
            report.max_prg_l.to_string(),
            format!("{:.2}", report.avg_att_seg_l),
            report.max_att_seg_l.to_string(),
            format!("{:.2}", report.avg_prg_seg_l),
            report.max_prg_seg_l.to_string(),
        ],
        [
            "symbols only".to_string(),
            report.n_train.to_string(),
            report.n_augmented.to_string(),
            format!("{:.2}", report.avg_att_l),
            report.max_att_l.to_string(),
            format!("{:.2}", report.avg_prg_l_symbols),
            report.max_prg_l_symbols.to_string(),
            format!("{:.2}", report.avg_att_seg_l),
            report.max_att_seg_l.to_string(),
            format!("{:.2}", report.avg_prg_seg_l_symbols),
            report.max_prg_seg_l_symbols.to_string(),
        ],
    ];
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row.iter()) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    for (i, header) in headers.iter().enumerate() {
        if i > 0 {
            out.push_str("  ");
        }
        write!(out, "{header:>width$}", width = widths[i]).unwrap();
    }
    out.push('\n');
    for row in &rows {
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            write!(out, "{cell:>width$}", width = widths[i]).unwrap();
        }
        out.push('\n');
    }
    out
}
