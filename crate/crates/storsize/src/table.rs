//! Sizing summary tables: one column per (horizon, load type) run.

use std::fmt::Write as _;

use storsize_core::scenario::LoadKind;
use storsize_core::sizing::{savings, SavingsReport};

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub horizon_hours: f64,
    pub load: LoadKind,
    pub c_critical: f64,
    pub j_critical: f64,
    pub j_max: f64,
}

impl TableEntry {
    pub fn label(&self) -> String {
        let tag = match self.load {
            LoadKind::Residential => "R",
            LoadKind::Commercial => "C",
        };
        format!("({}, {tag})", self.horizon_hours)
    }

    pub fn savings(&self) -> SavingsReport {
        savings(self.j_max, self.j_critical)
    }
}

/// Rows as `(name, cells)`, with the cells already formatted.
pub fn table_rows(entries: &[TableEntry]) -> Vec<(&'static str, Vec<String>)> {
    let reports: Vec<SavingsReport> = entries.iter().map(TableEntry::savings).collect();
    let mut rows = vec![
        ("C_ref^c (Wh)", entries.iter().map(|e| format!("{:.0}", e.c_critical)).collect()),
        ("J(C_ref^c) ($)", entries.iter().map(|e| format!("{:.4}", e.j_critical)).collect()),
        ("J_max ($)", entries.iter().map(|e| format!("{:.4}", e.j_max)).collect()),
        ("Savings ($)", reports.iter().map(|r| format!("{:.4}", r.savings)).collect()),
    ];
    if reports.iter().all(|r| r.percentage.is_some()) {
        rows.push(("Percentage", reports.iter().map(|r| format!("{:.2}%", r.percentage.unwrap_or_default())).collect()));
    }
    rows
}

/// Text and CSV renderings of the same cells.
pub fn emit_table(entries: &[TableEntry]) -> (String, String) {
    let labels: Vec<String> = entries.iter().map(TableEntry::label).collect();
    let rows = table_rows(entries);

    let name_w = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    let col_w: Vec<usize> = (0..entries.len())
        .map(|c| rows.iter().map(|r| r.1[c].len()).chain([labels[c].len()]).max().unwrap_or(0))
        .collect();
    let mut text = String::new();
    let _ = write!(text, "{:name_w$}", "");
    for (l, w) in labels.iter().zip(&col_w) {
        let _ = write!(text, "  {l:>w$}");
    }
    text.push('\n');
    for (name, cells) in &rows {
        let _ = write!(text, "{name:name_w$}");
        for (c, w) in cells.iter().zip(&col_w) {
            let _ = write!(text, "  {c:>w$}");
        }
        text.push('\n');
    }

    let mut w = csv::Writer::from_writer(Vec::new());
    let header: Vec<&str> = std::iter::once("row").chain(labels.iter().map(String::as_str)).collect();
    w.write_record(&header).expect("in-memory write");
    for (name, cells) in &rows {
        w.write_record(std::iter::once(*name).chain(cells.iter().map(String::as_str))).expect("in-memory write");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("UTF-8 cells");
    (text, csv)
}
