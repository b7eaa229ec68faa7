//! Dense delimited text to LIBSVM conversion.

use std::io::{Read, Write};

use anyhow::{bail, Context};
use trish_core::{write_libsvm, Dataset};

#[derive(Debug, Clone, PartialEq)]
pub struct ConvertOptions {
    pub delimiter: u8,
    pub has_header: bool,
    /// Zero-based column holding the label.
    pub label_col: usize,
    /// Zero-based columns to drop, such as timestamps.
    pub skip_cols: Vec<usize>,
    /// Cell text marking a missing value, in addition to empty cells.
    pub missing: Option<String>,
    /// Parse `1,5` as `1.5`.
    pub decimal_comma: bool,
}

impl Default for ConvertOptions {
    fn default() -> Self {
        Self { delimiter: b',', has_header: true, label_col: 0, skip_cols: Vec::new(), missing: None, decimal_comma: false }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConvertStats {
    pub rows_read: usize,
    pub rows_written: usize,
    /// Rows removed because the label was missing.
    pub dropped_rows: usize,
    /// Feature cells left out of the sparse rows because they were missing.
    pub missing_features: usize,
}

/// Converts a dense table to LIBSVM text. Rows whose label is missing are
/// dropped; missing feature cells are left out. Entirely empty rows are
/// skipped. Feature indices follow the kept columns in order, starting at 1.
pub fn convert_csv<R: Read, W: Write>(input: R, output: W, opts: &ConvertOptions) -> anyhow::Result<ConvertStats> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(opts.delimiter)
        .has_headers(opts.has_header)
        .flexible(true)
        .from_reader(input);
    let mut stats = ConvertStats::default();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    let mut width: Option<usize> = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.context("reading delimited input")?;
        let line = line + 1 + usize::from(opts.has_header);
        if record.iter().all(|c| c.trim().is_empty()) {
            continue;
        }
        stats.rows_read += 1;
        let cell = |i: usize| -> anyhow::Result<Option<f64>> {
            let raw = record.get(i).unwrap_or("").trim();
            if raw.is_empty() || opts.missing.as_deref() == Some(raw) {
                return Ok(None);
            }
            let text = if opts.decimal_comma { raw.replace(',', ".") } else { raw.to_string() };
            let v: f64 = text.parse().with_context(|| format!("line {line}, column {}: bad number {raw:?}", i + 1))?;
            if !v.is_finite() {
                bail!("line {line}, column {}: non-finite value", i + 1);
            }
            Ok(Some(v))
        };
        let columns = *width.get_or_insert(record.len());
        let Some(label) = cell(opts.label_col)? else {
            stats.dropped_rows += 1;
            continue;
        };
        let mut row = Vec::new();
        let mut index = 0;
        for i in 0..columns {
            if i == opts.label_col || opts.skip_cols.contains(&i) {
                continue;
            }
            index += 1;
            match cell(i)? {
                Some(0.0) => {}
                Some(v) => row.push((index, v)),
                None => stats.missing_features += 1,
            }
        }
        rows.push(row);
        labels.push(label);
    }
    let data = Dataset::new(rows, labels)?;
    stats.rows_written = data.len();
    write_libsvm(&data, output).context("writing LIBSVM output")?;
    Ok(stats)
}
