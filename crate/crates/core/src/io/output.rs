// Copyright 2026 The eeqt Authors
// SPDX-License-Identifier: Apache-2.0

//! Delimited data files.
//!
//! Every file starts with one `#` comment line naming the command, seed,
//! and scheme, followed by a header row and the data rows.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use super::config::Format;

/// Column names and rows of one output file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(
        name: impl Into<String>,
        header: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        Self {
            name: name.into(),
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len(), "row width in {}", self.name);
        self.rows.push(row);
    }
}

/// Writes `table` once per format into `dir`, returning the paths.
pub fn write_table(
    dir: &Path,
    table: &Table,
    comment: &str,
    formats: &[Format],
) -> std::io::Result<Vec<PathBuf>> {
    formats
        .iter()
        .map(|&format| {
            let path = dir.join(format!("{}.{}", table.name, format.extension()));
            let mut file = BufWriter::new(File::create(&path)?);
            writeln!(file, "# {comment}")?;
            let mut w = csv::WriterBuilder::new()
                .delimiter(format.delimiter())
                .from_writer(file);
            w.write_record(&table.header)?;
            for row in &table.rows {
                w.write_record(row)?;
            }
            w.flush()?;
            Ok(path)
        })
        .collect()
}
