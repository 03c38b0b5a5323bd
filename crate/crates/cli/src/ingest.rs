//! CSV ingestion: header-driven schema inference with errors that name the
//! offending row and column.
//!
//! Layout rules: a required `ID` column and an optional `name` column
//! (matched case-insensitively); one column carries the group label, either
//! named in the config or inferred as the sole column whose cells are not
//! all numeric; every remaining column is a numeric attribute, kept in
//! header order. Item order is file order. Rows are reported as CSV line
//! numbers, header = line 1, so the first record is row 2.
//!
//! In interval mode a cell may also be a range `lo..hi` (`140..160`); a
//! plain number is the degenerate interval.

use std::collections::BTreeMap;
use std::path::Path;

use fairopt_core::model::{AttributeSchema, ItemRecord};
use fairopt_core::uncertain::{IntervalPopulation, IntervalRecord, IntervalValue};
use fairopt_core::{Error, Population, Result, Scalar};

struct RawTable {
    headers: Vec<String>,
    id_col: usize,
    name_col: Option<usize>,
    rows: Vec<Vec<String>>,
}

fn open_error(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Ingestion {
        row: None,
        column: None,
        message: format!("cannot read {}: {e}", path.display()),
    }
}

fn read_table(path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| open_error(path, e))?;
    let headers: Vec<String> =
        reader.headers().map_err(|e| open_error(path, e))?.iter().map(str::to_string).collect();
    if headers.iter().all(|h| h.is_empty()) {
        return Err(Error::Ingestion {
            row: None,
            column: None,
            message: "the file has no header row".into(),
        });
    }
    let id_col = headers.iter().position(|h| h.eq_ignore_ascii_case("id")).ok_or_else(|| {
        Error::Ingestion {
            row: Some(1),
            column: None,
            message: "no ID column in the header".into(),
        }
    })?;
    let name_col = headers.iter().position(|h| h.eq_ignore_ascii_case("name"));
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Ingestion {
            row: Some(i + 2),
            column: None,
            message: e.to_string(),
        })?;
        rows.push(record.iter().map(str::to_string).collect::<Vec<String>>());
    }
    if rows.is_empty() {
        return Err(Error::Ingestion {
            row: None,
            column: None,
            message: "the file has no data rows".into(),
        });
    }
    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    for (i, row) in rows.iter().enumerate() {
        if let Some(first) = seen.insert(&row[id_col], i + 2) {
            return Err(Error::Ingestion {
                row: Some(first.max(i + 2)),
                column: Some(headers[id_col].clone()),
                message: format!("duplicate id '{}'", row[id_col]),
            });
        }
    }
    Ok(RawTable { headers, id_col, name_col, rows })
}

fn parse_interval_cell(raw: &str) -> Result<IntervalValue> {
    if let Some(split) = raw.find("..") {
        let lo: Scalar = raw[..split].parse()?;
        let hi: Scalar = raw[split + 2..].parse()?;
        IntervalValue::new(lo, hi)
    } else {
        Ok(IntervalValue::exact(raw.parse()?))
    }
}

fn cell_is_numeric(raw: &str, interval_mode: bool) -> bool {
    if interval_mode {
        parse_interval_cell(raw).is_ok()
    } else {
        raw.parse::<Scalar>().is_ok()
    }
}

/// Picks the group column and the numeric attribute columns.
fn classify(
    table: &RawTable,
    group_column: Option<&str>,
    interval_mode: bool,
) -> Result<(usize, Vec<usize>)> {
    let candidates: Vec<usize> = (0..table.headers.len())
        .filter(|&c| c != table.id_col && Some(c) != table.name_col)
        .collect();
    if let Some(name) = group_column {
        let group_col = table
            .headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Ingestion {
                row: None,
                column: Some(name.to_string()),
                message: "configured group column not found in the header".into(),
            })?;
        let attrs = candidates.into_iter().filter(|&c| c != group_col).collect();
        return Ok((group_col, attrs));
    }
    let (numeric, categorical): (Vec<usize>, Vec<usize>) = candidates
        .into_iter()
        .partition(|&c| table.rows.iter().all(|row| cell_is_numeric(&row[c], interval_mode)));
    match categorical.as_slice() {
        [only] => Ok((*only, numeric)),
        [] => Err(Error::Ingestion {
            row: None,
            column: None,
            message: "no categorical column to serve as the group label; \
                      name one with group_column"
                .into(),
        }),
        several => Err(Error::Ingestion {
            row: None,
            column: None,
            message: format!(
                "several non-numeric columns ({}); name the group column with group_column",
                several.iter().map(|&c| table.headers[c].as_str()).collect::<Vec<_>>().join(", ")
            ),
        }),
    }
}

fn schema_for(
    table: &RawTable,
    attr_cols: &[usize],
    divisors: &BTreeMap<String, Scalar>,
) -> Result<AttributeSchema> {
    if attr_cols.is_empty() {
        return Err(Error::Ingestion {
            row: None,
            column: None,
            message: "no numeric attribute columns".into(),
        });
    }
    let mut schema =
        AttributeSchema::new(attr_cols.iter().map(|&c| table.headers[c].clone()).collect())?;
    for (name, divisor) in divisors {
        schema = schema.with_divisor(name, divisor.clone())?;
    }
    Ok(schema)
}

fn located<T>(parsed: Result<T>, row: usize, column: &str, raw: &str) -> Result<T> {
    parsed.map_err(|e| Error::Ingestion {
        row: Some(row),
        column: Some(column.to_string()),
        message: format!("cannot use '{raw}': {e}"),
    })
}

/// Loads a population of exact point values.
pub fn load_population(
    path: &Path,
    group_column: Option<&str>,
    divisors: &BTreeMap<String, Scalar>,
) -> Result<Population> {
    let table = read_table(path)?;
    let (group_col, attr_cols) = classify(&table, group_column, false)?;
    let schema = schema_for(&table, &attr_cols, divisors)?;
    let mut items = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let mut values = Vec::with_capacity(attr_cols.len());
        for &c in &attr_cols {
            values.push(located(row[c].parse(), i + 2, &table.headers[c], &row[c])?);
        }
        let display = table.name_col.map(|c| row[c].as_str()).filter(|s| !s.is_empty());
        items.push(ItemRecord::new(
            row[table.id_col].clone(),
            display,
            row[group_col].clone(),
            values,
        ));
    }
    Population::new(schema, items)
}

/// Loads a population whose cells may be `lo..hi` intervals.
pub fn load_interval_population(
    path: &Path,
    group_column: Option<&str>,
    divisors: &BTreeMap<String, Scalar>,
) -> Result<IntervalPopulation> {
    let table = read_table(path)?;
    let (group_col, attr_cols) = classify(&table, group_column, true)?;
    let schema = schema_for(&table, &attr_cols, divisors)?;
    let mut records = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        let mut values = Vec::with_capacity(attr_cols.len());
        for &c in &attr_cols {
            values.push(located(parse_interval_cell(&row[c]), i + 2, &table.headers[c], &row[c])?);
        }
        let display = table.name_col.map(|c| row[c].as_str()).filter(|s| !s.is_empty());
        records.push(IntervalRecord::new(
            row[table.id_col].clone(),
            display,
            row[group_col].clone(),
            values,
        ));
    }
    IntervalPopulation::new(schema, records)
}
