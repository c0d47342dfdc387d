use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::missing::IncompleteMatrix;

#[derive(Debug, Clone)]
pub struct CsvOptions {
    /// Token marking a missing cell. Empty fields are always missing.
    pub na_token: String,
    pub has_headers: bool,
    pub delimiter: u8,
}

impl Default for CsvOptions {
    fn default() -> Self {
        CsvOptions { na_token: "NA".to_string(), has_headers: true, delimiter: b',' }
    }
}

/// Numeric table with optional missing cells.
#[derive(Debug, Clone)]
pub struct CsvTable {
    /// Column names; `V1`, `V2`, ... when the file has no header row.
    pub headers: Vec<String>,
    pub data: IncompleteMatrix,
}

impl CsvTable {
    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }
}

pub fn read_csv<R: Read>(reader: R, opts: &CsvOptions) -> Result<CsvTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(opts.has_headers)
        .delimiter(opts.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut headers: Option<Vec<String>> = if opts.has_headers {
        Some(rdr.headers()?.iter().map(str::to_string).collect())
    } else {
        None
    };

    let mut rows: Vec<Vec<Option<f64>>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            Error::Parse { line, message: e.to_string() }
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let width = headers.as_ref().map_or(record.len(), Vec::len);
        if record.len() != width {
            return Err(Error::Parse {
                line,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(j, field)| {
                if field.is_empty() || field == opts.na_token {
                    Ok(None)
                } else {
                    field.parse::<f64>().ok().filter(|v| v.is_finite()).map(Some).ok_or_else(|| {
                        Error::Parse { line, message: format!("column {}: cannot parse '{field}'", j + 1) }
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        if headers.is_none() {
            headers = Some((1..=row.len()).map(|j| format!("V{j}")).collect());
        }
        rows.push(row);
    }

    let headers = headers.unwrap_or_default();
    if rows.is_empty() || headers.is_empty() {
        return Err(Error::Parse { line: 1, message: "no data rows".into() });
    }
    let data = IncompleteMatrix::from_columns_fn(rows.len(), headers.len(), |i, j| rows[i][j])?;
    Ok(CsvTable { headers, data })
}

/// Writes observed cells with full round-trip precision and missing cells
/// as `na_token`.
pub fn write_csv<W: Write>(
    writer: W,
    headers: &[String],
    data: &IncompleteMatrix,
    na_token: &str,
) -> Result<()> {
    if headers.len() != data.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} headers for {} columns",
            headers.len(),
            data.ncols()
        )));
    }
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(headers)?;
    for i in 0..data.nrows() {
        let row: Vec<String> = (0..data.ncols())
            .map(|j| data.get(i, j).map_or_else(|| na_token.to_string(), |v| v.to_string()))
            .collect();
        wtr.write_record(&row)?;
    }
    wtr.flush()?;
    Ok(())
}
