use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use ibp::stats::UniformGrid;

use crate::{CliError, CliResult};

/// Comma-separated reals.
pub fn parse_list(text: &str) -> CliResult<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("not a number: {s:?} in {text:?}")))
        })
        .collect()
}

/// `LO:HI:COUNT`.
pub fn parse_grid(text: &str) -> CliResult<UniformGrid> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad = || CliError::Invalid(format!("grid must be LO:HI:COUNT, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let lo = parts[0].parse().map_err(|_| bad())?;
    let hi = parts[1].parse().map_err(|_| bad())?;
    let count = parts[2].parse().map_err(|_| bad())?;
    Ok(UniformGrid::new(lo, hi, count)?)
}

pub fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(CliError::io(path))
}

/// Writes a header and rows of reals with 17 significant digits.
pub fn write_table(
    path: &Path,
    header: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> CliResult<()> {
    let mut w = create(path)?;
    let body = || -> std::io::Result<()> {
        writeln!(w, "{}", header.join(","))?;
        for row in rows {
            let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        w.flush()
    };
    body().map_err(CliError::io(path))
}

/// Reads a two-column CSV whose header must be `first,second`.
pub fn read_pairs(path: &Path, first: &str, second: &str) -> CliResult<Vec<(f64, f64)>> {
    let invalid = |msg: String| CliError::Invalid(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| invalid(e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| invalid(e.to_string()))?
        .clone();
    if header.len() != 2 || &header[0] != first || &header[1] != second {
        return Err(invalid(format!("expected header {first},{second}")));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| invalid(e.to_string()))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("not a number: {s:?}")))
        };
        rows.push((parse(&record[0])?, parse(&record[1])?));
    }
    if rows.is_empty() {
        return Err(invalid("no data rows".into()));
    }
    Ok(rows)
}
