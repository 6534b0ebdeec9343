//! CSV tables: `#`-prefixed parameter lines, one header row, fixed-format values.
//!
//! Values are written as `{:.8e}` (nine significant digits), so identical
//! inputs give byte-identical files.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::model::FieldIndex;
use crate::numerics::GridSpec;
use crate::one_photon::{Provenance, SpectrumCurve};
use crate::FREQ_UNIT;

/// Fixed scientific formatting used for every CSV number.
pub fn format_value(v: f64) -> String {
    format!("{v:.8e}")
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::Io(e.to_string())
}

/// Writes `# key = value` lines, the column names and the rows.
pub fn write_table<W: Write>(
    mut out: W,
    meta: &[(String, String)],
    columns: &[String],
    rows: &[Vec<f64>],
) -> Result<()> {
    for (k, v) in meta {
        writeln!(out, "# {k} = {v}").map_err(io_err)?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(columns).map_err(io_err)?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::invalid(
                "csv.row",
                format!("{} values for {} columns", row.len(), columns.len()),
            ));
        }
        w.write_record(row.iter().map(|&v| format_value(v)))
            .map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

/// Reads a two-column spectrum `(nu in 1e13 rad/s, S)`. Lines starting with `#`
/// are skipped, the first remaining row is the header, and the abscissa must be
/// uniformly spaced and ascending.
pub fn read_spectrum<R: Read>(input: R, field: FieldIndex) -> Result<SpectrumCurve<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut nu = Vec::new();
    let mut values = Vec::new();
    let mut lines = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            reason: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() < 2 {
            return Err(Error::Parse {
                line,
                reason: format!("expected 2 columns (nu, S), found {}", record.len()),
            });
        }
        let parse = |i: usize| -> Result<f64> {
            record[i].parse::<f64>().map_err(|e| Error::Parse {
                line,
                reason: format!("column {}: `{}`: {e}", i + 1, &record[i]),
            })
        };
        nu.push(parse(0)? * FREQ_UNIT);
        values.push(parse(1)?);
        lines.push(line);
    }
    if nu.len() < 2 {
        return Err(Error::Parse {
            line: lines.last().copied().unwrap_or(0),
            reason: "need at least two data rows".into(),
        });
    }
    let n = nu.len();
    let step = nu[1] - nu[0];
    for i in 1..n {
        if !(step > 0.0) || (nu[i] - nu[i - 1] - step).abs() > 1e-6 * step {
            return Err(Error::Parse {
                line: lines[i],
                reason: "frequency axis must be ascending and uniformly spaced".into(),
            });
        }
    }
    if let Some(i) = values.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::Parse {
            line: lines[i],
            reason: format!("spectrum value {} must be finite and >= 0", values[i]),
        });
    }
    let grid = GridSpec::new(nu[0], nu[n - 1], n)?;
    SpectrumCurve::new(grid, values, field, Provenance::InvertedInput)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(format_value(1.0), "1.00000000e0");
        assert_eq!(format_value(-2.76e-13), "-2.76000000e-13");
        assert_eq!(format_value(0.0), "0.00000000e0");
    }

    #[test]
    fn table_round_trip() {
        let mut buf = Vec::new();
        let meta = vec![("pump.theta".to_string(), "0".to_string())];
        let cols = vec!["nu".to_string(), "S".to_string()];
        let rows = vec![vec![-1.0, 0.5], vec![0.0, 1.0], vec![1.0, 0.25]];
        write_table(&mut buf, &meta, &cols, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# pump.theta = 0\nnu,S\n"));
        let s = read_spectrum(&buf[..], FieldIndex::Signal).unwrap();
        assert_eq!(s.values(), &[0.5, 1.0, 0.25]);
        assert_eq!(s.grid().hi(), 1e13);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "# comment\nnu,S\n0,1\n1,oops\n";
        match read_spectrum(text.as_bytes(), FieldIndex::Signal) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let uneven = "nu,S\n0,1\n1,1\n3,1\n";
        assert!(matches!(
            read_spectrum(uneven.as_bytes(), FieldIndex::Signal),
            Err(Error::Parse { line: 4, .. })
        ));
    }
}
