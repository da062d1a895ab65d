//! On-disk formats.
//!
//! Density maps: a `P_DENS <rows> <cols>` header line followed by
//! `rows·cols` whitespace-separated reals in row-major order.
//! Annotations: CSV with header `row,col` and one point per line.
//! Count pairs: CSV with header `truth,predicted`.

use std::fmt::Write as _;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{DensityMap, DotAnnotation};
use crate::metrics::CountPair;

pub const DENSITY_MAGIC: &str = "P_DENS";

/// Serializes a map; values use Rust's shortest round-trip representation.
pub fn format_density(m: &DensityMap) -> String {
    let mut out = format!("{DENSITY_MAGIC} {} {}\n", m.rows(), m.cols());
    for row in m.values().chunks(m.cols()) {
        let mut first = true;
        for v in row {
            if !first {
                out.push(' ');
            }
            first = false;
            write!(out, "{v:?}").expect("writing to a String cannot fail");
        }
        out.push('\n');
    }
    out
}

pub fn parse_density(text: &str) -> Result<DensityMap> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        reason: "empty input".into(),
    })?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let bad_header = || Error::Parse {
        line: 1,
        reason: format!("expected `{DENSITY_MAGIC} <rows> <cols>`, got `{header}`"),
    };
    if fields.len() != 3 || fields[0] != DENSITY_MAGIC {
        return Err(bad_header());
    }
    let rows: usize = fields[1].parse().map_err(|_| bad_header())?;
    let cols: usize = fields[2].parse().map_err(|_| bad_header())?;
    let mut values = Vec::with_capacity(rows.saturating_mul(cols));
    for (idx, line) in lines {
        for tok in line.split_whitespace() {
            let v: f64 = tok.parse().map_err(|_| Error::Parse {
                line: idx + 1,
                reason: format!("`{tok}` is not a number"),
            })?;
            values.push(v);
        }
    }
    if values.len() != rows * cols {
        return Err(Error::Parse {
            line: text.lines().count(),
            reason: format!("expected {} values, found {}", rows * cols, values.len()),
        });
    }
    DensityMap::new(rows, cols, values)
}

pub fn write_density<W: Write>(mut w: W, m: &DensityMap) -> Result<()> {
    w.write_all(format_density(m).as_bytes())?;
    Ok(())
}

pub fn read_density<R: Read>(mut r: R) -> Result<DensityMap> {
    let mut s = String::new();
    r.read_to_string(&mut s)?;
    parse_density(&s)
}

/// Reads `row,col` points; the grid extent is supplied by the caller since the
/// CSV does not carry it.
pub fn read_annotation<R: Read>(r: R, rows: usize, cols: usize) -> Result<DotAnnotation> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || &headers[0] != "row" || &headers[1] != "col" {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected header `row,col`, got `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        });
    }
    let mut points = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let parse = |k: usize| -> Result<f64> {
            rec.get(k)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::Parse {
                    line: i + 2,
                    reason: format!("bad record `{}`", rec.iter().collect::<Vec<_>>().join(",")),
                })
        };
        points.push((parse(0)?, parse(1)?));
    }
    DotAnnotation::new(rows, cols, points)
}

pub fn write_annotation<W: Write>(w: W, ann: &DotAnnotation) -> Result<()> {
    let mut writer = csv::Writer::from_writer(w);
    writer.write_record(["row", "col"]).map_err(csv_err)?;
    for (r, c) in ann.points() {
        writer
            .write_record([format!("{r:?}"), format!("{c:?}")])
            .map_err(csv_err)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_count_pairs<R: Read>(r: R) -> Result<Vec<CountPair>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = reader.headers().map_err(csv_err)?.clone();
    if headers.len() != 2 || &headers[0] != "truth" || &headers[1] != "predicted" {
        return Err(Error::Parse {
            line: 1,
            reason: "expected header `truth,predicted`".into(),
        });
    }
    let mut pairs = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let field = |k: usize| rec.get(k).and_then(|s| s.parse::<f64>().ok());
        let (Some(truth), Some(predicted)) = (field(0), field(1)) else {
            return Err(Error::Parse {
                line: i + 2,
                reason: format!("bad record `{}`", rec.iter().collect::<Vec<_>>().join(",")),
            });
        };
        pairs.push(CountPair::new(truth, predicted)?);
    }
    Ok(pairs)
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        reason: e.to_string(),
    }
}
