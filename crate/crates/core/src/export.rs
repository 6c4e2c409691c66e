//! CSV and PGM serialization of sweep records. Writers take any
//! `io::Write`, so callers decide where bytes go.

use std::io::{Read, Write};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::sweep::SweepRecord;

pub const CSV_HEADER: [&str; 9] = [
    "t1",
    "t2",
    "var_t1",
    "var_t2",
    "cov",
    "total_var",
    "det_qfim",
    "attain_residual",
    "singular",
];

/// Shortest decimal that parses back to the same `f64`; infinities are `inf`/`-inf`.
pub fn format_float(v: f64) -> String {
    // Debug formatting of f64 is shortest round-trip and switches to
    // exponent notation for very large or small magnitudes.
    format!("{v:?}")
}

pub fn write_csv<W: Write>(records: &[SweepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_HEADER)?;
    for r in records {
        let fields = [
            r.t1,
            r.t2,
            r.var_t1,
            r.var_t2,
            r.cov,
            r.total_var,
            r.det_qfim,
            r.attain_residual,
        ];
        let mut row: Vec<String> = fields.iter().map(|&v| format_float(v)).collect();
        row.push(r.singular.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_csv<R: Read>(reader: R) -> Result<Vec<SweepRecord>> {
    let mut rd = csv::Reader::from_reader(reader);
    let header = rd.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Validation(format!(
            "unexpected CSV header: {}",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut out = Vec::new();
    for (line, row) in rd.records().enumerate() {
        let row = row?;
        let num = |i: usize| -> Result<f64> {
            f64::from_str(&row[i]).map_err(|_| {
                Error::Validation(format!(
                    "row {}: column {} is not a number: '{}'",
                    line + 1,
                    CSV_HEADER[i],
                    &row[i]
                ))
            })
        };
        let singular = match &row[8] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Validation(format!(
                    "row {}: singular must be true/false, got '{other}'",
                    line + 1
                )))
            }
        };
        out.push(SweepRecord {
            t1: num(0)?,
            t2: num(1)?,
            var_t1: num(2)?,
            var_t2: num(3)?,
            cov: num(4)?,
            total_var: num(5)?,
            det_qfim: num(6)?,
            attain_residual: num(7)?,
            singular,
        });
    }
    Ok(out)
}

/// Record column that can be rendered as a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    VarT1,
    VarT2,
    Cov,
    TotalVar,
    DetQfim,
    AttainResidual,
}

impl Field {
    pub const ALL: [Field; 6] = [
        Field::VarT1,
        Field::VarT2,
        Field::Cov,
        Field::TotalVar,
        Field::DetQfim,
        Field::AttainResidual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::VarT1 => "var_t1",
            Field::VarT2 => "var_t2",
            Field::Cov => "cov",
            Field::TotalVar => "total_var",
            Field::DetQfim => "det_qfim",
            Field::AttainResidual => "attain_residual",
        }
    }

    pub fn get(self, r: &SweepRecord) -> f64 {
        match self {
            Field::VarT1 => r.var_t1,
            Field::VarT2 => r.var_t2,
            Field::Cov => r.cov,
            Field::TotalVar => r.total_var,
            Field::DetQfim => r.det_qfim,
            Field::AttainResidual => r.attain_residual,
        }
    }
}

impl FromStr for Field {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Configuration(format!("unknown field '{s}'")))
    }
}

/// Side length of the square `t1`-major grid the records form.
pub fn grid_side(records: &[SweepRecord]) -> Result<usize> {
    let n = (records.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != records.len() {
        return Err(Error::Validation(format!(
            "{} records do not form a square grid",
            records.len()
        )));
    }
    for (k, r) in records.iter().enumerate() {
        let (row, col) = (k / n, k % n);
        if r.t1 != records[row * n].t1 || r.t2 != records[col].t2 {
            return Err(Error::Validation(format!(
                "record {k} at ({}, {}) breaks the t1-major grid layout",
                r.t1, r.t2
            )));
        }
    }
    Ok(n)
}

/// Gray levels for `field`: row `i` is the `i`-th `t1`, column `j` the `j`-th
/// `t2`. Finite values span 0..=254 over their range, a constant field maps
/// to 0, and non-finite values are 255.
pub fn heatmap_pixels(records: &[SweepRecord], field: Field) -> Result<(usize, Vec<u8>)> {
    let n = grid_side(records)?;
    let values: Vec<f64> = records.iter().map(|r| field.get(r)).collect();
    let finite = values.iter().copied().filter(|v| v.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    let span = hi - lo;
    let pixels = values
        .iter()
        .map(|&v| {
            if !v.is_finite() {
                255
            } else if span > 0.0 {
                ((v - lo) / span * 254.0).round() as u8
            } else {
                0
            }
        })
        .collect();
    Ok((n, pixels))
}

pub fn write_pgm<W: Write>(records: &[SweepRecord], field: Field, mut writer: W) -> Result<()> {
    let (n, pixels) = heatmap_pixels(records, field)?;
    write!(writer, "P5\n{n} {n}\n255\n")?;
    writer.write_all(&pixels)?;
    writer.flush()?;
    Ok(())
}
