//! Plain-text field files.
//!
//! Line one is a JSON header `{"d", "n", "L", "arity", "dtype"}`; the rest are
//! whitespace separated samples in row-major order, component after component.
//! `dtype = "c128"` stores each sample as a `re im` pair. Values are printed
//! with 17 significant digits so finite `f64` data round-trips exactly.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::scalar::Real;

use super::field::GridField;
use super::grid::Grid;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dtype {
    F64,
    C128,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldHeader {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub length: f64,
    pub arity: usize,
    pub dtype: Dtype,
}

pub fn write_field<T: Real, W: Write>(field: &GridField<T>, mut out: W) -> Result<()> {
    let grid = field.grid();
    let dtype = if field.is_real() {
        Dtype::F64
    } else {
        Dtype::C128
    };
    let header = FieldHeader {
        d: grid.dim(),
        n: grid.n(),
        length: grid.length().as_f64(),
        arity: field.arity(),
        dtype,
    };
    writeln!(out, "{}", serde_json::to_string(&header)?)?;
    let mut line = String::new();
    for row in field.values().chunks(grid.n()) {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            match dtype {
                Dtype::F64 => write!(line, "{:.16e}", v.re.as_f64()),
                Dtype::C128 => write!(line, "{:.16e} {:.16e}", v.re.as_f64(), v.im.as_f64()),
            }
            .expect("writing to a String");
        }
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_field<T: Real, R: BufRead>(mut input: R) -> Result<GridField<T>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let header: FieldHeader = serde_json::from_str(first.trim())
        .map_err(|e| LabError::Format(format!("bad field header: {e}")))?;
    let grid = Grid::new(header.d, header.n, T::lit(header.length))?;
    let mut rest = String::new();
    input.read_to_string(&mut rest)?;
    let mut numbers = rest.split_whitespace().map(|tok| {
        tok.parse::<f64>()
            .map_err(|e| LabError::Format(format!("bad sample {tok:?}: {e}")))
    });
    let count = grid.len() * header.arity;
    let mut values = Vec::with_capacity(count);
    for _ in 0..count {
        let mut next = || {
            numbers
                .next()
                .unwrap_or_else(|| Err(LabError::Format("field file ended early".into())))
                .map(T::lit)
        };
        let re = next()?;
        let im = match header.dtype {
            Dtype::F64 => T::zero(),
            Dtype::C128 => next()?,
        };
        values.push(Complex::new(re, im));
    }
    if numbers.next().is_some() {
        return Err(LabError::Format("trailing samples after field data".into()));
    }
    GridField::new(grid, values, header.arity)
}

pub fn save_field<T: Real>(field: &GridField<T>, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    write_field(field, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn load_field<T: Real>(path: impl AsRef<Path>) -> Result<GridField<T>> {
    let file = std::fs::File::open(path)?;
    read_field(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_bit_identical(
            vals in proptest::collection::vec(-1e300f64..1e300, 16),
            ims in proptest::collection::vec(-1e-300f64..1e-300, 16),
            complex in any::<bool>(),
        ) {
            let grid = Grid::new(1, 8, 0.7).unwrap();
            let values: Vec<Complex<f64>> = vals.iter().zip(&ims)
                .map(|(&r, &i)| Complex::new(r, if complex { i } else { 0.0 }))
                .collect();
            let field = GridField::new(grid, values, 2).unwrap();
            let mut buf = Vec::new();
            write_field(&field, &mut buf).unwrap();
            let back: GridField<f64> = read_field(&buf[..]).unwrap();
            prop_assert_eq!(back.grid(), field.grid());
            prop_assert_eq!(back.arity(), 2);
            for (a, b) in back.values().iter().zip(field.values()) {
                prop_assert_eq!(a.re.to_bits(), b.re.to_bits());
                prop_assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn header_layout() {
        let grid = Grid::new(2, 8, 1.0).unwrap();
        let field = GridField::<f64>::zeros(grid, 1);
        let mut buf = Vec::new();
        write_field(&field, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            r#"{"d":2,"n":8,"L":1.0,"arity":1,"dtype":"f64"}"#
        );
        assert_eq!(text.lines().count(), 9);
    }

    #[test]
    fn truncated_file_rejected() {
        let text = "{\"d\":1,\"n\":8,\"L\":1.0,\"arity\":1,\"dtype\":\"f64\"}\n1 2 3\n";
        assert!(read_field::<f64, _>(text.as_bytes()).is_err());
    }
}
