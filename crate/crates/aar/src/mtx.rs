//! Matrix Market exchange format.
//!
//! Sparse matrices use the coordinate format with any of the `real`,
//! `integer` or `complex` fields and `general`, `symmetric`,
//! `skew-symmetric` or `hermitian` symmetry. Dense vectors (right-hand
//! sides, solutions) use the array format with a single column.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use aar_core::{CsrMatrix, Scalar, C64};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Coordinate,
    Array,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Real,
    Integer,
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
    SkewSymmetric,
    Hermitian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub format: Format,
    pub field: Field,
    pub symmetry: Symmetry,
}

impl Header {
    fn parse(line: &str) -> Result<Self> {
        let tokens: Vec<String> = line.split_whitespace().map(str::to_ascii_lowercase).collect();
        if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
            return Err(Error::parse(1, "expected `%%MatrixMarket matrix <format> <field> <symmetry>`"));
        }
        if tokens[1] != "matrix" {
            return Err(Error::Unsupported(format!("object `{}`", tokens[1])));
        }
        let format = match tokens[2].as_str() {
            "coordinate" => Format::Coordinate,
            "array" => Format::Array,
            other => return Err(Error::parse(1, format!("unknown format `{other}`"))),
        };
        let field = match tokens[3].as_str() {
            "real" | "double" => Field::Real,
            "integer" => Field::Integer,
            "complex" => Field::Complex,
            "pattern" => return Err(Error::Unsupported("pattern field".into())),
            other => return Err(Error::parse(1, format!("unknown field `{other}`"))),
        };
        let symmetry = match tokens[4].as_str() {
            "general" => Symmetry::General,
            "symmetric" => Symmetry::Symmetric,
            "skew-symmetric" => Symmetry::SkewSymmetric,
            "hermitian" => Symmetry::Hermitian,
            other => return Err(Error::parse(1, format!("unknown symmetry `{other}`"))),
        };
        Ok(Self { format, field, symmetry })
    }
}

/// A matrix read from file; the field is only known at run time.
#[derive(Debug, Clone, PartialEq)]
pub enum MtxMatrix {
    Real(CsrMatrix<f64>),
    Complex(CsrMatrix<C64>),
}

impl MtxMatrix {
    pub fn nrows(&self) -> usize {
        match self {
            MtxMatrix::Real(a) => a.nrows(),
            MtxMatrix::Complex(a) => a.nrows(),
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            MtxMatrix::Real(a) => a.ncols(),
            MtxMatrix::Complex(a) => a.ncols(),
        }
    }

    pub fn into_complex(self) -> CsrMatrix<C64> {
        match self {
            MtxMatrix::Real(a) => a.map(C64::from_real),
            MtxMatrix::Complex(a) => a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MtxVector {
    Real(Vec<f64>),
    Complex(Vec<C64>),
}

impl MtxVector {
    pub fn len(&self) -> usize {
        match self {
            MtxVector::Real(v) => v.len(),
            MtxVector::Complex(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_complex(self) -> Vec<C64> {
        match self {
            MtxVector::Real(v) => v.into_iter().map(C64::from_real).collect(),
            MtxVector::Complex(v) => v,
        }
    }
}

/// Line source that skips comments and blank lines and remembers where it is.
struct Lines<R> {
    inner: std::io::Lines<R>,
    line_no: usize,
}

impl<R: BufRead> Lines<R> {
    fn new(reader: R) -> Self {
        Self { inner: reader.lines(), line_no: 0 }
    }

    fn header(&mut self) -> Result<Header> {
        match self.inner.next() {
            Some(line) => {
                self.line_no = 1;
                Header::parse(&line?)
            }
            None => Err(Error::parse(1, "empty file")),
        }
    }

    fn next_data(&mut self) -> Result<Option<String>> {
        for line in self.inner.by_ref() {
            let line = line?;
            self.line_no += 1;
            let t = line.trim();
            if !t.is_empty() && !t.starts_with('%') {
                return Ok(Some(t.to_owned()));
            }
        }
        Ok(None)
    }

    fn expect_data(&mut self, what: &str) -> Result<String> {
        self.next_data()?.ok_or_else(|| Error::parse(self.line_no + 1, format!("unexpected end of file, expected {what}")))
    }

    fn expect_end(&mut self) -> Result<()> {
        match self.next_data()? {
            None => Ok(()),
            Some(_) => Err(Error::parse(self.line_no, "more entries than declared in the size line")),
        }
    }

    fn err(&self, message: impl Into<String>) -> Error {
        Error::parse(self.line_no, message)
    }
}

fn parse_usize<R: BufRead>(lines: &Lines<R>, tok: Option<&str>, what: &str) -> Result<usize> {
    let tok = tok.ok_or_else(|| lines.err(format!("missing {what}")))?;
    tok.parse().map_err(|_| lines.err(format!("invalid {what} `{tok}`")))
}

fn parse_f64<R: BufRead>(lines: &Lines<R>, tok: Option<&str>) -> Result<f64> {
    let tok = tok.ok_or_else(|| lines.err("missing value"))?;
    tok.parse().map_err(|_| lines.err(format!("invalid number `{tok}`")))
}

fn parse_value<R: BufRead>(lines: &Lines<R>, field: Field, toks: &mut std::str::SplitWhitespace<'_>) -> Result<C64> {
    let re = parse_f64(lines, toks.next())?;
    let im = if field == Field::Complex { parse_f64(lines, toks.next())? } else { 0.0 };
    if toks.next().is_some() {
        return Err(lines.err("trailing tokens"));
    }
    Ok(C64::new(re, im))
}

/// Reads a coordinate-format matrix. Symmetric, skew-symmetric and
/// hermitian files are expanded to full storage, integer values become real.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<MtxMatrix> {
    let mut lines = Lines::new(reader);
    let header = lines.header()?;
    if header.format == Format::Array {
        return Err(Error::Unsupported("array format (dense matrices)".into()));
    }
    read_coordinate(&mut lines, header)
}

fn read_coordinate<R: BufRead>(lines: &mut Lines<R>, header: Header) -> Result<MtxMatrix> {
    if header.symmetry == Symmetry::Hermitian && header.field != Field::Complex {
        return Err(lines.err("hermitian symmetry requires the complex field"));
    }

    let size = lines.expect_data("size line")?;
    let mut toks = size.split_whitespace();
    let nrows = parse_usize(lines, toks.next(), "row count")?;
    let ncols = parse_usize(lines, toks.next(), "column count")?;
    let nnz = parse_usize(lines, toks.next(), "entry count")?;
    if toks.next().is_some() {
        return Err(lines.err("size line has extra tokens"));
    }
    if header.symmetry != Symmetry::General && nrows != ncols {
        return Err(lines.err("symmetric storage requires a square matrix"));
    }

    let mut entries = Vec::with_capacity(if header.symmetry == Symmetry::General { nnz } else { 2 * nnz });
    for _ in 0..nnz {
        let line = lines.expect_data("matrix entry")?;
        let mut toks = line.split_whitespace();
        let i = parse_usize(lines, toks.next(), "row index")?;
        let j = parse_usize(lines, toks.next(), "column index")?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(lines.err(format!("index ({i}, {j}) outside {nrows} x {ncols}")));
        }
        let v = parse_value(lines, header.field, &mut toks)?;
        let (i, j) = (i - 1, j - 1);
        entries.push((i, j, v));
        if i != j {
            match header.symmetry {
                Symmetry::General => {}
                Symmetry::Symmetric => entries.push((j, i, v)),
                Symmetry::SkewSymmetric => entries.push((j, i, -v)),
                Symmetry::Hermitian => entries.push((j, i, v.conj())),
            }
        } else if header.symmetry == Symmetry::SkewSymmetric && v != C64::new(0.0, 0.0) {
            return Err(lines.err("nonzero diagonal entry in a skew-symmetric matrix"));
        }
    }
    lines.expect_end()?;

    Ok(match header.field {
        Field::Complex => MtxMatrix::Complex(CsrMatrix::from_triplets(nrows, ncols, &entries)?),
        Field::Real | Field::Integer => {
            let real: Vec<_> = entries.into_iter().map(|(i, j, v)| (i, j, v.re)).collect();
            MtxMatrix::Real(CsrMatrix::from_triplets(nrows, ncols, &real)?)
        }
    })
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<MtxMatrix> {
    let path = path.as_ref();
    File::open(path)
        .map_err(Error::from)
        .and_then(|f| read_matrix_market(BufReader::new(f)))
        .map_err(|e| e.in_file(path))
}

/// Reads a single-column vector. Array format is the norm; a coordinate
/// file with one column is accepted and densified.
pub fn read_vector<R: BufRead>(reader: R) -> Result<MtxVector> {
    let mut lines = Lines::new(reader);
    let header = lines.header()?;
    if header.format == Format::Coordinate {
        return match read_coordinate(&mut lines, header)? {
            MtxMatrix::Real(a) if a.ncols() == 1 => Ok(MtxVector::Real(densify(&a))),
            MtxMatrix::Complex(a) if a.ncols() == 1 => Ok(MtxVector::Complex(densify(&a))),
            _ => Err(Error::parse(2, "a vector must have exactly one column")),
        };
    }
    if header.symmetry != Symmetry::General {
        return Err(Error::Unsupported("symmetric array storage".into()));
    }
    let size = lines.expect_data("size line")?;
    let mut toks = size.split_whitespace();
    let nrows = parse_usize(&lines, toks.next(), "row count")?;
    let ncols = parse_usize(&lines, toks.next(), "column count")?;
    if ncols != 1 || toks.next().is_some() {
        return Err(lines.err("expected a single-column `N 1` size line"));
    }
    let mut values = Vec::with_capacity(nrows);
    for _ in 0..nrows {
        let line = lines.expect_data("vector entry")?;
        values.push(parse_value(&lines, header.field, &mut line.split_whitespace())?);
    }
    lines.expect_end()?;
    Ok(match header.field {
        Field::Complex => MtxVector::Complex(values),
        _ => MtxVector::Real(values.into_iter().map(|v| v.re).collect()),
    })
}

pub fn read_vector_file(path: impl AsRef<Path>) -> Result<MtxVector> {
    let path = path.as_ref();
    File::open(path)
        .map_err(Error::from)
        .and_then(|f| read_vector(BufReader::new(f)))
        .map_err(|e| e.in_file(path))
}

fn densify<T: Scalar>(a: &CsrMatrix<T>) -> Vec<T> {
    let mut v = vec![T::zero(); a.nrows()];
    for (i, _, x) in a.triplets() {
        v[i] += x;
    }
    v
}

/// Scalars that can be written to Matrix Market files.
pub trait MtxScalar: Scalar {
    const FIELD: &'static str;
    fn write_value<W: Write>(&self, w: &mut W) -> std::io::Result<()>;
}

// 17 significant digits: enough for an exact f64 round trip.
impl MtxScalar for f64 {
    const FIELD: &'static str = "real";
    fn write_value<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "{:.16e}", self)
    }
}

impl MtxScalar for C64 {
    const FIELD: &'static str = "complex";
    fn write_value<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write!(w, "{:.16e} {:.16e}", self.re, self.im)
    }
}

/// Writes `a` in coordinate general format, entries in row-major order.
pub fn write_matrix_market<W: Write, T: MtxScalar>(mut w: W, a: &CsrMatrix<T>) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate {} general", T::FIELD)?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.triplets() {
        write!(w, "{} {} ", i + 1, j + 1)?;
        v.write_value(&mut w)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_file<T: MtxScalar>(path: impl AsRef<Path>, a: &CsrMatrix<T>) -> Result<()> {
    let path = path.as_ref();
    File::create(path)
        .map_err(Error::from)
        .and_then(|f| write_matrix_market(BufWriter::new(f), a))
        .map_err(|e| e.in_file(path))
}

/// Writes `v` as an `N × 1` array.
pub fn write_vector<W: Write, T: MtxScalar>(mut w: W, v: &[T]) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix array {} general", T::FIELD)?;
    writeln!(w, "{} 1", v.len())?;
    for x in v {
        x.write_value(&mut w)?;
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_vector_file<T: MtxScalar>(path: impl AsRef<Path>, v: &[T]) -> Result<()> {
    let path = path.as_ref();
    File::create(path)
        .map_err(Error::from)
        .and_then(|f| write_vector(BufWriter::new(f), v))
        .map_err(|e| e.in_file(path))
}
