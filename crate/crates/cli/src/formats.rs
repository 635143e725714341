//! Field serialization: CSV, JSON, and the binary interchange format.
//!
//! CSV: header lines `# axis1 <start> <step> <count>` (and `# axis2 ...` for
//! rank-2 fields), then `x,value` / `x,y,value` rows in row-major order with
//! 17 significant digits. Complex fields carry `re,im` in place of `value`.
//!
//! JSON: a flat object `{schema_version, kind, axis1[, axis2], values}`;
//! complex values are `[re, im]` pairs.
//!
//! Binary: magic `WGF1` (real) or `WGC1` (complex), little-endian `u32` rank,
//! per-axis `f64 start, f64 step, u32 count`, then `f64` values row-major
//! (complex interleaved re,im). Bit-exact by construction.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{self, Read, Write};
use std::path::Path;

use wigner_lab::{ComplexField1D, ComplexField2D, Grid1D, RealField1D, RealField2D};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Bin,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "bin" => Ok(Format::Bin),
            other => Err(format!(
                "unknown format '{other}' (expected csv, json, or bin)"
            )),
        }
    }
}

/// Any field the CLI reads or writes.
#[derive(Debug, Clone)]
pub enum Field {
    Real1D(RealField1D),
    Real2D(RealField2D),
    Complex1D(ComplexField1D),
    Complex2D(ComplexField2D),
}

impl Field {
    fn kind(&self) -> &'static str {
        match self {
            Field::Real1D(_) => "real1d",
            Field::Real2D(_) => "real2d",
            Field::Complex1D(_) => "complex1d",
            Field::Complex2D(_) => "complex2d",
        }
    }

    pub fn as_real2d(&self) -> io::Result<&RealField2D> {
        match self {
            Field::Real2D(f) => Ok(f),
            other => Err(bad_data(format!(
                "expected a real rank-2 field, found {}",
                other.kind()
            ))),
        }
    }

    pub fn as_complex2d(&self) -> io::Result<&ComplexField2D> {
        match self {
            Field::Complex2D(f) => Ok(f),
            other => Err(bad_data(format!(
                "expected a complex rank-2 field, found {}",
                other.kind()
            ))),
        }
    }
}

fn bad_data(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

fn csv_axis_line(name: &str, g: &Grid1D) -> String {
    format!(
        "# {name} {} {} {}\n",
        fmt17(g.start()),
        fmt17(g.step()),
        g.count()
    )
}

pub fn write_csv<W: Write>(w: &mut W, field: &Field) -> io::Result<()> {
    match field {
        Field::Real1D(f) => {
            w.write_all(csv_axis_line("axis1", f.grid()).as_bytes())?;
            for (k, v) in f.values().iter().enumerate() {
                writeln!(w, "{},{}", fmt17(f.grid().point(k)), fmt17(*v))?;
            }
        }
        Field::Complex1D(f) => {
            w.write_all(csv_axis_line("axis1", f.grid()).as_bytes())?;
            for (k, v) in f.values().iter().enumerate() {
                writeln!(
                    w,
                    "{},{},{}",
                    fmt17(f.grid().point(k)),
                    fmt17(v.re),
                    fmt17(v.im)
                )?;
            }
        }
        Field::Real2D(f) => {
            w.write_all(csv_axis_line("axis1", f.grid_x()).as_bytes())?;
            w.write_all(csv_axis_line("axis2", f.grid_y()).as_bytes())?;
            let ny = f.grid_y().count();
            for (k, v) in f.values().iter().enumerate() {
                let (ix, iy) = (k / ny, k % ny);
                writeln!(
                    w,
                    "{},{},{}",
                    fmt17(f.grid_x().point(ix)),
                    fmt17(f.grid_y().point(iy)),
                    fmt17(*v)
                )?;
            }
        }
        Field::Complex2D(f) => {
            w.write_all(csv_axis_line("axis1", f.grid_x()).as_bytes())?;
            w.write_all(csv_axis_line("axis2", f.grid_y()).as_bytes())?;
            let ny = f.grid_y().count();
            for (k, v) in f.values().iter().enumerate() {
                let (ix, iy) = (k / ny, k % ny);
                writeln!(
                    w,
                    "{},{},{},{}",
                    fmt17(f.grid_x().point(ix)),
                    fmt17(f.grid_y().point(iy)),
                    fmt17(v.re),
                    fmt17(v.im)
                )?;
            }
        }
    }
    Ok(())
}

fn parse_axis_line(line: &str) -> io::Result<Grid1D> {
    let parts: Vec<&str> = line.split_whitespace().collect();
    if parts.len() != 5 || parts[0] != "#" {
        return Err(bad_data(format!("malformed axis header: {line}")));
    }
    let start: f64 = parts[2]
        .parse()
        .map_err(|e| bad_data(format!("bad start: {e}")))?;
    let step: f64 = parts[3]
        .parse()
        .map_err(|e| bad_data(format!("bad step: {e}")))?;
    let count: usize = parts[4]
        .parse()
        .map_err(|e| bad_data(format!("bad count: {e}")))?;
    Grid1D::new(start, step, count).map_err(|e| bad_data(e.to_string()))
}

pub fn read_csv(text: &str) -> io::Result<Field> {
    let mut lines = text.lines().peekable();
    let mut axes = Vec::new();
    while let Some(line) = lines.peek() {
        if line.starts_with('#') {
            axes.push(parse_axis_line(line)?);
            lines.next();
        } else {
            break;
        }
    }
    let data_cols: Vec<Vec<f64>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split(',')
                .map(|tok| {
                    tok.trim()
                        .parse::<f64>()
                        .map_err(|e| bad_data(format!("bad value: {e}")))
                })
                .collect::<io::Result<Vec<f64>>>()
        })
        .collect::<io::Result<_>>()?;
    let ncols = data_cols.first().map(|r| r.len()).unwrap_or(0);
    if data_cols.iter().any(|r| r.len() != ncols) {
        return Err(bad_data("ragged csv rows".into()));
    }
    match (axes.len(), ncols) {
        (1, 2) => {
            let values = data_cols.iter().map(|r| r[1]).collect();
            RealField1D::new(axes[0], values)
                .map(Field::Real1D)
                .map_err(|e| bad_data(e.to_string()))
        }
        (1, 3) => {
            let values = data_cols
                .iter()
                .map(|r| Complex64::new(r[1], r[2]))
                .collect();
            ComplexField1D::new(axes[0], values)
                .map(Field::Complex1D)
                .map_err(|e| bad_data(e.to_string()))
        }
        (2, 3) => {
            let values = data_cols.iter().map(|r| r[2]).collect();
            RealField2D::new(axes[0], axes[1], values)
                .map(Field::Real2D)
                .map_err(|e| bad_data(e.to_string()))
        }
        (2, 4) => {
            let values = data_cols
                .iter()
                .map(|r| Complex64::new(r[2], r[3]))
                .collect();
            ComplexField2D::new(axes[0], axes[1], values)
                .map(Field::Complex2D)
                .map_err(|e| bad_data(e.to_string()))
        }
        (na, nc) => Err(bad_data(format!(
            "unsupported csv shape: {na} axes, {nc} columns"
        ))),
    }
}

// ---------------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct JsonField {
    schema_version: u32,
    kind: String,
    axis1: Grid1D,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis2: Option<Grid1D>,
    values: serde_json::Value,
}

pub fn write_json<W: Write>(w: &mut W, field: &Field) -> io::Result<()> {
    let (axis1, axis2) = match field {
        Field::Real1D(f) => (*f.grid(), None),
        Field::Complex1D(f) => (*f.grid(), None),
        Field::Real2D(f) => (*f.grid_x(), Some(*f.grid_y())),
        Field::Complex2D(f) => (*f.grid_x(), Some(*f.grid_y())),
    };
    let values = match field {
        Field::Real1D(f) => serde_json::to_value(f.values()),
        Field::Real2D(f) => serde_json::to_value(f.values()),
        Field::Complex1D(f) => {
            serde_json::to_value(f.values().iter().map(|v| [v.re, v.im]).collect::<Vec<_>>())
        }
        Field::Complex2D(f) => {
            serde_json::to_value(f.values().iter().map(|v| [v.re, v.im]).collect::<Vec<_>>())
        }
    }
    .map_err(|e| bad_data(e.to_string()))?;
    let doc = JsonField {
        schema_version: 1,
        kind: field.kind().into(),
        axis1,
        axis2,
        values,
    };
    serde_json::to_writer(&mut *w, &doc).map_err(|e| bad_data(e.to_string()))?;
    w.write_all(b"\n")
}

pub fn read_json(text: &str) -> io::Result<Field> {
    let doc: JsonField = serde_json::from_str(text).map_err(|e| bad_data(e.to_string()))?;
    if doc.schema_version != 1 {
        return Err(bad_data(format!(
            "unsupported schema version {}",
            doc.schema_version
        )));
    }
    let complex = doc.kind.starts_with("complex");
    let real_values = |v: &serde_json::Value| -> io::Result<Vec<f64>> {
        serde_json::from_value(v.clone()).map_err(|e| bad_data(e.to_string()))
    };
    let complex_values = |v: &serde_json::Value| -> io::Result<Vec<Complex64>> {
        let pairs: Vec<[f64; 2]> =
            serde_json::from_value(v.clone()).map_err(|e| bad_data(e.to_string()))?;
        Ok(pairs.iter().map(|p| Complex64::new(p[0], p[1])).collect())
    };
    let field = match (doc.kind.as_str(), doc.axis2) {
        ("real1d", None) => Field::Real1D(
            RealField1D::new(doc.axis1, real_values(&doc.values)?)
                .map_err(|e| bad_data(e.to_string()))?,
        ),
        ("complex1d", None) => Field::Complex1D(
            ComplexField1D::new(doc.axis1, complex_values(&doc.values)?)
                .map_err(|e| bad_data(e.to_string()))?,
        ),
        ("real2d", Some(axis2)) => Field::Real2D(
            RealField2D::new(doc.axis1, axis2, real_values(&doc.values)?)
                .map_err(|e| bad_data(e.to_string()))?,
        ),
        ("complex2d", Some(axis2)) => Field::Complex2D(
            ComplexField2D::new(doc.axis1, axis2, complex_values(&doc.values)?)
                .map_err(|e| bad_data(e.to_string()))?,
        ),
        _ => {
            return Err(bad_data(format!(
                "inconsistent kind {} / axes ({complex})",
                doc.kind
            )))
        }
    };
    Ok(field)
}

// ---------------------------------------------------------------------------
// Binary
// ---------------------------------------------------------------------------

const MAGIC_REAL: &[u8; 4] = b"WGF1";
const MAGIC_COMPLEX: &[u8; 4] = b"WGC1";

fn write_axis<W: Write>(w: &mut W, g: &Grid1D) -> io::Result<()> {
    w.write_all(&g.start().to_le_bytes())?;
    w.write_all(&g.step().to_le_bytes())?;
    w.write_all(&(g.count() as u32).to_le_bytes())
}

pub fn write_bin<W: Write>(w: &mut W, field: &Field) -> io::Result<()> {
    let (magic, rank) = match field {
        Field::Real1D(_) => (MAGIC_REAL, 1u32),
        Field::Real2D(_) => (MAGIC_REAL, 2u32),
        Field::Complex1D(_) => (MAGIC_COMPLEX, 1u32),
        Field::Complex2D(_) => (MAGIC_COMPLEX, 2u32),
    };
    w.write_all(magic)?;
    w.write_all(&rank.to_le_bytes())?;
    match field {
        Field::Real1D(f) => {
            write_axis(w, f.grid())?;
            for v in f.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Field::Real2D(f) => {
            write_axis(w, f.grid_x())?;
            write_axis(w, f.grid_y())?;
            for v in f.values() {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Field::Complex1D(f) => {
            write_axis(w, f.grid())?;
            for v in f.values() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
        Field::Complex2D(f) => {
            write_axis(w, f.grid_x())?;
            write_axis(w, f.grid_y())?;
            for v in f.values() {
                w.write_all(&v.re.to_le_bytes())?;
                w.write_all(&v.im.to_le_bytes())?;
            }
        }
    }
    Ok(())
}

struct BinReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> BinReader<'a> {
    fn take(&mut self, n: usize) -> io::Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(bad_data("truncated binary field".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn f64(&mut self) -> io::Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> io::Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn axis(&mut self) -> io::Result<Grid1D> {
        let start = self.f64()?;
        let step = self.f64()?;
        let count = self.u32()? as usize;
        Grid1D::new(start, step, count).map_err(|e| bad_data(e.to_string()))
    }
}

pub fn read_bin(buf: &[u8]) -> io::Result<Field> {
    let mut r = BinReader { buf, pos: 0 };
    let magic = r.take(4)?;
    let complex = match magic {
        m if m == MAGIC_REAL => false,
        m if m == MAGIC_COMPLEX => true,
        _ => return Err(bad_data("bad magic bytes (expected WGF1 or WGC1)".into())),
    };
    let rank = r.u32()?;
    let axes: Vec<Grid1D> = (0..rank).map(|_| r.axis()).collect::<io::Result<_>>()?;
    let n: usize = axes.iter().map(|a| a.count()).product();
    if complex {
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            let re = r.f64()?;
            let im = r.f64()?;
            values.push(Complex64::new(re, im));
        }
        match rank {
            1 => ComplexField1D::new(axes[0], values)
                .map(Field::Complex1D)
                .map_err(|e| bad_data(e.to_string())),
            2 => ComplexField2D::new(axes[0], axes[1], values)
                .map(Field::Complex2D)
                .map_err(|e| bad_data(e.to_string())),
            _ => Err(bad_data(format!("unsupported rank {rank}"))),
        }
    } else {
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(r.f64()?);
        }
        match rank {
            1 => RealField1D::new(axes[0], values)
                .map(Field::Real1D)
                .map_err(|e| bad_data(e.to_string())),
            2 => RealField2D::new(axes[0], axes[1], values)
                .map(Field::Real2D)
                .map_err(|e| bad_data(e.to_string())),
            _ => Err(bad_data(format!("unsupported rank {rank}"))),
        }
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

pub fn write_field(path: &Path, field: &Field, format: Format) -> io::Result<()> {
    let mut out: Vec<u8> = Vec::new();
    match format {
        Format::Csv => write_csv(&mut out, field)?,
        Format::Json => write_json(&mut out, field)?,
        Format::Bin => write_bin(&mut out, field)?,
    }
    std::fs::write(path, out)
}

/// Reads a field, detecting the format from the leading bytes.
pub fn read_field(path: &Path) -> io::Result<Field> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.starts_with(MAGIC_REAL) || buf.starts_with(MAGIC_COMPLEX) {
        return read_bin(&buf);
    }
    let text = String::from_utf8(buf).map_err(|e| bad_data(e.to_string()))?;
    if text.trim_start().starts_with('{') {
        read_json(&text)
    } else {
        read_csv(&text)
    }
}
