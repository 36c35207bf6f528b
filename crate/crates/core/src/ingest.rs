//! Point input (CSV or JSON lines) and the binary density dump.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DensityMap, Point2D};

/// Fraction of malformed rows tolerated before ingestion aborts.
pub const MALFORMED_ROW_LIMIT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Csv,
    Jsonl,
}

/// Which input columns hold which point fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Columns {
    pub x: String,
    pub y: String,
    /// `None` reads `weight` when present and defaults to 1 otherwise.
    pub weight: Option<String>,
    /// `None` reads `text` when present.
    pub text: Option<String>,
    pub require_text: bool,
}

impl Default for Columns {
    fn default() -> Self {
        Self {
            x: "x".into(),
            y: "y".into(),
            weight: None,
            text: None,
            require_text: false,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub points: Vec<Point2D>,
    /// Data rows read, including malformed ones.
    pub rows: u64,
    /// Malformed rows skipped, as `(line number, reason)`.
    pub malformed: Vec<(u64, String)>,
}

impl Ingested {
    fn finish(self) -> Result<Self> {
        let limit = (self.rows as f64 * MALFORMED_ROW_LIMIT).floor() as usize;
        if self.malformed.len() > limit {
            let (row, reason) = &self.malformed[0];
            return Err(Error::MalformedRow {
                row: *row,
                message: format!(
                    "{reason} ({} of {} rows malformed, limit is 1%)",
                    self.malformed.len(),
                    self.rows
                ),
            });
        }
        Ok(self)
    }
}

pub fn read_points<R: Read>(reader: R, format: InputFormat, columns: &Columns) -> Result<Ingested> {
    match format {
        InputFormat::Csv => read_csv(reader, columns),
        InputFormat::Jsonl => read_jsonl(std::io::BufReader::new(reader), columns),
    }
}

fn missing_column(which: &str, name: &str) -> Error {
    Error::param("columns", format!("{which} column `{name}` not found in input"))
}

fn parse_coord(v: &str, name: &str) -> std::result::Result<f64, String> {
    let parsed: f64 = v
        .trim()
        .parse()
        .map_err(|_| format!("column `{name}`: `{v}` is not a number"))?;
    if parsed.is_finite() {
        Ok(parsed)
    } else {
        Err(format!("column `{name}`: value is not finite"))
    }
}

fn check_weight(w: f64) -> std::result::Result<f64, String> {
    if w.is_finite() && w >= 0.0 {
        Ok(w)
    } else {
        Err(format!("weight {w} must be finite and >= 0"))
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("csv: {other:?}")),
    }
}

fn read_csv<R: Read>(reader: R, columns: &Columns) -> Result<Ingested> {
    let mut csv = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = csv.headers().map_err(csv_error)?.clone();
    let find = |name: &str| header.iter().position(|h| h.trim() == name);

    let x_idx = find(&columns.x).ok_or_else(|| missing_column("x", &columns.x))?;
    let y_idx = find(&columns.y).ok_or_else(|| missing_column("y", &columns.y))?;
    let w_idx = match &columns.weight {
        Some(name) => Some(find(name).ok_or_else(|| missing_column("weight", name))?),
        None => find("weight"),
    };
    let t_idx = match &columns.text {
        Some(name) => Some(find(name).ok_or_else(|| missing_column("text", name))?),
        None => find("text"),
    };
    if columns.require_text && t_idx.is_none() {
        return Err(missing_column("text", columns.text.as_deref().unwrap_or("text")));
    }

    let mut out = Ingested::default();
    let mut record = csv::StringRecord::new();
    loop {
        let line = csv.position().line();
        match csv.read_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(csv_error(e)),
            Err(e) => {
                out.rows += 1;
                out.malformed.push((line, e.to_string()));
                continue;
            }
        }
        out.rows += 1;
        let parsed = (|| -> std::result::Result<Point2D, String> {
            let field = |i: usize, name: &str| {
                record.get(i).ok_or_else(|| format!("missing field `{name}`"))
            };
            let x = parse_coord(field(x_idx, &columns.x)?, &columns.x)?;
            let y = parse_coord(field(y_idx, &columns.y)?, &columns.y)?;
            let weight = match w_idx.and_then(|i| record.get(i)) {
                Some(w) if !w.trim().is_empty() => check_weight(
                    w.trim().parse().map_err(|_| format!("weight `{w}` is not a number"))?,
                )?,
                _ => 1.0,
            };
            Ok(Point2D {
                x,
                y,
                weight,
                text: t_idx.and_then(|i| record.get(i)).map(str::to_owned),
            })
        })();
        match parsed {
            Ok(p) => out.points.push(p),
            Err(reason) => out.malformed.push((line, reason)),
        }
    }
    out.finish()
}

fn read_jsonl<R: BufRead>(reader: R, columns: &Columns) -> Result<Ingested> {
    let mut out = Ingested::default();
    let mut saw_text = false;
    for (n, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = n as u64 + 1;
        if line.trim().is_empty() {
            continue;
        }
        out.rows += 1;
        let parsed = (|| -> std::result::Result<Point2D, String> {
            let value: serde_json::Value =
                serde_json::from_str(&line).map_err(|e| format!("invalid JSON: {e}"))?;
            let obj = value.as_object().ok_or("expected a JSON object")?;
            let number = |name: &str| -> std::result::Result<f64, String> {
                obj.get(name)
                    .ok_or_else(|| format!("missing field `{name}`"))?
                    .as_f64()
                    .ok_or_else(|| format!("field `{name}` is not a number"))
            };
            let x = number(&columns.x)?;
            let y = number(&columns.y)?;
            if !(x.is_finite() && y.is_finite()) {
                return Err("coordinates must be finite".into());
            }
            let weight_name = columns.weight.as_deref().unwrap_or("weight");
            let weight = match obj.get(weight_name) {
                Some(_) => check_weight(number(weight_name)?)?,
                None if columns.weight.is_some() => {
                    return Err(format!("missing field `{weight_name}`"))
                }
                None => 1.0,
            };
            let text_name = columns.text.as_deref().unwrap_or("text");
            let text = match obj.get(text_name) {
                Some(serde_json::Value::String(s)) => Some(s.clone()),
                Some(serde_json::Value::Null) | None => None,
                Some(other) => Some(other.to_string()),
            };
            Ok(Point2D { x, y, weight, text })
        })();
        match parsed {
            Ok(p) => {
                saw_text |= p.text.is_some();
                out.points.push(p);
            }
            Err(reason) => out.malformed.push((line_no, reason)),
        }
    }
    if columns.require_text && !saw_text && out.rows > 0 {
        return Err(missing_column("text", columns.text.as_deref().unwrap_or("text")));
    }
    out.finish()
}

/// Writes `width`, `height` (u32 LE) then the values as f32 LE, row-major.
pub fn write_density_dump<W: Write>(mut writer: W, density: &DensityMap) -> Result<()> {
    let dims = |v: usize| {
        u32::try_from(v).map_err(|_| Error::param("density", "grid too large for dump"))
    };
    writer.write_all(&dims(density.width())?.to_le_bytes())?;
    writer.write_all(&dims(density.height())?.to_le_bytes())?;
    let mut buf = Vec::with_capacity(density.values().len() * 4);
    for &v in density.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    writer.write_all(&buf)?;
    writer.flush()?;
    Ok(())
}

/// Reads a density dump onto the unit-pixel viewport.
pub fn read_density_dump<R: Read>(mut reader: R) -> Result<DensityMap> {
    let mut word = [0u8; 4];
    reader.read_exact(&mut word)?;
    let width = u32::from_le_bytes(word) as usize;
    reader.read_exact(&mut word)?;
    let height = u32::from_le_bytes(word) as usize;
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != width * height * 4 {
        return Err(Error::Format(format!(
            "density dump for {width}x{height} needs {} bytes of values, found {}",
            width * height * 4,
            bytes.len()
        )));
    }
    let values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
        .collect();
    DensityMap::from_pixels(width, height, values)
}
