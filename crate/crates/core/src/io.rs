//! Reading and writing grids: PGM images, the binary `fgrid` format and
//! comma-separated text.
//!
//! An `fgrid` file is a short ASCII header followed by the values as
//! little-endian `f64` in row-major order:
//!
//! ```text
//! FGRID 1
//! shape 3 4
//! spacing 1 1
//! origin 0 0
//! data
//! ```

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};
use crate::grid::{Geometry, MaskGrid, ScalarGrid};

const FGRID_MAGIC: &str = "FGRID 1";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridFormat {
    Pgm,
    Fgrid,
    Csv,
}

impl GridFormat {
    /// Guesses the format from the file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "pgm" | "pnm" => Some(GridFormat::Pgm),
            "fgrid" => Some(GridFormat::Fgrid),
            "csv" => Some(GridFormat::Csv),
            _ => None,
        }
    }

    fn resolve(path: &Path, format: Option<GridFormat>) -> Result<GridFormat> {
        format
            .or_else(|| GridFormat::from_path(path))
            .ok_or_else(|| Error::format(path, "unknown grid format; use .pgm, .fgrid or .csv"))
    }
}

/// Reads a grid, taking the format from the extension when `format` is `None`.
pub fn read_grid(path: impl AsRef<Path>, format: Option<GridFormat>) -> Result<ScalarGrid> {
    let path = path.as_ref();
    match GridFormat::resolve(path, format)? {
        GridFormat::Pgm => read_pgm(path),
        GridFormat::Fgrid => read_fgrid(path),
        GridFormat::Csv => read_csv(path),
    }
}

pub fn write_grid(
    g: &ScalarGrid,
    path: impl AsRef<Path>,
    format: Option<GridFormat>,
) -> Result<()> {
    let path = path.as_ref();
    match GridFormat::resolve(path, format)? {
        GridFormat::Pgm => write_pgm(g, path),
        GridFormat::Fgrid => write_fgrid(g, path),
        GridFormat::Csv => write_csv(g, path),
    }
}

/// Reads any grid file and marks its non-zero cells.
pub fn read_mask(path: impl AsRef<Path>, format: Option<GridFormat>) -> Result<MaskGrid> {
    Ok(MaskGrid::nonzero(&read_grid(path, format)?))
}

/// Writes a mask as `amplitude` on marked cells, 0 elsewhere.
pub fn write_mask(
    m: &MaskGrid,
    path: impl AsRef<Path>,
    format: Option<GridFormat>,
    amplitude: f64,
) -> Result<()> {
    write_grid(&m.to_grid(amplitude), path, format)
}

pub fn read_pgm(path: &Path) -> Result<ScalarGrid> {
    let reader = image::ImageReader::open(path).map_err(|e| Error::io(path, e))?;
    let img = reader
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?
        .decode()
        .map_err(|e| Error::format(path, e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let values: Vec<f64> = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(f64::from).collect(),
        _ => return Err(Error::format(path, "expected a grayscale image")),
    };
    ScalarGrid::from_shape_vec(&[h, w], values)
}

/// Writes a 2-D grid as a binary PGM. Values are rounded and clamped to
/// `0..=255`, or to `0..=65535` when any value exceeds 255.
pub fn write_pgm(g: &ScalarGrid, path: &Path) -> Result<()> {
    if g.ndim() != 2 {
        return Err(Error::format(path, "PGM holds 2-D grids only"));
    }
    let (h, w) = (g.shape()[0] as u32, g.shape()[1] as u32);
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    if g.max() > 255.5 {
        // the pnm encoder only takes 8-bit samples; 16-bit P5 is big-endian
        let mut out = BufWriter::new(file);
        let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
            write!(out, "P5\n{w} {h}\n65535\n")?;
            for v in g.values() {
                out.write_all(&(v.round().clamp(0.0, 65535.0) as u16).to_be_bytes())?;
            }
            out.flush()
        };
        return write(&mut out).map_err(|e| Error::io(path, e));
    }
    let bytes: Vec<u8> = g
        .values()
        .iter()
        .map(|v| v.round().clamp(0.0, 255.0) as u8)
        .collect();
    PnmEncoder::new(BufWriter::new(file))
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(&bytes, w, h, ExtendedColorType::L8)
        .map_err(|e| Error::format(path, e.to_string()))
}

pub fn read_fgrid(path: &Path) -> Result<ScalarGrid> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    let mut next_line = |reader: &mut BufReader<File>| -> Result<String> {
        line.clear();
        let n = reader
            .read_line(&mut line)
            .map_err(|e| Error::io(path, e))?;
        if n == 0 {
            return Err(Error::format(path, "truncated header"));
        }
        Ok(line.trim_end().to_string())
    };
    if next_line(&mut reader)? != FGRID_MAGIC {
        return Err(Error::format(path, "missing FGRID magic"));
    }
    let shape: Vec<usize> = header_field(path, &next_line(&mut reader)?, "shape")?;
    let spacing: Vec<f64> = header_field(path, &next_line(&mut reader)?, "spacing")?;
    let origin: Vec<f64> = header_field(path, &next_line(&mut reader)?, "origin")?;
    if next_line(&mut reader)? != "data" {
        return Err(Error::format(path, "expected `data` after the header"));
    }
    let geometry =
        Geometry::new(shape, spacing, origin).map_err(|e| Error::format(path, e.to_string()))?;
    let mut bytes = Vec::new();
    reader
        .read_to_end(&mut bytes)
        .map_err(|e| Error::io(path, e))?;
    if bytes.len() != geometry.len() * 8 {
        return Err(Error::format(
            path,
            format!(
                "expected {} data bytes, found {}",
                geometry.len() * 8,
                bytes.len()
            ),
        ));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight bytes")))
        .collect();
    ScalarGrid::new(geometry, values)
}

fn header_field<T: std::str::FromStr>(path: &Path, line: &str, key: &str) -> Result<Vec<T>> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(Error::format(
            path,
            format!("expected `{key}` header line, got `{line}`"),
        ));
    }
    parts
        .map(|p| {
            p.parse::<T>()
                .map_err(|_| Error::format(path, format!("bad {key} entry `{p}`")))
        })
        .collect()
}

pub fn write_fgrid(g: &ScalarGrid, path: &Path) -> Result<()> {
    let geom = g.geometry();
    let join = |xs: Vec<String>| xs.join(" ");
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    let header = format!(
        "{FGRID_MAGIC}\nshape {}\nspacing {}\norigin {}\ndata\n",
        join(geom.shape().iter().map(|n| n.to_string()).collect()),
        join(geom.spacing().iter().map(|h| format!("{h:?}")).collect()),
        join(geom.origin().iter().map(|o| format!("{o:?}")).collect()),
    );
    let write = |out: &mut BufWriter<File>| -> std::io::Result<()> {
        out.write_all(header.as_bytes())?;
        for v in g.values() {
            out.write_all(&v.to_le_bytes())?;
        }
        out.flush()
    };
    write(&mut out).map_err(|e| Error::io(path, e))
}

/// One grid row per line. 1-D grids are read as a single row.
pub fn read_csv(path: &Path) -> Result<ScalarGrid> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let mut rows = 0;
    let mut cols = None;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::format(path, e.to_string()))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        match cols {
            None => cols = Some(record.len()),
            Some(c) if c != record.len() => {
                return Err(Error::format(
                    path,
                    format!("row {} has {} fields, expected {c}", rows + 1, record.len()),
                ))
            }
            _ => {}
        }
        for field in record.iter() {
            let v: f64 = field.parse().map_err(|_| {
                Error::format(path, format!("bad number `{field}` in row {}", rows + 1))
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| Error::format(path, "no rows"))?;
    ScalarGrid::from_shape_vec(&[rows, cols], values)
}

pub fn write_csv(g: &ScalarGrid, path: &Path) -> Result<()> {
    let (rows, cols) = match g.shape() {
        [n] => (1, *n),
        [r, c] => (*r, *c),
        _ => return Err(Error::format(path, "CSV holds 1-D or 2-D grids only")),
    };
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    for r in 0..rows {
        let row = &g.values()[r * cols..(r + 1) * cols];
        writer
            .write_record(row.iter().map(|v| format!("{v:?}")))
            .map_err(|e| Error::format(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

/// Writes lattice indices, one point per row.
pub fn write_markers(points: &[Vec<usize>], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::format(path, e.to_string()))?;
    for p in points {
        writer
            .write_record(p.iter().map(|i| i.to_string()))
            .map_err(|e| Error::format(path, e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io(path, e))
}

pub fn read_markers(path: impl AsRef<Path>) -> Result<Vec<Vec<usize>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(BufReader::new(file));
    reader
        .records()
        .map(|r| {
            let r = r.map_err(|e| Error::format(path, e.to_string()))?;
            r.iter()
                .map(|f| {
                    f.trim()
                        .parse()
                        .map_err(|_| Error::format(path, format!("bad index `{f}`")))
                })
                .collect()
        })
        .collect()
}
