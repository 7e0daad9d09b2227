//! Field file formats.
//!
//! * CSV: one row per q sample, `q` first, then one column per p sample
//!   (`value` for q-lines). Numbers use Rust's shortest round-trip `{:e}`.
//! * Binary, all little-endian: the 8-byte magic `PWGF0001`, the layout as
//!   u64 (0 q-line, 1 p-line, 2 plane), the q and p axes as
//!   `(min f64, max f64, n u64, periodic u64)`, `ħ` as f64, then the samples
//!   in row-major order as `(re f64, im f64)` pairs.
//! * PGM (P5) and PPM (P6) heatmaps of planes: one pixel per sample, q to the
//!   right, the top row at the largest p.
//! * JSON sidecars describing grid and provenance.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numgrid::{AxisSpec, ComplexField, Field, FieldKind, PhaseGrid, RealField, Scalar};
use crate::C64;

pub const MAGIC: &[u8; 8] = b"PWGF0001";

/// Writes `bytes` to a temporary file beside `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn csv_string(field: &RealField) -> String {
    let g = field.grid();
    let v = field.values();
    let mut out = String::new();
    out.push('q');
    match field.kind() {
        FieldKind::QLine => out.push_str(",value"),
        _ => {
            for j in 0..v.ncols() {
                out.push_str(&format!(",p={:e}", g.p.point(j)));
            }
        }
    }
    out.push('\n');
    for (i, row) in v.rows().into_iter().enumerate() {
        let q = if field.kind() == FieldKind::PLine { f64::NAN } else { g.q.point(i) };
        out.push_str(&format!("{q:e}"));
        for x in row {
            out.push_str(&format!(",{x:e}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, field: &RealField) -> Result<()> {
    write_atomic(path, csv_string(field).as_bytes())
}

fn layout_code(kind: FieldKind) -> u64 {
    match kind {
        FieldKind::QLine => 0,
        FieldKind::PLine => 1,
        FieldKind::Plane => 2,
    }
}

pub fn binary_bytes<T: Scalar>(field: &Field<T>) -> Vec<u8> {
    let g = field.grid();
    let mut out = Vec::with_capacity(96 + 16 * field.values().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&layout_code(field.kind()).to_le_bytes());
    for a in [g.q, g.p] {
        out.extend_from_slice(&a.min.to_le_bytes());
        out.extend_from_slice(&a.max.to_le_bytes());
        out.extend_from_slice(&(a.n as u64).to_le_bytes());
        out.extend_from_slice(&(a.periodic as u64).to_le_bytes());
    }
    out.extend_from_slice(&g.hbar.to_le_bytes());
    for v in field.values().iter() {
        let z = v.to_complex();
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

pub fn write_binary<T: Scalar>(path: &Path, field: &Field<T>) -> Result<()> {
    write_atomic(path, &binary_bytes(field))
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
}

impl Reader<'_> {
    fn take8(&mut self) -> Result<[u8; 8]> {
        let s = self
            .bytes
            .get(self.at..self.at + 8)
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.at)))?;
        self.at += 8;
        Ok(s.try_into().expect("slice of eight"))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take8()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take8()?))
    }
}

pub fn read_binary_bytes(bytes: &[u8]) -> Result<ComplexField> {
    let mut r = Reader { bytes, at: 0 };
    if &r.take8()? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let kind = match r.u64()? {
        0 => FieldKind::QLine,
        1 => FieldKind::PLine,
        2 => FieldKind::Plane,
        k => return Err(Error::Format(format!("unknown layout {k}"))),
    };
    let mut axes = Vec::with_capacity(2);
    for _ in 0..2 {
        let (min, max, n, periodic) = (r.f64()?, r.f64()?, r.u64()? as usize, r.u64()? != 0);
        axes.push(if periodic { AxisSpec::periodic(min, max, n)? } else { AxisSpec::new(min, max, n)? });
    }
    let grid = PhaseGrid::new(axes[0], axes[1], r.f64()?)?;
    let (nq, np) = match kind {
        FieldKind::QLine => (grid.q.n, 1),
        FieldKind::PLine => (1, grid.p.n),
        FieldKind::Plane => (grid.q.n, grid.p.n),
    };
    let mut data = Vec::with_capacity(nq * np);
    for _ in 0..nq * np {
        data.push(C64::new(r.f64()?, r.f64()?));
    }
    if r.at != bytes.len() {
        return Err(Error::Format(format!("{} trailing bytes", bytes.len() - r.at)));
    }
    let values = ndarray::Array2::from_shape_vec((nq, np), data)
        .map_err(|e| Error::Format(e.to_string()))?;
    ComplexField::from_array(grid, kind, values)
}

pub fn read_binary(path: &Path) -> Result<ComplexField> {
    read_binary_bytes(&fs::read(path)?)
}

/// Value range mapped onto the pixel range of a heatmap.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRange {
    pub min: f64,
    pub max: f64,
}

fn require_plane(field: &RealField) -> Result<()> {
    if field.kind() != FieldKind::Plane {
        return Err(Error::ShapeMismatch("heatmaps need a plane field".into()));
    }
    Ok(())
}

/// Pixels in image order: rows from the largest p down, q left to right.
fn image_order(field: &RealField) -> impl Iterator<Item = f64> + '_ {
    let v = field.values();
    let (nq, np) = v.dim();
    (0..np).rev().flat_map(move |j| (0..nq).map(move |i| v[[i, j]]))
}

/// Grey level `round(255 (v - min)/(max - min))`, all zero for a flat field.
pub fn pgm_bytes(field: &RealField) -> Result<(Vec<u8>, HeatmapRange)> {
    require_plane(field)?;
    let (nq, np) = field.values().dim();
    let (min, max) = field
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let span = max - min;
    let mut out = format!("P5\n{nq} {np}\n255\n").into_bytes();
    out.extend(image_order(field).map(|v| {
        if span > 0.0 {
            (255.0 * (v - min) / span).round() as u8
        } else {
            0
        }
    }));
    Ok((out, HeatmapRange { min, max }))
}

/// Diverging palette centred at zero: with `t = v / max|v|`, white fades to
/// red `(255, 255(1-t), 255(1-t))` for `t ≥ 0` and to blue
/// `(255(1+t), 255(1+t), 255)` for `t < 0`.
pub fn ppm_bytes(field: &RealField) -> Result<(Vec<u8>, HeatmapRange)> {
    require_plane(field)?;
    let (nq, np) = field.values().dim();
    let m = field.max_abs();
    let mut out = format!("P6\n{nq} {np}\n255\n").into_bytes();
    for v in image_order(field) {
        let t = if m > 0.0 { v / m } else { 0.0 };
        let px = if t >= 0.0 {
            let c = (255.0 * (1.0 - t)).round() as u8;
            [255, c, c]
        } else {
            let c = (255.0 * (1.0 + t)).round() as u8;
            [c, c, 255]
        };
        out.extend_from_slice(&px);
    }
    Ok((out, HeatmapRange { min: -m, max: m }))
}

pub fn write_pgm(path: &Path, field: &RealField) -> Result<HeatmapRange> {
    let (bytes, range) = pgm_bytes(field)?;
    write_atomic(path, &bytes)?;
    Ok(range)
}

pub fn write_ppm(path: &Path, field: &RealField) -> Result<HeatmapRange> {
    let (bytes, range) = ppm_bytes(field)?;
    write_atomic(path, &bytes)?;
    Ok(range)
}

/// JSON description written next to every field file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub layout: FieldKind,
    pub q: AxisSpec,
    pub p: AxisSpec,
    pub hbar: f64,
    pub quantity: String,
    pub source: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generating_function: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<usize>,
}

impl Sidecar {
    pub fn new<T: Scalar>(field: &Field<T>, quantity: impl Into<String>, source: impl Into<String>) -> Self {
        let g = field.grid();
        Self {
            layout: field.kind(),
            q: g.q,
            p: g.p,
            hbar: g.hbar,
            quantity: quantity.into(),
            source: source.into(),
            generating_function: None,
            level: None,
        }
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))?;
        write_atomic(path, format!("{text}\n").as_bytes())
    }
}
