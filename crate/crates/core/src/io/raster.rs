use std::fmt::Write as _;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::logcentric::{GridSpec, Heightmap};
use crate::{Error, Result};

use super::model_json::{json_error, to_json_string};
use super::{read_bytes, read_text, write_atomic};

const LEVELS: f64 = 65535.0;

/// Linear scale of a 16-bit heightmap image: gray level `g` maps to
/// `min + g * (max - min) / 65535` millimeters. Image rows run along `l`,
/// columns along `theta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeightmapSidecar {
    pub units: String,
    pub min: f64,
    pub max: f64,
    pub grid: GridSpec,
    pub l_domain: [f64; 2],
}

impl HeightmapSidecar {
    pub fn level_to_mm(&self, g: u16) -> f64 {
        if self.max > self.min {
            self.min + g as f64 * (self.max - self.min) / LEVELS
        } else {
            self.min
        }
    }

    pub fn mm_to_level(&self, v: f64) -> u16 {
        if self.max > self.min {
            ((v - self.min) / (self.max - self.min) * LEVELS).round().clamp(0.0, LEVELS) as u16
        } else {
            0
        }
    }

    /// Largest difference between a value and its quantized gray level.
    pub fn quantization_step(&self) -> f64 {
        (self.max - self.min) / LEVELS
    }
}

/// `heightmap.png` -> `heightmap.png.json`.
pub fn sidecar_path(png: &Path) -> PathBuf {
    let mut s = png.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Writes a 16-bit grayscale PNG and its JSON sidecar. Nonphysical heightmaps
/// are refused.
pub fn write_heightmap_png(h: &Heightmap, path: impl AsRef<Path>) -> Result<HeightmapSidecar> {
    let path = path.as_ref();
    h.check_physical()?;
    let (min, max) = h.min_max();
    let g = h.grid;
    let sidecar = HeightmapSidecar { units: "mm".into(), min, max, grid: g, l_domain: [g.l_min, g.l_max] };
    let mut data = Vec::with_capacity(h.values.len() * 2);
    for v in &h.values {
        data.extend_from_slice(&sidecar.mm_to_level(*v).to_be_bytes());
    }
    let mut bytes = Vec::new();
    {
        let dims = |n: usize| u32::try_from(n).map_err(|_| Error::InvalidParameter(format!("heightmap dimension {n} too large for PNG")));
        let mut enc = png::Encoder::new(&mut bytes, dims(g.n_theta)?, dims(g.n_l)?);
        enc.set_color(png::ColorType::Grayscale);
        enc.set_depth(png::BitDepth::Sixteen);
        let png_err = |e: png::EncodingError| Error::InvalidParameter(format!("PNG encoding: {e}"));
        let mut w = enc.write_header().map_err(png_err)?;
        w.write_image_data(&data).map_err(png_err)?;
        w.finish().map_err(png_err)?;
    }
    write_atomic(path, &bytes)?;
    write_atomic(sidecar_path(path), to_json_string(&sidecar)?.as_bytes())?;
    Ok(sidecar)
}

/// Reads a heightmap PNG through its sidecar. Values come back quantized to
/// the sidecar's gray-level step.
pub fn read_heightmap_png(path: impl AsRef<Path>) -> Result<Heightmap> {
    let path = path.as_ref();
    let side_path = sidecar_path(path);
    let text = read_text(&side_path)?;
    let sidecar: HeightmapSidecar = serde_json::from_str(&text).map_err(|e| json_error(&text, &e))?;
    if sidecar.units != "mm" {
        return Err(Error::Validation(format!("heightmap units '{}' are not mm", sidecar.units)));
    }
    let bytes = read_bytes(path)?;
    let png_err = |e: png::DecodingError| Error::Parse { offset: 0, message: format!("PNG: {e}") };
    let mut reader = png::Decoder::new(Cursor::new(bytes)).read_info().map_err(png_err)?;
    let size = reader.output_buffer_size().ok_or_else(|| Error::InvalidParameter("PNG too large".into()))?;
    let mut buf = vec![0; size];
    let info = reader.next_frame(&mut buf).map_err(png_err)?;
    let g = sidecar.grid;
    if info.color_type != png::ColorType::Grayscale
        || info.bit_depth != png::BitDepth::Sixteen
        || info.width as usize != g.n_theta
        || info.height as usize != g.n_l
    {
        return Err(Error::Validation(format!(
            "PNG is {}x{} {:?}/{:?}, sidecar describes a {}x{} 16-bit grayscale grid",
            info.width, info.height, info.color_type, info.bit_depth, g.n_theta, g.n_l
        )));
    }
    let values = buf[..info.buffer_size()].chunks_exact(2).map(|c| sidecar.level_to_mm(u16::from_be_bytes([c[0], c[1]]))).collect();
    Heightmap::from_values(g, values)
}

/// CSV with a header `l` followed by one column per `theta` sample; one row per
/// `l` sample. Values keep full precision.
pub fn write_heightmap_csv(h: &Heightmap, path: impl AsRef<Path>) -> Result<()> {
    let g = h.grid;
    let mut s = String::with_capacity(h.values.len() * 20);
    s.push('l');
    for c in 0..g.n_theta {
        let _ = write!(s, ",{}", g.theta(c));
    }
    s.push('\n');
    for r in 0..g.n_l {
        let _ = write!(s, "{}", g.l(r));
        for v in h.row(r) {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    write_atomic(path, s.as_bytes())
}

pub fn read_heightmap_csv(path: impl AsRef<Path>) -> Result<Heightmap> {
    let bytes = read_bytes(path.as_ref())?;
    let mut rdr = csv::ReaderBuilder::new().from_reader(bytes.as_slice());
    let n_theta = rdr.headers().map_err(|e| Error::Parse { offset: 0, message: e.to_string() })?.len().saturating_sub(1);
    let mut ls = Vec::new();
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse { offset: e.position().map_or(0, |p| p.byte() as usize), message: e.to_string() })?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let mut nums = rec.iter().map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse { offset, message: format!("bad number '{s}'") }));
        ls.push(nums.next().transpose()?.unwrap_or(f64::NAN));
        let row = nums.collect::<Result<Vec<_>>>()?;
        if row.len() != n_theta {
            return Err(Error::Parse { offset, message: format!("row has {} values, header has {n_theta}", row.len()) });
        }
        values.extend(row);
    }
    if ls.len() < 2 {
        return Err(Error::EmptyInput("heightmap CSV rows"));
    }
    let grid = GridSpec::new(n_theta, ls.len(), ls[0], ls[ls.len() - 1])?;
    Heightmap::from_values(grid, values)
}
