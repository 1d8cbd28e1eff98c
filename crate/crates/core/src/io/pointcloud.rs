use std::fmt::Write as _;
use std::path::Path;

use crate::logcentric::CartesianPoint;
use crate::{Error, Result};

use super::{extension, read_bytes, write_atomic};

/// Points read from a file together with the number of rows dropped because a
/// coordinate was not finite.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PointCloud {
    pub points: Vec<CartesianPoint>,
    pub rejected: usize,
}

impl PointCloud {
    fn push(&mut self, p: CartesianPoint) {
        if p.is_finite() {
            self.points.push(p);
        } else {
            self.rejected += 1;
        }
    }

    fn finish(self) -> Result<Self> {
        if self.points.is_empty() {
            return Err(Error::EmptyInput("point cloud"));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyFormat {
    Ascii,
    BinaryLittleEndian,
}

/// Reads a point cloud from `.ply`, `.csv` (header `x,y,z`) or whitespace
/// separated `.xyz`/`.txt`/`.pts`.
pub fn read_point_cloud(path: impl AsRef<Path>) -> Result<PointCloud> {
    let path = path.as_ref();
    let ext = extension(path);
    match ext.as_str() {
        "ply" => parse_ply(&read_bytes(path)?),
        "csv" => parse_csv(&read_bytes(path)?),
        "xyz" | "txt" | "pts" => parse_xyz(&read_bytes(path)?),
        _ => Err(Error::InvalidParameter(format!(
            "unknown point cloud extension '{ext}' on {} (expected ply, csv, xyz, txt or pts)",
            path.display()
        ))),
    }
}

/// Writes points as a PLY vertex list with `double` coordinates.
pub fn write_point_cloud(path: impl AsRef<Path>, points: &[CartesianPoint], format: PlyFormat) -> Result<()> {
    let mut out = ply_header(format, points.len(), None).into_bytes();
    append_vertices(&mut out, points, format);
    write_atomic(path, &out)
}

pub(crate) fn ply_header(format: PlyFormat, vertices: usize, faces: Option<usize>) -> String {
    let fmt = match format {
        PlyFormat::Ascii => "ascii",
        PlyFormat::BinaryLittleEndian => "binary_little_endian",
    };
    let mut h = format!(
        "ply\nformat {fmt} 1.0\ncomment units mm\nelement vertex {vertices}\nproperty double x\nproperty double y\nproperty double z\n"
    );
    if let Some(f) = faces {
        let _ = write!(h, "element face {f}\nproperty list uchar uint vertex_indices\n");
    }
    h.push_str("end_header\n");
    h
}

pub(crate) fn append_vertices(out: &mut Vec<u8>, points: &[CartesianPoint], format: PlyFormat) {
    match format {
        PlyFormat::Ascii => {
            let mut s = String::with_capacity(points.len() * 40);
            for p in points {
                let _ = writeln!(s, "{} {} {}", p.x, p.y, p.z);
            }
            out.extend_from_slice(s.as_bytes());
        }
        PlyFormat::BinaryLittleEndian => {
            for p in points {
                for v in [p.x, p.y, p.z] {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Scalar {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl Scalar {
    fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "char" | "int8" => Self::I8,
            "uchar" | "uint8" => Self::U8,
            "short" | "int16" => Self::I16,
            "ushort" | "uint16" => Self::U16,
            "int" | "int32" => Self::I32,
            "uint" | "uint32" => Self::U32,
            "float" | "float32" => Self::F32,
            "double" | "float64" => Self::F64,
            _ => return None,
        })
    }

    fn size(self) -> usize {
        match self {
            Self::I8 | Self::U8 => 1,
            Self::I16 | Self::U16 => 2,
            Self::I32 | Self::U32 | Self::F32 => 4,
            Self::F64 => 8,
        }
    }

    fn read_le(self, b: &[u8]) -> f64 {
        match self {
            Self::I8 => b[0] as i8 as f64,
            Self::U8 => b[0] as f64,
            Self::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            Self::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            Self::I32 => i32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::U32 => u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F32 => f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64,
            Self::F64 => f64::from_le_bytes(b[..8].try_into().expect("8 bytes")),
        }
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar(String, Scalar),
    List(Scalar, Scalar),
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

fn parse_err(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse { offset, message: message.into() }
}

struct Header {
    format: PlyFormat,
    elements: Vec<Element>,
    body: usize,
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut offset = 0;
    let mut format = None;
    let mut elements: Vec<Element> = Vec::new();
    let mut first = true;
    loop {
        let rest = &bytes[offset..];
        let nl = rest.iter().position(|&b| b == b'\n').ok_or_else(|| parse_err(offset, "PLY header has no end_header line"))?;
        let line = std::str::from_utf8(&rest[..nl]).map_err(|_| parse_err(offset, "PLY header is not ASCII"))?;
        let line = line.trim_end_matches('\r');
        let start = offset;
        offset += nl + 1;
        let words: Vec<&str> = line.split_whitespace().collect();
        if first {
            if line != "ply" {
                return Err(parse_err(0, "missing 'ply' magic"));
            }
            first = false;
            continue;
        }
        match words.as_slice() {
            ["end_header"] => break,
            ["comment", ..] | ["obj_info", ..] | [] => {}
            ["format", f, "1.0"] => {
                format = Some(match *f {
                    "ascii" => PlyFormat::Ascii,
                    "binary_little_endian" => PlyFormat::BinaryLittleEndian,
                    other => return Err(parse_err(start, format!("unsupported PLY format '{other}'"))),
                })
            }
            ["element", name, count] => {
                let count = count.parse().map_err(|_| parse_err(start, format!("bad element count '{count}'")))?;
                elements.push(Element { name: name.to_string(), count, props: Vec::new() });
            }
            ["property", "list", c, v, _name] => {
                let (c, v) = (Scalar::parse(c), Scalar::parse(v));
                let el = elements.last_mut().ok_or_else(|| parse_err(start, "property before any element"))?;
                match (c, v) {
                    (Some(c), Some(v)) => el.props.push(Property::List(c, v)),
                    _ => return Err(parse_err(start, format!("bad list property '{line}'"))),
                }
            }
            ["property", ty, name] => {
                let ty = Scalar::parse(ty).ok_or_else(|| parse_err(start, format!("unknown property type '{ty}'")))?;
                let el = elements.last_mut().ok_or_else(|| parse_err(start, "property before any element"))?;
                el.props.push(Property::Scalar(name.to_string(), ty));
            }
            _ => return Err(parse_err(start, format!("malformed header line '{line}'"))),
        }
    }
    let format = format.ok_or_else(|| parse_err(0, "PLY header has no format line"))?;
    Ok(Header { format, elements, body: offset })
}

fn xyz_indices(el: &Element, offset: usize) -> Result<[usize; 3]> {
    let find = |axis: &str| {
        el.props
            .iter()
            .position(|p| matches!(p, Property::Scalar(n, _) if n == axis))
            .ok_or_else(|| parse_err(offset, format!("vertex element has no '{axis}' property")))
    };
    Ok([find("x")?, find("y")?, find("z")?])
}

fn parse_ply(bytes: &[u8]) -> Result<PointCloud> {
    let header = parse_header(bytes)?;
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| parse_err(0, "PLY has no vertex element"))?;
    let idx = xyz_indices(&header.elements[vi], 0)?;
    let mut cloud = PointCloud::default();
    let mut pos = header.body;
    match header.format {
        PlyFormat::Ascii => {
            let text = std::str::from_utf8(&bytes[pos..]).map_err(|e| parse_err(pos + e.valid_up_to(), "PLY body is not text"))?;
            let mut lines = text.split_inclusive('\n');
            for (ei, el) in header.elements.iter().enumerate().take(vi + 1) {
                for _ in 0..el.count {
                    let line = lines.next().ok_or_else(|| parse_err(pos, format!("file ends inside element '{}'", el.name)))?;
                    if ei == vi {
                        let words: Vec<&str> = line.split_whitespace().collect();
                        if words.len() < el.props.len() {
                            return Err(parse_err(pos, format!("vertex row has {} values, expected {}", words.len(), el.props.len())));
                        }
                        let mut v = [0.0; 3];
                        for (k, &i) in idx.iter().enumerate() {
                            v[k] = parse_float(words[i]).ok_or_else(|| parse_err(pos, format!("bad number '{}'", words[i])))?;
                        }
                        cloud.push(CartesianPoint::new(v[0], v[1], v[2]));
                    }
                    pos += line.len();
                }
            }
        }
        PlyFormat::BinaryLittleEndian => {
            for (ei, el) in header.elements.iter().enumerate().take(vi + 1) {
                for _ in 0..el.count {
                    let mut v = [0.0; 3];
                    for (pi, prop) in el.props.iter().enumerate() {
                        match prop {
                            Property::Scalar(_, ty) => {
                                let end = pos + ty.size();
                                let b = bytes.get(pos..end).ok_or_else(|| parse_err(pos, format!("file ends inside element '{}'", el.name)))?;
                                if ei == vi {
                                    if let Some(k) = idx.iter().position(|&i| i == pi) {
                                        v[k] = ty.read_le(b);
                                    }
                                }
                                pos = end;
                            }
                            Property::List(c, ty) => {
                                let b = bytes.get(pos..pos + c.size()).ok_or_else(|| parse_err(pos, "file ends inside a list"))?;
                                let n = c.read_le(b) as usize;
                                pos += c.size() + n * ty.size();
                            }
                        }
                    }
                    if ei == vi {
                        cloud.push(CartesianPoint::new(v[0], v[1], v[2]));
                    }
                }
            }
        }
    }
    cloud.finish()
}

fn parse_float(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "nan" | "-nan" => Some(f64::NAN),
        _ => s.parse().ok(),
    }
}

fn parse_csv(bytes: &[u8]) -> Result<PointCloud> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let headers = rdr.headers().map_err(|e| parse_err(0, format!("CSV header: {e}")))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| parse_err(0, format!("CSV header has no '{name}' column")))
    };
    let idx = [col("x")?, col("y")?, col("z")?];
    let mut cloud = PointCloud::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| parse_err(e.position().map_or(0, |p| p.byte() as usize), e.to_string()))?;
        let offset = rec.position().map_or(0, |p| p.byte() as usize);
        let mut v = [0.0; 3];
        for (k, &i) in idx.iter().enumerate() {
            let s = rec.get(i).unwrap_or("");
            v[k] = if s.is_empty() { f64::NAN } else { parse_float(s).ok_or_else(|| parse_err(offset, format!("bad number '{s}'")))? };
        }
        cloud.push(CartesianPoint::new(v[0], v[1], v[2]));
    }
    cloud.finish()
}

fn parse_xyz(bytes: &[u8]) -> Result<PointCloud> {
    let text = std::str::from_utf8(bytes).map_err(|e| parse_err(e.valid_up_to(), "XYZ file is not text"))?;
    let mut cloud = PointCloud::default();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let body = line.split('#').next().unwrap_or("");
        let words: Vec<&str> = body.split_whitespace().collect();
        if !words.is_empty() {
            if words.len() < 3 {
                return Err(parse_err(offset, format!("expected 3 coordinates, found {}", words.len())));
            }
            let mut v = [0.0; 3];
            for k in 0..3 {
                v[k] = parse_float(words[k]).ok_or_else(|| parse_err(offset, format!("bad number '{}'", words[k])))?;
            }
            cloud.push(CartesianPoint::new(v[0], v[1], v[2]));
        }
        offset += line.len();
    }
    cloud.finish()
}
