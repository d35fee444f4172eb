//! PLY reader/writer for Gaussian-splatting point data.
//!
//! Only the `x`, `y`, `z` vertex properties are consumed; every other
//! property (normals, SH coefficients, opacity, scale, rotation) and every
//! other element is parsed past and ignored. ASCII and binary little-endian
//! bodies are supported.

use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::geom::Point3;
use crate::scalar::Scalar;
use crate::spatial_index::GaussianCloud;

use super::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlyEncoding {
    Ascii,
    BinaryLittleEndian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ScalarKind {
    I8,
    U8,
    I16,
    U16,
    I32,
    U32,
    F32,
    F64,
}

impl ScalarKind {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
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

    fn is_float(self) -> bool {
        matches!(self, Self::F32 | Self::F64)
    }
}

#[derive(Debug, Clone)]
enum Property {
    Scalar { name: String, kind: ScalarKind },
    List { count: ScalarKind, item: ScalarKind },
}

#[derive(Debug, Clone)]
struct Element {
    name: String,
    count: usize,
    props: Vec<Property>,
}

#[derive(Debug)]
struct Header {
    encoding: PlyEncoding,
    elements: Vec<Element>,
    body_offset: usize,
}

fn err(offset: usize, reason: impl Into<String>) -> Error {
    Error::Ply { offset: offset as u64, reason: reason.into() }
}

fn parse_header(bytes: &[u8]) -> Result<Header> {
    let mut pos = 0usize;
    let next_line = |pos: &mut usize| -> Result<(usize, String)> {
        let start = *pos;
        let rel = bytes[start..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| err(start, "unterminated header"))?;
        *pos = start + rel + 1;
        let raw = &bytes[start..start + rel];
        let line = std::str::from_utf8(raw).map_err(|_| err(start, "header is not valid UTF-8"))?;
        Ok((start, line.trim_end_matches('\r').to_string()))
    };

    let (off, magic) = next_line(&mut pos)?;
    if magic.trim() != "ply" {
        return Err(err(off, "missing `ply` magic line"));
    }
    let mut encoding = None;
    let mut elements: Vec<Element> = Vec::new();
    loop {
        let (off, line) = next_line(&mut pos)?;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None => continue,
            Some("comment") | Some("obj_info") => continue,
            Some("format") => {
                let fmt = toks.next().ok_or_else(|| err(off, "format line without encoding"))?;
                encoding = Some(match fmt {
                    "ascii" => PlyEncoding::Ascii,
                    "binary_little_endian" => PlyEncoding::BinaryLittleEndian,
                    "binary_big_endian" => {
                        return Err(err(off, "unsupported encoding binary_big_endian"));
                    }
                    other => return Err(err(off, format!("unknown encoding `{other}`"))),
                });
            }
            Some("element") => {
                let name = toks.next().ok_or_else(|| err(off, "element without name"))?;
                let count = toks
                    .next()
                    .and_then(|c| c.parse::<usize>().ok())
                    .ok_or_else(|| err(off, "element count is not a non-negative integer"))?;
                elements.push(Element { name: name.to_string(), count, props: Vec::new() });
            }
            Some("property") => {
                let el = elements.last_mut().ok_or_else(|| err(off, "property before any element"))?;
                let t = toks.next().ok_or_else(|| err(off, "property without type"))?;
                if t == "list" {
                    let count = toks.next().and_then(ScalarKind::parse);
                    let item = toks.next().and_then(ScalarKind::parse);
                    let (Some(count), Some(item)) = (count, item) else {
                        return Err(err(off, "malformed list property"));
                    };
                    if count.is_float() {
                        return Err(err(off, "list count type must be integral"));
                    }
                    toks.next().ok_or_else(|| err(off, "list property without name"))?;
                    el.props.push(Property::List { count, item });
                } else {
                    let kind = ScalarKind::parse(t).ok_or_else(|| err(off, format!("unknown property type `{t}`")))?;
                    let name = toks.next().ok_or_else(|| err(off, "property without name"))?;
                    el.props.push(Property::Scalar { name: name.to_string(), kind });
                }
            }
            Some("end_header") => break,
            Some(other) => return Err(err(off, format!("unexpected header keyword `{other}`"))),
        }
    }
    let encoding = encoding.ok_or_else(|| err(0, "header has no format line"))?;
    Ok(Header { encoding, elements, body_offset: pos })
}

/// Positions of `x`, `y`, `z` among the vertex element's properties.
fn xyz_slots(el: &Element, header_end: usize) -> Result<[usize; 3]> {
    let mut slots = [usize::MAX; 3];
    for (i, p) in el.props.iter().enumerate() {
        if let Property::Scalar { name, kind } = p {
            let axis = match name.as_str() {
                "x" => 0,
                "y" => 1,
                "z" => 2,
                _ => continue,
            };
            if !kind.is_float() {
                return Err(err(header_end, format!("vertex property `{name}` must be float or double")));
            }
            slots[axis] = i;
        }
    }
    if slots.contains(&usize::MAX) {
        return Err(err(header_end, "vertex element lacks x, y or z property"));
    }
    Ok(slots)
}

struct Binary<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Binary<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| err(self.pos, "unexpected end of binary body"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn read(&mut self, kind: ScalarKind) -> Result<f64> {
        let b = self.take(kind.size())?;
        Ok(match kind {
            ScalarKind::I8 => b[0] as i8 as f64,
            ScalarKind::U8 => b[0] as f64,
            ScalarKind::I16 => i16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarKind::U16 => u16::from_le_bytes([b[0], b[1]]) as f64,
            ScalarKind::I32 => i32::from_le_bytes(b.try_into().unwrap()) as f64,
            ScalarKind::U32 => u32::from_le_bytes(b.try_into().unwrap()) as f64,
            ScalarKind::F32 => f32::from_le_bytes(b.try_into().unwrap()) as f64,
            ScalarKind::F64 => f64::from_le_bytes(b.try_into().unwrap()),
        })
    }

    fn list_len(&mut self, kind: ScalarKind) -> Result<usize> {
        let at = self.pos;
        let v = self.read(kind)?;
        if v < 0.0 {
            return Err(err(at, "negative list length"));
        }
        Ok(v as usize)
    }
}

struct Ascii<'a> {
    text: &'a [u8],
    pos: usize,
}

impl Ascii<'_> {
    fn token(&mut self) -> Result<(usize, &str)> {
        while self.pos < self.text.len() && self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        while self.pos < self.text.len() && !self.text[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(err(start, "unexpected end of ASCII body"));
        }
        let s = std::str::from_utf8(&self.text[start..self.pos]).map_err(|_| err(start, "non-UTF-8 token"))?;
        Ok((start, s))
    }

    fn number(&mut self) -> Result<f64> {
        let (at, t) = self.token()?;
        t.parse::<f64>().map_err(|_| err(at, format!("malformed number `{t}`")))
    }

    fn list_len(&mut self) -> Result<usize> {
        let (at, t) = self.token()?;
        t.parse::<usize>().map_err(|_| err(at, format!("malformed list length `{t}`")))
    }
}

/// Parse outcome with the count of rejected non-finite vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct PlyCloud<T> {
    pub cloud: GaussianCloud<T>,
    pub declared: usize,
    pub skipped_nonfinite: usize,
}

/// Parses a PLY byte buffer.
pub fn parse_ply<T: Scalar>(bytes: &[u8]) -> Result<PlyCloud<T>> {
    let header = parse_header(bytes)?;
    let vi = header
        .elements
        .iter()
        .position(|e| e.name == "vertex")
        .ok_or_else(|| err(header.body_offset, "no vertex element"))?;
    let slots = xyz_slots(&header.elements[vi], header.body_offset)?;
    let declared = header.elements[vi].count;
    // Every vertex needs at least one byte; never trust the header for capacity.
    let mut points = Vec::with_capacity(declared.min(bytes.len()));
    let mut skipped = 0usize;
    let mut keep = |xyz: [f64; 3], points: &mut Vec<Point3<T>>| {
        let p = Point3::new(T::lit(xyz[0]), T::lit(xyz[1]), T::lit(xyz[2]));
        if p.is_finite() {
            points.push(p);
        } else {
            skipped += 1;
        }
    };

    match header.encoding {
        PlyEncoding::BinaryLittleEndian => {
            let mut r = Binary { bytes, pos: header.body_offset };
            for (ei, el) in header.elements.iter().enumerate().filter(|(_, e)| !e.props.is_empty()) {
                for _ in 0..el.count {
                    let mut xyz = [0.0; 3];
                    for (pi, prop) in el.props.iter().enumerate() {
                        match prop {
                            Property::Scalar { kind, .. } => {
                                let v = r.read(*kind)?;
                                if ei == vi {
                                    if let Some(axis) = slots.iter().position(|&s| s == pi) {
                                        xyz[axis] = v;
                                    }
                                }
                            }
                            Property::List { count, item } => {
                                let n = r.list_len(*count)?;
                                let total = n.checked_mul(item.size()).ok_or_else(|| err(r.pos, "list too long"))?;
                                r.take(total)?;
                            }
                        }
                    }
                    if ei == vi {
                        keep(xyz, &mut points);
                    }
                }
            }
        }
        PlyEncoding::Ascii => {
            let mut r = Ascii { text: bytes, pos: header.body_offset };
            for (ei, el) in header.elements.iter().enumerate().filter(|(_, e)| !e.props.is_empty()) {
                for _ in 0..el.count {
                    let mut xyz = [0.0; 3];
                    for (pi, prop) in el.props.iter().enumerate() {
                        match prop {
                            Property::Scalar { .. } => {
                                let v = r.number()?;
                                if ei == vi {
                                    if let Some(axis) = slots.iter().position(|&s| s == pi) {
                                        xyz[axis] = v;
                                    }
                                }
                            }
                            Property::List { .. } => {
                                let n = r.list_len()?;
                                for _ in 0..n {
                                    r.number()?;
                                }
                            }
                        }
                    }
                    if ei == vi {
                        keep(xyz, &mut points);
                    }
                }
            }
        }
    }
    if skipped > 0 {
        warn!("skipped {skipped} non-finite PLY vertices");
    }
    Ok(PlyCloud { cloud: GaussianCloud::new(points), declared, skipped_nonfinite: skipped })
}

pub fn load_ply<T: Scalar>(path: impl AsRef<Path>) -> Result<PlyCloud<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_ply(&bytes)
}

/// Serializes points as `double x, y, z` vertices.
pub fn encode_ply<T: Scalar>(points: &[Point3<T>], encoding: PlyEncoding) -> Vec<u8> {
    let fmt = match encoding {
        PlyEncoding::Ascii => "ascii",
        PlyEncoding::BinaryLittleEndian => "binary_little_endian",
    };
    let mut out = format!(
        "ply\nformat {fmt} 1.0\ncomment gsline point cloud\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\nend_header\n",
        points.len()
    )
    .into_bytes();
    for p in points {
        let xyz = [p.x.to_f64_lossy(), p.y.to_f64_lossy(), p.z.to_f64_lossy()];
        match encoding {
            PlyEncoding::Ascii => out.extend(format!("{} {} {}\n", xyz[0], xyz[1], xyz[2]).into_bytes()),
            PlyEncoding::BinaryLittleEndian => xyz.iter().for_each(|v| out.extend(v.to_le_bytes())),
        }
    }
    out
}

pub fn save_ply<T: Scalar>(path: impl AsRef<Path>, points: &[Point3<T>], encoding: PlyEncoding) -> Result<()> {
    write_atomic(path.as_ref(), &encode_ply(points, encoding))
}
