//! File formats: Middlebury `.flo` flow files and binary PGM (`P5`) masks.
//!
//! `.flo` layout, all little-endian: `f32` magic `202021.25` (bytes `PIEH`), `i32` width,
//! `i32` height, then `width * height` interleaved `(u, v)` `f32` pairs, row-major.
//! The frame interval is not part of the file and is supplied by the caller.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::field::{FieldError, FlowField, ForegroundMask};

pub const FLO_MAGIC: f32 = 202021.25;
/// Largest width or height accepted from a flow file.
pub const MAX_FLO_DIMENSION: i32 = 1 << 15;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("bad magic number {0} (expected 202021.25)")]
    BadMagic(f32),
    #[error("file is truncated")]
    TruncatedFile,
    #[error("non-finite flow value at pixel ({x}, {y})")]
    NonFinite { x: usize, y: usize },
    #[error("dimensions {width}x{height} out of range")]
    DimensionOverflow { width: i32, height: i32 },
    #[error("bad PGM header: {0}")]
    BadHeader(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn read_exact_or_truncated<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<(), FormatError> {
    reader.read_exact(buf).map_err(|e| match e.kind() {
        io::ErrorKind::UnexpectedEof => FormatError::TruncatedFile,
        _ => FormatError::Io(e),
    })
}

pub fn read_flow<R: Read>(mut reader: R, interval_k: u32) -> Result<FlowField, FormatError> {
    let mut header = [0u8; 12];
    read_exact_or_truncated(&mut reader, &mut header)?;
    let magic = f32::from_le_bytes(header[0..4].try_into().unwrap());
    if magic.to_bits() != FLO_MAGIC.to_bits() {
        return Err(FormatError::BadMagic(magic));
    }
    let width = i32::from_le_bytes(header[4..8].try_into().unwrap());
    let height = i32::from_le_bytes(header[8..12].try_into().unwrap());
    if width <= 0 || height <= 0 || width > MAX_FLO_DIMENSION || height > MAX_FLO_DIMENSION {
        return Err(FormatError::DimensionOverflow { width, height });
    }
    let (width, height) = (width as usize, height as usize);

    let mut payload = vec![0u8; width * height * 8];
    read_exact_or_truncated(&mut reader, &mut payload)?;
    let mut vectors = Vec::with_capacity(width * height);
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        let u = f32::from_le_bytes(chunk[0..4].try_into().unwrap());
        let v = f32::from_le_bytes(chunk[4..8].try_into().unwrap());
        if !(u.is_finite() && v.is_finite()) {
            return Err(FormatError::NonFinite {
                x: i % width,
                y: i / width,
            });
        }
        vectors.push([u, v]);
    }
    Ok(FlowField::new(width, height, interval_k, vectors)?)
}

pub fn write_flow<W: Write>(mut writer: W, field: &FlowField) -> io::Result<()> {
    let mut buf = Vec::with_capacity(12 + field.vectors().len() * 8);
    buf.extend_from_slice(&FLO_MAGIC.to_le_bytes());
    buf.extend_from_slice(&(field.width() as i32).to_le_bytes());
    buf.extend_from_slice(&(field.height() as i32).to_le_bytes());
    for v in field.vectors() {
        buf.extend_from_slice(&v[0].to_le_bytes());
        buf.extend_from_slice(&v[1].to_le_bytes());
    }
    writer.write_all(&buf)
}

pub fn encode_flow(field: &FlowField) -> Vec<u8> {
    let mut buf = Vec::new();
    write_flow(&mut buf, field).expect("writing to a Vec cannot fail");
    buf
}

pub fn load_flow(path: &Path, interval_k: u32) -> Result<FlowField, FormatError> {
    read_flow(BufReader::new(File::open(path)?), interval_k)
}

pub fn save_flow(path: &Path, field: &FlowField) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_flow(&mut w, field)?;
    w.flush()
}

/// Reads a binary PGM. Values `>= 128` are foreground.
pub fn read_mask<R: Read>(mut reader: R) -> Result<ForegroundMask, FormatError> {
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    let mut pos = 0;
    let magic = next_token(&bytes, &mut pos)?;
    if magic != b"P5" {
        return Err(FormatError::BadHeader(format!(
            "magic {:?}, expected \"P5\"",
            String::from_utf8_lossy(magic)
        )));
    }
    let width = parse_header_number(&bytes, &mut pos, "width")?;
    let height = parse_header_number(&bytes, &mut pos, "height")?;
    let maxval = parse_header_number(&bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(FormatError::BadHeader(format!(
            "dimensions {width}x{height}"
        )));
    }
    if maxval != 255 {
        return Err(FormatError::BadHeader(format!("maxval {maxval}, expected 255")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        Some(_) => return Err(FormatError::BadHeader("missing raster separator".into())),
        None => return Err(FormatError::TruncatedFile),
    }
    let n = width
        .checked_mul(height)
        .ok_or_else(|| FormatError::BadHeader("dimensions overflow".into()))?;
    let raster = bytes
        .get(pos..pos + n)
        .ok_or(FormatError::TruncatedFile)?;
    let labels = raster.iter().map(|&b| b >= 128).collect();
    Ok(ForegroundMask::new(width, height, labels)?)
}

fn next_token<'a>(bytes: &'a [u8], pos: &mut usize) -> Result<&'a [u8], FormatError> {
    loop {
        match bytes.get(*pos) {
            None => return Err(FormatError::TruncatedFile),
            Some(b'#') => {
                while let Some(&b) = bytes.get(*pos) {
                    *pos += 1;
                    if b == b'\n' {
                        break;
                    }
                }
            }
            Some(b) if b.is_ascii_whitespace() => *pos += 1,
            Some(_) => break,
        }
    }
    let start = *pos;
    while bytes.get(*pos).is_some_and(|b| !b.is_ascii_whitespace()) {
        *pos += 1;
    }
    Ok(&bytes[start..*pos])
}

fn parse_header_number(bytes: &[u8], pos: &mut usize, what: &str) -> Result<usize, FormatError> {
    let token = next_token(bytes, pos)?;
    std::str::from_utf8(token)
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| {
            FormatError::BadHeader(format!(
                "invalid {what} {:?}",
                String::from_utf8_lossy(token)
            ))
        })
}

/// Writes the canonical form: values 0 and 255 only.
pub fn write_mask<W: Write>(mut writer: W, mask: &ForegroundMask) -> io::Result<()> {
    let mut buf = format!("P5\n{} {}\n255\n", mask.width(), mask.height()).into_bytes();
    buf.extend(mask.labels().iter().map(|&l| if l { 255u8 } else { 0 }));
    writer.write_all(&buf)
}

pub fn encode_mask(mask: &ForegroundMask) -> Vec<u8> {
    let mut buf = Vec::new();
    write_mask(&mut buf, mask).expect("writing to a Vec cannot fail");
    buf
}

pub fn load_mask(path: &Path) -> Result<ForegroundMask, FormatError> {
    read_mask(BufReader::new(File::open(path)?))
}

pub fn save_mask(path: &Path, mask: &ForegroundMask) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_mask(&mut w, mask)?;
    w.flush()
}
