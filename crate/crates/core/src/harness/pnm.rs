//! Binary netpbm images: P5 (grayscale) and P6 (RGB), 8 bits per sample.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::Result;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum PnmError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("unsupported format {0:?}, expected P5 or P6")]
    UnsupportedFormat(String),
    #[error("unsupported maxval {0}, only 255 is accepted")]
    UnsupportedMaxval(u32),
    #[error("pixel data truncated: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
}

/// Row-major 8-bit raster with 1 or 3 interleaved channels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Raster {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub data: Vec<u8>,
}

struct Header<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Header<'_> {
    fn skip_space(&mut self) {
        while self.pos < self.bytes.len() {
            match self.bytes[self.pos] {
                b'#' => {
                    while self.pos < self.bytes.len() && self.bytes[self.pos] != b'\n' {
                        self.pos += 1;
                    }
                }
                b if b.is_ascii_whitespace() => self.pos += 1,
                _ => break,
            }
        }
    }

    fn token(&mut self) -> Option<&[u8]> {
        self.skip_space();
        let start = self.pos;
        while self.pos < self.bytes.len() && !self.bytes[self.pos].is_ascii_whitespace() && self.bytes[self.pos] != b'#' {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.bytes[start..self.pos])
    }

    fn number(&mut self, what: &str) -> Result<u32, PnmError> {
        let tok = self.token().ok_or_else(|| PnmError::MalformedHeader(format!("missing {what}")))?;
        std::str::from_utf8(tok)
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| PnmError::MalformedHeader(format!("bad {what} {:?}", String::from_utf8_lossy(tok))))
    }
}

pub fn decode(bytes: &[u8]) -> Result<Raster, PnmError> {
    let mut h = Header { bytes, pos: 0 };
    let magic = h.token().ok_or_else(|| PnmError::MalformedHeader("empty file".into()))?;
    let channels = match magic {
        b"P5" => 1,
        b"P6" => 3,
        other => return Err(PnmError::UnsupportedFormat(String::from_utf8_lossy(other).into_owned())),
    };
    let width = h.number("width")? as usize;
    let height = h.number("height")? as usize;
    let maxval = h.number("maxval")?;
    if width == 0 || height == 0 {
        return Err(PnmError::MalformedHeader(format!("empty image {width}x{height}")));
    }
    if maxval != 255 {
        return Err(PnmError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(h.pos) {
        Some(b) if b.is_ascii_whitespace() => h.pos += 1,
        _ => return Err(PnmError::MalformedHeader("missing separator before pixel data".into())),
    }
    let expected = width * height * channels;
    let payload = &bytes[h.pos..];
    if payload.len() < expected {
        return Err(PnmError::Truncated { expected, found: payload.len() });
    }
    Ok(Raster { width, height, channels, data: payload[..expected].to_vec() })
}

pub fn encode<W: Write>(w: &mut W, raster: &Raster) -> Result<()> {
    let magic = match raster.channels {
        1 => "P5",
        3 => "P6",
        c => return Err(PnmError::UnsupportedFormat(format!("{c} channels")).into()),
    };
    write!(w, "{magic}\n{} {}\n255\n", raster.width, raster.height)?;
    w.write_all(&raster.data)?;
    Ok(())
}

pub fn read_file(path: impl AsRef<Path>) -> Result<Raster> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    Ok(decode(&bytes)?)
}

pub fn write_file(path: impl AsRef<Path>, raster: &Raster) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    encode(&mut w, raster)?;
    w.flush()?;
    Ok(())
}
