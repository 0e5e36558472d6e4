//! Little-endian binary formats for signals, observations and CDP codes.
//!
//! | file  | layout |
//! |-------|--------|
//! | CVEC1 | `"CVEC1"`, u32 version = 1, u64 n, n × (f64 re, f64 im) |
//! | YOBS1 | `"YOBS1"`, u32 version = 1, u64 m, m × f64 |
//! | CDPE1 | `"CDPE1"`, u32 version = 1, u64 n, u64 L, L × n × (f64 re, f64 im) |

use std::fs::File;
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::measurements::{CdpEnsemble, MeasurementOperator, Observations};
use crate::vector::ComplexVector;

pub const CVEC_MAGIC: &[u8; 5] = b"CVEC1";
pub const YOBS_MAGIC: &[u8; 5] = b"YOBS1";
pub const CDPE_MAGIC: &[u8; 5] = b"CDPE1";
pub const FORMAT_VERSION: u32 = 1;

/// Refuse headers announcing more than this many values before allocating.
const MAX_ENTRIES: u64 = 1 << 32;

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("file truncated")]
    Truncated,
    #[error("declared length {0} is invalid")]
    InvalidLength(u64),
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf).map_err(|e| match e.kind() {
        ErrorKind::UnexpectedEof => Error::Format(FormatError::Truncated),
        _ => Error::Io(e),
    })
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    read_exact(r, &mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(f64::from_le_bytes(b))
}

fn read_header<R: Read>(r: &mut R, magic: &[u8; 5]) -> Result<()> {
    let mut found = [0u8; 5];
    read_exact(r, &mut found)?;
    if &found != magic {
        return Err(FormatError::BadMagic {
            expected: String::from_utf8_lossy(magic).into_owned(),
            found: String::from_utf8_lossy(&found).into_owned(),
        }
        .into());
    }
    let version = read_u32(r)?;
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version).into());
    }
    Ok(())
}

fn read_len<R: Read>(r: &mut R) -> Result<usize> {
    let len = read_u64(r)?;
    if len == 0 || len > MAX_ENTRIES {
        return Err(FormatError::InvalidLength(len).into());
    }
    Ok(len as usize)
}

fn write_header<W: Write>(w: &mut W, magic: &[u8; 5]) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    Ok(())
}

fn write_body<W: Write>(w: &mut W, v: &[Complex64]) -> Result<()> {
    for c in v {
        w.write_all(&c.re.to_le_bytes())?;
        w.write_all(&c.im.to_le_bytes())?;
    }
    Ok(())
}

fn read_body<R: Read>(r: &mut R, n: usize) -> Result<ComplexVector> {
    let mut entries = Vec::with_capacity(n);
    for _ in 0..n {
        let re = read_f64(r)?;
        let im = read_f64(r)?;
        entries.push(Complex64::new(re, im));
    }
    ComplexVector::new(entries)
}

pub fn write_cvec<W: Write>(w: &mut W, v: &ComplexVector) -> Result<()> {
    write_header(w, CVEC_MAGIC)?;
    w.write_all(&(v.len() as u64).to_le_bytes())?;
    write_body(w, v.as_slice())
}

pub fn read_cvec<R: Read>(r: &mut R) -> Result<ComplexVector> {
    read_header(r, CVEC_MAGIC)?;
    let n = read_len(r)?;
    read_body(r, n)
}

pub fn write_yobs<W: Write>(w: &mut W, y: &Observations) -> Result<()> {
    write_header(w, YOBS_MAGIC)?;
    w.write_all(&(y.len() as u64).to_le_bytes())?;
    for v in y.as_slice() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_yobs<R: Read>(r: &mut R) -> Result<Observations> {
    read_header(r, YOBS_MAGIC)?;
    let m = read_len(r)?;
    let values = (0..m).map(|_| read_f64(r)).collect::<Result<Vec<_>>>()?;
    Observations::new(values)
}

pub fn write_cdpe<W: Write>(w: &mut W, ens: &CdpEnsemble) -> Result<()> {
    write_header(w, CDPE_MAGIC)?;
    w.write_all(&(ens.dim() as u64).to_le_bytes())?;
    w.write_all(&(ens.num_patterns() as u64).to_le_bytes())?;
    for code in ens.codes() {
        write_body(w, code.as_slice())?;
    }
    Ok(())
}

pub fn read_cdpe<R: Read>(r: &mut R) -> Result<CdpEnsemble> {
    read_header(r, CDPE_MAGIC)?;
    let n = read_len(r)?;
    let patterns = read_len(r)?;
    if (n as u64).saturating_mul(patterns as u64) > MAX_ENTRIES {
        return Err(FormatError::InvalidLength(patterns as u64).into());
    }
    let codes = (0..patterns).map(|_| read_body(r, n)).collect::<Result<Vec<_>>>()?;
    CdpEnsemble::from_codes(codes)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path)?))
}

pub fn save_cvec(path: impl AsRef<Path>, v: &ComplexVector) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_cvec(&mut w, v)?;
    w.flush()?;
    Ok(())
}

pub fn load_cvec(path: impl AsRef<Path>) -> Result<ComplexVector> {
    read_cvec(&mut open(path.as_ref())?)
}

pub fn save_yobs(path: impl AsRef<Path>, y: &Observations) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_yobs(&mut w, y)?;
    w.flush()?;
    Ok(())
}

pub fn load_yobs(path: impl AsRef<Path>) -> Result<Observations> {
    read_yobs(&mut open(path.as_ref())?)
}

pub fn save_cdpe(path: impl AsRef<Path>, ens: &CdpEnsemble) -> Result<()> {
    let mut w = create(path.as_ref())?;
    write_cdpe(&mut w, ens)?;
    w.flush()?;
    Ok(())
}

pub fn load_cdpe(path: impl AsRef<Path>) -> Result<CdpEnsemble> {
    read_cdpe(&mut open(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurements::PatternDistribution;
    use crate::rng::RandomSource;
    use proptest::prelude::*;

    #[test]
    fn cvec_layout_is_bit_exact() {
        let v = ComplexVector::new(vec![Complex64::new(1.5, -2.0)]).unwrap();
        let mut buf = Vec::new();
        write_cvec(&mut buf, &v).unwrap();
        let mut expected = b"CVEC1".to_vec();
        expected.extend(1u32.to_le_bytes());
        expected.extend(1u64.to_le_bytes());
        expected.extend(1.5f64.to_le_bytes());
        expected.extend((-2.0f64).to_le_bytes());
        assert_eq!(buf, expected);
    }

    #[test]
    fn yobs_layout_is_bit_exact() {
        let y = Observations::new(vec![0.25, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_yobs(&mut buf, &y).unwrap();
        assert_eq!(&buf[..5], b"YOBS1");
        assert_eq!(&buf[5..9], &1u32.to_le_bytes());
        assert_eq!(&buf[9..17], &2u64.to_le_bytes());
        assert_eq!(&buf[17..25], &0.25f64.to_le_bytes());
        assert_eq!(buf.len(), 33);
        assert_eq!(read_yobs(&mut buf.as_slice()).unwrap(), y);
    }

    #[test]
    fn cdpe_round_trip_and_layout() {
        let ens = CdpEnsemble::sample(5, 3, &PatternDistribution::octanary(), &mut RandomSource::new(1, 1)).unwrap();
        let mut buf = Vec::new();
        write_cdpe(&mut buf, &ens).unwrap();
        assert_eq!(buf.len(), 5 + 4 + 8 + 8 + 3 * 5 * 16);
        assert_eq!(&buf[9..17], &5u64.to_le_bytes());
        assert_eq!(&buf[17..25], &3u64.to_le_bytes());
        let back = read_cdpe(&mut buf.as_slice()).unwrap();
        assert_eq!(back, ens);
    }

    #[test]
    fn header_errors() {
        let v = ComplexVector::new(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        let mut buf = Vec::new();
        write_cvec(&mut buf, &v).unwrap();

        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_cvec(&mut bad.as_slice()), Err(Error::Format(FormatError::BadMagic { .. }))));

        let mut bad = buf.clone();
        bad[5] = 2;
        assert!(matches!(
            read_cvec(&mut bad.as_slice()),
            Err(Error::Format(FormatError::UnsupportedVersion(2)))
        ));

        let short = &buf[..buf.len() - 3];
        assert!(matches!(read_cvec(&mut &short[..]), Err(Error::Format(FormatError::Truncated))));

        let mut zero = buf[..9].to_vec();
        zero.extend(0u64.to_le_bytes());
        assert!(matches!(read_cvec(&mut zero.as_slice()), Err(Error::Format(FormatError::InvalidLength(0)))));

        assert!(matches!(read_yobs(&mut buf.as_slice()), Err(Error::Format(FormatError::BadMagic { .. }))));
    }

    #[test]
    fn negative_observation_rejected() {
        let mut buf = b"YOBS1".to_vec();
        buf.extend(1u32.to_le_bytes());
        buf.extend(1u64.to_le_bytes());
        buf.extend((-1.0f64).to_le_bytes());
        assert!(read_yobs(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn files_on_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.cvec");
        let v = ComplexVector::new(vec![Complex64::new(0.1, 0.2), Complex64::new(-3.0, 4.0)]).unwrap();
        save_cvec(&path, &v).unwrap();
        assert_eq!(load_cvec(&path).unwrap(), v);
        assert!(matches!(load_cvec(dir.path().join("missing")), Err(Error::Io(_))));
    }

    proptest! {
        #[test]
        fn cvec_round_trip(entries in prop::collection::vec((-1e6f64..1e6, -1e6f64..1e6), 1..64)) {
            let v = ComplexVector::new(entries.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap();
            let mut buf = Vec::new();
            write_cvec(&mut buf, &v).unwrap();
            prop_assert_eq!(read_cvec(&mut buf.as_slice()).unwrap(), v);
        }
    }
}
