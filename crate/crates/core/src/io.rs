//! Little-endian binary formats for complex arrays (`S2CX`) and sampling
//! masks (`S2MK`).
//!
//! `S2CX`: magic, version `u32 = 1`, dimension count `u8`, dimensions
//! `u64` each, then row-major interleaved `(re, im)` `f64` pairs.
//!
//! `S2MK`: magic, version `u32 = 1`, mode `u8` (0 full grid, 1 phase-encode
//! plane), dimension count `u8`, dimensions `u64`, index count `u64`,
//! indices `u64`, then `p: f64`, `β: f64`, `seed: u64`, `M: u64`, `M′: u64`.

use std::fs;
use std::path::Path;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::image::ComplexImage;
use crate::sampling::{MaskMetadata, MaskMode, SamplingMask};

pub const ARRAY_MAGIC: &[u8; 4] = b"S2CX";
pub const MASK_MAGIC: &[u8; 4] = b"S2MK";
pub const VERSION: u32 = 1;

pub fn encode_complex_array(image: &ComplexImage<f64>) -> Result<Vec<u8>> {
    let mut out = header(ARRAY_MAGIC, None, image.dims())?;
    out.reserve(16 * image.len());
    for z in image.data() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_complex_array(bytes: &[u8]) -> Result<ComplexImage<f64>> {
    let mut r = Reader::new(bytes);
    r.magic(ARRAY_MAGIC)?;
    let dims = r.dims()?;
    let len = element_count(&dims, &r)?;
    r.require(
        len.checked_mul(16)
            .ok_or_else(|| r.error("array too large"))?,
    )?;
    let data = (0..len)
        .map(|_| Ok(Complex::new(r.f64()?, r.f64()?)))
        .collect::<Result<Vec<_>>>()?;
    r.finish()?;
    ComplexImage::new(dims, data)
}

pub fn encode_mask(mask: &SamplingMask) -> Result<Vec<u8>> {
    let mode = match mask.mode() {
        MaskMode::FullGrid => 0u8,
        MaskMode::PhaseEncodePlane => 1u8,
    };
    let mut out = header(MASK_MAGIC, Some(mode), mask.dims())?;
    out.extend_from_slice(&(mask.len() as u64).to_le_bytes());
    for &i in mask.indices() {
        out.extend_from_slice(&(i as u64).to_le_bytes());
    }
    let m = mask.metadata();
    out.extend_from_slice(&m.p.to_le_bytes());
    out.extend_from_slice(&m.beta.to_le_bytes());
    out.extend_from_slice(&m.seed.to_le_bytes());
    out.extend_from_slice(&m.target.to_le_bytes());
    out.extend_from_slice(&m.actual.to_le_bytes());
    Ok(out)
}

pub fn decode_mask(bytes: &[u8]) -> Result<SamplingMask> {
    let mut r = Reader::new(bytes);
    r.magic(MASK_MAGIC)?;
    let at = r.pos;
    let mode = match r.u8()? {
        0 => MaskMode::FullGrid,
        1 => MaskMode::PhaseEncodePlane,
        other => {
            return Err(Error::Format {
                offset: at as u64,
                message: format!("unknown mask mode {other}"),
            })
        }
    };
    let dims = r.dims()?;
    element_count(&dims, &r)?;
    let count = r.u64()? as usize;
    r.require(
        count
            .checked_mul(8)
            .ok_or_else(|| r.error("index count too large"))?,
    )?;
    let indices = (0..count)
        .map(|_| Ok(r.u64()? as usize))
        .collect::<Result<Vec<_>>>()?;
    let meta = MaskMetadata {
        p: r.f64()?,
        beta: r.f64()?,
        seed: r.u64()?,
        target: r.u64()?,
        actual: r.u64()?,
    };
    r.finish()?;
    let at = r.pos as u64;
    SamplingMask::new(mode, dims, indices, meta).map_err(|e| Error::Format {
        offset: at,
        message: e.to_string(),
    })
}

pub fn write_complex_array(path: impl AsRef<Path>, image: &ComplexImage<f64>) -> Result<()> {
    fs::write(path, encode_complex_array(image)?)?;
    Ok(())
}

pub fn read_complex_array(path: impl AsRef<Path>) -> Result<ComplexImage<f64>> {
    decode_complex_array(&fs::read(path)?)
}

pub fn write_mask(path: impl AsRef<Path>, mask: &SamplingMask) -> Result<()> {
    fs::write(path, encode_mask(mask)?)?;
    Ok(())
}

pub fn read_mask(path: impl AsRef<Path>) -> Result<SamplingMask> {
    decode_mask(&fs::read(path)?)
}

fn header(magic: &[u8; 4], mode: Option<u8>, dims: &[usize]) -> Result<Vec<u8>> {
    let ndim = u8::try_from(dims.len()).map_err(|_| Error::invalid("too many dimensions"))?;
    let mut out = Vec::with_capacity(10 + 8 * dims.len());
    out.extend_from_slice(magic);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend(mode);
    out.push(ndim);
    for &n in dims {
        out.extend_from_slice(&(n as u64).to_le_bytes());
    }
    Ok(out)
}

fn element_count(dims: &[usize], r: &Reader<'_>) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| r.error("dimensions overflow"))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        Error::Format {
            offset: self.pos as u64,
            message: message.into(),
        }
    }

    fn require(&self, n: usize) -> Result<()> {
        if self.bytes.len() - self.pos < n {
            return Err(self.error(format!(
                "truncated: need {n} more bytes, {} remain",
                self.bytes.len() - self.pos
            )));
        }
        Ok(())
    }

    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        self.require(N)?;
        let out = self.bytes[self.pos..self.pos + N]
            .try_into()
            .expect("length checked");
        self.pos += N;
        Ok(out)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take::<1>()?[0])
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }

    fn magic(&mut self, expected: &[u8; 4]) -> Result<()> {
        let found = self.take::<4>()?;
        if &found != expected {
            return Err(Error::Format {
                offset: 0,
                message: format!(
                    "expected magic {}, found {}",
                    String::from_utf8_lossy(expected),
                    String::from_utf8_lossy(&found).escape_debug()
                ),
            });
        }
        let at = self.pos as u64;
        let version = u32::from_le_bytes(self.take()?);
        if version != VERSION {
            return Err(Error::Format {
                offset: at,
                message: format!("unsupported version {version}, expected {VERSION}"),
            });
        }
        Ok(())
    }

    fn dims(&mut self) -> Result<Vec<usize>> {
        let ndim = self.u8()? as usize;
        if ndim == 0 {
            return Err(self.error("dimension count must be positive"));
        }
        (0..ndim)
            .map(|_| {
                let n = self.u64()?;
                if n == 0 {
                    return Err(self.error("zero-length dimension"));
                }
                usize::try_from(n).map_err(|_| self.error("dimension exceeds address space"))
            })
            .collect()
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(self.error(format!("{} trailing bytes", self.bytes.len() - self.pos)));
        }
        Ok(())
    }
}
