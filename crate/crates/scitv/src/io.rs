//! Tensor file IO and grayscale frame export.
//!
//! The on-disk tensor format ("SCIT") is deliberately minimal:
//!
//! ```text
//! bytes 0..8   magic, ASCII "SCITNSR1" (the trailing byte is the version)
//! byte  8      dtype code: 1 = f32, 2 = f64 (payload is little-endian)
//! byte  9      rank: 2 or 3
//! next  8*rank dims as little-endian u64, ordered (n_x, n_y[, frames])
//! rest         payload, frame-major then row-major; no padding, no checksum
//! ```
//!
//! 32-bit payloads are widened to f64 on load; writers always emit f64.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::tensor::{Frame, VideoCube};

pub const SCIT_MAGIC: &[u8; 8] = b"SCITNSR1";

const DTYPE_F32: u8 = 1;
const DTYPE_F64: u8 = 2;

#[derive(Debug, Clone, PartialEq)]
pub enum Tensor {
    Frame(Frame),
    Cube(VideoCube),
}

pub fn load_tensor(path: impl AsRef<Path>) -> Result<Tensor> {
    let bytes = fs::read(path)?;
    parse_tensor(&bytes)
}

pub fn load_cube(path: impl AsRef<Path>) -> Result<VideoCube> {
    match load_tensor(path.as_ref())? {
        Tensor::Cube(c) => Ok(c),
        Tensor::Frame(_) => Err(Error::Dimension(format!(
            "{}: expected a rank-3 tensor, found rank 2",
            path.as_ref().display()
        ))),
    }
}

pub fn load_frame(path: impl AsRef<Path>) -> Result<Frame> {
    match load_tensor(path.as_ref())? {
        Tensor::Frame(f) => Ok(f),
        Tensor::Cube(_) => Err(Error::Dimension(format!(
            "{}: expected a rank-2 tensor, found rank 3",
            path.as_ref().display()
        ))),
    }
}

pub fn save_cube(path: impl AsRef<Path>, cube: &VideoCube) -> Result<()> {
    write_scit(
        path,
        &[cube.n_x() as u64, cube.n_y() as u64, cube.frames() as u64],
        DTYPE_F64,
        &cube.to_flat(),
    )
}

pub fn save_frame(path: impl AsRef<Path>, frame: &Frame) -> Result<()> {
    write_scit(
        path,
        &[frame.n_x() as u64, frame.n_y() as u64],
        DTYPE_F64,
        &frame.to_flat(),
    )
}

pub fn save_tensor(path: impl AsRef<Path>, tensor: &Tensor) -> Result<()> {
    match tensor {
        Tensor::Frame(f) => save_frame(path, f),
        Tensor::Cube(c) => save_cube(path, c),
    }
}

fn write_scit(path: impl AsRef<Path>, dims: &[u64], dtype: u8, data: &[f64]) -> Result<()> {
    let file = fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(file);
    w.write_all(SCIT_MAGIC)?;
    w.write_all(&[dtype, dims.len() as u8])?;
    for d in dims {
        w.write_all(&d.to_le_bytes())?;
    }
    match dtype {
        DTYPE_F32 => {
            for v in data {
                w.write_all(&(*v as f32).to_le_bytes())?;
            }
        }
        _ => {
            for v in data {
                w.write_all(&v.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn parse_tensor(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 7 || &bytes[..7] != &SCIT_MAGIC[..7] {
        return Err(Error::BadMagic);
    }
    if bytes[7] != SCIT_MAGIC[7] {
        return Err(Error::BadVersion(bytes[7]));
    }
    if bytes.len() < 10 {
        return Err(Error::TruncatedPayload {
            expected: 10,
            found: bytes.len() as u64,
        });
    }
    let dtype = bytes[8];
    let sample_width = match dtype {
        DTYPE_F32 => 4usize,
        DTYPE_F64 => 8usize,
        other => return Err(Error::BadDtype(other)),
    };
    let rank = bytes[9];
    if rank != 2 && rank != 3 {
        return Err(Error::BadRank(rank));
    }
    let rank = rank as usize;
    let header_len = 10 + 8 * rank;
    if bytes.len() < header_len {
        return Err(Error::TruncatedPayload {
            expected: header_len as u64,
            found: bytes.len() as u64,
        });
    }
    let mut dims = [0usize; 3];
    for (r, d) in dims.iter_mut().take(rank).enumerate() {
        let start = 10 + 8 * r;
        let raw = u64::from_le_bytes(bytes[start..start + 8].try_into().unwrap());
        if raw == 0 {
            return Err(Error::ZeroDim);
        }
        *d = usize::try_from(raw)
            .map_err(|_| Error::Dimension(format!("dimension {raw} exceeds addressable size")))?;
    }
    let count = dims
        .iter()
        .take(rank)
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::Dimension("tensor size overflows".into()))?;
    let expected = count
        .checked_mul(sample_width)
        .ok_or_else(|| Error::Dimension("tensor size overflows".into()))?;
    let payload = &bytes[header_len..];
    if payload.len() < expected {
        return Err(Error::TruncatedPayload {
            expected: expected as u64,
            found: payload.len() as u64,
        });
    }
    if payload.len() > expected {
        return Err(Error::TrailingBytes((payload.len() - expected) as u64));
    }

    let mut data = Vec::with_capacity(count);
    match dtype {
        DTYPE_F32 => {
            for chunk in payload.chunks_exact(4) {
                data.push(f32::from_le_bytes(chunk.try_into().unwrap()) as f64);
            }
        }
        _ => {
            for chunk in payload.chunks_exact(8) {
                data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
            }
        }
    }
    if let Some(offset) = data.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput { offset });
    }

    if rank == 2 {
        Ok(Tensor::Frame(Frame::from_flat(dims[0], dims[1], data)?))
    } else {
        Ok(Tensor::Cube(VideoCube::from_flat(
            dims[0], dims[1], dims[2], data,
        )?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl std::str::FromStr for ImageFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pgm" => Ok(ImageFormat::Pgm),
            "png" => Ok(ImageFormat::Png),
            other => Err(Error::Parameter(format!(
                "unknown image format {other:?} (expected pgm or png)"
            ))),
        }
    }
}

/// Writes one 8-bit grayscale image per frame into `dir`, clamping values
/// to [0, 1] before scaling. Returns the written paths in frame order.
pub fn export_frames(
    cube: &VideoCube,
    dir: impl AsRef<Path>,
    format: ImageFormat,
) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let digits = cube.frames().to_string().len().max(3);
    let mut paths = Vec::with_capacity(cube.frames());
    for k in 0..cube.frames() {
        let pixels: Vec<u8> = cube
            .frame_view(k)
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let ext = match format {
            ImageFormat::Pgm => "pgm",
            ImageFormat::Png => "png",
        };
        let path = dir.join(format!("frame_{k:0digits$}.{ext}"));
        match format {
            ImageFormat::Pgm => {
                let mut out = Vec::with_capacity(pixels.len() + 32);
                out.extend_from_slice(format!("P5\n{} {}\n255\n", cube.n_y(), cube.n_x()).as_bytes());
                out.extend_from_slice(&pixels);
                fs::write(&path, out)?;
            }
            ImageFormat::Png => {
                let img = image::GrayImage::from_raw(cube.n_y() as u32, cube.n_x() as u32, pixels)
                    .expect("buffer sized from frame dims");
                img.save(&path)
                    .map_err(|e| Error::Numeric(format!("png encode failed: {e}")))?;
            }
        }
        paths.push(path);
    }
    Ok(paths)
}
