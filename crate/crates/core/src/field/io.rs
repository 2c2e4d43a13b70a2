//! Flat binary container and CSV dumps for fields.
//!
//! Container layout, all little-endian:
//!
//! | bytes | content                                   |
//! |-------|-------------------------------------------|
//! | 4     | magic `FLAB`                              |
//! | 4     | dimension `N` (u32)                       |
//! | 4     | points per axis `n` (u32)                 |
//! | 8     | period `L` (f64)                          |
//! | 4     | convention tag (u32): 0 samples, 1 unitary-angular spectrum |
//! | 16·nᴺ | `(re, im)` pairs of f64                   |

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use num_complex::Complex64;

use super::spectral::{Convention, SpectralField};
use super::{GridSpec, SampledField, REAL_TOLERANCE};
use crate::error::{Error, Result};

pub const CONTAINER_MAGIC: &[u8; 4] = b"FLAB";
const HEADER_LEN: usize = 24;
const SAMPLES_TAG: u32 = 0;

fn encode(grid: &GridSpec, tag: u32, values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * values.len());
    out.extend_from_slice(CONTAINER_MAGIC);
    out.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&grid.period().to_le_bytes());
    out.extend_from_slice(&tag.to_le_bytes());
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8]) -> Result<(GridSpec, u32, Vec<Complex64>)> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!("{} bytes is shorter than the header", bytes.len())));
    }
    if &bytes[..4] != CONTAINER_MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let grid = GridSpec::new(u32_at(4) as usize, u32_at(8) as usize, f64_at(12))?;
    let tag = u32_at(20);
    let expected = HEADER_LEN + 16 * grid.len();
    if bytes.len() != expected {
        return Err(Error::Format(format!("payload is {} bytes, expected {expected}", bytes.len())));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((grid, tag, values))
}

pub fn encode_sampled(field: &SampledField) -> Vec<u8> {
    encode(field.grid(), SAMPLES_TAG, field.values())
}

pub fn decode_sampled(bytes: &[u8]) -> Result<SampledField> {
    let (grid, tag, values) = decode(bytes)?;
    if tag != SAMPLES_TAG {
        return Err(Error::Format(format!("convention tag {tag} is not a sampled field")));
    }
    let field = SampledField::new(grid, values)?;
    let real = field.imaginary_residue() <= REAL_TOLERANCE;
    Ok(field.with_real_tag(real))
}

pub fn encode_spectral(spectrum: &SpectralField) -> Vec<u8> {
    encode(spectrum.grid(), spectrum.convention().tag(), spectrum.coefficients())
}

pub fn decode_spectral(bytes: &[u8]) -> Result<SpectralField> {
    let (grid, tag, values) = decode(bytes)?;
    if tag != Convention::UnitaryAngular.tag() {
        return Err(Error::Format(format!("convention tag {tag} is not a known spectrum")));
    }
    SpectralField::new(grid, values)
}

pub fn write_field(path: &Path, field: &SampledField) -> Result<()> {
    fs::write(path, encode_sampled(field))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<SampledField> {
    decode_sampled(&fs::read(path)?)
}

/// One row per sample: index columns, coordinates, real and imaginary part.
pub fn write_field_csv<W: Write>(field: &SampledField, mut out: W) -> io::Result<()> {
    let grid = field.grid();
    match grid.dim() {
        1 => writeln!(out, "i0,x0,re,im")?,
        _ => writeln!(out, "i0,i1,x0,x1,re,im")?,
    }
    for (flat, v) in field.values().iter().enumerate() {
        let idx = grid.multi_index(flat);
        let x = grid.point(flat);
        match grid.dim() {
            1 => writeln!(out, "{},{},{},{}", idx[0], x[0], v.re, v.im)?,
            _ => writeln!(out, "{},{},{},{},{},{}", idx[0], idx[1], x[0], x[1], v.re, v.im)?,
        }
    }
    Ok(())
}

/// One row per mode: signed wavenumbers, angular frequency magnitude, coefficient.
pub fn write_spectrum_csv<W: Write>(spectrum: &SpectralField, mut out: W) -> io::Result<()> {
    let grid = spectrum.grid();
    match grid.dim() {
        1 => writeln!(out, "k0,xi_norm,re,im")?,
        _ => writeln!(out, "k0,k1,xi_norm,re,im")?,
    }
    for (flat, c) in spectrum.coefficients().iter().enumerate() {
        let k = grid.modes(flat);
        let xi = grid.frequency_norm(flat);
        match grid.dim() {
            1 => writeln!(out, "{},{},{},{}", k[0], xi, c.re, c.im)?,
            _ => writeln!(out, "{},{},{},{},{}", k[0], k[1], xi, c.re, c.im)?,
        }
    }
    Ok(())
}
