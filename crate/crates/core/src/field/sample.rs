use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::spectral::{inverse_spectrum, SpectralField};
use super::{GridSpec, SampledField};
use crate::error::{Error, Result};

/// Boundary magnitude allowed for localized families, relative to the peak.
const DECAY_LIMIT: f64 = 1e-8;

/// Built-in analytic test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Descriptor {
    /// `exp(-|x - c|² / w²)`.
    Gaussian { center: [f64; 2], width: f64 },
    /// `exp(i 2π m·x / L)`.
    SingleFrequency { mode: [i64; 2] },
    /// `exp(1 - 1/(1 - |x-c|²/r²))` inside the ball, 0 outside.
    SmoothBump { center: [f64; 2], radius: f64 },
    /// Real trigonometric polynomial with standard normal coefficients on the
    /// modes `2^j_lo <= |ξ| <= 2^j_hi`, normalized to unit `L²` norm.
    RandomBandlimited { seed: u64, j_lo: i32, j_hi: i32 },
    /// `max(0, 1 - |x-c|/r)`.
    Tent { center: [f64; 2], radius: f64 },
}

impl Descriptor {
    pub fn gaussian() -> Self {
        Descriptor::Gaussian { center: [0.0; 2], width: 1.0 }
    }

    pub fn smooth_bump() -> Self {
        Descriptor::SmoothBump { center: [0.0; 2], radius: 2.0 }
    }

    pub fn random(seed: u64) -> Self {
        Descriptor::RandomBandlimited { seed, j_lo: -1, j_hi: 3 }
    }

    fn is_localized(&self) -> bool {
        matches!(
            self,
            Descriptor::Gaussian { .. } | Descriptor::SmoothBump { .. } | Descriptor::Tent { .. }
        )
    }
}

fn distance(x: [f64; 2], c: [f64; 2], dim: usize) -> f64 {
    let d0 = x[0] - c[0];
    let d1 = if dim == 2 { x[1] - c[1] } else { 0.0 };
    d0.hypot(d1)
}

pub fn sample(descriptor: &Descriptor, grid: &GridSpec) -> Result<SampledField> {
    let dim = grid.dim();
    let field = match *descriptor {
        Descriptor::Gaussian { center, width } => {
            if !(width > 0.0) {
                return Err(Error::UnsupportedDescriptor(format!("gaussian width {width}")));
            }
            SampledField::from_real_fn(*grid, |x| {
                let r = distance(x, center, dim) / width;
                (-r * r).exp()
            })
        }
        Descriptor::SmoothBump { center, radius } => {
            if !(radius > 0.0) {
                return Err(Error::UnsupportedDescriptor(format!("bump radius {radius}")));
            }
            SampledField::from_real_fn(*grid, |x| {
                let t = distance(x, center, dim) / radius;
                if t < 1.0 {
                    (1.0 - 1.0 / (1.0 - t * t)).exp()
                } else {
                    0.0
                }
            })
        }
        Descriptor::Tent { center, radius } => {
            if !(radius > 0.0) {
                return Err(Error::UnsupportedDescriptor(format!("tent radius {radius}")));
            }
            SampledField::from_real_fn(*grid, |x| (1.0 - distance(x, center, dim) / radius).max(0.0))
        }
        Descriptor::SingleFrequency { mode } => {
            let dk = grid.frequency_step();
            SampledField::from_fn(*grid, |x| {
                let phase = dk * (mode[0] as f64 * x[0] + if dim == 2 { mode[1] as f64 * x[1] } else { 0.0 });
                Complex64::new(0.0, phase).exp()
            })
        }
        Descriptor::RandomBandlimited { seed, j_lo, j_hi } => random_bandlimited(grid, seed, j_lo, j_hi)?,
    };
    if descriptor.is_localized() {
        check_decay(&field)?;
    }
    Ok(field)
}

fn check_decay(field: &SampledField) -> Result<()> {
    let grid = field.grid();
    let peak = field.peak();
    let boundary = (0..grid.len())
        .filter(|&flat| grid.multi_index(flat)[..grid.dim()].contains(&0))
        .map(|flat| field.values()[flat].norm())
        .fold(0.0, f64::max);
    let limit = DECAY_LIMIT * peak;
    if boundary > limit {
        return Err(Error::InsufficientDecay { boundary, limit, peak });
    }
    Ok(())
}

fn random_bandlimited(grid: &GridSpec, seed: u64, j_lo: i32, j_hi: i32) -> Result<SampledField> {
    if j_lo > j_hi {
        return Err(Error::UnsupportedDescriptor(format!("random band [{j_lo}, {j_hi}] is empty")));
    }
    let (lo, hi) = (2f64.powi(j_lo), 2f64.powi(j_hi));
    if hi > grid.nyquist() {
        return Err(Error::NyquistOverflow { j_max: j_hi - 1, nyquist: grid.nyquist() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let in_band = |i: usize| {
        let k = grid.frequency_norm(i);
        !grid.is_nyquist(i) && k >= lo && k <= hi
    };
    let raw: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            if in_band(i) {
                Complex64::new(re, im)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    if raw.iter().all(|c| c.norm() == 0.0) {
        return Err(Error::UnsupportedDescriptor(format!(
            "no grid frequency in [2^{j_lo}, 2^{j_hi}]"
        )));
    }
    // Hermitian symmetrization so the field is real.
    let n = grid.points_per_axis();
    let mirror = |i: usize| {
        let idx = grid.multi_index(i);
        let neg = |k: usize| (n - k) % n;
        grid.flat_index([neg(idx[0]), if grid.dim() == 2 { neg(idx[1]) } else { 0 }])
    };
    let coefficients = (0..grid.len()).map(|i| 0.5 * (raw[i] + raw[mirror(i)].conj())).collect();
    let spectrum = SpectralField::new(*grid, coefficients)?;
    let complex = inverse_spectrum(&spectrum);
    let re = complex.real_parts();
    let field = SampledField::from_real(*grid, &re)?;
    let norm = field.lp_norm(2.0)?;
    Ok(field.scale(Complex64::new(1.0 / norm, 0.0)))
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Descriptor::Gaussian { center, width } => {
                write!(f, "gaussian:width={width},cx={},cy={}", center[0], center[1])
            }
            Descriptor::SingleFrequency { mode } => write!(f, "single:m={},m2={}", mode[0], mode[1]),
            Descriptor::SmoothBump { center, radius } => {
                write!(f, "bump:radius={radius},cx={},cy={}", center[0], center[1])
            }
            Descriptor::RandomBandlimited { seed, j_lo, j_hi } => {
                write!(f, "random:seed={seed},jlo={j_lo},jhi={j_hi}")
            }
            Descriptor::Tent { center, radius } => {
                write!(f, "tent:radius={radius},cx={},cy={}", center[0], center[1])
            }
        }
    }
}

/// Parses `name[:key=value,...]`, e.g. `gaussian`, `bump:radius=3`,
/// `random:seed=7,jlo=0,jhi=4`, `single:m=2,m2=1`, `tent:radius=1.5`.
impl FromStr for Descriptor {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let (name, rest) = text.split_once(':').unwrap_or((text, ""));
        let mut params = Vec::new();
        for pair in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (k, v) = pair
                .split_once('=')
                .ok_or_else(|| Error::UnsupportedDescriptor(format!("malformed parameter '{pair}'")))?;
            params.push((k.trim().to_string(), v.trim().to_string()));
        }
        let bad = |k: &str| Error::UnsupportedDescriptor(format!("bad value for '{k}' in '{text}'"));
        let num = |key: &str, default: f64| -> Result<f64> {
            match params.iter().find(|(k, _)| k == key) {
                Some((_, v)) => v.parse().map_err(|_| bad(key)),
                None => Ok(default),
            }
        };
        let int = |key: &str, default: i64| -> Result<i64> {
            match params.iter().find(|(k, _)| k == key) {
                Some((_, v)) => v.parse().map_err(|_| bad(key)),
                None => Ok(default),
            }
        };
        let known: &[&str] = match name.trim() {
            "gaussian" => &["width", "cx", "cy"],
            "bump" | "smooth_bump" => &["radius", "cx", "cy"],
            "tent" | "hat" => &["radius", "cx", "cy"],
            "single" | "single_frequency" => &["m", "m2"],
            "random" | "random_bandlimited" => &["seed", "jlo", "jhi"],
            other => return Err(Error::UnsupportedDescriptor(other.to_string())),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !known.contains(&k.as_str())) {
            return Err(Error::UnsupportedDescriptor(format!("unknown parameter '{k}' for {name}")));
        }
        let center = [num("cx", 0.0)?, num("cy", 0.0)?];
        Ok(match name.trim() {
            "gaussian" => Descriptor::Gaussian { center, width: num("width", 1.0)? },
            "bump" | "smooth_bump" => Descriptor::SmoothBump { center, radius: num("radius", 2.0)? },
            "tent" | "hat" => Descriptor::Tent { center, radius: num("radius", 2.0)? },
            "single" | "single_frequency" => Descriptor::SingleFrequency { mode: [int("m", 1)?, int("m2", 0)?] },
            _ => Descriptor::RandomBandlimited {
                seed: int("seed", 0)? as u64,
                j_lo: int("jlo", -1)? as i32,
                j_hi: int("jhi", 3)? as i32,
            },
        })
    }
}
