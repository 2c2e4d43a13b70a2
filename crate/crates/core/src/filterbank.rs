//! Dyadic Littlewood-Paley partition of unity on the frequency grid.
//!
//! With a radial low-pass profile `Φ` (1 on `|ξ| ≤ 1`, 0 on `|ξ| ≥ 2`) the band
//! symbols are `σ_j(ξ) = Φ(2^{-j}ξ) - Φ(2^{1-j}ξ)` for `j_min ≤ j ≤ j_max`, and
//! the low-pass remainder is `σ_low(ξ) = Φ(2^{1-j_min}ξ)`. The sum telescopes to
//! `Φ(2^{-j_max}ξ)`, which is 1 for `|ξ| ≤ 2^{j_max}`.
//!
//! Homogeneous seminorms only look at the bands; whatever sits in the low-pass
//! remainder is treated as part of the (killed) constant-like component. The
//! default range puts only the DC mode in the remainder.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_spectrum, inverse_spectrum, GridSpec, SampledField, SpectralField};

/// Largest spectral energy fraction allowed above `2^{j_max}`.
pub const LEAKAGE_LIMIT: f64 = 1e-8;

/// Shape of the radial transition of `Φ` on `1 ≤ |ξ| ≤ 2`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `g(2-r) / (g(2-r) + g(r-1))` with `g(t) = exp(-1/t)`; C^∞.
    #[default]
    SmoothBump,
    /// Quintic smoothstep; C² and cheaper.
    Smoothstep,
}

impl Profile {
    /// The low-pass profile `Φ(r)` at radius `r ≥ 0`.
    pub fn lowpass(self, r: f64) -> f64 {
        if r <= 1.0 {
            return 1.0;
        }
        if r >= 2.0 {
            return 0.0;
        }
        let t = r - 1.0;
        match self {
            Profile::SmoothBump => {
                let g = |u: f64| (-1.0 / u).exp();
                let (a, b) = (g(1.0 - t), g(t));
                a / (a + b)
            }
            Profile::Smoothstep => 1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Filterbank {
    grid: GridSpec,
    j_min: i32,
    j_max: i32,
    profile: Profile,
    symbols: Vec<Vec<f64>>,
    lowpass_symbol: Vec<f64>,
}

/// Default band range for a grid: the low-pass keeps only the DC mode and the
/// top band ends at or below Nyquist.
pub fn default_band_range(grid: &GridSpec) -> (i32, i32) {
    let j_min = grid.frequency_step().log2().floor() as i32;
    let j_max = grid.nyquist().log2().floor() as i32 - 1;
    (j_min, j_max)
}

pub fn build_partition(grid: &GridSpec, j_min: i32, j_max: i32, profile: Profile) -> Result<Filterbank> {
    if j_min >= j_max {
        return Err(Error::DegenerateRange { j_min, j_max });
    }
    if 2f64.powi(j_max + 1) > grid.nyquist() {
        return Err(Error::NyquistOverflow { j_max, nyquist: grid.nyquist() });
    }
    let norms: Vec<f64> = (0..grid.len()).map(|i| grid.frequency_norm(i)).collect();
    let symbols = (j_min..=j_max)
        .map(|j| norms.iter().map(|&k| band_symbol(profile, j, k)).collect())
        .collect();
    let lowpass_symbol = norms.iter().map(|&k| profile.lowpass(2f64.powi(1 - j_min) * k)).collect();
    Ok(Filterbank { grid: *grid, j_min, j_max, profile, symbols, lowpass_symbol })
}

fn band_symbol(profile: Profile, j: i32, k: f64) -> f64 {
    profile.lowpass(2f64.powi(-j) * k) - profile.lowpass(2f64.powi(1 - j) * k)
}

impl Filterbank {
    pub fn for_grid(grid: &GridSpec, profile: Profile) -> Result<Self> {
        let (j_min, j_max) = default_band_range(grid);
        build_partition(grid, j_min, j_max, profile)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn j_min(&self) -> i32 {
        self.j_min
    }

    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn profile(&self) -> Profile {
        self.profile
    }

    pub fn bands(&self) -> impl Iterator<Item = i32> {
        self.j_min..=self.j_max
    }

    /// Band symbol on the grid, in transform order.
    pub fn symbol(&self, j: i32) -> Result<&[f64]> {
        self.check_band(j)?;
        Ok(&self.symbols[(j - self.j_min) as usize])
    }

    pub fn lowpass_symbol(&self) -> &[f64] {
        &self.lowpass_symbol
    }

    /// `σ_j` at an arbitrary frequency magnitude.
    pub fn band_value(&self, j: i32, xi_norm: f64) -> f64 {
        band_symbol(self.profile, j, xi_norm)
    }

    fn check_band(&self, j: i32) -> Result<()> {
        if j < self.j_min || j > self.j_max {
            return Err(Error::BandOutOfRange { j, j_min: self.j_min, j_max: self.j_max });
        }
        Ok(())
    }

    fn check_grid(&self, f: &SampledField) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Frequency magnitude above which the partition stops summing to one.
    pub fn leakage_threshold(&self) -> f64 {
        2f64.powi(self.j_max)
    }

    pub(crate) fn check_leakage(&self, spectrum: &SpectralField) -> Result<()> {
        let total = spectrum.energy();
        if total == 0.0 {
            return Ok(());
        }
        let threshold = self.leakage_threshold();
        let fraction = spectrum.energy_above(threshold) / total;
        if fraction >= LEAKAGE_LIMIT {
            return Err(Error::SpectralLeakage { fraction, threshold });
        }
        Ok(())
    }

    pub(crate) fn project_spectrum(&self, spectrum: &SpectralField, j: i32) -> Result<SampledField> {
        let symbol = self.symbol(j)?;
        Ok(inverse_spectrum(&multiply(spectrum, symbol)))
    }

    /// Band projections of an already transformed field, in band order.
    pub(crate) fn band_fields(&self, spectrum: &SpectralField) -> Vec<(i32, SampledField)> {
        (self.j_min..=self.j_max)
            .into_par_iter()
            .map(|j| (j, inverse_spectrum(&multiply(spectrum, &self.symbols[(j - self.j_min) as usize]))))
            .collect()
    }

    /// Writes one row per distinct grid frequency magnitude with the low-pass and
    /// every band symbol.
    pub fn write_symbols_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "xi_norm,low")?;
        for j in self.bands() {
            write!(out, ",band_{j}")?;
        }
        writeln!(out)?;
        let mut norms: Vec<f64> = (0..self.grid.len()).map(|i| self.grid.frequency_norm(i)).collect();
        norms.sort_by(f64::total_cmp);
        norms.dedup();
        for k in norms {
            write!(out, "{},{}", k, self.profile.lowpass(2f64.powi(1 - self.j_min) * k))?;
            for j in self.bands() {
                write!(out, ",{}", self.band_value(j, k))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

fn multiply(spectrum: &SpectralField, symbol: &[f64]) -> SpectralField {
    spectrum.multiply_by(symbol)
}

/// `Δ_j f`, the spectral multiplication of `f` by `σ_j`.
pub fn project(fb: &Filterbank, f: &SampledField, j: i32) -> Result<SampledField> {
    fb.check_grid(f)?;
    fb.check_band(j)?;
    fb.project_spectrum(&forward_spectrum(f), j)
}

/// Spectral multiplication by the low-pass remainder `σ_low`.
pub fn low_pass(fb: &Filterbank, f: &SampledField) -> Result<SampledField> {
    fb.check_grid(f)?;
    Ok(inverse_spectrum(&multiply(&forward_spectrum(f), &fb.lowpass_symbol)))
}

#[derive(Clone, Debug)]
pub struct BandDecomposition {
    pub lowpass: SampledField,
    pub bands: Vec<(i32, SampledField)>,
}

impl BandDecomposition {
    /// `lowpass + Σ_j Δ_j f`.
    pub fn reconstruct(&self) -> SampledField {
        self.bands
            .iter()
            .try_fold(self.lowpass.clone(), |acc, (_, band)| acc.add(band))
            .expect("bands share the grid of the low-pass field")
    }

    pub fn band(&self, j: i32) -> Option<&SampledField> {
        self.bands.iter().find(|(k, _)| *k == j).map(|(_, f)| f)
    }
}

pub fn decompose(fb: &Filterbank, f: &SampledField) -> Result<BandDecomposition> {
    fb.check_grid(f)?;
    let spectrum = forward_spectrum(f);
    fb.check_leakage(&spectrum)?;
    let lowpass = inverse_spectrum(&multiply(&spectrum, &fb.lowpass_symbol));
    Ok(BandDecomposition { lowpass, bands: fb.band_fields(&spectrum) })
}
