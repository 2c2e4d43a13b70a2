//! Discrete Fourier transforms under one fixed convention.
//!
//! Coefficients approximate the unitary angular-frequency transform
//! `ℱf(ξ) = (2π)^{-N/2} ∫ f(x) e^{-i x·ξ} dx` sampled at `ξ_k = 2πk/L`:
//!
//! ```text
//! F_k = h^N (2π)^{-N/2} Σ_j f_j e^{-i ξ_k · x_j}
//! ```
//!
//! With grid origin `x_0 = -L/2` the phase `e^{-i ξ_k · x_0}` reduces to
//! `(-1)^{k_1 + … + k_N}`. Parseval reads `h^N Σ|f_j|² = (2π/L)^N Σ|F_k|²`.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::{lp_norm_of_moduli, GridSpec, SampledField};
use crate::error::{Error, Result};

/// Largest admissible spectral energy fraction in the top third of the modes
/// before differentiation is refused.
pub const RESOLUTION_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Convention {
    /// Unitary transform in angular frequency, sampled on `2πk/L`.
    UnitaryAngular,
}

impl Convention {
    pub fn tag(self) -> u32 {
        match self {
            Convention::UnitaryAngular => 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
    convention: Convention,
    hermitian: bool,
}

impl SpectralField {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} coefficients for a grid of {} points",
                coefficients.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, coefficients, convention: Convention::UnitaryAngular, hermitian: false })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn convention(&self) -> Convention {
        self.convention
    }

    /// Whether this is the spectrum of a real field.
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    /// Convention-weighted energy `(2π/L)^N Σ|F_k|²`, equal to `‖f‖₂²`.
    pub fn energy(&self) -> f64 {
        let weight = self.grid.frequency_step().powi(self.grid.dim() as i32);
        weight * self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    /// Energy carried by modes with `|ξ| > threshold`.
    pub fn energy_above(&self, threshold: f64) -> f64 {
        let weight = self.grid.frequency_step().powi(self.grid.dim() as i32);
        weight
            * self
                .coefficients
                .iter()
                .enumerate()
                .filter(|(i, _)| self.grid.frequency_norm(*i) > threshold)
                .map(|(_, c)| c.norm_sqr())
                .sum::<f64>()
    }

    /// Multiplies by a radial real symbol `m(|ξ|)`; real fields stay real.
    pub fn apply_radial(&self, symbol: impl Fn(f64) -> f64) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(self.grid.frequency_norm(i)))
            .collect();
        SpectralField { coefficients, ..self.clone() }
    }

    /// Multiplies by a real symbol tabulated in transform order.
    pub fn multiply_by(&self, symbol: &[f64]) -> SpectralField {
        assert_eq!(symbol.len(), self.coefficients.len(), "symbol length");
        let coefficients = self.coefficients.iter().zip(symbol).map(|(c, m)| c * m).collect();
        SpectralField { coefficients, ..self.clone() }
    }

    /// Multiplies by an arbitrary per-mode factor `m(ξ)`.
    pub fn apply(&self, symbol: impl Fn([f64; 2]) -> Complex64, keeps_real: bool) -> SpectralField {
        let coefficients = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * symbol(self.grid.frequency(i)))
            .collect();
        SpectralField {
            coefficients,
            hermitian: self.hermitian && keeps_real,
            ..self.clone()
        }
    }
}

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Unnormalized in-place DFT over every axis of the grid.
pub(crate) fn dft_in_place(grid: &GridSpec, data: &mut [Complex64], inverse: bool) {
    let n = grid.points_per_axis();
    let fft = plan(n, inverse);
    match grid.dim() {
        1 => fft.process(data),
        _ => {
            for row in data.chunks_exact_mut(n) {
                fft.process(row);
            }
            let mut column = vec![Complex64::new(0.0, 0.0); n];
            for i1 in 0..n {
                for i0 in 0..n {
                    column[i0] = data[i0 * n + i1];
                }
                fft.process(&mut column);
                for i0 in 0..n {
                    data[i0 * n + i1] = column[i0];
                }
            }
        }
    }
}

fn origin_phase(grid: &GridSpec, flat: usize) -> f64 {
    let m = grid.modes(flat);
    if (m[0] + m[1]).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn forward_spectrum(f: &SampledField) -> SpectralField {
    let grid = *f.grid();
    let mut data = f.values().to_vec();
    dft_in_place(&grid, &mut data, false);
    let scale = grid.cell_volume() / (2.0 * std::f64::consts::PI).powf(grid.dim() as f64 / 2.0);
    for (i, c) in data.iter_mut().enumerate() {
        *c *= scale * origin_phase(&grid, i);
    }
    SpectralField {
        grid,
        coefficients: data,
        convention: Convention::UnitaryAngular,
        hermitian: f.is_real(),
    }
}

pub fn inverse_spectrum(spectrum: &SpectralField) -> SampledField {
    let grid = spectrum.grid;
    let mut data = spectrum.coefficients.clone();
    let scale = (2.0 * std::f64::consts::PI).powf(grid.dim() as f64 / 2.0)
        / (grid.cell_volume() * grid.len() as f64);
    for (i, c) in data.iter_mut().enumerate() {
        *c *= scale * origin_phase(&grid, i);
    }
    dft_in_place(&grid, &mut data, true);
    SampledField::new(grid, data)
        .expect("spectrum length matches its grid")
        .with_real_tag(spectrum.hermitian)
}

/// Fraction of spectral energy in modes with some `|k_axis| >= n/3`.
pub fn top_third_energy_fraction(spectrum: &SpectralField) -> f64 {
    let total = spectrum.energy();
    if total == 0.0 {
        return 0.0;
    }
    let grid = spectrum.grid;
    let cutoff = grid.points_per_axis() as i64 / 3;
    let weight = grid.frequency_step().powi(grid.dim() as i32);
    let high: f64 = spectrum
        .coefficients
        .iter()
        .enumerate()
        .filter(|(i, _)| grid.modes(*i)[..grid.dim()].iter().any(|k| k.abs() >= cutoff))
        .map(|(_, c)| c.norm_sqr())
        .sum();
    weight * high / total
}

pub(crate) fn check_resolved(spectrum: &SpectralField) -> Result<()> {
    let fraction = top_third_energy_fraction(spectrum);
    if fraction >= RESOLUTION_LIMIT {
        return Err(Error::SpectralUnderresolution { fraction, limit: RESOLUTION_LIMIT });
    }
    Ok(())
}

/// Spectral partial derivatives `∂_a f`, one field per axis. The Nyquist mode is dropped.
pub fn gradient(f: &SampledField) -> Result<Vec<SampledField>> {
    let spectrum = forward_spectrum(f);
    check_resolved(&spectrum)?;
    Ok(spectral_gradient(&spectrum))
}

pub(crate) fn spectral_gradient(spectrum: &SpectralField) -> Vec<SampledField> {
    let grid = spectrum.grid;
    (0..grid.dim())
        .map(|axis| {
            let coefficients = spectrum
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    if grid.is_nyquist(i) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        c * Complex64::new(0.0, grid.frequency(i)[axis])
                    }
                })
                .collect();
            inverse_spectrum(&SpectralField { coefficients, ..spectrum.clone() })
        })
        .collect()
}

/// `‖∇f‖_p` with the pointwise Euclidean gradient magnitude.
pub fn gradient_lp_norm(f: &SampledField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let components = gradient(f)?;
    Ok(gradient_magnitude_norm(&components, p))
}

pub(crate) fn gradient_magnitude_norm(components: &[SampledField], p: f64) -> f64 {
    let grid = *components[0].grid();
    let moduli = (0..grid.len()).map(|i| {
        components.iter().map(|c| c.values()[i].norm_sqr()).sum::<f64>().sqrt()
    });
    lp_norm_of_moduli(moduli, p, grid.cell_volume())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel_l2(a: &SampledField, b: &SampledField) -> f64 {
        a.sub(b).unwrap().lp_norm(2.0).unwrap() / b.lp_norm(2.0).unwrap()
    }

    #[test]
    fn constant_has_only_dc() {
        let g = GridSpec::new(1, 16, 2.0 * PI).unwrap();
        let f = SampledField::from_real_fn(g, |_| 1.0);
        let spec = forward_spectrum(&f);
        // ℱ1 at ξ = 0 is L / √(2π)
        assert!((spec.coefficients()[0].re - 2.0 * PI / (2.0 * PI).sqrt()).abs() < 1e-12);
        for c in &spec.coefficients()[1..] {
            assert!(c.norm() < 1e-13);
        }
    }

    #[test]
    fn single_frequency_has_one_mode() {
        let g = GridSpec::new(1, 8, 2.0 * PI).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new(0.0, x[0]).exp());
        let spec = forward_spectrum(&f);
        for (i, c) in spec.coefficients().iter().enumerate() {
            if i == 1 {
                assert!(c.norm() > 1.0);
            } else {
                assert!(c.norm() < 1e-13, "mode {i}: {c}");
            }
        }
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let spec = forward_spectrum(&SampledField::zeros(g));
        assert!(spec.coefficients().iter().all(|c| c.norm() == 0.0));
        assert!(inverse_spectrum(&spec).values().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn gaussian_fourier_pair() {
        // e^{-x²} ↦ e^{-ξ²/4}/√2 under the unitary angular convention.
        let g = GridSpec::new(1, 512, 40.0).unwrap();
        let f = SampledField::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let spec = forward_spectrum(&f);
        for (i, c) in spec.coefficients().iter().enumerate() {
            let xi = g.frequency(i)[0];
            let exact = (-xi * xi / 4.0).exp() / 2f64.sqrt();
            assert!((c.re - exact).abs() < 1e-13 && c.im.abs() < 1e-13, "mode {i}");
        }
        let analytic = SpectralField::new(
            g,
            (0..g.len())
                .map(|i| {
                    let xi = g.frequency(i)[0];
                    Complex64::new((-xi * xi / 4.0).exp() / 2f64.sqrt(), 0.0)
                })
                .collect(),
        )
        .unwrap();
        assert!(rel_l2(&inverse_spectrum(&analytic), &f) < 1e-10);
    }

    #[test]
    fn gaussian_fourier_pair_2d() {
        // e^{-|x|²} ↦ e^{-|ξ|²/4}/2 in two dimensions.
        let g = GridSpec::new(2, 64, 16.0).unwrap();
        let f = SampledField::from_real_fn(g, |x| (-(x[0] * x[0] + x[1] * x[1])).exp());
        let spec = forward_spectrum(&f);
        for (i, c) in spec.coefficients().iter().enumerate() {
            let k = g.frequency_norm(i);
            assert!((c.re - (-k * k / 4.0).exp() / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gradient_of_sine() {
        let g = GridSpec::new(1, 64, 2.0 * PI).unwrap();
        let f = SampledField::from_real_fn(g, |x| x[0].sin());
        assert!((gradient_lp_norm(&f, 2.0).unwrap() - PI.sqrt()).abs() < 1e-12);
        let c = SampledField::from_real_fn(g, |_| 3.0);
        assert!(gradient_lp_norm(&c, 2.0).unwrap() < 1e-12);
    }

    #[test]
    fn gradient_of_gaussian() {
        // ∫ 4x² e^{-2x²} dx = √(π/2)
        let g = GridSpec::new(1, 4096, 40.0).unwrap();
        let f = SampledField::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let expected = (PI / 2.0).powf(0.25);
        assert!((gradient_lp_norm(&f, 2.0).unwrap() - expected).abs() < 1e-10);
    }

    #[test]
    fn underresolved_gradient_is_refused() {
        let g = GridSpec::new(1, 64, 8.0).unwrap();
        let tent = SampledField::from_real_fn(g, |x| (1.0 - x[0].abs()).max(0.0));
        assert!(matches!(
            gradient_lp_norm(&tent, 2.0),
            Err(Error::SpectralUnderresolution { .. })
        ));
    }

    fn arbitrary_field(dim: usize, seeds: &[f64]) -> SampledField {
        let g = GridSpec::new(dim, 16, 5.0).unwrap();
        let values = (0..g.len())
            .map(|i| Complex64::new(seeds[i % seeds.len()] * (1.3 * i as f64).sin(), seeds[(3 * i + 1) % seeds.len()]))
            .collect();
        SampledField::new(g, values).unwrap()
    }

    proptest! {
        #[test]
        fn round_trip_and_parseval(seeds in prop::collection::vec(-3.0f64..3.0, 11), dim in 1usize..=2) {
            let f = arbitrary_field(dim, &seeds);
            let spec = forward_spectrum(&f);
            let back = inverse_spectrum(&spec);
            let norm = f.lp_norm(2.0).unwrap();
            prop_assume!(norm > 1e-8);
            prop_assert!(rel_l2(&back, &f) <= 1e-12);
            prop_assert!((spec.energy() - norm * norm).abs() <= 1e-10 * norm * norm);
        }
    }
}
