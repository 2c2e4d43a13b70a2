//! Uniform periodic grids and the fields sampled on them.
//!
//! A [`GridSpec`] describes the torus `[-L/2, L/2)^N` with `n` points per
//! axis. Sample `i` along an axis sits at `x_i = -L/2 + i h` with `h = L/n`.
//! Multi-dimensional samples are stored row-major: the flat index of
//! `(i0, i1)` is `i0 * n + i1`.

mod io;
mod sample;
pub(crate) mod spectral;

pub use io::{
    decode_sampled, decode_spectral, encode_sampled, encode_spectral, read_field, write_field,
    write_field_csv, write_spectrum_csv, CONTAINER_MAGIC,
};
pub use sample::{sample, Descriptor};
pub use spectral::{
    forward_spectrum, gradient, gradient_lp_norm, inverse_spectrum, top_third_energy_fraction,
    Convention, SpectralField, RESOLUTION_LIMIT,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative imaginary residue below which a field counts as real.
pub const REAL_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    points_per_axis: usize,
    period: f64,
}

impl GridSpec {
    pub fn new(dim: usize, points_per_axis: usize, period: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in {{1, 2}}")));
        }
        if points_per_axis < 2 || !points_per_axis.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis {points_per_axis} is not a power of two >= 2"
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!("period {period} must be positive")));
        }
        Ok(Self { dim, points_per_axis, period })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.points_per_axis as f64
    }

    /// Total number of samples, `n^N`.
    pub fn len(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^N` of one grid cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spacing `2π/L` of the angular frequency lattice.
    pub fn frequency_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.period
    }

    /// Largest representable angular frequency per axis, `π n / L`.
    pub fn nyquist(&self) -> f64 {
        std::f64::consts::PI * self.points_per_axis as f64 / self.period
    }

    pub fn coordinate(&self, index: usize) -> f64 {
        -0.5 * self.period + index as f64 * self.spacing()
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.points_per_axis, flat % self.points_per_axis],
        }
    }

    pub fn flat_index(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.points_per_axis + idx[1],
        }
    }

    /// Physical position of a sample; unused axes are zero.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 2];
        for (axis, slot) in x.iter_mut().enumerate().take(self.dim) {
            *slot = self.coordinate(idx[axis]);
        }
        x
    }

    /// Signed mode number of a transform index: `k` for `k < n/2`, `k - n` otherwise.
    pub fn wavenumber(&self, index: usize) -> i64 {
        let n = self.points_per_axis as i64;
        let k = index as i64;
        if k < n / 2 {
            k
        } else {
            k - n
        }
    }

    pub fn modes(&self, flat: usize) -> [i64; 2] {
        let idx = self.multi_index(flat);
        let mut m = [0; 2];
        for (axis, slot) in m.iter_mut().enumerate().take(self.dim) {
            *slot = self.wavenumber(idx[axis]);
        }
        m
    }

    /// Angular frequency vector `2πk/L` of a transform index.
    pub fn frequency(&self, flat: usize) -> [f64; 2] {
        let m = self.modes(flat);
        let dk = self.frequency_step();
        [m[0] as f64 * dk, m[1] as f64 * dk]
    }

    pub fn frequency_norm(&self, flat: usize) -> f64 {
        let xi = self.frequency(flat);
        xi[0].hypot(xi[1])
    }

    /// Whether the transform index is a Nyquist mode along some axis.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let half = self.points_per_axis / 2;
        let idx = self.multi_index(flat);
        idx[..self.dim].contains(&half)
    }

    /// Unit sphere measure `|S^{N-1}|`: 2 for N = 1, 2π for N = 2.
    pub fn sphere_measure(&self) -> f64 {
        sphere_measure(self.dim)
    }

    /// Unit ball volume: 2 for N = 1, π for N = 2.
    pub fn ball_volume(&self) -> f64 {
        sphere_measure(self.dim) / self.dim as f64
    }
}

pub(crate) fn sphere_measure(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI,
    }
}

/// Complex samples of a function on a [`GridSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledField {
    grid: GridSpec,
    values: Vec<Complex64>,
    real: bool,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values, real: false })
    }

    pub fn from_real(grid: GridSpec, values: &[f64]) -> Result<Self> {
        let values = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let mut field = Self::new(grid, values)?;
        field.real = true;
        Ok(field)
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.len()], real: true }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self { grid, values, real: false }
    }

    pub fn from_real_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| Complex64::new(f(grid.point(i)), 0.0)).collect();
        Self { grid, values, real: true }
    }

    pub(crate) fn with_real_tag(mut self, real: bool) -> Self {
        self.real = real;
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest imaginary magnitude relative to the peak modulus (0 for the zero field).
    pub fn imaginary_residue(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max) / peak
    }

    pub fn mean(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() / self.values.len() as f64
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let real = self.real && c.im == 0.0;
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect(), real }
    }

    pub fn add(&self, other: &SampledField) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SampledField) -> Result<Self> {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(
        &self,
        other: &SampledField,
        op: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect();
        Ok(Self { grid: self.grid, values, real: self.real && other.real })
    }

    /// `L²` inner product `h^N Σ a_i conj(b_i)`.
    pub fn inner(&self, other: &SampledField) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let sum: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a * b.conj()).sum();
        Ok(sum * self.grid.cell_volume())
    }

    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm(self, p)
    }

    /// True when the field is negligible (≤ 1e-8 of its peak) in a strip along the
    /// torus boundary, i.e. it behaves like a localized function on ℝᴺ rather than
    /// a genuinely periodic one.
    pub fn decays_at_boundary(&self) -> bool {
        let peak = self.peak();
        if peak == 0.0 {
            return true;
        }
        let n = self.grid.points_per_axis();
        let strip = (n / 32).max(1);
        let near_edge = |i: usize| i < strip || i >= n - strip;
        let edge_max = (0..self.grid.len())
            .filter(|&flat| self.grid.multi_index(flat)[..self.grid.dim()].iter().any(|&i| near_edge(i)))
            .map(|flat| self.values[flat].norm())
            .fold(0.0, f64::max);
        edge_max <= 1e-8 * peak
    }
}

/// Trapezoid-on-torus `Lᵖ` norm `(h^N Σ|f_i|^p)^{1/p}`; `p = ∞` gives the max modulus.
pub fn lp_norm(f: &SampledField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(lp_norm_of_moduli(f.values.iter().map(|v| v.norm()), p, f.grid.cell_volume()))
}

pub(crate) fn lp_norm_of_moduli(moduli: impl Iterator<Item = f64>, p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        return moduli.fold(0.0, f64::max);
    }
    let sum: f64 = if p == 2.0 { moduli.map(|m| m * m).sum() } else { moduli.map(|m| m.powf(p)).sum() };
    (weight * sum).powf(1.0 / p)
}

/// Periodic lattice shift `g(x) = f(x + z h)`.
pub fn shift(f: &SampledField, z: [i64; 2]) -> SampledField {
    let grid = f.grid;
    let n = grid.points_per_axis() as i64;
    let wrap = |i: usize, dz: i64| (i as i64 + dz).rem_euclid(n) as usize;
    let values = (0..grid.len())
        .map(|flat| {
            let idx = grid.multi_index(flat);
            let src = match grid.dim() {
                1 => wrap(idx[0], z[0]),
                _ => wrap(idx[0], z[0]) * n as usize + wrap(idx[1], z[1]),
            };
            f.values[src]
        })
        .collect();
    SampledField { grid, values, real: f.real }
}

/// `‖f(· + z h) - f‖_p^p` without materializing the shifted field.
pub(crate) fn shift_difference_power(f: &SampledField, z: [i64; 2], p: f64) -> f64 {
    let grid = f.grid;
    let n = grid.points_per_axis();
    let v = &f.values;
    let pow = |d: Complex64| if p == 2.0 { d.norm_sqr() } else { d.norm().powf(p) };
    let sum: f64 = match grid.dim() {
        1 => {
            let s = z[0].rem_euclid(n as i64) as usize;
            (0..n).map(|i| pow(v[(i + s) % n] - v[i])).sum()
        }
        _ => {
            let s0 = z[0].rem_euclid(n as i64) as usize;
            let s1 = z[1].rem_euclid(n as i64) as usize;
            let mut acc = 0.0;
            for i0 in 0..n {
                let row = i0 * n;
                let src_row = ((i0 + s0) % n) * n;
                for i1 in 0..n {
                    acc += pow(v[src_row + (i1 + s1) % n] - v[row + i1]);
                }
            }
            acc
        }
    };
    sum * grid.cell_volume()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn grid1(n: usize, l: f64) -> GridSpec {
        GridSpec::new(1, n, l).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(3, 8, 1.0).is_err());
        assert!(GridSpec::new(1, 12, 1.0).is_err());
        assert!(GridSpec::new(1, 8, 0.0).is_err());
        let g = GridSpec::new(2, 16, 4.0).unwrap();
        assert_eq!(g.spacing() * g.points_per_axis() as f64, g.period());
        assert_eq!(g.len(), 256);
    }

    #[test]
    fn wavenumbers_follow_transform_order() {
        let g = grid1(8, 2.0 * PI);
        let ks: Vec<i64> = (0..8).map(|i| g.wavenumber(i)).collect();
        assert_eq!(ks, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(4));
    }

    #[test]
    fn constant_field_norm() {
        let g = grid1(64, 2.0 * PI);
        let f = SampledField::from_real_fn(g, |_| 1.0);
        for p in [1.0, 1.5, 2.0, 3.0] {
            let expected = (2.0 * PI).powf(1.0 / p);
            assert!((f.lp_norm(p).unwrap() - expected).abs() < 1e-12 * expected);
        }
        assert_eq!(f.lp_norm(f64::INFINITY).unwrap(), 1.0);
        assert_eq!(SampledField::zeros(g).lp_norm(2.0).unwrap(), 0.0);
    }

    #[test]
    fn lp_norm_rejects_small_exponent() {
        let f = SampledField::zeros(grid1(8, 1.0));
        assert!(matches!(f.lp_norm(0.5), Err(Error::InvalidExponent(_))));
    }

    #[test]
    fn gaussian_l2_norm_closed_form() {
        // ∫ e^{-2x²} dx = √(π/2)
        let g = grid1(4096, 40.0);
        let f = SampledField::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let expected = (PI / 2.0).powf(0.25);
        assert!((f.lp_norm(2.0).unwrap() - expected).abs() < 1e-6);
    }

    #[test]
    fn shift_by_zero_and_full_period() {
        let g = GridSpec::new(2, 8, 1.0).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new(x[0], x[1] * x[1]));
        assert_eq!(shift(&f, [0, 0]), f);
        assert_eq!(shift(&f, [8, -8]), f);
        let g1 = shift(&f, [1, 0]);
        assert_eq!(g1.values()[0], f.values()[8]);
    }

    #[test]
    fn boundary_decay_detection() {
        let g = grid1(256, 40.0);
        let local = SampledField::from_real_fn(g, |x| (-x[0] * x[0]).exp());
        let periodic = SampledField::from_real_fn(g, |x| (2.0 * PI * x[0] / 40.0).cos());
        assert!(local.decays_at_boundary());
        assert!(!periodic.decays_at_boundary());
    }

    fn random_field(dim: usize, seeds: &[f64]) -> SampledField {
        let g = GridSpec::new(dim, 16, 3.0).unwrap();
        let values = (0..g.len())
            .map(|i| {
                let a = seeds[i % seeds.len()] * (i as f64 + 1.0).sin();
                let b = seeds[(i * 7 + 3) % seeds.len()] * (0.3 * i as f64).cos();
                Complex64::new(a, b)
            })
            .collect();
        SampledField::new(g, values).unwrap()
    }

    proptest! {
        #[test]
        fn shift_isometry(seeds in prop::collection::vec(-5.0f64..5.0, 8), z0 in -40i64..40, z1 in -40i64..40, dim in 1usize..=2) {
            let f = random_field(dim, &seeds);
            let g = shift(&f, [z0, z1]);
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                let a = f.lp_norm(p).unwrap();
                let b = g.lp_norm(p).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            }
        }

        #[test]
        fn homogeneity_and_triangle(seeds in prop::collection::vec(-5.0f64..5.0, 8), other in prop::collection::vec(-5.0f64..5.0, 8), c in -10.0f64..10.0) {
            let f = random_field(1, &seeds);
            let g = random_field(1, &other);
            for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
                let nf = f.lp_norm(p).unwrap();
                let scaled = f.scale(Complex64::new(c, 0.0)).lp_norm(p).unwrap();
                prop_assert!((scaled - c.abs() * nf).abs() <= 1e-12 * (c.abs() * nf).max(1e-300));
                let sum = f.add(&g).unwrap().lp_norm(p).unwrap();
                prop_assert!(sum <= nf + g.lp_norm(p).unwrap() + 1e-10);
            }
        }

        #[test]
        fn difference_power_matches_explicit_shift(seeds in prop::collection::vec(-5.0f64..5.0, 8), z0 in -20i64..20, z1 in -20i64..20, dim in 1usize..=2) {
            let f = random_field(dim, &seeds);
            let explicit = shift(&f, [z0, z1]).sub(&f).unwrap().lp_norm(1.5).unwrap().powf(1.5);
            let fast = shift_difference_power(&f, [z0, z1], 1.5);
            prop_assert!((explicit - fast).abs() <= 1e-10 * explicit.max(1e-12));
        }
    }
}
