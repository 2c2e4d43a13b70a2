//! Fractional Laplacian in spectral and singular-integral form, and the two
//! explicit constants `c_{N,s}` and `k(p, N)`.
//!
//! `frac_laplacian_spectral(f, s)` applies the multiplier `|ξ|^s`.
//! `frac_laplacian_integral(f, σ, z_cut)` takes the *order* `σ ∈ (0, 2)` and uses
//! `c_{N,σ/2}`, so both agree when `s = σ`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::field::spectral::{check_resolved, dft_in_place, top_third_energy_fraction};
use crate::field::{forward_spectrum, inverse_spectrum, sphere_measure, GridSpec, SampledField};
use crate::field::{RESOLUTION_LIMIT, SpectralField};
use crate::quadrature::{adaptive_simpson, power_over_exponent, SquareAngularRule};

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum ConstKind {
    Laplacian,
    Sphere,
}

type ConstCache = RwLock<HashMap<(ConstKind, usize, u64), f64>>;

fn cached(kind: ConstKind, dim: usize, x: f64, eval: impl FnOnce() -> f64) -> f64 {
    static CACHE: OnceLock<ConstCache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    let key = (kind, dim, x.to_bits());
    if let Some(v) = cache.read().unwrap_or_else(|e| e.into_inner()).get(&key) {
        return *v;
    }
    // two threads may both evaluate; the value is deterministic so either insert wins
    let v = eval();
    *cache.write().unwrap_or_else(|e| e.into_inner()).entry(key).or_insert(v)
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 1 || dim == 2 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("dimension {dim} not in {{1, 2}}")))
    }
}

/// Normalizing constant of the singular-integral fractional Laplacian of order `2s`,
/// `½ 4^s Γ(N/2 + s) / (π^{N/2} |Γ(-s)|)`, with `|Γ(-s)| = π / (sin(πs) Γ(1+s))`.
pub fn c_const(dim: usize, s: f64) -> Result<f64> {
    check_dim(dim)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("c_const needs s in (0, 1), got {s}")));
    }
    Ok(cached(ConstKind::Laplacian, dim, s, || {
        let half_n = dim as f64 / 2.0;
        let inv_abs_gamma_neg = (PI * s).sin() * gamma(1.0 + s) / PI;
        0.5 * 4f64.powf(s) * gamma(half_n + s) * inv_abs_gamma_neg / PI.powf(half_n)
    }))
}

/// `k(p, N) = ∫_{S^{N-1}} |e·ω|^p dω`.
pub fn k_const(p: f64, dim: usize) -> Result<f64> {
    check_dim(dim)?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::ParameterOutOfRange(format!("k_const needs finite p >= 1, got {p}")));
    }
    if dim == 1 {
        return Ok(2.0);
    }
    Ok(cached(ConstKind::Sphere, dim, p, || {
        4.0 * adaptive_simpson(&|t: f64| t.cos().powf(p), 0.0, PI / 2.0, 1e-13)
    }))
}

fn check_spectral_order(s: f64) -> Result<()> {
    if !(0.0..2.0).contains(&s) {
        return Err(Error::ParameterOutOfRange(format!("spectral order {s} not in [0, 2)")));
    }
    Ok(())
}

/// `|ξ|^s` applied to a spectrum with the DC coefficient zeroed.
pub(crate) fn homogeneous_multiplier(spectrum: &SpectralField, s: f64) -> SpectralField {
    spectrum.apply_radial(|xi| if xi == 0.0 { 0.0 } else { xi.powf(s) })
}

/// `(-Δ)^{s/2} f` by the multiplier `|ξ|^s`, DC removed.
pub fn frac_laplacian_spectral(f: &SampledField, s: f64) -> Result<SampledField> {
    check_spectral_order(s)?;
    let spectrum = forward_spectrum(f);
    check_resolved(&spectrum)?;
    Ok(inverse_spectrum(&homogeneous_multiplier(&spectrum, s)))
}

/// Integral-form output. `tail_bracket` bounds the modulus of everything the
/// operator picks up from `|z| > cutoff`; that far part is still included in
/// `field`, evaluated against the periodic extension of `f`.
#[derive(Clone, Debug)]
pub struct IntegralLaplacian {
    pub field: SampledField,
    pub tail_bracket: f64,
    pub cutoff: f64,
}

/// Periods of far field folded into the kernel, per dimension.
const FAR_PERIODS: [usize; 2] = [64, 4];
/// Largest half-width, in cells, of the square near-field correction window.
pub(crate) const MAX_WINDOW_CELLS: usize = 16;

/// Half-width `K` (in cells) of the correction window `max|m_a| ≤ K` whose
/// corners stay inside `|z| ≤ z_cut`.
pub(crate) fn window_cells(grid: &GridSpec, z_cut: f64) -> usize {
    let reach = z_cut / (grid.spacing() * (grid.dim() as f64).sqrt()) - 0.5;
    if reach < 0.0 {
        0
    } else {
        (reach.floor() as usize).min(MAX_WINDOW_CELLS)
    }
}

pub(crate) fn check_cutoff(grid: &GridSpec, z_cut: f64) -> Result<()> {
    let half_period = grid.period() / 2.0;
    if !(z_cut > 0.0) || !z_cut.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("cutoff {z_cut} must be positive")));
    }
    if z_cut > half_period * (1.0 + 1e-12) {
        return Err(Error::CutoffExceedsHalfPeriod { z_cut, half_period });
    }
    Ok(())
}

/// Calls `visit(m)` for every nonzero lattice point with `|m| ≤ radius`.
pub(crate) fn for_each_lattice_point(dim: usize, radius: f64, mut visit: impl FnMut([i64; 2])) {
    let r = radius.floor() as i64;
    let r2 = radius * radius;
    if dim == 1 {
        for m in 1..=r {
            visit([m, 0]);
            visit([-m, 0]);
        }
        return;
    }
    for m0 in -r..=r {
        let span = (r2 - (m0 * m0) as f64).max(0.0).sqrt().floor() as i64;
        for m1 in -span..=span {
            if m0 != 0 || m1 != 0 {
                visit([m0, m1]);
            }
        }
    }
}

/// Laplacian used by the near-field correction: spectral when resolved, a
/// second-difference stencil otherwise.
fn correction_laplacian(f: &SampledField) -> SampledField {
    let spectrum = forward_spectrum(f);
    if top_third_energy_fraction(&spectrum) < RESOLUTION_LIMIT {
        return inverse_spectrum(&spectrum.apply_radial(|xi| -xi * xi));
    }
    let grid = *f.grid();
    let h2 = grid.spacing().powi(2);
    let mut out = f.scale(Complex64::new(-2.0 * grid.dim() as f64 / h2, 0.0));
    for axis in 0..grid.dim() {
        let mut e = [0i64; 2];
        e[axis] = 1;
        let fwd = crate::field::shift(f, e);
        e[axis] = -1;
        let bwd = crate::field::shift(f, e);
        let inv = Complex64::new(1.0 / h2, 0.0);
        out = out.add(&fwd.add(&bwd).unwrap().scale(inv)).unwrap();
    }
    out
}

/// Singular-integral fractional Laplacian of order `sigma`,
/// `c_{N,σ/2} ∫ (2f(x) - f(x+z) - f(x-z)) / |z|^{N+σ} dz`.
///
/// The lattice sum runs over all `z` out to many periods through a folded periodic
/// kernel, applied by FFT convolution. Inside a square window around the origin the
/// second-order Taylor model `-zᵀ∇²f z` is subtracted on the lattice and added back
/// exactly. The remainder past the folded range uses the torus mean.
pub fn frac_laplacian_integral(f: &SampledField, sigma: f64, z_cut: f64) -> Result<IntegralLaplacian> {
    if !(sigma > 0.0 && sigma < 2.0) {
        return Err(Error::ParameterOutOfRange(format!("order {sigma} not in (0, 2)")));
    }
    let grid = *f.grid();
    check_cutoff(&grid, z_cut)?;
    let c = c_const(grid.dim(), sigma / 2.0)?;
    let dim = grid.dim();
    let n = grid.points_per_axis();
    let h = grid.spacing();
    let hn = grid.cell_volume();
    let exponent = -(dim as f64) - sigma;

    // folded kernel and its total mass
    let reach = (FAR_PERIODS[dim - 1] * n) as f64;
    let mut folded = vec![0.0f64; grid.len()];
    let mut total = 0.0;
    let mut count = 1usize;
    for_each_lattice_point(dim, reach, |m| {
        let r = h * ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
        let w = hn * r.powf(exponent);
        let i0 = m[0].rem_euclid(n as i64) as usize;
        let flat = if dim == 1 { i0 } else { i0 * n + m[1].rem_euclid(n as i64) as usize };
        folded[flat] += w;
        total += w;
        count += 1;
    });
    let far_radius = (count as f64 * hn / grid.ball_volume()).powf(1.0 / dim as f64);

    // (w ⊛ f)(x) = Σ_r w(r) f(x - r h) = Σ_r w(r) f(x + r h) since w is even
    let mut kernel: Vec<Complex64> = folded.iter().map(|&w| Complex64::new(w, 0.0)).collect();
    let mut data = f.values().to_vec();
    dft_in_place(&grid, &mut kernel, false);
    dft_in_place(&grid, &mut data, false);
    for (d, k) in data.iter_mut().zip(&kernel) {
        *d *= k / grid.len() as f64;
    }
    dft_in_place(&grid, &mut data, true);

    // window moments: lattice and exact, for the model z_1² |z|^{-N-σ}
    let k_cells = window_cells(&grid, z_cut) as i64;
    let a = (k_cells as f64 + 0.5) * h;
    let mut lattice_moment = 0.0;
    for_each_lattice_point(dim, k_cells as f64 * (dim as f64).sqrt() + 1e-9, |m| {
        if m[0].abs() <= k_cells && m[1].abs() <= k_cells {
            let z0 = m[0] as f64 * h;
            let r = h * ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt();
            lattice_moment += hn * z0 * z0 * r.powf(exponent);
        }
    });
    let beta = 2.0 - sigma;
    let exact_moment = if dim == 1 {
        2.0 * power_over_exponent(a, beta)
    } else {
        let rule = SquareAngularRule::new(16);
        let cos2: Vec<f64> = rule.angles.iter().map(|t| t.cos().powi(2)).collect();
        rule.power_integral(&cos2, a, beta)
    };
    let laplacian = correction_laplacian(f);

    let mean = f.mean();
    let far_weight = 2.0 * sphere_measure(dim) * far_radius.powf(-sigma) / sigma;
    let values: Vec<Complex64> = f
        .values()
        .iter()
        .zip(&data)
        .zip(laplacian.values())
        .map(|((&fx, &conv), &lap)| {
            let core = 2.0 * (fx * total - conv);
            let correction = lap * (lattice_moment - exact_moment);
            let far = (fx - mean) * far_weight;
            (core + correction + far) * c
        })
        .collect();
    let mut field = SampledField::new(grid, values)?;
    if f.is_real() {
        field = SampledField::from_real(grid, &field.real_parts())?;
    }
    let tail_bracket = c * 4.0 * f.peak() * sphere_measure(dim) * z_cut.powf(-sigma) / sigma;
    Ok(IntegralLaplacian { field, tail_bracket, cutoff: z_cut })
}
