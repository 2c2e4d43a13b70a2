//! Lattice quadrature of the Gagliardo double integral.
//!
//! Writing `D(z) = ‖f(· + z) - f‖_p^p`, the seminorm is `∫ D(z) |z|^{-N-sp} dz`.
//! `D` does not depend on `s`, so a [`DifferenceProfile`] holds it once and
//! [`DifferenceProfile::evaluate`] is cheap for every `s` of a sweep.
//!
//! Near the origin `D(z) ≈ Ĝ(ẑ)|z|^p` with `Ĝ(ω) = ∫|∇f·ω|^p`. That model is
//! subtracted on the lattice inside a square window and its exact integral over
//! the window added back, which removes the leading lattice error of the
//! singular integrand.

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_exponent, SeminormValue};
use crate::error::{Error, Result};
use crate::field::spectral::{spectral_gradient, top_third_energy_fraction};
use crate::field::{forward_spectrum, lp_norm, shift, shift_difference_power, sphere_measure};
use crate::field::{GridSpec, SampledField, RESOLUTION_LIMIT};
use crate::fraclap::{check_cutoff, for_each_lattice_point, window_cells};
use crate::quadrature::{power_over_exponent, SquareAngularRule};

/// Periods over which the far field of a periodic 1D field is summed explicitly.
const FAR_PERIODS: usize = 64;
/// Residue stride cap for the mean of `D` over the 2D torus.
const MEAN_RESIDUES_PER_AXIS: usize = 16;
const ANGULAR_POINTS_PER_OCTANT: usize = 16;

#[derive(Clone, Debug)]
enum FarField {
    /// `D(z) → 2‖f‖_p^p` past the support.
    Localized,
    /// 1D periodic field: `D` for every residue, summed over many periods.
    Periodic1d { residues: Vec<f64>, mean: f64 },
    /// 2D periodic field: `D` replaced by its torus mean past the cutoff.
    Periodic2d { mean: f64 },
}

/// `s`-independent ingredients of the Gagliardo quadrature for fixed `(f, p, z_cut)`.
#[derive(Clone, Debug)]
pub struct DifferenceProfile {
    grid: GridSpec,
    p: f64,
    z_cut: f64,
    /// `(|z|, D(z))` for every nonzero lattice point with `|z| ≤ z_cut`.
    near: Vec<(f64, f64)>,
    /// `(|z|, Ĝ(ẑ))` for every nonzero lattice point of the correction window.
    window: Vec<(f64, f64)>,
    half_width: f64,
    /// `Ĝ` at the angular rule nodes (2D) or the single value `‖f'‖_p^p` (1D).
    model: Vec<f64>,
    rule: Option<SquareAngularRule>,
    norm_pow: f64,
    /// Equal-volume radius of the cells covered by the near sum.
    covered_radius: f64,
    far: FarField,
}

fn gradient_components(f: &SampledField) -> Vec<SampledField> {
    let spectrum = forward_spectrum(f);
    if top_third_energy_fraction(&spectrum) < RESOLUTION_LIMIT {
        return spectral_gradient(&spectrum);
    }
    // under-resolved (kinks): periodic central differences
    let grid = *f.grid();
    let inv = Complex64::new(0.5 / grid.spacing(), 0.0);
    (0..grid.dim())
        .map(|axis| {
            let mut e = [0i64; 2];
            e[axis] = 1;
            let fwd = shift(f, e);
            e[axis] = -1;
            fwd.sub(&shift(f, e)).unwrap().scale(inv)
        })
        .collect()
}

/// `∫ |∇f · ω|^p` for a unit direction `ω`.
fn directional_power(components: &[SampledField], omega: [f64; 2], p: f64) -> f64 {
    let grid = components[0].grid();
    let sum: f64 = (0..grid.len())
        .map(|i| {
            let d: Complex64 = components.iter().zip(omega).map(|(c, w)| c.values()[i] * w).sum();
            d.norm().powf(p)
        })
        .sum();
    grid.cell_volume() * sum
}

fn lattice_norm(h: f64, m: [i64; 2]) -> f64 {
    h * ((m[0] * m[0] + m[1] * m[1]) as f64).sqrt()
}

/// Representative of `±m` with the first nonzero coordinate positive.
fn is_canonical(m: [i64; 2]) -> bool {
    m[0] > 0 || (m[0] == 0 && m[1] > 0)
}

impl DifferenceProfile {
    pub fn new(f: &SampledField, p: f64, z_cut: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("p = {p} not in (1, ∞)")));
        }
        let grid = *f.grid();
        check_cutoff(&grid, z_cut)?;
        let dim = grid.dim();
        let n = grid.points_per_axis();
        let h = grid.spacing();
        let radius_cells = z_cut / h + 1e-9;

        let mut canonical = Vec::new();
        for_each_lattice_point(dim, radius_cells, |m| {
            if is_canonical(m) {
                canonical.push(m);
            }
        });
        let localized = f.decays_at_boundary();

        // D over every residue is only needed (and cheap) in 1D
        let residues = (dim == 1).then(|| {
            let half: Vec<f64> = (0..=n / 2)
                .into_par_iter()
                .map(|r| shift_difference_power(f, [r as i64, 0], p))
                .collect();
            (0..n).map(|r| half[r.min(n - r)]).collect::<Vec<f64>>()
        });
        let near: Vec<(f64, f64)> = match &residues {
            Some(table) => canonical
                .iter()
                .flat_map(|m| {
                    let d = table[m[0].rem_euclid(n as i64) as usize];
                    [(lattice_norm(h, *m), d); 2]
                })
                .collect(),
            None => canonical
                .par_iter()
                .map(|m| (lattice_norm(h, *m), shift_difference_power(f, *m, p)))
                .collect::<Vec<_>>()
                .into_iter()
                .flat_map(|pair| [pair; 2])
                .collect(),
        };

        let covered_radius = ((near.len() + 1) as f64 * grid.cell_volume() / grid.ball_volume())
            .powf(1.0 / dim as f64);

        let components = gradient_components(f);
        let k = window_cells(&grid, z_cut) as i64;
        let half_width = (k as f64 + 0.5) * h;
        let mut window_points = Vec::new();
        for_each_lattice_point(dim, k as f64 * (dim as f64).sqrt() + 1e-9, |m| {
            if m[0].abs() <= k && m[1].abs() <= k && is_canonical(m) {
                window_points.push(m);
            }
        });
        let (model, rule) = if dim == 1 {
            (vec![directional_power(&components, [1.0, 0.0], p)], None)
        } else {
            let rule = SquareAngularRule::new(ANGULAR_POINTS_PER_OCTANT);
            let model = rule
                .angles
                .par_iter()
                .map(|t| directional_power(&components, [t.cos(), t.sin()], p))
                .collect();
            (model, Some(rule))
        };
        let window: Vec<(f64, f64)> = window_points
            .par_iter()
            .map(|m| {
                let r = lattice_norm(h, *m);
                let g = if dim == 1 {
                    model[0]
                } else {
                    directional_power(&components, [m[0] as f64 * h / r, m[1] as f64 * h / r], p)
                };
                (r, g)
            })
            .collect::<Vec<_>>()
            .into_iter()
            .flat_map(|pair| [pair; 2])
            .collect();

        let norm_pow = lp_norm(f, p)?.powf(p);
        let far = if localized {
            FarField::Localized
        } else if let Some(residues) = residues {
            let mean = residues.iter().sum::<f64>() / n as f64;
            FarField::Periodic1d { residues, mean }
        } else {
            let stride = (n / MEAN_RESIDUES_PER_AXIS).max(1);
            let picks: Vec<[i64; 2]> = (0..n)
                .step_by(stride)
                .flat_map(|a| (0..n).step_by(stride).map(move |b| [a as i64, b as i64]))
                .collect();
            let total: f64 = picks.par_iter().map(|m| shift_difference_power(f, *m, p)).collect::<Vec<_>>().iter().sum();
            FarField::Periodic2d { mean: total / picks.len() as f64 }
        };

        Ok(Self {
            grid,
            p,
            z_cut,
            near,
            window,
            half_width,
            model,
            rule,
            norm_pow,
            covered_radius,
            far,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn cutoff(&self) -> f64 {
        self.z_cut
    }

    /// True when the field was treated as a localized function on ℝᴺ.
    pub fn is_localized(&self) -> bool {
        matches!(self.far, FarField::Localized)
    }

    /// Near-field value, tail bracket and far-field estimate at smoothness `s`.
    pub fn evaluate(&self, s: f64) -> Result<SeminormValue> {
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("Gagliardo needs s in (0, 1), got {s}")));
        }
        let p = self.p;
        let dim = self.grid.dim();
        let hn = self.grid.cell_volume();
        let sp = s * p;
        let exponent = -(dim as f64) - sp;

        let lattice: f64 = self.near.iter().map(|(r, d)| d * r.powf(exponent)).sum::<f64>() * hn;
        let model_lattice: f64 =
            self.window.iter().map(|(r, g)| g * r.powf(p + exponent)).sum::<f64>() * hn;
        let alpha = p * (1.0 - s);
        let model_exact = match &self.rule {
            None => 2.0 * self.model[0] * power_over_exponent(self.half_width, alpha),
            Some(rule) => rule.power_integral(&self.model, self.half_width, alpha),
        };
        let near = (lattice - model_lattice + model_exact).max(0.0);

        let sphere = sphere_measure(dim);
        let far_tail = |radius: f64, level: f64| level * sphere * radius.powf(-sp) / sp;
        let h = self.grid.spacing();
        let bracket_radius = if dim == 1 {
            self.covered_radius
        } else {
            (self.z_cut - h / std::f64::consts::SQRT_2).max(h / 2.0)
        };
        let tail_bracket = far_tail(bracket_radius, 2f64.powf(p) * self.norm_pow);
        let estimate = match &self.far {
            FarField::Localized => far_tail(self.covered_radius, 2.0 * self.norm_pow),
            FarField::Periodic1d { residues, mean } => {
                let n = residues.len();
                let first = self.near.len() / 2 + 1;
                let last = FAR_PERIODS * n;
                let explicit: f64 = (first..=last)
                    .map(|m| residues[m % n] * (m as f64 * h).powf(exponent))
                    .sum::<f64>()
                    * 2.0
                    * h;
                explicit + far_tail((last as f64 + 0.5) * h, *mean)
            }
            FarField::Periodic2d { mean } => far_tail(self.covered_radius, *mean),
        };

        Ok(SeminormValue {
            value: near.powf(1.0 / p),
            tail_bracket: tail_bracket.powf(1.0 / p),
            tail_estimate: estimate.powf(1.0 / p),
            cutoff: self.z_cut,
            p,
        })
    }
}

/// Gagliardo seminorm `[f]_{W^{s,p}}` over `|z| ≤ z_cut`.
pub fn gagliardo(f: &SampledField, s: f64, p: f64, z_cut: f64) -> Result<SeminormValue> {
    check_exponent(p)?;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::ParameterOutOfRange(format!("Gagliardo needs s in (0, 1), got {s}")));
    }
    DifferenceProfile::new(f, p, z_cut)?.evaluate(s)
}
