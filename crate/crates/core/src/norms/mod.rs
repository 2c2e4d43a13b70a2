//! Gagliardo, Triebel-Lizorkin and Bessel-potential seminorms, plus the two
//! mixed band sums used to dominate the Gagliardo seminorm.

mod gagliardo;

pub use gagliardo::{gagliardo, DifferenceProfile};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{forward_spectrum, lp_norm, SampledField};
use crate::field::lp_norm_of_moduli;
use crate::filterbank::Filterbank;
use crate::fraclap::frac_laplacian_spectral;

/// Smoothness, integrability and fine index of a seminorm. `q = None` for the
/// Gagliardo scale; `q = Some(f64::INFINITY)` selects the supremum over bands.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    pub s: f64,
    pub p: f64,
    pub q: Option<f64>,
}

fn conjugate(x: f64) -> f64 {
    if x == 1.0 {
        f64::INFINITY
    } else if x.is_infinite() {
        1.0
    } else {
        x / (x - 1.0)
    }
}

impl NormSpec {
    /// Spec for the Gagliardo seminorm, `s ∈ (0, 1)`.
    pub fn gagliardo(s: f64, p: f64) -> Result<Self> {
        check_exponent(p)?;
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::ParameterOutOfRange(format!("Gagliardo needs s in (0, 1), got {s}")));
        }
        Ok(Self { s, p, q: None })
    }

    /// Spec for spectral seminorms, `s ∈ [0, 2)`, `q ∈ [1, ∞]`.
    pub fn spectral(s: f64, p: f64, q: f64) -> Result<Self> {
        check_exponent(p)?;
        check_smoothness(s)?;
        check_fine_index(q)?;
        Ok(Self { s, p, q: Some(q) })
    }

    pub fn p_conjugate(&self) -> f64 {
        conjugate(self.p)
    }

    pub fn q_conjugate(&self) -> Option<f64> {
        self.q.map(conjugate)
    }
}

/// A quadrature value of a seminorm with its far-field accounting.
///
/// `value` covers `|z| ≤ cutoff`. The continuum seminorm lies in
/// `[value, (value^p + tail_bracket^p)^{1/p}]` up to quadrature error;
/// `tail_estimate` is the modelled far-field contribution and
/// [`completed`](Self::completed) folds it in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormValue {
    pub value: f64,
    pub tail_bracket: f64,
    pub tail_estimate: f64,
    pub cutoff: f64,
    pub p: f64,
}

impl SeminormValue {
    /// Spectral seminorms carry no tail.
    pub fn exact(value: f64, p: f64) -> Self {
        Self { value, tail_bracket: 0.0, tail_estimate: 0.0, cutoff: 0.0, p }
    }

    pub fn completed(&self) -> f64 {
        (self.value.powf(self.p) + self.tail_estimate.powf(self.p)).powf(1.0 / self.p)
    }

    /// Upper end of the guaranteed bracket.
    pub fn upper(&self) -> f64 {
        (self.value.powf(self.p) + self.tail_bracket.powf(self.p)).powf(1.0 / self.p)
    }
}

pub(crate) fn check_exponent(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("p = {p} not in (1, ∞)")))
    }
}

fn check_smoothness(s: f64) -> Result<()> {
    if (0.0..2.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("s = {s} not in [0, 2)")))
    }
}

fn check_fine_index(q: f64) -> Result<()> {
    if q >= 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange(format!("q = {q} not in [1, ∞]")))
    }
}

fn check_grid(f: &SampledField, fb: &Filterbank) -> Result<()> {
    if f.grid() != fb.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Band projections `Δ_j f` for every band of `fb`, after the leakage guard.
fn bands(f: &SampledField, fb: &Filterbank) -> Result<Vec<(i32, SampledField)>> {
    check_grid(f, fb)?;
    let spectrum = forward_spectrum(f);
    fb.check_leakage(&spectrum)?;
    Ok(fb.band_fields(&spectrum))
}

/// `ℓ^q` norm of `values` (`q = ∞` gives the max).
fn sequence_norm(values: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q.is_infinite() {
        values.fold(0.0, f64::max)
    } else if q == 2.0 {
        values.map(|v| v * v).sum::<f64>().sqrt()
    } else {
        values.map(|v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

/// Pointwise band moduli `|Δ_j f(x)|` of one field, reusable across `(s, p, q)`.
#[derive(Clone, Debug)]
pub struct BandProfile {
    cell_volume: f64,
    len: usize,
    bands: Vec<(i32, Vec<f64>)>,
}

impl BandProfile {
    pub fn new(f: &SampledField, fb: &Filterbank) -> Result<Self> {
        let bands = bands(f, fb)?
            .into_iter()
            .map(|(j, b)| (j, b.values().iter().map(|v| v.norm()).collect()))
            .collect();
        Ok(Self { cell_volume: f.grid().cell_volume(), len: f.grid().len(), bands })
    }

    /// `[f]_{F^s_{p,q}}` from the stored moduli.
    pub fn triebel_lizorkin(&self, s: f64, p: f64, q: f64) -> Result<f64> {
        NormSpec::spectral(s, p, q)?;
        let weights: Vec<f64> = self.bands.iter().map(|(j, _)| 2f64.powf(*j as f64 * s)).collect();
        let pointwise: Vec<f64> = (0..self.len)
            .into_par_iter()
            .map(|i| sequence_norm(self.bands.iter().zip(&weights).map(|((_, b), w)| w * b[i]), q))
            .collect();
        Ok(lp_norm_of_moduli(pointwise.into_iter(), p, self.cell_volume))
    }
}

/// `[f]_{F^s_{p,q}}` over the bands of `fb`: the `ℓ^q` norm over `j` of
/// `2^{js}|Δ_j f(x)|` at each grid point, then the `Lᵖ` norm in `x`.
pub fn triebel_lizorkin(f: &SampledField, fb: &Filterbank, s: f64, p: f64, q: f64) -> Result<f64> {
    NormSpec::spectral(s, p, q)?;
    BandProfile::new(f, fb)?.triebel_lizorkin(s, p, q)
}

/// `(Σ_j 2^{jsp} ‖Δ_j f‖_p^p)^{1/p}`, the `q = p` seminorm computed band by band.
pub fn triebel_lizorkin_by_bands(f: &SampledField, fb: &Filterbank, s: f64, p: f64) -> Result<f64> {
    NormSpec::spectral(s, p, p)?;
    let total: f64 = bands(f, fb)?
        .iter()
        .map(|(j, b)| Ok(2f64.powf(*j as f64 * s * p) * lp_norm(b, p)?.powf(p)))
        .sum::<Result<f64>>()?;
    Ok(total.powf(1.0 / p))
}

/// `‖(-Δ)^{s/2} f‖_p`, DC removed.
pub fn bessel_seminorm(f: &SampledField, s: f64, p: f64) -> Result<f64> {
    check_exponent(p)?;
    check_smoothness(s)?;
    lp_norm(&frac_laplacian_spectral(f, s)?, p)
}

/// The two mixed sums, each `(Σ_k ∫ (Σ_j |w_j 2^{ks} Δ_{k+j} f|²)^{p/2})^{1/p}`:
/// `high` over `j ≥ 0` with `w_j = 1`, `low` over `j ≤ 0` with `w_j = 2^j`.
/// Indices with `k + j` outside the band range are dropped.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedSums {
    pub high: f64,
    pub low: f64,
}

pub fn mixed_sum_upper(f: &SampledField, fb: &Filterbank, s: f64, p: f64) -> Result<MixedSums> {
    check_exponent(p)?;
    check_smoothness(s)?;
    let bands = bands(f, fb)?;
    let grid = *f.grid();
    let (j_min, j_max) = (fb.j_min(), fb.j_max());
    let band = |k: i32| &bands[(k - j_min) as usize].1;

    let per_k: Vec<(f64, f64)> = (j_min..=j_max)
        .into_par_iter()
        .map(|k| {
            let scale = 2f64.powf(k as f64 * s);
            let high = (0..grid.len()).map(|i| {
                let sq: f64 = (k..=j_max).map(|m| band(m).values()[i].norm_sqr()).sum();
                scale * sq.sqrt()
            });
            let high = lp_norm_of_moduli(high, p, grid.cell_volume()).powf(p);
            let low = (0..grid.len()).map(|i| {
                let sq: f64 = (j_min..=k)
                    .map(|m| 4f64.powi(m - k) * band(m).values()[i].norm_sqr())
                    .sum();
                scale * sq.sqrt()
            });
            let low = lp_norm_of_moduli(low, p, grid.cell_volume()).powf(p);
            (high, low)
        })
        .collect();
    let high: f64 = per_k.iter().map(|t| t.0).sum();
    let low: f64 = per_k.iter().map(|t| t.1).sum();
    Ok(MixedSums { high: high.powf(1.0 / p), low: low.powf(1.0 / p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{sample, Descriptor, GridSpec};
    use crate::filterbank::{build_partition, Profile};
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn grid_1d() -> GridSpec {
        GridSpec::new(1, 1024, 40.0).unwrap()
    }

    /// Single frequency with `|ξ| = 2^{j0}` on a grid where that is a lattice frequency.
    fn single_band(j0: i32) -> (SampledField, Filterbank) {
        let grid = GridSpec::new(1, 256, 2.0 * std::f64::consts::PI).unwrap();
        let f = sample(&Descriptor::SingleFrequency { mode: [1 << j0, 0] }, &grid).unwrap();
        (f, Filterbank::for_grid(&grid, Profile::default()).unwrap())
    }

    #[test]
    fn conjugates() {
        let spec = NormSpec::spectral(0.5, 3.0, 1.0).unwrap();
        assert_eq!(spec.p_conjugate(), 1.5);
        assert_eq!(spec.q_conjugate(), Some(f64::INFINITY));
        assert_eq!(NormSpec::spectral(0.5, 2.0, f64::INFINITY).unwrap().q_conjugate(), Some(1.0));
        assert!(NormSpec::gagliardo(1.0, 2.0).is_err());
        assert!(NormSpec::spectral(0.5, 1.0, 2.0).is_err());
        assert!(NormSpec::spectral(0.5, 2.0, 0.5).is_err());
    }

    #[test]
    fn single_frequency_collapses_to_one_band() {
        for j0 in [0, 2, 4] {
            let (f, fb) = single_band(j0);
            let norm = f.lp_norm(3.0).unwrap();
            for (s, q) in [(0.3, 2.0), (0.8, 3.0), (1.5, f64::INFINITY)] {
                let expected = 2f64.powf(j0 as f64 * s) * norm;
                let got = triebel_lizorkin(&f, &fb, s, 3.0, q).unwrap();
                assert!((got - expected).abs() <= 1e-10 * expected, "j0={j0} s={s}");
            }
            let xi = 2f64.powi(j0);
            let bessel = bessel_seminorm(&f, 0.7, 3.0).unwrap();
            assert!((bessel - xi.powf(0.7) * norm).abs() <= 1e-10 * bessel);
        }
    }

    #[test]
    fn p_equals_q_paths_agree() {
        let grid = grid_1d();
        let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
        for seed in [1, 2, 3] {
            let f = sample(&Descriptor::random(seed), &grid).unwrap();
            for (s, p) in [(0.2, 2.0), (0.7, 1.5), (0.9, 3.0)] {
                let a = triebel_lizorkin(&f, &fb, s, p, p).unwrap();
                let b = triebel_lizorkin_by_bands(&f, &fb, s, p).unwrap();
                assert!((a - b).abs() <= 1e-10 * b);
            }
        }
    }

    #[test]
    fn q_monotone_on_random_fields() {
        let grid = grid_1d();
        let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
        let f = sample(&Descriptor::random(11), &grid).unwrap();
        let mut last = f64::INFINITY;
        for q in [1.0, 1.5, 2.0, 3.0, 8.0, f64::INFINITY] {
            let v = triebel_lizorkin(&f, &fb, 0.4, 2.5, q).unwrap();
            assert!(v <= last + 1e-10, "q={q}");
            last = v;
        }
    }

    #[test]
    fn f22_against_bessel() {
        let grid = GridSpec::new(1, 4096, 40.0).unwrap();
        let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
        for desc in [Descriptor::gaussian(), Descriptor::random(5)] {
            let f = sample(&desc, &grid).unwrap();
            let ratios: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9]
                .iter()
                .map(|&s| triebel_lizorkin(&f, &fb, s, 2.0, 2.0).unwrap() / bessel_seminorm(&f, s, 2.0).unwrap())
                .collect();
            for r in &ratios {
                assert!((0.5..=2.0).contains(r), "{desc} ratio {r}");
            }
        }
    }

    #[test]
    fn bessel_of_gaussian_closed_form() {
        // the frequency lattice sum carries an O((2π/L)²) bias from the kink of |ξ| at 0
        let grid = GridSpec::new(1, 8192, 200.0).unwrap();
        let f = sample(&Descriptor::gaussian(), &grid).unwrap();
        assert!((bessel_seminorm(&f, 0.5, 2.0).unwrap() - 1.0).abs() < 1e-4);
        // s = 0 removes only the mean
        let random = sample(&Descriptor::random(3), &grid).unwrap();
        let direct = random.lp_norm(1.7).unwrap();
        assert!((bessel_seminorm(&random, 0.0, 1.7).unwrap() - direct).abs() <= 1e-10 * direct);
    }

    #[test]
    fn leakage_is_refused() {
        let grid = grid_1d();
        let fb = build_partition(&grid, -2, 2, Profile::default()).unwrap();
        let f = sample(&Descriptor::random(1), &GridSpec::new(1, 1024, 40.0).unwrap()).unwrap();
        assert!(matches!(triebel_lizorkin(&f, &fb, 0.5, 2.0, 2.0), Err(Error::SpectralLeakage { .. })));
    }

    #[test]
    fn mixed_sums_of_zero_and_single_band() {
        let grid = grid_1d();
        let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
        let zero = mixed_sum_upper(&SampledField::zeros(grid), &fb, 0.5, 2.0).unwrap();
        assert_eq!((zero.high, zero.low), (0.0, 0.0));

        let j0 = 2;
        let (f, fb) = single_band(j0);
        let (s, p) = (0.4, 3.0);
        let norm_p = f.lp_norm(p).unwrap().powf(p);
        let high: f64 = (fb.j_min()..=j0).map(|k| 2f64.powf(k as f64 * s * p)).sum::<f64>() * norm_p;
        let low: f64 = (j0..=fb.j_max())
            .map(|k| 2f64.powf((j0 - k) as f64 * p + k as f64 * s * p))
            .sum::<f64>()
            * norm_p;
        let got = mixed_sum_upper(&f, &fb, s, p).unwrap();
        assert!((got.high - high.powf(1.0 / p)).abs() <= 1e-10 * got.high);
        assert!((got.low - low.powf(1.0 / p)).abs() <= 1e-10 * got.low);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn spectral_norms_are_seminorms(seed_a in 0u64..500, seed_b in 0u64..500, c in -4.0f64..4.0, s in 0.0f64..1.9, p in 1.1f64..5.0, q in 1.0f64..6.0) {
            let grid = GridSpec::new(1, 256, 20.0).unwrap();
            let fb = Filterbank::for_grid(&grid, Profile::default()).unwrap();
            let a = sample(&Descriptor::random(seed_a), &grid).unwrap();
            let b = sample(&Descriptor::random(seed_b), &grid).unwrap();
            let ca = a.scale(Complex64::new(c, 0.0));
            let sum = a.add(&b).unwrap();
            let tl = |f: &SampledField| triebel_lizorkin(f, &fb, s, p, q).unwrap();
            let bs = |f: &SampledField| bessel_seminorm(f, s, p).unwrap();
            prop_assert!((tl(&ca) - c.abs() * tl(&a)).abs() <= 1e-10 * tl(&a));
            prop_assert!((bs(&ca) - c.abs() * bs(&a)).abs() <= 1e-10 * bs(&a));
            prop_assert!(tl(&sum) <= tl(&a) + tl(&b) + 1e-8);
            prop_assert!(bs(&sum) <= bs(&a) + bs(&b) + 1e-8);
        }
    }
}
