//! Numerical laboratory for fractional Sobolev (Gagliardo), Triebel-Lizorkin and
//! Bessel-potential seminorms of functions sampled on a periodic grid.
//!
//! The torus `[-L/2, L/2)^N`, `N ∈ {1, 2}`, stands in for ℝᴺ. Localized test
//! functions are treated as functions on ℝᴺ; genuinely periodic ones (single
//! frequencies, random band-limited fields) as functions on the torus.

pub mod error;
pub mod experiments;
pub mod field;
pub mod filterbank;
pub mod fraclap;
pub mod norms;
mod quadrature;

pub use error::{Error, Result};
pub use norms::{
    bessel_seminorm, gagliardo, BandProfile, mixed_sum_upper, triebel_lizorkin, DifferenceProfile, MixedSums, NormSpec,
    SeminormValue,
};
pub use fraclap::{c_const, frac_laplacian_integral, frac_laplacian_spectral, k_const};
pub use field::{
    forward_spectrum, gradient_lp_norm, inverse_spectrum, lp_norm, sample, shift, Descriptor,
    GridSpec, SampledField, SpectralField,
};
