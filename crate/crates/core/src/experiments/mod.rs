//! Parameter sweeps over `s` that turn the equivalence and limit statements
//! into bounded-ratio checks, plus their CSV and JSON reports.

mod report;
mod sweeps;

pub use report::{Check, FamilySummary, RatioReport, Relation, SweepRecord, SweepReport, SweepSummary};
pub use sweeps::{
    bbm_sweep, bbm_sweep_field, embedding_ratio, embedding_ratio_field, embedding_ratio_sides,
    frac_bbm_upper, frac_bbm_upper_field, mixed_sum_ratio, sobolev_sandwich, sobolev_sandwich_field,
    EmbeddingSide, FRAC_BBM_CEILING, RATIO_CEILING, RATIO_FLOOR,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Descriptor, GridSpec};
use crate::filterbank::{build_partition, default_band_range, Filterbank, Profile};
use crate::fraclap::check_cutoff;

/// Seed of the random members of the standard family unless overridden.
pub const DEFAULT_SEED: u64 = 42;
/// Number of random band-limited members of the standard family.
pub const RANDOM_MEMBERS: u64 = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Norms,
    Bbm,
    Embed,
    Sandwich,
    FracBbm,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Norms => "norms",
            ExperimentKind::Bbm => "bbm",
            ExperimentKind::Embed => "embed",
            ExperimentKind::Sandwich => "sandwich",
            ExperimentKind::FracBbm => "fracbbm",
        }
    }
}

/// `0.05, 0.10, …, 0.90, 0.95, 0.99, 0.995`.
pub fn default_s_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (1..=19).map(|k| k as f64 / 20.0).collect();
    grid.extend([0.99, 0.995]);
    grid
}

/// gaussian, smooth bump and `RANDOM_MEMBERS` seeded random band-limited fields.
pub fn standard_family(seed: u64) -> Vec<Descriptor> {
    let mut family = vec![Descriptor::gaussian(), Descriptor::smooth_bump()];
    family.extend((0..RANDOM_MEMBERS).map(|k| Descriptor::random(seed.wrapping_add(k))));
    family
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub descriptor: Descriptor,
    pub grid: GridSpec,
    pub p: f64,
    pub s_grid: Vec<f64>,
    /// Lattice cutoff radius, in units of length.
    pub z_cut: f64,
    pub j_min: i32,
    pub j_max: i32,
    pub kind: ExperimentKind,
    /// Ratio `(1 - r̄) / (1 - s)` for the reverse Sobolev bound.
    pub lambda: f64,
    pub seed: u64,
}

impl SweepConfig {
    /// Defaults: the standard `s` grid, `z_cut = 3L/8`, the grid's default band range, `Λ = 2`.
    pub fn new(kind: ExperimentKind, descriptor: Descriptor, grid: GridSpec, p: f64) -> Self {
        let (j_min, j_max) = default_band_range(&grid);
        Self {
            descriptor,
            grid,
            p,
            s_grid: default_s_grid(),
            z_cut: 0.375 * grid.period(),
            j_min,
            j_max,
            kind,
            lambda: 2.0,
            seed: DEFAULT_SEED,
        }
    }

    /// The 1D grid used throughout the acceptance runs: `n = 4096`, `L = 40`.
    pub fn standard_grid() -> GridSpec {
        GridSpec::new(1, 4096, 40.0).expect("valid grid")
    }

    pub fn validate(&self) -> Result<()> {
        GridSpec::new(self.grid.dim(), self.grid.points_per_axis(), self.grid.period())?;
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::ParameterOutOfRange(format!("p = {} not in (1, ∞)", self.p)));
        }
        if self.s_grid.is_empty() {
            return Err(Error::ParameterOutOfRange("empty s grid".into()));
        }
        for (i, &s) in self.s_grid.iter().enumerate() {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::ParameterOutOfRange(format!("s = {s} not in (0, 1)")));
            }
            if i > 0 && s <= self.s_grid[i - 1] {
                return Err(Error::ParameterOutOfRange("s grid must be strictly increasing".into()));
            }
        }
        if !(self.lambda > 1.0) {
            return Err(Error::ParameterOutOfRange(format!("Λ = {} must exceed 1", self.lambda)));
        }
        check_cutoff(&self.grid, self.z_cut)?;
        build_partition(&self.grid, self.j_min, self.j_max, Profile::default())?;
        Ok(())
    }

    pub(crate) fn filterbank(&self) -> Result<Filterbank> {
        build_partition(&self.grid, self.j_min, self.j_max, Profile::default())
    }

    /// Same configuration for another test function.
    pub fn with_descriptor(&self, descriptor: Descriptor) -> Self {
        Self { descriptor, ..self.clone() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_shape() {
        let g = default_s_grid();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.05);
        assert_eq!(g[18], 0.95);
        assert_eq!(&g[19..], &[0.99, 0.995]);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn family_is_seeded() {
        let a = standard_family(7);
        assert_eq!(a.len(), 12);
        assert_eq!(a, standard_family(7));
        assert_ne!(a, standard_family(8));
    }

    #[test]
    fn validation() {
        let grid = SweepConfig::standard_grid();
        let cfg = SweepConfig::new(ExperimentKind::Bbm, Descriptor::gaussian(), grid, 2.0);
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.z_cut, 15.0);
        let mut bad = cfg.clone();
        bad.s_grid = vec![0.5, 0.4];
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.s_grid = vec![0.5, 1.0];
        assert!(bad.validate().is_err());
        let mut bad = cfg.clone();
        bad.z_cut = 30.0;
        assert!(matches!(bad.validate(), Err(Error::CutoffExceedsHalfPeriod { .. })));
        let mut bad = cfg;
        bad.p = 1.0;
        assert!(bad.validate().is_err());
    }
}
