use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{Check, RatioReport, SweepRecord, SweepReport, SweepSummary};
use super::{ExperimentKind, SweepConfig};
use crate::error::{Error, Result};
use crate::field::{gradient_lp_norm, lp_norm, sample, SampledField};
use crate::fraclap::k_const;
use crate::norms::{bessel_seminorm, mixed_sum_upper, BandProfile, DifferenceProfile};

/// Generous ceiling on every observed equivalence constant.
pub const RATIO_CEILING: f64 = 100.0;
/// Floor on normalized lower-side ratios.
pub const RATIO_FLOOR: f64 = 1e-2;
/// Ceiling on the fractional BBM sup ratio.
pub const FRAC_BBM_CEILING: f64 = 100.0;
const LIMIT_TOLERANCE: f64 = 0.05;
const NEAR_ONE_TOLERANCE: f64 = 0.10;
const BAND_WIDTH_LIMIT: f64 = 10.0;

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 && a == 0.0 {
        0.0
    } else {
        a / b
    }
}

fn column(name: &str, doc: &str) -> (String, String) {
    (name.to_string(), doc.to_string())
}

fn prepare(cfg: &SweepConfig) -> Result<SampledField> {
    cfg.validate()?;
    sample(&cfg.descriptor, &cfg.grid)
}

/// Completed Gagliardo values for each `s`, in order.
fn gagliardo_values(profile: &DifferenceProfile, s_values: &[f64]) -> Result<Vec<crate::norms::SeminormValue>> {
    s_values.par_iter().map(|&s| profile.evaluate(s)).collect()
}

/// Intercept of the least-squares line through `(x_i, y_i)`.
fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if sxx == 0.0 {
        return my;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    my - sxy / sxx * mx
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Scaled Gagliardo seminorms approaching `‖∇f‖_p` as `s → 1`.
pub fn bbm_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let f = prepare(cfg)?;
    bbm_sweep_field(cfg, &f)
}

pub fn bbm_sweep_field(cfg: &SweepConfig, f: &SampledField) -> Result<SweepReport> {
    cfg.validate()?;
    let p = cfg.p;
    let profile = DifferenceProfile::new(f, p, cfg.z_cut)?;
    let k = k_const(p, cfg.grid.dim())?;
    let target = gradient_lp_norm(f, p)?;
    let norm = lp_norm(f, p)?;
    let values = gagliardo_values(&profile, &cfg.s_grid)?;
    let factor = (p / k).powf(1.0 / p);
    let records: Vec<SweepRecord> = cfg
        .s_grid
        .iter()
        .zip(&values)
        .map(|(&s, v)| {
            let completed = v.completed();
            let scaled = factor * (1.0 - s).powf(1.0 / p) * completed;
            SweepRecord {
                s,
                gagliardo: v.value,
                tail_bracket: v.tail_bracket,
                completed,
                scaled,
                target,
                ratio: ratio(scaled, target),
            }
        })
        .collect();

    let tail = &records[records.len().saturating_sub(3)..];
    let x: Vec<f64> = tail.iter().map(|r| 1.0 - r.s).collect();
    let y: Vec<f64> = tail.iter().map(|r| r.scaled).collect();
    let limit_estimate = linear_intercept(&x, &y);
    let limit_error = match (target == 0.0, limit_estimate == 0.0) {
        (true, true) => 0.0,
        (true, false) => f64::INFINITY,
        _ => (limit_estimate / target - 1.0).abs(),
    };
    let max_deviation = tail.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    let max_deviation = if target == 0.0 { 0.0 } else { max_deviation };

    let sup_scaled = records
        .iter()
        .map(|r| (1.0 - r.s).powf(1.0 / p) * r.completed)
        .fold(0.0, f64::max);
    let sup_constant = ratio(sup_scaled, norm + target);
    let mut constants = BTreeMap::new();
    constants.insert("sup_bound_constant".to_string(), sup_constant);

    let mut checks = vec![
        Check::at_most("limit_fit", limit_error, LIMIT_TOLERANCE),
        Check::at_most("sup_bound_constant", sup_constant, RATIO_CEILING),
    ];
    if let Some(r) = records.iter().find(|r| (r.s - 0.99).abs() < 1e-12) {
        let dev = if target == 0.0 { 0.0 } else { (r.ratio - 1.0).abs() };
        checks.push(Check::at_most("scaled_at_0.99", dev, NEAR_ONE_TOLERANCE));
    }

    let mut warnings = Vec::new();
    let gaps: Vec<f64> = tail.iter().map(|r| (r.scaled - r.target).abs()).collect();
    if gaps.windows(2).any(|w| w[1] > w[0]) {
        warnings.push(format!("discretization: |scaled - target| grows over the last grid points: {gaps:?}"));
    }

    Ok(SweepReport {
        kind: ExperimentKind::Bbm,
        descriptor: cfg.descriptor.to_string(),
        p,
        seed: cfg.seed,
        records,
        summary: SweepSummary { limit_estimate, limit_error, max_deviation, constants },
        checks,
        warnings,
    })
}

/// One side of the two-sided embeddings between Gagliardo and Triebel-Lizorkin seminorms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingSide {
    /// `W^{s,p}` bounded below by `F^s_{p,p}`.
    PpLower,
    /// `W^{s,p}` bounded above by `F^s_{p,p}`.
    PpUpper,
    /// `W^{s,p}` bounded below by `F^s_{p,2}`, asserted for `p ≤ 2`.
    P2Lower,
    /// `W^{s,p}` bounded above by `F^s_{p,2}`, asserted for `p ≥ 2`.
    P2Upper,
}

impl EmbeddingSide {
    pub const ALL: [EmbeddingSide; 4] =
        [EmbeddingSide::PpLower, EmbeddingSide::PpUpper, EmbeddingSide::P2Lower, EmbeddingSide::P2Upper];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingSide::PpLower => "pp_lower",
            EmbeddingSide::PpUpper => "pp_upper",
            EmbeddingSide::P2Lower => "p2_lower",
            EmbeddingSide::P2Upper => "p2_upper",
        }
    }

    pub fn asserted_for(self, p: f64) -> bool {
        match self {
            EmbeddingSide::PpLower | EmbeddingSide::PpUpper => true,
            EmbeddingSide::P2Lower => p <= 2.0,
            EmbeddingSide::P2Upper => p >= 2.0,
        }
    }

    fn is_lower(self) -> bool {
        matches!(self, EmbeddingSide::PpLower | EmbeddingSide::P2Lower)
    }

    /// Normalized ratio from `(R_pp, R_p2, env_2, env_p)`.
    fn normalized(self, p: f64, r_pp: f64, r_p2: f64, env_2: f64, env_p: f64) -> f64 {
        let small_p = p <= 2.0;
        match self {
            EmbeddingSide::PpLower => r_pp / if small_p { env_2 } else { env_p },
            EmbeddingSide::PpUpper => r_pp / if small_p { env_p } else { env_2 },
            EmbeddingSide::P2Lower | EmbeddingSide::P2Upper => r_p2 / env_p,
        }
    }
}

fn envelope(s: f64, exponent: f64) -> f64 {
    s.powf(-1.0 / exponent) + (1.0 - s).powf(-1.0 / exponent)
}

/// Every side asserted for `cfg.p`.
pub fn embedding_ratio(cfg: &SweepConfig) -> Result<RatioReport> {
    let sides: Vec<EmbeddingSide> = EmbeddingSide::ALL.into_iter().filter(|s| s.asserted_for(cfg.p)).collect();
    embedding_ratio_sides(cfg, &sides)
}

/// Ratios `R_pp = [f]_W / [f]_{F_pp}`, `R_p2 = [f]_W / [f]_{F_p2}` divided by the
/// envelope of each requested side.
pub fn embedding_ratio_sides(cfg: &SweepConfig, sides: &[EmbeddingSide]) -> Result<RatioReport> {
    let f = prepare(cfg)?;
    embedding_ratio_field(cfg, &f, sides)
}

pub fn embedding_ratio_field(cfg: &SweepConfig, f: &SampledField, sides: &[EmbeddingSide]) -> Result<RatioReport> {
    cfg.validate()?;
    let p = cfg.p;
    if let Some(side) = sides.iter().find(|s| !s.asserted_for(p)) {
        return Err(Error::SideMismatch { p, detail: format!("{} is not asserted for this p", side.name()) });
    }
    let profile = DifferenceProfile::new(f, p, cfg.z_cut)?;
    let bands = BandProfile::new(f, &cfg.filterbank()?)?;
    let values = gagliardo_values(&profile, &cfg.s_grid)?;

    let mut columns = vec![
        column("s", "smoothness"),
        column("gagliardo", "Gagliardo seminorm including modelled far field"),
        column("tail_bracket", "bound on the far field beyond the cutoff"),
        column("f_pp", "Triebel-Lizorkin seminorm with q = p"),
        column("f_p2", "Triebel-Lizorkin seminorm with q = 2"),
        column("r_pp", "gagliardo / f_pp"),
        column("r_p2", "gagliardo / f_p2"),
        column("env_2", "s^(-1/2) + (1-s)^(-1/2)"),
        column("env_p", "s^(-1/p) + (1-s)^(-1/p)"),
    ];
    columns.extend(sides.iter().map(|s| column(s.name(), "normalized ratio on this side")));
    let rows: Vec<Vec<f64>> = cfg
        .s_grid
        .par_iter()
        .zip(values.par_iter())
        .map(|(&s, v)| {
            let g = v.completed();
            let f_pp = bands.triebel_lizorkin(s, p, p)?;
            let f_p2 = bands.triebel_lizorkin(s, p, 2.0)?;
            let (r_pp, r_p2) = (ratio(g, f_pp), ratio(g, f_p2));
            let (env_2, env_p) = (envelope(s, 2.0), envelope(s, p));
            let mut row = vec![s, g, v.tail_bracket, f_pp, f_p2, r_pp, r_p2, env_2, env_p];
            row.extend(sides.iter().map(|side| side.normalized(p, r_pp, r_p2, env_2, env_p)));
            Ok(row)
        })
        .collect::<Result<_>>()?;

    let mut constants = BTreeMap::new();
    let mut checks = Vec::new();
    for (k, side) in sides.iter().enumerate() {
        let (lo, hi) = min_max(rows.iter().map(|r| r[9 + k]));
        constants.insert(format!("{}_min", side.name()), lo);
        constants.insert(format!("{}_max", side.name()), hi);
        checks.push(if side.is_lower() {
            Check::at_least(side.name(), lo, RATIO_FLOOR)
        } else {
            Check::at_most(side.name(), hi, RATIO_CEILING)
        });
    }
    if p == 2.0 {
        let (lo, hi) = min_max(rows.iter().map(|r| r[5] * r[0].min(1.0 - r[0]).sqrt()));
        let width = hi / lo;
        constants.insert("p2_band_min".into(), lo);
        constants.insert("p2_band_max".into(), hi);
        constants.insert("p2_band_width".into(), width);
        checks.push(Check::at_most("p2_band_width", if width.is_nan() { f64::INFINITY } else { width }, BAND_WIDTH_LIMIT));
    }

    Ok(RatioReport {
        kind: ExperimentKind::Embed,
        descriptor: cfg.descriptor.to_string(),
        p,
        seed: cfg.seed,
        columns,
        rows,
        constants,
        checks,
        warnings: Vec::new(),
    })
}

/// Gagliardo seminorm against Triebel-Lizorkin seminorms of lower order `r` and
/// higher order `t`, and the reverse bound near `s = 1`.
pub fn sobolev_sandwich(cfg: &SweepConfig, r: f64, t: f64) -> Result<RatioReport> {
    let f = prepare(cfg)?;
    sobolev_sandwich_field(cfg, &f, r, t)
}

pub fn sobolev_sandwich_field(cfg: &SweepConfig, f: &SampledField, r: f64, t: f64) -> Result<RatioReport> {
    cfg.validate()?;
    if !(0.0 <= r && r < t && t <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need 0 <= r < t <= 1, got r = {r}, t = {t}")));
    }
    let p = cfg.p;
    let mut warnings = Vec::new();
    let admissible: Vec<f64> = cfg.s_grid.iter().copied().filter(|&s| r < s && s < t).collect();
    let skipped: Vec<f64> = cfg.s_grid.iter().copied().filter(|&s| !(r < s && s < t)).collect();
    if admissible.is_empty() {
        return Err(Error::SkippedAll);
    }
    if !skipped.is_empty() {
        warnings.push(format!("skipped s outside (r, t): {skipped:?}"));
    }

    let profile = DifferenceProfile::new(f, p, cfg.z_cut)?;
    let bands = BandProfile::new(f, &cfg.filterbank()?)?;
    let norm = lp_norm(f, p)?;
    let f_r = bands.triebel_lizorkin(r, p, 2.0)?;
    let f_t = bands.triebel_lizorkin(t, p, 2.0)?;
    let f_zero = bands.triebel_lizorkin(0.0, p, 2.0)?;
    let values = gagliardo_values(&profile, &admissible)?;
    let reverse_from = 1.0 - 1.0 / (2.0 * cfg.lambda);

    let rows: Vec<Vec<f64>> = admissible
        .par_iter()
        .zip(values.par_iter())
        .map(|(&s, v)| {
            let g = v.completed();
            let rhs = (s - r).powf(-1.0 / p) * f_r + (t - s).powf(-1.0 / p) * f_t;
            let reverse = if s >= reverse_from {
                let r_bar = 1.0 - cfg.lambda * (1.0 - s);
                let denominator = norm + (1.0 - s).powf(1.0 / p) * g;
                let at_bar = ratio(bands.triebel_lizorkin(r_bar, p, 2.0)?, denominator);
                at_bar.max(ratio(f_zero, denominator))
            } else {
                f64::NAN
            };
            Ok(vec![s, g, rhs, ratio(g, rhs), reverse])
        })
        .collect::<Result<_>>()?;

    let mut constants = BTreeMap::new();
    let mut checks = Vec::new();
    let sandwich_max = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    constants.insert("sandwich_max".to_string(), sandwich_max);
    checks.push(Check::at_most("sandwich", sandwich_max, RATIO_CEILING));
    let reverse: Vec<f64> = rows.iter().map(|r| r[4]).filter(|v| !v.is_nan()).collect();
    if !reverse.is_empty() {
        let reverse_max = reverse.iter().copied().fold(0.0, f64::max);
        constants.insert("reverse_max".to_string(), reverse_max);
        checks.push(Check::at_most("reverse", reverse_max, RATIO_CEILING));
    }

    if p == 2.0 {
        // min{s,1-s}^{1/2} [f]_{W^{s,2}} ≤ C (‖f‖₂ + min{t,1-t}^{1/2} [f]_{W^{t,2}}) for s ≤ t
        let all = gagliardo_values(&profile, &cfg.s_grid)?;
        let weighted: Vec<f64> = cfg
            .s_grid
            .iter()
            .zip(&all)
            .map(|(&s, v)| s.min(1.0 - s).sqrt() * v.completed())
            .collect();
        let mut pairs_max: f64 = 0.0;
        for (i, a) in weighted.iter().enumerate() {
            for b in &weighted[i..] {
                pairs_max = pairs_max.max(ratio(*a, norm + b));
            }
        }
        constants.insert("pairs_max".to_string(), pairs_max);
        checks.push(Check::at_most("pairs", pairs_max, RATIO_CEILING));
    }

    Ok(RatioReport {
        kind: ExperimentKind::Sandwich,
        descriptor: cfg.descriptor.to_string(),
        p,
        seed: cfg.seed,
        columns: vec![
            column("s", "smoothness"),
            column("gagliardo", "Gagliardo seminorm including modelled far field"),
            column("rhs", "(s-r)^(-1/p) F^r_{p,2} + (t-s)^(-1/p) F^t_{p,2}"),
            column("sandwich", "gagliardo / rhs"),
            column("reverse", "max over r' in {0, 1-Λ(1-s)} of F^r'_{p,2} / (|f|_p + (1-s)^(1/p) gagliardo); NaN below 1-1/(2Λ)"),
        ],
        rows,
        constants,
        checks,
        warnings,
    })
}

/// `sup_{r ∈ [θ, s)} (s-r)^{1/p} [f]_{W^{r,p}}` over the `s` grid, divided by
/// `‖f‖_p + ‖(-Δ)^{s/2} f‖_p` (or `‖∇f‖_p` at `s = 1`).
pub fn frac_bbm_upper(cfg: &SweepConfig, theta: f64, s: f64) -> Result<RatioReport> {
    let f = prepare(cfg)?;
    frac_bbm_upper_field(cfg, &f, theta, s)
}

pub fn frac_bbm_upper_field(cfg: &SweepConfig, f: &SampledField, theta: f64, s: f64) -> Result<RatioReport> {
    cfg.validate()?;
    if !(0.0 < theta && theta < s && s <= 1.0) {
        return Err(Error::ParameterOutOfRange(format!("need 0 < θ < s <= 1, got θ = {theta}, s = {s}")));
    }
    let p = cfg.p;
    let r_grid: Vec<f64> = cfg.s_grid.iter().copied().filter(|&r| theta <= r && r < s).collect();
    if r_grid.is_empty() {
        return Err(Error::SkippedAll);
    }
    let profile = DifferenceProfile::new(f, p, cfg.z_cut)?;
    let values = gagliardo_values(&profile, &r_grid)?;
    let norm = lp_norm(f, p)?;
    let top = if s < 1.0 { bessel_seminorm(f, s, p)? } else { gradient_lp_norm(f, p)? };
    let rows: Vec<Vec<f64>> = r_grid
        .iter()
        .zip(&values)
        .map(|(&r, v)| vec![r, v.completed(), (s - r).powf(1.0 / p) * v.completed()])
        .collect();
    let sup = rows.iter().map(|r| r[2]).fold(0.0, f64::max);
    let constant = ratio(sup, norm + top);
    let mut constants = BTreeMap::new();
    constants.insert("sup".to_string(), sup);
    constants.insert("denominator".to_string(), norm + top);
    constants.insert("fracbbm_ratio".to_string(), constant);
    Ok(RatioReport {
        kind: ExperimentKind::FracBbm,
        descriptor: cfg.descriptor.to_string(),
        p,
        seed: cfg.seed,
        columns: vec![
            column("r", "smoothness of the Gagliardo seminorm"),
            column("gagliardo", "Gagliardo seminorm including modelled far field"),
            column("weighted", "(s-r)^(1/p) gagliardo"),
        ],
        rows,
        constants,
        checks: vec![Check::at_most("fracbbm", constant, FRAC_BBM_CEILING)],
        warnings: Vec::new(),
    })
}

/// Gagliardo seminorm against the two mixed band sums at each `s` of the grid.
pub fn mixed_sum_ratio(cfg: &SweepConfig) -> Result<RatioReport> {
    let f = prepare(cfg)?;
    let p = cfg.p;
    let fb = cfg.filterbank()?;
    let profile = DifferenceProfile::new(&f, p, cfg.z_cut)?;
    let values = gagliardo_values(&profile, &cfg.s_grid)?;
    let rows: Vec<Vec<f64>> = cfg
        .s_grid
        .iter()
        .zip(&values)
        .map(|(&s, v)| {
            let sums = mixed_sum_upper(&f, &fb, s, p)?;
            let g = v.completed();
            Ok(vec![s, g, sums.high, sums.low, ratio(g, sums.high + sums.low)])
        })
        .collect::<Result<_>>()?;
    let worst = rows.iter().map(|r| r[4]).fold(0.0, f64::max);
    let mut constants = BTreeMap::new();
    constants.insert("mixed_max".to_string(), worst);
    Ok(RatioReport {
        kind: ExperimentKind::Norms,
        descriptor: cfg.descriptor.to_string(),
        p,
        seed: cfg.seed,
        columns: vec![
            column("s", "smoothness"),
            column("gagliardo", "Gagliardo seminorm including modelled far field"),
            column("high", "mixed sum over j >= 0"),
            column("low", "mixed sum over j <= 0 with weight 2^j"),
            column("ratio", "gagliardo / (high + low)"),
        ],
        rows,
        constants,
        checks: vec![Check::at_most("mixed", worst, RATIO_CEILING)],
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Descriptor, GridSpec};

    fn small(kind: ExperimentKind, desc: Descriptor, p: f64) -> SweepConfig {
        SweepConfig::new(kind, desc, GridSpec::new(1, 1024, 40.0).unwrap(), p)
    }

    #[test]
    fn intercept_of_exact_line() {
        assert!((linear_intercept(&[0.1, 0.05, 0.01], &[1.3, 1.15, 1.03]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bbm_on_zero_field() {
        let cfg = small(ExperimentKind::Bbm, Descriptor::gaussian(), 2.0);
        let zero = SampledField::zeros(cfg.grid);
        let report = bbm_sweep_field(&cfg, &zero).unwrap();
        assert!(report.records.iter().all(|r| r.scaled == 0.0 && r.target == 0.0));
        assert!(report.passed());
    }

    #[test]
    fn bbm_gaussian_converges() {
        let cfg = SweepConfig::new(ExperimentKind::Bbm, Descriptor::gaussian(), SweepConfig::standard_grid(), 2.0);
        let report = bbm_sweep(&cfg).unwrap();
        let target = (std::f64::consts::PI / 2.0).powf(0.25);
        assert!((report.records[0].target - target).abs() < 1e-10);
        assert!(report.summary.limit_error <= 0.05, "{:?}", report.summary);
        assert!(report.passed(), "{:?}", report.checks);
        assert_eq!(report.records.len(), cfg.s_grid.len());
    }

    #[test]
    fn side_mismatch() {
        let cfg = small(ExperimentKind::Embed, Descriptor::gaussian(), 1.5);
        assert!(matches!(embedding_ratio_sides(&cfg, &[EmbeddingSide::P2Upper]), Err(Error::SideMismatch { .. })));
        let cfg = small(ExperimentKind::Embed, Descriptor::gaussian(), 3.0);
        assert!(matches!(embedding_ratio_sides(&cfg, &[EmbeddingSide::P2Lower]), Err(Error::SideMismatch { .. })));
    }

    #[test]
    fn embedding_report_shape() {
        let cfg = small(ExperimentKind::Embed, Descriptor::random(1), 2.0);
        let report = embedding_ratio(&cfg).unwrap();
        assert_eq!(report.rows.len(), cfg.s_grid.len());
        assert_eq!(report.columns.len(), 9 + 4);
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn sandwich_skips_and_errors() {
        let cfg = small(ExperimentKind::Sandwich, Descriptor::gaussian(), 2.0);
        let report = sobolev_sandwich(&cfg, 0.3, 0.8).unwrap();
        assert!(report.rows.iter().all(|r| r[0] > 0.3 && r[0] < 0.8));
        assert_eq!(report.warnings.len(), 1);
        let mut narrow = cfg.clone();
        narrow.s_grid = vec![0.5];
        assert!(matches!(sobolev_sandwich(&narrow, 0.6, 0.9), Err(Error::SkippedAll)));
        assert!(sobolev_sandwich(&cfg, 0.5, 0.5).is_err());
    }

    #[test]
    fn sandwich_with_r_zero_is_finite() {
        let cfg = small(ExperimentKind::Sandwich, Descriptor::gaussian(), 2.0);
        let report = sobolev_sandwich(&cfg, 0.0, 1.0).unwrap();
        assert!(report.constants["sandwich_max"].is_finite());
        assert!(report.constants.contains_key("reverse_max"));
        assert!(report.passed(), "{:?}", report.checks);
    }

    #[test]
    fn frac_bbm_zero_and_gaussian() {
        let cfg = small(ExperimentKind::FracBbm, Descriptor::gaussian(), 2.0);
        let zero = SampledField::zeros(cfg.grid);
        let report = frac_bbm_upper_field(&cfg, &zero, 0.2, 0.8).unwrap();
        assert_eq!(report.constants["fracbbm_ratio"], 0.0);
        let report = frac_bbm_upper(&cfg, 0.2, 1.0).unwrap();
        assert!(report.passed());
        assert!(frac_bbm_upper(&cfg, 0.8, 0.2).is_err());
    }

    #[test]
    fn frac_bbm_refinement_is_stable() {
        let coarse = small(ExperimentKind::FracBbm, Descriptor::gaussian(), 2.0);
        let mut fine = coarse.clone();
        fine.grid = GridSpec::new(1, 2048, 40.0).unwrap();
        let a = frac_bbm_upper(&coarse, 0.2, 1.0).unwrap().constants["fracbbm_ratio"];
        let b = frac_bbm_upper(&fine, 0.2, 1.0).unwrap().constants["fracbbm_ratio"];
        assert!((a - b).abs() < 0.02 * b, "{a} vs {b}");
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small(ExperimentKind::Embed, Descriptor::random(9), 1.5);
        let a = embedding_ratio(&cfg).unwrap();
        let b = embedding_ratio(&cfg).unwrap();
        let (mut x, mut y) = (Vec::new(), Vec::new());
        a.write_csv(&mut x).unwrap();
        b.write_csv(&mut y).unwrap();
        assert_eq!(x, y);
    }
}
