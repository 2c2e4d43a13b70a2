use thiserror::Error;

/// Everything that can go wrong while sampling, transforming or measuring a field.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("unsupported descriptor: {0}")]
    UnsupportedDescriptor(String),

    #[error("insufficient decay: boundary magnitude {boundary:.3e} exceeds {limit:.3e} (peak {peak:.3e})")]
    InsufficientDecay { boundary: f64, limit: f64, peak: f64 },

    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),

    #[error("spectrum under-resolved: top-third energy fraction {fraction:.3e} >= {limit:.1e}")]
    SpectralUnderresolution { fraction: f64, limit: f64 },

    #[error("band 2^{j_max}+1 exceeds the Nyquist frequency {nyquist:.6}")]
    NyquistOverflow { j_max: i32, nyquist: f64 },

    #[error("degenerate band range: j_min = {j_min} must be below j_max = {j_max}")]
    DegenerateRange { j_min: i32, j_max: i32 },

    #[error("band {j} outside filterbank range [{j_min}, {j_max}]")]
    BandOutOfRange { j: i32, j_min: i32, j_max: i32 },

    #[error("spectral leakage: energy fraction {fraction:.3e} above |xi| = {threshold:.6}")]
    SpectralLeakage { fraction: f64, threshold: f64 },

    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),

    #[error("cutoff {z_cut} exceeds half period {half_period}")]
    CutoffExceedsHalfPeriod { z_cut: f64, half_period: f64 },

    #[error("grid mismatch between operands")]
    GridMismatch,

    #[error("inequality side not asserted for p = {p}: {detail}")]
    SideMismatch { p: f64, detail: String },

    #[error("no admissible s value in the sweep grid")]
    SkippedAll,

    #[error("malformed field container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name of the variant, for structured error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid_grid",
            Error::UnsupportedDescriptor(_) => "unsupported_descriptor",
            Error::InsufficientDecay { .. } => "insufficient_decay",
            Error::InvalidExponent(_) => "invalid_exponent",
            Error::SpectralUnderresolution { .. } => "spectral_underresolution",
            Error::NyquistOverflow { .. } => "nyquist_overflow",
            Error::DegenerateRange { .. } => "degenerate_range",
            Error::BandOutOfRange { .. } => "band_out_of_range",
            Error::SpectralLeakage { .. } => "spectral_leakage",
            Error::ParameterOutOfRange(_) => "parameter_out_of_range",
            Error::CutoffExceedsHalfPeriod { .. } => "cutoff_exceeds_half_period",
            Error::GridMismatch => "grid_mismatch",
            Error::SideMismatch { .. } => "side_mismatch",
            Error::SkippedAll => "skipped_all",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        }
    }

    /// True when the request itself is invalid, as opposed to a field or
    /// resolution that the numerics cannot handle.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::InvalidGrid(_)
                | Error::UnsupportedDescriptor(_)
                | Error::InvalidExponent(_)
                | Error::NyquistOverflow { .. }
                | Error::DegenerateRange { .. }
                | Error::BandOutOfRange { .. }
                | Error::ParameterOutOfRange(_)
                | Error::CutoffExceedsHalfPeriod { .. }
                | Error::SideMismatch { .. }
                | Error::SkippedAll
        )
    }
}
