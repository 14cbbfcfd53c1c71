use alloc::string::String;

/// Failures raised by the numerical core.
///
/// Non-fatal diagnostics (wrap-around, frequency localization, budget
/// exhaustion) are carried in result records instead, see [`Diagnostics`].
///
/// [`Diagnostics`]: crate::evolution::Diagnostics
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("Nyquist violation on axis {axis}: cutoff needs frequency {required}, grid resolves {available}")]
    NyquistViolation {
        axis: usize,
        required: f64,
        available: f64,
    },
    #[error("unsupported waveguide dimensions m={m}, n={n} (need m,n >= 1 and m+n in {{2,3}})")]
    DimensionError { m: usize, n: usize },
    #[error("axis {axis} has {len} samples, expected 2^a or 3*2^a with a >= 1")]
    UnsupportedLength { axis: usize, len: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("zero data: the L2 norm vanishes")]
    ZeroData,
    #[error("lambda grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("insufficient range: {0}")]
    InsufficientRange(String),
    #[error("insufficient sweep on the {axis} axis: {distinct} distinct values, need {needed}")]
    InsufficientSweep {
        axis: &'static str,
        distinct: usize,
        needed: usize,
    },
    #[error("degenerate design matrix in bivariate fit")]
    DegenerateDesign,
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("regime error: {0}")]
    RegimeError(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("blow-up guard tripped at t={t}: sup|u| = {sup} exceeds {limit}")]
    BlowupGuard { t: f64, sup: f64, limit: f64 },
}

pub type Result<T> = core::result::Result<T, Error>;
