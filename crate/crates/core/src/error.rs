//! Crate-wide error type.

/// Errors shared by every module of the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Projective coordinates must not all vanish.
    #[error("all coordinates are zero")]
    AllZero,
    /// Absolute values of zero are handled by callers, never here.
    #[error("absolute value of zero requested; handle vanishing separately")]
    ZeroInput,
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// `is_singular_at` requires the point to lie on the hypersurface.
    #[error("point does not lie on the hypersurface")]
    NotOnSurface,
    /// Local heights are +infinity on the divisor itself.
    #[error("point lies on the divisor; its local height is infinite")]
    OnDivisor,
    #[error("bounds must be strictly increasing")]
    UnsortedBounds,
    #[error("need at least two positive samples to fit a growth exponent")]
    InsufficientData,
    #[error("the two points are equal")]
    EqualPoints,
    /// Both points have multiplicative height 1, so the pair exponent is
    /// undefined; callers drop such pairs.
    #[error("pair height is zero (both points have height 1)")]
    ZeroPairHeight,
    #[error("no pairs remain after exclusion")]
    NoPairs,
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("invalid form: {0}")]
    InvalidForm(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    /// An all-pairs scan would exceed the hard pair cap; the caller must
    /// opt in explicitly.
    #[error("scan over {pairs} pairs exceeds the cap of {cap}; enable the large-scan override")]
    ScanTooLarge { pairs: u128, cap: u128 },
    /// A cofactor survived trial division and Pollard rho; such inputs are
    /// beyond the exact place-decomposition machinery.
    #[error("cannot factor {0} into places")]
    FactorTooLarge(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
