use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coin matrix is not unitary: max |C\u{2020}C - I| = {dev:.3e} exceeds 1e-12")]
    NotUnitary { dev: f64 },
    #[error("coin is biased: max | |C_ij| - 1/\u{221a}c | = {dev:.3e} exceeds 1e-12")]
    Biased { dev: f64 },
    #[error("displacements must sum to the zero vector")]
    DisplacementSum,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("coin state is not unit norm: |\u{2016}\u{3c8}\u{2016} - 1| = {dev:.3e}")]
    NotNormalized { dev: f64 },
    #[error("amplitude parameter out of range: a must lie in [0, 1/\u{221a}2], got {0}")]
    AmplitudeOutOfRange(f64),
    #[error("unknown named state {0:?} (expected psi_S, psi_G or psi_F)")]
    UnknownState(String),
    #[error("grover family requires d \u{2265} 2, got {0}")]
    GroverFamilyDimension(usize),
    #[error("direct engine supports d \u{2264} 3, got {0}; use the product engine")]
    DirectEngineDimension(usize),
    #[error(
        "memory cap exceeded: direct engine needs {needed} bytes ({sites} sites \u{d7} {c} components), cap is {cap}; \
         raise the cap or use the product engine"
    )]
    MemoryCap { needed: u64, sites: u64, c: usize, cap: u64 },
    #[error("product engine requires product-form initial state")]
    NonProductState,
    #[error("tensor estimate is defined for d \u{2265} 2, got {0}")]
    TensorEstimateDimension(usize),
    #[error("fit window [{lo}, {hi}] contains {found} nonzero entries, need at least {need}")]
    FitWindowTooSmall { lo: u64, hi: u64, found: usize, need: usize },
    #[error("series has {0} even terms, classification needs at least 64")]
    SeriesTooShort(usize),
    #[error("spectral grid resolution must be even and \u{2265} 16, got {0}")]
    BadResolution(usize),
    #[error("saddle search needs resolution \u{2265} 64 for d \u{2264} 2, got {0}")]
    SaddleResolution(usize),
    #[error("quadrature aliasing: k-grid N = {n} must exceed 2t = {two_t}")]
    QuadratureAliasing { n: usize, two_t: u64 },
    #[error("return series invariant violated: {0}")]
    BadSeries(String),
    #[error("invalid coin description: {0}")]
    BadCoinSpec(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
