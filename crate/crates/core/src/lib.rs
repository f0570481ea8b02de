//! Coined quantum walks on infinite d-dimensional lattices: unbiased coin
//! construction, real-space and k-space evolution engines, return
//! probability series p0(t), Polya recurrence numbers under sequential
//! measurement, and spectral (Fourier-picture) prediction of the recurrence
//! class from the stationary structure of the eigenphase bands.

// indexed loops mirror the lattice/band arithmetic; frozen reference values
// keep all 17 digits of their f64
#![allow(clippy::needless_range_loop)]
#![allow(clippy::excessive_precision)]

pub mod coin;
pub mod error;
pub mod evolve;
pub mod io;
pub mod polya;
pub mod series;
pub mod spectral;
pub mod surface;

pub use coin::{
    fourier_coin, grover_coin, grover_family_coin, hadamard_coin, named_state, psi_f, psi_g,
    psi_s, tensor_coin, tensor_hadamard_coin, unbiased_coin_1d, validate_unbiased, CoinOperator,
    CoinSpec, CoinState, DisplacementSet,
};
pub use error::{Error, Result};
pub use evolve::{
    direct_memory_needed, evolve_collect, evolve_product, init_state, ProductWalk, Snapshot,
    WalkState, DEFAULT_MEM_CAP,
};
pub use polya::{
    classical_polya, classical_return_series, classify_recurrence, criterion_demo,
    fit_decay_exponent, polya_partial, tensor_polya_estimate, Classification, ClassicalPolya,
    Evidence, PolyaEstimate,
};
pub use series::{ReturnSeries, SeriesMeta};
pub use spectral::{
    band_structure, evolution_operator_k, find_saddles, flat_band_overlap,
    kspace_return_amplitude, kspace_return_series, predicted_p0_exponent,
    stationary_state_subspace, OverlapReport, OverlapVerdict, SaddleReport, SpectralGrid,
};
pub use surface::{
    default_surface_grids, fit_fourier_surface, fourier_polya_surface, surface_g,
    FourierSurfaceModel, PolyaSurface, SurfaceExtremum,
};
