//! Simulation laboratory for the extrapolated dihedral coset problem (EDCP).
//!
//! A symbolic coset-state engine ([`coset`]) carries every structured state
//! exactly and scales with `n` and `q`; a dense statevector simulator
//! ([`statevec`]) serves as a brute-force oracle at small dimension.
//! On top sit the public-key scheme ([`qpke`]), the search-to-decision
//! reductions and LWE extractor ([`reductions`]), the sieve/PGM/Fourier
//! attacks ([`attacks`]) and the Holevo/Fano calculators ([`infotheory`]).

pub mod attacks;
pub mod checks;
pub mod coset;
pub mod error;
pub mod infotheory;
pub mod modmath;
pub mod qpke;
pub mod reductions;
pub mod rng;
pub mod scalar;
pub mod statevec;

pub use error::{Error, Result};
pub use scalar::Real;

pub use coset::{Challenger, CosetState, EdcpParams};
pub use modmath::{Modulus, RootOfUnity, ZqVector};

/// Double-precision dense state, the default oracle representation.
pub type DenseState = statevec::StateVector<f64>;
/// Single-precision dense state.
pub type DenseState32 = statevec::StateVector<f32>;
/// Double-precision density operator.
pub type Density = statevec::DensityOperator<f64>;
/// Single-precision density operator.
pub type Density32 = statevec::DensityOperator<f32>;
/// Double-precision complex amplitude.
pub type C64 = num_complex::Complex<f64>;
