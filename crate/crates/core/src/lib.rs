//! Free BV quantisation of abelian gauge fields on flat tori.
//!
//! Observables are polynomials (or exponentials) in smeared linear
//! functionals `a ↦ ⟨a, β⟩`. The crate computes their expectation values by
//! Feynman diagrams, by independent Gaussian oracles and by lattice sums over
//! topological sectors, and implements the Fourier duality that exchanges a
//! `p`-form theory at coupling `R` with the `(n−p)`-form theory at `1/(2R)`.

pub mod bv;
pub mod error;
pub mod geometry;
pub mod json;
pub mod observable;
pub mod oracle;
pub mod poly;
pub mod scalar;
pub mod testing;
pub mod theory;
pub mod verify;
pub mod wick;
pub mod wilson;

pub use error::{Error, Result};
pub use geometry::{FormMode, GeometrySpec, HarmonicLattice, ModeTruncation, Phase, SpectralForm};
pub use observable::{LinearObservable, PolynomialObservable};
pub use poly::Polynomial;
pub use scalar::{ExactComplex, Scalar, C64};
pub use theory::{MassSign, TheorySpec, Variant};
