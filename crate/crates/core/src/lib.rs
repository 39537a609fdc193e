//! Non-Hermitian Rayleigh–Schrödinger perturbation theory from the evolution
//! generators `K₀`, `K₁` of a polynomial Hamiltonian family
//! `H(q) = Σⱼ qʲ H⁽ʲ⁾`.
//!
//! The pipeline is
//!
//! 1. [`spectral::eigenframe`]: biorthogonal eigenbasis of `H⁽⁰⁾`;
//! 2. [`generators::solve_generators`]: `K₀⁽ʲ⁾`, `K₁⁽ʲ⁾` order by order;
//! 3. [`corrections::perturbation_series`]: `hₙ⁽ᵏ⁾` and `|n⁽ᵏ⁾⟩`;
//! 4. [`oracle`]: checks against exact diagonalization of `H(q)`.

pub mod bellpoly;
pub mod corrections;
pub mod error;
pub mod generators;
pub mod models;
pub mod oracle;
pub mod spectral;

pub use corrections::{perturbation_series, PerturbationSeries};
pub use error::{Error, Result};
pub use generators::{solve_generators, solve_generators_with_gauge, Gauge, GeneratorSeries, PolynomialHamiltonian};
pub use spectral::{eigenframe, CMatrix, CVector, FrameOptions, SpectralFrame};
