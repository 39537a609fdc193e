//! Built-in model families and seeded random model generators.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::generators::PolynomialHamiltonian;
use crate::spectral::{eigen_decompose, min_pairwise_gap, CMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn m2(a: [Complex64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &a)
}

/// `H = h σₓ + q α₁ i σ_z + q² α₂ σₓ`.
pub fn toy(h: f64, alpha1: f64, alpha2: f64) -> PolynomialHamiltonian {
    let z = c(0., 0.);
    PolynomialHamiltonian::new(vec![
        m2([z, c(h, 0.), c(h, 0.), z]),
        m2([c(0., alpha1), z, z, c(0., -alpha1)]),
        m2([z, c(alpha2, 0.), c(alpha2, 0.), z]),
    ])
    .expect("2x2 toy terms are valid")
}

/// Exact toy eigenvalue continuing from `±h` at `q = 0`:
/// `c(q)·√(1 − q²α₁²/c(q)²)` with `c(q) = ±(h + q²α₂)`.
pub fn toy_exact_eigenvalue(h: f64, alpha1: f64, alpha2: f64, sign: f64, q: f64) -> Complex64 {
    let cq = sign * (h + q * q * alpha2);
    let ratio = c(1.0 - (q * alpha1 / cq).powi(2), 0.0);
    ratio.sqrt() * cq
}

/// `diag(0, 2) + q σₓ`.
pub fn hermitian_two_level() -> PolynomialHamiltonian {
    let z = c(0., 0.);
    let one = c(1., 0.);
    PolynomialHamiltonian::new(vec![m2([z, z, z, c(2., 0.)]), m2([z, one, one, z])])
        .expect("2x2 terms are valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Hermitian,
    NonHermitian,
}

fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, symmetry: Symmetry) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| {
        c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    match symmetry {
        Symmetry::NonHermitian => m,
        Symmetry::Hermitian => (&m + m.adjoint()) * c(0.5, 0.0),
    }
}

/// Random `H⁽⁰⁾ + q H⁽¹⁾` with entries uniform in the unit square, redrawing
/// `H⁽⁰⁾` until its eigenvalues are at least `min_gap` apart.
pub fn random_linear(dim: usize, seed: u64, symmetry: Symmetry, min_gap: f64) -> PolynomialHamiltonian {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h0 = loop {
        let candidate = random_matrix(&mut rng, dim, symmetry);
        let gap = eigen_decompose(&candidate)
            .map(|e| min_pairwise_gap(&e.values))
            .unwrap_or(0.0);
        if gap >= min_gap {
            break candidate;
        }
    };
    let h1 = random_matrix(&mut rng, dim, symmetry);
    PolynomialHamiltonian::new(vec![h0, h1]).expect("random terms are valid")
}

#[derive(Debug, Clone)]
pub struct BuiltinModel {
    pub name: &'static str,
    pub description: &'static str,
    pub hamiltonian: PolynomialHamiltonian,
}

pub const BUILTIN_NAMES: [&str; 3] = ["toy-sec5", "hermitian-2level", "random-linear-N4-seed7"];

pub fn builtin(name: &str) -> Option<BuiltinModel> {
    let (description, hamiltonian) = match name {
        "toy-sec5" => (
            "h σx + q α1 iσz + q² α2 σx with h = α1 = α2 = 1",
            toy(1.0, 1.0, 1.0),
        ),
        "hermitian-2level" => ("diag(0, 2) + q σx", hermitian_two_level()),
        "random-linear-N4-seed7" => (
            "seeded random non-Hermitian 4x4 linear family",
            random_linear(4, 7, Symmetry::NonHermitian, 0.1),
        ),
        _ => return None,
    };
    let name = BUILTIN_NAMES.iter().copied().find(|n| *n == name)?;
    Some(BuiltinModel {
        name,
        description,
        hamiltonian,
    })
}

pub fn builtins() -> Vec<BuiltinModel> {
    BUILTIN_NAMES
        .iter()
        .map(|n| builtin(n).expect("listed built-in exists"))
        .collect()
}
