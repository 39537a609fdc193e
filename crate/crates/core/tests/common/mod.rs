#![allow(dead_code)]

use geompert::models::{random_linear, Symmetry};
use geompert::spectral::{eigen_decompose, min_pairwise_gap};
use geompert::{CMatrix, PolynomialHamiltonian};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, dim: usize, hermitian: bool) -> CMatrix {
    let m = CMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    if hermitian {
        (&m + m.adjoint()) * Complex64::new(0.5, 0.0)
    } else {
        m
    }
}

/// Random polynomial family whose `H⁽⁰⁾` gap is at least `min_gap`.
pub fn random_family(seed: u64, dim: usize, degree: usize, hermitian: bool, min_gap: f64) -> PolynomialHamiltonian {
    let mut r = rng(seed);
    let h0 = loop {
        let m = random_matrix(&mut r, dim, hermitian);
        if min_pairwise_gap(&eigen_decompose(&m).unwrap().values) >= min_gap {
            break m;
        }
    };
    let mut terms = vec![h0];
    for _ in 0..degree {
        terms.push(random_matrix(&mut r, dim, hermitian));
    }
    PolynomialHamiltonian::new(terms).unwrap()
}

/// Fifty seeded linear models of dimension 2…6.
pub fn linear_models(symmetry: Symmetry) -> Vec<PolynomialHamiltonian> {
    (0..50u64)
        .map(|seed| random_linear(2 + (seed as usize % 5), 1000 + seed, symmetry, 0.1))
        .collect()
}

pub fn vec_rel(a: &geompert::CVector, b: &geompert::CVector) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1.0)
}

/// Size of the terms summed to form `|n⁽ᵏ⁾⟩`: `(1/k) Σⱼ ‖K₀⁽ʲ⁻¹⁾‖ ‖n⁽ᵏ⁻ʲ⁾‖`.
/// Cancellation among them bounds how closely two routes can agree.
pub fn state_term_scale(gens: &geompert::GeneratorSeries, states: &[geompert::CVector], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    (1..=k)
        .map(|j| gens.k0()[j - 1].norm() * states[k - j].norm())
        .sum::<f64>()
        / k as f64
}

/// Size of the terms summed to form `hₙ⁽ᵏ⁾` by projection onto the dual
/// vector `wₙ`.
pub fn eigen_term_scale(
    gens: &geompert::GeneratorSeries,
    n: usize,
    states: &[geompert::CVector],
    h: &[Complex64],
    k: usize,
) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let w = gens.frame().left().row(n).norm();
    let mut s = 0.0;
    for j in 1..=k {
        s += gens.k1()[j - 1].norm() * states[k - j].norm();
        if j < k {
            s += j as f64 * h[j].norm() * states[k - j].norm();
        }
    }
    w * s / k as f64
}
