//! Eigenstate and eigenvalue corrections from a solved [`GeneratorSeries`].
//!
//! State corrections follow from `K₀|n⟩ = i ∂_q|n⟩` order by order,
//!
//! ```text
//! |n⁽ᵏ⁾⟩ = −(i/k) Σⱼ₌₁..ₖ K₀⁽ʲ⁻¹⁾ |n⁽ᵏ⁻ʲ⁾⟩,
//! ```
//!
//! or in closed form through the dual Bell polynomials. Eigenvalue
//! corrections come from `K₁|n⟩ = ∂_q hₙ |n⟩`, whose order-(k−1) part
//!
//! ```text
//! Σⱼ₌₁..ₖ (K₁⁽ʲ⁻¹⁾ − j hₙ⁽ʲ⁾) |n⁽ᵏ⁻ʲ⁾⟩ = 0
//! ```
//!
//! is projected onto `⟨⟨n⁽⁰⁾|`.

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::bellpoly::{dual_bell_sequence, evaluate_words, factorial};
use crate::error::{Error, Result};
use crate::generators::{solve_generators, GeneratorSeries, PolynomialHamiltonian};
use crate::spectral::{canonical_cmp, check_dim, eigenframe, max_abs, CMatrix, CVector, FrameOptions, SpectralFrame};

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `⟨⟨n⁽⁰⁾| A |v⟩` with the dual row taken from the frame.
fn sandwich(frame: &SpectralFrame, n: usize, a: Option<&CMatrix>, v: &CVector) -> Complex64 {
    let row = frame.left().row(n);
    match a {
        Some(a) => (row * (a * v))[(0, 0)],
        None => (row * v)[(0, 0)],
    }
}

fn check_request(gens: &GeneratorSeries, n: usize, order: usize) -> Result<()> {
    gens.frame().check_index(n)?;
    gens.require_order(order.saturating_sub(1))
}

/// Truncated series for one eigenstate.
#[derive(Debug, Clone)]
pub struct PerturbationSeries {
    pub state: usize,
    pub eigenvalue_corrections: Vec<Complex64>,
    pub state_corrections: Vec<CVector>,
    pub gauge: String,
}

impl PerturbationSeries {
    pub fn order(&self) -> usize {
        self.eigenvalue_corrections.len() - 1
    }

    /// `Σₖ qᵏ hₙ⁽ᵏ⁾` through the stored order.
    pub fn eigenvalue_at(&self, q: f64) -> Complex64 {
        self.eigenvalue_corrections
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, h| acc * q + h)
    }

    /// `Σₖ qᵏ |n⁽ᵏ⁾⟩` through the stored order.
    pub fn state_at(&self, q: f64) -> CVector {
        let dim = self.state_corrections[0].len();
        self.state_corrections
            .iter()
            .rev()
            .fold(CVector::zeros(dim), |acc, v| acc * real(q) + v)
    }

    /// Same series with one eigenvalue coefficient replaced.
    pub fn with_eigenvalue_correction(&self, k: usize, value: Complex64) -> Self {
        let mut out = self.clone();
        out.eigenvalue_corrections[k] = value;
        out
    }
}

/// `|n⁽⁰⁾⟩ … |n⁽ᴷ⁾⟩` by the direct recursion.
pub fn state_corrections_recursive(
    gens: &GeneratorSeries,
    n: usize,
    order: usize,
) -> Result<Vec<CVector>> {
    check_request(gens, n, order)?;
    let k0 = gens.k0();
    let mut states = vec![gens.frame().right_vector(n)];
    for k in 1..=order {
        let mut acc = CVector::zeros(gens.dim());
        for j in 1..=k {
            acc += &k0[j - 1] * &states[k - j];
        }
        states.push(acc * (-I / real(k as f64)));
    }
    Ok(states)
}

/// Symbols `Pⱼ = (j−1)! · (−i K₀⁽ʲ⁻¹⁾)` for `j = 1…count`.
fn bell_symbols(gens: &GeneratorSeries, count: usize) -> Vec<CMatrix> {
    (1..=count)
        .map(|j| &gens.k0()[j - 1] * (-I * real(factorial(j - 1))))
        .collect()
}

/// `|n⁽ᵏ⁾⟩ = 𝔹ₖ(P₁…Pₖ)|n⁽⁰⁾⟩ / k!` for `k = 0…K`.
pub fn state_corrections_bell(
    gens: &GeneratorSeries,
    n: usize,
    order: usize,
) -> Result<Vec<CVector>> {
    check_request(gens, n, order)?;
    let v0 = gens.frame().right_vector(n);
    let symbols = bell_symbols(gens, order);
    dual_bell_sequence(order)
        .iter()
        .enumerate()
        .map(|(k, b)| Ok(evaluate_words(b, &symbols, &v0)? / real(factorial(k))))
        .collect()
}

/// `hₙ⁽⁰⁾ … hₙ⁽ᴷ⁾` by projecting the order-matched eigenvalue equation onto
/// the dual vector, reusing the recursive state corrections:
///
/// ```text
/// k hₙ⁽ᵏ⁾ = Σⱼ₌₁..ₖ ⟨⟨n|K₁⁽ʲ⁻¹⁾|n⁽ᵏ⁻ʲ⁾⟩ − Σⱼ₌₁..ₖ₋₁ j hₙ⁽ʲ⁾ ⟨⟨n|n⁽ᵏ⁻ʲ⁾⟩
/// ```
pub fn eigenvalue_corrections(
    gens: &GeneratorSeries,
    n: usize,
    order: usize,
) -> Result<Vec<Complex64>> {
    let states = state_corrections_recursive(gens, n, order)?;
    Ok(eigenvalues_from_states(gens, n, &states))
}

fn eigenvalues_from_states(gens: &GeneratorSeries, n: usize, states: &[CVector]) -> Vec<Complex64> {
    let frame = gens.frame();
    let k1 = gens.k1();
    let order = states.len() - 1;
    let overlaps: Vec<Complex64> = states.iter().map(|v| sandwich(frame, n, None, v)).collect();
    let mut h = vec![frame.eigenvalue(n)];
    for k in 1..=order {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 1..=k {
            acc += sandwich(frame, n, Some(&k1[j - 1]), &states[k - j]);
        }
        for j in 1..k {
            acc -= real(j as f64) * h[j] * overlaps[k - j];
        }
        h.push(acc / real(k as f64));
    }
    h
}

/// `hₙ⁽⁰⁾ … hₙ⁽ᴷ⁾` from the closed Bell form
///
/// ```text
/// hₙ⁽ᵏ⁾ = [[K₁⁽ᵏ⁻¹⁾]]ₙₙ / k
///        + Σⱼ₌₁..ₖ₋₁ ([[K₁⁽ʲ⁻¹⁾ 𝔹ₖ₋ⱼ]]ₙₙ − j hₙ⁽ʲ⁾ [[𝔹ₖ₋ⱼ]]ₙₙ) / ((k−j)! k)
/// ```
///
/// with the same symbol substitution as [`state_corrections_bell`]. The
/// weight `j` on `hₙ⁽ʲ⁾` comes from the `j hₙ⁽ʲ⁾` term of the projected
/// equation.
pub fn eigenvalue_corrections_bell(
    gens: &GeneratorSeries,
    n: usize,
    order: usize,
) -> Result<Vec<Complex64>> {
    check_request(gens, n, order)?;
    let frame = gens.frame();
    let v0 = frame.right_vector(n);
    let symbols = bell_symbols(gens, order);
    // 𝔹ₘ |n⁽⁰⁾⟩ for m < K
    let applied: Vec<CVector> = dual_bell_sequence(order.saturating_sub(1))
        .iter()
        .map(|b| evaluate_words(b, &symbols, &v0))
        .collect::<Result<_>>()?;
    let k1 = gens.k1();
    let mut h = vec![frame.eigenvalue(n)];
    for k in 1..=order {
        let kf = real(k as f64);
        let mut acc = gens.k1_brackets()[k - 1][(n, n)] / kf;
        for j in 1..k {
            let bv = &applied[k - j];
            let num = sandwich(frame, n, Some(&k1[j - 1]), bv)
                - real(j as f64) * h[j] * sandwich(frame, n, None, bv);
            acc += num / (real(factorial(k - j)) * kf);
        }
        h.push(acc);
    }
    Ok(h)
}

/// Largest deviation between the recursive and Bell state corrections of
/// state `n` through order `K`, each order measured against the size of the
/// terms it sums, `(1/k) Σⱼ ‖K₀⁽ʲ⁻¹⁾‖ ‖n⁽ᵏ⁻ʲ⁾‖` (at least 1). Cancellation
/// among those terms is what limits agreement in floating point.
pub fn state_route_deviation(gens: &GeneratorSeries, n: usize, order: usize) -> Result<f64> {
    let rec = state_corrections_recursive(gens, n, order)?;
    let bell = state_corrections_bell(gens, n, order)?;
    let mut worst: f64 = 0.0;
    for k in 1..=order {
        let terms: f64 = (1..=k)
            .map(|j| gens.k0()[j - 1].norm() * rec[k - j].norm())
            .sum::<f64>()
            / k as f64;
        worst = worst.max((&rec[k] - &bell[k]).norm() / terms.max(1.0));
    }
    Ok(worst)
}

/// Largest deviation between the projected-recursion and Bell closed-form
/// eigenvalue corrections, measured like [`state_route_deviation`].
pub fn eigenvalue_route_deviation(gens: &GeneratorSeries, n: usize, order: usize) -> Result<f64> {
    let states = state_corrections_recursive(gens, n, order)?;
    let a = eigenvalues_from_states(gens, n, &states);
    let b = eigenvalue_corrections_bell(gens, n, order)?;
    let w = gens.frame().left().row(n).norm();
    let mut worst: f64 = 0.0;
    for k in 1..=order {
        let mut terms = 0.0;
        for j in 1..=k {
            terms += gens.k1()[j - 1].norm() * states[k - j].norm();
            if j < k {
                terms += j as f64 * a[j].norm() * states[k - j].norm();
            }
        }
        let scale = (w * terms / k as f64).max(1.0);
        worst = worst.max((a[k] - b[k]).norm() / scale);
    }
    Ok(worst)
}

/// Full series for state `n` through order `K`.
pub fn perturbation_series(
    gens: &GeneratorSeries,
    n: usize,
    order: usize,
) -> Result<PerturbationSeries> {
    let states = state_corrections_recursive(gens, n, order)?;
    let eigenvalue_corrections = eigenvalues_from_states(gens, n, &states);
    Ok(PerturbationSeries {
        state: n,
        eigenvalue_corrections,
        state_corrections: states,
        gauge: gens.gauge().tag().to_string(),
    })
}

/// The first three corrections written out in double brackets of `K₀`, `K₁`
/// (valid for any gauge and polynomial degree; needs order ≥ 2).
pub fn explicit_low_order_eigenvalues(gens: &GeneratorSeries, n: usize) -> Result<[Complex64; 3]> {
    gens.frame().check_index(n)?;
    gens.require_order(2)?;
    let k0 = gens.k0_brackets();
    let k1 = gens.k1_brackets();
    let b = |m: &CMatrix| m[(n, n)];
    let h1 = b(&k1[0]);
    let k0sq = &k0[0] * &k0[0];
    let h2 = (b(&k1[1]) - I * b(&(&k1[0] * &k0[0])) + I * b(&k0[0]) * h1) / 2.0;
    let h3 = (real(2.0) * b(&k1[2]) - 2.0 * I * b(&(&k1[1] * &k0[0]))
        - I * b(&(&k1[0] * &k0[1]))
        - b(&(&k1[0] * &k0sq))
        + I * b(&k0[1]) * h1
        + b(&k0sq) * h1
        + 4.0 * I * b(&k0[0]) * h2)
        / 6.0;
    Ok([h1, h2, h3])
}

/// Gauge-free forms for a linear family, using only `[[K₁⁽ʲ⁾]]`:
/// `h¹ = [[K₁⁽⁰⁾]]ₙₙ`, `h² = [[K₁⁽¹⁾]]ₙₙ / 2`, and
///
/// ```text
/// h³ = [[K₁⁽²⁾]]ₙₙ / 3 − (1/3) Σₘ≠ₙ [[K₁⁽¹⁾]]ₙₘ [[K₁⁽¹⁾]]ₘₙ / (hₘ⁽¹⁾ − hₙ⁽¹⁾).
/// ```
///
/// Each summand equals `(hₘ⁽¹⁾ − hₙ⁽¹⁾)·O(1)`, so pairs whose first-order
/// corrections coincide contribute nothing and are skipped.
pub fn k1_linear_corrections(gens: &GeneratorSeries, n: usize) -> Result<[Complex64; 3]> {
    gens.frame().check_index(n)?;
    gens.require_order(2)?;
    let k1 = gens.k1_brackets();
    let h1: Vec<Complex64> = (0..gens.dim()).map(|m| k1[0][(m, m)]).collect();
    let floor = 1e-12 * h1.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
    let mut sum = Complex64::new(0.0, 0.0);
    for m in (0..gens.dim()).filter(|&m| m != n) {
        let delta = h1[m] - h1[n];
        if delta.norm() > floor {
            sum += k1[1][(n, m)] * k1[1][(m, n)] / delta;
        }
    }
    Ok([h1[n], k1[1][(n, n)] / 2.0, k1[2][(n, n)] / 3.0 - sum / 3.0])
}

/// Closed forms for `H = H⁽⁰⁾ + q H⁽¹⁾` in terms of `[[H⁽¹⁾]]` alone.
pub fn rs_linear_corrections(
    frame: &SpectralFrame,
    h1: &CMatrix,
    n: usize,
) -> Result<[Complex64; 3]> {
    frame.check_index(n)?;
    check_dim(h1, frame.dim())?;
    let b = frame.to_eigenbasis(h1)?;
    Ok(rs_from_brackets(frame.eigenvalues(), &b, n))
}

fn rs_from_brackets(energies: &[Complex64], b: &CMatrix, n: usize) -> [Complex64; 3] {
    let dim = energies.len();
    let en = energies[n];
    let others = || (0..dim).filter(move |&m| m != n);
    let first = b[(n, n)];
    let mut second = Complex64::new(0.0, 0.0);
    let mut renorm = Complex64::new(0.0, 0.0);
    for m in others() {
        let pair = b[(n, m)] * b[(m, n)];
        second += pair / (en - energies[m]);
        renorm += pair / ((en - energies[m]) * (en - energies[m]));
    }
    let mut third = Complex64::new(0.0, 0.0);
    for m in others() {
        for l in others() {
            third += b[(n, m)] * b[(m, l)] * b[(l, n)] / ((en - energies[m]) * (en - energies[l]));
        }
    }
    [first, second, third - first * renorm]
}

/// Textbook Rayleigh–Schrödinger corrections for a Hermitian linear family,
/// from an orthonormal Hermitian eigenbasis (`W = V†`). States are returned
/// in ascending eigenvalue order.
pub fn hermitian_rs_corrections(h0: &CMatrix, h1: &CMatrix) -> Result<Vec<[Complex64; 3]>> {
    crate::spectral::check_matrix(h0)?;
    check_dim(h1, h0.nrows())?;
    let eig = SymmetricEigen::new(h0.clone());
    let mut order: Vec<usize> = (0..h0.nrows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies: Vec<Complex64> = order.iter().map(|&i| real(eig.eigenvalues[i])).collect();
    let u = eig.eigenvectors.select_columns(order.iter());
    let b = u.adjoint() * h1 * &u;
    Ok((0..energies.len())
        .map(|n| rs_from_brackets(&energies, &b, n))
        .collect())
}

/// `|a − b| / max(|a|, |b|, floor)`, zero when both vanish.
pub fn relative_deviation(a: Complex64, b: Complex64, floor: f64) -> f64 {
    let diff = (a - b).norm();
    if diff == 0.0 {
        return 0.0;
    }
    diff / a.norm().max(b.norm()).max(floor).max(f64::MIN_POSITIVE)
}

/// Natural magnitude `s^k / g^(k−1)` of a k-th order correction, with `s` the
/// largest `|[[H⁽¹⁾]]ₘₙ|` and `g` the smallest unperturbed gap.
pub fn natural_scale(frame: &SpectralFrame, h1_brackets: &CMatrix, k: usize) -> f64 {
    let s = max_abs(h1_brackets);
    let g = frame.min_gap();
    if k == 0 {
        return 1.0;
    }
    let value = s.powi(k as i32) / g.powi(k as i32 - 1);
    if value.is_finite() {
        value
    } else {
        0.0
    }
}

pub const LINEAR_CROSSCHECK_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LinearStateCheck {
    pub state: usize,
    /// From the projected eigenvalue recursion.
    pub recursion: [Complex64; 3],
    /// From `[[K₁]]` elements only.
    pub k1_forms: [Complex64; 3],
    /// From `[[H⁽¹⁾]]` elements only.
    pub closed_forms: [Complex64; 3],
    pub max_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct LinearCrosscheck {
    pub states: Vec<LinearStateCheck>,
    pub max_deviation: f64,
    pub tolerance: f64,
}

impl LinearCrosscheck {
    pub fn passed(&self) -> bool {
        self.max_deviation <= self.tolerance
    }
}

/// Computes `h⁽¹⁾, h⁽²⁾, h⁽³⁾` of a linear family three independent ways
/// and reports the largest pairwise relative deviation.
pub fn crosscheck_linear(
    h: &PolynomialHamiltonian,
    options: FrameOptions,
) -> Result<LinearCrosscheck> {
    if h.degree() != 1 {
        return Err(Error::DegreeMismatch {
            expected: 1,
            found: h.degree(),
        });
    }
    let frame = eigenframe(h.h0(), options)?;
    let gens = solve_generators(h, &frame, 2)?;
    let h1 = &h.terms()[1];
    let b = frame.to_eigenbasis(h1)?;
    let mut states = Vec::with_capacity(frame.dim());
    let mut overall: f64 = 0.0;
    for n in 0..frame.dim() {
        let rec = eigenvalue_corrections(&gens, n, 3)?;
        let recursion = [rec[1], rec[2], rec[3]];
        let k1_forms = k1_linear_corrections(&gens, n)?;
        let closed_forms = rs_from_brackets(frame.eigenvalues(), &b, n);
        let mut worst: f64 = 0.0;
        for k in 0..3 {
            let floor = natural_scale(&frame, &b, k + 1);
            let triple = [recursion[k], k1_forms[k], closed_forms[k]];
            for (x, y) in [(0, 1), (0, 2), (1, 2)] {
                worst = worst.max(relative_deviation(triple[x], triple[y], floor));
            }
        }
        overall = overall.max(worst);
        states.push(LinearStateCheck {
            state: n,
            recursion,
            k1_forms,
            closed_forms,
            max_deviation: worst,
        });
    }
    Ok(LinearCrosscheck {
        states,
        max_deviation: overall,
        tolerance: LINEAR_CROSSCHECK_TOL,
    })
}

/// Sorts per-state rows of a Hermitian computation into the canonical frame
/// order (identical to ascending order for real spectra).
pub fn canonical_positions(values: &[Complex64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| canonical_cmp(&values[a], &values[b]));
    idx
}
