//! Order-by-order solution of the generator hierarchy
//!
//! ```text
//! [H, K₀] = i (K₁ − ∂_q H),    [H, K₁] = 0
//! ```
//!
//! for `H(q) = Σⱼ qʲ H⁽ʲ⁾`. In the eigenframe of `H⁽⁰⁾` every commutator with
//! `H⁽⁰⁾` becomes `(hₘ − hₙ)·Xₘₙ`, so each order is elementwise arithmetic:
//!
//! * off-diagonal `K₁⁽ℓ⁾` from the order-ℓ part of `[H, K₁] = 0`;
//! * diagonal `K₁⁽ℓ⁾` from the diagonal of the order-ℓ part of the first equation;
//! * off-diagonal `K₀⁽ℓ⁾` from the off-diagonal of the same equation;
//! * diagonal `K₀⁽ℓ⁾` is free (gauge) and set by [`Gauge`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{check_dim, check_matrix, commutator, max_abs, CMatrix, SpectralFrame};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Relative size of the diagonal of `Σₐ[H⁽ᵃ⁾, K₁⁽ℓ⁻ᵃ⁾]` tolerated before the
/// hierarchy is declared inconsistent.
const CONSISTENCY_TOL: f64 = 1e-8;

/// `H(q) = Σⱼ qʲ H⁽ʲ⁾`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialHamiltonian {
    terms: Vec<CMatrix>,
}

impl PolynomialHamiltonian {
    pub fn new(terms: Vec<CMatrix>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("at least H(0) is required".into()))?;
        check_matrix(first)?;
        let dim = first.nrows();
        if dim == 0 {
            return Err(Error::InvalidArgument("zero-dimensional Hamiltonian".into()));
        }
        for t in &terms[1..] {
            check_matrix(t)?;
            check_dim(t, dim)?;
        }
        Ok(PolynomialHamiltonian { terms })
    }

    pub fn dim(&self) -> usize {
        self.terms[0].nrows()
    }

    /// Highest stored power of `q`.
    pub fn degree(&self) -> usize {
        self.terms.len() - 1
    }

    pub fn terms(&self) -> &[CMatrix] {
        &self.terms
    }

    pub fn h0(&self) -> &CMatrix {
        &self.terms[0]
    }

    /// `H⁽ʲ⁾`, or `None` above the degree.
    pub fn term(&self, j: usize) -> Option<&CMatrix> {
        self.terms.get(j)
    }

    pub fn at(&self, q: f64) -> CMatrix {
        // Horner in q
        let mut acc = self.terms[self.degree()].clone();
        for t in self.terms[..self.degree()].iter().rev() {
            acc = acc * Complex64::new(q, 0.0) + t;
        }
        acc
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms
            .iter()
            .all(|t| max_abs(&(t - t.adjoint())) <= tol * max_abs(t).max(1.0))
    }

    /// Largest entry modulus over all terms, floored at 1.
    pub fn scale(&self) -> f64 {
        self.terms.iter().map(max_abs).fold(1.0, f64::max)
    }
}

/// Choice for the free diagonal of each `K₀⁽ʲ⁾` in the eigenframe.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum Gauge {
    /// `[[K₀⁽ʲ⁾]]ₙₙ = 0` for all `j`, `n`.
    #[default]
    ZeroDiagonal,
    /// Explicit `[[K₀⁽ʲ⁾]]ₙₙ = diagonals[j][n]`; orders beyond the list are
    /// zero.
    Diagonal(Vec<Vec<Complex64>>),
}

impl Gauge {
    pub fn tag(&self) -> &'static str {
        match self {
            Gauge::ZeroDiagonal => "zero-diag",
            Gauge::Diagonal(_) => "diagonal",
        }
    }

    fn diagonal(&self, order: usize, n: usize) -> Complex64 {
        match self {
            Gauge::ZeroDiagonal => Complex64::new(0.0, 0.0),
            Gauge::Diagonal(d) => d
                .get(order)
                .and_then(|row| row.get(n))
                .copied()
                .unwrap_or_default(),
        }
    }
}

/// Solved `K₀⁽⁰⁾…K₀⁽ᴸ⁾`, `K₁⁽⁰⁾…K₁⁽ᴸ⁾` in the computational basis, plus the
/// same coefficients in the eigenframe.
#[derive(Debug, Clone)]
pub struct GeneratorSeries {
    k0: Vec<CMatrix>,
    k1: Vec<CMatrix>,
    k0_frame: Vec<CMatrix>,
    k1_frame: Vec<CMatrix>,
    gauge: Gauge,
    frame: SpectralFrame,
}

impl GeneratorSeries {
    pub fn order(&self) -> usize {
        self.k0.len() - 1
    }

    pub fn k0(&self) -> &[CMatrix] {
        &self.k0
    }

    pub fn k1(&self) -> &[CMatrix] {
        &self.k1
    }

    /// `[[K₀⁽ʲ⁾]]`.
    pub fn k0_brackets(&self) -> &[CMatrix] {
        &self.k0_frame
    }

    /// `[[K₁⁽ʲ⁾]]`.
    pub fn k1_brackets(&self) -> &[CMatrix] {
        &self.k1_frame
    }

    pub fn gauge(&self) -> &Gauge {
        &self.gauge
    }

    pub fn frame(&self) -> &SpectralFrame {
        &self.frame
    }

    pub fn dim(&self) -> usize {
        self.frame.dim()
    }

    /// Builds a series from explicit coefficients (e.g. for exercising the
    /// correction formulas on arbitrary operators).
    pub fn from_parts(
        frame: SpectralFrame,
        k0: Vec<CMatrix>,
        k1: Vec<CMatrix>,
        gauge: Gauge,
    ) -> Result<Self> {
        if k0.is_empty() || k0.len() != k1.len() {
            return Err(Error::InvalidArgument(format!(
                "need matching non-empty K0/K1 lists, got {} and {}",
                k0.len(),
                k1.len()
            )));
        }
        let k0_frame = k0
            .iter()
            .map(|m| frame.to_eigenbasis(m))
            .collect::<Result<Vec<_>>>()?;
        let k1_frame = k1
            .iter()
            .map(|m| frame.to_eigenbasis(m))
            .collect::<Result<Vec<_>>>()?;
        Ok(GeneratorSeries {
            k0,
            k1,
            k0_frame,
            k1_frame,
            gauge,
            frame,
        })
    }

    pub(crate) fn require_order(&self, required: usize) -> Result<()> {
        if self.order() < required {
            return Err(Error::InsufficientOrder {
                required,
                available: self.order(),
            });
        }
        Ok(())
    }
}

/// Solves the hierarchy through order `order` in the zero-diagonal gauge.
pub fn solve_generators(
    h: &PolynomialHamiltonian,
    frame: &SpectralFrame,
    order: usize,
) -> Result<GeneratorSeries> {
    solve_generators_with_gauge(h, frame, order, &Gauge::ZeroDiagonal)
}

pub fn solve_generators_with_gauge(
    h: &PolynomialHamiltonian,
    frame: &SpectralFrame,
    order: usize,
    gauge: &Gauge,
) -> Result<GeneratorSeries> {
    let dim = frame.dim();
    check_dim(h.h0(), dim)?;
    if !frame.diagonalizes(h.h0()) {
        return Err(Error::InvalidArgument(
            "spectral frame was not built from H(0)".into(),
        ));
    }
    let threshold = frame.options().gap_tol * frame.scale();
    if frame.min_gap() < threshold {
        return Err(Error::DegenerateSpectrum {
            min_gap: frame.min_gap(),
            threshold,
        });
    }

    let energies = frame.eigenvalues();
    let p = h.degree();
    // H⁽ʲ⁾ in the eigenframe, zero-padded through order + 1.
    let hf: Vec<CMatrix> = (0..=order + 1)
        .map(|j| match h.term(j) {
            Some(t) => frame.to_eigenbasis(t),
            None => Ok(CMatrix::zeros(dim, dim)),
        })
        .collect::<Result<_>>()?;

    let mut k0f: Vec<CMatrix> = Vec::with_capacity(order + 1);
    let mut k1f: Vec<CMatrix> = Vec::with_capacity(order + 1);

    for l in 0..=order {
        let amax = p.min(l);

        // Σₐ [H⁽ᵃ⁾, K₁⁽ˡ⁻ᵃ⁾] and Σₐ [H⁽ᵃ⁾, K₀⁽ˡ⁻ᵃ⁾] over lower orders.
        let mut mix1 = CMatrix::zeros(dim, dim);
        let mut mix0 = CMatrix::zeros(dim, dim);
        let mut mix1_scale: f64 = 0.0;
        for a in 1..=amax {
            mix1 += commutator(&hf[a], &k1f[l - a]);
            mix0 += commutator(&hf[a], &k0f[l - a]);
            mix1_scale += max_abs(&hf[a]) * max_abs(&k1f[l - a]);
        }

        let defect = (0..dim).fold(0.0_f64, |acc, n| acc.max(mix1[(n, n)].norm()));
        if defect > CONSISTENCY_TOL * mix1_scale.max(1.0) {
            return Err(Error::ConsistencyFailure { order: l, defect });
        }

        let scale_factor = Complex64::new((l + 1) as f64, 0.0);
        let mut k1 = CMatrix::zeros(dim, dim);
        for n in 0..dim {
            for m in 0..dim {
                if m == n {
                    k1[(n, n)] = scale_factor * hf[l + 1][(n, n)] - I * mix0[(n, n)];
                } else {
                    k1[(m, n)] = -mix1[(m, n)] / (energies[m] - energies[n]);
                }
            }
        }

        let mut k0 = CMatrix::zeros(dim, dim);
        for n in 0..dim {
            for m in 0..dim {
                k0[(m, n)] = if m == n {
                    gauge.diagonal(l, n)
                } else {
                    (I * k1[(m, n)] - I * scale_factor * hf[l + 1][(m, n)] - mix0[(m, n)])
                        / (energies[m] - energies[n])
                };
            }
        }

        k1f.push(k1);
        k0f.push(k0);
    }

    let k0 = k0f
        .iter()
        .map(|m| frame.from_eigenbasis(m))
        .collect::<Result<Vec<_>>>()?;
    let k1 = k1f
        .iter()
        .map(|m| frame.from_eigenbasis(m))
        .collect::<Result<Vec<_>>>()?;

    Ok(GeneratorSeries {
        k0,
        k1,
        k0_frame: k0f,
        k1_frame: k1f,
        gauge: gauge.clone(),
        frame: frame.clone(),
    })
}

/// Per-order max-norm defect of both hierarchy equations, computed in the
/// computational basis:
///
/// ```text
/// Σₐ [H⁽ᵃ⁾, K₀⁽ˡ⁻ᵃ⁾] − i K₁⁽ˡ⁾ + i (ℓ+1) H⁽ˡ⁺¹⁾    and    Σₐ [H⁽ᵃ⁾, K₁⁽ˡ⁻ᵃ⁾]
/// ```
pub fn hierarchy_residuals(h: &PolynomialHamiltonian, gens: &GeneratorSeries) -> Vec<f64> {
    let dim = h.dim();
    let zero = CMatrix::zeros(dim, dim);
    (0..=gens.order())
        .map(|l| {
            let mut first = -gens.k1[l].clone() * I;
            if let Some(next) = h.term(l + 1) {
                first += next * (I * Complex64::new((l + 1) as f64, 0.0));
            }
            let mut second = zero.clone();
            for a in 0..=h.degree().min(l) {
                first += commutator(&h.terms[a], &gens.k0[l - a]);
                second += commutator(&h.terms[a], &gens.k1[l - a]);
            }
            max_abs(&first).max(max_abs(&second))
        })
        .collect()
}

impl GeneratorSeries {
    /// Returns a copy with `K₀⁽ʲ⁾ += shift` (computational basis), without
    /// re-solving higher orders.
    pub fn with_shifted_k0(&self, j: usize, shift: &CMatrix) -> Result<Self> {
        self.require_order(j)?;
        let mut k0 = self.k0.clone();
        k0[j] += shift;
        GeneratorSeries::from_parts(self.frame.clone(), k0, self.k1.clone(), self.gauge.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigenframe, FrameOptions};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn m2(a: [Complex64; 4]) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &a)
    }

    fn toy() -> PolynomialHamiltonian {
        let z = c(0., 0.);
        let one = c(1., 0.);
        PolynomialHamiltonian::new(vec![
            m2([z, one, one, z]),
            m2([c(0., 1.), z, z, c(0., -1.)]),
            m2([z, one, one, z]),
        ])
        .unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn toy_generators_match_closed_form() {
        let h = toy();
        let frame = eigenframe(h.h0(), FrameOptions::default()).unwrap();
        let g = solve_generators(&h, &frame, 2).unwrap();
        let z = c(0., 0.);
        assert!(close(&g.k1()[0], &CMatrix::zeros(2, 2), 1e-12));
        assert!(close(&g.k0()[0], &m2([z, c(-0.5, 0.), c(0.5, 0.), z]), 1e-12));
        assert!(close(&g.k1()[1], &m2([z, c(1., 0.), c(1., 0.), z]), 1e-12));
        assert!(close(&g.k0()[1], &CMatrix::zeros(2, 2), 1e-12));
        assert!(close(&g.k1()[2], &m2([c(0., 1.), z, z, c(0., -1.)]), 1e-12));
        assert!(close(&g.k0()[2], &m2([z, c(1., 0.), c(-1., 0.), z]), 1e-12));
        assert_eq!(g.gauge().tag(), "zero-diag");
        let res = hierarchy_residuals(&h, &g);
        assert_eq!(res.len(), 3);
        assert!(res.iter().all(|r| *r <= 1e-12), "{res:?}");
    }

    #[test]
    fn zero_perturbation_gives_zero_generators() {
        let z = c(0., 0.);
        let h0 = m2([c(1., 0.), c(0.3, 0.2), z, c(-1., 0.5)]);
        let h = PolynomialHamiltonian::new(vec![h0, CMatrix::zeros(2, 2)]).unwrap();
        let frame = eigenframe(h.h0(), FrameOptions::default()).unwrap();
        let g = solve_generators(&h, &frame, 4).unwrap();
        for j in 0..=4 {
            assert_eq!(max_abs(&g.k0()[j]), 0.0);
            assert_eq!(max_abs(&g.k1()[j]), 0.0);
        }
        assert!(hierarchy_residuals(&h, &g).iter().all(|r| *r == 0.0));
    }

    #[test]
    fn identity_shift_leaves_residuals() {
        let h = toy();
        let frame = eigenframe(h.h0(), FrameOptions::default()).unwrap();
        let g = solve_generators(&h, &frame, 2).unwrap();
        let shifted = g
            .with_shifted_k0(0, &(CMatrix::identity(2, 2) * c(0.37, -1.2)))
            .unwrap();
        assert_eq!(hierarchy_residuals(&h, &g), hierarchy_residuals(&h, &shifted));
    }

    #[test]
    fn frame_must_come_from_h0() {
        let h = toy();
        let other = m2([c(2., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]);
        let frame = eigenframe(&other, FrameOptions::default()).unwrap();
        assert!(solve_generators(&h, &frame, 1).is_err());
    }

    #[test]
    fn hamiltonian_validation() {
        assert!(PolynomialHamiltonian::new(vec![]).is_err());
        let err = PolynomialHamiltonian::new(vec![CMatrix::zeros(2, 2), CMatrix::zeros(3, 3)])
            .unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let h = toy();
        assert_eq!(h.degree(), 2);
        let q = 0.3;
        let direct = &h.terms()[0] + &h.terms()[1] * c(q, 0.) + &h.terms()[2] * c(q * q, 0.);
        assert!(close(&h.at(q), &direct, 1e-15));
        assert!(!h.is_hermitian(1e-12));
    }
}
