//! Dense complex eigendecomposition of the unperturbed Hamiltonian and the
//! biorthogonal frame built from it.
//!
//! The frame holds the right eigenvectors `V` as columns and the dual rows
//! `W = V⁻¹`, so that `⟨⟨m|n⟩ = δₘₙ` holds to rounding. For a non-Hermitian
//! `H⁽⁰⁾` the dual rows play the role of `⟨n|G⁽⁰⁾` with the Hilbert-space
//! metric `G⁽⁰⁾ = (V V†)⁻¹`; forming `V⁻¹` directly is the same object
//! without the extra product.
//!
//! Double brackets `[[A]]ₘₙ = ⟨⟨m|A|n⟩` are the matrix elements of `W A V`.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative threshold on eigenvalue separation below which `H⁽⁰⁾` is treated
/// as degenerate.
pub const DEFAULT_GAP_TOL: f64 = 1e-8;
/// Tolerance on biorthonormality and eigen-residuals of an accepted frame.
pub const DEFAULT_FRAME_TOL: f64 = 1e-10;

const SCHUR_MAX_ITER: usize = 10_000;
const PHASE_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    pub frame_tol: f64,
    pub gap_tol: f64,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            frame_tol: DEFAULT_FRAME_TOL,
            gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

impl FrameOptions {
    pub fn with_gap_tol(mut self, gap_tol: f64) -> Self {
        self.gap_tol = gap_tol;
        self
    }
}

/// Eigenvalues and unit right eigenvectors of a dense complex matrix, in
/// canonical order.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<Complex64>,
    pub vectors: CMatrix,
}

/// Right/left eigenbasis of a non-degenerate `H⁽⁰⁾`.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    eigenvalues: Vec<Complex64>,
    right: CMatrix,
    left: CMatrix,
    min_gap: f64,
    options: FrameOptions,
}

/// Rejects non-square matrices and non-finite entries.
pub fn check_matrix(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NonSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            let z = m[(i, j)];
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry { row: i, col: j });
            }
        }
    }
    Ok(())
}

pub(crate) fn check_dim(m: &CMatrix, dim: usize) -> Result<()> {
    if m.nrows() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.nrows(),
        });
    }
    if m.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: m.ncols(),
        });
    }
    Ok(())
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Lexicographic (Re, Im) ordering used for every eigenvalue list.
pub fn canonical_cmp(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Smallest pairwise distance between eigenvalues; infinite for one value.
pub fn min_pairwise_gap(values: &[Complex64]) -> f64 {
    let mut gap = f64::INFINITY;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    gap
}

pub fn spectral_radius(values: &[Complex64]) -> f64 {
    values.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Eigendecomposition through the complex Schur form `A = Q T Q†`.
///
/// Eigenvectors of `T` come from back-substitution and are mapped back by
/// `Q`. Each vector is scaled to unit norm with its first non-negligible
/// component real and positive; values are sorted canonically.
pub fn eigen_decompose(m: &CMatrix) -> Result<Eigen> {
    check_matrix(m)?;
    let n = m.nrows();
    if n == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::NumericalFailure("Schur iteration did not converge".into()))?;
    let (q, t) = schur.unpack();

    let tnorm = max_abs(&t).max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * tnorm;
    let mut y = CMatrix::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        y[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in j + 1..=i {
                acc += t[(j, k)] * y[(k, i)];
            }
            let mut denom = t[(j, j)] - lambda;
            if denom.norm() < small {
                denom = Complex64::new(small, 0.0);
            }
            y[(j, i)] = -acc / denom;
        }
    }
    let mut vectors = &q * y;
    for mut col in vectors.column_iter_mut() {
        let norm = col.norm();
        if norm > 0.0 {
            col /= Complex64::new(norm, 0.0);
        }
        if let Some(z) = col.iter().find(|z| z.norm() > PHASE_THRESHOLD) {
            let phase = z.conj() / z.norm();
            col *= phase;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    order.sort_by(|&a, &b| canonical_cmp(&diag[a], &diag[b]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = vectors.select_columns(order.iter());
    Ok(Eigen { values, vectors })
}

/// Builds the biorthogonal frame of `h0`.
///
/// Fails with `DegenerateSpectrum` when two eigenvalues are closer than
/// `gap_tol · max(1, spectral radius)` and with `NumericalFailure` when the
/// eigen-residual or `W·V − I` exceeds `frame_tol`.
pub fn eigenframe(h0: &CMatrix, options: FrameOptions) -> Result<SpectralFrame> {
    let valid = options.gap_tol >= 0.0 && options.frame_tol > 0.0; // false for NaN
    if !valid {
        return Err(Error::InvalidArgument(format!(
            "tolerances must be positive (gap_tol {}, frame_tol {})",
            options.gap_tol, options.frame_tol
        )));
    }
    let Eigen { values, vectors } = eigen_decompose(h0)?;
    let min_gap = min_pairwise_gap(&values);
    let threshold = options.gap_tol * spectral_radius(&values).max(1.0);
    if min_gap < threshold {
        return Err(Error::DegenerateSpectrum { min_gap, threshold });
    }

    let left = vectors
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("eigenvector matrix is singular".into()))?;

    let n = h0.nrows();
    let biorth = (&left * &vectors - CMatrix::identity(n, n)).norm();
    if biorth > options.frame_tol {
        return Err(Error::NumericalFailure(format!(
            "biorthonormality defect {biorth:e} exceeds {:e}",
            options.frame_tol
        )));
    }
    let lambda = CMatrix::from_diagonal(&CVector::from_column_slice(&values));
    let residual = (h0 * &vectors - &vectors * lambda).norm();
    let scale = h0.norm().max(f64::MIN_POSITIVE);
    if residual > options.frame_tol * scale {
        return Err(Error::NumericalFailure(format!(
            "eigen-residual {residual:e} exceeds {:e}",
            options.frame_tol * scale
        )));
    }

    Ok(SpectralFrame {
        eigenvalues: values,
        right: vectors,
        left,
        min_gap,
        options,
    })
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, n: usize) -> Complex64 {
        self.eigenvalues[n]
    }

    /// Columns are the right eigenvectors `|n⁽⁰⁾⟩`.
    pub fn right(&self) -> &CMatrix {
        &self.right
    }

    /// Rows are the dual vectors `⟨⟨n⁽⁰⁾|`.
    pub fn left(&self) -> &CMatrix {
        &self.left
    }

    pub fn right_vector(&self, n: usize) -> CVector {
        self.right.column(n).into_owned()
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gap
    }

    pub fn options(&self) -> FrameOptions {
        self.options
    }

    /// `max(1, spectral radius)`, the scale for relative gap checks.
    pub fn scale(&self) -> f64 {
        spectral_radius(&self.eigenvalues).max(1.0)
    }

    pub fn check_index(&self, n: usize) -> Result<()> {
        if n >= self.dim() {
            return Err(Error::InvalidArgument(format!(
                "state index {n} out of range for dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `W A V`, i.e. `A` expressed in the eigenframe.
    pub fn to_eigenbasis(&self, a: &CMatrix) -> Result<CMatrix> {
        check_dim(a, self.dim())?;
        Ok(&self.left * a * &self.right)
    }

    /// `V A W`, the inverse of [`SpectralFrame::to_eigenbasis`].
    pub fn from_eigenbasis(&self, a: &CMatrix) -> Result<CMatrix> {
        check_dim(a, self.dim())?;
        Ok(&self.right * a * &self.left)
    }

    /// Is `h0` diagonalized by this frame to within `frame_tol`?
    pub fn diagonalizes(&self, h0: &CMatrix) -> bool {
        if check_dim(h0, self.dim()).is_err() {
            return false;
        }
        let lambda = CMatrix::from_diagonal(&CVector::from_column_slice(&self.eigenvalues));
        let residual = (h0 * &self.right - &self.right * lambda).norm();
        residual <= self.options.frame_tol * h0.norm().max(self.scale())
    }
}

/// The double-bracket matrix `[[A]]ₘₙ = ⟨⟨m⁽⁰⁾|A|n⁽⁰⁾⟩`.
pub fn double_bracket(frame: &SpectralFrame, a: &CMatrix) -> Result<CMatrix> {
    frame.to_eigenbasis(a)
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}
