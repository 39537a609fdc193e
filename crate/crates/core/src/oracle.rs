//! Independent checks of truncated series against exact diagonalization of
//! `H(q)`.
//!
//! Nothing here touches the generator machinery: eigenvalues and eigenvectors
//! of `H(q)` are computed directly at each sample and labeled by
//! nearest-neighbour continuation from the canonical ordering at `q = 0`.

use num_complex::Complex64;

use crate::bellpoly::factorial;
use crate::corrections::PerturbationSeries;
use crate::error::{Error, Result};
use crate::generators::PolynomialHamiltonian;
use crate::spectral::{eigen_decompose, min_pairwise_gap, spectral_radius, CVector, FrameOptions};

/// Minimum ratio of second-nearest to nearest candidate accepted when
/// continuing an eigenvalue to the next sample.
pub const PAIRING_MARGIN: f64 = 2.0;
/// Residuals below this are rounding noise and excluded from slope fits.
pub const RESIDUAL_FLOOR: f64 = 1e-14;
pub const DEFAULT_FD_STEP: f64 = 1e-3;
pub const DEFAULT_WINDOW: (f64, f64) = (1e-4, 1e-2);
pub const DEFAULT_POINTS_PER_DECADE: usize = 12;
/// Required slope excess over `K` for a series truncated at order `K`.
pub const SLOPE_ALLOWANCE: f64 = 0.8;

const MIN_FIT_POINTS: usize = 4;
const MIN_FIT_DECADES: f64 = 0.5;

/// Exact eigenvalues (and eigenvectors) of `H(q)` labeled continuously.
#[derive(Debug, Clone)]
pub struct SpectrumCurve {
    qs: Vec<f64>,
    /// `values[n][i]` is state `n` at `qs[i]`.
    values: Vec<Vec<Complex64>>,
    vectors: Vec<Vec<CVector>>,
    pair_margin: f64,
}

impl SpectrumCurve {
    pub fn qs(&self) -> &[f64] {
        &self.qs
    }

    pub fn values(&self, n: usize) -> &[Complex64] {
        &self.values[n]
    }

    pub fn vectors(&self, n: usize) -> &[CVector] {
        &self.vectors[n]
    }

    pub fn states(&self) -> usize {
        self.values.len()
    }

    /// Smallest second-nearest/nearest distance ratio seen while pairing.
    pub fn pair_margin(&self) -> f64 {
        self.pair_margin
    }

    /// Value of state `n` at the sample equal to `q`, if present.
    pub fn value_at(&self, n: usize, q: f64) -> Option<Complex64> {
        self.qs.iter().position(|&x| x == q).map(|i| self.values[n][i])
    }
}

struct Sample {
    values: Vec<Complex64>,
    vectors: Vec<CVector>,
}

fn diagonalize(h: &PolynomialHamiltonian, q: f64, options: FrameOptions) -> Result<Sample> {
    let eig = eigen_decompose(&h.at(q))?;
    let gap = min_pairwise_gap(&eig.values);
    let threshold = options.gap_tol * spectral_radius(&eig.values).max(1.0);
    if gap < threshold {
        return Err(Error::DegenerateSpectrum {
            min_gap: gap,
            threshold,
        });
    }
    let vectors = eig.vectors.column_iter().map(|c| c.into_owned()).collect();
    Ok(Sample {
        values: eig.values,
        vectors,
    })
}

/// For each previous value, the index of its nearest candidate; also returns
/// the worst margin.
fn pair(previous: &[Complex64], candidates: &[Complex64], q: f64) -> Result<(Vec<usize>, f64)> {
    let mut assignment = Vec::with_capacity(previous.len());
    let mut worst = f64::INFINITY;
    for (state, p) in previous.iter().enumerate() {
        let mut best = (usize::MAX, f64::INFINITY);
        let mut second = f64::INFINITY;
        for (j, c) in candidates.iter().enumerate() {
            let d = (c - p).norm();
            if d < best.1 {
                second = best.1;
                best = (j, d);
            } else if d < second {
                second = d;
            }
        }
        let margin = if best.1 == 0.0 {
            f64::INFINITY
        } else {
            second / best.1
        };
        if margin < PAIRING_MARGIN {
            return Err(Error::PairingAmbiguous { q, state, margin });
        }
        if assignment.contains(&best.0) {
            return Err(Error::PairingAmbiguous { q, state, margin: 1.0 });
        }
        worst = worst.min(margin);
        assignment.push(best.0);
    }
    Ok((assignment, worst))
}

/// Eigenvalues of `H(q)` at each `q`, labeled by continuation outward from
/// the sample nearest `q = 0`, which is itself matched to the canonical
/// order of `H⁽⁰⁾`.
pub fn exact_spectrum_sweep(
    h: &PolynomialHamiltonian,
    qs: &[f64],
    options: FrameOptions,
) -> Result<SpectrumCurve> {
    if qs.is_empty() {
        return Err(Error::InvalidArgument("empty sample list".into()));
    }
    if qs.iter().any(|q| !q.is_finite()) || qs.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "sample points must be finite and strictly increasing".into(),
        ));
    }
    let dim = h.dim();
    let reference = diagonalize(h, 0.0, options)?.values;
    let samples: Vec<Sample> = qs
        .iter()
        .map(|&q| diagonalize(h, q, options))
        .collect::<Result<_>>()?;

    let anchor = (0..qs.len())
        .min_by(|&a, &b| qs[a].abs().total_cmp(&qs[b].abs()))
        .expect("non-empty");

    let mut labels: Vec<Vec<usize>> = vec![Vec::new(); qs.len()];
    let mut margin = f64::INFINITY;
    let (first, m) = pair(&reference, &samples[anchor].values, qs[anchor])?;
    margin = margin.min(m);
    labels[anchor] = first;

    let walks: [Vec<usize>; 2] = [
        (anchor + 1..qs.len()).collect(),
        (0..anchor).rev().collect(),
    ];
    for walk in walks {
        let mut prev = anchor;
        for i in walk {
            let previous: Vec<Complex64> = labels[prev]
                .iter()
                .map(|&j| samples[prev].values[j])
                .collect();
            let (assign, m) = pair(&previous, &samples[i].values, qs[i])?;
            margin = margin.min(m);
            labels[i] = assign;
            prev = i;
        }
    }

    let mut values = vec![Vec::with_capacity(qs.len()); dim];
    let mut vectors = vec![Vec::with_capacity(qs.len()); dim];
    for (i, sample) in samples.iter().enumerate() {
        for n in 0..dim {
            let j = labels[i][n];
            values[n].push(sample.values[j]);
            vectors[n].push(sample.vectors[j].clone());
        }
    }
    Ok(SpectrumCurve {
        qs: qs.to_vec(),
        values,
        vectors,
        pair_margin: margin,
    })
}

/// `points_per_decade` logarithmically spaced samples covering
/// `[lo, hi]`, both ends included.
pub fn log_samples(lo: f64, hi: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (hi / lo).log10();
    let count = ((decades * points_per_decade as f64).round() as usize).max(1) + 1;
    (0..count)
        .map(|i| {
            if i == count - 1 {
                hi
            } else {
                lo * 10f64.powf(decades * i as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Least-squares slope of `log r` against `log q`.
pub fn loglog_slope(qs: &[f64], residuals: &[f64]) -> f64 {
    let n = qs.len() as f64;
    let xs: Vec<f64> = qs.iter().map(|q| q.ln()).collect();
    let ys: Vec<f64> = residuals.iter().map(|r| r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Slope fit over samples whose residual clears [`RESIDUAL_FLOOR`]; fails
/// with `ResidualUnderflow` when too few remain to span a usable range.
pub fn floored_loglog_slope(qs: &[f64], residuals: &[f64]) -> Result<f64> {
    let (kq, kr): (Vec<f64>, Vec<f64>) = qs
        .iter()
        .zip(residuals)
        .filter(|(_, r)| **r >= RESIDUAL_FLOOR)
        .map(|(q, r)| (*q, *r))
        .unzip();
    let span = match (kq.first(), kq.last()) {
        (Some(a), Some(b)) => (b / a).log10(),
        _ => 0.0,
    };
    if kq.len() < MIN_FIT_POINTS || span < MIN_FIT_DECADES {
        return Err(Error::ResidualUnderflow {
            floor: RESIDUAL_FLOOR,
        });
    }
    Ok(loglog_slope(&kq, &kr))
}

/// Empirical order of `|hₙ(q) − Σₖ≤K qᵏ hₙ⁽ᵏ⁾|` over `window`.
pub fn series_residual_order(
    curve: &SpectrumCurve,
    series: &PerturbationSeries,
    n: usize,
    order: usize,
    window: (f64, f64),
) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidArgument(format!(
            "window must satisfy 0 < q_lo < q_hi, got [{lo}, {hi}]"
        )));
    }
    if n >= curve.states() {
        return Err(Error::InvalidArgument(format!("state {n} out of range")));
    }
    if series.order() < order {
        return Err(Error::InsufficientOrder {
            required: order,
            available: series.order(),
        });
    }
    let qs = curve.qs();
    if qs[0] > lo * (1.0 + 1e-12) || qs[qs.len() - 1] < hi * (1.0 - 1e-12) {
        return Err(Error::InvalidArgument(
            "window extends beyond the sampled range".into(),
        ));
    }
    let inside: Vec<usize> = (0..qs.len())
        .filter(|&i| qs[i] >= lo * (1.0 - 1e-12) && qs[i] <= hi * (1.0 + 1e-12))
        .collect();
    let needed = (8.0 * (hi / lo).log10()).floor() as usize;
    if inside.len() < needed.max(2) {
        return Err(Error::InvalidArgument(format!(
            "{} samples in window, need at least {needed} (8 per decade)",
            inside.len()
        )));
    }
    let coeffs = &series.eigenvalue_corrections[..=order];
    let mut wq = Vec::with_capacity(inside.len());
    let mut wr = Vec::with_capacity(inside.len());
    for i in inside {
        let q = qs[i];
        let truncated = coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, h| acc * q + h);
        wq.push(q);
        wr.push((curve.values(n)[i] - truncated).norm());
    }
    floored_loglog_slope(&wq, &wr)
}

/// Central-difference coefficients at offsets −2…2 for the k-th derivative
/// (second-order accurate).
fn stencil(k: usize) -> [f64; 5] {
    match k {
        0 => [0.0, 0.0, 1.0, 0.0, 0.0],
        1 => [0.0, -0.5, 0.0, 0.5, 0.0],
        2 => [0.0, 1.0, -2.0, 1.0, 0.0],
        3 => [-0.5, 1.0, 0.0, -1.0, 0.5],
        4 => [1.0, -4.0, 6.0, -4.0, 1.0],
        _ => unreachable!("checked by caller"),
    }
}

/// Estimate of `hₙ⁽ᵏ⁾ = (1/k!) dᵏhₙ/dqᵏ |₀` from exact eigenvalues on a
/// five-point central stencil, with one Richardson step (`s` and `s/2`).
pub fn fd_eigenvalue_derivatives(
    h: &PolynomialHamiltonian,
    n: usize,
    k: usize,
    step: f64,
    options: FrameOptions,
) -> Result<Complex64> {
    if k > 4 {
        return Err(Error::InvalidArgument(format!(
            "finite-difference order {k} unsupported (max 4)"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if n >= h.dim() {
        return Err(Error::InvalidArgument(format!("state {n} out of range")));
    }
    let s = step;
    let qs = [-2.0 * s, -s, -0.5 * s, 0.0, 0.5 * s, s, 2.0 * s];
    let curve = exact_spectrum_sweep(h, &qs, options)?;
    let f = curve.values(n);
    let coeffs = stencil(k);
    let coarse_idx = [0, 1, 3, 5, 6];
    let fine_idx = [1, 2, 3, 4, 5];
    let combine = |idx: &[usize; 5], width: f64| -> Complex64 {
        idx.iter()
            .zip(coeffs)
            .map(|(&i, c)| f[i] * c)
            .sum::<Complex64>()
            / width.powi(k as i32)
    };
    let coarse = combine(&coarse_idx, s);
    let fine = combine(&fine_idx, 0.5 * s);
    let extrapolated = (fine * 4.0 - coarse) / 3.0;
    Ok(extrapolated / factorial(k))
}

/// Sine of the angle between `Σₖ qᵏ|n⁽ᵏ⁾⟩` and the exact eigenvector of
/// `H(q)` at each `q` (rays: scale and phase ignored).
pub fn state_ray_residual(
    h: &PolynomialHamiltonian,
    series: &PerturbationSeries,
    n: usize,
    qs: &[f64],
    options: FrameOptions,
) -> Result<Vec<f64>> {
    let mut grid: Vec<f64> = qs.to_vec();
    grid.push(0.0);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let curve = exact_spectrum_sweep(h, &grid, options)?;
    if n >= curve.states() {
        return Err(Error::InvalidArgument(format!("state {n} out of range")));
    }
    qs.iter()
        .map(|&q| {
            let i = grid
                .iter()
                .position(|&x| x == q)
                .expect("sample present in grid");
            let v = &curve.vectors(n)[i];
            let u = series.state_at(q);
            let unorm = u.norm();
            if unorm == 0.0 {
                return Err(Error::NumericalFailure(format!(
                    "truncated state vanishes at q = {q:e}"
                )));
            }
            let overlap = v.dotc(&u) / v.dotc(v);
            let perp = &u - v * overlap;
            Ok(perp.norm() / unorm)
        })
        .collect()
}
