//! Girard–Newton identities, commutative Bell polynomials, and dual
//! non-commutative Bell polynomials over operator words.
//!
//! The state-correction recursion `|n⁽ᵏ⁾⟩ = −(i/k) Σⱼ K₀⁽ʲ⁻¹⁾|n⁽ᵏ⁻ʲ⁾⟩` has
//! the shape of the Girard–Newton formulas with non-commuting "power sums".
//! Its closed-form solution is the dual Bell polynomial `𝔹ₖ`, a sum of
//! ordered words in symbols `P₁, P₂, …` with
//!
//! ```text
//! 𝔹₀ = 𝟙,    𝔹ₘ₊₁ = Σⱼ₌₀..ₘ C(m, j) · Pⱼ₊₁ · 𝔹ₘ₋ⱼ
//! ```
//!
//! The new letter goes on the left. Substituting commuting scalars collapses
//! `𝔹ₖ` to the ordinary Bell polynomial `Bₖ`.

use std::collections::BTreeMap;

use num_traits::{FromPrimitive, Num};

use crate::error::{Error, Result};
use crate::spectral::{CMatrix, CVector};

/// `C(n, k)` for the small arguments used by the recursions.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, i| acc * i as f64)
}

fn from_count<T: FromPrimitive>(n: u64) -> T {
    T::from_u64(n).expect("count representable in scalar type")
}

/// Elementary symmetric data `s₁…sₖ` from power sums `p₁…pₖ`:
/// `sₖ = −(1/k) Σⱼ₌₁..ₖ pⱼ sₖ₋ⱼ`, `s₀ = 1`.
///
/// With the sign convention `sⱼ = (−1)ʲ eⱼ`, the result is exactly the
/// coefficient list of `∏(x − xᵢ)` below the leading term.
pub fn power_sums_to_elementary<T>(p: &[T]) -> Vec<T>
where
    T: Clone + Num + FromPrimitive,
{
    let mut s: Vec<T> = Vec::with_capacity(p.len() + 1);
    s.push(T::one());
    for k in 1..=p.len() {
        let mut acc = T::zero();
        for j in 1..=k {
            acc = acc + p[j - 1].clone() * s[k - j].clone();
        }
        s.push(T::zero() - acc / from_count::<T>(k as u64));
    }
    s.remove(0);
    s
}

/// All commutative Bell polynomials `B₀…B_k` evaluated at `p`.
///
/// `Bₘ₊₁ = Σⱼ₌₀..ₘ C(m, j) Bₘ₋ⱼ pⱼ₊₁`, `B₀ = 1`.
pub fn bell_commutative_sequence<T>(k: usize, p: &[T]) -> Result<Vec<T>>
where
    T: Clone + Num + FromPrimitive,
{
    if p.len() < k {
        return Err(Error::InvalidArgument(format!(
            "Bell polynomial of order {k} needs {k} arguments, got {}",
            p.len()
        )));
    }
    let mut b = vec![T::one()];
    for m in 0..k {
        let mut acc = T::zero();
        for j in 0..=m {
            acc = acc + from_count::<T>(binomial(m, j)) * b[m - j].clone() * p[j].clone();
        }
        b.push(acc);
    }
    Ok(b)
}

pub fn bell_commutative<T>(k: usize, p: &[T]) -> Result<T>
where
    T: Clone + Num + FromPrimitive,
{
    Ok(bell_commutative_sequence(k, p)?.pop().expect("B0 always present"))
}

/// A single ordered product `c · P_{i₁} P_{i₂} ⋯ P_{iᵣ}`; an empty letter
/// list is the identity word.
///
/// The recursion only ever produces positive integer coefficients, so they
/// are kept exact.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OperatorWord {
    pub letters: Vec<usize>,
    pub coefficient: u64,
}

impl OperatorWord {
    pub fn grade(&self) -> usize {
        self.letters.iter().sum()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }
}

/// Homogeneous sum of words of a fixed grade, like terms combined and kept
/// in lexicographic letter order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordPolynomial {
    grade: usize,
    words: Vec<OperatorWord>,
}

impl WordPolynomial {
    pub fn identity() -> Self {
        WordPolynomial {
            grade: 0,
            words: vec![OperatorWord {
                letters: Vec::new(),
                coefficient: 1,
            }],
        }
    }

    fn from_map(grade: usize, map: BTreeMap<Vec<usize>, u64>) -> Self {
        let words = map
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|(letters, coefficient)| OperatorWord {
                letters,
                coefficient,
            })
            .collect();
        WordPolynomial { grade, words }
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn words(&self) -> &[OperatorWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Coefficient of a given letter sequence (0 if absent).
    pub fn coefficient(&self, letters: &[usize]) -> u64 {
        self.words
            .binary_search_by(|w| w.letters.as_slice().cmp(letters))
            .map(|i| self.words[i].coefficient)
            .unwrap_or(0)
    }

    /// Largest symbol index used, 0 for the identity.
    pub fn max_symbol(&self) -> usize {
        self.words
            .iter()
            .flat_map(|w| w.letters.iter().copied())
            .max()
            .unwrap_or(0)
    }

    /// Substitutes commuting scalars `Pⱼ ← p[j−1]`.
    pub fn collapse<T>(&self, p: &[T]) -> Result<T>
    where
        T: Clone + Num + FromPrimitive,
    {
        let mut total = T::zero();
        for w in &self.words {
            let mut term = from_count::<T>(w.coefficient);
            for &j in &w.letters {
                let pj = p.get(j - 1).ok_or(Error::MissingSymbol(j))?;
                term = term * pj.clone();
            }
            total = total + term;
        }
        Ok(total)
    }
}

/// `𝔹₀ … 𝔹ₖ`, each built from the previous ones.
pub fn dual_bell_sequence(k: usize) -> Vec<WordPolynomial> {
    let mut seq = vec![WordPolynomial::identity()];
    for m in 0..k {
        let mut map: BTreeMap<Vec<usize>, u64> = BTreeMap::new();
        for j in 0..=m {
            let c = binomial(m, j);
            for w in &seq[m - j].words {
                let mut letters = Vec::with_capacity(w.letters.len() + 1);
                letters.push(j + 1);
                letters.extend_from_slice(&w.letters);
                *map.entry(letters).or_insert(0) += c * w.coefficient;
            }
        }
        seq.push(WordPolynomial::from_map(m + 1, map));
    }
    seq
}

pub fn dual_bell_words(k: usize) -> WordPolynomial {
    dual_bell_sequence(k).pop().expect("B0 always present")
}

/// `Σ_words c · P_{i₁} ⋯ P_{iᵣ} v` with `Pⱼ = symbols[j − 1]`.
pub fn evaluate_words(wp: &WordPolynomial, symbols: &[CMatrix], v: &CVector) -> Result<CVector> {
    let dim = v.len();
    for s in symbols {
        if s.nrows() != dim || s.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: if s.nrows() != dim { s.nrows() } else { s.ncols() },
            });
        }
    }
    let mut out = CVector::zeros(dim);
    for w in &wp.words {
        let mut acc = v.clone();
        for &j in w.letters.iter().rev() {
            let p = symbols.get(j - 1).ok_or(Error::MissingSymbol(j))?;
            acc = p * acc;
        }
        out += acc * num_complex::Complex64::new(w.coefficient as f64, 0.0);
    }
    Ok(out)
}
