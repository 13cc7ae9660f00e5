//! Expected number of distinct subsequences of random strings.
//!
//! Three engines:
//!
//! * [`closed_form_binary`]: IID binary letters with `Pr[1] = alpha`, in
//!   closed form.
//! * [`iid_matrix_expectation`]: IID letters over any alphabet. The expected
//!   new weight of row `i`, split by final letter, evolves by a `d x d`
//!   matrix with ones on the diagonal and `alpha_j` elsewhere in row `j`.
//! * [`markov_expectation`]: binary two-state chains. The new weight is split
//!   by the final two letters (`11`, `10`, `01`, `00`) and evolves by a
//!   `4 x 4` matrix.
//!
//! All engines count nonempty subsequences. Each returns the partial sums
//! `E[φ(S_m)] = Σ_{i<m} 1ᵀ M^i v₁` for `m = 1..=n`, built from repeated
//! matrix-vector products.

use std::ops::{Add, Mul};

use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{rational_to_f64, IidModel, MarkovModel, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Exact,
    Float,
}

/// `E[φ(S_i)]` for `i = 1..=n`.
#[derive(Debug, Clone, PartialEq)]
pub enum ExpectationSeries {
    Exact(Vec<Rational>),
    Float(Vec<f64>),
}

impl ExpectationSeries {
    pub fn mode(&self) -> NumericMode {
        match self {
            ExpectationSeries::Exact(_) => NumericMode::Exact,
            ExpectationSeries::Float(_) => NumericMode::Float,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            ExpectationSeries::Exact(v) => v.len(),
            ExpectationSeries::Float(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_f64(&self) -> Vec<f64> {
        match self {
            ExpectationSeries::Exact(v) => v.iter().map(rational_to_f64).collect(),
            ExpectationSeries::Float(v) => v.clone(),
        }
    }

    /// Value for strings of length `i` (1-based).
    pub fn get_f64(&self, i: usize) -> Option<f64> {
        match self {
            ExpectationSeries::Exact(v) => v.get(i.checked_sub(1)?).map(rational_to_f64),
            ExpectationSeries::Float(v) => v.get(i.checked_sub(1)?).copied(),
        }
    }

    pub fn exact(&self) -> Option<&[Rational]> {
        match self {
            ExpectationSeries::Exact(v) => Some(v),
            ExpectationSeries::Float(_) => None,
        }
    }
}

/// `sqrt(alpha (1 - alpha))`, evaluated from the smaller of `alpha` and
/// `1 - alpha` so that complementary inputs give identical bits.
fn spread(alpha: f64) -> f64 {
    let p = if alpha > 0.5 { 1.0 - alpha } else { alpha };
    (p * (1.0 - p)).sqrt()
}

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..=1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(format!(
            "alpha = {alpha} is outside [0, 1]"
        )))
    }
}

/// Expected nonempty distinct-subsequence count of an IID binary string of
/// length `n` with `Pr[1] = alpha`.
///
/// With `r = sqrt(alpha (1 - alpha))` this is
/// `[(1 - 2r)(1 - (1 - r)^n) + (1 + 2r)((1 + r)^n - 1)] / (2r)`, and `n` for
/// the constant models `alpha ∈ {0, 1}`.
pub fn closed_form_binary(alpha: f64, n: u32) -> Result<f64> {
    check_alpha(alpha)?;
    if alpha == 0.0 || alpha == 1.0 {
        return Ok(n as f64);
    }
    let r = spread(alpha);
    let n = n as i32;
    let lower = (1.0 - 2.0 * r) * (1.0 - (1.0 - r).powi(n));
    let upper = (1.0 + 2.0 * r) * ((1.0 + r).powi(n) - 1.0);
    Ok((lower + upper) / (2.0 * r))
}

/// `(base, prefactor)` with `E[φ(S_n)] ~ prefactor * base^n`.
pub fn asymptotic_constants(alpha: f64) -> Result<(f64, f64)> {
    check_alpha(alpha)?;
    if alpha == 0.0 || alpha == 1.0 {
        return Err(Error::InvalidArgument(
            "alpha in {0, 1} gives linear growth, not exponential".into(),
        ));
    }
    let r = spread(alpha);
    Ok((1.0 + r, (1.0 + 2.0 * r) / (2.0 * r)))
}

/// Total new weight of row `i` split by final letter: `a` for strings ending
/// in 1, `b` for strings ending in 0. Index 0 holds row 1.
#[derive(Debug, Clone, PartialEq)]
pub struct AbWeights {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl AbWeights {
    /// `E[ν(S_i)] = a_i + b_i` for `i = 1..=n`.
    pub fn row_totals(&self) -> Vec<f64> {
        self.a.iter().zip(&self.b).map(|(a, b)| a + b).collect()
    }
}

pub fn ab_recurrence(alpha: f64, n: usize) -> Result<AbWeights> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidProbability(format!(
            "alpha = {alpha} must lie in (0, 1)"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let (mut ai, mut bi) = (alpha, 1.0 - alpha);
    for _ in 0..n {
        a.push(ai);
        b.push(bi);
        (ai, bi) = (ai + alpha * bi, bi + (1.0 - alpha) * ai);
    }
    Ok(AbWeights { a, b })
}

/// Explicit solution `(a_i, b_i)` of the `a`/`b` recurrence, `i >= 1`.
pub fn ab_explicit(alpha: f64, i: u32) -> (f64, f64) {
    let r = (alpha * (1.0 - alpha)).sqrt();
    let e = i as i32 - 1;
    let lo = (1.0 - r).powi(e);
    let hi = (1.0 + r).powi(e);
    let a = 0.5 * ((alpha - r) * lo + (alpha + r) * hi);
    let b = 0.5 * ((1.0 - alpha - r) * lo + (1.0 - alpha + r) * hi);
    (a, b)
}

/// Partial sums `Σ_{i<m} 1ᵀ M^i v` for `m = 1..=n`.
fn partial_sums<T>(matrix: &[Vec<T>], init: Vec<T>, n: usize) -> Vec<T>
where
    T: Clone + Zero + for<'a> Add<&'a T, Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let mut out = Vec::with_capacity(n);
    let mut v = init;
    let mut acc = T::zero();
    for m in 0..n {
        acc = v.iter().fold(acc, |s, x| s + x);
        out.push(acc.clone());
        if m + 1 < n {
            v = matrix
                .iter()
                .map(|row| row.iter().zip(&v).fold(T::zero(), |s, (x, y)| s + &(x * y)))
                .collect();
        }
    }
    out
}

/// The `d x d` matrix whose row `j` is `alpha_j` everywhere except a one on
/// the diagonal. Column-vector convention: `a_{·,n+1} = M a_{·,n}`.
pub fn iid_transition_matrix<T: Clone + One>(probs: &[T]) -> Vec<Vec<T>> {
    (0..probs.len())
        .map(|j| {
            (0..probs.len())
                .map(|k| if j == k { T::one() } else { probs[j].clone() })
                .collect()
        })
        .collect()
}

pub fn iid_matrix_expectation(
    model: &IidModel,
    n: usize,
    mode: NumericMode,
) -> Result<ExpectationSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    Ok(match mode {
        NumericMode::Exact => {
            let probs = model.exact_probs().ok_or(Error::NotRational)?;
            let m = iid_transition_matrix(probs);
            ExpectationSeries::Exact(partial_sums(&m, probs.to_vec(), n))
        }
        NumericMode::Float => {
            let probs = model.probs();
            let m = iid_transition_matrix(probs);
            ExpectationSeries::Float(partial_sums(&m, probs.to_vec(), n))
        }
    })
}

/// Markov state matrix acting on `(a, b, c, d)`, the new weight of strings
/// ending in `11`, `10`, `01`, `00`.
pub fn markov_transition_matrix<T>(alpha: &T, beta: &T) -> Vec<Vec<T>>
where
    T: Clone + Zero + One + std::ops::Sub<Output = T> + std::ops::Div<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let one = T::one();
    let zero = T::zero();
    let na = one.clone() - alpha.clone();
    let nb = one - beta.clone();
    vec![
        vec![alpha.clone(), zero.clone(), alpha.clone(), zero.clone()],
        vec![na.clone(), alpha.clone(), na.clone(), (beta * &na) / nb.clone()],
        vec![(&na * beta) / alpha.clone(), beta.clone(), nb.clone(), beta.clone()],
        vec![zero.clone(), nb.clone(), zero, nb],
    ]
}

/// Row-1 weights `(γα, γ(1-α), (1-γ)β, (1-γ)(1-β))`, splitting the first
/// letter by a phantom predecessor drawn with `Pr[1] = γ`.
pub fn markov_initial_vector<T>(alpha: &T, beta: &T, gamma: &T) -> Vec<T>
where
    T: Clone + One + std::ops::Sub<Output = T>,
    for<'a> &'a T: Mul<&'a T, Output = T>,
{
    let one = T::one();
    let ng = one.clone() - gamma.clone();
    vec![
        gamma * alpha,
        gamma * &(one.clone() - alpha.clone()),
        &ng * beta,
        &ng * &(one - beta.clone()),
    ]
}

pub fn markov_expectation(
    model: &MarkovModel,
    n: usize,
    mode: NumericMode,
) -> Result<ExpectationSeries> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let interior = |p: f64| p > 0.0 && p < 1.0;
    if !interior(model.alpha()) || !interior(model.beta()) {
        return Err(Error::InvalidModel(format!(
            "the Markov matrix engine needs alpha, beta in (0, 1) (got {}, {}); \
             use the exhaustive oracle or the IID engine for boundary parameters",
            model.alpha(),
            model.beta()
        )));
    }
    Ok(match mode {
        NumericMode::Exact => {
            let (a, b) = model.exact().ok_or(Error::NotRational)?;
            let g = model.exact_gamma().ok_or(Error::NotRational)?;
            let m = markov_transition_matrix(a, b);
            ExpectationSeries::Exact(partial_sums(&m, markov_initial_vector(a, b, &g), n))
        }
        NumericMode::Float => {
            let (a, b, g) = (model.alpha(), model.beta(), model.gamma());
            let m = markov_transition_matrix(&a, &b);
            ExpectationSeries::Float(partial_sums(&m, markov_initial_vector(&a, &b, &g), n))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p.into(), d.into())
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn closed_form_examples() {
        assert!((closed_form_binary(0.5, 3).unwrap() - 4.75).abs() < 1e-12);
        assert_eq!(closed_form_binary(1.0, 7).unwrap(), 7.0);
        assert_eq!(closed_form_binary(0.0, 4).unwrap(), 4.0);
        assert!(closed_form_binary(1.5, 3).is_err());
        assert!(closed_form_binary(-0.1, 3).is_err());
    }

    #[test]
    fn fair_closed_form_is_two_three_halves_power_minus_two() {
        for n in 0..30 {
            let expect = 2.0 * 1.5f64.powi(n) - 2.0;
            let got = closed_form_binary(0.5, n as u32).unwrap();
            assert!((got - expect).abs() <= 1e-9 * expect.max(1.0), "n={n}");
        }
    }

    #[test]
    fn closed_form_symmetry() {
        // alpha >= 1/2 so that 1 - alpha is exact.
        for k in 5..10 {
            let alpha = k as f64 / 10.0;
            for n in [1, 5, 17, 40] {
                assert_eq!(
                    closed_form_binary(alpha, n).unwrap(),
                    closed_form_binary(1.0 - alpha, n).unwrap()
                );
            }
        }
    }

    #[test]
    fn asymptotics() {
        assert_eq!(asymptotic_constants(0.5).unwrap(), (1.5, 2.0));
        let (b, _) = asymptotic_constants(0.25).unwrap();
        assert!((b - (1.0 + 3f64.sqrt() / 4.0)).abs() < 1e-15);
        assert!((b - 1.4330).abs() < 1e-4);
        assert_eq!(
            asymptotic_constants(0.8).unwrap(),
            asymptotic_constants(1.0 - 0.8).unwrap()
        );
        assert!(asymptotic_constants(1.0).is_err());
        let ratio = closed_form_binary(0.25, 201).unwrap() / closed_form_binary(0.25, 200).unwrap();
        assert!((ratio - b).abs() < 1e-6);
    }

    #[test]
    fn prefactor_matches_limit() {
        for alpha in [0.2, 0.5, 0.8] {
            let (base, k) = asymptotic_constants(alpha).unwrap();
            let v = closed_form_binary(alpha, 300).unwrap();
            assert!(rel(v / base.powi(300), k) < 1e-9);
        }
    }

    #[test]
    fn ab_initial_terms() {
        for alpha in [0.1, 0.37, 0.5, 0.9] {
            let w = ab_recurrence(alpha, 5).unwrap();
            assert_eq!(w.a[0], alpha);
            assert_eq!(w.b[0], 1.0 - alpha);
            assert!((w.a[1] - (2.0 * alpha - alpha * alpha)).abs() < 1e-15);
        }
        let w = ab_recurrence(0.5, 30).unwrap();
        assert_eq!(w.a, w.b);
        assert!(ab_recurrence(0.0, 3).is_err());
        assert!(ab_recurrence(0.5, 0).is_err());
    }

    #[test]
    fn ab_matches_explicit_and_closed_form() {
        for k in 1..10 {
            let alpha = k as f64 / 10.0;
            let w = ab_recurrence(alpha, 40).unwrap();
            for (i, (&a, &b)) in w.a.iter().zip(&w.b).enumerate() {
                let (ea, eb) = ab_explicit(alpha, i as u32 + 1);
                assert!(rel(a, ea) < 1e-12 && rel(b, eb) < 1e-12);
            }
            let mut sum = 0.0;
            for (i, t) in w.row_totals().into_iter().enumerate() {
                sum += t;
                assert!(rel(sum, closed_form_binary(alpha, i as u32 + 1).unwrap()) < 1e-9);
            }
        }
    }

    #[test]
    fn iid_matrix_small_example() {
        let m = IidModel::binary_exact(q(1, 2)).unwrap();
        let s = iid_matrix_expectation(&m, 3, NumericMode::Exact).unwrap();
        assert_eq!(s.exact().unwrap(), &[q(1, 1), q(5, 2), q(19, 4)]);
        let mat = iid_transition_matrix(&[q(1, 2), q(1, 2)]);
        let v: Vec<Rational> = mat.iter().map(|r| &r[0] * q(1, 2) + &r[1] * q(1, 2)).collect();
        assert_eq!(v, vec![q(3, 4), q(3, 4)]);
    }

    #[test]
    fn iid_matrix_binary_agrees_with_closed_form() {
        for k in 1..10 {
            let alpha = k as f64 / 10.0;
            let s = iid_matrix_expectation(&IidModel::binary(alpha).unwrap(), 40, NumericMode::Float)
                .unwrap()
                .to_f64();
            for (i, v) in s.iter().enumerate() {
                assert!(rel(*v, closed_form_binary(alpha, i as u32 + 1).unwrap()) <= 1e-9);
            }
        }
    }

    #[test]
    fn exact_mode_needs_rationals() {
        let m = IidModel::binary(0.3).unwrap();
        assert_eq!(
            iid_matrix_expectation(&m, 3, NumericMode::Exact),
            Err(Error::NotRational)
        );
    }

    #[test]
    fn markov_equal_rows_reduce_to_iid() {
        for k in 1..10 {
            let p = k as f64 / 10.0;
            let s = markov_expectation(&MarkovModel::new(p, p).unwrap(), 40, NumericMode::Float)
                .unwrap()
                .to_f64();
            for (i, v) in s.iter().enumerate() {
                assert!(rel(*v, closed_form_binary(p, i as u32 + 1).unwrap()) <= 1e-9);
            }
        }
    }

    #[test]
    fn markov_first_row_sums_to_one() {
        let m = MarkovModel::from_rationals(q(7, 10), q(3, 10)).unwrap();
        let s = markov_expectation(&m, 1, NumericMode::Exact).unwrap();
        assert_eq!(s.exact().unwrap(), &[q(1, 1)]);
    }

    #[test]
    fn markov_rejects_boundaries() {
        for (a, b) in [(1.0, 0.5), (0.0, 0.5), (0.5, 1.0), (0.5, 0.0)] {
            let m = MarkovModel::new(a, b).unwrap();
            assert!(matches!(
                markov_expectation(&m, 5, NumericMode::Float),
                Err(Error::InvalidModel(_))
            ));
        }
    }

    #[test]
    fn series_are_strictly_increasing() {
        let m = IidModel::new(vec![0.2, 0.3, 0.5]).unwrap();
        let s = iid_matrix_expectation(&m, 30, NumericMode::Float).unwrap().to_f64();
        assert!(s[0] >= 1.0 - 1e-12);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        let s = markov_expectation(&MarkovModel::new(0.9, 0.05).unwrap(), 30, NumericMode::Float)
            .unwrap()
            .to_f64();
        assert!(s.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn fair_coin_maximizes_closed_form() {
        for n in 2..40 {
            let top = closed_form_binary(0.5, n).unwrap();
            for k in 1..10 {
                assert!(top >= closed_form_binary(k as f64 / 10.0, n).unwrap());
            }
        }
    }
}
