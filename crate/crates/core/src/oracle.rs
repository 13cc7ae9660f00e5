//! Brute-force ground truth.
//!
//! Everything here is exponential in the string length and guarded by
//! explicit size limits. The exhaustive expectation sums `φ(T) Pr[S = T]`
//! over every string and shares no code path with the matrix engines in
//! [`crate::expectation`].

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expectation::ExpectationSeries;
use crate::model::{IidModel, Model, Rational};
use crate::strings::{Alphabet, BigCount, IncrementalCounter, LetterString};

/// Longest string accepted by [`enumerate_distinct`].
pub const MAX_ENUM_LEN: usize = 22;

/// Largest number of strings in one row of an exhaustive sweep.
pub const MAX_ROW_SIZE: u64 = 1 << 20;

fn check_row_size(d: usize, n: usize) -> Result<()> {
    let fits = (d as u64)
        .checked_pow(n as u32)
        .is_some_and(|size| size <= MAX_ROW_SIZE);
    if fits {
        Ok(())
    } else {
        Err(Error::SizeGuard(format!(
            "{d}^{n} strings exceeds the exhaustive limit of 2^20"
        )))
    }
}

/// All distinct nonempty subsequences of `t`.
pub fn enumerate_distinct(t: &LetterString) -> Result<BTreeSet<LetterString>> {
    if t.len() > MAX_ENUM_LEN {
        return Err(Error::SizeGuard(format!(
            "enumeration limited to strings of length {MAX_ENUM_LEN}, got {}",
            t.len()
        )));
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for &letter in t.letters() {
        let extended: Vec<Vec<usize>> = seen
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.push(letter);
                s
            })
            .collect();
        seen.extend(extended);
        seen.insert(vec![letter]);
    }
    let alphabet = t.alphabet();
    Ok(seen
        .into_iter()
        .map(|s| LetterString::new(alphabet, s).expect("letters come from t"))
        .collect())
}

/// Every string of length `n` in tree order: children of a node are the
/// parent with letter `d-1`, `d-2`, .., `0` appended, left to right.
pub fn tree_order_strings(d: usize, n: usize) -> Result<Vec<LetterString>> {
    let alphabet = Alphabet::new(d)?;
    check_row_size(d, n)?;
    let count = d.pow(n as u32);
    Ok((0..count)
        .map(|mut index| {
            let mut letters = vec![0; n];
            for slot in letters.iter_mut().rev() {
                *slot = d - 1 - index % d;
                index /= d;
            }
            LetterString::new(alphabet, letters).expect("in range")
        })
        .collect())
}

/// Row `n` of the tree of new-subsequence counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeRow {
    pub n: usize,
    pub values: Vec<BigCount>,
}

impl TreeRow {
    pub fn to_u64(&self) -> Vec<u64> {
        self.values
            .iter()
            .map(|v| u64::try_from(v).expect("row values fit u64"))
            .collect()
    }
}

pub fn tree_row(d: usize, n: usize) -> Result<TreeRow> {
    let alphabet = Alphabet::new(d)?;
    check_row_size(d, n)?;
    if n == 0 {
        return Ok(TreeRow {
            n,
            values: vec![BigCount::zero()],
        });
    }
    fn descend(counter: IncrementalCounter<u64>, depth: usize, n: usize, out: &mut Vec<BigCount>) {
        let d = counter.alphabet().size();
        for letter in (0..d).rev() {
            let mut child = counter.clone();
            let (nu, _) = child.push(letter).expect("in range");
            if depth + 1 == n {
                out.push(BigCount::from(nu));
            } else {
                descend(child, depth + 1, n, out);
            }
        }
    }
    let mut values = Vec::with_capacity(d.pow(n as u32));
    descend(IncrementalCounter::new(alphabet), 0, n, &mut values);
    Ok(TreeRow { n, values })
}

/// Checks the pairing structure of binary row `n` against row `n - 1`.
///
/// With 1-based positions `m`: for `m ≡ 2 (mod 4)` both `m` and `m + 1`
/// equal the sum of parents `m/2` and `m/2 + 1`; for `m ≡ 0 (mod 4)`,
/// `m != 2^n`, all four of those entries are equal.
pub fn check_pair_structure(n: usize) -> Result<bool> {
    if n < 2 {
        return Err(Error::InvalidArgument("pair structure needs n >= 2".into()));
    }
    let row = tree_row(2, n)?.to_u64();
    let parent = tree_row(2, n - 1)?.to_u64();
    let at = |v: &[u64], m: usize| v[m - 1];
    let width = 1usize << n;
    for m in (2..width).step_by(2) {
        let ok = if m % 4 == 2 {
            let sum = at(&parent, m / 2) + at(&parent, m / 2 + 1);
            at(&row, m) == sum && at(&row, m + 1) == sum
        } else {
            let v = at(&parent, m / 2);
            at(&row, m) == v && at(&row, m + 1) == v && at(&parent, m / 2 + 1) == v
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Letter probabilities over a common denominator.
struct IntegerWeights {
    denom: BigUint,
    first: Vec<BigUint>,
    /// `next[prev][letter]`
    next: Vec<Vec<BigUint>>,
}

fn integer_weights(model: &Model) -> Result<IntegerWeights> {
    let (first, next): (Vec<Rational>, Vec<Vec<Rational>>) = match model {
        Model::Iid(m) => {
            let p = m.exact_probs().ok_or(Error::NotRational)?.to_vec();
            let next = vec![p.clone(); p.len()];
            (p, next)
        }
        Model::Markov(m) => {
            let (a, b) = m.exact().ok_or(Error::NotRational)?;
            let g = m.exact_gamma().ok_or(Error::NotRational)?;
            let one = Rational::one();
            (
                vec![&one - &g, g],
                vec![vec![&one - b, b.clone()], vec![&one - a, a.clone()]],
            )
        }
    };
    let denom = first
        .iter()
        .chain(next.iter().flatten())
        .fold(num_bigint::BigInt::one(), |acc, p| acc.lcm(p.denom()));
    let scale = |p: &Rational| -> BigUint {
        (p.numer() * (&denom / p.denom()))
            .to_biguint()
            .expect("probabilities are nonnegative")
    };
    Ok(IntegerWeights {
        first: first.iter().map(scale).collect(),
        next: next.iter().map(|row| row.iter().map(scale).collect()).collect(),
        denom: denom.to_biguint().expect("positive"),
    })
}

/// Exact `E[φ(S_i)]`, `i = 1..=n`, by summing over all `d^i` strings.
pub fn exhaustive_expectation(model: &Model, n: usize) -> Result<ExpectationSeries> {
    let alphabet = model.alphabet();
    let d = alphabet.size();
    check_row_size(d, n)?;
    let weights = integer_weights(model)?;

    // acc[i] = Σ over strings T of length i+1 of φ(T) * Pr[T] * denom^(i+1)
    fn visit(
        w: &IntegerWeights,
        counter: &IncrementalCounter<u64>,
        last: usize,
        weight: &BigUint,
        depth: usize,
        acc: &mut [BigUint],
    ) {
        if depth == acc.len() {
            return;
        }
        for letter in 0..counter.alphabet().size() {
            let step = &w.next[last][letter];
            if step.is_zero() {
                continue;
            }
            let mut child = counter.clone();
            let (_, phi) = child.push(letter).expect("in range");
            let child_weight = weight * step;
            acc[depth] += &child_weight * phi;
            visit(w, &child, letter, &child_weight, depth + 1, acc);
        }
    }

    let roots: Vec<Vec<BigUint>> = (0..d)
        .into_par_iter()
        .map(|letter| {
            let mut acc = vec![BigUint::zero(); n];
            let weight = weights.first[letter].clone();
            if n == 0 || weight.is_zero() {
                return acc;
            }
            let mut counter = IncrementalCounter::<u64>::new(alphabet);
            counter.push(letter).expect("in range");
            acc[0] += &weight;
            visit(&weights, &counter, letter, &weight, 1, &mut acc);
            acc
        })
        .collect();

    let mut denom_pow = BigUint::one();
    let values = (0..n)
        .map(|i| {
            denom_pow *= &weights.denom;
            let total: BigUint = roots.iter().map(|acc| &acc[i]).sum();
            BigRational::new(total.into(), denom_pow.clone().into())
        })
        .collect();
    Ok(ExpectationSeries::Exact(values))
}

/// Whether `ψ` counts the empty subsequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    Nonempty,
    WithEmpty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubmultiplicativeCheck {
    pub n: usize,
    pub m: usize,
    /// `ψ(n + m)`
    pub lhs: Rational,
    /// `ψ(n) ψ(m)`
    pub rhs: Rational,
    pub holds: bool,
}

/// Checks `ψ(n + m) <= ψ(n) ψ(m)` for every `n, m >= 1` with `n + m <= max_total`.
pub fn submultiplicativity_table(
    model: &IidModel,
    max_total: usize,
    convention: Convention,
) -> Result<Vec<SubmultiplicativeCheck>> {
    let series = exhaustive_expectation(&Model::Iid(model.clone()), max_total)?;
    let values = series.exact().expect("exhaustive series is exact");
    let psi = |i: usize| -> Rational {
        let v = values[i - 1].clone();
        match convention {
            Convention::Nonempty => v,
            Convention::WithEmpty => v + Rational::one(),
        }
    };
    let mut out = Vec::new();
    for total in 2..=max_total {
        for n in 1..total {
            let m = total - n;
            let lhs = psi(total);
            let rhs = psi(n) * psi(m);
            out.push(SubmultiplicativeCheck {
                n,
                m,
                holds: lhs <= rhs,
                lhs,
                rhs,
            });
        }
    }
    Ok(out)
}

/// `ψ(n + m) <= ψ(n) ψ(m)` with `ψ(i) = E[φ(S_i)] + 1`, the count that
/// includes the empty subsequence. Without the `+ 1` the inequality fails
/// already for fair bits at `n = m = 2`.
pub fn check_submultiplicativity(model: &IidModel, n: usize, m: usize) -> Result<bool> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidArgument("n and m must be at least 1".into()));
    }
    let series = exhaustive_expectation(&Model::Iid(model.clone()), n + m)?;
    let v = series.exact().expect("exhaustive series is exact");
    let psi = |i: usize| &v[i - 1] + Rational::one();
    Ok(psi(n + m) <= psi(n) * psi(m))
}
