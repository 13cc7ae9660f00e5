//! Expected embedding counts and the exponential-balance equations.
//!
//! A pattern of length `k` embeds in `S_n` through `C(n, k)` index sets,
//! each realised with probability `Π α_{pattern_j}`. Setting `k = xn` for
//! fair bits, the exponential rate of `C(n, xn) 2^{-xn}` is `H(x) - x`
//! (binary entropy). Equating it with the average-occurrence rate
//! `(4/3)^n` gives `g(x) = 2^x x^x (1-x)^{1-x} = 3/4`; the rate crosses zero
//! where `H(x) = x`, i.e. `g(x) = 1`.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::IidModel;
use crate::strings::LetterString;

/// Bisection stops once the bracket is this narrow.
pub const BRACKET_WIDTH: f64 = 1e-13;

/// Residual bound every reported root satisfies.
pub const RESIDUAL_BOUND: f64 = 1e-12;

const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RootResult {
    pub x: f64,
    pub residual: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

fn log2_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").log2();
    }
    let shift = bits - 64;
    let top = u64::try_from(x >> shift).expect("64 leading bits");
    (top as f64).log2() + shift as f64
}

fn binomial(n: usize, k: usize) -> BigUint {
    num_integer::binomial(BigUint::from(n), BigUint::from(k))
}

fn check_pattern(n: usize, pattern: &LetterString, model: &IidModel) -> Result<()> {
    if pattern.len() > n {
        return Err(Error::InvalidArgument(format!(
            "pattern of length {} cannot embed in a string of length {n}",
            pattern.len()
        )));
    }
    if pattern.alphabet().size() > model.alphabet().size() {
        if let Some(&bad) = pattern.letters().iter().find(|&&l| l >= model.alphabet().size()) {
            return Err(Error::LetterOutOfRange {
                letter: bad,
                size: model.alphabet().size(),
            });
        }
    }
    Ok(())
}

/// `log2` of [`expected_occurrences`]; finite for any `n` the binomial can
/// be formed for.
pub fn log2_expected_occurrences(n: usize, pattern: &LetterString, model: &IidModel) -> Result<f64> {
    check_pattern(n, pattern, model)?;
    let probs = model.probs();
    let log_p: f64 = pattern.letters().iter().map(|&l| probs[l].log2()).sum();
    Ok(log2_biguint(&binomial(n, pattern.len())) + log_p)
}

/// Expected number of index sets realising `pattern` in a random string of
/// length `n`: `C(n, k) Π α_{pattern_j}`.
pub fn expected_occurrences(n: usize, pattern: &LetterString, model: &IidModel) -> Result<f64> {
    check_pattern(n, pattern, model)?;
    let probs = model.probs();
    let c = binomial(n, pattern.len());
    match c.to_f64() {
        Some(cf) if cf.is_finite() => Ok(pattern.letters().iter().fold(cf, |acc, &l| acc * probs[l])),
        _ => Ok(log2_expected_occurrences(n, pattern, model)?.exp2()),
    }
}

/// `x ln x` with the continuous extension `0` at `x = 0`.
fn xlnx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// `g(x) = 2^x x^x (1-x)^{1-x}` on `[0, 1]`.
pub fn balance(x: f64) -> f64 {
    (x * std::f64::consts::LN_2 + xlnx(x) + xlnx(1.0 - x)).exp()
}

/// Binary entropy in bits.
pub fn binary_entropy(x: f64) -> f64 {
    -(xlnx(x) + xlnx(1.0 - x)) / std::f64::consts::LN_2
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<RootResult> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRoot(format!("no sign change on [{lo}, {hi}]")));
    }
    let mut iterations = 0;
    let mut mid = 0.5 * (lo + hi);
    while iterations < MAX_ITERATIONS {
        mid = 0.5 * (lo + hi);
        iterations += 1;
        let f_mid = f(mid);
        if f_mid == 0.0 || hi - lo <= BRACKET_WIDTH || mid <= lo || mid >= hi {
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(RootResult {
        x: mid,
        residual: f(mid),
        bracket: (lo, hi),
        iterations,
    })
}

/// Golden-section search for the minimiser of a unimodal `f` on `[lo, hi]`.
/// Returns `(x, final bracket)`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, (f64, f64)) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (0.5 * (lo + hi), (lo, hi))
}

/// Solutions of `g(x) = target` in `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BalanceRoots {
    /// Root below the minimiser; absent when the only crossing on that side
    /// is the endpoint `x = 0` (`target >= 1`).
    pub lower: Option<RootResult>,
    pub upper: RootResult,
    /// Interior minimiser of `g` and the minimum value.
    pub minimizer: f64,
    pub minimum: f64,
}

/// Solves `2^x x^x (1-x)^{1-x} = target` for `target ∈ (0, 1]`.
///
/// `g` is convex with minimum `2/3` at `x = 1/3`, `g(0) = 1` and `g(1) = 2`,
/// so targets in `(2/3, 1)` have one root on each side of the minimiser,
/// `target = 1` has a single interior root, and targets below `2/3` have
/// none.
pub fn solve_balance(target: f64) -> Result<BalanceRoots> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "balance target must lie in (0, 1], got {target}"
        )));
    }
    let edge = 1e-15;
    let (minimizer, min_bracket) = golden_min(balance, edge, 1.0 - edge, 1e-12);
    let minimum = balance(minimizer);
    let f = |x: f64| balance(x) - target;

    if (minimum - target).abs() <= RESIDUAL_BOUND {
        let root = RootResult {
            x: minimizer,
            residual: minimum - target,
            bracket: min_bracket,
            iterations: 0,
        };
        return Ok(BalanceRoots {
            lower: Some(root),
            upper: root,
            minimizer,
            minimum,
        });
    }
    if minimum > target {
        return Err(Error::NoRoot(format!(
            "target {target} is below the minimum {minimum} of 2^x x^x (1-x)^(1-x)"
        )));
    }

    let lower = if target < 1.0 {
        Some(bisect(f, 0.0, minimizer)?)
    } else {
        None
    };
    let upper = bisect(f, minimizer, 1.0)?;
    Ok(BalanceRoots {
        lower,
        upper,
        minimizer,
        minimum,
    })
}

/// Root in `(1/2, 1)` of `H(x) = x`: beyond this length fraction a fixed
/// pattern of fair bits is expected to occur fewer than once.
pub fn occurrence_threshold() -> RootResult {
    bisect(|x| binary_entropy(x) - x, 0.5, 1.0).expect("H(x) - x changes sign on [1/2, 1]")
}
