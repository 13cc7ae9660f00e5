//! Letter-generation models for random strings.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::strings::Alphabet;

pub type Rational = BigRational;

/// Tolerance on the probability sum of a floating-point model.
pub const FLOAT_SUM_TOLERANCE: f64 = 1e-12;

/// A probability given either exactly or only as a double.
#[derive(Debug, Clone, PartialEq)]
pub struct Prob {
    pub value: f64,
    pub exact: Option<Rational>,
}

impl Prob {
    pub fn exact(r: Rational) -> Self {
        Prob {
            value: rational_to_f64(&r),
            exact: Some(r),
        }
    }

    pub fn float(value: f64) -> Self {
        Prob { value, exact: None }
    }
}

/// Parses `"0.3"`, `"1e-2"`, `"3/10"` or `"1"`.
///
/// Plain decimals and fractions are kept exact; scientific notation falls
/// back to a double.
pub fn parse_prob(s: &str) -> Result<Prob> {
    let s = s.trim();
    let bad = || Error::Parse(format!("invalid probability {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(Prob::exact(Rational::new(p, q)));
    }
    if let Some(r) = parse_decimal(s) {
        return Ok(Prob::exact(r));
    }
    s.parse::<f64>().map(Prob::float).map_err(|_| bad())
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num_traits::pow(BigInt::from(10u32), frac.len());
    let r = Rational::new(numer, denom);
    Some(if neg { -r } else { r })
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn check_unit(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidProbability(format!(
            "{name} = {p} is outside [0, 1]"
        )))
    }
}

/// Independent letters with `Pr[letter = j] = probs[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct IidModel {
    probs: Vec<f64>,
    exact: Option<Vec<Rational>>,
}

impl IidModel {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        for (j, &p) in probs.iter().enumerate() {
            check_unit(&format!("probability of letter {j}"), p)?;
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > FLOAT_SUM_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "letter probabilities sum to {sum}, not 1"
            )));
        }
        Ok(IidModel { probs, exact: None })
    }

    pub fn from_rationals(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        for (j, p) in probs.iter().enumerate() {
            if p.is_negative() || *p > Rational::one() {
                return Err(Error::InvalidProbability(format!(
                    "probability of letter {j} = {p} is outside [0, 1]"
                )));
            }
        }
        let sum: Rational = probs.iter().sum();
        if !sum.is_one() {
            return Err(Error::InvalidProbability(format!(
                "letter probabilities sum to {sum}, not 1"
            )));
        }
        Ok(IidModel {
            probs: probs.iter().map(rational_to_f64).collect(),
            exact: Some(probs),
        })
    }

    /// Builds an exact model when every entry is exact, a float model otherwise.
    pub fn from_probs(probs: Vec<Prob>) -> Result<Self> {
        if probs.iter().all(|p| p.exact.is_some()) {
            Self::from_rationals(probs.into_iter().filter_map(|p| p.exact).collect())
        } else {
            Self::new(probs.into_iter().map(|p| p.value).collect())
        }
    }

    /// Binary model with `Pr[1] = alpha`.
    pub fn binary(alpha: f64) -> Result<Self> {
        check_unit("alpha", alpha)?;
        Self::new(vec![1.0 - alpha, alpha])
    }

    pub fn binary_exact(alpha: Rational) -> Result<Self> {
        Self::from_rationals(vec![Rational::one() - &alpha, alpha])
    }

    pub fn binary_from(alpha: Prob) -> Result<Self> {
        match alpha.exact {
            Some(r) => Self::binary_exact(r),
            None => Self::binary(alpha.value),
        }
    }

    pub fn uniform(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Self::from_rationals(vec![Rational::new(1.into(), (d as u64).into()); d])
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.probs.len()).expect("nonempty")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn exact_probs(&self) -> Option<&[Rational]> {
        self.exact.as_deref()
    }

    /// True when a single letter has probability one.
    pub fn is_degenerate(&self) -> bool {
        match &self.exact {
            Some(ex) => ex.iter().any(|p| p.is_one()),
            None => self.probs.contains(&1.0),
        }
    }
}

impl fmt::Display for IidModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = match &self.exact {
            Some(ex) => ex.iter().map(|p| p.to_string()).collect(),
            None => self.probs.iter().map(|p| p.to_string()).collect(),
        };
        write!(f, "iid({})", parts.join(","))
    }
}

/// Two-state chain: `Pr[1 | previous 1] = alpha`, `Pr[1 | previous 0] = beta`,
/// first letter drawn from the stationary law `gamma = beta / (1 + beta - alpha)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovModel {
    alpha: f64,
    beta: f64,
    exact: Option<(Rational, Rational)>,
}

impl MarkovModel {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_unit("alpha", alpha)?;
        check_unit("beta", beta)?;
        if alpha == 1.0 && beta == 0.0 {
            return Err(Error::InvalidModel(
                "alpha = 1, beta = 0 has no unique stationary distribution".into(),
            ));
        }
        Ok(MarkovModel {
            alpha,
            beta,
            exact: None,
        })
    }

    pub fn from_rationals(alpha: Rational, beta: Rational) -> Result<Self> {
        let mut m = Self::new(rational_to_f64(&alpha), rational_to_f64(&beta))?;
        if alpha.is_negative() || alpha > Rational::one() || beta.is_negative() || beta > Rational::one() {
            return Err(Error::InvalidProbability(
                "Markov parameters must lie in [0, 1]".into(),
            ));
        }
        m.exact = Some((alpha, beta));
        Ok(m)
    }

    pub fn from_probs(alpha: Prob, beta: Prob) -> Result<Self> {
        match (alpha.exact, beta.exact) {
            (Some(a), Some(b)) => Self::from_rationals(a, b),
            _ => Self::new(alpha.value, beta.value),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.beta / (1.0 + self.beta - self.alpha)
    }

    pub fn exact(&self) -> Option<(&Rational, &Rational)> {
        self.exact.as_ref().map(|(a, b)| (a, b))
    }

    pub fn exact_gamma(&self) -> Option<Rational> {
        self.exact
            .as_ref()
            .map(|(a, b)| b / (Rational::one() + b - a))
    }

    /// True when every generated string is constant.
    pub fn is_degenerate(&self) -> bool {
        let gamma = self.gamma();
        (gamma == 1.0 && self.alpha == 1.0) || (gamma == 0.0 && self.beta == 0.0)
    }
}

impl fmt::Display for MarkovModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some((a, b)) => write!(f, "markov({a},{b})"),
            None => write!(f, "markov({},{})", self.alpha, self.beta),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Iid(IidModel),
    Markov(MarkovModel),
}

impl Model {
    pub fn alphabet(&self) -> Alphabet {
        match self {
            Model::Iid(m) => m.alphabet(),
            Model::Markov(_) => Alphabet::binary(),
        }
    }

    pub fn is_degenerate(&self) -> bool {
        match self {
            Model::Iid(m) => m.is_degenerate(),
            Model::Markov(m) => m.is_degenerate(),
        }
    }
}

impl From<IidModel> for Model {
    fn from(m: IidModel) -> Self {
        Model::Iid(m)
    }
}

impl From<MarkovModel> for Model {
    fn from(m: MarkovModel) -> Self {
        Model::Markov(m)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::Iid(m) => m.fmt(f),
            Model::Markov(m) => m.fmt(f),
        }
    }
}
