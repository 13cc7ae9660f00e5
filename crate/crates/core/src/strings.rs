//! Exact counting of distinct subsequences of fixed strings.
//!
//! Letters are 0-indexed: an alphabet of size `d` has letters `0..d`. The
//! usual 1-indexed alphabet `{1, .., d}` maps letter `j` to `j - 1`; binary
//! strings keep their `0`/`1` letters unchanged.
//!
//! The count `ν(T_i)` of *new* subsequences of a prefix (those present in
//! `T_i` but not in `T_{i-1}`) follows the last-occurrence recursion: if the
//! current letter last appeared at position `l`, then `ν(T_i)` is the sum of
//! `ν(T_j)` for `l <= j < i`; if it never appeared, it is the sum of all
//! earlier `ν` plus one. Every distinct subsequence is new in exactly one
//! prefix, so summing the profile gives the total count `φ(T)`.

use std::fmt;
use std::ops::Sub;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{CheckedAdd, One, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision nonnegative count.
pub type BigCount = BigUint;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Alphabet(usize);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyAlphabet);
        }
        Ok(Alphabet(size))
    }

    pub const fn binary() -> Self {
        Alphabet(2)
    }

    pub fn size(self) -> usize {
        self.0
    }

    pub fn check(self, letter: usize) -> Result<()> {
        if letter < self.0 {
            Ok(())
        } else {
            Err(Error::LetterOutOfRange {
                letter,
                size: self.0,
            })
        }
    }
}

/// A finite string over an [`Alphabet`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LetterString {
    alphabet_size: usize,
    letters: Vec<usize>,
}

impl LetterString {
    pub fn new(alphabet: Alphabet, letters: Vec<usize>) -> Result<Self> {
        for &letter in &letters {
            alphabet.check(letter)?;
        }
        Ok(LetterString {
            alphabet_size: alphabet.size(),
            letters,
        })
    }

    pub fn binary(letters: &[u8]) -> Result<Self> {
        Self::new(
            Alphabet::binary(),
            letters.iter().map(|&b| b as usize).collect(),
        )
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        LetterString {
            alphabet_size: alphabet.size(),
            letters: Vec::new(),
        }
    }

    /// Parses either an ASCII digit string (`"0110"`) or a comma-separated
    /// list of integers (`"2,10,3"`). An empty input is the empty string.
    pub fn parse(input: &str, alphabet: Alphabet) -> Result<Self> {
        Self::new(alphabet, parse_letters(input)?)
    }

    /// Parses like [`LetterString::parse`] and infers the smallest alphabet
    /// that holds every letter, but never smaller than binary.
    pub fn parse_infer(input: &str) -> Result<Self> {
        let letters = parse_letters(input)?;
        let size = letters.iter().max().map_or(2, |&m| (m + 1).max(2));
        Self::new(Alphabet(size), letters)
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet(self.alphabet_size)
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, letter: usize) -> Result<()> {
        self.alphabet().check(letter)?;
        self.letters.push(letter);
        Ok(())
    }

    pub fn prefix(&self, len: usize) -> LetterString {
        LetterString {
            alphabet_size: self.alphabet_size,
            letters: self.letters[..len].to_vec(),
        }
    }
}

impl fmt::Display for LetterString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.alphabet_size <= 10 {
            for &l in &self.letters {
                write!(f, "{l}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.letters.iter().map(|l| l.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

impl FromStr for LetterString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        LetterString::parse_infer(s)
    }
}

fn parse_letters(input: &str) -> Result<Vec<usize>> {
    let input = input.trim();
    if input.is_empty() {
        return Ok(Vec::new());
    }
    if input.contains(',') {
        input
            .split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::Parse(format!("invalid letter {:?}", tok.trim())))
            })
            .collect()
    } else {
        input
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|v| v as usize)
                    .ok_or_else(|| Error::Parse(format!("invalid letter {c:?}")))
            })
            .collect()
    }
}

/// Integer types usable as counter accumulators.
///
/// Fixed-width types report overflow through `checked_add`; `BigUint` never
/// overflows. A string of length `n` has at most `2^n - 1` distinct nonempty
/// subsequences, so `u128` is exact for every string shorter than 128.
pub trait CountValue: Clone + Zero + One + CheckedAdd + for<'a> Sub<&'a Self, Output = Self> {}

impl CountValue for u64 {}
impl CountValue for u128 {}
impl CountValue for BigUint {}

/// Streaming distinct-subsequence counter.
///
/// Keeps the running total `φ` and, per letter, the value of the running
/// total just before that letter's most recent occurrence. Each push is a
/// constant number of additions.
#[derive(Debug, Clone)]
pub struct IncrementalCounter<C = BigCount> {
    alphabet: Alphabet,
    len: usize,
    total: C,
    before_last: Vec<Option<C>>,
}

impl<C: CountValue> IncrementalCounter<C> {
    pub fn new(alphabet: Alphabet) -> Self {
        IncrementalCounter {
            alphabet,
            len: 0,
            total: C::zero(),
            before_last: vec![None; alphabet.size()],
        }
    }

    /// Appends a letter, returning `(ν of the new prefix, running φ)`.
    pub fn push(&mut self, letter: usize) -> Result<(C, C)> {
        self.alphabet.check(letter)?;
        let new = match &self.before_last[letter] {
            Some(prev) => self.total.clone() - prev,
            None => self.total.checked_add(&C::one()).ok_or(Error::Overflow)?,
        };
        let total = self.total.checked_add(&new).ok_or(Error::Overflow)?;
        self.before_last[letter] = Some(std::mem::replace(&mut self.total, total));
        self.len += 1;
        Ok((new, self.total.clone()))
    }

    /// Number of distinct nonempty subsequences of the letters pushed so far.
    pub fn total(&self) -> &C {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }
}

/// Per-prefix new-subsequence counts `ν(T_1), .., ν(T_n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NewCountProfile {
    pub counts: Vec<BigCount>,
}

impl NewCountProfile {
    pub fn total(&self) -> BigCount {
        self.counts.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn new_subseq_counts(t: &LetterString) -> NewCountProfile {
    let mut counter = IncrementalCounter::<BigCount>::new(t.alphabet());
    let counts = t
        .letters()
        .iter()
        .map(|&l| counter.push(l).expect("letters validated on construction").0)
        .collect();
    NewCountProfile { counts }
}

/// Number of distinct nonempty subsequences; zero for the empty string.
pub fn count_distinct(t: &LetterString) -> BigCount {
    let mut counter = IncrementalCounter::<BigCount>::new(t.alphabet());
    for &l in t.letters() {
        counter.push(l).expect("letters validated on construction");
    }
    counter.total
}

/// Number of distinct subsequences including the empty one.
pub fn count_distinct_with_empty(t: &LetterString) -> BigCount {
    count_distinct(t) + 1u32
}

/// Fixed-width count for strings shorter than 128 letters.
pub fn count_distinct_u128(t: &LetterString) -> Result<u128> {
    let mut counter = IncrementalCounter::<u128>::new(t.alphabet());
    for &l in t.letters() {
        counter.push(l)?;
    }
    Ok(counter.total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn bin(s: &str) -> LetterString {
        LetterString::parse(s, Alphabet::binary()).unwrap()
    }

    fn profile(s: &LetterString) -> Vec<u64> {
        new_subseq_counts(s)
            .counts
            .iter()
            .map(|c| u64::try_from(c).unwrap())
            .collect()
    }

    // Independent brute force: all index subsets, deduplicated.
    fn brute_count(letters: &[usize]) -> usize {
        let n = letters.len();
        let mut seen = BTreeSet::new();
        for mask in 1u32..(1u32 << n) {
            let sub: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| letters[i]).collect();
            seen.insert(sub);
        }
        seen.len()
    }

    fn brute_profile(letters: &[usize]) -> Vec<usize> {
        let mut prev = 0;
        (1..=letters.len())
            .map(|i| {
                let c = brute_count(&letters[..i]);
                let v = c - prev;
                prev = c;
                v
            })
            .collect()
    }

    #[test]
    fn profile_examples() {
        assert_eq!(profile(&bin("000")), vec![1, 1, 1]);
        assert_eq!(brute_profile(&[0, 1, 0]), vec![1, 2, 3]);
        assert_eq!(profile(&bin("010")), vec![1, 2, 3]);
        let ternary = LetterString::parse("210", Alphabet::new(3).unwrap()).unwrap();
        assert_eq!(profile(&ternary), vec![1, 2, 4]);
        assert_eq!(brute_profile(&[0, 1, 1, 0]), vec![1, 2, 2, 5]);
        assert_eq!(profile(&bin("0110")), vec![1, 2, 2, 5]);
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_distinct(&bin("010")), BigUint::from(6u32));
        assert_eq!(count_distinct(&bin("111")), BigUint::from(3u32));
        assert_eq!(count_distinct(&bin("0110")), BigUint::from(10u32));
        assert_eq!(count_distinct(&bin("")), BigUint::zero());
        assert!(new_subseq_counts(&bin("")).is_empty());
    }

    #[test]
    fn with_empty_examples() {
        assert_eq!(count_distinct_with_empty(&bin("")), BigUint::from(1u32));
        assert_eq!(count_distinct_with_empty(&bin("01")), BigUint::from(4u32));
        assert_eq!(count_distinct_with_empty(&bin("111")), BigUint::from(4u32));
    }

    #[test]
    fn incremental_examples() {
        let mut c = IncrementalCounter::<BigCount>::new(Alphabet::binary());
        let out: Vec<(u32, u32)> = [0, 1, 0]
            .iter()
            .map(|&l| {
                let (nu, phi) = c.push(l).unwrap();
                (u32::try_from(&nu).unwrap(), u32::try_from(&phi).unwrap())
            })
            .collect();
        assert_eq!(out, vec![(1, 1), (2, 3), (3, 6)]);

        let mut c = IncrementalCounter::<u64>::new(Alphabet::binary());
        let nus: Vec<u64> = [1, 1, 1].iter().map(|&l| c.push(l).unwrap().0).collect();
        assert_eq!(nus, vec![1, 1, 1]);

        let mut c = IncrementalCounter::<u64>::new(Alphabet::new(3).unwrap());
        let nus: Vec<u64> = [2, 1, 0].iter().map(|&l| c.push(l).unwrap().0).collect();
        assert_eq!(nus, vec![1, 2, 4]);
    }

    #[test]
    fn out_of_range_letter_is_rejected() {
        let mut c = IncrementalCounter::<u64>::new(Alphabet::binary());
        assert_eq!(
            c.push(2),
            Err(Error::LetterOutOfRange { letter: 2, size: 2 })
        );
        assert!(LetterString::parse("012", Alphabet::binary()).is_err());
        assert!(Alphabet::new(0).is_err());
    }

    #[test]
    fn u128_overflow_is_reported() {
        let long = LetterString::binary(&[0, 1].repeat(100)).unwrap();
        assert_eq!(count_distinct_u128(&long), Err(Error::Overflow));
        let ok = LetterString::binary(&[0, 1].repeat(60)).unwrap();
        assert_eq!(
            BigUint::from(count_distinct_u128(&ok).unwrap()),
            count_distinct(&ok)
        );
    }

    #[test]
    fn parses_both_encodings() {
        let a = LetterString::parse_infer("0110").unwrap();
        assert_eq!(a.letters(), &[0, 1, 1, 0]);
        assert_eq!(a.alphabet().size(), 2);
        let b = LetterString::parse_infer("3, 11,0").unwrap();
        assert_eq!(b.letters(), &[3, 11, 0]);
        assert_eq!(b.alphabet().size(), 12);
        assert_eq!(b.to_string(), "3,11,0");
        assert!(LetterString::parse_infer("01x").is_err());
        assert!(LetterString::parse_infer("1,,2").is_err());
        assert!(LetterString::parse_infer("").unwrap().is_empty());
    }

    #[test]
    fn binary_first_occurrence_gives_length() {
        // For binary strings the l = 0 branch of the recursion yields ν = n.
        for n in 1..12 {
            let mut letters = vec![0u8; n - 1];
            letters.push(1);
            let p = profile(&LetterString::binary(&letters).unwrap());
            assert_eq!(*p.last().unwrap(), n as u64);
        }
    }
}
