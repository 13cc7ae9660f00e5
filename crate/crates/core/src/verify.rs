//! Self-check suites run by `subseq verify`.

use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expectation::{closed_form_binary, iid_matrix_expectation, markov_expectation, NumericMode};
use crate::model::{IidModel, MarkovModel, Model, Rational};
use crate::montecarlo::superpattern_k;
use crate::oracle::{
    check_pair_structure, enumerate_distinct, exhaustive_expectation, submultiplicativity_table,
    tree_row, Convention,
};
use crate::strings::{count_distinct, Alphabet, LetterString};

/// Largest `--max-n` accepted; exhaustive sweeps beyond it hit the guards.
pub const MAX_VERIFY_N: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Counting,
    Tree,
    Expectation,
    Fekete,
    Superpattern,
    /// Counting, tree and Fekete checks: everything the brute-force oracle decides.
    Oracle,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "counting" => Suite::Counting,
            "tree" => Suite::Tree,
            "expectation" => Suite::Expectation,
            "fekete" => Suite::Fekete,
            "superpattern" => Suite::Superpattern,
            "oracle" => Suite::Oracle,
            "all" => Suite::All,
            other => return Err(Error::Parse(format!("unknown suite {other:?}"))),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status}  {}/{}  {}", self.suite, self.name, self.detail)
    }
}

fn outcome(suite: &'static str, name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        suite,
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Every string of length `len` over `d` letters, in lexicographic order.
pub fn all_strings(d: usize, len: usize) -> impl Iterator<Item = LetterString> {
    let alphabet = Alphabet::new(d).expect("d >= 1");
    let total = d.pow(len as u32);
    (0..total).map(move |mut idx| {
        let mut letters = vec![0; len];
        for slot in letters.iter_mut().rev() {
            *slot = idx % d;
            idx /= d;
        }
        LetterString::new(alphabet, letters).expect("in range")
    })
}

fn counting(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    for (d, cap) in [(2, 12), (3, 8)] {
        let top = max_n.min(cap);
        let mut checked = 0usize;
        let mut mismatch = None;
        'outer: for len in 0..=top {
            for t in all_strings(d, len) {
                let size = enumerate_distinct(&t)?.len();
                checked += 1;
                if count_distinct(&t).to_usize() != Some(size) {
                    mismatch = Some(t.to_string());
                    break 'outer;
                }
            }
        }
        out.push(outcome(
            "counting",
            format!("enumeration d={d} n<={top}"),
            mismatch.is_none(),
            match mismatch {
                Some(t) => format!("mismatch at {t}"),
                None => format!("{checked} strings"),
            },
        ));
    }
    Ok(out)
}

fn tree(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let figure: [(usize, usize, &[u64]); 5] = [
        (2, 0, &[0]),
        (2, 1, &[1, 1]),
        (2, 2, &[1, 2, 2, 1]),
        (2, 3, &[1, 3, 3, 2, 2, 3, 3, 1]),
        (3, 2, &[1, 2, 2, 2, 1, 2, 2, 2, 1]),
    ];
    for (d, n, expect) in figure {
        let row = tree_row(d, n)?.to_u64();
        out.push(outcome(
            "tree",
            format!("figure row d={d} n={n}"),
            row == expect,
            format!("{row:?}"),
        ));
    }
    let top = max_n.min(MAX_VERIFY_N);
    let failing: Vec<usize> = (2..=top)
        .filter(|&n| !matches!(check_pair_structure(n), Ok(true)))
        .collect();
    out.push(outcome(
        "tree",
        format!("pair structure 2<=n<={top}"),
        failing.is_empty(),
        if failing.is_empty() {
            "all rows".to_string()
        } else {
            format!("fails at n in {failing:?}")
        },
    ));
    Ok(out)
}

fn q(p: i64, d: i64) -> Rational {
    Rational::new(p.into(), d.into())
}

fn expectation(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    let n_bin = max_n.clamp(1, 12);
    let mut worst = 0.0f64;
    for k in 1..10 {
        let model = IidModel::binary_exact(q(k, 10))?;
        let oracle = exhaustive_expectation(&Model::Iid(model), n_bin)?.to_f64();
        for (i, v) in oracle.iter().enumerate() {
            let c = closed_form_binary(k as f64 / 10.0, i as u32 + 1)?;
            worst = worst.max(((c - v) / v).abs());
        }
    }
    out.push(outcome(
        "expectation",
        format!("closed form vs exhaustive n<={n_bin}"),
        worst <= 1e-9,
        format!("max relative error {worst:.3e}"),
    ));

    let n_iid = max_n.clamp(1, 8);
    let models = [
        IidModel::uniform(2)?,
        IidModel::uniform(3)?,
        IidModel::uniform(4)?,
        IidModel::from_rationals(vec![q(1, 5), q(4, 5)])?,
        IidModel::from_rationals(vec![q(1, 2), q(1, 3), q(1, 6)])?,
        IidModel::from_rationals(vec![q(1, 10), q(2, 10), q(3, 10), q(4, 10)])?,
    ];
    for model in models {
        let engine = iid_matrix_expectation(&model, n_iid, NumericMode::Exact)?;
        let oracle = exhaustive_expectation(&Model::Iid(model.clone()), n_iid)?;
        out.push(outcome(
            "expectation",
            format!("matrix {model} n<={n_iid}"),
            engine == oracle,
            "exact rational comparison",
        ));
    }

    let n_markov = max_n.clamp(1, 12);
    let grid = [q(3, 10), q(1, 2), q(7, 10)];
    for a in &grid {
        for b in &grid {
            let model = MarkovModel::from_rationals(a.clone(), b.clone())?;
            let engine = markov_expectation(&model, n_markov, NumericMode::Exact)?;
            let oracle = exhaustive_expectation(&Model::Markov(model.clone()), n_markov)?;
            out.push(outcome(
                "expectation",
                format!("{model} n<={n_markov}"),
                engine == oracle,
                "exact rational comparison",
            ));
        }
    }
    Ok(out)
}

fn fekete(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let top = max_n.clamp(2, 12);
    let models = [
        IidModel::binary_exact(q(3, 10))?,
        IidModel::binary_exact(q(1, 2))?,
        IidModel::uniform(3)?,
    ];
    let mut out = Vec::new();
    for model in models {
        let table = submultiplicativity_table(&model, top, Convention::WithEmpty)?;
        let bad: Vec<(usize, usize)> = table.iter().filter(|c| !c.holds).map(|c| (c.n, c.m)).collect();
        out.push(outcome(
            "fekete",
            format!("{model} n+m<={top}"),
            bad.is_empty(),
            if bad.is_empty() {
                format!("{} pairs", table.len())
            } else {
                format!("fails at {bad:?}")
            },
        ));
    }
    Ok(out)
}

fn superpattern(max_n: usize) -> Result<Vec<CheckOutcome>> {
    let top = max_n.min(14);
    let mut mismatch = None;
    let mut checked = 0usize;
    'outer: for len in 0..=top {
        for t in all_strings(2, len) {
            checked += 1;
            let k = superpattern_k(&t);
            if !contains_all_patterns(&t, k) || contains_all_patterns(&t, k + 1) {
                mismatch = Some(t.to_string());
                break 'outer;
            }
        }
    }
    Ok(vec![outcome(
        "superpattern",
        format!("brute force d=2 n<={top}"),
        mismatch.is_none(),
        match mismatch {
            Some(t) => format!("mismatch at {t}"),
            None => format!("{checked} strings"),
        },
    )])
}

/// Whether every string of length `k` is a subsequence of `t`.
pub fn contains_all_patterns(t: &LetterString, k: usize) -> bool {
    let d = t.alphabet().size();
    all_strings(d, k).all(|p| {
        let mut it = t.letters().iter();
        p.letters().iter().all(|c| it.any(|x| x == c))
    })
}

pub fn run_suite(suite: Suite, max_n: usize) -> Result<Vec<CheckOutcome>> {
    if max_n > MAX_VERIFY_N {
        return Err(Error::SizeGuard(format!(
            "--max-n {max_n} exceeds the exhaustive limit {MAX_VERIFY_N}"
        )));
    }
    let mut out = Vec::new();
    let parts: &[Suite] = match suite {
        Suite::Oracle => &[Suite::Counting, Suite::Tree, Suite::Fekete],
        Suite::All => &[
            Suite::Counting,
            Suite::Tree,
            Suite::Expectation,
            Suite::Fekete,
            Suite::Superpattern,
        ],
        _ => std::slice::from_ref(&suite),
    };
    for part in parts {
        out.extend(match part {
            Suite::Counting => counting(max_n)?,
            Suite::Tree => tree(max_n)?,
            Suite::Expectation => expectation(max_n)?,
            Suite::Fekete => fekete(max_n)?,
            Suite::Superpattern => superpattern(max_n)?,
            Suite::Oracle | Suite::All => unreachable!("expanded above"),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suites_pass() {
        let outcomes = run_suite(Suite::All, 6).unwrap();
        assert!(!outcomes.is_empty());
        for o in &outcomes {
            assert!(o.passed, "{o}");
        }
    }

    #[test]
    fn guard_and_parse() {
        assert!(matches!(run_suite(Suite::Tree, 21), Err(Error::SizeGuard(_))));
        assert_eq!("oracle".parse::<Suite>().unwrap(), Suite::Oracle);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn all_strings_enumerates_in_order() {
        let v: Vec<String> = all_strings(2, 2).map(|s| s.to_string()).collect();
        assert_eq!(v, vec!["00", "01", "10", "11"]);
        assert_eq!(all_strings(3, 0).count(), 1);
    }
}
