//! Seeded Monte Carlo estimation.
//!
//! Every trial draws from its own ChaCha8 stream keyed by
//! `(master seed, string length)` and selected by the trial index, so a
//! trial's string does not depend on which worker ran it. Per-trial values
//! are collected in trial order and reduced by pairwise summation, which
//! makes every record bit-identical for any worker count.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{IidModel, MarkovModel, Model};
use crate::strings::{count_distinct, count_distinct_u128, LetterString};

/// Counts above this are not exactly representable as `f64`.
pub const EXACT_F64_LIMIT: u128 = 1 << 53;

/// Slope threshold below which a growth fit reports `c = 1`: `ln(1 + ε)`.
pub const GROWTH_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub workers: usize,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig {
            trials,
            seed,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }
}

/// Generator for one trial: the key mixes the master seed and `n`, the
/// stream id is the trial index.
pub fn trial_rng(seed: u64, n: usize, trial: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(n as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(trial);
    rng
}

fn sample_iid<R: Rng + ?Sized>(model: &IidModel, n: usize, rng: &mut R) -> Vec<usize> {
    let probs = model.probs();
    let last = probs.len() - 1;
    (0..n)
        .map(|_| {
            let u: f64 = rng.random();
            let mut cum = 0.0;
            for (j, &p) in probs.iter().enumerate() {
                cum += p;
                if u < cum {
                    return j;
                }
            }
            // rounding in the cumulative sum: fall back to the last letter
            // that has positive probability
            (0..=last).rev().find(|&j| probs[j] > 0.0).unwrap_or(last)
        })
        .collect()
}

fn sample_markov<R: Rng + ?Sized>(model: &MarkovModel, n: usize, rng: &mut R) -> Vec<usize> {
    let mut out = Vec::with_capacity(n);
    let mut p_one = model.gamma();
    for _ in 0..n {
        let u: f64 = rng.random();
        let letter = usize::from(u < p_one);
        out.push(letter);
        p_one = if letter == 1 { model.alpha() } else { model.beta() };
    }
    out
}

/// Draws a random string of length `n`, generated left to right.
pub fn sample_string<R: Rng + ?Sized>(model: &Model, n: usize, rng: &mut R) -> LetterString {
    let letters = match model {
        Model::Iid(m) => sample_iid(m, n, rng),
        Model::Markov(m) => sample_markov(m, n, rng),
    };
    LetterString::new(model.alphabet(), letters).expect("sampled letters are in range")
}

fn run_trials<T, F>(trials: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if workers <= 1 {
        return Ok((0..trials).map(f).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(|| (0..trials).into_par_iter().map(f).collect()))
}

/// Pairwise summation in index order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        len if len <= 8 => xs.iter().sum(),
        len => {
            let (l, r) = xs.split_at(len / 2);
            pairwise_sum(l) + pairwise_sum(r)
        }
    }
}

/// `(mean, standard error)` with the `trials - 1` sample variance.
fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    let sq: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn ln_biguint(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: u64 = u64::try_from(x >> shift).expect("64 leading bits");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Accumulation {
    /// Counts were averaged directly; every count was below `2^53`.
    Linear,
    /// Some count exceeded `2^53`; the mean was formed from `ln φ`.
    Log,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRecord {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub model: String,
    pub mean: f64,
    pub stderr: f64,
    /// `ln(mean)`, finite even when `mean` overflows.
    pub log_mean: f64,
    pub accumulation: Accumulation,
}

/// One trial's count: exact below `2^53`, otherwise only its logarithm.
#[derive(Debug, Clone, Copy)]
struct TrialCount {
    value: Option<f64>,
    ln: f64,
}

fn trial_count(t: &LetterString) -> TrialCount {
    match count_distinct_u128(t) {
        Ok(c) if c <= EXACT_F64_LIMIT => TrialCount {
            value: Some(c as f64),
            ln: (c as f64).ln(),
        },
        Ok(c) => TrialCount {
            value: None,
            ln: (c as f64).ln(),
        },
        Err(_) => TrialCount {
            value: None,
            ln: ln_biguint(&count_distinct(t)),
        },
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials < 2 {
        return Err(Error::InvalidArgument(format!(
            "at least 2 trials are needed for a standard error, got {trials}"
        )));
    }
    Ok(())
}

/// Monte Carlo estimate of `E[φ(S_n)]`.
pub fn estimate_expected_count(model: &Model, n: usize, cfg: SimConfig) -> Result<EstimateRecord> {
    check_trials(cfg.trials)?;
    let counts = run_trials(cfg.trials, cfg.workers, |trial| {
        let mut rng = trial_rng(cfg.seed, n, trial);
        trial_count(&sample_string(model, n, &mut rng))
    })?;

    let linear: Option<Vec<f64>> = counts.iter().map(|c| c.value).collect();
    let (mean, stderr, log_mean, accumulation) = match linear {
        Some(values) => {
            let (mean, se) = mean_stderr(&values);
            (mean, se, mean.ln(), Accumulation::Linear)
        }
        None => {
            // Scale by the largest count so the rescaled values stay in [0, 1].
            let top = counts.iter().map(|c| c.ln).fold(f64::NEG_INFINITY, f64::max);
            let scaled: Vec<f64> = counts.iter().map(|c| (c.ln - top).exp()).collect();
            let (m, se) = mean_stderr(&scaled);
            let log_mean = top + m.ln();
            (log_mean.exp(), (top + se.ln()).exp(), log_mean, Accumulation::Log)
        }
    };
    Ok(EstimateRecord {
        n,
        trials: cfg.trials,
        seed: cfg.seed,
        model: model.to_string(),
        mean,
        stderr,
        log_mean,
        accumulation,
    })
}

/// Least-squares line through `(n, ln ψ(n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// `exp(slope)`, or exactly 1 for constant-string models and flat fits.
    pub c_hat: f64,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub max_abs_residual: f64,
    pub points: usize,
    pub degenerate: bool,
}

pub fn fit_growth(points: &[(f64, f64)]) -> Result<GrowthFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(
            "a growth fit needs at least 3 grid points".into(),
        ));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point in growth fit".into()));
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("grid points must be distinct".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = points.iter().map(|p| p.1 - (intercept + slope * p.0)).collect();
    let ss_res: f64 = residuals.iter().map(|r| r * r).sum();
    let ss_tot: f64 = points.iter().map(|p| (p.1 - my).powi(2)).sum();
    let flat = slope < GROWTH_EPSILON.ln_1p();
    Ok(GrowthFit {
        c_hat: if flat { 1.0 } else { slope.exp() },
        slope,
        intercept,
        r_squared: if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 },
        max_abs_residual: residuals.iter().fold(0.0, |m, r| m.max(r.abs())),
        points: points.len(),
        degenerate: flat,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthEstimate {
    pub records: Vec<EstimateRecord>,
    pub fit: GrowthFit,
}

/// Estimates the growth constant `c` in `ψ(n)^{1/n} -> c` from Monte Carlo
/// means over a grid of lengths.
pub fn estimate_growth_constant(model: &Model, grid: &[usize], cfg: SimConfig) -> Result<GrowthEstimate> {
    if grid.len() < 3 {
        return Err(Error::InvalidArgument(
            "a growth fit needs at least 3 grid points".into(),
        ));
    }
    let records = grid
        .iter()
        .map(|&n| estimate_expected_count(model, n, cfg))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.n as f64, r.log_mean)).collect();
    let mut fit = fit_growth(&points)?;
    if model.is_degenerate() {
        fit.c_hat = 1.0;
        fit.degenerate = true;
    }
    Ok(GrowthEstimate { records, fit })
}

/// Largest `k` such that every string of length `k` over the alphabet is a
/// subsequence of `t`.
///
/// Greedy rounds: scanning left to right, a round closes as soon as every
/// letter has appeared since the round opened; `k` is the number of closed
/// rounds. Any pattern `x_1..x_k` embeds by matching `x_i` inside round `i`.
/// Conversely, let `x_i` be the letter that closes round `i` (seen for the
/// first time in that round) and let `y` be a letter missing from the
/// unfinished tail. Greedy matching of `x_1..x_k y` places `x_i` exactly at
/// the end of round `i`, so `y` would have to occur in the tail, which it
/// does not. Hence length `k + 1` fails.
pub fn superpattern_k(t: &LetterString) -> usize {
    let d = t.alphabet().size();
    let mut seen = vec![false; d];
    let mut missing = d;
    let mut rounds = 0;
    for &letter in t.letters() {
        if !seen[letter] {
            seen[letter] = true;
            missing -= 1;
            if missing == 0 {
                rounds += 1;
                seen.iter_mut().for_each(|s| *s = false);
                missing = d;
            }
        }
    }
    rounds
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperpatternRecord {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub model: String,
    /// `k -> number of trials`
    pub histogram: BTreeMap<usize, u64>,
    pub mean_k: f64,
    pub stderr_k: f64,
    pub mean_k_over_n: f64,
}

pub fn superpattern_experiment(model: &Model, n: usize, cfg: SimConfig) -> Result<SuperpatternRecord> {
    check_trials(cfg.trials)?;
    let ks = run_trials(cfg.trials, cfg.workers, |trial| {
        let mut rng = trial_rng(cfg.seed, n, trial);
        superpattern_k(&sample_string(model, n, &mut rng))
    })?;
    let mut histogram = BTreeMap::new();
    for &k in &ks {
        *histogram.entry(k).or_insert(0) += 1;
    }
    let values: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let (mean_k, stderr_k) = mean_stderr(&values);
    Ok(SuperpatternRecord {
        n,
        trials: cfg.trials,
        seed: cfg.seed,
        model: model.to_string(),
        histogram,
        mean_k,
        stderr_k,
        mean_k_over_n: if n == 0 { 0.0 } else { mean_k / n as f64 },
    })
}
