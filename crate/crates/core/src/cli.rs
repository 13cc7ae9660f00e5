//! Command-line front end.
//!
//! Every subcommand writes CSV (header row first) or JSON to the supplied
//! writer. Exact rationals are written as `"p/q"` strings and big counts as
//! decimal strings; floats use the shortest representation that parses back
//! to the same bits.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analysis::{expected_occurrences, log2_expected_occurrences, occurrence_threshold, solve_balance};
use crate::error::{Error, Result};
use crate::expectation::{
    closed_form_binary, iid_matrix_expectation, markov_expectation, ExpectationSeries, NumericMode,
};
use crate::model::{parse_prob, IidModel, MarkovModel, Model, Prob};
use crate::montecarlo::{
    estimate_expected_count, estimate_growth_constant, superpattern_experiment, superpattern_k, SimConfig,
};
use crate::oracle::tree_row;
use crate::strings::{count_distinct, new_subseq_counts, Alphabet, LetterString};
use crate::verify::{run_suite, Suite};

/// Environment variable supplying the default `--seed`.
pub const SEED_ENV: &str = "SUBSEQ_SEED";

#[derive(Debug, Parser)]
#[command(name = "subseq", version, about = "Distinct subsequences of fixed and random strings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Closed,
    Matrix,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Iid,
    Markov,
}

/// Exactly one of `--alpha`, `--probs`, `--markov`.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct ModelSpec {
    /// Binary IID model with Pr[1] = ALPHA (decimal or p/q).
    #[arg(long)]
    pub alpha: Option<String>,
    /// IID model over letters 0..d-1 with the given probabilities.
    #[arg(long)]
    pub probs: Option<String>,
    /// Two-state chain "ALPHA,BETA": Pr[1 after 1], Pr[1 after 0].
    #[arg(long)]
    pub markov: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count distinct subsequences of fixed strings.
    Count {
        /// Strings as digits ("0110") or comma-separated letters ("2,10,3").
        strings: Vec<String>,
        /// Read one string per line.
        #[arg(long)]
        file: Option<PathBuf>,
        /// Alphabet size; inferred from the letters when omitted.
        #[arg(long)]
        d: Option<usize>,
        /// Also report the count including the empty subsequence.
        #[arg(long)]
        with_empty: bool,
        /// Also report the per-prefix new-subsequence profile.
        #[arg(long)]
        profile: bool,
        #[arg(long, value_enum, default_value_t)]
        out: OutputFormat,
    },
    /// Expected count for random strings of length 1..=n.
    Expect {
        #[arg(long, value_enum)]
        engine: Engine,
        #[command(flatten)]
        model: ModelSpec,
        #[arg(long)]
        n: usize,
        /// Exact rational arithmetic (matrix and markov engines).
        #[arg(long)]
        exact: bool,
        #[arg(long, value_enum, default_value_t)]
        out: OutputFormat,
    },
    /// Monte Carlo estimates of the expected count.
    Simulate {
        #[arg(long, value_enum)]
        model: ModelKind,
        #[command(flatten)]
        spec: ModelSpec,
        #[arg(long, conflicts_with = "grid", required_unless_present = "grid")]
        n: Option<usize>,
        /// Lengths "a:b:step" (inclusive).
        #[arg(long)]
        grid: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t)]
        out: OutputFormat,
    },
    /// Run the brute-force verification suites.
    Verify {
        /// counting, tree, expectation, fekete, superpattern, oracle or all.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 10)]
        max_n: usize,
        #[arg(long, value_enum, default_value_t)]
        out: OutputFormat,
    },
    /// Print a row of the tree of new-subsequence counts.
    TreeRow {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// Superpattern statistic of fixed strings, or its distribution.
    Superpattern {
        strings: Vec<String>,
        #[arg(long)]
        d: Option<usize>,
        /// Run the random-string experiment at this length.
        #[arg(long, conflicts_with = "strings")]
        n: Option<usize>,
        #[arg(long, value_enum, requires = "n")]
        model: Option<ModelKind>,
        #[arg(long, requires = "n")]
        alpha: Option<String>,
        #[arg(long, requires = "n")]
        probs: Option<String>,
        #[arg(long, requires = "n")]
        markov: Option<String>,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t)]
        out: OutputFormat,
    },
    /// Root solving for the occurrence-count equations (JSON output).
    Solve {
        /// Solve 2^x x^x (1-x)^(1-x) = TARGET.
        #[arg(long)]
        balance: Option<f64>,
        /// Solve H(x) = x on (1/2, 1).
        #[arg(long)]
        threshold: bool,
        /// Expected embeddings: n=N pattern=P and alpha=A or probs=p0,p1,...
        #[arg(long, num_args = 1..)]
        occurrences: Option<Vec<String>>,
    },
}

/// Formats a float as the shortest string that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn parse_list(s: &str) -> Result<Vec<Prob>> {
    s.split(',').map(parse_prob).collect()
}

fn iid_from(alpha: Option<&str>, probs: Option<&str>) -> Result<IidModel> {
    match (alpha, probs) {
        (Some(a), None) => IidModel::binary_from(parse_prob(a)?),
        (None, Some(p)) => IidModel::from_probs(parse_list(p)?),
        _ => Err(Error::InvalidArgument(
            "an IID model needs exactly one of --alpha or --probs".into(),
        )),
    }
}

fn markov_from(spec: &str) -> Result<MarkovModel> {
    let parts = parse_list(spec)?;
    match <[Prob; 2]>::try_from(parts) {
        Ok([a, b]) => MarkovModel::from_probs(a, b),
        Err(_) => Err(Error::Parse(format!(
            "--markov expects ALPHA,BETA, got {spec:?}"
        ))),
    }
}

fn model_from(kind: Option<ModelKind>, alpha: Option<&str>, probs: Option<&str>, markov: Option<&str>) -> Result<Model> {
    let kind = kind.unwrap_or(if markov.is_some() { ModelKind::Markov } else { ModelKind::Iid });
    match kind {
        ModelKind::Iid => {
            if markov.is_some() {
                return Err(Error::InvalidArgument("--model iid takes --alpha or --probs".into()));
            }
            Ok(Model::Iid(iid_from(alpha, probs)?))
        }
        ModelKind::Markov => match (markov, alpha, probs) {
            (Some(m), None, None) => Ok(Model::Markov(markov_from(m)?)),
            _ => Err(Error::InvalidArgument("--model markov takes --markov ALPHA,BETA".into())),
        },
    }
}

fn parse_grid(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::Parse(format!("--grid expects a:b:step, got {s:?}"));
    let parts: Vec<usize> = s
        .split(':')
        .map(|p| p.trim().parse::<usize>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (a, b, step) = match parts[..] {
        [a, b] => (a, b, 1),
        [a, b, step] => (a, b, step),
        _ => return Err(bad()),
    };
    if step == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

fn parse_string(input: &str, d: Option<usize>) -> Result<LetterString> {
    match d {
        Some(d) => LetterString::parse(input, Alphabet::new(d)?),
        None => LetterString::parse_infer(input),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable")
}

fn write_csv(out: &mut dyn Write, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::InvalidArgument(format!("write failed: {e}"));
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| Error::InvalidArgument(format!("write failed: {e}")))?;
    Ok(())
}

fn write_line(out: &mut dyn Write, text: &str) -> Result<()> {
    writeln!(out, "{text}").map_err(|e| Error::InvalidArgument(format!("write failed: {e}")))
}

fn count_command(
    strings: Vec<String>,
    file: Option<PathBuf>,
    d: Option<usize>,
    with_empty: bool,
    profile: bool,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let mut parsed = Vec::new();
    for s in &strings {
        parsed.push(parse_string(s, d)?);
    }
    if let Some(path) = file {
        let text = fs::read_to_string(&path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            parsed.push(
                parse_string(line, d).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?,
            );
        }
    }
    if parsed.is_empty() {
        return Err(Error::InvalidArgument("no strings given".into()));
    }

    let rows: Vec<(String, usize, String, String, Vec<String>)> = parsed
        .iter()
        .map(|t| {
            let phi = count_distinct(t);
            let prof = if profile {
                new_subseq_counts(t).counts.iter().map(|c| c.to_string()).collect()
            } else {
                Vec::new()
            };
            (t.to_string(), t.len(), phi.to_string(), (phi + 1u32).to_string(), prof)
        })
        .collect();

    match format {
        OutputFormat::Csv => {
            let mut header = vec!["string", "n", "phi"];
            if with_empty {
                header.push("phi_with_empty");
            }
            if profile {
                header.push("profile");
            }
            let body = rows
                .into_iter()
                .map(|(s, n, phi, phi_e, prof)| {
                    let mut row = vec![s, n.to_string(), phi];
                    if with_empty {
                        row.push(phi_e);
                    }
                    if profile {
                        row.push(prof.join(" "));
                    }
                    row
                })
                .collect();
            write_csv(out, &header, body)
        }
        OutputFormat::Json => {
            let items: Vec<Value> = rows
                .into_iter()
                .map(|(s, n, phi, phi_e, prof)| {
                    let mut v = json!({ "string": s, "n": n, "phi": phi });
                    if with_empty {
                        v["phi_with_empty"] = json!(phi_e);
                    }
                    if profile {
                        v["profile"] = json!(prof);
                    }
                    v
                })
                .collect();
            write_line(out, &to_json(&items))
        }
    }
}

fn series_cells(series: &ExpectationSeries) -> Vec<(String, Value)> {
    match series {
        ExpectationSeries::Exact(v) => v.iter().map(|r| (r.to_string(), json!(r.to_string()))).collect(),
        ExpectationSeries::Float(v) => v.iter().map(|&x| (fmt_f64(x), json!(x))).collect(),
    }
}

fn expect_command(
    engine: Engine,
    spec: ModelSpec,
    n: usize,
    exact: bool,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("--n must be at least 1".into()));
    }
    let mode = if exact { NumericMode::Exact } else { NumericMode::Float };
    let (model_desc, series) = match engine {
        Engine::Closed => {
            let alpha = spec
                .alpha
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("--engine closed needs --alpha".into()))?;
            if exact {
                return Err(Error::InvalidArgument(
                    "the closed form involves a square root and has no exact mode".into(),
                ));
            }
            let alpha = parse_prob(alpha)?.value;
            let values = (1..=n)
                .map(|i| closed_form_binary(alpha, i as u32))
                .collect::<Result<Vec<_>>>()?;
            (format!("iid({},{alpha})", 1.0 - alpha), ExpectationSeries::Float(values))
        }
        Engine::Matrix => {
            if spec.markov.is_some() {
                return Err(Error::InvalidArgument("--engine matrix takes --alpha or --probs".into()));
            }
            let model = iid_from(spec.alpha.as_deref(), spec.probs.as_deref())?;
            (model.to_string(), iid_matrix_expectation(&model, n, mode)?)
        }
        Engine::Markov => {
            let m = spec
                .markov
                .as_deref()
                .ok_or_else(|| Error::InvalidArgument("--engine markov needs --markov ALPHA,BETA".into()))?;
            let model = markov_from(m)?;
            (model.to_string(), markov_expectation(&model, n, mode)?)
        }
    };
    let cells = series_cells(&series);
    match format {
        OutputFormat::Csv => write_csv(
            out,
            &["n", "expectation"],
            cells
                .into_iter()
                .enumerate()
                .map(|(i, (s, _))| vec![(i + 1).to_string(), s])
                .collect(),
        ),
        OutputFormat::Json => {
            let values: Vec<Value> = cells
                .into_iter()
                .enumerate()
                .map(|(i, (_, v))| json!({ "n": i + 1, "value": v }))
                .collect();
            let engine = format!("{engine:?}").to_lowercase();
            let doc = json!({
                "engine": engine,
                "model": model_desc,
                "mode": series.mode(),
                "values": values,
            });
            write_line(out, &to_json(&doc))
        }
    }
}

fn sim_config(sim: &SimArgs) -> SimConfig {
    SimConfig::new(sim.trials, sim.seed).with_workers(sim.workers)
}

fn simulate_command(
    kind: ModelKind,
    spec: ModelSpec,
    n: Option<usize>,
    grid: Option<String>,
    sim: SimArgs,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    let model = model_from(
        Some(kind),
        spec.alpha.as_deref(),
        spec.probs.as_deref(),
        spec.markov.as_deref(),
    )?;
    let cfg = sim_config(&sim);
    let lengths = match (n, grid) {
        (Some(n), None) => vec![n],
        (None, Some(g)) => parse_grid(&g)?,
        _ => return Err(Error::InvalidArgument("give exactly one of --n or --grid".into())),
    };
    let (records, fit) = if lengths.len() >= 3 {
        let est = estimate_growth_constant(&model, &lengths, cfg)?;
        (est.records, Some(est.fit))
    } else {
        let records = lengths
            .iter()
            .map(|&n| estimate_expected_count(&model, n, cfg))
            .collect::<Result<Vec<_>>>()?;
        (records, None)
    };
    match format {
        OutputFormat::Csv => write_csv(
            out,
            &["n", "mean", "stderr", "trials", "seed"],
            records
                .iter()
                .map(|r| {
                    vec![
                        r.n.to_string(),
                        fmt_f64(r.mean),
                        fmt_f64(r.stderr),
                        r.trials.to_string(),
                        r.seed.to_string(),
                    ]
                })
                .collect(),
        ),
        OutputFormat::Json => {
            let mut doc = json!({ "model": model.to_string(), "workers": sim.workers, "records": records });
            if let Some(fit) = fit {
                doc["growth"] = json!(fit);
            }
            write_line(out, &to_json(&doc))
        }
    }
}

/// Returns whether every check passed.
fn verify_command(suite: &str, max_n: usize, format: OutputFormat, out: &mut dyn Write) -> Result<bool> {
    let suite: Suite = suite.parse()?;
    let outcomes = run_suite(suite, max_n)?;
    let all = outcomes.iter().all(|o| o.passed);
    match format {
        OutputFormat::Csv => write_csv(
            out,
            &["suite", "check", "status", "detail"],
            outcomes
                .iter()
                .map(|o| {
                    vec![
                        o.suite.to_string(),
                        o.name.clone(),
                        if o.passed { "PASS" } else { "FAIL" }.to_string(),
                        o.detail.clone(),
                    ]
                })
                .collect(),
        )?,
        OutputFormat::Json => write_line(out, &to_json(&json!({ "passed": all, "checks": outcomes })))?,
    }
    Ok(all)
}

#[allow(clippy::too_many_arguments)]
fn superpattern_command(
    strings: Vec<String>,
    d: Option<usize>,
    n: Option<usize>,
    kind: Option<ModelKind>,
    alpha: Option<String>,
    probs: Option<String>,
    markov: Option<String>,
    sim: SimArgs,
    format: OutputFormat,
    out: &mut dyn Write,
) -> Result<()> {
    if let Some(n) = n {
        let model = model_from(kind, alpha.as_deref(), probs.as_deref(), markov.as_deref())?;
        let rec = superpattern_experiment(&model, n, sim_config(&sim))?;
        return match format {
            OutputFormat::Csv => {
                let hist: Vec<String> = rec.histogram.iter().map(|(k, c)| format!("{k}:{c}")).collect();
                write_csv(
                    out,
                    &["n", "trials", "seed", "mean_k", "stderr_k", "mean_k_over_n", "histogram"],
                    vec![vec![
                        rec.n.to_string(),
                        rec.trials.to_string(),
                        rec.seed.to_string(),
                        fmt_f64(rec.mean_k),
                        fmt_f64(rec.stderr_k),
                        fmt_f64(rec.mean_k_over_n),
                        hist.join(" "),
                    ]],
                )
            }
            OutputFormat::Json => {
                let doc = json!({
                    "record": rec,
                    "occurrence_threshold": occurrence_threshold().x,
                });
                write_line(out, &to_json(&doc))
            }
        };
    }
    if strings.is_empty() {
        return Err(Error::InvalidArgument("give strings or --n for the experiment".into()));
    }
    let parsed = strings
        .iter()
        .map(|s| parse_string(s, d))
        .collect::<Result<Vec<_>>>()?;
    match format {
        OutputFormat::Csv => write_csv(
            out,
            &["string", "n", "k"],
            parsed
                .iter()
                .map(|t| vec![t.to_string(), t.len().to_string(), superpattern_k(t).to_string()])
                .collect(),
        ),
        OutputFormat::Json => {
            let items: Vec<Value> = parsed
                .iter()
                .map(|t| json!({ "string": t.to_string(), "n": t.len(), "k": superpattern_k(t) }))
                .collect();
            write_line(out, &to_json(&items))
        }
    }
}

fn occurrences_json(items: &[String]) -> Result<Value> {
    let mut n = None;
    let mut pattern = None;
    let mut alpha = None;
    let mut probs = None;
    for item in items {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got {item:?}")))?;
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| Error::Parse(format!("invalid n {value:?}")))?),
            "pattern" => pattern = Some(value.to_string()),
            "alpha" => alpha = Some(value.to_string()),
            "probs" => probs = Some(value.to_string()),
            other => return Err(Error::Parse(format!("unknown key {other:?}"))),
        }
    }
    let n = n.ok_or_else(|| Error::InvalidArgument("--occurrences needs n=N".into()))?;
    let pattern = pattern.ok_or_else(|| Error::InvalidArgument("--occurrences needs pattern=P".into()))?;
    let model = iid_from(alpha.as_deref(), probs.as_deref())?;
    let pattern = LetterString::parse(&pattern, model.alphabet())?;
    Ok(json!({
        "n": n,
        "pattern": pattern.to_string(),
        "model": model.to_string(),
        "expected": expected_occurrences(n, &pattern, &model)?,
        "log2_expected": log2_expected_occurrences(n, &pattern, &model)?,
    }))
}

fn solve_command(
    balance: Option<f64>,
    threshold: bool,
    occurrences: Option<Vec<String>>,
    out: &mut dyn Write,
) -> Result<()> {
    if balance.is_none() && !threshold && occurrences.is_none() {
        return Err(Error::InvalidArgument(
            "give --balance, --threshold or --occurrences".into(),
        ));
    }
    let mut doc = json!({});
    if let Some(target) = balance {
        doc["balance"] = json!({ "target": target, "roots": solve_balance(target)? });
    }
    if threshold {
        doc["threshold"] = json!(occurrence_threshold());
    }
    if let Some(items) = occurrences {
        doc["occurrences"] = occurrences_json(&items)?;
    }
    write_line(out, &to_json(&doc))
}

/// Runs a parsed command. `Ok(false)` means a verification check failed.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<bool> {
    match cli.command {
        Command::Count {
            strings,
            file,
            d,
            with_empty,
            profile,
            out: format,
        } => count_command(strings, file, d, with_empty, profile, format, out)?,
        Command::Expect {
            engine,
            model,
            n,
            exact,
            out: format,
        } => expect_command(engine, model, n, exact, format, out)?,
        Command::Simulate {
            model,
            spec,
            n,
            grid,
            sim,
            out: format,
        } => simulate_command(model, spec, n, grid, sim, format, out)?,
        Command::Verify { suite, max_n, out: format } => return verify_command(&suite, max_n, format, out),
        Command::TreeRow { d, n } => {
            let row = tree_row(d, n)?;
            let text: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
            write_line(out, &text.join(","))?;
        }
        Command::Superpattern {
            strings,
            d,
            n,
            model,
            alpha,
            probs,
            markov,
            sim,
            out: format,
        } => superpattern_command(strings, d, n, model, alpha, probs, markov, sim, format, out)?,
        Command::Solve {
            balance,
            threshold,
            occurrences,
        } => solve_command(balance, threshold, occurrences, out)?,
    }
    Ok(true)
}

/// Parses `args`, runs the command and returns `(exit code, stdout, stderr)`.
pub fn run_to_strings<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (code, String::new(), e.to_string());
        }
    };
    let mut buf = Vec::new();
    let result = run(cli, &mut buf);
    let stdout = String::from_utf8(buf).expect("utf-8 output");
    match result {
        Ok(true) => (0, stdout, String::new()),
        Ok(false) => (1, stdout, "verification failed\n".into()),
        Err(e) => (e.exit_code(), stdout, format!("error: {e}\n")),
    }
}
