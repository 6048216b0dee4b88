//! Command-line front end: check formulas against programs, estimate policy
//! values by simulation, tabulate the Bernoulli deviation probabilities, and
//! dump reachable MDPs.

mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use pdlcheck_core::{
    check_pbox_with_bounds, embed_reward, eval_expr, explore, min_expectation, monte_carlo,
    parse_formula, parse_formula_with_loader, parse_program, parse_valuation,
    policy_value_interval, satisfies, Error as CheckError, Expr, Formula, ParseError, Policy,
    State, Valuation, Verdict, DEFAULT_BUDGET,
};
use thiserror::Error;

use report::{decimal, CheckReport, SimulateReport};

/// Exact model checker for probabilistic guarded-command programs.
#[derive(Parser)]
#[command(name = "pdlcheck", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a formula file against a program file.
    ///
    /// `@name` references in the formula resolve to the program file when
    /// `name` matches its stem, otherwise to `name` or `name.pgcl` next to
    /// the formula file. Exit code 0 means satisfied, 1 violated, 2 unknown.
    Check {
        /// Program file
        program: PathBuf,
        /// Formula file
        formula: PathBuf,
        /// Initial valuation, e.g. "switch=true, n=20, mu=1/2"
        #[arg(long, default_value = "")]
        val: String,
        /// Step budget per expectation computation
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Estimate the success probability of a state formula under one policy
    /// and compare the estimate against the exact two-sided interval.
    Simulate {
        /// Program file
        program: PathBuf,
        /// Formula file, evaluated at the program's final states
        formula: PathBuf,
        /// Initial valuation
        #[arg(long, default_value = "")]
        val: String,
        /// How demonic choices are resolved
        #[arg(long, value_enum, default_value_t = PolicyFlag::Random)]
        policy: PolicyFlag,
        /// Number of sampled runs
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Seed for the sampling streams
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Step budget for the exact runs and step cap per sampled run
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Output format
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print the exact probability that the Bernoulli trial average deviates
    /// from its mean by more than each threshold, as CSV rows per n.
    ///
    /// The defaults reproduce the convergence table for mu = 1/2 with
    /// thresholds 0.1, 0.2, 0.4 up to n = 20.
    Bernoulli {
        /// Success probability of a single trial, e.g. "1/2" or "0.5"
        #[arg(long, value_parser = parse_rational_flag, default_value = "1/2")]
        mu: BigRational,
        /// Deviation threshold; repeat the flag for several thresholds
        #[arg(long = "delta", value_parser = parse_rational_flag, default_values = ["1/10", "1/5", "2/5"])]
        deltas: Vec<BigRational>,
        /// Largest trial count to tabulate
        #[arg(long, default_value_t = 20)]
        n_max: u64,
        /// Step budget per expectation computation
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Print the reachable Markov decision process as a text edge list.
    ///
    /// States are numbered in BFS discovery order and listed as `#` comments;
    /// each edge line is `state_id action probability state_id`.
    DumpMdp {
        /// Program file
        program: PathBuf,
        /// Initial valuation
        #[arg(long, default_value = "")]
        val: String,
        /// Cap on the number of explored states
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PolicyFlag {
    /// Always take the left branch of a demonic choice
    Left,
    /// Always take the right branch
    Right,
    /// Flip a fair coin at every demonic choice
    Random,
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{origin}: {err}")]
    Parse { origin: String, err: ParseError },
    #[error("{0}")]
    Check(#[from] CheckError),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Parse { .. } => 5,
            CliError::Check(_) => 6,
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = err.print();
            process::exit(code);
        }
    };
    match run(cli.command) {
        Ok(code) => process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            process::exit(err.exit_code());
        }
    }
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Check {
            program,
            formula,
            val,
            budget,
            format,
        } => cmd_check(&program, &formula, &val, budget, format),
        Command::Simulate {
            program,
            formula,
            val,
            policy,
            trials,
            seed,
            budget,
            format,
        } => cmd_simulate(&program, &formula, &val, policy, trials, seed, budget, format),
        Command::Bernoulli {
            mu,
            deltas,
            n_max,
            budget,
        } => cmd_bernoulli(&mu, &deltas, n_max, budget),
        Command::DumpMdp {
            program,
            val,
            budget,
        } => cmd_dump_mdp(&program, &val, budget),
    }
}

fn cmd_check(
    program_path: &Path,
    formula_path: &Path,
    val: &str,
    budget: u64,
    format: Format,
) -> Result<i32, CliError> {
    let program_src = read(program_path)?;
    parse_in(program_path, &program_src, parse_program)?;
    let formula = load_formula(formula_path, program_path, &program_src)?;
    let env = parse_flag_valuation(val)?;

    let started = Instant::now();
    let (verdict, bound_evaluated, bounds) = match &formula {
        Formula::PBox {
            program,
            bound,
            body,
        } => {
            let p = evaluate_bound(&env, bound)?;
            let (verdict, bounds) = check_pbox_with_bounds(&env, program, &p, body, budget)?;
            (verdict, Some(p), Some(bounds))
        }
        _ => (satisfies(&env, &formula, budget)?, None, None),
    };
    let report = CheckReport {
        verdict,
        bound_evaluated,
        bounds,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };

    match format {
        Format::Text => print!("{}", report.text()),
        Format::Json => {
            if let Verdict::Unknown { cause, .. } = &report.verdict {
                eprintln!("note: {cause}");
            }
            print!("{}", report.json());
        }
    }
    Ok(match report.verdict {
        Verdict::Satisfied => 0,
        Verdict::Violated => 1,
        Verdict::Unknown { .. } => 2,
    })
}

/// Evaluate a box's bound expression exactly as the checker itself would.
fn evaluate_bound(env: &Valuation, bound: &Expr) -> Result<BigRational, CliError> {
    let value = eval_expr(env, bound).map_err(CliError::Check)?;
    let p = value.as_rational().ok_or_else(|| {
        CliError::Check(CheckError::TypeMismatch(format!(
            "probability bound `{bound}` is not numeric"
        )))
    })?;
    if p.is_negative() || p > BigRational::one() {
        return Err(CliError::Check(CheckError::BoundOutOfRange {
            value: p.to_string(),
        }));
    }
    Ok(p)
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    program_path: &Path,
    formula_path: &Path,
    val: &str,
    policy: PolicyFlag,
    trials: u64,
    seed: u64,
    budget: u64,
    format: Format,
) -> Result<i32, CliError> {
    let program_src = read(program_path)?;
    let program = parse_in(program_path, &program_src, parse_program)?;
    let formula = load_formula(formula_path, program_path, &program_src)?;
    let env = parse_flag_valuation(val)?;

    let started = Instant::now();
    let start = State::new(env, program);
    let reward = embed_reward(formula.clone(), budget);
    let lo_phi = min_expectation(&start, &reward, budget)?;
    let negated = embed_reward(Formula::not(formula), budget);
    let lo_not_phi = min_expectation(&start, &negated, budget)?;
    let (interval_lo, interval_hi) = policy_value_interval(&lo_phi.lo, &lo_not_phi.lo)?;

    let policy = match policy {
        PolicyFlag::Left => Policy::AlwaysLeft,
        PolicyFlag::Right => Policy::AlwaysRight,
        // A constant offset keys the policy's streams apart from the
        // transition-sampling streams derived from the same user seed.
        PolicyFlag::Random => Policy::UniformRandom {
            seed: seed ^ 0x9e3779b97f4a7c15,
        },
    };
    let mc = monte_carlo(&start, &reward, &policy, trials, seed, budget)?;

    let slack = if mc.stderr > 0.0 {
        5.0 * mc.stderr
    } else {
        1e-9
    };
    let lo_f = interval_lo.to_f64().expect("interval bound fits in f64");
    let hi_f = interval_hi.to_f64().expect("interval bound fits in f64");
    let report = SimulateReport {
        estimate: mc.estimate,
        stderr: mc.stderr,
        trials: mc.trials,
        interval_lo,
        interval_hi,
        within_interval: mc.estimate >= lo_f - slack && mc.estimate <= hi_f + slack,
        wall_time_ms: started.elapsed().as_millis() as u64,
    };
    match format {
        Format::Text => print!("{}", report.text()),
        Format::Json => print!("{}", report.json()),
    }
    Ok(0)
}

fn cmd_bernoulli(
    mu: &BigRational,
    deltas: &[BigRational],
    n_max: u64,
    budget: u64,
) -> Result<i32, CliError> {
    if mu.is_negative() || *mu > BigRational::one() {
        return Err(CliError::Usage(format!(
            "--mu must lie in [0, 1], got {mu}"
        )));
    }
    if n_max < 1 {
        return Err(CliError::Usage("--n-max must be at least 1".to_string()));
    }
    for delta in deltas {
        if delta.is_negative() {
            return Err(CliError::Usage(format!(
                "--delta must be nonnegative, got {delta}"
            )));
        }
    }

    let mut out = String::from("n,delta,probability_exact,probability_decimal\n");
    for n in 1..=n_max {
        let source = format!(
            "i := 0; c := 0; \
             while i < {n} {{ {{ s := 0 }} [{mu}] {{ s := 1 }}; c := c + s; i := i + 1 }}"
        );
        let program = parse_in(Path::new("bernoulli"), &source, parse_program)?;
        let start = State::new(Valuation::new(), program);
        for delta in deltas {
            let deviates = format!("c / {n} - {mu} > {delta} || {mu} - c / {n} > {delta}");
            let formula = parse_in(Path::new("deviation"), &deviates, parse_formula)?;
            let bounds = min_expectation(&start, &embed_reward(formula, budget), budget)?;
            if !bounds.exact {
                return Err(CliError::Check(CheckError::DomainViolation(format!(
                    "deviation probability for n={n}, delta={delta} did not resolve exactly \
                     within budget {budget}; raise --budget"
                ))));
            }
            out.push_str(&format!(
                "{n},{},{},{}\n",
                decimal(delta),
                bounds.lo,
                decimal(&bounds.lo)
            ));
        }
    }
    print!("{out}");
    Ok(0)
}

fn cmd_dump_mdp(program_path: &Path, val: &str, budget: u64) -> Result<i32, CliError> {
    let program_src = read(program_path)?;
    let program = parse_in(program_path, &program_src, parse_program)?;
    let env = parse_flag_valuation(val)?;

    let graph = explore(&State::new(env, program), budget)?;
    let mut out = String::new();
    for (id, state) in graph.states.iter().enumerate() {
        out.push_str(&format!("# {id}: {state}\n"));
    }
    for (from, action, probability, to) in &graph.edges {
        out.push_str(&format!("{from} {action} {probability} {to}\n"));
    }
    if graph.truncated {
        out.push_str(&format!("# truncated: state cap {budget} reached\n"));
    }
    print!("{out}");
    Ok(0)
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|err| CliError::Io {
        path: path.to_path_buf(),
        message: err.to_string(),
    })
}

fn parse_in<T>(
    origin: &Path,
    source: &str,
    parse: impl FnOnce(&str) -> Result<T, ParseError>,
) -> Result<T, CliError> {
    parse(source).map_err(|err| CliError::Parse {
        origin: origin.display().to_string(),
        err,
    })
}

fn parse_flag_valuation(val: &str) -> Result<Valuation, CliError> {
    parse_valuation(val).map_err(|err| CliError::Parse {
        origin: "--val".to_string(),
        err,
    })
}

/// Parse a formula file, resolving `@name` program references: the program
/// file passed on the command line when `name` matches its stem, otherwise
/// `name` or `name.pgcl` relative to the formula file's directory.
fn load_formula(
    formula_path: &Path,
    program_path: &Path,
    program_src: &str,
) -> Result<Formula, CliError> {
    let text = read(formula_path)?;
    let formula_dir = formula_path
        .parent()
        .filter(|dir| !dir.as_os_str().is_empty())
        .unwrap_or(Path::new("."))
        .to_path_buf();
    let program_stem = program_path
        .file_stem()
        .and_then(|stem| stem.to_str())
        .unwrap_or("")
        .to_string();
    let program_src = program_src.to_string();

    let mut loader = move |name: &str| -> Result<String, String> {
        if name == program_stem {
            return Ok(program_src.clone());
        }
        let mut attempts = Vec::new();
        for candidate in [formula_dir.join(name), formula_dir.join(format!("{name}.pgcl"))] {
            match fs::read_to_string(&candidate) {
                Ok(source) => return Ok(source),
                Err(err) => attempts.push(format!("{}: {err}", candidate.display())),
            }
        }
        Err(format!(
            "cannot resolve program reference ({})",
            attempts.join("; ")
        ))
    };
    parse_in(formula_path, &text, |text| {
        parse_formula_with_loader(text, &mut loader)
    })
}

fn parse_rational_flag(text: &str) -> Result<BigRational, String> {
    let trimmed = text.trim();
    let (negative, digits) = match trimmed.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, trimmed),
    };
    let value = if let Some((numer, denom)) = digits.split_once('/') {
        let numer = parse_digits(numer)?;
        let denom = parse_digits(denom)?;
        if denom.is_zero() {
            return Err("denominator is zero".to_string());
        }
        BigRational::new(numer, denom)
    } else if let Some((whole, frac)) = digits.split_once('.') {
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let whole = if whole.is_empty() {
            BigInt::zero()
        } else {
            parse_digits(whole)?
        };
        BigRational::new(whole * &scale + parse_digits(frac)?, scale)
    } else {
        BigRational::from_integer(parse_digits(digits)?)
    };
    Ok(if negative { -value } else { value })
}

fn parse_digits(text: &str) -> Result<BigInt, String> {
    if text.is_empty() || !text.bytes().all(|b| b.is_ascii_digit()) {
        return Err(format!(
            "expected a rational like `1/2`, `0.5`, or `3` (got `{text}`)"
        ));
    }
    Ok(text.parse().expect("digit strings parse"))
}
