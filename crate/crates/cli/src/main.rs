//! Command-line surface: pmf tables, PGF evaluation, verification suites,
//! and sampling. Exit codes are a stable contract: 0 success or pass,
//! 1 verification failure (including an invalid pmf), 2 usage or
//! parameter error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lattice_laws::checks::{run_all, run_suite, CheckReport};
use lattice_laws::laws::{LawError, LawSpec, Pmf};
use lattice_laws::sampling::{empirical_pmf, tv_distance, LawSampler, RngState};

const DEFAULT_ORDER: usize = 256;
const ORDER_ENV: &str = "LATTICE_LAWS_ORDER";

#[derive(Parser)]
#[command(name = "lattice-laws", version, about = "Lattice laws built from Laplace transforms: pmfs, checks, samples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write output to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Truncation order; overrides the LATTICE_LAWS_ORDER environment
    /// variable and any n= token in the law spec.
    #[arg(long, global = true)]
    order: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the pmf table of a law: `pmf <family> key=value ...`.
    ///
    /// `n=` sets the truncation order, except for the binomial families
    /// where n is the law's own count parameter.
    Pmf {
        #[arg(required = true)]
        spec: Vec<String>,
    },
    /// Evaluate the PGF on a grid: `eval <family> key=value ... [s=a,b,c]`.
    Eval {
        #[arg(required = true)]
        spec: Vec<String>,
    },
    /// Draw samples: `sample <family> key=value ... [count=N] [seed=S]`.
    Sample {
        #[arg(required = true)]
        spec: Vec<String>,
    },
    /// Run one verification suite, or `all`: `verify <suite> key=value ...`.
    Verify {
        suite: String,
        params: Vec<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Usage-level failure: message to stderr, exit 2.
struct UsageError(String);

impl<E: std::error::Error> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> UsageError {
    UsageError(msg.into())
}

/// What the command produced: the rendered output plus the exit code it
/// has earned (verification failures keep their report but exit 1).
struct Rendered {
    text: String,
    failed: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let rendered = match &cli.command {
        Command::Pmf { spec } => cmd_pmf(spec, &cli),
        Command::Eval { spec } => cmd_eval(spec, &cli),
        Command::Sample { spec } => cmd_sample(spec, &cli),
        Command::Verify { suite, params } => cmd_verify(suite, params, &cli),
    };
    let rendered = match rendered {
        Ok(r) => r,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &rendered.text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{}", rendered.text),
    }
    if rendered.failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

/// Tokens after the family name, split into the law's own parameters and
/// the command's reserved keys (kept as raw strings).
struct SpecTokens {
    family: String,
    params: BTreeMap<String, f64>,
    reserved: BTreeMap<String, String>,
}

fn parse_spec(tokens: &[String], reserved_keys: &[&str]) -> Result<SpecTokens, UsageError> {
    let (family, rest) = tokens
        .split_first()
        .ok_or_else(|| usage("missing law family"))?;
    // For the binomial families n is a law parameter, not the truncation
    // order alias.
    let n_is_law_param = matches!(family.as_str(), "binomial" | "alpha-binomial");
    let mut params = BTreeMap::new();
    let mut reserved = BTreeMap::new();
    for token in rest {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, got '{token}'")))?;
        let taken = if reserved_keys.contains(&key) && !(key == "n" && n_is_law_param) {
            reserved.insert(key.to_string(), value.to_string()).is_some()
        } else {
            let v: f64 = value
                .parse()
                .map_err(|_| usage(format!("value for '{key}' is not a number: '{value}'")))?;
            params.insert(key.to_string(), v).is_some()
        };
        if taken {
            return Err(usage(format!("duplicate key '{key}'")));
        }
    }
    Ok(SpecTokens {
        family: family.clone(),
        params,
        reserved,
    })
}

fn parse_usize(reserved: &BTreeMap<String, String>, key: &str) -> Result<Option<usize>, UsageError> {
    match reserved.get(key) {
        None => Ok(None),
        Some(raw) => raw
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("'{key}' must be a non-negative integer, got '{raw}'"))),
    }
}

/// Flag beats spec token beats environment beats default.
fn resolve_order(cli: &Cli, spec_n: Option<usize>) -> Result<usize, UsageError> {
    if let Some(n) = cli.order {
        return Ok(n);
    }
    if let Some(n) = spec_n {
        return Ok(n);
    }
    match std::env::var(ORDER_ENV) {
        Ok(raw) => raw
            .parse()
            .map_err(|_| usage(format!("{ORDER_ENV} must be an integer, got '{raw}'"))),
        Err(_) => Ok(DEFAULT_ORDER),
    }
}

fn build_law(spec: &SpecTokens) -> Result<LawSpec, UsageError> {
    LawSpec::from_params(&spec.family, &spec.params).map_err(|e| usage(e.to_string()))
}

fn cmd_pmf(tokens: &[String], cli: &Cli) -> Result<Rendered, UsageError> {
    let spec = parse_spec(tokens, &["n"])?;
    let order = resolve_order(cli, parse_usize(&spec.reserved, "n")?)?;
    let law = build_law(&spec)?;
    match law.pmf(order) {
        Ok(pmf) => Ok(Rendered {
            text: render_pmf(&law, order, &pmf, cli.format),
            failed: false,
        }),
        Err(LawError::NotAValidPmf {
            violations,
            worst_index,
            worst_value,
            tail_mass,
        }) => Ok(Rendered {
            text: render_invalid_pmf(
                &law,
                order,
                &violations,
                worst_index,
                worst_value,
                tail_mass,
                cli.format,
            ),
            failed: true,
        }),
        Err(e) => Err(usage(e.to_string())),
    }
}

fn render_pmf(law: &LawSpec, order: usize, pmf: &Pmf, format: Format) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# {law} order={order}");
            let _ = writeln!(out, "k,p_k");
            for (k, c) in pmf.series.coeffs().iter().enumerate() {
                let _ = writeln!(out, "{k},{c}");
            }
            let _ = writeln!(out, "# tail_mass,{}", pmf.tail_mass);
            out
        }
        Format::Json => {
            let value = serde_json::json!({
                "law": law.to_string(),
                "order": order,
                "p": pmf.series.coeffs(),
                "tail_mass": pmf.tail_mass,
            });
            format!("{value}\n")
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn render_invalid_pmf(
    law: &LawSpec,
    order: usize,
    violations: &[lattice_laws::laws::PmfViolation],
    worst_index: usize,
    worst_value: f64,
    tail_mass: f64,
    format: Format,
) -> String {
    match format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# {law} order={order}: not a valid pmf");
            let _ = writeln!(out, "k,coefficient");
            for v in violations {
                let _ = writeln!(out, "{},{}", v.index, v.value);
            }
            let _ = writeln!(out, "# worst,{worst_index},{worst_value}");
            let _ = writeln!(out, "# tail_mass,{tail_mass}");
            out
        }
        Format::Json => {
            let value = serde_json::json!({
                "law": law.to_string(),
                "order": order,
                "error": "not_a_valid_pmf",
                "violations": violations
                    .iter()
                    .map(|v| serde_json::json!({"index": v.index, "value": v.value}))
                    .collect::<Vec<_>>(),
                "worst_index": worst_index,
                "worst_value": worst_value,
                "tail_mass": tail_mass,
            });
            format!("{value}\n")
        }
    }
}

fn cmd_eval(tokens: &[String], cli: &Cli) -> Result<Rendered, UsageError> {
    let spec = parse_spec(tokens, &["s"])?;
    let law = build_law(&spec)?;
    let grid: Vec<f64> = match spec.reserved.get("s") {
        None => (0..=20).map(|i| i as f64 / 20.0).collect(),
        Some(raw) => raw
            .split(',')
            .map(|t| {
                t.parse()
                    .map_err(|_| usage(format!("grid entry is not a number: '{t}'")))
            })
            .collect::<Result<_, _>>()?,
    };
    let mut rows = Vec::with_capacity(grid.len());
    for &s in &grid {
        let value = law.pgf_eval(s).map_err(|e| usage(e.to_string()))?;
        rows.push((s, value));
    }
    let text = match cli.format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# {law}");
            let _ = writeln!(out, "s,P(s)");
            for (s, value) in &rows {
                let _ = writeln!(out, "{s},{value}");
            }
            out
        }
        Format::Json => {
            let value = serde_json::json!({
                "law": law.to_string(),
                "s": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
                "value": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            });
            format!("{value}\n")
        }
    };
    Ok(Rendered { text, failed: false })
}

fn cmd_sample(tokens: &[String], cli: &Cli) -> Result<Rendered, UsageError> {
    let spec = parse_spec(tokens, &["count", "seed", "n"])?;
    let order = resolve_order(cli, parse_usize(&spec.reserved, "n")?)?;
    let count = parse_usize(&spec.reserved, "count")?.unwrap_or(1000);
    let seed = match spec.reserved.get("seed") {
        None => 0,
        Some(raw) => raw
            .parse::<u64>()
            .map_err(|_| usage(format!("'seed' must be a non-negative integer, got '{raw}'")))?,
    };
    let law = build_law(&spec)?;
    let sampler = LawSampler::new(&law, order).map_err(|e| usage(e.to_string()))?;
    let mut rng = RngState::new(seed);
    let samples: Vec<u64> = (0..count).map(|_| sampler.sample(&mut rng)).collect();
    // Empirical-vs-series distance, reported whenever the pmf is available
    // at this order.
    let tv = law
        .pmf(order)
        .ok()
        .map(|pmf| tv_distance(&empirical_pmf(&samples, order), &pmf.series));
    let text = match cli.format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "# {law} count={count} seed={seed} order={order}");
            let _ = writeln!(out, "x");
            for x in &samples {
                let _ = writeln!(out, "{x}");
            }
            if let Some(tv) = tv {
                let _ = writeln!(out, "# tv_vs_pmf,{tv}");
            }
            out
        }
        Format::Json => {
            let value = serde_json::json!({
                "law": law.to_string(),
                "count": count,
                "seed": seed,
                "order": order,
                "samples": samples,
                "tv_vs_pmf": tv,
            });
            format!("{value}\n")
        }
    };
    Ok(Rendered { text, failed: false })
}

fn cmd_verify(suite: &str, tokens: &[String], cli: &Cli) -> Result<Rendered, UsageError> {
    let mut params = BTreeMap::new();
    for token in tokens {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| usage(format!("expected key=value, got '{token}'")))?;
        let v: f64 = value
            .parse()
            .map_err(|_| usage(format!("value for '{key}' is not a number: '{value}'")))?;
        if params.insert(key.to_string(), v).is_some() {
            return Err(usage(format!("duplicate key '{key}'")));
        }
    }
    let reports = if suite == "all" {
        if !params.is_empty() {
            return Err(usage("'verify all' runs every suite with its defaults and takes no parameters"));
        }
        run_all()
    } else {
        vec![run_suite(suite, &params).map_err(|e| usage(e.to_string()))?]
    };
    let failed = reports.iter().any(|r| !r.passed());
    let text = match cli.format {
        Format::Csv => {
            let mut out = String::new();
            let _ = writeln!(out, "suite,verdict,residual,tolerance,worst_point");
            for r in &reports {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.suite, r.verdict, r.residual, r.tolerance, r.worst_point
                );
            }
            out
        }
        Format::Json => {
            // One object per report, one per line, in fixed suite order.
            let mut out = String::new();
            for r in &reports {
                let _ = writeln!(out, "{}", report_json(r));
            }
            out
        }
    };
    Ok(Rendered { text, failed })
}

fn report_json(report: &CheckReport) -> String {
    serde_json::to_string(report).expect("reports are always serializable")
}
