//! `cf`: command-line runner for continued-fraction jobs.
//!
//! Exit status: 0 on success or pass, 1 on a failed verification or refused
//! certificate, 2 on input errors.

mod output;
mod run;
mod spec;

use std::io::{self, Read, Write};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use run::Status;
use spec::parse_spec;

#[derive(Parser)]
#[command(name = "cf", version, about = "Continued-fraction evaluation, transforms, certificates and identity checks")]
struct Cli {
    /// Job specification as JSON, read from a file or `-` for standard input.
    #[arg(long, global = true)]
    spec: Option<String>,
    /// Number of approximants to evaluate.
    #[arg(long, global = true)]
    depth: Option<usize>,
    /// Significant decimal digits in complex-float mode.
    #[arg(long, global = true)]
    digits: Option<u32>,
    /// Tolerance for verdicts, as scalar text.
    #[arg(long, global = true)]
    tol: Option<String>,
    /// Output format: json, csv or table.
    #[arg(long, global = true)]
    format: Option<String>,
    /// Arithmetic: auto, rational or complex.
    #[arg(long, global = true)]
    mode: Option<String>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Suppress the header line that echoes the resolved job.
    #[arg(long, global = true)]
    no_header: bool,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Args)]
struct SourceArgs {
    /// Source descriptor as JSON text.
    #[arg(long)]
    source: Option<String>,
    /// Named family or identity id.
    #[arg(long)]
    family: Option<String>,
    /// Family parameter `key=value`, repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    /// Replacement for the family's b0.
    #[arg(long)]
    b0: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate approximants and estimate the limit.
    Eval(SourceArgs),
    /// Even or odd part of a fraction.
    Contract {
        #[arg(long, default_value = "even")]
        kind: String,
        /// Number of terms to print.
        #[arg(long)]
        terms: Option<usize>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Extension whose even (or, for cor7, odd) part is the given fraction.
    Extend {
        #[arg(long)]
        scheme: String,
        /// The a-sequence for cor3, comma separated.
        #[arg(long, value_delimiter = ',')]
        a: Vec<String>,
        #[arg(long)]
        terms: Option<usize>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Check a convergence criterion.
    Certify {
        #[arg(long)]
        criterion: String,
        /// Lange witness alpha.
        #[arg(long)]
        alpha: Option<String>,
        /// Lange witness rho.
        #[arg(long)]
        rho: Option<String>,
        /// Derive the Lange witness from this `a`.
        #[arg(long)]
        lange_a: Option<String>,
        #[command(flatten)]
        source: SourceArgs,
    },
    /// Verify a catalog identity.
    Verify {
        #[arg(long)]
        id: String,
        #[arg(long = "param")]
        params: Vec<String>,
        /// Evaluate even when the hypotheses fail.
        #[arg(long = "override")]
        override_predicate: bool,
    },
    /// Verify a catalog identity over a parameter grid.
    Sweep {
        #[arg(long)]
        id: String,
        #[arg(long = "param")]
        params: Vec<String>,
        /// Grid axis `key=v1,v2,...`, repeatable; the last axis varies fastest.
        #[arg(long)]
        grid: Vec<String>,
        #[arg(long = "override")]
        override_predicate: bool,
    },
}

fn key_value(text: &str, flag: &str) -> Result<(String, String), String> {
    match text.split_once('=') {
        Some((k, v)) if !k.trim().is_empty() => Ok((k.trim().to_string(), v.trim().to_string())),
        _ => Err(format!("--{flag} expects key=value, got {text:?}")),
    }
}

fn params_object(pairs: &[String], flag: &str) -> Result<Map<String, Value>, String> {
    pairs.iter().map(|p| key_value(p, flag).map(|(k, v)| (k, Value::String(v)))).collect()
}

fn source_fields(args: &SourceArgs, job: &mut Map<String, Value>) -> Result<(), String> {
    match (&args.source, &args.family) {
        (Some(_), Some(_)) => Err("give either --source or --family, not both".into()),
        (Some(text), None) => {
            if !args.params.is_empty() || args.b0.is_some() {
                return Err("--param and --b0 apply to --family".into());
            }
            let v: Value = serde_json::from_str(text).map_err(|e| format!("--source: {e}"))?;
            job.insert("source".into(), v);
            Ok(())
        }
        (None, Some(name)) => {
            let mut d = Map::new();
            if let Some(b0) = &args.b0 {
                d.insert("b0".into(), json!(b0));
            }
            d.insert("family".into(), json!(name));
            d.insert("params".into(), Value::Object(params_object(&args.params, "param")?));
            job.insert("source".into(), Value::Object(d));
            Ok(())
        }
        (None, None) => Ok(()),
    }
}

/// The job described by a subcommand and its flags, in the JSON schema.
fn job_from_command(cmd: &Command) -> Result<Map<String, Value>, String> {
    let mut job = Map::new();
    let mut set = |k: &str, v: Value| {
        job.insert(k.to_string(), v);
    };
    match cmd {
        Command::Eval(source) => {
            set("action", json!("eval"));
            source_fields(source, &mut job)?;
        }
        Command::Contract { kind, terms, source } => {
            set("action", json!("contract"));
            set("kind", json!(kind));
            if let Some(t) = terms {
                set("terms", json!(t));
            }
            source_fields(source, &mut job)?;
        }
        Command::Extend { scheme, a, terms, source } => {
            set("action", json!("extend"));
            set("scheme", json!(scheme));
            if !a.is_empty() {
                set("a", json!(a));
            }
            if let Some(t) = terms {
                set("terms", json!(t));
            }
            source_fields(source, &mut job)?;
        }
        Command::Certify { criterion, alpha, rho, lange_a, source } => {
            set("action", json!("certify"));
            set("criterion", json!(criterion));
            for (k, v) in [("alpha", alpha), ("rho", rho), ("lange_a", lange_a)] {
                if let Some(v) = v {
                    set(k, json!(v));
                }
            }
            source_fields(source, &mut job)?;
        }
        Command::Verify { id, params, override_predicate } => {
            set("action", json!("verify"));
            set("id", json!(id));
            set("params", Value::Object(params_object(params, "param")?));
            set("override", json!(override_predicate));
        }
        Command::Sweep { id, params, grid, override_predicate } => {
            set("action", json!("sweep"));
            set("id", json!(id));
            set("params", Value::Object(params_object(params, "param")?));
            let mut axes = Map::new();
            for g in grid {
                let (k, values) = key_value(g, "grid")?;
                axes.insert(k, json!(values.split(',').map(str::trim).collect::<Vec<_>>()));
            }
            set("grid", Value::Object(axes));
            set("override", json!(override_predicate));
        }
    }
    Ok(job)
}

fn read_spec(path: &str) -> Result<Value, String> {
    let text = if path == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s).map_err(|e| format!("reading standard input: {e}"))?;
        s
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("reading {path}: {e}"))?
    };
    serde_json::from_str(&text).map_err(|e| format!("{path}: malformed JSON: {e}"))
}

/// Merges the subcommand or `--spec` job with the global flags, which take precedence.
fn resolve_job(cli: &Cli) -> Result<Value, String> {
    let mut job = match (&cli.spec, &cli.command) {
        (Some(_), Some(_)) => return Err("give either --spec or a subcommand, not both".into()),
        (Some(path), None) => match read_spec(path)? {
            Value::Object(m) => m,
            other => return Err(format!("{path}: job must be a JSON object, not {other}")),
        },
        (None, Some(cmd)) => job_from_command(cmd)?,
        (None, None) => return Err("nothing to do: give a subcommand or --spec (see --help)".into()),
    };
    if let Some(d) = cli.depth {
        job.insert("depth".into(), json!(d));
    }
    if let Some(d) = cli.digits {
        job.insert("digits".into(), json!(d));
        job.remove("precision_digits");
    }
    for (k, v) in [("tol", &cli.tol), ("format", &cli.format), ("mode", &cli.mode)] {
        if let Some(v) = v {
            job.insert(k.into(), json!(v));
        }
    }
    Ok(Value::Object(job))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let input_error = |msg: String| {
        eprintln!("error: {msg}");
        ExitCode::from(Status::InputError as u8)
    };
    let value = match resolve_job(&cli) {
        Ok(v) => v,
        Err(e) => return input_error(e),
    };
    let job = match parse_spec(&value) {
        Ok(j) => j,
        Err(e) => return input_error(e.to_string()),
    };
    let outcome = match run::run(&job, cli.jobs) {
        Ok(o) => o,
        Err(e) => return input_error(e.to_string()),
    };
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let written = (|| {
        if !cli.no_header {
            output::write_header(&mut out, job.format, &job.to_json())?;
        }
        output::write_records(&mut out, job.format, &outcome.records)?;
        out.flush()
    })();
    if let Err(e) = written {
        eprintln!("error: writing output: {e}");
        return ExitCode::from(Status::InputError as u8);
    }
    for r in &outcome.records {
        if let Some(e) = r.get("error").and_then(Value::as_str) {
            eprintln!("error: {}: {e}", r.get("params").map(Value::to_string).unwrap_or_default());
        }
    }
    ExitCode::from(outcome.status as u8)
}
