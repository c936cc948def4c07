//! `kframe`: check, dualize, solve and benchmark K-frames from JSON files.
//!
//! Exit codes: 0 success, 1 input error, 2 the requested property fails,
//! 3 an iterative solve did not converge (the trace is still written).

mod commands;
mod io;

use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use kframe_core::Tolerances;
use serde::Serialize;
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(
    name = "kframe",
    version,
    about = "K-frame and controlled K-frame toolkit"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Relative tolerance for operator and vector equality.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_rel: f64,
    /// Slack for operator-order (positive semidefinite) tests.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol_psd: f64,
    /// Relative singular-value cut-off for numerical rank [default: 1e-12 * d].
    #[arg(long, global = true)]
    pub rank_rel: Option<f64>,
    /// Seed for sampling and instance generation.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Print the report as JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Omit the timestamp so reports are byte-reproducible.
    #[arg(long, global = true)]
    pub deterministic: bool,
}

impl GlobalArgs {
    fn tolerances(&self) -> Tolerances {
        Tolerances {
            rel_eq: self.tol_rel,
            psd_slack: self.tol_psd,
            rank_rel: self.rank_rel,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Frame bounds, K-frame and controlled K-frame verdicts.
    Check(commands::CheckArgs),
    /// Build F = {K S_G^+ g_n} and its interchangeable dual H from G and K.
    Dual(commands::DualArgs),
    /// Solve S f = g, optionally preconditioned by a controller C.
    Solve(commands::SolveArgs),
    /// Plain vs controlled Richardson over a grid of generated instances (CSV).
    Bench(commands::BenchArgs),
    /// Rebuild and verify the C^3 example with K e1 = K e2 = e1, K e3 = e2.
    PaperExample,
    /// Write a generated instance (frame, K, C, right-hand side) as JSON files.
    Gen(commands::GenArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Check(_) => "check",
            Command::Dual(_) => "dual",
            Command::Solve(_) => "solve",
            Command::Bench(_) => "bench",
            Command::PaperExample => "paper-example",
            Command::Gen(_) => "gen",
        }
    }
}

/// Error that ends a command early.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
    pub details: Option<Value>,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
            details: None,
        }
    }

    pub fn property(message: impl Into<String>, details: Option<Value>) -> Self {
        Self {
            code: 2,
            message: message.into(),
            details,
        }
    }
}

/// What a finished command hands back for printing.
pub struct Outcome {
    pub code: u8,
    pub lines: Vec<String>,
    pub report: Value,
    /// Raw text printed instead of `lines` (CSV on stdout).
    pub raw: Option<String>,
}

/// Files read and written, collected while a command runs.
#[derive(Default)]
pub struct Ctx {
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
}

impl Ctx {
    pub fn input(&mut self, p: &std::path::Path) {
        self.inputs.push(p.display().to_string());
    }

    pub fn output(&mut self, p: &std::path::Path) {
        self.outputs.push(p.display().to_string());
    }
}

#[derive(Serialize)]
struct RunManifest<'a> {
    command: &'a str,
    argv: Vec<String>,
    inputs: &'a [String],
    outputs: &'a [String],
    seed: u64,
    tolerances: Tolerances,
    exit_code: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    timestamp: Option<u64>,
}

fn main() -> ExitCode {
    // clap would exit with 2 on bad usage, which is reserved for failed properties
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let g = &cli.global;
    let tol = g.tolerances();
    let mut ctx = Ctx::default();
    let result = match tol.validate() {
        Err(e) => Err(Failure::input(e.to_string())),
        Ok(()) => match &cli.command {
            Command::Check(a) => commands::check(a, g, &tol, &mut ctx),
            Command::Dual(a) => commands::dual(a, g, &tol, &mut ctx),
            Command::Solve(a) => commands::solve(a, g, &tol, &mut ctx),
            Command::Bench(a) => commands::bench(a, g, &tol, &mut ctx),
            Command::PaperExample => commands::paper_example(&tol),
            Command::Gen(a) => commands::gen(a, g, &tol, &mut ctx),
        },
    };
    let (code, report, lines, raw) = match result {
        Ok(o) => (o.code, o.report, o.lines, o.raw),
        Err(f) => {
            eprintln!("error: {}", f.message);
            let mut report = serde_json::json!({ "error": f.message });
            if let Some(d) = f.details {
                report["details"] = d;
            }
            (f.code, report, Vec::new(), None)
        }
    };
    let manifest = RunManifest {
        command: cli.command.name(),
        argv: std::env::args().skip(1).collect(),
        inputs: &ctx.inputs,
        outputs: &ctx.outputs,
        seed: g.seed,
        tolerances: tol,
        exit_code: code,
        timestamp: (!g.deterministic).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        }),
    };
    if g.json {
        let doc = serde_json::json!({ "manifest": manifest, "report": report });
        println!(
            "{}",
            serde_json::to_string_pretty(&doc).expect("report serializes")
        );
    } else if let Some(raw) = raw {
        print!("{raw}");
    } else {
        for l in lines {
            println!("{l}");
        }
    }
    ExitCode::from(code)
}
