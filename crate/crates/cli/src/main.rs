mod continuation;
mod report;
mod suites;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use bispectral_core::ba::{construct, Artifact, Budget};
use bispectral_core::config::{Config, Params};
use bispectral_core::{Error, Rat};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use report::REPORT_SCHEMA_VERSION;
use suites::{ModeChoice, Options, Suite};

#[derive(Parser)]
#[command(name = "bispectral", version, about = "Construct and verify BC(l,1) Baker-Akhiezer functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the function for integer-type parameters and store it as an artifact.
    Construct(ConstructArgs),
    /// Run verification suites against a stored artifact.
    Verify(VerifyArgs),
    /// Check the series solution at complex parameters.
    Continue(continuation::ContinueArgs),
}

#[derive(Args)]
struct ConstructArgs {
    #[arg(long)]
    l: Option<usize>,
    /// Rational, e.g. `3` or `1/3`.
    #[arg(long)]
    k: Option<Rat>,
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    r: Option<u32>,
    /// JSON file `{"l": .., "k": "..", "p": .., "r": ..}`; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = ".bispectral-cache")]
    cache_dir: PathBuf,
    /// Also copy the artifact here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = Budget::default().max_m)]
    max_m: u32,
    #[arg(long, default_value_t = Budget::default().max_l)]
    max_l: usize,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    artifact: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "all")]
    suite: Vec<Suite>,
    #[arg(long, value_enum, default_value = "auto")]
    mode: ModeChoice,
    /// Largest height for the expansion cross-check (default 4, or 3 when l > 1).
    #[arg(long)]
    max_height: Option<u32>,
    /// Overrides the default tolerance of every numeric check.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its process exit code.
#[derive(Debug)]
struct Exit(u8, anyhow::Error);

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Exit {
        Exit(4, e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParams(_) | Error::Deserialization(_) => 2,
        Error::BudgetExceeded(_) | Error::HeightBudget { .. } => 3,
        _ => 4,
    }
}

fn core_err(e: Error) -> Exit {
    Exit(exit_code(&e), e.into())
}

#[derive(Serialize)]
struct ConstructRecord<'a> {
    schema_version: u32,
    params: &'a Params,
    big_m: u32,
    degrees: &'a [u32],
    content_hash: &'a str,
    cache_hit: bool,
    build_ms: u64,
    artifact: String,
}

fn load_params(args: &ConstructArgs) -> Result<Params, Exit> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str::<Params>(&text).map_err(|e| Exit(2, anyhow::anyhow!("invalid config file: {e}")))?)
        }
        None => None,
    };
    let missing = |name: &str| Exit(2, anyhow::anyhow!("--{name} is required without --config"));
    let params = Params {
        l: args.l.or(base.as_ref().map(|b| b.l)).ok_or_else(|| missing("l"))?,
        k: args.k.clone().or(base.as_ref().map(|b| b.k.clone())).ok_or_else(|| missing("k"))?,
        p: args.p.or(base.as_ref().map(|b| b.p)).unwrap_or(0),
        r: args.r.or(base.as_ref().map(|b| b.r)).unwrap_or(0),
    };
    params.validate().map_err(core_err)?;
    Ok(params)
}

fn cmd_construct(args: ConstructArgs) -> Result<bool, Exit> {
    let params = load_params(&args)?;
    let cfg = Config::build(params.clone()).map_err(core_err)?;
    let budget = Budget { max_m: args.max_m, max_l: args.max_l };
    std::fs::create_dir_all(&args.cache_dir).with_context(|| format!("creating {}", args.cache_dir.display()))?;
    let cached = args.cache_dir.join(format!("{}.json", params.digest()));

    let hit = cached.exists().then(|| std::fs::read_to_string(&cached).ok()).flatten().and_then(|s| Artifact::from_json(&s).ok());
    let cache_hit = hit.is_some();
    let artifact = match hit {
        Some(a) => a,
        None => {
            let (ba, ms) = construct(&cfg, &budget).map_err(core_err)?;
            let a = Artifact::new(ba, ms);
            std::fs::write(&cached, a.to_json()).with_context(|| format!("writing {}", cached.display()))?;
            a
        }
    };
    let dest = match &args.out {
        Some(out) => {
            std::fs::write(out, artifact.to_json()).with_context(|| format!("writing {}", out.display()))?;
            out.clone()
        }
        None => cached,
    };
    let record = ConstructRecord {
        schema_version: REPORT_SCHEMA_VERSION,
        params: &params,
        big_m: artifact.ba.big_m,
        degrees: &artifact.ba.degrees,
        content_hash: &artifact.content_hash,
        cache_hit,
        build_ms: artifact.build_ms,
        artifact: dest.display().to_string(),
    };
    report::write_lines(&[record], None)?;
    eprintln!(
        "M = {}, hash {}{}",
        artifact.ba.big_m,
        &artifact.content_hash[..16],
        if cache_hit { " (cache hit)" } else { "" }
    );
    Ok(true)
}

fn read_artifact(path: &Path) -> Result<Artifact, Exit> {
    let text = std::fs::read_to_string(path).map_err(|e| Exit(2, anyhow::anyhow!("reading {}: {e}", path.display())))?;
    Artifact::from_json(&text).map_err(core_err)
}

fn cmd_verify(args: VerifyArgs) -> Result<bool, Exit> {
    let artifact = read_artifact(&args.artifact)?;
    let cfg = Config::build(artifact.ba.params.clone()).map_err(core_err)?;
    let opts = Options { mode: args.mode, max_height: args.max_height, tol: args.tol, seed: args.seed };
    let rows = suites::run(&cfg, &artifact.ba, &args.suite, &opts, args.jobs);
    report::write_lines(&rows, args.out.as_deref())?;
    report::summarize(&rows);
    Ok(rows.iter().all(|r| r.passed()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Construct(a) => cmd_construct(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Continue(a) => continuation::cmd_continue(a).map_err(|e| match e.downcast_ref::<Error>() {
            Some(core) => Exit(exit_code(core), e),
            None => Exit(4, e),
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Exit(code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
