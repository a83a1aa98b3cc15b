use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nullinf::scenario::{run_scenario, Block, Report, ReportFormat, ScenarioConfig};
use nullinf::verify::{verify_suite, CheckResult};
use nullinf::Error;

#[derive(Parser)]
#[command(name = "nullinf", version, about = "Asymptotic charges and long-range effects in electrodynamics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Spacelike and null asymptotes of the scenario field.
    Asymptote(RunArgs),
    /// Energy-momentum and angular momentum radiated to null infinity.
    Radiate(RunArgs),
    /// Full budget with closure and existence defects.
    Budget(RunArgs),
    /// Long-range variables, the infrared potential and the angular momentum split.
    Longrange(RunArgs),
    /// Trajectory shift and scattering phase of the probe particle.
    Shift(RunArgs),
    /// Dirac packet charges, asymptote and phase dressing.
    Dirac(RunArgs),
    /// Run invariant suites.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Structured,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Table => ReportFormat::Table,
            Format::Structured => ReportFormat::Structured,
        }
    }
}

#[derive(Args)]
struct Common {
    /// Directory receiving the report; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
    /// Factor applied to every tolerance.
    #[arg(long, default_value_t = 1.0)]
    tolerance_scale: f64,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name or "all".
    #[arg(default_value = "all")]
    suite: String,
    /// Wall-time budget per check, in seconds.
    #[arg(long, default_value_t = 120.0)]
    budget: f64,
    /// Accepted for uniformity; suites carry their own configs.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn init_threads(common: &Common) -> Result<(), Error> {
    if let Some(n) = common.threads {
        if n == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    if !(common.tolerance_scale.is_finite() && common.tolerance_scale > 0.0) {
        return Err(Error::Config("--tolerance-scale must be positive".into()));
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<u8, Error> {
    let (block, args) = match command {
        Command::Asymptote(a) => (Block::Asymptote, a),
        Command::Radiate(a) => (Block::Radiate, a),
        Command::Budget(a) => (Block::Budget, a),
        Command::Longrange(a) => (Block::Longrange, a),
        Command::Shift(a) => (Block::Shift, a),
        Command::Dirac(a) => (Block::Dirac, a),
        Command::Verify(v) => return verify(v),
    };
    init_threads(&args.common)?;
    let mut config = ScenarioConfig::load(&args.config)?;
    config.outputs = vec![block];
    config.tolerances = config.tolerances.scaled(args.common.tolerance_scale);
    let report = run_scenario(&config)?;
    emit(&report, block.name(), &args.common)?;
    for v in &report.violations {
        eprintln!("violation: {} = {:.3e} exceeds {:.3e}", v.name, v.value, v.tolerance);
    }
    Ok(if report.violations.is_empty() { 0 } else { 4 })
}

fn extension(format: Format) -> &'static str {
    match format {
        Format::Table => "csv",
        Format::Structured => "json",
    }
}

fn emit(report: &Report, stem: &str, common: &Common) -> Result<(), Error> {
    let text = report.render(common.format.into())?;
    write_text(&text, stem, common)
}

fn write_text(text: &str, stem: &str, common: &Common) -> Result<(), Error> {
    match &common.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = Path::new(dir).join(format!("{stem}.{}", extension(common.format)));
            std::fs::write(path, text)?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<u8, Error> {
    init_threads(&args.common)?;
    if !(args.budget.is_finite() && args.budget > 0.0) {
        return Err(Error::Config("--budget must be positive".into()));
    }
    let results = verify_suite(&args.suite, Duration::from_secs_f64(args.budget))?;
    let failed = results.iter().filter(|r| !r.passed()).count();
    if args.common.out.is_some() {
        write_text(&render_checks(&results, args.common.format)?, "verify", &args.common)?;
    }
    for r in &results {
        println!("{r}");
    }
    println!("{} checks, {} failed", results.len(), failed);
    Ok(if failed == 0 { 0 } else { 4 })
}

fn render_checks(results: &[CheckResult], format: Format) -> Result<String, Error> {
    match format {
        Format::Structured => serde_json::to_string_pretty(results)
            .map(|s| s + "\n")
            .map_err(|e| Error::Config(e.to_string())),
        Format::Table => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Config(e.to_string());
            w.write_record(["suite", "check", "residual", "tolerance", "status"]).map_err(io)?;
            for r in results {
                let status = serde_json::to_value(&r.status).map_err(|e| Error::Config(e.to_string()))?;
                let status = match status {
                    serde_json::Value::String(s) => s,
                    other => other.to_string(),
                };
                w.write_record([
                    r.suite.clone(),
                    r.check.clone(),
                    format!("{:.6e}", r.residual),
                    format!("{:.6e}", r.tolerance),
                    status,
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| Error::Config(e.to_string()))
        }
    }
}
