use clap::Parser;
use fraclap_cli::commands::{run, CliError, Outcome};
use fraclap_cli::config::{Command, Format, RunConfig};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

/// Fractional Laplacian toolkit for the ball.
///
/// Exit codes: 0 ok, 1 identity failure, 2 configuration error,
/// 3 numerical non-convergence. FRACLAP_THREADS caps the worker count.
#[derive(Parser, Debug)]
#[command(name = "fraclap", version)]
struct Args {
    command: Command,
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    s: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Identity tolerance for `verify`, relative quadrature tolerance otherwise.
    #[arg(long)]
    tol: Option<f64>,
    /// Print nothing but the table.
    #[arg(long)]
    quiet: bool,
}

fn load(args: &Args) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != args.command {
            return Err(CliError::Config(format!("config is for {c:?}, command line asks for {:?}", args.command)));
        }
    }
    cfg.command = Some(args.command);
    cfg.n = args.n.or(cfg.n);
    cfg.s = args.s.or(cfg.s);
    cfg.r = args.r.or(cfg.r);
    cfg.out = args.out.clone().or(cfg.out);
    cfg.format = args.format.or(cfg.format);
    if let Some(t) = args.tol {
        match args.command {
            Command::Verify => cfg.tolerances.identity = Some(t),
            _ => cfg.tolerances.rel = Some(t),
        }
    }
    Ok(cfg)
}

fn init_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("FRACLAP_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Config(format!("FRACLAP_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn emit(cfg: &RunConfig, outcome: &Outcome) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Config(format!("cannot write output: {e}"));
    let mut sink: Box<dyn Write> = match &cfg.out {
        Some(path) => Box::new(BufWriter::new(File::create(path).map_err(io)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    };
    match cfg.format() {
        Format::Csv => outcome.table.write_csv(&mut sink),
        Format::Json => outcome.table.write_json(&mut sink),
    }
    .and_then(|_| sink.flush())
    .map_err(io)
}

fn main() -> ExitCode {
    let args = Args::parse();
    let quiet = args.quiet;
    let result = init_threads().and_then(|_| load(&args)).and_then(|cfg| {
        let outcome = run(&cfg)?;
        emit(&cfg, &outcome)?;
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            if !quiet {
                for note in &outcome.notes {
                    eprintln!("fraclap: {note}");
                }
            }
            ExitCode::from(outcome.status as u8)
        }
        Err(e) => {
            eprintln!("fraclap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
