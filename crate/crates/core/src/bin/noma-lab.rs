use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use noma_lab::codebook::{generate_reference_codebooks, overloading_factor, validate_codebook_json, Scheme};
use noma_lab::complexity::{comparison, FlopParams};
use noma_lab::config::{summarize, RunConfig};
use noma_lab::harness::RunOptions;
use noma_lab::Error;

#[derive(Parser)]
#[command(name = "noma-lab", version, about = "Uplink code-domain NOMA detection lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo SER sweep from a JSON config.
    Simulate(SimulateArgs),
    /// Print FLOP counts for every detector/system pair.
    Flops(FlopsArgs),
    /// Generate, inspect or validate codebook files.
    #[command(subcommand)]
    Codebook(CodebookCommand),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Table,
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dotted-path override, e.g. `sweep.admm.gamma=50` or `ebn0=0:2:10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    #[arg(long, env = "NOMA_LAB_WORKERS")]
    workers: Option<usize>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// SER at which gains over the first detector are reported.
    #[arg(long, default_value_t = 1e-3)]
    target_ser: f64,
    /// Write zeros in the `seconds` column so outputs are byte-stable.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct FlopsArgs {
    #[arg(long = "J", alias = "ues", default_value_t = 6)]
    ues: usize,
    #[arg(long = "K", alias = "resources", default_value_t = 4)]
    resources: usize,
    #[arg(long = "N_r", alias = "nr", default_value_t = 4)]
    rx: usize,
    #[arg(long = "d_v", alias = "dv", default_value_t = 2)]
    dv: usize,
    #[arg(long = "M", alias = "order", default_value_t = 4)]
    order: usize,
    #[arg(long = "T", alias = "iterations", default_value_t = 1)]
    iterations: u32,
    /// Variable-node count in the MPA formula (defaults to K).
    #[arg(long)]
    mpa_n: Option<usize>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Subcommand)]
enum CodebookCommand {
    /// Write deterministic reference codebooks.
    Gen {
        #[arg(long)]
        scheme: Scheme,
        #[arg(long = "J")]
        ues: usize,
        #[arg(long = "K")]
        resources: usize,
        #[arg(long = "M")]
        order: usize,
        #[arg(long)]
        dv: Option<usize>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print overloading, degrees and per-UE box bounds.
    Inspect {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t)]
        format: Format,
    },
    /// Check every codebook rule and list the failures.
    Validate { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Flops(a) => flops(&a),
        Command::Codebook(c) => codebook(c),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => report(&e),
    }
}

fn report(e: &Error) -> ExitCode {
    let body = json!({"error": {"kind": e.kind(), "message": e.to_string()}});
    eprintln!("{body}");
    if e.is_input_error() {
        ExitCode::from(2)
    } else {
        ExitCode::from(1)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Error> {
    std::fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_file(path: &Path) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::CodebookNotFound(path.to_path_buf())
        } else {
            Error::Io {
                path: path.to_path_buf(),
                source,
            }
        }
    })
}

fn simulate(a: SimulateArgs) -> Result<ExitCode, Error> {
    let cfg = RunConfig::load(&a.config, &a.overrides)?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let opts = RunOptions {
        workers,
        record_timing: !a.no_timing,
    };
    let out = cfg.run(&opts)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|source| Error::Io {
        path: a.out_dir.clone(),
        source,
    })?;
    let stem = cfg.name.clone().unwrap_or_else(|| "sweep".into());
    write_file(&a.out_dir.join(format!("{stem}.csv")), &out.csv)?;
    write_file(&a.out_dir.join(format!("{stem}.json")), &out.sidecar_json)?;

    let rows = summarize(&out.result, a.target_ser);
    let mut stdout = std::io::stdout().lock();
    match a.format {
        Format::Json => {
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&rows).expect("summary JSON"));
        }
        Format::Csv => {
            let _ = writeln!(stdout, "detector,min_ser,gain_db_vs_first");
            for r in &rows {
                let gain = r.gain_db_vs_first.map(|g| format!("{g:.3}")).unwrap_or_default();
                let _ = writeln!(stdout, "{},{},{gain}", r.detector, r.min_ser);
            }
        }
        Format::Table => {
            let _ = writeln!(stdout, "{:<8} {:>12} {:>16}", "detector", "min SER", "gain vs first");
            for r in &rows {
                let gain = r
                    .gain_db_vs_first
                    .map_or_else(|| "-".to_string(), |g| format!("{g:.2} dB"));
                let _ = writeln!(stdout, "{:<8} {:>12.4e} {:>16}", r.detector, r.min_ser, gain);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn flops(a: &FlopsArgs) -> Result<ExitCode, Error> {
    let params = FlopParams {
        ues: a.ues,
        resources: a.resources,
        rx: a.rx,
        dv: a.dv,
        order: a.order,
        iterations: a.iterations,
        mpa_variable_nodes: a.mpa_n,
    };
    if [a.ues, a.resources, a.rx, a.dv, a.order].contains(&0) {
        return Err(Error::Config("FLOP parameters must be positive".into()));
    }
    let rows = comparison(&params);
    let mut stdout = std::io::stdout().lock();
    match a.format {
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "detector": r.detector.to_string(),
                        "scheme": r.scheme.as_str(),
                        "preprocessing": r.preprocessing.to_string(),
                        "per_iteration": r.per_iteration.to_string(),
                        "search": r.search.to_string(),
                        "total": r.total().to_string(),
                    })
                })
                .collect();
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&items).expect("flops JSON"));
        }
        Format::Csv => {
            let _ = writeln!(stdout, "detector,scheme,preprocessing,per_iteration,search,total");
            for r in &rows {
                let _ = writeln!(
                    stdout,
                    "{},{},{},{},{},{}",
                    r.detector,
                    r.scheme,
                    r.preprocessing,
                    r.per_iteration,
                    r.search,
                    r.total()
                );
            }
        }
        Format::Table => {
            let _ = writeln!(
                stdout,
                "N_r={} K={} J={} d_v={} M={} T={}",
                a.rx, a.resources, a.ues, a.dv, a.order, a.iterations
            );
            let _ = writeln!(stdout, "{:<6} {:<10} {:>14}", "det", "scheme", "FLOPs");
            for r in &rows {
                let _ = writeln!(stdout, "{:<6} {:<10} {:>14}", r.detector.to_string(), r.scheme.as_str(), r.total());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn codebook(cmd: CodebookCommand) -> Result<ExitCode, Error> {
    match cmd {
        CodebookCommand::Gen {
            scheme,
            ues,
            resources,
            order,
            dv,
            out,
        } => {
            let set = generate_reference_codebooks(ues, resources, order, scheme, dv)?;
            match out {
                Some(path) => set.save(&path)?,
                None => print!("{}", set.to_json()),
            }
            Ok(ExitCode::SUCCESS)
        }
        CodebookCommand::Inspect { file, format } => {
            let report = validate_codebook_json(&read_file(&file)?)?;
            let Some(set) = report.set else {
                return Err(Error::Invariant(report.violations));
            };
            let g = set.graph();
            let bounds = set.box_bounds();
            let lambda = overloading_factor(set.ues(), set.resources());
            let mut stdout = std::io::stdout().lock();
            if let Format::Json = format {
                let ues: Vec<_> = bounds
                    .iter()
                    .enumerate()
                    .map(|(j, b)| json!({"ue": j, "alpha": b.alpha, "beta": b.beta, "resources": g.active_resources(j)}))
                    .collect();
                let doc = json!({
                    "scheme": set.scheme().as_str(),
                    "J": set.ues(), "K": set.resources(), "M": set.order(),
                    "overloading_percent": lambda,
                    "dv": g.dv(), "df": g.df(),
                    "ues": ues,
                });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("inspect JSON"));
            } else {
                let _ = writeln!(
                    stdout,
                    "scheme {}  J={} K={} M={}  overloading {lambda}%",
                    set.scheme(),
                    set.ues(),
                    set.resources(),
                    set.order()
                );
                let fmt_deg = |d: Option<usize>| d.map_or_else(|| "irregular".to_string(), |v| v.to_string());
                let _ = writeln!(stdout, "d_v {}  d_f {}", fmt_deg(g.dv()), fmt_deg(g.df()));
                let _ = write!(stdout, "factor graph:\n{g}");
                for (j, b) in bounds.iter().enumerate() {
                    let _ = writeln!(stdout, "UE {j}: alpha {:.6} beta {:.6}", b.alpha, b.beta);
                }
            }
            Ok(ExitCode::SUCCESS)
        }
        CodebookCommand::Validate { file } => {
            let report = validate_codebook_json(&read_file(&file)?)?;
            if report.violations.is_empty() {
                println!("valid");
                return Ok(ExitCode::SUCCESS);
            }
            for v in &report.violations {
                println!("{v}");
            }
            Err(Error::Invariant(report.violations))
        }
    }
}
