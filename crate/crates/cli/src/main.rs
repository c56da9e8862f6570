use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use static_hedge::spanning::write_record;
use static_hedge_cli::{exit_code, render, render_pfe, report, ConfigError, ExperimentConfig, Format, RunError};

#[derive(Parser)]
#[command(name = "static-hedge", version, about = "Static option hedging experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Target price and delta at each sweep point.
    Price(Common),
    /// Print the hedge legs of every method at the first sweep point.
    Build(Common),
    /// EDL of every method across the sweep.
    Sweep(Common),
    /// Monte Carlo hedge-error statistics.
    Simulate(Common),
    /// Percentile envelopes of discounted hedge errors over time.
    Pfe(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Directory for output files; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
    /// Worker threads (defaults to all cores). Results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
    /// Override the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into())
}

fn write(dir: Option<&Path>, name: &str, text: &str) -> Result<(), RunError> {
    static_hedge_cli::emit::write_output(dir, name, text).map_err(|e| ConfigError::new("--out", format!("cannot write {name}: {e}")).into())
}

fn run(cmd: Cmd) -> Result<(), RunError> {
    let (kind, args) = match cmd {
        Cmd::Price(a) => ("price", a),
        Cmd::Build(a) => ("build", a),
        Cmd::Sweep(a) => ("sweep", a),
        Cmd::Simulate(a) => ("simulate", a),
        Cmd::Pfe(a) => ("pfe", a),
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(ConfigError::new("--threads", "must be at least 1").into());
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| ConfigError::new("--threads", e.to_string()))?;
    }
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        match cfg.simulation.as_mut() {
            Some(s) => s.seed = seed,
            None => return Err(ConfigError::new("--seed", "config has no [simulation] block").into()),
        }
    }
    let base = stem(&args.config);
    let dir = args.out.as_deref();
    let ext = args.format.extension();
    match kind {
        "price" => write(dir, &format!("{base}_price.{ext}"), &render(&report::run_price(&cfg)?, args.format)),
        "sweep" => write(dir, &format!("{base}.{ext}"), &render(&report::run_experiment(&cfg)?, args.format)),
        "simulate" => write(
            dir,
            &format!("{base}_stats.{ext}"),
            &render(&report::run_simulation(&cfg)?, args.format),
        ),
        "pfe" => write(dir, &format!("{base}_pfe.{ext}"), &render_pfe(&report::run_pfe(&cfg)?, args.format)),
        _ => {
            let portfolios = report::run_build(&cfg)?;
            match args.format {
                Format::Json => {
                    let text = serde_json::to_string_pretty(&portfolios).expect("portfolios hold finite numbers") + "\n";
                    write(dir, &format!("{base}_legs.json"), &text)
                }
                Format::Plot => {
                    let mut text = String::from("method,maturity,strike,weight\n");
                    for p in &portfolios {
                        for l in &p.legs {
                            text.push_str(&format!("{},{},{},{}\n", p.method, l.maturity, l.strike, l.weight));
                        }
                    }
                    write(dir, &format!("{base}_legs.csv"), &text)
                }
                Format::Csv => match dir {
                    Some(_) => portfolios
                        .iter()
                        .try_for_each(|p| write(dir, &format!("{base}_{}.csv", p.method), &write_record(p))),
                    None => {
                        let all: Vec<String> = portfolios.iter().map(write_record).collect();
                        write(None, "", &all.join("\n"))
                    }
                },
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("static-hedge: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
