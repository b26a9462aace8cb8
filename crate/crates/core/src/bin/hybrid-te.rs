use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hybrid_te::sim::{run_schemes, RunOptions, RunResult};
use hybrid_te::{NetworkTopology, ScenarioConfig, Scheme};

#[derive(Parser)]
#[command(name = "hybrid-te", version, about = "Hybrid SDN/MPLS traffic engineering simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scheme.
    Run {
        scenario: PathBuf,
        /// Write metrics.csv, events.log and config.echo here instead of
        /// printing the CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// exact, ffr or baseline.
        #[arg(long)]
        scheme: Option<Scheme>,
        /// Also write every solver problem and result as JSON under OUT/lp.
        #[arg(long, requires = "out")]
        dump_lp: bool,
    },
    /// Print the built-in reference topology.
    GenTopology {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Simulate all three schemes and summarise final-slot throughput.
    Compare {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn load(path: &PathBuf, seed: Option<u64>) -> Result<ScenarioConfig, Box<dyn std::error::Error>> {
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn emit(result: &RunResult, out: Option<&PathBuf>) -> Result<(), Box<dyn std::error::Error>> {
    match out {
        Some(dir) => result.write_outputs(dir)?,
        None => print!("{}", result.metrics_csv()),
    }
    Ok(())
}

fn summary(result: &RunResult) -> String {
    let final_tp = |s: Scheme| {
        result
            .run(s)
            .and_then(|r| r.samples.last())
            .map_or(0.0, |x| x.throughput)
    };
    let base = final_tp(Scheme::ShortestPath);
    let mut out = format!("{:<10} {:>12} {:>10}\n", "scheme", "throughput", "vs base");
    for r in &result.runs {
        let tp = final_tp(r.scheme);
        let ratio = if base > 0.0 { tp / base } else { f64::NAN };
        out += &format!("{:<10} {:>12.3} {:>10.3}\n", r.scheme.label(), tp, ratio);
    }
    out
}

fn real_main(cli: Cli) -> Result<(), Box<dyn std::error::Error>> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            seed,
            scheme,
            dump_lp,
        } => {
            let mut cfg = load(&scenario, seed)?;
            if let Some(s) = scheme {
                cfg.scheme = s;
            }
            let opts = RunOptions {
                dump_dir: if dump_lp { out.as_ref().map(|d| d.join("lp")) } else { None },
            };
            let result = run_schemes(&cfg, &[cfg.scheme], &opts)?;
            emit(&result, out.as_ref())?;
            if out.is_some() {
                let last = result.runs[0].samples.last().expect("slots >= 1");
                println!(
                    "{} flows, {} LSPs, {} slots; final throughput {:.3}, loss {:.3}",
                    result.flow_count,
                    result.lsp_count,
                    cfg.slots,
                    last.throughput,
                    last.packet_loss
                );
            }
        }
        Command::GenTopology { out } => {
            let doc = NetworkTopology::reference_toml();
            match out {
                Some(p) => std::fs::write(&p, doc).map_err(|e| format!("{}: {e}", p.display()))?,
                None => print!("{doc}"),
            }
        }
        Command::Compare { scenario, out, seed } => {
            let cfg = load(&scenario, seed)?;
            let result = run_schemes(&cfg, &Scheme::ALL, &RunOptions::default())?;
            emit(&result, out.as_ref())?;
            if out.is_some() {
                print!("{}", summary(&result));
            } else {
                eprint!("{}", summary(&result));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
