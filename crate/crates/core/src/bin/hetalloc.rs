//! Command-line front end.
//!
//!   hetalloc run --scenario s.json [--allocator dp] [--steps T] [--seed n] [--output f] [--format table|csv]
//!   hetalloc validate --scenario s.json
//!   hetalloc compare --scenario s.json --allocators dp,round_robin,pf
//!
//! Failures print one `error[<class>]: <message>` line to stderr and exit 1.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use hetalloc::report::{build_report, emit_report, ReportFormat};
use hetalloc::scenario::{load_scenario, AllocatorKind, Scenario};
use hetalloc::simengine::{run, summarize, SimulationRun, Summary};
use hetalloc::Error;

#[derive(Parser)]
#[command(name = "hetalloc", version, about = "Radio resource allocation simulator for heterogeneous networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and emit the per-user report
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario's allocator
        #[arg(long)]
        allocator: Option<AllocatorKind>,
        /// Overrides the scenario's horizon
        #[arg(long)]
        steps: Option<usize>,
        /// Overrides the scenario's seed
        #[arg(long)]
        seed: Option<u64>,
        /// Write here instead of stdout
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
    },
    /// Load and check a scenario without running it
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Run several allocators on one scenario and print their totals side by side
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated allocator names; all of them when omitted
        #[arg(long, value_delimiter = ',')]
        allocators: Vec<AllocatorKind>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "table")]
        format: ReportFormat,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("invalid arguments").trim_start_matches("error: ");
            eprintln!("error[usage]: {first}");
            return ExitCode::from(2);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.class(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run { scenario, allocator, steps, seed, output, format } => {
            let scenario = load_scenario(&scenario)?;
            let sim = configure(scenario, allocator, steps, seed)?;
            let summary = summarize(&run(&sim)?)?;
            let bytes = emit_report(&build_report(&sim.scenario, &summary), format);
            write_output(output.as_deref(), &bytes)
        }
        Command::Validate { scenario } => {
            let s = load_scenario(&scenario)?;
            println!(
                "ok: {} users, {} subzones, {} networks, horizon {}, allocator {}",
                s.users.len(),
                s.service_area.subzones().len(),
                s.networks.len(),
                s.horizon,
                s.allocator
            );
            Ok(())
        }
        Command::Compare { scenario, allocators, steps, seed, format } => {
            let scenario = load_scenario(&scenario)?;
            let allocators = if allocators.is_empty() { AllocatorKind::ALL.to_vec() } else { allocators };
            let sims = allocators
                .iter()
                .map(|&a| configure(scenario.clone(), Some(a), steps, seed))
                .collect::<Result<Vec<_>, _>>()?;
            let results: Vec<Result<Summary, Error>> = std::thread::scope(|s| {
                let handles: Vec<_> = sims
                    .iter()
                    .map(|sim| s.spawn(move || Ok(summarize(&run(sim)?)?)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("simulation thread panicked")).collect()
            });
            let mut rows = Vec::new();
            for (a, r) in allocators.iter().zip(results) {
                rows.push((*a, r?));
            }
            write_output(None, compare_table(&rows, format).as_bytes())
        }
    }
}

fn configure(
    scenario: Scenario,
    allocator: Option<AllocatorKind>,
    steps: Option<usize>,
    seed: Option<u64>,
) -> Result<SimulationRun, Error> {
    let mut sim = SimulationRun::from_scenario(scenario);
    if let Some(a) = allocator {
        sim.allocator = a;
    }
    if let Some(t) = steps {
        if t == 0 {
            return Err(Error::Usage("--steps must be at least 1".into()));
        }
        sim.horizon = t;
    }
    if let Some(s) = seed {
        sim.seed = s;
    }
    Ok(sim)
}

fn compare_table(rows: &[(AllocatorKind, Summary)], format: ReportFormat) -> String {
    let header = ["allocator", "total_bits", "total_units", "blocked_users", "blocking_events"];
    let cells: Vec<[String; 5]> = rows
        .iter()
        .map(|(a, s)| {
            [
                a.name().to_string(),
                format!("{:.3}", s.total_bits),
                format!("{:.6}", s.total_units),
                s.blocked_users.to_string(),
                s.blocking_events.to_string(),
            ]
        })
        .collect();
    if format == ReportFormat::Csv {
        let mut out = header.join(",") + "\n";
        for c in &cells {
            out += &(c.join(",") + "\n");
        }
        return out;
    }
    let widths: Vec<usize> = (0..5)
        .map(|i| cells.iter().map(|c| c[i].len()).chain([header[i].len()]).max().unwrap_or(0))
        .collect();
    let fmt_row = |vals: Vec<&str>| -> String {
        vals.iter()
            .enumerate()
            .map(|(i, v)| if i == 0 { format!("{v:<w$}", w = widths[i]) } else { format!("{v:>w$}", w = widths[i]) })
            .collect::<Vec<_>>()
            .join("  ")
            + "\n"
    };
    let mut out = fmt_row(header.to_vec());
    for c in &cells {
        out += &fmt_row(c.iter().map(String::as_str).collect());
    }
    out
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}
