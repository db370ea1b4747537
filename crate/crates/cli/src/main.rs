use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use memaccel_cli::run::{
    self, DecodeRunConfig, ReportInputs, DEFAULT_TABLE_BUDGET,
};

#[derive(Parser)]
#[command(
    name = "memaccel",
    version,
    about = "Table-driven signal-processing acceleration: build and verify decoder tables, \
             benchmark the decoders, plan table aggregation, and compute metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the decoder lookup tables and write them to a directory.
    BuildTables {
        /// Directory receiving acs.matb and minsel.matb.
        #[arg(long)]
        tables: PathBuf,
        /// Table memory budget in bytes.
        #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
        budget: u64,
        /// Report file path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exhaustively check both tables against the computed oracle and
    /// run differential decodes across the crossover sweep.
    Verify {
        /// Directory with previously built tables; builds in memory when
        /// omitted.
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Information bits per differential decode.
        #[arg(long, default_value_t = 1_000_000)]
        bits: usize,
        /// Traceback depth.
        #[arg(long, default_value_t = 64)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure unthrottled decoder throughput, reference vs tabled.
    Bench {
        #[arg(long)]
        tables: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1_000_000)]
        bits: usize,
        /// Channel crossover probability.
        #[arg(long = "bsc-p", default_value_t = 0.01)]
        bsc_p: f64,
        #[arg(long, default_value_t = 64)]
        depth: usize,
        /// Timed repetitions; the median is reported.
        #[arg(long, default_value_t = 5)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plan table aggregation for a graph description file.
    Plan {
        /// Graph description (see docs/graph-format.md).
        #[arg(long)]
        graph: PathBuf,
        /// Override the budget from the file, bytes.
        #[arg(long)]
        budget: Option<u64>,
        /// Also run the exhaustive oracle (small graphs only).
        #[arg(long)]
        exhaustive: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute acceleration metrics from measured or modeled costs.
    Report {
        /// Cost of the blocks replaced by tables.
        #[arg(long = "tabled-cost")]
        tabled_cost: String,
        /// Table management cost.
        #[arg(long = "mgmt-cost")]
        mgmt_cost: String,
        /// Cost of blocks left computational.
        #[arg(long = "residual-cost", default_value = "0")]
        residual_cost: String,
        /// Total table footprint, for the efficiency figure.
        #[arg(long = "table-bytes")]
        table_bytes: Option<u64>,
        /// System memory, for the merit figure.
        #[arg(long)]
        memory: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tone-bank corrector: accuracy against the computed oscillator and
    /// throughput of both implementations.
    NcoBench {
        /// Samples per tone period.
        #[arg(long, default_value_t = 2048)]
        period: usize,
        /// Number of tabled offsets.
        #[arg(long, default_value_t = 64)]
        offsets: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 9)]
        reps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn print_human(report: &memaccel_cli::report::Report) {
    println!("command: {}", report.command);
    for check in &report.checks {
        let mark = if check.pass { "PASS" } else { "FAIL" };
        println!("  [{mark}] {}: {}", check.name, check.detail);
    }
    if let Some(digests) = &report.table_digests {
        println!("  tables: acs {}…, min-select {}…", &digests.acs[..12], &digests.min_select[..12]);
    }
    if report.command == "report" {
        if let Some(a) = report.results.get("accel_factor_3sf").and_then(|v| v.as_str()) {
            println!("  acceleration factor a = {a}");
        }
    }
    if report.command == "bench" {
        if let Some(a) = report.results.get("measured_accel_factor").and_then(|v| v.as_f64()) {
            println!("  measured acceleration factor a = {}", memaccel_cli::numeric::format_sig(a, 3));
        }
    }
    if !report.results.is_null() {
        println!("results:");
        println!("{}", serde_json::to_string_pretty(&report.results).expect("results serialize"));
    }
    println!("status: {}", report.status);
}

fn dispatch(command: Command) -> anyhow::Result<(memaccel_cli::report::Report, Option<PathBuf>)> {
    match command {
        Command::BuildTables { tables, budget, out } => {
            Ok((run::cmd_build_tables(&tables, budget)?, out))
        }
        Command::Verify { tables, seed, bits, depth, budget, out } => {
            let cfg = DecodeRunConfig {
                seed,
                info_bits: bits,
                bsc_p: 0.0,
                depth,
                reps: 1,
                tables_dir: tables,
                budget,
            };
            Ok((run::cmd_verify(&cfg)?, out))
        }
        Command::Bench { tables, seed, bits, bsc_p, depth, reps, budget, out } => {
            let cfg = DecodeRunConfig {
                seed,
                info_bits: bits,
                bsc_p,
                depth,
                reps,
                tables_dir: tables,
                budget,
            };
            Ok((run::cmd_bench(&cfg)?, out))
        }
        Command::Plan { graph, budget, exhaustive, out } => {
            Ok((run::cmd_plan(&graph, budget, exhaustive)?, out))
        }
        Command::Report { tabled_cost, mgmt_cost, residual_cost, table_bytes, memory, out } => {
            let inputs = ReportInputs {
                tabled_cost,
                management_cost: mgmt_cost,
                residual_cost,
                table_bytes,
                memory_bytes: memory,
            };
            Ok((run::cmd_report(&inputs)?, out))
        }
        Command::NcoBench { period, offsets, seed, reps, out } => {
            Ok((run::cmd_nco_bench(period, offsets, seed, reps)?, out))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok((report, out)) => {
            print_human(&report);
            let path = out.unwrap_or_else(|| PathBuf::from(format!("{}-report.json", report.command)));
            if let Err(e) = report.write(&path) {
                eprintln!("{}", serde_json::json!({ "failure": "report-write", "detail": e.to_string() }));
                return ExitCode::from(2);
            }
            println!("report: {}", path.display());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for record in report.failure_records() {
                    eprintln!("{record}");
                }
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("{}", serde_json::json!({ "failure": "error", "detail": format!("{e:#}") }));
            ExitCode::from(2)
        }
    }
}
