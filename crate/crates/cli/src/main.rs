use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qtopo_cli::commands::{
    cmd_bench, cmd_layout, cmd_metrics_fidelity, cmd_metrics_idle, cmd_route, cmd_train,
    train::default_out_dir, BenchArgs, LayoutArgs, RouteArgs, TrainArgs,
};
use qtopo_cli::CliError;

/// Topology/circuit co-design toolkit: route circuits, train tailored
/// qubit topologies, lay them out on a grid, and benchmark the results.
#[derive(Parser)]
#[command(name = "qtopo", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Route a circuit onto a topology and report depth/gates/idle.
    Route {
        /// QASM file or generator spec gen:QxF[@SEED]
        circuit: String,
        /// grid:RxC | line:N | file:PATH
        #[arg(long)]
        topology: String,
        /// Number of routing seeds to average
        #[arg(long, default_value_t = 3)]
        seeds: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Count a SWAP as one gate instead of three cx
        #[arg(long)]
        swap_as_one: bool,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Also write the first seed's routed circuit as QASM
        #[arg(long)]
        emit_qasm: bool,
    },
    /// Learn a tailored topology for a circuit with reward-replay PPO.
    Train {
        /// QASM file or generator spec gen:QxF[@SEED]
        circuit: String,
        /// Key-value config file; flags override it
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        iterations: Option<usize>,
        #[arg(long)]
        batch_size: Option<usize>,
        #[arg(long)]
        minibatch_size: Option<usize>,
        #[arg(long)]
        learning_rate: Option<f64>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Cache reuses per evaluated action; 0 disables reward replay
        #[arg(long)]
        replay_threshold: Option<usize>,
        /// depth | gates
        #[arg(long)]
        objective: Option<String>,
        /// negated | verbatim
        #[arg(long)]
        reward_sign: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Number of router seeds averaged per evaluation
        #[arg(long)]
        eval_seeds: Option<usize>,
        #[arg(long)]
        max_degree: Option<usize>,
        #[arg(long)]
        max_qubits: Option<usize>,
        /// Count a SWAP as one gate instead of three cx
        #[arg(long)]
        swap_as_one: Option<bool>,
        /// Use the full-scale hyper-parameter profile
        #[arg(long)]
        full_scale: bool,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Force-grid layout of a topology, best of several restarts.
    Layout {
        /// grid:RxC | line:N | file:PATH
        topology: String,
        #[arg(long, default_value_t = 10)]
        restarts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Repulsion multiplier for sparser placements
        #[arg(long, default_value_t = 1.0)]
        sparse: f64,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Compare tailored topologies against the square-grid baseline.
    Bench {
        /// Directory of .qasm files, or gen:qubits=A..B,factor=F,count=N
        source: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        eval_seeds: usize,
        #[arg(long, default_value_t = 60)]
        iterations: usize,
        #[arg(long, default_value_t = 2)]
        replay_threshold: usize,
        /// Baseline override, e.g. grid:10x10
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Evaluate the standalone metrics.
    Metrics {
        #[command(subcommand)]
        which: MetricsCommand,
    },
}

#[derive(Subcommand)]
enum MetricsCommand {
    /// Idle ratio 1 - gates/(qubits*depth).
    Idle {
        #[arg(long)]
        gates: usize,
        #[arg(long)]
        qubits: usize,
        #[arg(long)]
        depth: usize,
    },
    /// Classical fidelity between two probability-vector CSV files.
    Fidelity { p: PathBuf, q: PathBuf },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Route {
            circuit,
            topology,
            seeds,
            seed,
            swap_as_one,
            max_degree,
            out_dir,
            emit_qasm,
        } => {
            let args = RouteArgs {
                circuit,
                topology,
                seeds,
                seed,
                swap_as_one,
                max_degree,
                out_dir: out_dir.unwrap_or_else(|| default_out_dir("route")),
                emit_qasm,
            };
            let summary = cmd_route(&args)?;
            println!(
                "{} on {}: mean depth {:.2}, gates {:.2}, swaps {:.2}, idle {:.2}% ({} seeds)",
                summary.circuit,
                summary.topology,
                summary.mean_depth,
                summary.mean_total_gates,
                summary.mean_swap_count,
                100.0 * summary.mean_idle,
                summary.runs.len()
            );
            println!(
                "report: {}",
                args.out_dir.join("route_report.json").display()
            );
        }
        Command::Train {
            circuit,
            config,
            seed,
            iterations,
            batch_size,
            minibatch_size,
            learning_rate,
            epochs,
            replay_threshold,
            objective,
            reward_sign,
            horizon,
            eval_seeds,
            max_degree,
            max_qubits,
            swap_as_one,
            full_scale,
            out_dir,
        } => {
            let args = TrainArgs {
                circuit,
                out_dir: out_dir.unwrap_or_else(|| default_out_dir("train")),
                config_file: config,
                seed,
                iterations,
                batch_size,
                minibatch_size,
                learning_rate,
                epochs,
                replay_threshold,
                objective,
                reward_sign,
                horizon,
                eval_seeds,
                max_degree,
                max_qubits,
                swap_as_one,
                full_scale,
            };
            let summary = cmd_train(&args)?;
            println!(
                "{} ({} qubits): baseline {:.2} -> best {:.2} ({:.1}% reduction), \
                 {} router evals, {} replay hits",
                summary.circuit,
                summary.qubits,
                summary.d0,
                summary.best_objective,
                100.0 * (summary.d0 - summary.best_objective) / summary.d0,
                summary.total_router_evals,
                summary.replay_hits
            );
            println!("artifacts: {}", args.out_dir.display());
        }
        Command::Layout {
            topology,
            restarts,
            seed,
            sparse,
            max_degree,
            out_dir,
        } => {
            let args = LayoutArgs {
                topology,
                restarts,
                seed,
                sparse,
                max_degree,
                out_dir: out_dir.unwrap_or_else(|| default_out_dir("layout")),
            };
            let summary = cmd_layout(&args)?;
            println!(
                "{} vertices placed, {} crossings (best of {} restarts)",
                summary.vertices, summary.crossings, args.restarts
            );
            println!("svg: {}", args.out_dir.join("layout.svg").display());
        }
        Command::Bench {
            source,
            seed,
            eval_seeds,
            iterations,
            replay_threshold,
            grid,
            max_degree,
            out_dir,
        } => {
            let args = BenchArgs {
                source,
                seed,
                eval_seeds,
                iterations,
                replay_threshold,
                grid,
                max_degree,
                out_dir: out_dir.unwrap_or_else(|| default_out_dir("bench")),
            };
            let summary = cmd_bench(&args)?;
            for row in &summary.rows {
                if row.status == "ok" {
                    println!(
                        "{:<24} q={} baseline {:.2} tailored {:.2} reduction {:.2}%",
                        row.circuit,
                        row.qubits,
                        row.baseline_depth,
                        row.tailored_depth,
                        row.reduction_pct
                    );
                } else {
                    println!("{:<24} q={} {}", row.circuit, row.qubits, row.status);
                }
            }
            println!(
                "{} / {} rows at or below baseline, median reduction {:.2}%",
                summary.improved_or_equal, summary.ok_rows, summary.median_reduction_pct
            );
            println!("report: {}", args.out_dir.join("bench.csv").display());
        }
        Command::Metrics { which } => match which {
            MetricsCommand::Idle {
                gates,
                qubits,
                depth,
            } => {
                let v = cmd_metrics_idle(gates, qubits, depth)?;
                println!("{v:.6}");
            }
            MetricsCommand::Fidelity { p, q } => {
                let v = cmd_metrics_fidelity(&p, &q)?;
                println!("{v:.6}");
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtopo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
