use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uam_tools::config::ExperimentConfig;
use uam_tools::experiment::{cmd_plan, cmd_risk_map, cmd_schedule, cmd_sweep};
use uam_tools::ToolError;

#[derive(Parser)]
#[command(name = "uam", version, about = "Risk maps, track planning and fleet scheduling experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Continuous and binary risk maps with per-layer heatmaps.
    RiskMap(Common),
    /// Shortest, initial, equivalent and optimal tracks per query.
    Plan(Common),
    /// Base plan, SOA and GA schedules with convergence traces.
    Schedule(Common),
    /// Altitude, cell-size, fleet and weight sweeps.
    Sweep(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Replaces the configured seed list.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
}

fn run(cli: Cli) -> Result<(), ToolError> {
    let (Command::RiskMap(c) | Command::Plan(c) | Command::Schedule(c) | Command::Sweep(c)) = &cli.command;
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seeds = vec![s];
    }
    let workers = c.workers.unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    match &cli.command {
        Command::RiskMap(_) => {
            for l in cmd_risk_map(&cfg, &c.out)? {
                println!("layer {} ({} m): {} unsafe cells", l.k, l.altitude, l.unsafe_cells);
            }
        }
        Command::Plan(_) => {
            for (name, r) in cmd_plan(&cfg, &c.out)? {
                match r {
                    Ok(p) => println!(
                        "{name}: risk {:.3} -> {:.3}, cost {:.4} -> {:.4}",
                        p.shortest.metrics.risk_cost, p.optimal.metrics.risk_cost, p.shortest.metrics.transport_cost, p.optimal.metrics.transport_cost
                    ),
                    Err(e) => println!("{name}: {e}"),
                }
            }
        }
        Command::Schedule(_) => {
            for r in cmd_schedule(&cfg, &c.out, workers)? {
                println!(
                    "seed {}: operated base/SOA/GA {}/{}/{}, average delay {:.1}/{:.1}/{:.1} s",
                    r.seed,
                    r.base_objective.s,
                    r.soa.best.objective.s,
                    r.ga.best.objective.s,
                    r.base_objective.t_d,
                    r.soa.best.objective.t_d,
                    r.ga.best.objective.t_d
                );
            }
        }
        Command::Sweep(_) => {
            let r = cmd_sweep(&cfg, &c.out, workers)?;
            let failed = r.altitude.iter().filter(|p| p.1.is_err()).count()
                + [&r.cell_size, &r.speed, &r.pareto].iter().map(|v| v.iter().filter(|p| p.1.is_err()).count()).sum::<usize>()
                + r.flights.iter().filter(|p| p.1.is_err()).count();
            println!("sweep done, {failed} failed points");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    // usage errors are input errors, not infeasibility
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match std::panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
