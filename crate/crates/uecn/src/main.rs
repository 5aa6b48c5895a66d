use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use uecn::config::Selection;
use uecn::{run_pipeline, RunConfig, Stage};
use uecn_core::deploy::VelocityMode;

#[derive(Parser)]
#[command(name = "uecn", version, about = "Underwater emergency communication network simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// Run configuration (TOML). Without it the default scenario is generated.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the run seed.
    #[arg(short, long, global = true)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(short, long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    no_qlearning: bool,
    #[arg(long, global = true)]
    no_sarsa: bool,
    #[arg(long, global = true)]
    no_dqn: bool,
    #[arg(long, global = true)]
    velocity_mode: Option<Mode>,
    #[arg(long, global = true)]
    selection: Option<Pick>,
    /// Repeat for stage timings.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    /// Suppress notices and the summary.
    #[arg(short, long, global = true)]
    quiet: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Verb {
    /// Write the scenario file.
    Generate,
    /// Partition nodes into direct, relayed and isolated (needs rl.json).
    Erm,
    /// Learn relay choices.
    Rl,
    /// Plan AUVs for the isolated nodes (needs partition.json).
    Deploy,
    /// Search the time/energy front (needs partition.json).
    Mop,
    /// Every stage in order.
    All,
    /// Write CSV series from the artifacts present.
    Plots,
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    Verbatim,
    Corrected,
}

#[derive(ValueEnum, Clone, Copy)]
enum Pick {
    Knee,
    EnergyEfficiency,
}

fn stages(v: Verb) -> Vec<Stage> {
    match v {
        Verb::Generate => vec![Stage::Generate],
        Verb::Erm => vec![Stage::Erm],
        Verb::Rl => vec![Stage::Rl],
        Verb::Deploy => vec![Stage::Deploy],
        Verb::Mop => vec![Stage::Mop],
        Verb::All => Stage::ALL.to_vec(),
        Verb::Plots => vec![Stage::Plots],
    }
}

fn run(cli: &Cli) -> uecn::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out_dir = o.clone();
    }
    cfg.rl.qlearning &= !cli.no_qlearning;
    cfg.rl.sarsa &= !cli.no_sarsa;
    cfg.rl.dqn &= !cli.no_dqn;
    if let Some(m) = cli.velocity_mode {
        cfg.deploy.velocity_mode = match m {
            Mode::Verbatim => VelocityMode::Verbatim,
            Mode::Corrected => VelocityMode::Corrected,
        };
    }
    if let Some(p) = cli.selection {
        cfg.mop.selection = match p {
            Pick::Knee => Selection::Knee,
            Pick::EnergyEfficiency => Selection::EnergyEfficiency,
        };
    }

    let out = run_pipeline(&cfg, &stages(cli.verb))?;
    if cli.verbose > 0 {
        for (stage, t) in &out.timings {
            eprintln!("{:>8}  {:.3} s", stage.name(), t.as_secs_f64());
        }
    }
    if cli.quiet {
        return Ok(());
    }
    let r = &out.report;
    for n in &r.notices {
        eprintln!("notice: {n}");
    }
    if let Some(p) = &r.partition {
        println!("direct {}  relayed {}  isolated {}", p.direct, p.relayed, p.isolated);
    }
    if let Some(rl) = &r.rl {
        for m in &rl.per_method {
            println!("{:<10} mean reward {:.1} b/s", m.method.name(), m.mean_reward);
        }
        println!("best-of    mean reward {:.1} b/s (nearest relay {:.1})", rl.best_of_methods, rl.nearest_relay);
    }
    if let Some(d) = &r.deployment {
        println!(
            "deployment x1 {} x2 {} W: makespan {:.1} s, energy {:.4e} J, feasible {}",
            d.x1, d.x2, d.makespan, d.total_energy, d.feasible
        );
    }
    if let Some(m) = &r.mop {
        if let Some(p) = &m.selected {
            println!(
                "selected x1 {} x2 {:.4} W: f1 {:.1} s, f2 {:.4e} J ({} archived)",
                p.x1, p.x2, p.f1, p.f2, m.archive_size
            );
        }
        if let Some(s) = m.time_saving_percent {
            println!("makespan saving vs one AUV: {s:.1}%");
        }
    }
    println!("wrote {} files to {}", r.files.len() + 1, cfg.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
