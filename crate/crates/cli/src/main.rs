use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tether_core::pipeline::{
    self, export_bodies, read_plan, run_all, run_plan, run_simulate, simulation_report, write_plan,
    write_simulation, PipelineError, PLAN_FILE,
};
use tether_core::scene::{load_scene, LoadedScene};
use tether_core::Execution;

/// Plan and simulate two quadrotors carrying a slack rope.
#[derive(Parser)]
#[command(name = "tether", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scene file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the scene's RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; defaults to the scene's `output_dir`, then `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the planner's time budget (s).
    #[arg(long)]
    max_time: Option<f64>,
    /// Run everything on one thread.
    #[arg(long)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a formation path and write plan, waypoints, bodies and timing.
    Plan(Common),
    /// Fly an existing plan in the simulator.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Plan file; defaults to `plan.json` in the output directory.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Plan, then simulate.
    Run(Common),
    /// Write obstacle and body meshes along the planned motion.
    ExportBodies {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: Option<PathBuf>,
        /// Write a frame every this many control ticks.
        #[arg(long, default_value_t = 5)]
        stride: usize,
    },
}

impl Common {
    fn exec(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }

    fn load(&self) -> Result<(LoadedScene, PathBuf), PipelineError> {
        let mut scene = load_scene(&self.config)?;
        if let Some(seed) = self.seed {
            scene.config.rng_seed = seed;
        }
        if let Some(t) = self.max_time {
            scene.config.planner.max_time = t;
        }
        scene.revalidate()?;
        let out = self
            .out
            .clone()
            .or_else(|| scene.output_dir())
            .unwrap_or_else(|| PathBuf::from("out"));
        Ok((scene, out))
    }
}

fn report_simulation(report: &pipeline::SimulationReport) {
    let m = &report.mission;
    println!(
        "simulated {} ticks ({:.2} s): status {}, max tracking error {:.4} m, final errors {:.4} / {:.4} m, max |Δd| {:.4} m, collisions {}",
        m.ticks,
        m.executed_duration,
        report.status,
        m.max_tracking_error,
        m.final_error_uav1,
        m.final_error_uav2,
        m.max_d_error,
        m.collision_count
    );
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::Plan(common) => {
            let (scene, out) = common.load()?;
            let result = run_plan(&scene, common.exec())?;
            write_plan(&out, &scene, &result)?;
            let doc = &result.document;
            println!(
                "planned {} states, length {:.3} (raw {:.3}), {} tree nodes, {:.2} s; wrote {}",
                doc.states.len(),
                doc.path_length,
                doc.raw_path_length,
                doc.tree.nodes,
                result.timing.total_s,
                out.display()
            );
        }
        Command::Simulate { common, plan } => {
            let (scene, out) = common.load()?;
            let doc = read_plan(&plan.unwrap_or_else(|| out.join(PLAN_FILE)))?;
            let (log, failure) = run_simulate(&scene, &doc, common.exec())?;
            let report = simulation_report(&scene, &log, failure.as_ref());
            write_simulation(&out, &log, &report)?;
            report_simulation(&report);
            if let Some(e) = failure {
                return Err(e);
            }
        }
        Command::Run(common) => {
            let (scene, out) = common.load()?;
            let result = run_all(&scene, &out, common.exec())?;
            println!(
                "planned {} states in {:.2} s",
                result.plan.document.states.len(),
                result.plan.timing.total_s
            );
            report_simulation(&result.report);
        }
        Command::ExportBodies { common, plan, stride } => {
            let (scene, out) = common.load()?;
            let doc = read_plan(&plan.unwrap_or_else(|| out.join(PLAN_FILE)))?;
            let dir = out.join("frames");
            let n = export_bodies(&scene, &doc, &dir, stride)?;
            println!("wrote {n} frames to {}", dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
