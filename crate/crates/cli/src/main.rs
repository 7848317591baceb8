use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use noma_link::analytic::{self, Stage};
use noma_link::channel::{generate_trajectory, simulate_per_batched};
use noma_link::optimize::{solve_p1, OptProblem};
use noma_link::runner::{self, LoadedConfig};

#[derive(Parser)]
#[command(name = "noma", version, about = "Packet error rates of a two-user NOMA uplink with SIC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every closed-form quantity at the configured point.
    Analytic(Common),
    /// Run the configured sweep and write CSV.
    Sweep(Common),
    /// Monte-Carlo packet error rates at the configured point.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Also write one fading trajectory of this many milliseconds as CSV.
        #[arg(long, requires = "trajectory_out")]
        trajectory_ms: Option<f64>,
        #[arg(long)]
        trajectory_out: Option<PathBuf>,
    },
    /// Compare closed forms against simulation; exit 0 pass, 2 warn, 1 fail.
    Validate(Common),
    /// Optimal power allocation under a stage-1 PER cap.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Cap on the stage-1 PER, in (0, 1].
        #[arg(long)]
        epsilon: f64,
        /// Width of the final search bracket.
        #[arg(long, default_value_t = OptProblem::DEFAULT_TOLERANCE)]
        tolerance: f64,
    },
    /// Print a built-in figure configuration.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(runner::PRESET_NAMES))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    /// Configuration file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    /// Use a built-in configuration instead of a file.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(runner::PRESET_NAMES))]
    preset: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    packets: Option<u64>,
    /// Write results here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Parallel work units for Monte-Carlo runs; results do not depend on it.
    #[arg(long, default_value_t = 64)]
    batches: usize,
    /// Write the effective configuration, in exact SI keys, to this file.
    #[arg(long)]
    dump_config: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<LoadedConfig> {
        let mut cfg = match (&self.config, &self.preset) {
            (Some(path), _) => runner::load_config(path)?,
            (None, Some(name)) => runner::preset(name)?.0,
            (None, None) => bail!("either --config or --preset is required"),
        };
        if let Some(seed) = self.seed {
            cfg.sim.seed = seed;
        }
        if let Some(packets) = self.packets {
            if packets == 0 {
                bail!("--packets must be >= 1");
            }
            cfg.sim.num_packets = packets;
        }
        if let Some(sweep) = cfg.sweep.as_mut() {
            sweep.sim = cfg.sim;
        }
        if let Some(path) = &self.dump_config {
            std::fs::write(path, cfg.to_toml()).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(cfg)
    }

    fn output(&self) -> Result<Box<dyn Write>> {
        open_output(self.out.as_deref())
    }
}

fn open_output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn analytic_report(loaded: &LoadedConfig, out: &mut dyn Write) -> Result<()> {
    let c = &loaded.system;
    let g = c.gamma_th();
    writeln!(out, "n_antennas = {}", c.n_antennas())?;
    writeln!(out, "alpha1 = {:e}", c.alpha1())?;
    writeln!(out, "snr_db = {:e}", c.snr_db())?;
    writeln!(out, "gamma_th = {g:e}")?;
    writeln!(out, "t_packet_s = {:e}", c.t_packet_s())?;
    writeln!(out, "doppler1_hz = {:e}", c.doppler1_hz())?;
    writeln!(out, "doppler2_hz = {:e}", c.doppler2_hz())?;
    for (stage, tag) in [(Stage::Stage1, "1"), (Stage::Stage2, "2")] {
        writeln!(out, "cdf{tag} = {:e}", analytic::cdf(stage, c, g)?)?;
        writeln!(out, "lcr{tag} = {:e}", analytic::lcr(stage, c, g)?)?;
    }
    let bound = analytic::per_stage2_bound(c);
    for (name, b) in [("per1", bound.stage1), ("per2_cond", bound.stage2_conditional)] {
        writeln!(out, "{name} = {:e}", b.total)?;
        writeln!(out, "{name}_lcr_penalty = {:e}", b.lcr_penalty)?;
        if b.degenerate {
            writeln!(out, "{name}_degenerate = true")?;
        }
    }
    writeln!(out, "per2_bound = {:e}", bound.clamped)?;
    writeln!(out, "per2_bound_raw = {:e}", bound.raw)?;
    writeln!(out, "per1_asym = {:e}", analytic::per_stage1_asymptotic(c))?;
    writeln!(out, "per2_asym = {:e}", analytic::per_stage2_asymptotic(c))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Analytic(common) => {
            let loaded = common.load()?;
            let mut out = common.output()?;
            analytic_report(&loaded, &mut out)?;
            out.flush()?;
        }
        Command::Sweep(common) => {
            let loaded = common.load()?;
            let Some(spec) = loaded.sweep.as_ref() else {
                bail!("the configuration has no [sweep] table");
            };
            let csv = runner::run_sweep(spec, common.batches);
            let mut out = common.output()?;
            out.write_all(csv.as_bytes())?;
            out.flush()?;
        }
        Command::Simulate { common, trajectory_ms, trajectory_out } => {
            let loaded = common.load()?;
            let cfg = &loaded.system;
            let sos = loaded.sim.sos_params(cfg)?;
            let e = simulate_per_batched(cfg, &sos, loaded.sim.num_packets, common.batches)?;
            let mut out = common.output()?;
            writeln!(out, "quantity,mean,std_error,trials")?;
            for (name, m) in [
                ("mc_per1", e.stage1),
                ("mc_per2_cond", e.stage2_conditional),
                ("mc_per2_uncond", e.stage2_unconditional),
            ] {
                writeln!(out, "{name},{:e},{:e},{}", m.mean, m.std_error, m.num_trials)?;
            }
            out.flush()?;
            if e.low_confidence {
                eprintln!("warning: fewer than 100 packets survived stage 1; mc_per2_cond is low confidence");
            }
            if let (Some(ms), Some(path)) = (trajectory_ms, trajectory_out) {
                let traj = generate_trajectory(cfg, &sos, ms * 1e-3)?;
                let mut w = open_output(Some(&path))?;
                traj.write_csv(&mut w, sos.seed)?;
                w.flush()?;
            }
        }
        Command::Validate(common) => {
            let loaded = common.load()?;
            let cfg = &loaded.system;
            let sos = loaded.sim.sos_params(cfg)?;
            let report = runner::run_validation(cfg, &sos, loaded.sim.num_packets, common.batches)?;
            let mut out = common.output()?;
            out.write_all(report.render().as_bytes())?;
            out.flush()?;
            return Ok(ExitCode::from(report.status.exit_code() as u8));
        }
        Command::Optimize { common, epsilon, tolerance } => {
            let loaded = common.load()?;
            let problem = OptProblem::with_tolerance(loaded.system, epsilon, tolerance)?;
            let r = solve_p1(&problem);
            let mut out = common.output()?;
            writeln!(out, "alpha_star = {:e}", r.alpha_star)?;
            writeln!(out, "objective = {:e}", r.objective)?;
            writeln!(out, "constraint_value = {:e}", r.constraint_value)?;
            writeln!(out, "feasible = {}", r.feasible)?;
            out.flush()?;
        }
        Command::Preset { name, out } => {
            let mut w = open_output(out.as_deref())?;
            w.write_all(runner::preset_text(&name)?.as_bytes())?;
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
