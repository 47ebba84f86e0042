use anyhow::Context;
use clap::{Parser, Subcommand};
use phonon_dd::calibrate::calibrate_dephasing;
use phonon_dd::experiment::config::{resolve_scenario, Overrides};
use phonon_dd::experiment::{run_scenario, PRESETS};
use phonon_dd::io::{write_csv, RunManifest};
use phonon_dd::selftest::run_selftest;
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

/// Local-phonon hopping and dynamical-decoupling simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Worker threads for the τ sweep (default: available parallelism).
    #[arg(long, env = "PHONON_DD_THREADS", global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or scenario file and write CSV plus a manifest sidecar.
    Run {
        /// Preset name or path to a scenario file.
        scenario: String,
        /// Scenario fragment layered on top, e.g. from calibrate-dephasing.
        #[arg(long)]
        overlay: Option<PathBuf>,
        /// Shots per point; 0 gives exact probabilities.
        #[arg(long)]
        shots: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        /// Largest integrator step in ns.
        #[arg(long)]
        dt_max: Option<f64>,
        /// Replace the τ grid by a uniform one with this step in µs.
        #[arg(long)]
        tau_step: Option<f64>,
        /// Output CSV (default: <scenario name>.csv).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the built-in presets.
    Presets,
    /// Fit the sideband dephasing rate to a blue-sideband π-pulse infidelity.
    CalibrateDephasing {
        /// Target infidelity in [0, 0.5).
        #[arg(long, default_value_t = 0.08)]
        target: f64,
        /// Scenario supplying the sideband Rabi frequency and Fock cutoff.
        #[arg(long, default_value = "fig5b")]
        scenario: String,
        /// Where to write the overlay file.
        #[arg(long, default_value = "dephasing.toml")]
        out: PathBuf,
    },
    /// Check the structural invariants and print a pass/fail report.
    Selftest,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(command: Command) -> anyhow::Result<ExitCode> {
    match command {
        Command::Run {
            scenario,
            overlay,
            shots,
            seed,
            dt_max,
            tau_step,
            out,
        } => {
            let mut s = resolve_scenario(&scenario, overlay.as_deref())?;
            Overrides {
                shots,
                seed,
                dt_max_ns: dt_max,
                tau_step_us: tau_step,
            }
            .apply(&mut s)?;
            let out = out.unwrap_or_else(|| PathBuf::from(format!("{}.csv", s.name)));
            let start = Instant::now();
            let series = run_scenario(&s)?;
            let elapsed = start.elapsed().as_secs_f64();
            let file = File::create(&out).with_context(|| format!("creating {}", out.display()))?;
            write_csv(&series, BufWriter::new(file))?;
            let manifest = RunManifest::new(&s, rayon::current_num_threads(), elapsed, &out);
            let sidecar = RunManifest::sidecar_path(&out);
            std::fs::write(&sidecar, manifest.to_json())
                .with_context(|| format!("writing {}", sidecar.display()))?;
            println!("wrote {} ({} points, {elapsed:.2} s)", out.display(), series.len());
        }
        Command::Presets => {
            for p in &PRESETS {
                println!("{:<6}  {:<12}  {}", p.name, p.figure, p.summary);
            }
        }
        Command::CalibrateDephasing { target, scenario, out } => {
            let s = resolve_scenario(&scenario, None)?;
            let c = calibrate_dephasing(target, &s)?;
            println!(
                "gamma_s = {:.6e} rad/s (gamma_s/2pi = {:.6} kHz), transfer {:.6} after {} steps",
                c.dephasing_rate,
                c.dephasing_rate / (2.0 * std::f64::consts::PI * 1e3),
                c.transfer,
                c.iterations
            );
            std::fs::write(&out, c.overlay_toml()).with_context(|| format!("writing {}", out.display()))?;
            println!("overlay written to {}", out.display());
        }
        Command::Selftest => {
            let report = run_selftest();
            print!("{report}");
            if !report.all_passed() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
