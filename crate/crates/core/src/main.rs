//! Command-line runner for the entanglement-swapping simulator.
//!
//! Exit codes: 0 success, 2 scenario/validation error, 3 runtime error
//! (lost lock, null measurement outcome, I/O).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use swapsim::pipeline::{emit_outputs, fmt_f64, run_pipeline};
use swapsim::scenario::load_scenario;
use swapsim::swap::{swap, BsmSpec};
use swapsim::sync::{cross_correlate, locking_range_fs, simulate, steady_state_jitter_fs};
use swapsim::wavepacket::{coherence_time_fs, mode_overlap, WavepacketParams};
use swapsim::SimError;

#[derive(Parser)]
#[command(
    name = "swapsim",
    version,
    about = "Entanglement swapping with two synchronized pulsed photon-pair sources"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario file path, or `paper` for the built-in preset.
    #[arg(long)]
    scenario: String,
    /// Output directory for CSV/record files.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the passive laser synchronization and report the jitter.
    Sync {
        #[command(flatten)]
        common: CommonArgs,
        /// Root seed (stochastic subcommands never draw silent entropy).
        #[arg(long)]
        seed: u64,
    },
    /// Coherence time and photon mode overlap (deterministic).
    HomOverlap {
        #[command(flatten)]
        common: CommonArgs,
        /// RMS timing jitter fed to the overlap model, fs.
        #[arg(long)]
        jitter_fs: Option<f64>,
    },
    /// Heralded swap: conditional state, visibility, fidelity (deterministic).
    Swap {
        #[command(flatten)]
        common: CommonArgs,
        /// Force the BSM mode overlap I.
        #[arg(long)]
        overlap: Option<f64>,
    },
    /// Monte-Carlo CHSH experiment on the swapped state.
    Chsh {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        events_per_setting: Option<u64>,
        #[arg(long)]
        overlap: Option<f64>,
    },
    /// Full pipeline: sync -> overlap -> swap -> CHSH, with all outputs.
    Full {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        events_per_setting: Option<u64>,
        #[arg(long)]
        jitter_fs: Option<f64>,
        #[arg(long)]
        overlap: Option<f64>,
    },
}

fn exit_code_for(err: &SimError) -> u8 {
    match err {
        SimError::Scenario { .. }
        | SimError::OutOfRange(_)
        | SimError::Dimension(_)
        | SimError::InvalidState(_) => 2,
        SimError::NotLocked(_)
        | SimError::NullOutcome
        | SimError::DegenerateFit(_)
        | SimError::Io { .. } => 3,
    }
}

fn run(cli: Cli) -> Result<(), SimError> {
    match cli.command {
        Command::Sync { common, seed } => {
            let sc = load_scenario(&common.scenario)?;
            sc.validate()?;
            let cavities = sc.cavities()?;
            let kerr = sc.kerr()?;
            let jitter =
                steady_state_jitter_fs(&cavities, &kerr, sc.sync_noise_rms_fs, sc.sync_rounds, seed)?;
            println!("locking_range_fs = {}", fmt_f64(locking_range_fs(&kerr)));
            println!("steady_state_jitter_fs = {}", fmt_f64(jitter));
            if let Some(dir) = common.out {
                let trace = simulate(&cavities, &kerr, sc.sync_noise_rms_fs, sc.sync_rounds, seed);
                std::fs::create_dir_all(&dir).map_err(|source| SimError::Io {
                    path: dir.display().to_string(),
                    source,
                })?;
                let mut csv = String::from("round,dt_fs\n");
                for (i, dt) in trace.dt_fs.iter().enumerate() {
                    csv.push_str(&format!("{},{}\n", i + 1, fmt_f64(*dt)));
                }
                let path = dir.join("sync_trace.csv");
                std::fs::write(&path, csv).map_err(|source| SimError::Io {
                    path: path.display().to_string(),
                    source,
                })?;
                println!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::HomOverlap { common, jitter_fs } => {
            let sc = load_scenario(&common.scenario)?;
            sc.validate()?;
            let tau_c = coherence_time_fs(&sc.filter()?);
            let (pump1, pump2) = sc.pumps()?;
            let jitter = jitter_fs.or(sc.jitter_override_fs).unwrap_or(0.0);
            let p = WavepacketParams::new(tau_c, 0.0, pump1.fwhm_fs)?;
            let q = WavepacketParams::new(tau_c, jitter, pump2.fwhm_fs)?;
            let overlap = mode_overlap(&p, &q);
            let xc = cross_correlate(&pump1, &pump2, jitter)?;
            println!("coherence_time_fs = {}", fmt_f64(tau_c));
            println!("jitter_fs = {}", fmt_f64(jitter));
            println!("overlap_timing_factor = {}", fmt_f64(overlap.timing_factor));
            println!("overlap_pump_factor = {}", fmt_f64(overlap.pump_factor));
            println!("overlap = {}", fmt_f64(overlap.overlap));
            println!("cross_correlation_fwhm_fs = {}", fmt_f64(xc.fwhm_fs));
            Ok(())
        }
        Command::Swap { common, overlap } => {
            let sc = load_scenario(&common.scenario)?;
            sc.validate()?;
            let effective = match overlap.or(sc.overlap_override) {
                Some(o) => o,
                None => {
                    let tau_c = coherence_time_fs(&sc.filter()?);
                    let (pump1, pump2) = sc.pumps()?;
                    let jitter = sc.jitter_override_fs.unwrap_or(0.0);
                    let p = WavepacketParams::new(tau_c, 0.0, pump1.fwhm_fs)?;
                    let q = WavepacketParams::new(tau_c, jitter, pump2.fwhm_fs)?;
                    mode_overlap(&p, &q).overlap
                }
            };
            let outcome = swap(&sc.sources()?, &BsmSpec::new(effective)?)?;
            println!("overlap = {}", fmt_f64(effective));
            println!("coincidence_prob = {}", fmt_f64(outcome.coincidence_prob));
            println!("visibility_45 = {}", fmt_f64(outcome.visibility_45));
            println!("singlet_fidelity = {}", fmt_f64(outcome.singlet_fidelity));
            Ok(())
        }
        Command::Chsh {
            common,
            seed,
            events_per_setting,
            overlap,
        } => {
            let mut sc = load_scenario(&common.scenario)?;
            if let Some(n) = events_per_setting {
                sc.events_per_setting = n;
            }
            if let Some(o) = overlap {
                sc.overlap_override = Some(o);
            }
            if sc.jitter_override_fs.is_none() {
                // chsh alone does not run the sync simulation
                sc.jitter_override_fs = Some(0.0);
            }
            sc.validate()?;
            let record = run_pipeline(&sc, seed)?;
            let pairs = sc.chsh_settings().pairs();
            for (i, est) in record.chsh_estimates.iter().enumerate() {
                let (a, b) = pairs[i];
                println!(
                    "E({a},{b}) = {} +- {}",
                    fmt_f64(est.e_value),
                    fmt_f64(est.sigma)
                );
            }
            println!("S = {}", fmt_f64(record.chsh.s_value));
            println!("S_sigma = {}", fmt_f64(record.chsh.s_sigma));
            println!("sigma_violation = {}", fmt_f64(record.chsh.sigma_violation));
            Ok(())
        }
        Command::Full {
            common,
            seed,
            events_per_setting,
            jitter_fs,
            overlap,
        } => {
            let mut sc = load_scenario(&common.scenario)?;
            if let Some(n) = events_per_setting {
                sc.events_per_setting = n;
            }
            if let Some(j) = jitter_fs {
                sc.jitter_override_fs = Some(j);
            }
            if let Some(o) = overlap {
                sc.overlap_override = Some(o);
            }
            sc.validate()?;
            let record = run_pipeline(&sc, seed)?;
            print!("{}", record.summary());
            if let Some(dir) = common.out {
                emit_outputs(&record, &dir)?;
                println!("wrote outputs to {}", dir.display());
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
