//! End-to-end scenario runner: laser sync -> photon overlap -> heralded
//! swap -> CHSH Monte-Carlo, with a reproducible run record and CSV
//! outputs. All stochastic stages draw from fixed RNG streams of the root
//! seed, so a record's scenario + seed always reproduces its numbers.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::chsh::{run_chsh_experiment, ChshResult, CorrelationEstimate};
use crate::quantum::DensityMatrix;
use crate::scenario::Scenario;
use crate::swap::{coincidence_curve, fit_visibility, swap, BsmSpec, SwapOutcome, VisibilityFit};
use crate::sync::{cross_correlate, locking_range_fs, simulate, CrossCorrelation, SyncTrace};
use crate::wavepacket::{coherence_time_fs, mode_overlap, OverlapResult, WavepacketParams};
use crate::{Result, SimError};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Everything a completed run produced, sufficient to reproduce it.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub scenario: Scenario,
    pub seed: u64,
    pub tool_version: String,
    pub coherence_time_fs: f64,
    pub locking_range_fs: f64,
    /// None when the scenario overrides the jitter.
    pub simulated_jitter_fs: Option<f64>,
    /// Jitter actually fed into the overlap model.
    pub effective_jitter_fs: f64,
    pub overlap: OverlapResult,
    /// None when the scenario overrides the overlap.
    pub effective_overlap: f64,
    pub sync_trace: SyncTrace,
    pub cross_correlation: CrossCorrelation,
    pub swap_outcome: SwapOutcome,
    pub theta4_grid_deg: Vec<f64>,
    pub curve_parallel: Vec<f64>,
    pub curve_perpendicular: Vec<f64>,
    pub curve_fit: VisibilityFit,
    pub chsh_estimates: [CorrelationEstimate; 4],
    pub chsh: ChshResult,
}

/// Runs the full pipeline for a validated scenario.
pub fn run_pipeline(sc: &Scenario, seed: u64) -> Result<RunRecord> {
    sc.validate()?;
    let filter = sc.filter()?;
    let (pump1, pump2) = sc.pumps()?;
    let cavities = sc.cavities()?;
    let kerr = sc.kerr()?;

    let tau_c = coherence_time_fs(&filter);
    let lock_range = locking_range_fs(&kerr);

    let sync_trace = simulate(&cavities, &kerr, sc.sync_noise_rms_fs, sc.sync_rounds, seed);
    let simulated_jitter = match sc.jitter_override_fs {
        Some(_) => None,
        None => Some(crate::sync::steady_state_jitter_fs(
            &cavities,
            &kerr,
            sc.sync_noise_rms_fs,
            sc.sync_rounds,
            seed,
        )?),
    };
    let effective_jitter = sc.jitter_override_fs.or(simulated_jitter).unwrap_or(0.0);

    let p2 = WavepacketParams::new(tau_c, 0.0, pump1.fwhm_fs)?;
    let p3 = WavepacketParams::new(tau_c, effective_jitter, pump2.fwhm_fs)?;
    let overlap = mode_overlap(&p2, &p3);
    let effective_overlap = sc.overlap_override.unwrap_or(overlap.overlap);

    let cross_correlation = cross_correlate(&pump1, &pump2, effective_jitter)?;

    let swap_outcome = swap(&sc.sources()?, &BsmSpec::new(effective_overlap)?)?;

    let theta4_grid = sc.theta4_grid();
    let (curve_parallel, curve_perpendicular) =
        coincidence_curve(&swap_outcome.rho_14, sc.photon1_angle_deg, &theta4_grid)?;
    let curve_fit = fit_visibility(&theta4_grid, &curve_parallel, &curve_perpendicular)?;

    let (chsh, chsh_estimates) = run_chsh_experiment(
        &swap_outcome.rho_14,
        &sc.chsh_settings(),
        sc.events_per_setting,
        sc.accidental_rate,
        seed,
    )?;

    Ok(RunRecord {
        scenario: sc.clone(),
        seed,
        tool_version: TOOL_VERSION.to_string(),
        coherence_time_fs: tau_c,
        locking_range_fs: lock_range,
        simulated_jitter_fs: simulated_jitter,
        effective_jitter_fs: effective_jitter,
        overlap,
        effective_overlap,
        sync_trace,
        cross_correlation,
        swap_outcome,
        theta4_grid_deg: theta4_grid,
        curve_parallel,
        curve_perpendicular,
        curve_fit,
        chsh_estimates,
        chsh,
    })
}

/// 17 significant digits — enough to round-trip an f64 exactly.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

impl RunRecord {
    /// Conditional density matrix of the swapped pair, for callers that
    /// want to continue processing.
    pub fn rho_14(&self) -> &DensityMatrix {
        &self.swap_outcome.rho_14
    }

    /// The run record in the flat text format (full precision).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# run record (tool version {})", self.tool_version);
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "coherence_time_fs = {}", fmt_f64(self.coherence_time_fs));
        let _ = writeln!(s, "locking_range_fs = {}", fmt_f64(self.locking_range_fs));
        match self.simulated_jitter_fs {
            Some(j) => {
                let _ = writeln!(s, "simulated_jitter_fs = {}", fmt_f64(j));
            }
            None => {
                let _ = writeln!(s, "simulated_jitter_fs = overridden");
            }
        }
        let _ = writeln!(s, "effective_jitter_fs = {}", fmt_f64(self.effective_jitter_fs));
        let _ = writeln!(s, "overlap_timing_factor = {}", fmt_f64(self.overlap.timing_factor));
        let _ = writeln!(s, "overlap_pump_factor = {}", fmt_f64(self.overlap.pump_factor));
        let _ = writeln!(s, "overlap_model = {}", fmt_f64(self.overlap.overlap));
        let _ = writeln!(s, "overlap_effective = {}", fmt_f64(self.effective_overlap));
        let _ = writeln!(
            s,
            "cross_correlation_fwhm_fs = {}",
            fmt_f64(self.cross_correlation.fwhm_fs)
        );
        let _ = writeln!(
            s,
            "coincidence_prob = {}",
            fmt_f64(self.swap_outcome.coincidence_prob)
        );
        let _ = writeln!(s, "visibility_45 = {}", fmt_f64(self.swap_outcome.visibility_45));
        let _ = writeln!(
            s,
            "singlet_fidelity = {}",
            fmt_f64(self.swap_outcome.singlet_fidelity)
        );
        let _ = writeln!(s, "curve_fit_visibility = {}", fmt_f64(self.curve_fit.visibility));
        let _ = writeln!(s, "curve_fit_phase_deg = {}", fmt_f64(self.curve_fit.phase_deg));
        let _ = writeln!(s, "curve_fit_offset = {}", fmt_f64(self.curve_fit.offset));
        let pairs = self.scenario.chsh_settings().pairs();
        for (i, est) in self.chsh_estimates.iter().enumerate() {
            let (a, b) = pairs[i];
            let _ = writeln!(
                s,
                "E({a},{b}) = {} +- {}",
                fmt_f64(est.e_value),
                fmt_f64(est.sigma)
            );
        }
        let _ = writeln!(s, "S = {}", fmt_f64(self.chsh.s_value));
        let _ = writeln!(s, "S_sigma = {}", fmt_f64(self.chsh.s_sigma));
        let _ = writeln!(s, "sigma_violation = {}", fmt_f64(self.chsh.sigma_violation));
        let _ = writeln!(s, "");
        let _ = writeln!(s, "# scenario (fully resolved)");
        s.push_str(&self.scenario.echo());
        s
    }

    /// Summary rounded to paper precision for human comparison.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "tau_c            = {:.0} fs", self.coherence_time_fs);
        let _ = writeln!(s, "locking range    = {:.3} fs", self.locking_range_fs);
        let _ = writeln!(s, "timing jitter    = {:.3} fs (rms)", self.effective_jitter_fs);
        let _ = writeln!(s, "xcorr FWHM       = {:.1} fs", self.cross_correlation.fwhm_fs);
        let _ = writeln!(s, "mode overlap I   = {:.3}", self.effective_overlap);
        let _ = writeln!(s, "P(coincidence)   = {:.3}", self.swap_outcome.coincidence_prob);
        let _ = writeln!(s, "visibility (45)  = {:.3}", self.swap_outcome.visibility_45);
        let _ = writeln!(s, "singlet fidelity = {:.3}", self.swap_outcome.singlet_fidelity);
        let _ = writeln!(
            s,
            "S                = {:.3} +- {:.3}  ({:.1} sigma violation)",
            self.chsh.s_value, self.chsh.s_sigma, self.chsh.sigma_violation
        );
        s
    }
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| SimError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the run record plus the four CSV outputs into `dir`:
/// run_record.txt, coincidence_curve.csv, sync_trace.csv,
/// cross_correlation.csv, chsh_counts.csv.
pub fn emit_outputs(record: &RunRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| SimError::Io {
        path: dir.display().to_string(),
        source,
    })?;

    write_file(dir, "run_record.txt", &record.to_text())?;

    let mut curve = String::from("theta4_deg,p_parallel,p_perp\n");
    for (i, theta) in record.theta4_grid_deg.iter().enumerate() {
        let _ = writeln!(
            curve,
            "{},{},{}",
            fmt_f64(*theta),
            fmt_f64(record.curve_parallel[i]),
            fmt_f64(record.curve_perpendicular[i])
        );
    }
    write_file(dir, "coincidence_curve.csv", &curve)?;

    let mut trace = String::from("round,dt_fs\n");
    for (i, dt) in record.sync_trace.dt_fs.iter().enumerate() {
        let _ = writeln!(trace, "{},{}", i + 1, fmt_f64(*dt));
    }
    write_file(dir, "sync_trace.csv", &trace)?;

    let mut xc = String::from("delay_fs,signal\n");
    for (i, delay) in record.cross_correlation.delays_fs.iter().enumerate() {
        let _ = writeln!(
            xc,
            "{},{}",
            fmt_f64(*delay),
            fmt_f64(record.cross_correlation.signal[i])
        );
    }
    write_file(dir, "cross_correlation.csv", &xc)?;

    let mut counts = String::from("theta_a,theta_b,n_pp,n_pr,n_rp,n_rr\n");
    let pairs = record.scenario.chsh_settings().pairs();
    for (i, est) in record.chsh_estimates.iter().enumerate() {
        let (a, b) = pairs[i];
        let c = est.counts;
        let _ = writeln!(
            counts,
            "{},{},{},{},{},{}",
            fmt_f64(a),
            fmt_f64(b),
            c.n_pp,
            c.n_pr,
            c.n_rp,
            c.n_rr
        );
    }
    write_file(dir, "chsh_counts.csv", &counts)?;

    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_preset_pipeline_seed_42() {
        let sc = Scenario::paper();
        let record = run_pipeline(&sc, 42).unwrap();
        assert!(record.coherence_time_fs > 319.0 && record.coherence_time_fs < 333.0);
        assert!(record.effective_jitter_fs < 2.0);
        assert!(record.chsh.s_value > 2.0 && record.chsh.s_value < 2.6, "S = {}", record.chsh.s_value);
        assert!(
            record.chsh.s_sigma > 0.07 && record.chsh.s_sigma < 0.12,
            "sigma = {}",
            record.chsh.s_sigma
        );
    }

    #[test]
    fn ideal_limit_converges_to_tsirelson() {
        let mut sc = Scenario::paper();
        sc.v1 = 1.0;
        sc.v2 = 1.0;
        sc.overlap_override = Some(1.0);
        sc.jitter_override_fs = Some(0.0);
        sc.events_per_setting = 200_000;
        let record = run_pipeline(&sc, 1).unwrap();
        assert!(
            (record.chsh.s_value - 2.828_427_124_746_190_3).abs() < 0.01,
            "S = {}",
            record.chsh.s_value
        );
    }

    #[test]
    fn huge_jitter_collapses_overlap_and_s() {
        let mut sc = Scenario::paper();
        sc.jitter_override_fs = Some(500.0);
        sc.events_per_setting = 10_000;
        let record = run_pipeline(&sc, 5).unwrap();
        assert!(record.effective_overlap < 0.05, "I = {}", record.effective_overlap);
        // S statistically consistent with the no-correlation value
        assert!(record.chsh.s_value < 2.0 - 3.0 * record.chsh.s_sigma);
        assert!((record.chsh.s_value) < 4.0 * record.chsh.s_sigma + 0.1);
    }

    #[test]
    fn determinism_across_runs() {
        let sc = Scenario::paper();
        let a = run_pipeline(&sc, 7).unwrap();
        let b = run_pipeline(&sc, 7).unwrap();
        assert_eq!(a.to_text(), b.to_text());
    }

    #[test]
    fn outputs_written_and_reproducible() {
        let dir = std::env::temp_dir().join(format!("swapsim-test-{}", std::process::id()));
        let mut sc = Scenario::paper();
        sc.sync_rounds = 2000;
        let record = run_pipeline(&sc, 3).unwrap();
        emit_outputs(&record, &dir).unwrap();
        for name in [
            "run_record.txt",
            "coincidence_curve.csv",
            "sync_trace.csv",
            "cross_correlation.csv",
            "chsh_counts.csv",
        ] {
            let path = dir.join(name);
            assert!(path.exists(), "{name} missing");
        }
        let curve = fs::read_to_string(dir.join("coincidence_curve.csv")).unwrap();
        assert_eq!(
            curve.lines().count(),
            record.theta4_grid_deg.len() + 1,
            "one row per grid point plus header"
        );
        let first = fs::read_to_string(dir.join("run_record.txt")).unwrap();
        let record2 = run_pipeline(&sc, 3).unwrap();
        emit_outputs(&record2, &dir).unwrap();
        let second = fs::read_to_string(dir.join("run_record.txt")).unwrap();
        assert_eq!(first, second);
        let _ = fs::remove_dir_all(&dir);
    }
}
