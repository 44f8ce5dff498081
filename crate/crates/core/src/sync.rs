//! Passive Kerr-coupled synchronization of the two mode-locked lasers,
//! modeled as a 1-D stochastic round-trip map on the inter-pulse timing
//! offset, plus the classical SFG cross-correlator used to certify the
//! residual timing jitter.
//!
//! Round-trip map: dt' = dt + detuning - f(dt) + noise, with the pull
//! f(dt) = kappa (dt/w) exp(-dt^2 / 2 w^2) — the derivative of a Gaussian
//! intensity overlap, odd and restoring toward dt = 0. Linearizing at the
//! origin gives the contraction factor 1 - g with g = kappa / w.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::wavepacket::PulseShape;
use crate::{Result, SimError};

/// Cross-correlator delay grid spacing, fs.
const DELAY_STEP_FS: f64 = 0.1;
/// Inner time-integration step, fs.
const TIME_STEP_FS: f64 = 0.2;

/// The two laser cavities: common target repetition rate and the
/// free-running round-trip time difference per round trip.
#[derive(Debug, Clone, Copy)]
pub struct CavityPair {
    pub repetition_rate_mhz: f64,
    pub detuning_fs: f64,
}

impl CavityPair {
    pub fn new(repetition_rate_mhz: f64, detuning_fs: f64) -> Result<Self> {
        if !(repetition_rate_mhz > 0.0) {
            return Err(SimError::OutOfRange(format!(
                "repetition rate must be positive, got {repetition_rate_mhz} MHz"
            )));
        }
        if !detuning_fs.is_finite() {
            return Err(SimError::OutOfRange("non-finite detuning".into()));
        }
        Ok(Self {
            repetition_rate_mhz,
            detuning_fs,
        })
    }
}

/// Cross-phase-modulation pull: peak strength (fs per round trip, up to
/// the e^(-1/2) shape factor) and overlap width (fs).
#[derive(Debug, Clone, Copy)]
pub struct KerrCoupling {
    pub strength_fs: f64,
    pub width_fs: f64,
}

impl KerrCoupling {
    pub fn new(strength_fs: f64, width_fs: f64) -> Result<Self> {
        if !(strength_fs >= 0.0) {
            return Err(SimError::OutOfRange(format!("kerr strength must be >= 0, got {strength_fs}")));
        }
        if !(width_fs > 0.0) {
            return Err(SimError::OutOfRange(format!("kerr width must be > 0, got {width_fs}")));
        }
        Ok(Self { strength_fs, width_fs })
    }

    /// Linearized per-round-trip gain g = kappa / w.
    pub fn gain(&self) -> f64 {
        self.strength_fs / self.width_fs
    }
}

/// Timing offset between the two pulse trains after `round_index` round trips.
#[derive(Debug, Clone, Copy)]
pub struct SyncState {
    pub dt_fs: f64,
    pub round_index: u64,
}

/// Per-round-trip timing-offset trace.
#[derive(Debug, Clone)]
pub struct SyncTrace {
    pub dt_fs: Vec<f64>,
}

impl SyncTrace {
    /// RMS of the trace after discarding the first `burn_in` rounds.
    pub fn rms_after(&self, burn_in: usize) -> f64 {
        let tail = &self.dt_fs[burn_in.min(self.dt_fs.len())..];
        if tail.is_empty() {
            return 0.0;
        }
        (tail.iter().map(|x| x * x).sum::<f64>() / tail.len() as f64).sqrt()
    }
}

/// SFG cross-correlation trace, peak-normalized to 1.
#[derive(Debug, Clone)]
pub struct CrossCorrelation {
    pub delays_fs: Vec<f64>,
    pub signal: Vec<f64>,
    pub fwhm_fs: f64,
}

/// Timing pull per round trip: f(dt) = kappa (dt/w) exp(-dt^2/2w^2).
pub fn pull_fs(dt_fs: f64, k: &KerrCoupling) -> f64 {
    let x = dt_fs / k.width_fs;
    k.strength_fs * x * (-0.5 * x * x).exp()
}

/// One round trip of both cavities.
pub fn step<R: Rng + ?Sized>(
    s: &SyncState,
    cavities: &CavityPair,
    k: &KerrCoupling,
    noise_rms_fs: f64,
    rng: &mut R,
) -> SyncState {
    let noise = if noise_rms_fs > 0.0 {
        Normal::new(0.0, noise_rms_fs).expect("finite rms").sample(rng)
    } else {
        0.0
    };
    SyncState {
        dt_fs: s.dt_fs + cavities.detuning_fs - pull_fs(s.dt_fs, k) + noise,
        round_index: s.round_index + 1,
    }
}

/// Largest |detuning| with a stable locked fixed point: max_dt f(dt) =
/// kappa e^(-1/2).
pub fn locking_range_fs(k: &KerrCoupling) -> f64 {
    k.strength_fs * (-0.5f64).exp()
}

fn check_locked(cavities: &CavityPair, k: &KerrCoupling) -> Result<()> {
    let g = k.gain();
    if !(0.0 < g && g < 2.0) {
        return Err(SimError::NotLocked(format!(
            "contraction factor |1-g| >= 1 (g = kappa/w = {g})"
        )));
    }
    let range = locking_range_fs(k);
    if cavities.detuning_fs.abs() > range {
        return Err(SimError::NotLocked(format!(
            "detuning {} fs exceeds locking range {range} fs",
            cavities.detuning_fs
        )));
    }
    Ok(())
}

/// Iterates the round-trip map from dt = 0 for `n_rounds`, deterministic
/// per seed.
pub fn simulate(
    cavities: &CavityPair,
    k: &KerrCoupling,
    noise_rms_fs: f64,
    n_rounds: usize,
    seed: u64,
) -> SyncTrace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = SyncState { dt_fs: 0.0, round_index: 0 };
    let mut dts = Vec::with_capacity(n_rounds);
    for _ in 0..n_rounds {
        s = step(&s, cavities, k, noise_rms_fs, &mut rng);
        dts.push(s.dt_fs);
    }
    SyncTrace { dt_fs: dts }
}

/// RMS timing offset in the locked steady state (after a 10% burn-in).
/// Linearized expectation: sigma_n / sqrt(1 - (1-g)^2).
pub fn steady_state_jitter_fs(
    cavities: &CavityPair,
    k: &KerrCoupling,
    noise_rms_fs: f64,
    n_rounds: usize,
    seed: u64,
) -> Result<f64> {
    check_locked(cavities, k)?;
    if noise_rms_fs == 0.0 && cavities.detuning_fs == 0.0 {
        return Ok(0.0);
    }
    let trace = simulate(cavities, k, noise_rms_fs, n_rounds, seed);
    // a trajectory escaping far past the pull peak has lost lock
    let escape = 20.0 * k.width_fs + 10.0 * noise_rms_fs;
    if trace.dt_fs.iter().any(|dt| dt.abs() > escape) {
        return Err(SimError::NotLocked(format!(
            "trajectory escaped beyond {escape} fs"
        )));
    }
    Ok(trace.rms_after(n_rounds / 10))
}

/// Closed-form linearized steady-state RMS for white noise of RMS sigma.
pub fn ar1_jitter_fs(k: &KerrCoupling, noise_rms_fs: f64) -> f64 {
    let a = 1.0 - k.gain();
    noise_rms_fs / (1.0 - a * a).sqrt()
}

/// SFG cross-correlation of two pulse intensity profiles, averaged over
/// Gaussian jitter of the relative delay; peak normalized to 1 and FWHM
/// found by linear interpolation at half maximum.
pub fn cross_correlate(p1: &PulseShape, p2: &PulseShape, jitter_rms_fs: f64) -> Result<CrossCorrelation> {
    if !(jitter_rms_fs >= 0.0) {
        return Err(SimError::OutOfRange(format!("jitter rms must be >= 0, got {jitter_rms_fs}")));
    }
    let combined = (p1.fwhm_fs * p1.fwhm_fs + p2.fwhm_fs * p2.fwhm_fs).sqrt();
    let half_range = 5.0 * combined + 5.0 * jitter_rms_fs;
    let n_delay = (2.0 * half_range / DELAY_STEP_FS).ceil() as usize + 1;
    let delays: Vec<f64> = (0..n_delay)
        .map(|i| -half_range + i as f64 * DELAY_STEP_FS)
        .collect();

    // bare correlation C(tau) = integral I1(t) I2(t - tau) dt
    let t_half = 5.0 * combined;
    let n_t = (2.0 * t_half / TIME_STEP_FS).ceil() as usize + 1;
    let mut bare: Vec<f64> = delays
        .iter()
        .map(|&tau| {
            let mut acc = 0.0;
            for it in 0..n_t {
                let t = -t_half + it as f64 * TIME_STEP_FS;
                acc += p1.intensity(t) * p2.intensity(t - tau);
            }
            acc * TIME_STEP_FS
        })
        .collect();

    // jitter average: convolve with the Gaussian delay distribution
    if jitter_rms_fs > 0.0 {
        let half_kernel = (5.0 * jitter_rms_fs / DELAY_STEP_FS).ceil() as isize;
        let kernel: Vec<f64> = (-half_kernel..=half_kernel)
            .map(|i| {
                let x = i as f64 * DELAY_STEP_FS;
                (-0.5 * x * x / (jitter_rms_fs * jitter_rms_fs)).exp()
            })
            .collect();
        let ksum: f64 = kernel.iter().sum();
        let mut smeared = vec![0.0; bare.len()];
        for (i, out) in smeared.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, kv) in kernel.iter().enumerate() {
                let idx = i as isize + j as isize - half_kernel;
                if idx >= 0 && (idx as usize) < bare.len() {
                    acc += kv * bare[idx as usize];
                }
            }
            *out = acc / ksum;
        }
        bare = smeared;
    }

    let peak = bare.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(SimError::InvalidState("cross-correlation signal vanished".into()));
    }
    let signal: Vec<f64> = bare.iter().map(|v| v / peak).collect();
    let fwhm = fwhm_by_interpolation(&delays, &signal)?;
    Ok(CrossCorrelation {
        delays_fs: delays,
        signal,
        fwhm_fs: fwhm,
    })
}

fn fwhm_by_interpolation(x: &[f64], y: &[f64]) -> Result<f64> {
    let (imax, _) = y
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| SimError::InvalidState("empty signal".into()))?;
    let half = 0.5;
    let cross = |i0: usize, i1: usize| -> f64 {
        let (x0, x1, y0, y1) = (x[i0], x[i1], y[i0], y[i1]);
        x0 + (half - y0) * (x1 - x0) / (y1 - y0)
    };
    let mut left = None;
    for i in (1..=imax).rev() {
        if y[i - 1] < half && y[i] >= half {
            left = Some(cross(i - 1, i));
            break;
        }
    }
    let mut right = None;
    for i in imax..x.len() - 1 {
        if y[i] >= half && y[i + 1] < half {
            right = Some(cross(i + 1, i));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(SimError::InvalidState("signal never falls to half maximum".into())),
    }
}

/// Jitter deduced from a measured cross-correlation FWHM by subtracting
/// the pulse-duration contribution in quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JitterBound {
    /// RMS jitter, fs.
    Estimate { rms_fs: f64 },
    /// Measured width at or below the zero-jitter width; the correlator
    /// cannot resolve the jitter. Carries the zero-jitter FWHM as the
    /// resolution bound.
    BelowResolution { resolution_fwhm_fs: f64 },
}

const GAUSSIAN_FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3; // 2 sqrt(2 ln 2)

pub fn infer_jitter_bound(
    measured_fwhm_fs: f64,
    p1: &PulseShape,
    p2: &PulseShape,
) -> Result<JitterBound> {
    if !(measured_fwhm_fs > 0.0) {
        return Err(SimError::OutOfRange(format!(
            "measured FWHM must be positive, got {measured_fwhm_fs}"
        )));
    }
    let deconvolved = cross_correlate(p1, p2, 0.0)?.fwhm_fs;
    if measured_fwhm_fs <= deconvolved {
        return Ok(JitterBound::BelowResolution {
            resolution_fwhm_fs: deconvolved,
        });
    }
    let excess = measured_fwhm_fs * measured_fwhm_fs - deconvolved * deconvolved;
    Ok(JitterBound::Estimate {
        rms_fs: excess.sqrt() / GAUSSIAN_FWHM_PER_SIGMA,
    })
}
