//! Temporal-spectral model of the down-converted photons.
//!
//! Narrow interference filters dominate the single-photon spectra, so the
//! wavepackets are taken as transform-limited Gaussians whose intensity
//! FWHM (the coherence time) follows from the filter bandwidth. The
//! indistinguishability scalar `I` in [0,1] fed to the Bell-state
//! measurement is the squared amplitude overlap of the two wavepackets,
//! times a factor for timing information leaked by the finite pump pulses.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::{Result, SimError};

pub const SPEED_OF_LIGHT_M_PER_S: f64 = 299_792_458.0;

/// Gaussian time-bandwidth product (intensity FWHM x frequency FWHM).
pub const GAUSSIAN_TIME_BANDWIDTH: f64 = 0.441;

/// Interference filter: center wavelength and FWHM bandwidth, both in nm.
#[derive(Debug, Clone, Copy)]
pub struct FilterSpec {
    center_nm: f64,
    fwhm_nm: f64,
}

impl FilterSpec {
    pub fn new(center_nm: f64, fwhm_nm: f64) -> Result<Self> {
        if !(center_nm > 0.0) || !(fwhm_nm > 0.0) {
            return Err(SimError::OutOfRange(format!(
                "filter wavelengths must be positive: center {center_nm} nm, fwhm {fwhm_nm} nm"
            )));
        }
        if fwhm_nm / center_nm >= 0.1 {
            return Err(SimError::OutOfRange(format!(
                "filter bandwidth {fwhm_nm} nm not narrow relative to center {center_nm} nm"
            )));
        }
        Ok(Self { center_nm, fwhm_nm })
    }

    pub fn center_nm(&self) -> f64 {
        self.center_nm
    }

    pub fn fwhm_nm(&self) -> f64 {
        self.fwhm_nm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PulseKind {
    Gaussian,
    Sech2,
}

/// Classical pump pulse: shape and intensity FWHM in fs.
#[derive(Debug, Clone, Copy)]
pub struct PulseShape {
    pub kind: PulseKind,
    pub fwhm_fs: f64,
}

impl PulseShape {
    pub fn new(kind: PulseKind, fwhm_fs: f64) -> Result<Self> {
        if !(fwhm_fs > 0.0) {
            return Err(SimError::OutOfRange(format!("pulse fwhm must be positive, got {fwhm_fs} fs")));
        }
        Ok(Self { kind, fwhm_fs })
    }

    /// Normalized intensity profile at time t (peak 1).
    pub fn intensity(&self, t_fs: f64) -> f64 {
        match self.kind {
            PulseKind::Gaussian => {
                (-4.0 * std::f64::consts::LN_2 * t_fs * t_fs / (self.fwhm_fs * self.fwhm_fs)).exp()
            }
            PulseKind::Sech2 => {
                // sech^2(t/t0) has intensity FWHM 2 ln(1+sqrt2) t0
                let t0 = self.fwhm_fs / (2.0 * (1.0 + std::f64::consts::SQRT_2).ln());
                let c = (t_fs / t0).cosh();
                1.0 / (c * c)
            }
        }
    }
}

/// Single-photon wavepacket parameters, all in fs: intensity-FWHM coherence
/// time, arrival time at the beam splitter, and the pump pulse duration
/// that produced it.
#[derive(Debug, Clone, Copy)]
pub struct WavepacketParams {
    pub coherence_fwhm_fs: f64,
    pub arrival_offset_fs: f64,
    pub pump_fwhm_fs: f64,
}

impl WavepacketParams {
    pub fn new(coherence_fwhm_fs: f64, arrival_offset_fs: f64, pump_fwhm_fs: f64) -> Result<Self> {
        if !(coherence_fwhm_fs > 0.0) {
            return Err(SimError::OutOfRange(format!(
                "coherence time must be positive, got {coherence_fwhm_fs} fs"
            )));
        }
        if !arrival_offset_fs.is_finite() || !(pump_fwhm_fs >= 0.0) {
            return Err(SimError::OutOfRange("non-finite wavepacket parameter".into()));
        }
        Ok(Self {
            coherence_fwhm_fs,
            arrival_offset_fs,
            pump_fwhm_fs,
        })
    }
}

/// Indistinguishability of the two interfering photons.
#[derive(Debug, Clone, Copy)]
pub struct OverlapResult {
    /// Total mode overlap I in [0,1].
    pub overlap: f64,
    /// Contribution from relative arrival-time offset.
    pub timing_factor: f64,
    /// Contribution from pump-leaked timing information.
    pub pump_factor: f64,
}

/// Pluggable wavepacket overlap model; the default is the separable
/// single-Schmidt-mode Gaussian model below.
pub trait OverlapModel {
    fn overlap(&self, p: &WavepacketParams, q: &WavepacketParams) -> OverlapResult;
}

/// Separable Gaussian model:
/// I = I_pump * I_timing,
/// I_timing = exp(-4 ln2 dt^2 / (tau_c2^2 + tau_c3^2))  (squared amplitude
/// overlap of two Gaussian wavepackets displaced by dt),
/// I_pump = [1 + 2 (tau_p_eff / tau_c_bar)^2]^(-1/2) with tau_p_eff the
/// larger pump FWHM and tau_c_bar the quadratic-mean coherence time.
#[derive(Debug, Default, Clone, Copy)]
pub struct GaussianOverlapModel;

impl OverlapModel for GaussianOverlapModel {
    fn overlap(&self, p: &WavepacketParams, q: &WavepacketParams) -> OverlapResult {
        let dt = p.arrival_offset_fs - q.arrival_offset_fs;
        let tc2 = p.coherence_fwhm_fs * p.coherence_fwhm_fs;
        let tc3 = q.coherence_fwhm_fs * q.coherence_fwhm_fs;
        let timing = (-4.0 * std::f64::consts::LN_2 * dt * dt / (tc2 + tc3)).exp();
        let tau_p = p.pump_fwhm_fs.max(q.pump_fwhm_fs);
        let tau_c_bar_sq = 0.5 * (tc2 + tc3);
        let pump = 1.0 / (1.0 + 2.0 * tau_p * tau_p / tau_c_bar_sq).sqrt();
        OverlapResult {
            overlap: (timing * pump).clamp(0.0, 1.0),
            timing_factor: timing,
            pump_factor: pump,
        }
    }
}

/// Coherence time (intensity FWHM, fs) of a photon behind a Gaussian
/// filter: dnu = c dlambda / lambda^2, tau_c = 0.441 / dnu.
pub fn coherence_time_fs(filter: &FilterSpec) -> f64 {
    let lambda_m = filter.center_nm * 1e-9;
    let dlambda_m = filter.fwhm_nm * 1e-9;
    let dnu_hz = SPEED_OF_LIGHT_M_PER_S * dlambda_m / (lambda_m * lambda_m);
    GAUSSIAN_TIME_BANDWIDTH / dnu_hz * 1e15
}

/// Default-model mode overlap of the two interfering photons.
pub fn mode_overlap(p: &WavepacketParams, q: &WavepacketParams) -> OverlapResult {
    GaussianOverlapModel.overlap(p, q)
}

/// Zero-mean Gaussian timing-jitter draw, fs.
pub fn sample_jitter_fs<R: Rng + ?Sized>(rms_fs: f64, rng: &mut R) -> Result<f64> {
    if !(rms_fs >= 0.0) {
        return Err(SimError::OutOfRange(format!("jitter rms must be >= 0, got {rms_fs}")));
    }
    if rms_fs == 0.0 {
        return Ok(0.0);
    }
    let normal = Normal::new(0.0, rms_fs)
        .map_err(|e| SimError::OutOfRange(format!("jitter distribution: {e}")))?;
    Ok(normal.sample(rng))
}
