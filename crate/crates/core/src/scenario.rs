//! Flat key-value scenario files.
//!
//! Format: one `key = value` per line, `#` starts a comment, blank lines
//! ignored. Keys carry explicit units (e.g. `pump1_fwhm_fs`). Unknown keys
//! are rejected. Every omitted key takes the paper-preset default, so an
//! empty file is a valid scenario.

use std::fmt::Write as _;
use std::path::Path;

use crate::chsh::ChshSettings;
use crate::swap::SourceSpec;
use crate::sync::{CavityPair, KerrCoupling};
use crate::wavepacket::{FilterSpec, PulseKind, PulseShape};
use crate::{Result, SimError};

#[derive(Debug, Clone)]
pub struct Scenario {
    pub v1: f64,
    pub v2: f64,
    pub filter_center_nm: f64,
    pub filter_fwhm_nm: f64,
    pub pump1_shape: PulseKind,
    pub pump1_fwhm_fs: f64,
    pub pump2_shape: PulseKind,
    pub pump2_fwhm_fs: f64,
    pub rep_rate_mhz: f64,
    pub detuning_fs: f64,
    pub kerr_strength_fs: f64,
    pub kerr_width_fs: f64,
    pub sync_noise_rms_fs: f64,
    pub sync_rounds: usize,
    /// Bypass the sync simulation and use this RMS jitter directly.
    pub jitter_override_fs: Option<f64>,
    /// Bypass the wavepacket model and use this mode overlap directly.
    pub overlap_override: Option<f64>,
    pub theta1_deg: f64,
    pub theta1p_deg: f64,
    pub theta4_deg: f64,
    pub theta4p_deg: f64,
    pub events_per_setting: u64,
    pub accidental_rate: f64,
    pub theta4_grid_step_deg: f64,
    pub photon1_angle_deg: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self::paper()
    }
}

impl Scenario {
    /// The paper preset: 90%-visibility sources, 2.8 nm filters at 788 nm,
    /// 60/70 fs Gaussian pumps at 81 MHz, CHSH angles
    /// (-22.5, -67.5, 0, 45) degrees.
    pub fn paper() -> Self {
        Self {
            v1: 0.9,
            v2: 0.9,
            filter_center_nm: 788.0,
            filter_fwhm_nm: 2.8,
            pump1_shape: PulseKind::Gaussian,
            pump1_fwhm_fs: 60.0,
            pump2_shape: PulseKind::Gaussian,
            pump2_fwhm_fs: 70.0,
            rep_rate_mhz: 81.0,
            detuning_fs: 0.0,
            kerr_strength_fs: 4.0,
            kerr_width_fs: 8.0,
            sync_noise_rms_fs: 1.0,
            sync_rounds: 100_000,
            jitter_override_fs: None,
            overlap_override: None,
            theta1_deg: -22.5,
            theta1p_deg: -67.5,
            theta4_deg: 0.0,
            theta4p_deg: 45.0,
            events_per_setting: 300,
            accidental_rate: 0.0,
            theta4_grid_step_deg: 10.0,
            photon1_angle_deg: 45.0,
        }
    }

    pub fn sources(&self) -> Result<SourceSpec> {
        SourceSpec::new(self.v1, self.v2)
    }

    pub fn filter(&self) -> Result<FilterSpec> {
        FilterSpec::new(self.filter_center_nm, self.filter_fwhm_nm)
    }

    pub fn pumps(&self) -> Result<(PulseShape, PulseShape)> {
        Ok((
            PulseShape::new(self.pump1_shape, self.pump1_fwhm_fs)?,
            PulseShape::new(self.pump2_shape, self.pump2_fwhm_fs)?,
        ))
    }

    pub fn cavities(&self) -> Result<CavityPair> {
        CavityPair::new(self.rep_rate_mhz, self.detuning_fs)
    }

    pub fn kerr(&self) -> Result<KerrCoupling> {
        KerrCoupling::new(self.kerr_strength_fs, self.kerr_width_fs)
    }

    pub fn chsh_settings(&self) -> ChshSettings {
        ChshSettings {
            theta1_deg: self.theta1_deg,
            theta1p_deg: self.theta1p_deg,
            theta4_deg: self.theta4_deg,
            theta4p_deg: self.theta4p_deg,
        }
    }

    pub fn theta4_grid(&self) -> Vec<f64> {
        let step = self.theta4_grid_step_deg;
        let n = (360.0 / step).round() as usize;
        (0..=n).map(|i| i as f64 * step).collect()
    }

    /// Whole-scenario validation: every field passes its module-level
    /// constructor.
    pub fn validate(&self) -> Result<()> {
        self.sources()?;
        self.filter()?;
        self.pumps()?;
        self.cavities()?;
        self.kerr()?;
        if !(self.sync_noise_rms_fs >= 0.0) {
            return Err(field_err("sync_noise_rms_fs", "must be >= 0"));
        }
        if self.sync_rounds == 0 {
            return Err(field_err("sync_rounds", "must be > 0"));
        }
        if let Some(j) = self.jitter_override_fs {
            if !(j >= 0.0) {
                return Err(field_err("jitter_override_fs", "must be >= 0"));
            }
        }
        if let Some(o) = self.overlap_override {
            if !(0.0..=1.0).contains(&o) {
                return Err(field_err("overlap_override", "must be in [0,1]"));
            }
        }
        if self.events_per_setting < 10 {
            return Err(field_err("events_per_setting", "must be >= 10"));
        }
        if !(0.0..=1.0).contains(&self.accidental_rate) {
            return Err(field_err("accidental_rate", "must be in [0,1]"));
        }
        if !(self.theta4_grid_step_deg > 0.0) || self.theta4_grid_step_deg > 60.0 {
            return Err(field_err("theta4_grid_step_deg", "must be in (0, 60]"));
        }
        if !self.photon1_angle_deg.is_finite() {
            return Err(field_err("photon1_angle_deg", "must be finite"));
        }
        Ok(())
    }

    /// Echo of the fully resolved scenario in the file format.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let shape = |k: PulseKind| match k {
            PulseKind::Gaussian => "gaussian",
            PulseKind::Sech2 => "sech2",
        };
        let _ = writeln!(s, "v1 = {}", self.v1);
        let _ = writeln!(s, "v2 = {}", self.v2);
        let _ = writeln!(s, "filter_center_nm = {}", self.filter_center_nm);
        let _ = writeln!(s, "filter_fwhm_nm = {}", self.filter_fwhm_nm);
        let _ = writeln!(s, "pump1_shape = {}", shape(self.pump1_shape));
        let _ = writeln!(s, "pump1_fwhm_fs = {}", self.pump1_fwhm_fs);
        let _ = writeln!(s, "pump2_shape = {}", shape(self.pump2_shape));
        let _ = writeln!(s, "pump2_fwhm_fs = {}", self.pump2_fwhm_fs);
        let _ = writeln!(s, "rep_rate_mhz = {}", self.rep_rate_mhz);
        let _ = writeln!(s, "detuning_fs = {}", self.detuning_fs);
        let _ = writeln!(s, "kerr_strength_fs = {}", self.kerr_strength_fs);
        let _ = writeln!(s, "kerr_width_fs = {}", self.kerr_width_fs);
        let _ = writeln!(s, "sync_noise_rms_fs = {}", self.sync_noise_rms_fs);
        let _ = writeln!(s, "sync_rounds = {}", self.sync_rounds);
        if let Some(j) = self.jitter_override_fs {
            let _ = writeln!(s, "jitter_override_fs = {j}");
        }
        if let Some(o) = self.overlap_override {
            let _ = writeln!(s, "overlap_override = {o}");
        }
        let _ = writeln!(s, "theta1_deg = {}", self.theta1_deg);
        let _ = writeln!(s, "theta1p_deg = {}", self.theta1p_deg);
        let _ = writeln!(s, "theta4_deg = {}", self.theta4_deg);
        let _ = writeln!(s, "theta4p_deg = {}", self.theta4p_deg);
        let _ = writeln!(s, "events_per_setting = {}", self.events_per_setting);
        let _ = writeln!(s, "accidental_rate = {}", self.accidental_rate);
        let _ = writeln!(s, "theta4_grid_step_deg = {}", self.theta4_grid_step_deg);
        let _ = writeln!(s, "photon1_angle_deg = {}", self.photon1_angle_deg);
        s
    }
}

fn field_err(field: &str, message: &str) -> SimError {
    SimError::Scenario {
        location: format!("field {field}"),
        message: message.into(),
    }
}

fn parse_err(line_no: usize, message: impl Into<String>) -> SimError {
    SimError::Scenario {
        location: format!("line {line_no}"),
        message: message.into(),
    }
}

/// Parses scenario text; omitted keys fall back to the paper preset.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut sc = Scenario::paper();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, format!("expected `key = value`, got `{line}`")))?;
        let key = key.trim();
        let value = value.trim();
        let f = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .map_err(|_| parse_err(line_no, format!("`{v}` is not a number (key {key})")))
        };
        let shape = |v: &str| -> Result<PulseKind> {
            match v.to_ascii_lowercase().as_str() {
                "gaussian" => Ok(PulseKind::Gaussian),
                "sech2" => Ok(PulseKind::Sech2),
                other => Err(parse_err(
                    line_no,
                    format!("`{other}` is not a pulse shape (gaussian | sech2)"),
                )),
            }
        };
        match key {
            "v1" => sc.v1 = f(value)?,
            "v2" => sc.v2 = f(value)?,
            "filter_center_nm" => sc.filter_center_nm = f(value)?,
            "filter_fwhm_nm" => sc.filter_fwhm_nm = f(value)?,
            "pump1_shape" => sc.pump1_shape = shape(value)?,
            "pump1_fwhm_fs" => sc.pump1_fwhm_fs = f(value)?,
            "pump2_shape" => sc.pump2_shape = shape(value)?,
            "pump2_fwhm_fs" => sc.pump2_fwhm_fs = f(value)?,
            "rep_rate_mhz" => sc.rep_rate_mhz = f(value)?,
            "detuning_fs" => sc.detuning_fs = f(value)?,
            "kerr_strength_fs" => sc.kerr_strength_fs = f(value)?,
            "kerr_width_fs" => sc.kerr_width_fs = f(value)?,
            "sync_noise_rms_fs" => sc.sync_noise_rms_fs = f(value)?,
            "sync_rounds" => {
                sc.sync_rounds = value
                    .parse::<usize>()
                    .map_err(|_| parse_err(line_no, format!("`{value}` is not a round count")))?
            }
            "jitter_override_fs" => sc.jitter_override_fs = Some(f(value)?),
            "overlap_override" => sc.overlap_override = Some(f(value)?),
            "theta1_deg" => sc.theta1_deg = f(value)?,
            "theta1p_deg" => sc.theta1p_deg = f(value)?,
            "theta4_deg" => sc.theta4_deg = f(value)?,
            "theta4p_deg" => sc.theta4p_deg = f(value)?,
            "events_per_setting" => {
                sc.events_per_setting = value
                    .parse::<u64>()
                    .map_err(|_| parse_err(line_no, format!("`{value}` is not an event count")))?
            }
            "accidental_rate" => sc.accidental_rate = f(value)?,
            "theta4_grid_step_deg" => sc.theta4_grid_step_deg = f(value)?,
            "photon1_angle_deg" => sc.photon1_angle_deg = f(value)?,
            unknown => return Err(parse_err(line_no, format!("unknown key `{unknown}`"))),
        }
    }
    sc.validate()?;
    Ok(sc)
}

/// Loads a scenario from disk; the literal name `paper` resolves to the
/// built-in preset.
pub fn load_scenario(path: &str) -> Result<Scenario> {
    if path == "paper" {
        return Ok(Scenario::paper());
    }
    let text = std::fs::read_to_string(Path::new(path)).map_err(|source| SimError::Io {
        path: path.to_string(),
        source,
    })?;
    parse_scenario(&text)
}
