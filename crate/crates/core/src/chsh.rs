//! CHSH evaluation: analytic S for any two-qubit state, seeded Monte-Carlo
//! coincidence sampling, correlation estimators with multinomial
//! delta-method uncertainties, and sigma-of-violation reporting.
//!
//! Sign pattern: S = |E(t1,t4) - E(t1,t4') - E(t1',t4) - E(t1',t4')|.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::quantum::{correlation_e, DensityMatrix, PolarizerOutcome, PolarizerSetting};
use crate::{Result, SimError};

/// Polarizer angle settings, degrees.
#[derive(Debug, Clone, Copy)]
pub struct ChshSettings {
    pub theta1_deg: f64,
    pub theta1p_deg: f64,
    pub theta4_deg: f64,
    pub theta4p_deg: f64,
}

impl ChshSettings {
    /// theta1 = -22.5, theta1' = -67.5, theta4 = 0, theta4' = 45.
    pub fn paper() -> Self {
        Self {
            theta1_deg: -22.5,
            theta1p_deg: -67.5,
            theta4_deg: 0.0,
            theta4p_deg: 45.0,
        }
    }

    /// The four (theta_a, theta_b) pairs in slot order.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.theta1_deg, self.theta4_deg),
            (self.theta1_deg, self.theta4p_deg),
            (self.theta1p_deg, self.theta4_deg),
            (self.theta1p_deg, self.theta4p_deg),
        ]
    }
}

/// Fourfold coincidence counts for one settings pair; p/r = transmit/reflect.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CountTable {
    pub n_pp: u64,
    pub n_pr: u64,
    pub n_rp: u64,
    pub n_rr: u64,
}

impl CountTable {
    pub fn total(&self) -> u64 {
        self.n_pp + self.n_pr + self.n_rp + self.n_rr
    }
}

/// Correlation estimate with multinomial delta-method uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct CorrelationEstimate {
    pub e_value: f64,
    pub sigma: f64,
    pub counts: CountTable,
}

/// CHSH statistic with combined uncertainty.
#[derive(Debug, Clone, Copy)]
pub struct ChshResult {
    pub s_value: f64,
    pub s_sigma: f64,
    /// (S - 2) / sigma_S; infinite when sigma_S = 0 and S > 2.
    pub sigma_violation: f64,
}

/// S from the four correlation coefficients of a two-qubit state.
pub fn chsh_analytic(rho: &DensityMatrix, s: &ChshSettings) -> Result<f64> {
    let [p1, p2, p3, p4] = s.pairs();
    let e1 = correlation_e(rho, p1.0, p1.1)?;
    let e2 = correlation_e(rho, p2.0, p2.1)?;
    let e3 = correlation_e(rho, p3.0, p3.1)?;
    let e4 = correlation_e(rho, p4.0, p4.1)?;
    Ok((e1 - e2 - e3 - e4).abs())
}

/// Outcome probabilities (pp, pr, rp, rr) for one settings pair, optionally
/// mixed with a flat accidental background (1/4 each).
fn outcome_probabilities(
    rho: &DensityMatrix,
    theta_a_deg: f64,
    theta_b_deg: f64,
    accidental_rate: f64,
) -> Result<[f64; 4]> {
    if !(0.0..=1.0).contains(&accidental_rate) {
        return Err(SimError::OutOfRange(format!("accidental rate = {accidental_rate}")));
    }
    let proj = |deg: f64, outcome| PolarizerSetting { angle_deg: deg, outcome }.projector();
    let mut probs = [0.0f64; 4];
    let outcomes = [PolarizerOutcome::Transmit, PolarizerOutcome::Reflect];
    for (ia, &oa) in outcomes.iter().enumerate() {
        for (ib, &ob) in outcomes.iter().enumerate() {
            let op = proj(theta_a_deg, oa).kronecker(&proj(theta_b_deg, ob));
            let p = rho.expectation(&op).re.clamp(0.0, 1.0);
            probs[ia * 2 + ib] = (1.0 - accidental_rate) * p + accidental_rate * 0.25;
        }
    }
    Ok(probs)
}

/// Multinomial draw of `n_events` fourfold coincidences at one settings pair.
pub fn sample_counts<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    theta_a_deg: f64,
    theta_b_deg: f64,
    n_events: u64,
    accidental_rate: f64,
    rng: &mut R,
) -> Result<CountTable> {
    if n_events == 0 {
        return Err(SimError::OutOfRange("n_events must be > 0".into()));
    }
    let probs = outcome_probabilities(rho, theta_a_deg, theta_b_deg, accidental_rate)?;
    let total: f64 = probs.iter().sum();
    let mut cells = [0u64; 4];
    for _ in 0..n_events {
        let mut u: f64 = rng.random::<f64>() * total;
        let mut cell = 3;
        for (i, &p) in probs.iter().enumerate() {
            if u < p {
                cell = i;
                break;
            }
            u -= p;
        }
        cells[cell] += 1;
    }
    Ok(CountTable {
        n_pp: cells[0],
        n_pr: cells[1],
        n_rp: cells[2],
        n_rr: cells[3],
    })
}

/// E = (n_pp + n_rr - n_pr - n_rp)/N with sigma = sqrt((1 - E^2)/N).
pub fn estimate_e(counts: &CountTable) -> Result<CorrelationEstimate> {
    let n = counts.total();
    if n == 0 {
        return Err(SimError::OutOfRange("empty count table".into()));
    }
    let n_f = n as f64;
    let e = (counts.n_pp as f64 + counts.n_rr as f64 - counts.n_pr as f64 - counts.n_rp as f64) / n_f;
    let sigma = ((1.0 - e * e).max(0.0) / n_f).sqrt();
    Ok(CorrelationEstimate {
        e_value: e,
        sigma,
        counts: *counts,
    })
}

/// Combines four correlation estimates in slot order
/// (t1 t4, t1 t4', t1' t4, t1' t4').
pub fn chsh_estimate(
    e1: &CorrelationEstimate,
    e2: &CorrelationEstimate,
    e3: &CorrelationEstimate,
    e4: &CorrelationEstimate,
) -> ChshResult {
    let s = (e1.e_value - e2.e_value - e3.e_value - e4.e_value).abs();
    let s_sigma =
        (e1.sigma * e1.sigma + e2.sigma * e2.sigma + e3.sigma * e3.sigma + e4.sigma * e4.sigma).sqrt();
    let sigma_violation = if s_sigma > 0.0 {
        (s - 2.0) / s_sigma
    } else if s > 2.0 {
        f64::INFINITY
    } else {
        f64::NEG_INFINITY
    };
    ChshResult {
        s_value: s,
        s_sigma,
        sigma_violation,
    }
}

/// Full Monte-Carlo CHSH run: one multinomial sample per settings pair.
/// Each pair draws from its own deterministic RNG stream of the root seed,
/// so shard layout cannot change the outcome.
pub fn run_chsh_experiment(
    rho: &DensityMatrix,
    settings: &ChshSettings,
    events_per_setting: u64,
    accidental_rate: f64,
    seed: u64,
) -> Result<(ChshResult, [CorrelationEstimate; 4])> {
    if events_per_setting < 10 {
        return Err(SimError::OutOfRange(format!(
            "events_per_setting must be >= 10, got {events_per_setting}"
        )));
    }
    let mut estimates = Vec::with_capacity(4);
    for (i, (a, b)) in settings.pairs().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64 + 1);
        let counts = sample_counts(rho, a, b, events_per_setting, accidental_rate, &mut rng)?;
        estimates.push(estimate_e(&counts)?);
    }
    let est: [CorrelationEstimate; 4] = [estimates[0], estimates[1], estimates[2], estimates[3]];
    Ok((chsh_estimate(&est[0], &est[1], &est[2], &est[3]), est))
}
