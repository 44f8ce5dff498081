//! Entanglement swapping: builds the four-photon state, applies the
//! partial-distinguishability Bell-state-measurement POVM for a cross-port
//! coincidence behind the 50:50 beam splitter, and reports the conditional
//! (1,4) state with its 45-degree-basis visibility and singlet fidelity.

use nalgebra::DMatrix;

use crate::quantum::{
    bell_state, correlation_e, embed_operator, fidelity_to_pure, measure_project, partial_trace,
    tensor, werner, BellKind, DensityMatrix, PolarizerOutcome, PolarizerSetting, C64,
};
use crate::{Result, SimError};

/// Per-source Werner visibilities of the two entangled-pair sources.
#[derive(Debug, Clone, Copy)]
pub struct SourceSpec {
    pub werner_v1: f64,
    pub werner_v2: f64,
}

impl SourceSpec {
    pub fn new(werner_v1: f64, werner_v2: f64) -> Result<Self> {
        for (name, v) in [("v1", werner_v1), ("v2", werner_v2)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::OutOfRange(format!("source visibility {name} = {v}")));
            }
        }
        Ok(Self { werner_v1, werner_v2 })
    }
}

/// Bell-state measurement quality: mode overlap of photons 2 and 3.
#[derive(Debug, Clone, Copy)]
pub struct BsmSpec {
    pub overlap: f64,
}

impl BsmSpec {
    pub fn new(overlap: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&overlap) {
            return Err(SimError::OutOfRange(format!("mode overlap = {overlap}")));
        }
        Ok(Self { overlap })
    }
}

/// Result of a heralded swap.
#[derive(Debug, Clone)]
pub struct SwapOutcome {
    /// Probability of a cross-port coincidence at the Bell-state analyzer.
    pub coincidence_prob: f64,
    /// Conditional state of photons 1 and 4.
    pub rho_14: DensityMatrix,
    /// Coincidence-curve visibility in the 45-degree basis.
    pub visibility_45: f64,
    /// <psi-| rho_14 |psi->.
    pub singlet_fidelity: f64,
}

/// werner(v1) on photons (1,2) tensor werner(v2) on photons (3,4).
pub fn four_photon_state(src: &SourceSpec) -> Result<DensityMatrix> {
    tensor(&werner(src.werner_v1)?, &werner(src.werner_v2)?)
}

/// Cross-port coincidence effect behind a 50:50 beam splitter with
/// internal-mode overlap I:
/// Pi_cc = ((1-I)/2) Pi_sym + ((1+I)/2) |psi-><psi-|.
pub fn bsm_coincidence_effect(b: &BsmSpec) -> Result<DMatrix<C64>> {
    BsmSpec::new(b.overlap)?;
    let anti = bell_state(BellKind::PsiMinus).to_density().matrix().clone();
    let sym = DMatrix::identity(4, 4) - &anti;
    Ok(sym * C64::new((1.0 - b.overlap) / 2.0, 0.0) + anti * C64::new((1.0 + b.overlap) / 2.0, 0.0))
}

/// Full heralded swap: BSM effect on photons (2,3), trace them out, and
/// characterize the conditional (1,4) state.
pub fn swap(src: &SourceSpec, b: &BsmSpec) -> Result<SwapOutcome> {
    let rho = four_photon_state(src)?;
    let effect = embed_operator(&bsm_coincidence_effect(b)?, &[2, 3], 4)?;
    let (p, conditional) = measure_project(&rho, &effect)?;
    let rho_14 = partial_trace(&conditional, &[1, 4])?;
    let visibility_45 = -correlation_e(&rho_14, 45.0, 45.0)?;
    let singlet_fidelity = fidelity_to_pure(&rho_14, &bell_state(BellKind::PsiMinus))?;
    Ok(SwapOutcome {
        coincidence_prob: p,
        rho_14,
        visibility_45,
        singlet_fidelity,
    })
}

/// Fourfold-normalized coincidence probabilities versus the photon-4
/// polarizer angle: P(transmit at `photon1_angle_deg`, transmit at theta4)
/// and P(reflect, transmit).
pub fn coincidence_curve(
    rho_14: &DensityMatrix,
    photon1_angle_deg: f64,
    theta4_grid_deg: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if theta4_grid_deg.is_empty() {
        return Err(SimError::Dimension("empty theta4 grid".into()));
    }
    let p1_t = PolarizerSetting {
        angle_deg: photon1_angle_deg,
        outcome: PolarizerOutcome::Transmit,
    }
    .projector();
    let p1_r = PolarizerSetting {
        angle_deg: photon1_angle_deg,
        outcome: PolarizerOutcome::Reflect,
    }
    .projector();
    let mut par = Vec::with_capacity(theta4_grid_deg.len());
    let mut perp = Vec::with_capacity(theta4_grid_deg.len());
    for &theta4 in theta4_grid_deg {
        let p4_t = PolarizerSetting {
            angle_deg: theta4,
            outcome: PolarizerOutcome::Transmit,
        }
        .projector();
        par.push(rho_14.expectation(&p1_t.kronecker(&p4_t)).re);
        perp.push(rho_14.expectation(&p1_r.kronecker(&p4_t)).re);
    }
    Ok((par, perp))
}

/// Joint sinusoid fit result.
#[derive(Debug, Clone, Copy)]
pub struct VisibilityFit {
    /// |b| / a of the shared sinusoid a +/- b cos 2(theta - phase).
    pub visibility: f64,
    /// Phase of the curve carrying the +cos sign, degrees in theta.
    pub phase_deg: f64,
    /// Shared offset a.
    pub offset: f64,
}

/// Least-squares fit of a + b cos 2(theta - phi) jointly to both curves
/// with a shared amplitude and opposite signs; visibility = |b| / a.
/// Works on probabilities or raw counts (the fit is scale-free).
pub fn fit_visibility(
    theta4_grid_deg: &[f64],
    parallel: &[f64],
    perpendicular: &[f64],
) -> Result<VisibilityFit> {
    let n = theta4_grid_deg.len();
    if n < 6 || parallel.len() != n || perpendicular.len() != n {
        return Err(SimError::Dimension(format!(
            "need >= 6 grid points with matching curves, got {n}/{}/{}",
            parallel.len(),
            perpendicular.len()
        )));
    }
    let span = theta4_grid_deg.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - theta4_grid_deg.iter().cloned().fold(f64::INFINITY, f64::min);
    if span < 180.0 {
        return Err(SimError::Dimension(format!(
            "theta4 grid spans {span} degrees, need >= 180"
        )));
    }
    // model: parallel_i = a - (c x_i + s y_i), perpendicular_i = a + c x_i + s y_i
    // with x = cos 2theta, y = sin 2theta. Linear least squares in (a, c, s).
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for i in 0..n {
        let two_theta = 2.0 * theta4_grid_deg[i].to_radians();
        let (x, y) = (two_theta.cos(), two_theta.sin());
        for (sign, value) in [(-1.0, parallel[i]), (1.0, perpendicular[i])] {
            let row = [1.0, sign * x, sign * y];
            for r in 0..3 {
                for c in 0..3 {
                    ata[r][c] += row[r] * row[c];
                }
                atb[r] += row[r] * value;
            }
        }
    }
    let m = DMatrix::from_fn(3, 3, |r, c| ata[r][c]);
    let rhs = nalgebra::DVector::from_row_slice(&atb);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SimError::DegenerateFit("singular normal equations".into()))?;
    let (a, c, s) = (sol[0], sol[1], sol[2]);
    if a <= 0.0 {
        return Err(SimError::DegenerateFit(format!("non-positive offset a = {a}")));
    }
    let b = (c * c + s * s).sqrt();
    Ok(VisibilityFit {
        visibility: b / a,
        phase_deg: 0.5 * s.atan2(c).to_degrees(),
        offset: a,
    })
}

/// Single-curve sinusoid fit a + b cos 2(theta - phi), b >= 0.
pub fn fit_sinusoid(theta_grid_deg: &[f64], values: &[f64]) -> Result<VisibilityFit> {
    let n = theta_grid_deg.len();
    if n < 3 || values.len() != n {
        return Err(SimError::Dimension("need >= 3 points for a sinusoid fit".into()));
    }
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for i in 0..n {
        let two_theta = 2.0 * theta_grid_deg[i].to_radians();
        let row = [1.0, two_theta.cos(), two_theta.sin()];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
            atb[r] += row[r] * values[i];
        }
    }
    let m = DMatrix::from_fn(3, 3, |r, c| ata[r][c]);
    let rhs = nalgebra::DVector::from_row_slice(&atb);
    let sol = m
        .lu()
        .solve(&rhs)
        .ok_or_else(|| SimError::DegenerateFit("singular normal equations".into()))?;
    let (a, c, s) = (sol[0], sol[1], sol[2]);
    let b = (c * c + s * s).sqrt();
    if a <= 0.0 {
        return Err(SimError::DegenerateFit(format!("non-positive offset a = {a}")));
    }
    Ok(VisibilityFit {
        visibility: b / a,
        phase_deg: 0.5 * s.atan2(c).to_degrees(),
        offset: a,
    })
}

/// Off-diagonal Bell-basis magnitude of a 2-qubit state; the swapped
/// state must be Bell-diagonal.
pub fn max_bell_offdiagonal(rho: &DensityMatrix) -> f64 {
    let mut max = 0.0f64;
    for (ai, a) in BellKind::ALL.iter().enumerate() {
        for (bi, b) in BellKind::ALL.iter().enumerate() {
            if ai == bi {
                continue;
            }
            let ket_a = bell_state(*a);
            let ket_b = bell_state(*b);
            let el = (ket_a.amplitudes().adjoint() * rho.matrix() * ket_b.amplitudes())[(0, 0)];
            max = max.max(el.norm());
        }
    }
    max
}
