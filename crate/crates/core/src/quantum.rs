//! Exact finite-dimensional state algebra for 1..4 polarization qubits.
//!
//! Convention (used across the whole crate): the computational basis of a
//! single qubit is |H> = index 0, |V> = index 1. For multi-photon states the
//! photon with the smallest label is the most significant qubit, so the
//! amplitude of |H V H V> for photons (1,2,3,4) sits at index 0b0101.
//! Qubit labels are 1-based everywhere.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

use crate::{Result, SimError};

pub type C64 = Complex<f64>;

const HERMITICITY_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = -1e-10;
const NULL_OUTCOME_TOL: f64 = 1e-15;

pub const MAX_QUBITS: usize = 4;

/// The four Bell states with fixed sign conventions:
/// |Psi+-> = (|HV> +- |VH>)/sqrt2, |Phi+-> = (|HH> +- |VV>)/sqrt2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    PsiMinus,
    PsiPlus,
    PhiMinus,
    PhiPlus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PsiMinus,
        BellKind::PsiPlus,
        BellKind::PhiMinus,
        BellKind::PhiPlus,
    ];

    /// Amplitudes over (HH, HV, VH, VV).
    pub fn amplitudes(self) -> [C64; 4] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let z = C64::new(0.0, 0.0);
        let p = C64::new(r, 0.0);
        let m = C64::new(-r, 0.0);
        match self {
            BellKind::PsiMinus => [z, p, m, z],
            BellKind::PsiPlus => [z, p, p, z],
            BellKind::PhiMinus => [p, z, z, m],
            BellKind::PhiPlus => [p, z, z, p],
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            BellKind::PsiMinus => "psi-",
            BellKind::PsiPlus => "psi+",
            BellKind::PhiMinus => "phi-",
            BellKind::PhiPlus => "phi+",
        }
    }
}

/// Normalized pure state of `n_qubits` polarization qubits.
#[derive(Debug, Clone)]
pub struct PureState {
    n_qubits: usize,
    amps: DVector<C64>,
}

impl PureState {
    pub fn new(n_qubits: usize, amps: Vec<C64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::Dimension(format!(
                "n_qubits must be 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        if amps.len() != 1 << n_qubits {
            return Err(SimError::Dimension(format!(
                "expected {} amplitudes, got {}",
                1 << n_qubits,
                amps.len()
            )));
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(SimError::InvalidState("non-finite amplitude".into()));
        }
        let norm_sq: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > 1e-12 {
            return Err(SimError::InvalidState(format!(
                "state not normalized: |psi|^2 = {norm_sq}"
            )));
        }
        Ok(Self {
            n_qubits,
            amps: DVector::from_vec(amps),
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    /// <self|other>.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.dotc(&other.amps)
    }

    pub fn tensor(&self, other: &PureState) -> Result<PureState> {
        let n = self.n_qubits + other.n_qubits;
        if n > MAX_QUBITS {
            return Err(SimError::Dimension(format!(
                "tensor product would have {n} qubits (max {MAX_QUBITS})"
            )));
        }
        let amps = self.amps.kronecker(&other.amps);
        Ok(PureState {
            n_qubits: n,
            amps: DVector::from_column_slice(amps.as_slice()),
        })
    }

    pub fn to_density(&self) -> DensityMatrix {
        let mat = &self.amps * self.amps.adjoint();
        DensityMatrix {
            n_qubits: self.n_qubits,
            mat,
        }
    }
}

/// Hermitian, trace-1, positive-semidefinite operator on 1..4 qubits.
/// Every constructor validates those invariants, so a `DensityMatrix`
/// in hand is always a physical state.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    n_qubits: usize,
    mat: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn new(n_qubits: usize, mat: DMatrix<C64>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > MAX_QUBITS {
            return Err(SimError::Dimension(format!(
                "n_qubits must be 1..={MAX_QUBITS}, got {n_qubits}"
            )));
        }
        let dim = 1 << n_qubits;
        if mat.nrows() != dim || mat.ncols() != dim {
            return Err(SimError::Dimension(format!(
                "expected {dim}x{dim} matrix, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat
            .iter()
            .any(|a| !a.re.is_finite() || !a.im.is_finite())
        {
            return Err(SimError::InvalidState("non-finite entry".into()));
        }
        let herm_dev = (&mat - mat.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm_dev > HERMITICITY_TOL {
            return Err(SimError::InvalidState(format!(
                "not Hermitian: max |rho - rho^dag| = {herm_dev:e}"
            )));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(SimError::InvalidState(format!("trace = {tr} (expected 1)")));
        }
        let min_eig = hermitian_eigenvalues(&mat)
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < PSD_TOL {
            return Err(SimError::InvalidState(format!(
                "not positive semidefinite: min eigenvalue = {min_eig:e}"
            )));
        }
        Ok(Self { n_qubits, mat })
    }

    /// The maximally mixed state 1/2^n.
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        let mat = DMatrix::from_diagonal_element(dim, dim, C64::new(1.0 / dim as f64, 0.0));
        Self { n_qubits, mat }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.mat
    }

    /// Tr(rho^2).
    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    /// Tr(op * rho).
    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        (op * &self.mat).trace()
    }
}

fn hermitian_eigenvalues(mat: &DMatrix<C64>) -> Vec<f64> {
    mat.clone().symmetric_eigen().eigenvalues.iter().cloned().collect()
}

/// Bell state as a 2-qubit pure state.
pub fn bell_state(kind: BellKind) -> PureState {
    PureState::new(2, kind.amplitudes().to_vec()).expect("Bell states are normalized")
}

/// Kronecker product of two density matrices; `a`'s qubits become the most
/// significant block.
pub fn tensor(a: &DensityMatrix, b: &DensityMatrix) -> Result<DensityMatrix> {
    let n = a.n_qubits + b.n_qubits;
    if n > MAX_QUBITS {
        return Err(SimError::Dimension(format!(
            "tensor product would have {n} qubits (max {MAX_QUBITS})"
        )));
    }
    Ok(DensityMatrix {
        n_qubits: n,
        mat: a.mat.kronecker(&b.mat),
    })
}

/// Werner state v|psi-><psi-| + (1-v) 1/4.
pub fn werner(v: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&v) || !v.is_finite() {
        return Err(SimError::OutOfRange(format!("werner parameter v = {v}")));
    }
    let singlet = bell_state(BellKind::PsiMinus).to_density();
    let mixed = DensityMatrix::maximally_mixed(2);
    let mat = singlet.mat * C64::new(v, 0.0) + mixed.mat * C64::new(1.0 - v, 0.0);
    Ok(DensityMatrix { n_qubits: 2, mat })
}

fn qubit_bit(index: usize, qubit: usize, n_qubits: usize) -> usize {
    (index >> (n_qubits - qubit)) & 1
}

/// Embeds `op` (acting on the listed qubits, most significant first) into
/// the full `n_qubits` space, identity elsewhere. Qubit labels are 1-based.
pub fn embed_operator(op: &DMatrix<C64>, targets: &[usize], n_qubits: usize) -> Result<DMatrix<C64>> {
    let k = targets.len();
    if op.nrows() != 1 << k || op.ncols() != 1 << k {
        return Err(SimError::Dimension(format!(
            "operator is {}x{} but {k} target qubits given",
            op.nrows(),
            op.ncols()
        )));
    }
    let mut seen = [false; MAX_QUBITS + 1];
    for &t in targets {
        if t == 0 || t > n_qubits {
            return Err(SimError::Dimension(format!("target qubit {t} out of 1..={n_qubits}")));
        }
        if seen[t] {
            return Err(SimError::Dimension(format!("duplicate target qubit {t}")));
        }
        seen[t] = true;
    }
    let dim = 1 << n_qubits;
    let sub_index = |full: usize| -> usize {
        targets
            .iter()
            .fold(0usize, |acc, &q| (acc << 1) | qubit_bit(full, q, n_qubits))
    };
    let rest_index = |full: usize| -> usize {
        (1..=n_qubits)
            .filter(|q| !seen[*q])
            .fold(0usize, |acc, q| (acc << 1) | qubit_bit(full, q, n_qubits))
    };
    let mut out = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if rest_index(i) == rest_index(j) {
                out[(i, j)] = op[(sub_index(i), sub_index(j))];
            }
        }
    }
    Ok(out)
}

/// Reduced state over the kept qubits (1-based labels, any order; the
/// output orders them by ascending label, smallest label most significant).
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(SimError::Dimension("partial_trace: empty keep set".into()));
    }
    let n = rho.n_qubits;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.len() != keep.len() {
        return Err(SimError::Dimension("partial_trace: duplicate qubit in keep set".into()));
    }
    if kept.iter().any(|&q| q == 0 || q > n) {
        return Err(SimError::Dimension(format!(
            "partial_trace: keep set {kept:?} out of 1..={n}"
        )));
    }
    let traced: Vec<usize> = (1..=n).filter(|q| !kept.contains(q)).collect();
    let k = kept.len();
    let dim_keep = 1 << k;
    let dim_rest = 1 << traced.len();
    let full_index = |kept_bits: usize, rest_bits: usize| -> usize {
        let mut idx = 0usize;
        for (pos, &q) in kept.iter().enumerate() {
            let bit = (kept_bits >> (k - 1 - pos)) & 1;
            idx |= bit << (n - q);
        }
        for (pos, &q) in traced.iter().enumerate() {
            let bit = (rest_bits >> (traced.len() - 1 - pos)) & 1;
            idx |= bit << (n - q);
        }
        idx
    };
    let mut out = DMatrix::zeros(dim_keep, dim_keep);
    for a in 0..dim_keep {
        for b in 0..dim_keep {
            let mut sum = C64::new(0.0, 0.0);
            for r in 0..dim_rest {
                sum += rho.mat[(full_index(a, r), full_index(b, r))];
            }
            out[(a, b)] = sum;
        }
    }
    DensityMatrix::new(k, out)
}

/// Coefficients of a 4-qubit pure state in the Bell(1,4) x Bell(2,3) basis.
/// `coefficients[a][b]` multiplies |bell_a>_{14} |bell_b>_{23}, with both
/// indices running over [`BellKind::ALL`].
pub fn bell_decompose_14_23(state: &PureState) -> Result<[[C64; 4]; 4]> {
    if state.n_qubits != 4 {
        return Err(SimError::Dimension(format!(
            "bell_decompose_14_23 needs a 4-qubit state, got {}",
            state.n_qubits
        )));
    }
    let mut coeffs = [[C64::new(0.0, 0.0); 4]; 4];
    for (ai, a) in BellKind::ALL.iter().enumerate() {
        let amp14 = a.amplitudes();
        for (bi, b) in BellKind::ALL.iter().enumerate() {
            let amp23 = b.amplitudes();
            // <basis| psi> with basis[i] = amp14[(b1 b4)] * amp23[(b2 b3)]
            let mut c = C64::new(0.0, 0.0);
            for i in 0..16 {
                let b1 = qubit_bit(i, 1, 4);
                let b2 = qubit_bit(i, 2, 4);
                let b3 = qubit_bit(i, 3, 4);
                let b4 = qubit_bit(i, 4, 4);
                let basis = amp14[(b1 << 1) | b4] * amp23[(b2 << 1) | b3];
                c += basis.conj() * state.amps[i];
            }
            coeffs[ai][bi] = c;
        }
    }
    Ok(coeffs)
}

/// Rebuilds the 4-qubit state from its Bell(1,4) x Bell(2,3) coefficients.
pub fn bell_recompose_14_23(coeffs: &[[C64; 4]; 4]) -> Result<PureState> {
    let mut amps = vec![C64::new(0.0, 0.0); 16];
    for (ai, a) in BellKind::ALL.iter().enumerate() {
        let amp14 = a.amplitudes();
        for (bi, b) in BellKind::ALL.iter().enumerate() {
            let amp23 = b.amplitudes();
            for (i, amp) in amps.iter_mut().enumerate() {
                let b1 = qubit_bit(i, 1, 4);
                let b2 = qubit_bit(i, 2, 4);
                let b3 = qubit_bit(i, 3, 4);
                let b4 = qubit_bit(i, 4, 4);
                *amp += coeffs[ai][bi] * amp14[(b1 << 1) | b4] * amp23[(b2 << 1) | b3];
            }
        }
    }
    PureState::new(4, amps)
}

/// Outcome port of a polarizer: transmit |theta>, reflect |theta + 90deg>.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolarizerOutcome {
    Transmit,
    Reflect,
}

/// Linear polarizer at `angle_deg` from the H axis.
#[derive(Debug, Clone, Copy)]
pub struct PolarizerSetting {
    pub angle_deg: f64,
    pub outcome: PolarizerOutcome,
}

impl PolarizerSetting {
    /// Rank-1 projector |theta><theta| (transmit) or its complement.
    pub fn projector(&self) -> DMatrix<C64> {
        let th = self.angle_deg.to_radians();
        let (c, s) = (th.cos(), th.sin());
        let p = DMatrix::from_row_slice(
            2,
            2,
            &[
                C64::new(c * c, 0.0),
                C64::new(c * s, 0.0),
                C64::new(c * s, 0.0),
                C64::new(s * s, 0.0),
            ],
        );
        match self.outcome {
            PolarizerOutcome::Transmit => p,
            PolarizerOutcome::Reflect => DMatrix::identity(2, 2) - p,
        }
    }
}

/// Hermitian square root of a PSD operator (tiny negative eigenvalues are
/// clamped to zero).
pub fn operator_sqrt(op: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = op.clone().symmetric_eigen();
    let sqrt_vals = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| C64::new(l.max(0.0).sqrt(), 0.0)),
    );
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt_vals) * eig.eigenvectors.adjoint()
}

/// Applies the POVM effect `E` (0 <= E <= 1): returns the outcome
/// probability Tr(E rho) and the conditional state sqrt(E) rho sqrt(E) / p.
/// A probability below 1e-15 is a null outcome.
pub fn measure_project(rho: &DensityMatrix, effect: &DMatrix<C64>) -> Result<(f64, DensityMatrix)> {
    let dim = rho.dim();
    if effect.nrows() != dim || effect.ncols() != dim {
        return Err(SimError::Dimension(format!(
            "effect is {}x{}, state dimension {dim}",
            effect.nrows(),
            effect.ncols()
        )));
    }
    let herm_dev = (effect - effect.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if herm_dev > 1e-10 {
        return Err(SimError::InvalidState("effect not Hermitian".into()));
    }
    let eigs = hermitian_eigenvalues(effect);
    if eigs.iter().any(|&l| l < -1e-10 || l > 1.0 + 1e-10) {
        return Err(SimError::InvalidState(format!(
            "effect eigenvalues outside [0,1]: {eigs:?}"
        )));
    }
    let p = rho.expectation(effect).re;
    if p < NULL_OUTCOME_TOL {
        return Err(SimError::NullOutcome);
    }
    let sqrt_e = operator_sqrt(effect);
    let cond = (&sqrt_e * &rho.mat * &sqrt_e) / C64::new(p, 0.0);
    Ok((p, DensityMatrix::new(rho.n_qubits, cond)?))
}

/// Polarization correlation coefficient E(theta_a, theta_b) =
/// P(t,t) + P(r,r) - P(t,r) - P(r,t) for a 2-qubit state.
pub fn correlation_e(rho: &DensityMatrix, theta_a_deg: f64, theta_b_deg: f64) -> Result<f64> {
    if rho.n_qubits != 2 {
        return Err(SimError::Dimension(format!(
            "correlation_e needs a 2-qubit state, got {}",
            rho.n_qubits
        )));
    }
    let sigma = |deg: f64| {
        let t = PolarizerSetting {
            angle_deg: deg,
            outcome: PolarizerOutcome::Transmit,
        }
        .projector();
        let r = PolarizerSetting {
            angle_deg: deg,
            outcome: PolarizerOutcome::Reflect,
        }
        .projector();
        t - r
    };
    let op = sigma(theta_a_deg).kronecker(&sigma(theta_b_deg));
    Ok(rho.expectation(&op).re)
}

/// <phi| rho |phi>.
pub fn fidelity_to_pure(rho: &DensityMatrix, phi: &PureState) -> Result<f64> {
    if rho.dim() != phi.dim() {
        return Err(SimError::Dimension(format!(
            "fidelity: state dim {} vs {}",
            rho.dim(),
            phi.dim()
        )));
    }
    Ok((phi.amplitudes().adjoint() * &rho.mat * phi.amplitudes())[(0, 0)].re)
}
