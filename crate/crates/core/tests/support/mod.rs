//! Shared test-only machinery: the second-quantized beam-splitter oracle
//! and random state generators. Nothing here touches the library's POVM
//! construction.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use swapsim::quantum::{C64, DensityMatrix, PureState};

/// Cross-port coincidence probability operator on the polarization space
/// of two photons entering a 50:50 beam splitter, computed from first
/// principles in second quantization.
///
/// Photon 2 enters port a in internal mode m0; photon 3 enters port b in
/// internal mode chi = sqrt(I) m0 + sqrt(1-I) m1 (amplitude overlap
/// sqrt(I)). Beam splitter: a -> (c + d)/sqrt2, b -> (c - d)/sqrt2. The
/// returned 4x4 matrix M satisfies P_cc = Tr(M rho_pol) for any two-photon
/// polarization state.
pub fn beam_splitter_coincidence_matrix(overlap: f64) -> DMatrix<C64> {
    assert!((0.0..=1.0).contains(&overlap));
    let chi = [overlap.sqrt(), (1.0 - overlap).sqrt()];
    // output modes indexed port*4 + pol*2 + internal, port 0 = c, 1 = d
    let mode = |port: usize, pol: usize, internal: usize| port * 4 + pol * 2 + internal;
    let n_modes = 8;
    let n_pairs = n_modes * n_modes; // sorted-pair table, (i <= j) used
    // beta[k] = two-photon amplitudes over sorted mode pairs for
    // computational-basis polarization input k = p*2 + q
    let mut beta = vec![vec![0.0f64; n_pairs]; 4];
    for p in 0..2 {
        for q in 0..2 {
            let k = p * 2 + q;
            for (j, &cj) in chi.iter().enumerate() {
                if cj == 0.0 {
                    continue;
                }
                // (c_{p,0} + d_{p,0})(c_{q,j} - d_{q,j}) / 2
                for (port2, sign2) in [(0usize, 1.0f64), (1, 1.0)] {
                    for (port3, sign3) in [(0usize, 1.0f64), (1, -1.0)] {
                        let m2 = mode(port2, p, 0);
                        let m3 = mode(port3, q, j);
                        let (lo, hi) = (m2.min(m3), m2.max(m3));
                        beta[k][lo * n_modes + hi] += sign2 * sign3 * cj / 2.0;
                    }
                }
            }
        }
    }
    // M_{k,l} = sum over cross-port pairs i < j of conj(beta^k) beta^l
    let port_of = |m: usize| m / 4;
    let mut out = DMatrix::zeros(4, 4);
    for k in 0..4 {
        for l in 0..4 {
            let mut acc = 0.0;
            for i in 0..n_modes {
                for j in (i + 1)..n_modes {
                    if port_of(i) != port_of(j) {
                        acc += beta[k][i * n_modes + j] * beta[l][i * n_modes + j];
                    }
                }
            }
            out[(k, l)] = Complex::new(acc, 0.0);
        }
    }
    out
}

/// Haar-ish random pure state: normalized complex Gaussian amplitudes.
pub fn random_pure_state<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> PureState {
    let dim = 1 << n_qubits;
    let mut amps: Vec<C64> = (0..dim)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex::new(re, im)
        })
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    for a in amps.iter_mut() {
        *a /= norm;
    }
    PureState::new(n_qubits, amps).expect("normalized by construction")
}

/// Random full-rank density matrix from the Ginibre ensemble: G G^dag / Tr.
pub fn random_density<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> DensityMatrix {
    let dim = 1 << n_qubits;
    let g = DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex::new(re, im)
    });
    let mut m = &g * g.adjoint();
    let tr = m.trace().re;
    m /= Complex::new(tr, 0.0);
    // symmetrize away rounding
    let m = (&m + m.adjoint()) * Complex::new(0.5, 0.0);
    DensityMatrix::new(n_qubits, m).expect("Ginibre states are physical")
}
