//! End-to-end acceptance gate. Each check prints one PASS/FAIL line;
//! run with `cargo test --test acceptance -- --nocapture` to see them all.

mod support;

use std::panic::{catch_unwind, resume_unwind, UnwindSafe};

use swapsim::chsh::{chsh_analytic, chsh_estimate, run_chsh_experiment, ChshSettings, CorrelationEstimate, CountTable};
use swapsim::quantum::{bell_decompose_14_23, bell_state, werner, BellKind};
use swapsim::swap::{bsm_coincidence_effect, coincidence_curve, fit_sinusoid, fit_visibility, swap, BsmSpec, SourceSpec};
use swapsim::sync::{ar1_jitter_fs, cross_correlate, locking_range_fs, pull_fs, steady_state_jitter_fs, CavityPair, KerrCoupling};
use swapsim::wavepacket::{coherence_time_fs, mode_overlap, FilterSpec, PulseKind, PulseShape, WavepacketParams};

const SQRT8: f64 = 2.828_427_124_746_190_3;

fn check(name: &str, body: impl FnOnce() + UnwindSafe) {
    match catch_unwind(body) {
        Ok(()) => println!("PASS  {name}"),
        Err(e) => {
            println!("FAIL  {name}");
            resume_unwind(e);
        }
    }
}

#[test]
fn criterion_01_singlet_pair_bell_decomposition() {
    check("1. two-singlet state decomposes into the four matched Bell pairs at |c| = 1/2", || {
        let state = bell_state(BellKind::PsiMinus)
            .tensor(&bell_state(BellKind::PsiMinus))
            .unwrap();
        let coeffs = bell_decompose_14_23(&state).unwrap();
        for (i, _) in BellKind::ALL.iter().enumerate() {
            for (j, _) in BellKind::ALL.iter().enumerate() {
                let mag = coeffs[i][j].norm();
                if i == j {
                    assert!((mag - 0.5).abs() < 1e-12, "matched pair ({i},{j}): |c| = {mag}");
                } else {
                    assert!(mag < 1e-12, "unmatched pair ({i},{j}): |c| = {mag}");
                }
            }
        }
    });
}

#[test]
fn criterion_02_bsm_effect_matches_beam_splitter_oracle() {
    check("2. coincidence POVM matches the second-quantized beam-splitter oracle (< 1e-9)", || {
        for overlap in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let eff = bsm_coincidence_effect(&BsmSpec::new(overlap).unwrap()).unwrap();
            let oracle = support::beam_splitter_coincidence_matrix(overlap);
            let mut worst = 0.0f64;
            for r in 0..4 {
                for c in 0..4 {
                    worst = worst.max((eff[(r, c)] - oracle[(r, c)]).norm());
                }
            }
            assert!(worst < 1e-9, "overlap {overlap}: max deviation {worst}");
        }
    });
}

#[test]
fn criterion_03_swap_closed_forms() {
    check("3. ideal-source swap matches closed forms; visibility 0.820 at overlap 0.9011", || {
        let src = SourceSpec::new(1.0, 1.0).unwrap();
        for i in 0..=10 {
            let overlap = i as f64 / 10.0;
            let out = swap(&src, &BsmSpec::new(overlap).unwrap()).unwrap();
            assert!((out.coincidence_prob - (2.0 - overlap) / 4.0).abs() < 1e-10);
            assert!((out.visibility_45 - overlap / (2.0 - overlap)).abs() < 1e-10);
            assert!(
                (out.singlet_fidelity - (1.0 + overlap) / (2.0 * (2.0 - overlap))).abs() < 1e-10
            );
        }
        let out = swap(&src, &BsmSpec::new(0.9011).unwrap()).unwrap();
        assert!((out.visibility_45 - 0.820).abs() < 0.001, "visibility {}", out.visibility_45);
    });
}

#[test]
fn criterion_04_chsh_analytic_values() {
    check("4. analytic S: singlet 2*sqrt(2); werner(0.82) 2.3193, inside 2.308 +/- 0.095", || {
        let settings = ChshSettings::paper();
        let s = chsh_analytic(&bell_state(BellKind::PsiMinus).to_density(), &settings).unwrap();
        assert!((s - SQRT8).abs() < 1e-9, "singlet S = {s}");

        let w = chsh_analytic(&werner(0.82).unwrap(), &settings).unwrap();
        assert!((w - 0.82 * SQRT8).abs() < 1e-9, "werner S = {w}");
        assert!((w - 2.3194).abs() < 5e-4);
        assert!((w - 2.308).abs() < 0.095);
    });
}

#[test]
fn criterion_05_chsh_from_published_correlations() {
    check("5. published E values give S = 2.307, sigma_S = 0.095, 3.2 sigma violation", || {
        let mk = |e_value: f64, sigma: f64| CorrelationEstimate {
            e_value,
            sigma,
            counts: CountTable::default(),
        };
        let r = chsh_estimate(
            &mk(-0.570, 0.049),
            &mk(0.583, 0.046),
            &mk(0.600, 0.049),
            &mk(0.554, 0.046),
        );
        assert!((r.s_value - 2.307).abs() < 0.001, "S = {}", r.s_value);
        assert!((r.s_sigma - 0.095).abs() < 0.001, "sigma_S = {}", r.s_sigma);
        assert!((r.sigma_violation - 3.2).abs() < 0.1, "violation = {}", r.sigma_violation);
    });
}

#[test]
fn criterion_06_monte_carlo_calibration() {
    check("6. 1000-seed Monte Carlo at 300 events/setting is unbiased and calibrated", || {
        let rho = werner(0.82).unwrap();
        let settings = ChshSettings::paper();
        let n_seeds = 1000u64;
        let mut s_values = Vec::with_capacity(n_seeds as usize);
        let mut sigma_sum = 0.0;
        for seed in 0..n_seeds {
            let (r, _) = run_chsh_experiment(&rho, &settings, 300, 0.0, seed).unwrap();
            s_values.push(r.s_value);
            sigma_sum += r.s_sigma;
        }
        let mean_s: f64 = s_values.iter().sum::<f64>() / n_seeds as f64;
        let mean_sigma = sigma_sum / n_seeds as f64;
        let var: f64 = s_values
            .iter()
            .map(|s| (s - mean_s) * (s - mean_s))
            .sum::<f64>()
            / (n_seeds - 1) as f64;
        let empirical_sd = var.sqrt();
        assert!((2.29..=2.35).contains(&mean_s), "mean S = {mean_s}");
        assert!((0.085..=0.105).contains(&mean_sigma), "mean sigma_S = {mean_sigma}");
        assert!(
            ((empirical_sd - mean_sigma) / mean_sigma).abs() < 0.15,
            "empirical sd {empirical_sd} vs mean reported {mean_sigma}"
        );
    });
}

#[test]
fn criterion_07_cross_correlation_width_and_jitter_resolution() {
    check("7. 60 x 70 fs cross-correlation FWHM 92.2 fs; 2 fs jitter shifts it < 0.3 fs", || {
        let p1 = PulseShape::new(PulseKind::Gaussian, 60.0).unwrap();
        let p2 = PulseShape::new(PulseKind::Gaussian, 70.0).unwrap();
        let clean = cross_correlate(&p1, &p2, 0.0).unwrap();
        assert!((clean.fwhm_fs - 92.2).abs() < 0.5, "FWHM = {}", clean.fwhm_fs);
        let jittered = cross_correlate(&p1, &p2, 2.0).unwrap();
        assert!(
            (jittered.fwhm_fs - clean.fwhm_fs).abs() < 0.3,
            "FWHM {} -> {}",
            clean.fwhm_fs,
            jittered.fwhm_fs
        );
    });
}

#[test]
fn criterion_08_coherence_time_dominates_jitter() {
    check("8. 2.8 nm filter at 788 nm gives tau_c = 326 fs; 2 fs offset keeps overlap > 0.999", || {
        let filter = FilterSpec::new(788.0, 2.8).unwrap();
        let tau_c = coherence_time_fs(&filter);
        assert!((tau_c - 326.0).abs() < 7.0, "tau_c = {tau_c}");
        let p = WavepacketParams::new(tau_c, 0.0, 0.0).unwrap();
        let q = WavepacketParams::new(tau_c, 2.0, 0.0).unwrap();
        let r = mode_overlap(&p, &q);
        assert!(r.timing_factor > 0.999, "timing factor = {}", r.timing_factor);
    });
}

#[test]
fn criterion_09_sync_dynamics_match_oracles() {
    check("9. locking range matches bisection (1e-3); steady-state jitter matches AR(1) (10%)", || {
        let locks = |detuning: f64, k: &KerrCoupling| -> bool {
            let mut dt = 0.0;
            for _ in 0..60_000 {
                dt = dt + detuning - pull_fs(dt, k);
                if dt.abs() > 10.0 * k.width_fs {
                    return false;
                }
            }
            true
        };
        for (kappa, w) in [(2.0, 8.0), (4.0, 8.0), (8.0, 8.0), (3.0, 4.0), (1.0, 2.0)] {
            let k = KerrCoupling::new(kappa, w).unwrap();
            let (mut lo, mut hi) = (0.0, 2.0 * kappa);
            while hi - lo > 1e-5 * kappa {
                let mid = 0.5 * (lo + hi);
                if locks(mid, &k) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let brute = 0.5 * (lo + hi);
            let closed = locking_range_fs(&k);
            assert!(
                ((closed - brute) / closed).abs() < 1e-3,
                "kappa {kappa}, w {w}: closed {closed} vs bisection {brute}"
            );
        }

        let cav = CavityPair::new(81.0, 0.0).unwrap();
        for (i, g) in [0.1, 0.5, 1.0].into_iter().enumerate() {
            let w = 8.0;
            let k = KerrCoupling::new(g * w, w).unwrap();
            let sim = steady_state_jitter_fs(&cav, &k, 0.5, 1_000_000, 900 + i as u64).unwrap();
            let analytic = ar1_jitter_fs(&k, 0.5);
            assert!(
                ((sim - analytic) / analytic).abs() < 0.10,
                "g = {g}: simulated {sim} vs analytic {analytic}"
            );
        }
    });
}

#[test]
fn criterion_10_werner_composition() {
    check("10. v = 0.9 sources at unit overlap swap to werner(0.81) (< 1e-10)", || {
        let out = swap(&SourceSpec::new(0.9, 0.9).unwrap(), &BsmSpec::new(1.0).unwrap()).unwrap();
        let target = werner(0.81).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                let d = (out.rho_14.matrix()[(r, c)] - target.matrix()[(r, c)]).norm();
                assert!(d < 1e-10, "element ({r},{c}) deviates by {d}");
            }
        }
    });
}

#[test]
fn criterion_11_coincidence_curve_shape() {
    check("11. werner(0.82) curves sit 90.0 deg out of phase; joint fit recovers 0.820", || {
        let rho = werner(0.82).unwrap();
        let grid: Vec<f64> = (0..=36).map(|i| 10.0 * i as f64).collect();
        let (par, perp) = coincidence_curve(&rho, 45.0, &grid).unwrap();

        let fit_par = fit_sinusoid(&grid, &par).unwrap();
        let fit_perp = fit_sinusoid(&grid, &perp).unwrap();
        // with b >= 0, antiphase curves carry phases 90 degrees apart (mod 180)
        let dphi = (fit_par.phase_deg - fit_perp.phase_deg).rem_euclid(180.0);
        assert!((dphi - 90.0).abs() < 0.1, "phase gap {dphi}");

        let joint = fit_visibility(&grid, &par, &perp).unwrap();
        assert!((joint.visibility - 0.820).abs() < 1e-6, "visibility {}", joint.visibility);
    });
}
