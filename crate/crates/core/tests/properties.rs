use dicke_core::analytic::appc_g2_approx;
use dicke_core::dissipation::{chi, Ohmic};
use dicke_core::dynamics::{stationary_state, PauliPropagator};
use dicke_core::model::{build_hamiltonian, build_operators};
use dicke_core::qoptical::QoModel;
use dicke_core::spectral::diagonalize;
use dicke_core::{DressedModel, ModelParams};
use faer::Mat;
use proptest::prelude::*;

fn small_model(n: usize, g: f64, g_prime: f64, n_max: usize) -> DressedModel {
    DressedModel::new(&ModelParams::new(n, g, g_prime, 0.1).with_n_max(n_max)).unwrap()
}

fn normalized(raw: &[f64]) -> Vec<f64> {
    let s: f64 = raw.iter().sum();
    raw.iter().map(|x| x / s).collect()
}

/// Random distribution over `d` levels built from `weights`, cycled as needed.
fn distribution(weights: &[f64], d: usize) -> Vec<f64> {
    normalized(&(0..d).map(|i| weights[i % weights.len()] * (1.0 + i as f64 * 1e-3)).collect::<Vec<_>>())
}

fn coupling() -> impl Strategy<Value = (usize, f64, f64)> {
    (1usize..=2, 0.05f64..0.8, 0.0f64..=1.0).prop_map(|(n, g, r)| (n, g, r * g))
}

fn tc_hamiltonian(n: usize, g: f64, n_max: usize) -> Mat<f64> {
    let p = ModelParams::new(n, g, 0.0, 0.1).with_n_max(n_max);
    build_hamiltonian(&p, &build_operators(&p).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn hamiltonian_is_symmetric(n in 1usize..=3, g in 0.0f64..1.0, ratio in 0.0f64..=1.0, n_max in 2usize..10) {
        let p = ModelParams::new(n, g, ratio * g, 0.1).with_n_max(n_max);
        let h = build_hamiltonian(&p, &build_operators(&p).unwrap()).unwrap();
        let scale = (0..h.nrows()).flat_map(|i| (0..h.ncols()).map(move |j| (i, j))).map(|(i, j)| h[(i, j)].abs()).fold(0.0, f64::max);
        for i in 0..h.nrows() {
            for j in 0..i {
                prop_assert!((h[(i, j)] - h[(j, i)]).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn rotating_wave_blocks_are_linear_in_coupling(n in 1usize..=3, g1 in 0.05f64..1.0, g2 in 0.05f64..1.0, n_max in 2usize..8) {
        let p = ModelParams::new(n, 0.0, 0.0, 0.1).with_n_max(n_max);
        let ops = build_operators(&p).unwrap();
        let bare = tc_hamiltonian(n, 0.0, n_max);
        let (h1, h2) = (tc_hamiltonian(n, g1, n_max), tc_hamiltonian(n, g2, n_max));
        let d = bare.nrows();
        for i in 0..d {
            prop_assert!((bare[(i, i)] - ops.n_total[(i, i)]).abs() < 1e-14);
            for j in 0..d {
                let (c1, c2) = ((h1[(i, j)] - bare[(i, j)]) / g1, (h2[(i, j)] - bare[(i, j)]) / g2);
                prop_assert!((c1 - c2).abs() < 1e-12);
                if ops.n_total[(i, i)] != ops.n_total[(j, j)] {
                    prop_assert_eq!(h1[(i, j)], 0.0);
                }
            }
        }
    }

    #[test]
    fn rotating_wave_eigenvectors_do_not_depend_on_coupling(n in 1usize..=3, n_max in 2usize..8) {
        let weak = diagonalize(tc_hamiltonian(n, 0.1, n_max).as_ref(), 1e-9).unwrap();
        let strong = tc_hamiltonian(n, 0.5, n_max);
        for k in 0..weak.dim() {
            let v = weak.vectors.col(k);
            let hv = &strong * v;
            let e: f64 = v.transpose() * &hv;
            let defect = (0..hv.nrows()).map(|i| (hv[i] - e * v[i]).abs()).fold(0.0, f64::max);
            prop_assert!(defect < 1e-8, "level {k}: {defect}");
        }
    }

    #[test]
    fn kms_relation(omega in 1e-3f64..10.0, t in 0.01f64..2.0, gamma in 1e-4f64..1.0) {
        prop_assume!(omega / t < 600.0);
        let bath = Ohmic { gamma, omega_ref: 1.0 };
        let (down, up) = (chi(omega, t, &bath), chi(-omega, t, &bath));
        prop_assert!(down >= 0.0 && up >= 0.0);
        let want = (-omega / t).exp() * down;
        prop_assert!((up - want).abs() <= 1e-10 * want);
    }

    #[test]
    fn emission_rates_vanish_upward_at_zero_temperature(omega in 1e-3f64..10.0) {
        let bath = Ohmic { gamma: 1e-2, omega_ref: 1.0 };
        prop_assert_eq!(chi(-omega, 0.0, &bath), 0.0);
    }

    #[test]
    fn propagation_conserves_trace_and_positivity(
        (n, g, g_prime) in coupling(),
        t in 0.05f64..0.5,
        weights in prop::collection::vec(0.0f64..1.0, 8),
        time in 0.0f64..3000.0,
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-3);
        let m = small_model(n, g, g_prime, 8);
        let point = m.thermal(t).unwrap();
        let prop = m.propagator(&point).unwrap();
        let p0 = distribution(&weights, m.eigen.dim());
        let p = prop.propagate(&p0, time).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        prop_assert!(p.iter().cloned().fold(f64::INFINITY, f64::min) >= -1e-12);
    }

    #[test]
    fn propagation_is_a_semigroup(
        (n, g, g_prime) in coupling(),
        t in 0.05f64..0.5,
        weights in prop::collection::vec(0.0f64..1.0, 8),
        t1 in 0.0f64..500.0,
        t2 in 0.0f64..500.0,
    ) {
        prop_assume!(weights.iter().sum::<f64>() > 1e-3);
        let m = small_model(n, g, g_prime, 8);
        let point = m.thermal(t).unwrap();
        let prop = m.propagator(&point).unwrap();
        let p0 = distribution(&weights, m.eigen.dim());
        let direct = prop.propagate(&p0, t1 + t2).unwrap();
        let stepped = prop.propagate(&prop.propagate(&p0, t1).unwrap(), t2).unwrap();
        let dev = direct.iter().zip(&stepped).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-9, "{dev}");
    }

    #[test]
    fn relaxation_forgets_the_initial_distribution(
        g in 0.05f64..0.4,
        dicke in any::<bool>(),
        t in 0.1f64..0.5,
        first in prop::collection::vec(0.01f64..1.0, 6),
        second in prop::collection::vec(0.01f64..1.0, 6),
    ) {
        let m = small_model(1, g, if dicke { g } else { 0.0 }, 8);
        let point = m.thermal(t).unwrap();
        let prop = m.propagator(&point).unwrap();
        let d = m.eigen.dim();
        let horizon = 50.0 / m.params.gamma;
        let a = prop.propagate(&distribution(&first, d), horizon).unwrap();
        let b = prop.propagate(&distribution(&second, d), horizon).unwrap();
        let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        prop_assert!(dev < 1e-7, "{dev}");
    }

    #[test]
    fn stationary_state_is_boltzmann_and_residual_free((n, g, g_prime) in coupling(), t in 0.02f64..0.5) {
        let m = small_model(n, g, g_prime, 10);
        let point = m.thermal(t).unwrap();
        let s = &point.stationary;
        prop_assert!(s.residual < 1e-9);
        prop_assert!((s.populations.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(s.populations.iter().all(|&p| p >= 0.0));
        let z = point.rates.z.iter();
        prop_assert!(z.clone().all(|z| z.re > 0.0));
        let g = point.rates.generator();
        for k in 0..g.ncols() {
            let col: f64 = (0..g.nrows()).map(|i| g[(i, k)]).sum();
            prop_assert!(col.abs() < 1e-14 * (1.0 + g[(k, k)].abs()));
        }
    }

    #[test]
    fn ground_state_is_stable_at_zero_temperature((n, g, g_prime) in coupling()) {
        let m = small_model(n, g, g_prime, 10);
        let point = m.thermal(0.0).unwrap();
        let prop = PauliPropagator::new(&m.eigen, &point.rates, 0.0).unwrap();
        let mut ground = vec![0.0; m.eigen.dim()];
        ground[0] = 1.0;
        let gen = prop.generator();
        prop_assert!((0..gen.nrows()).all(|i| gen[(i, 0)] == 0.0));
        let stat = stationary_state(&m.eigen, &point.rates, 0.0).unwrap();
        prop_assert_eq!(stat.populations, ground);
    }

    #[test]
    fn transition_groups_are_consistent((n, g, g_prime) in coupling()) {
        let m = small_model(n, g, g_prime, 8);
        let e = &m.eigen.energies;
        for ts in &m.transitions {
            for grp in &ts.groups {
                prop_assert!(ts.groups.iter().any(|o| o.omega == -grp.omega));
                for &(a, b) in &grp.entries {
                    // ⟨a|[H, S_ω]|b⟩ = (E_a − E_b)⟨a|S|b⟩ must equal −ω⟨a|S|b⟩
                    prop_assert!((e[b] - e[a] - grp.omega).abs() <= 1e-8);
                    let (x, y) = (ts.matrix[(a, b)], ts.matrix[(b, a)]);
                    prop_assert!((x - y.conj()).norm() == 0.0);
                }
            }
        }
    }

    #[test]
    fn spectrum_peaks_are_physical((n, g, g_prime) in coupling(), t in 0.02f64..0.5) {
        let m = small_model(n, g, g_prime, 10);
        let point = m.thermal(t).unwrap();
        let grid: Vec<f64> = (1..200).map(|k| k as f64 * 0.015).collect();
        let spec = m.spectrum(&point, &grid).unwrap();
        for p in &spec.peaks {
            prop_assert!(p.center > 0.0 && p.half_width > 0.0 && p.weight >= 0.0);
        }
        prop_assert!(spec.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn g2_kernel_is_real((n, g, g_prime) in coupling(), t in 0.05f64..0.5) {
        let m = small_model(n, g, g_prime, 8);
        let point = m.thermal(t).unwrap();
        let times: Vec<f64> = (0..40).map(|k| k as f64 * 25.0).collect();
        let res = m.g2_time(&point, &times).unwrap();
        prop_assert!(res.imaginary_residue < 1e-10);
        prop_assert!(res.g2_zero >= 0.0);
    }

    /// Below the second/third level crossing the refined approximation is at
    /// least as accurate as the basic one.
    #[test]
    fn refined_approximation_is_not_worse(g in 0.05f64..0.34, t in 0.02f64..0.3) {
        let m = small_model(1, g, 0.0, 60);
        let numeric = m.g2_zero(&m.thermal(t).unwrap()).unwrap().value;
        let refined = appc_g2_approx(g, t, true).unwrap();
        let basic = appc_g2_approx(g, t, false).unwrap();
        prop_assert!(refined.valid);
        let err = |v: f64| (v / numeric - 1.0).abs();
        prop_assert!(err(refined.value) <= err(basic.value) + 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn master_equation_state_is_physical(g in 0.05f64..0.8, dicke in any::<bool>(), t in 0.05f64..0.4, n_max in 3usize..6) {
        let p = ModelParams::new(1, g, if dicke { g } else { 0.0 }, t).with_n_max(n_max);
        let qo = QoModel::new(&p).unwrap();
        let l = &qo.liouvillian;
        let dim = qo.dim();
        for col in 0..l.ncols() {
            let trace: faer::c64 = (0..dim).map(|i| l[(i * dim + i, col)]).sum();
            prop_assert!(trace.norm() < 1e-10);
        }
        let state = qo.stationary().unwrap();
        prop_assert!(state.min_eigenvalue >= -1e-8);
        prop_assert!(state.hermiticity_error < 1e-10);
    }
}

#[test]
fn refined_approximation_overcorrects_near_level_crossing() {
    // Just below g = 0.4 the |2,−⟩ and |1,+⟩ contributions overshoot slightly.
    let (g, t) = (0.4, 0.08);
    let m = small_model(1, g, 0.0, 60);
    let numeric = m.g2_zero(&m.thermal(t).unwrap()).unwrap().value;
    let refined = appc_g2_approx(g, t, true).unwrap().value;
    let basic = appc_g2_approx(g, t, false).unwrap().value;
    let (er, eb) = ((refined / numeric - 1.0).abs(), (basic / numeric - 1.0).abs());
    assert!(er > eb && er - eb < 1e-3, "refined {er}, basic {eb}");
}
