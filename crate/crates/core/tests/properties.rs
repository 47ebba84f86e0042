mod common;

use common::Chain;
use phonon_dd::dynamics::{dephasing_ops, evolve, run_schedule, Segment, DEFAULT_DT_MAX};
use phonon_dd::experiment::{preset, run_scenario_exact, sample_shots, PulseEvent, TimedPulse};
use phonon_dd::hamiltonian::{build_hopping, build_sideband, DriveParams, HoppingGraph, Sideband};
use phonon_dd::operators::{max_abs, HilbertLayout, QuantumState, Spin};
use proptest::prelude::*;
use std::f64::consts::PI;

const KAPPA: f64 = 2.0 * PI * 2.0e3;

fn echo(name: &str, t_wait: f64, label: &str) -> f64 {
    let mut s = preset(name).unwrap();
    s.dd_pulses = vec![TimedPulse {
        time: t_wait,
        pulse: PulseEvent::PhaseShift { ion: 1, theta: PI },
    }];
    s.tau_grid = vec![2.0 * t_wait];
    run_scenario_exact(&s).unwrap().column(label).unwrap()[0]
}

fn hop_plus_red(g: f64) -> (HilbertLayout, phonon_dd::operators::Operator) {
    let layout = HilbertLayout::new(2, 3).unwrap();
    let hop = build_hopping(&HoppingGraph::pair(KAPPA).unwrap(), &layout).unwrap();
    let red = build_sideband(&DriveParams::resonant(1, Sideband::Red, 2.0 * g), &layout).unwrap();
    (layout, hop.plus(&red).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn phase_shift_echo_refocuses_one_phonon(t in 1e-6..200e-6f64) {
        prop_assert!((echo("fig2b", t, "P10") - 1.0).abs() < 1e-9);
    }

    #[test]
    fn phase_shift_echo_refocuses_two_phonons(t in 1e-6..200e-6f64) {
        prop_assert!((echo("fig3b", t, "P20") - 1.0).abs() < 1e-9);
    }

    #[test]
    fn library_hamiltonian_matches_reference(g in 1e3..1e6f64) {
        let (_, h) = hop_plus_red(g);
        let chain = Chain { n: 2, d: 3 };
        let reference = chain.hopping(KAPPA) + chain.red(1, g);
        prop_assert!(max_abs(&(h.matrix() - reference)) < 1e-9 * g.max(KAPPA));
    }

    #[test]
    fn resplitting_a_segment_is_invariant(g in 1e4..3e5f64, frac in 0.05..0.95f64) {
        let (layout, h) = hop_plus_red(g);
        let psi = QuantumState::basis(layout, &[Spin::Down, Spin::Down], &[1, 0]).unwrap();
        let total = 40e-6;
        let whole = evolve(&psi, &Segment::evolve(h.clone(), total, "w"), DEFAULT_DT_MAX).unwrap();
        let a = evolve(&psi, &Segment::evolve(h.clone(), frac * total, "a"), DEFAULT_DT_MAX).unwrap();
        let b = evolve(&a, &Segment::evolve(h, (1.0 - frac) * total, "b"), DEFAULT_DT_MAX).unwrap();
        prop_assert!(max_abs(&(whole.density_matrix() - b.density_matrix())) < 1e-10);
    }

    #[test]
    fn red_sideband_and_hopping_conserve_excitations(g in 1e4..3e5f64, t in 0.0..300e-6f64, n0 in 0usize..2, up in any::<bool>()) {
        let (layout, h) = hop_plus_red(g);
        let spin = if up { Spin::Up } else { Spin::Down };
        let psi = QuantumState::basis(layout, &[spin, Spin::Down], &[n0, 0]).unwrap();
        let out = evolve(&psi, &Segment::evolve(h, t, "h"), DEFAULT_DT_MAX).unwrap();
        let before = n0 + up as usize;
        let rho = out.density_matrix();
        for i in 0..layout.dim() {
            let (spins, phonons) = layout.decode(i);
            let count: usize = phonons.iter().sum::<usize>()
                + spins.iter().filter(|s| **s == Spin::Up).count();
            if count != before {
                prop_assert!(rho[(i, i)].re.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn lindblad_keeps_a_density_matrix(g in 1e4..3e5f64, gamma in 0.0..1e5f64, t in 1e-6..30e-6f64) {
        let (layout, h) = hop_plus_red(g);
        let psi = QuantumState::basis(layout, &[Spin::Up, Spin::Down], &[1, 0]).unwrap();
        let ops = dephasing_ops(1, gamma, &layout).unwrap();
        let rho = evolve(&psi, &Segment::dissipative(h, t, ops, "d"), DEFAULT_DT_MAX).unwrap();
        prop_assert!((rho.trace() - 1.0).abs() < 1e-10);
        prop_assert!(rho.min_eigenvalue() > -1e-10);
    }

    #[test]
    fn sample_times_do_not_change_the_state(t in 1e-6..100e-6f64) {
        let (layout, h) = hop_plus_red(2e5);
        let psi = QuantumState::basis(layout, &[Spin::Down, Spin::Down], &[1, 0]).unwrap();
        let segs = vec![Segment::evolve(h, 100e-6, "h")];
        let coarse = run_schedule(&psi, &segs, &[100e-6], DEFAULT_DT_MAX).unwrap();
        let fine = run_schedule(&psi, &segs, &[t, 100e-6], DEFAULT_DT_MAX).unwrap();
        prop_assert!(max_abs(&(coarse[0].density_matrix() - fine[1].density_matrix())) < 1e-10);
    }

    #[test]
    fn shot_frequencies_track_probabilities(w in proptest::collection::vec(0.0..1.0f64, 2..5), seed in any::<u64>()) {
        let total: f64 = w.iter().sum::<f64>() + 0.5;
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        let s = sample_shots(&p, 10_000, seed).unwrap();
        for (f, q) in s.frequencies.iter().zip(&p) {
            prop_assert!((f - q).abs() < 0.03);
        }
        prop_assert!(s.counts.iter().sum::<u32>() <= 10_000);
    }
}

#[test]
fn exact_mode_is_deterministic() {
    let s = preset("fig4b").unwrap();
    let a = run_scenario_exact(&s).unwrap();
    let b = run_scenario_exact(&s).unwrap();
    assert_eq!(a, b);
}
