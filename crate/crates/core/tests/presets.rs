use phonon_dd::experiment::{preset, PulseEvent, PRESETS};
use phonon_dd::hamiltonian::Sideband;
use std::f64::consts::PI;

fn khz(rad_per_s: f64) -> f64 {
    rad_per_s / (2.0 * PI * 1e3)
}

#[test]
fn experimental_hopping_rates() {
    assert!((khz(preset("fig5b").unwrap().graph.kappa(0, 1)) - 1.9).abs() < 1e-12);
    assert!((khz(preset("fig6b").unwrap().graph.kappa(0, 1)) - 1.76).abs() < 1e-12);
    for name in ["fig2a", "fig2b", "fig3a", "fig3b", "fig4a", "fig4b"] {
        assert!((khz(preset(name).unwrap().graph.kappa(1, 0)) - 2.0).abs() < 1e-12, "{name}");
    }
}

#[test]
fn phase_shift_presets_use_strong_dispersive_coupling() {
    for name in ["fig2b", "fig3b"] {
        let s = preset(name).unwrap();
        assert_eq!(s.dd_pulses.len(), 1);
        let tp = s.dd_pulses[0];
        assert!((tp.time - 62.5e-6).abs() < 1e-15);
        match tp.pulse {
            PulseEvent::Dispersive { ion, chi, instantaneous, .. } => {
                assert_eq!(ion, 1);
                assert!(instantaneous);
                assert!((chi / s.graph.kappa(0, 1) - 50.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}

#[test]
fn red_sideband_echo_is_25_kappa() {
    let s = preset("fig4b").unwrap();
    match s.dd_pulses[0].pulse {
        PulseEvent::Drive { drive, instantaneous, .. } => {
            assert_eq!(drive.sideband, Sideband::Red);
            assert!(!instantaneous);
            assert!((drive.rabi / s.graph.kappa(0, 1) - 25.0).abs() < 1e-9);
        }
        other => panic!("{other:?}"),
    }
    assert!((s.dd_pulses[0].pulse.duration() - 20e-6).abs() < 1e-12);
}

#[test]
fn multi_pulse_schedule_and_grid() {
    let s = preset("fig6b").unwrap();
    let starts: Vec<f64> = s.dd_pulses.iter().map(|p| p.time * 1e6).collect();
    for (got, want) in starts.iter().zip([50.0, 172.5, 295.0, 417.5]) {
        assert!((got - want).abs() < 1e-9);
    }
    let last = s.dd_pulses.last().unwrap();
    assert!(((last.time + last.pulse.duration()) * 1e6 - 440.0).abs() < 1e-6);
    for p in &s.dd_pulses {
        assert_eq!(p.pulse.ion(), Some(1));
    }
    let grid: Vec<f64> = s.tau_grid.iter().map(|t| t * 1e6).collect();
    assert!(grid.windows(2).all(|w| w[1] > w[0]));
    assert!((grid[0]).abs() < 1e-9 && (grid.last().unwrap() - 1000.0).abs() < 1e-9);
    let step = |a: f64| {
        let i = grid.iter().position(|t| (t - a).abs() < 1e-9).unwrap();
        grid[i + 1] - grid[i]
    };
    assert!((step(40.0) - 10.0).abs() < 1e-9);
    assert!((step(100.0) - 5.0).abs() < 1e-9);
    assert!((step(500.0) - 10.0).abs() < 1e-9);
}

#[test]
fn every_preset_validates() {
    for p in &PRESETS {
        let s = preset(p.name).unwrap();
        s.validate().unwrap();
        assert_eq!(s.name, p.name);
        assert!(!s.observables.is_empty());
    }
}
