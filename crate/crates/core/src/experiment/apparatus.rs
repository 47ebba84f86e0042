//! Compilation of pulse lists into schedule segments and channels.

use super::{PulseEvent, TimedPulse, Timing};
use crate::dynamics::{
    dephasing_ops, evolve, evolve_observable, mix, thermal_ground_state, NoiseModel, Segment,
    DEFAULT_DT_MAX, TIME_EPS,
};
use crate::error::{Error, Result};
use crate::hamiltonian::{
    build_dispersive, build_drive, build_hopping, phase_shift_unitary, rotation_unitary, HoppingGraph,
    Sideband,
};
use crate::operators::{propagator, HilbertLayout, Matrix, Operator, QuantumState};
use std::f64::consts::PI;

/// Hopping graph plus noise model for one ion chain: turns pulses into
/// segments and applies them as channels.
#[derive(Clone, Debug)]
pub struct Apparatus {
    layout: HilbertLayout,
    noise: NoiseModel,
    hopping: Operator,
    dt_max: f64,
}

impl Apparatus {
    pub fn new(layout: HilbertLayout, graph: &HoppingGraph, noise: NoiseModel, dt_max: f64) -> Result<Self> {
        noise.validate()?;
        if !(dt_max > 0.0 && dt_max.is_finite()) {
            return Err(Error::InvalidParameter(format!("dt_max = {dt_max}")));
        }
        Ok(Apparatus {
            layout,
            noise,
            hopping: build_hopping(graph, &layout)?,
            dt_max,
        })
    }

    pub fn from_scenario(s: &super::Scenario) -> Result<Self> {
        Apparatus::new(s.layout, &s.graph, s.noise, s.dt_max)
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn hopping(&self) -> &Operator {
        &self.hopping
    }

    pub fn dt_max(&self) -> f64 {
        self.dt_max
    }

    /// Drive term of a finite pulse; `None` for waits and phase shifts.
    fn drive_hamiltonian(&self, pulse: &PulseEvent) -> Result<Option<Operator>> {
        Ok(match pulse {
            PulseEvent::Drive { drive, .. } => Some(build_drive(drive, &self.layout)?),
            PulseEvent::Dispersive { ion, chi, .. } => Some(build_dispersive(*ion, *chi, &self.layout)?),
            PulseEvent::PhaseShift { .. } | PulseEvent::Wait { .. } => None,
        })
    }

    /// Dephasing active while the pulse is driven.
    fn collapse_ops(&self, pulse: &PulseEvent) -> Result<Vec<Operator>> {
        match pulse {
            PulseEvent::Drive { drive, .. } => {
                let rate = match drive.sideband {
                    Sideband::Carrier => self.noise.dephasing_carrier,
                    Sideband::Red | Sideband::Blue => self.noise.dephasing_sideband,
                };
                dephasing_ops(drive.ion, rate, &self.layout)
            }
            PulseEvent::Dispersive { ion, .. } => dephasing_ops(*ion, self.noise.dephasing_sideband, &self.layout),
            PulseEvent::PhaseShift { .. } | PulseEvent::Wait { .. } => Ok(Vec::new()),
        }
    }

    /// Ideal unitary of an instantaneous event.
    pub fn instant_unitary(&self, pulse: &PulseEvent) -> Result<Operator> {
        match *pulse {
            PulseEvent::Drive { drive, timing, .. } => {
                let theta = match timing {
                    Timing::Area(a) => a,
                    Timing::Duration(d) => drive.rabi * d,
                };
                // shifted phase so the jump agrees with a finite pulse of the same phase
                rotation_unitary(&drive.with_phase(drive.phase + PI), theta, &self.layout)
            }
            PulseEvent::Dispersive { ion, chi, .. } => {
                let h = build_dispersive(ion, chi, &self.layout)?;
                propagator(&h, pulse.nominal_duration())
            }
            PulseEvent::PhaseShift { ion, theta } => phase_shift_unitary(ion, theta, &self.layout),
            PulseEvent::Wait { .. } => Ok(Operator::identity(self.layout.dim())),
        }
    }

    /// Probability that the pulse does nothing; applies to sideband drives.
    fn failure_probability(&self, pulse: &PulseEvent) -> f64 {
        match pulse {
            PulseEvent::Drive { drive, .. } if drive.sideband != Sideband::Carrier => self.noise.prep_infidelity,
            _ => 0.0,
        }
    }

    /// A standalone pulse as a weighted set of segments. A failed pulse
    /// leaves only the background (hopping or nothing) for the same time.
    pub fn pulse_branches(&self, pulse: &PulseEvent, hopping: bool) -> Result<Vec<(f64, Segment)>> {
        pulse.validate(&self.layout)?;
        let label = format!("{:?}", pulse.kind()).to_lowercase();
        let background = if hopping {
            self.hopping.clone()
        } else {
            Operator::zeros(self.layout.dim())
        };
        let duration = pulse.nominal_duration();
        let success = if pulse.is_instantaneous() {
            Segment::unitary(self.instant_unitary(pulse)?, label.clone())
        } else {
            let h = match self.drive_hamiltonian(pulse)? {
                Some(drive) => background.plus(&drive)?,
                None => background.clone(),
            };
            Segment::dissipative(h, duration, self.collapse_ops(pulse)?, label.clone())
        };
        let eps = self.failure_probability(pulse);
        if eps == 0.0 {
            return Ok(vec![(1.0, success)]);
        }
        let idle_time = if pulse.is_instantaneous() { 0.0 } else { duration };
        let failure = Segment::evolve(background, idle_time, format!("{label} (failed)"));
        if eps == 1.0 {
            return Ok(vec![(1.0, failure)]);
        }
        Ok(vec![(1.0 - eps, success), (eps, failure)])
    }

    /// Apply pulses one after another.
    pub fn apply_pulses(&self, state: &QuantumState, pulses: &[PulseEvent], hopping: bool) -> Result<QuantumState> {
        let mut state = state.clone();
        for pulse in pulses {
            let branches = self.pulse_branches(pulse, hopping)?;
            state = if let [(_, seg)] = branches.as_slice() {
                evolve(&state, seg, self.dt_max)?
            } else {
                let parts = branches
                    .iter()
                    .map(|(w, seg)| Ok((*w, evolve(&state, seg, self.dt_max)?)))
                    .collect::<Result<Vec<_>>>()?;
                mix(&parts)?
            };
        }
        Ok(state)
    }

    /// Heisenberg picture of [`apply_pulses`](Self::apply_pulses): returns
    /// `O'` with `Tr(O' ρ) = Tr(O · pulses(ρ))`.
    pub fn pull_back(&self, observable: &Matrix, pulses: &[PulseEvent], hopping: bool) -> Result<Matrix> {
        let mut obs = observable.clone();
        for pulse in pulses.iter().rev() {
            let branches = self.pulse_branches(pulse, hopping)?;
            let mut acc = Matrix::zeros(obs.nrows(), obs.ncols());
            for (w, seg) in &branches {
                acc += evolve_observable(&obs, seg, self.dt_max)? * crate::operators::C64::from(*w);
            }
            obs = acc;
        }
        Ok(obs)
    }

    /// Initial state: spins down, modes in Fock states or thermal.
    pub fn initial_state(&self, phonons: &[usize]) -> Result<QuantumState> {
        if self.noise.thermal_occupation > 0.0 {
            if phonons.iter().any(|&n| n != 0) {
                return Err(Error::InvalidParameter(
                    "thermal occupation requires modes to start from |0⟩".into(),
                ));
            }
            thermal_ground_state(self.layout, self.noise.thermal_occupation)
        } else {
            QuantumState::fock(self.layout, phonons)
        }
    }

    /// Preparation pulses act with hopping switched off.
    pub fn prepare(&self, phonons: &[usize], prep: &[PulseEvent]) -> Result<QuantumState> {
        let start = self.initial_state(phonons)?;
        self.apply_pulses(&start, prep, false)
    }

    /// Hopping window of length `end` with decoupling pulses inserted.
    /// Overlapping pulses on different ions are summed; on the same ion they
    /// are a schedule conflict. Pulses running past `end` are cut there.
    pub fn body_segments(&self, dd: &[TimedPulse], end: f64) -> Result<Vec<Segment>> {
        let mut finite = Vec::new();
        let mut instants = Vec::new();
        for (k, tp) in dd.iter().enumerate() {
            tp.pulse.validate(&self.layout)?;
            if tp.time < -TIME_EPS || tp.time > end + TIME_EPS {
                return Err(Error::ScheduleConflict(format!(
                    "pulse {k} at {:e} s lies outside the hopping window [0, {end:e}] s",
                    tp.time
                )));
            }
            if let PulseEvent::Wait { .. } = tp.pulse {
                continue;
            }
            if tp.pulse.is_instantaneous() {
                instants.push((k, tp.time.max(0.0)));
            } else {
                finite.push((k, tp.time.max(0.0), tp.time + tp.pulse.duration()));
            }
        }
        check_conflicts(dd, &finite, &instants)?;

        let mut cuts: Vec<f64> = vec![0.0, end];
        cuts.extend(instants.iter().map(|&(_, t)| t));
        for &(_, t0, t1) in &finite {
            cuts.push(t0);
            cuts.push(t1.min(end));
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() <= TIME_EPS);

        let mut out = Vec::new();
        for (idx, &t) in cuts.iter().enumerate() {
            for &(k, ti) in &instants {
                if (ti - t).abs() <= TIME_EPS {
                    let label = format!("{:?}@{:.3}us", dd[k].pulse.kind(), t * 1e6).to_lowercase();
                    out.push(Segment::unitary(self.instant_unitary(&dd[k].pulse)?, label));
                }
            }
            let Some(&next) = cuts.get(idx + 1) else { break };
            let mid = 0.5 * (t + next);
            let mut h = self.hopping.clone();
            let mut collapse = Vec::new();
            let mut label = String::from("hop");
            for &(k, t0, t1) in &finite {
                if t0 < mid && mid < t1 {
                    let pulse = &dd[k].pulse;
                    if let Some(drive) = self.drive_hamiltonian(pulse)? {
                        h = h.plus(&drive)?;
                    }
                    collapse.extend(self.collapse_ops(pulse)?);
                    label.push_str(&format!("+{:?}", pulse.kind()).to_lowercase());
                }
            }
            out.push(Segment::dissipative(h, next - t, collapse, label));
        }
        Ok(out)
    }
}

fn check_conflicts(dd: &[TimedPulse], finite: &[(usize, f64, f64)], instants: &[(usize, f64)]) -> Result<()> {
    let conflict = |a: usize, b: usize| {
        Error::ScheduleConflict(format!(
            "pulses at {:e} s and {:e} s overlap on ion {}",
            dd[a].time,
            dd[b].time,
            dd[a].pulse.ion().unwrap_or(0)
        ))
    };
    let same_ion = |a: usize, b: usize| dd[a].pulse.ion() == dd[b].pulse.ion();
    for (i, &(a, a0, a1)) in finite.iter().enumerate() {
        for &(b, b0, b1) in &finite[i + 1..] {
            if same_ion(a, b) && a0 < b1 - TIME_EPS && b0 < a1 - TIME_EPS {
                return Err(conflict(a, b));
            }
        }
        for &(b, t) in instants {
            if same_ion(a, b) && a0 + TIME_EPS < t && t < a1 - TIME_EPS {
                return Err(conflict(a, b));
            }
        }
    }
    for (i, &(a, ta)) in instants.iter().enumerate() {
        for &(b, tb) in &instants[i + 1..] {
            if same_ion(a, b) && (ta - tb).abs() <= TIME_EPS {
                return Err(conflict(a, b));
            }
        }
    }
    Ok(())
}

/// Prepare from `|↓…↓⟩ ⊗ thermal(n̄)` with no hopping during the pulses.
pub fn prepare_state(prep: &[PulseEvent], noise: &NoiseModel, layout: &HilbertLayout) -> Result<QuantumState> {
    let app = Apparatus::new(*layout, &HoppingGraph::uncoupled(layout.n_ions()), *noise, DEFAULT_DT_MAX)?;
    app.prepare(&vec![0; layout.n_ions()], prep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::DriveParams;
    use crate::operators::{max_abs, phonon_projector, populations, Spin};

    const KAPPA: f64 = 2.0 * PI * 2.0e3;
    const RABI: f64 = 2.0 * PI * 50.0e3;

    fn fig5_prep() -> Vec<PulseEvent> {
        vec![PulseEvent::carrier(1, 2.0 * PI * 100e3, PI), PulseEvent::bsb(0, RABI, PI)]
    }

    fn layout() -> HilbertLayout {
        HilbertLayout::new(2, 3).unwrap()
    }

    fn basis_pop(state: &QuantumState, spins: &[Spin], phonons: &[usize]) -> f64 {
        let idx = state.layout().index(spins, phonons).unwrap();
        state.basis_populations()[idx]
    }

    #[test]
    fn ideal_prep_reaches_one_zero() {
        let s = prepare_state(&fig5_prep(), &NoiseModel::ideal(), &layout()).unwrap();
        assert!((basis_pop(&s, &[Spin::Up, Spin::Up], &[1, 0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prep_infidelity_is_a_mixture() {
        let noise = NoiseModel {
            prep_infidelity: 0.08,
            ..NoiseModel::ideal()
        };
        let s = prepare_state(&fig5_prep(), &noise, &layout()).unwrap();
        let p = populations(&s, &[phonon_projector(&layout(), &[1, 0]).unwrap()]).unwrap()[0];
        assert!((p - 0.92).abs() < 1e-12);
    }

    #[test]
    fn empty_prep_is_identity() {
        let noise = NoiseModel {
            thermal_occupation: 0.1,
            ..NoiseModel::ideal()
        };
        let s = prepare_state(&[], &noise, &layout()).unwrap();
        let t = thermal_ground_state(layout(), 0.1).unwrap();
        assert!(max_abs(&(s.density_matrix() - t.density_matrix())) < 1e-15);
    }

    #[test]
    fn instant_drive_matches_finite_pulse() {
        let l = layout();
        let app = Apparatus::new(l, &HoppingGraph::uncoupled(2), NoiseModel::ideal(), DEFAULT_DT_MAX).unwrap();
        for sb in [Sideband::Red, Sideband::Blue, Sideband::Carrier] {
            let drive = DriveParams::resonant(1, sb, RABI).with_phase(0.3);
            let finite = PulseEvent::Drive {
                drive,
                timing: Timing::Area(1.3),
                instantaneous: false,
            };
            let jump = PulseEvent::Drive {
                drive,
                timing: Timing::Area(1.3),
                instantaneous: true,
            };
            let psi = QuantumState::basis(l, &[Spin::Down, Spin::Up], &[1, 1]).unwrap();
            let a = app.apply_pulses(&psi, &[finite], false).unwrap();
            let b = app.apply_pulses(&psi, &[jump], false).unwrap();
            let diff = (a.as_pure().unwrap() - b.as_pure().unwrap()).camax();
            assert!(diff < 1e-10, "{sb:?}: {diff}");
        }
    }

    #[test]
    fn same_ion_overlap_is_rejected() {
        let app = Apparatus::new(layout(), &HoppingGraph::pair(KAPPA).unwrap(), NoiseModel::ideal(), DEFAULT_DT_MAX)
            .unwrap();
        let p = PulseEvent::rsb(1, RABI, 2.0 * PI);
        let dd = [TimedPulse { time: 10e-6, pulse: p }, TimedPulse { time: 15e-6, pulse: p }];
        assert!(matches!(app.body_segments(&dd, 100e-6), Err(Error::ScheduleConflict(_))));
        let other = [
            TimedPulse { time: 10e-6, pulse: p },
            TimedPulse {
                time: 15e-6,
                pulse: PulseEvent::rsb(0, RABI, 2.0 * PI),
            },
        ];
        assert!(app.body_segments(&other, 100e-6).is_ok());
        let back_to_back = [TimedPulse { time: 10e-6, pulse: p }, TimedPulse { time: 30e-6, pulse: p }];
        assert!(app.body_segments(&back_to_back, 100e-6).is_ok());
    }

    #[test]
    fn body_segments_cover_window() {
        let app = Apparatus::new(layout(), &HoppingGraph::pair(KAPPA).unwrap(), NoiseModel::ideal(), DEFAULT_DT_MAX)
            .unwrap();
        let dd = [
            TimedPulse {
                time: 62.5e-6,
                pulse: PulseEvent::PhaseShift { ion: 1, theta: PI },
            },
            TimedPulse {
                time: 90e-6,
                pulse: PulseEvent::rsb(1, RABI, 2.0 * PI),
            },
        ];
        let segs = app.body_segments(&dd, 100e-6).unwrap();
        let total: f64 = segs.iter().map(Segment::duration).sum();
        assert!((total - 100e-6).abs() < 1e-15);
        assert_eq!(segs.iter().filter(|s| matches!(s, Segment::Unitary { .. })).count(), 1);
    }

    #[test]
    fn pull_back_matches_forward_channel() {
        let noise = NoiseModel {
            dephasing_sideband: 2.0 * PI * 1e3,
            prep_infidelity: 0.1,
            ..NoiseModel::ideal()
        };
        let l = layout();
        let app = Apparatus::new(l, &HoppingGraph::pair(KAPPA).unwrap(), noise, 20e-9).unwrap();
        let mapping = [PulseEvent::bsb(0, RABI, PI), PulseEvent::bsb(1, RABI, PI)];
        let psi = QuantumState::basis(l, &[Spin::Up, Spin::Up], &[1, 0]).unwrap();
        let proj = crate::operators::spin_projector(&l, &[Spin::Down, Spin::Up]).unwrap();
        let forward = app.apply_pulses(&psi, &mapping, true).unwrap().expectation(&proj).unwrap().re;
        let o = app.pull_back(proj.matrix(), &mapping, true).unwrap();
        let backward = crate::operators::trace_product(&o, &psi.density_matrix()).re;
        assert!((forward - backward).abs() < 1e-9, "{forward} vs {backward}");
    }
}
