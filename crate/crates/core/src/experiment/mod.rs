//! Experimental sequences as executable scenarios: state preparation, a
//! hopping window swept over τ with decoupling pulses inserted at fixed
//! times, mapping pulses, and bright/dark detection with optional finite
//! shot sampling.

mod apparatus;
pub mod config;
pub mod presets;
mod readout;
mod run;

pub use apparatus::{prepare_state, Apparatus};
pub use presets::{preset, PresetInfo, PRESETS};
pub use readout::{detection_map, sample_shots, DetectionPattern, ShotSample};
pub use run::{run_scenario, run_scenario_exact, sample_series};

use crate::dynamics::{NoiseModel, TIME_EPS};
use crate::error::{Error, Result};
use crate::hamiltonian::{DriveParams, HoppingGraph, Sideband};
use crate::operators::{phonon_projector, spin_projector, HilbertLayout, Operator, Spin};

/// Pulse length, given either as area on the reference transition or as a
/// duration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Timing {
    /// Rotation angle in radians (π, 2π, …).
    Area(f64),
    /// Seconds.
    Duration(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PulseKind {
    Carrier,
    Bsb,
    Rsb,
    Dispersive,
    PhaseShift,
    Wait,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PulseEvent {
    /// Carrier, blue- or red-sideband drive. Instantaneous drives apply the
    /// ideal rotation with no hopping and no dephasing.
    Drive {
        drive: DriveParams,
        timing: Timing,
        instantaneous: bool,
    },
    /// `χ σ_z a†a` on one ion; an area θ means duration θ/|χ|.
    Dispersive {
        ion: usize,
        chi: f64,
        timing: Timing,
        instantaneous: bool,
    },
    /// Ideal `exp(iθ a†a)` on one mode, always instantaneous.
    PhaseShift { ion: usize, theta: f64 },
    Wait { duration: f64 },
}

impl PulseEvent {
    pub fn carrier(ion: usize, rabi: f64, area: f64) -> Self {
        PulseEvent::Drive {
            drive: DriveParams::resonant(ion, Sideband::Carrier, rabi),
            timing: Timing::Area(area),
            instantaneous: false,
        }
    }

    pub fn bsb(ion: usize, rabi: f64, area: f64) -> Self {
        PulseEvent::Drive {
            drive: DriveParams::resonant(ion, Sideband::Blue, rabi),
            timing: Timing::Area(area),
            instantaneous: false,
        }
    }

    pub fn rsb(ion: usize, rabi: f64, area: f64) -> Self {
        PulseEvent::Drive {
            drive: DriveParams::resonant(ion, Sideband::Red, rabi),
            timing: Timing::Area(area),
            instantaneous: false,
        }
    }

    pub fn kind(&self) -> PulseKind {
        match self {
            PulseEvent::Drive { drive, .. } => match drive.sideband {
                Sideband::Carrier => PulseKind::Carrier,
                Sideband::Blue => PulseKind::Bsb,
                Sideband::Red => PulseKind::Rsb,
            },
            PulseEvent::Dispersive { .. } => PulseKind::Dispersive,
            PulseEvent::PhaseShift { .. } => PulseKind::PhaseShift,
            PulseEvent::Wait { .. } => PulseKind::Wait,
        }
    }

    pub fn ion(&self) -> Option<usize> {
        match self {
            PulseEvent::Drive { drive, .. } => Some(drive.ion),
            PulseEvent::Dispersive { ion, .. } | PulseEvent::PhaseShift { ion, .. } => Some(*ion),
            PulseEvent::Wait { .. } => None,
        }
    }

    pub fn is_instantaneous(&self) -> bool {
        match self {
            PulseEvent::Drive { instantaneous, .. } | PulseEvent::Dispersive { instantaneous, .. } => {
                *instantaneous
            }
            PulseEvent::PhaseShift { .. } => true,
            PulseEvent::Wait { .. } => false,
        }
    }

    /// Time the pulse occupies on the timeline (0 when instantaneous).
    pub fn duration(&self) -> f64 {
        if self.is_instantaneous() {
            return 0.0;
        }
        self.nominal_duration()
    }

    /// Duration the pulse would take if driven for real.
    pub fn nominal_duration(&self) -> f64 {
        match *self {
            PulseEvent::Drive { drive, timing, .. } => match timing {
                Timing::Area(theta) => drive.duration_for_area(theta),
                Timing::Duration(d) => d,
            },
            PulseEvent::Dispersive { chi, timing, .. } => match timing {
                Timing::Area(theta) => theta / chi.abs(),
                Timing::Duration(d) => d,
            },
            PulseEvent::PhaseShift { .. } => 0.0,
            PulseEvent::Wait { duration } => duration,
        }
    }

    pub fn validate(&self, layout: &HilbertLayout) -> Result<()> {
        if let Some(ion) = self.ion() {
            layout.check_site(ion)?;
        }
        let bad_timing = |t: &Timing| match *t {
            Timing::Area(a) => !(a.is_finite() && a >= 0.0),
            Timing::Duration(d) => !(d.is_finite() && d >= 0.0),
        };
        match self {
            PulseEvent::Drive {
                drive,
                timing,
                instantaneous,
            } => {
                drive.validate()?;
                if bad_timing(timing) {
                    return Err(Error::Validation(format!("pulse timing {timing:?}")));
                }
                if *instantaneous && drive.detuning != 0.0 {
                    return Err(Error::Validation(
                        "instantaneous drives must be resonant".into(),
                    ));
                }
            }
            PulseEvent::Dispersive { chi, timing, .. } => {
                if !(chi.is_finite() && *chi != 0.0) {
                    return Err(Error::Validation(format!("dispersive χ = {chi}")));
                }
                if bad_timing(timing) {
                    return Err(Error::Validation(format!("pulse timing {timing:?}")));
                }
            }
            PulseEvent::PhaseShift { theta, .. } => {
                if !theta.is_finite() {
                    return Err(Error::Validation(format!("phase shift θ = {theta}")));
                }
            }
            PulseEvent::Wait { duration } => {
                if !(duration.is_finite() && *duration >= 0.0) {
                    return Err(Error::Validation(format!("wait duration {duration}")));
                }
            }
        }
        Ok(())
    }
}

/// A pulse starting at `time` seconds into the hopping window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimedPulse {
    pub time: f64,
    pub pulse: PulseEvent,
}

/// Fluorescence outcome of one ion: `|↓⟩` scatters (bright), `|↑⟩` does not.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Detection {
    Bright,
    Dark,
}

impl Detection {
    pub fn spin(self) -> Spin {
        match self {
            Detection::Bright => Spin::Down,
            Detection::Dark => Spin::Up,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ObservableKind {
    /// Phonon occupations, any spin state.
    Phonons(Vec<usize>),
    /// Bright/dark pattern, one entry per ion.
    Pattern(Vec<Detection>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub label: String,
    pub kind: ObservableKind,
}

impl Observable {
    pub fn phonons(label: impl Into<String>, phonons: &[usize]) -> Self {
        Observable {
            label: label.into(),
            kind: ObservableKind::Phonons(phonons.to_vec()),
        }
    }

    pub fn pattern(label: impl Into<String>, pattern: &[Detection]) -> Self {
        Observable {
            label: label.into(),
            kind: ObservableKind::Pattern(pattern.to_vec()),
        }
    }

    pub fn projector(&self, layout: &HilbertLayout) -> Result<Operator> {
        match &self.kind {
            ObservableKind::Phonons(n) => phonon_projector(layout, n),
            ObservableKind::Pattern(p) => {
                let spins: Vec<Spin> = p.iter().map(|d| d.spin()).collect();
                spin_projector(layout, &spins)
            }
        }
    }
}

/// Everything needed to reproduce one figure-style sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    pub layout: HilbertLayout,
    pub graph: HoppingGraph,
    pub noise: NoiseModel,
    /// Fock occupations of the modes before preparation (spins start down).
    pub initial_phonons: Vec<usize>,
    pub prep: Vec<PulseEvent>,
    /// Hopping times τ (s), strictly increasing.
    pub tau_grid: Vec<f64>,
    pub dd_pulses: Vec<TimedPulse>,
    pub mapping: Vec<PulseEvent>,
    pub observables: Vec<Observable>,
    /// 0 = exact probabilities.
    pub shots: u32,
    pub seed: u64,
    pub dt_max: f64,
    /// Largest population tolerated on the top Fock level of any mode.
    pub cutoff_tolerance: f64,
}

impl Scenario {
    pub fn body_duration(&self) -> f64 {
        self.tau_grid.last().copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Validation(msg));
        if self.graph.n_ions() != self.layout.n_ions() {
            return fail(format!(
                "hopping graph has {} ions, layout has {}",
                self.graph.n_ions(),
                self.layout.n_ions()
            ));
        }
        self.noise.validate().map_err(|e| Error::Validation(e.to_string()))?;
        if self.initial_phonons.len() != self.layout.n_ions() {
            return fail("initial phonons must list one occupation per ion".into());
        }
        if self.initial_phonons.iter().any(|&n| n >= self.layout.fock_cutoff()) {
            return fail("initial phonon occupation beyond the Fock cutoff".into());
        }
        if self.noise.thermal_occupation > 0.0 && self.initial_phonons.iter().any(|&n| n != 0) {
            return fail("thermal initial occupation requires modes to start from |0⟩".into());
        }
        if self.tau_grid.is_empty() {
            return fail("τ grid is empty".into());
        }
        if self.tau_grid[0] < 0.0 || self.tau_grid.iter().any(|t| !t.is_finite()) {
            return fail("τ grid must be finite and non-negative".into());
        }
        if self.tau_grid.windows(2).any(|w| w[1] <= w[0]) {
            return fail("τ grid must be strictly increasing".into());
        }
        for p in self.prep.iter().chain(&self.mapping) {
            p.validate(&self.layout).map_err(|e| Error::Validation(e.to_string()))?;
        }
        let end = self.body_duration();
        for tp in &self.dd_pulses {
            tp.pulse
                .validate(&self.layout)
                .map_err(|e| Error::Validation(e.to_string()))?;
            if tp.time < -TIME_EPS || tp.time > end + TIME_EPS {
                return fail(format!(
                    "decoupling pulse at {:e} s lies outside the hopping window [0, {end:e}] s",
                    tp.time
                ));
            }
        }
        if self.observables.is_empty() {
            return fail("no observables".into());
        }
        for o in &self.observables {
            let len = match &o.kind {
                ObservableKind::Phonons(n) => n.len(),
                ObservableKind::Pattern(p) => p.len(),
            };
            if len != self.layout.n_ions() {
                return fail(format!("observable `{}` must have one entry per ion", o.label));
            }
            if let ObservableKind::Phonons(n) = &o.kind {
                if n.iter().any(|&k| k >= self.layout.fock_cutoff()) {
                    return fail(format!("observable `{}` beyond the Fock cutoff", o.label));
                }
            }
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return fail(format!("dt_max = {}", self.dt_max));
        }
        if self.cutoff_tolerance.is_nan() || self.cutoff_tolerance <= 0.0 {
            return fail("cutoff tolerance must be positive".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub label: String,
    pub values: Vec<f64>,
}

/// Probabilities versus hopping time.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    /// Shots per point; 0 for exact probabilities.
    pub shots: u32,
    /// Raw tallies per point and column when sampled.
    pub shot_counts: Option<Vec<Vec<u32>>>,
}

impl TimeSeries {
    pub fn column(&self, label: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .find(|c| c.label == label)
            .map(|c| c.values.as_slice())
    }

    /// Value of a column at the grid point nearest to `time`.
    pub fn at(&self, label: &str, time: f64) -> Option<f64> {
        let col = self.column(label)?;
        let (idx, _) = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - time).abs().total_cmp(&(b.1 - time).abs()))?;
        Some(col[idx])
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}
