//! Scenario files.
//!
//! Files are TOML. Rates are written as `f = ω/2π` in kHz, times in µs,
//! pulse areas, phases and phase-shift angles in units of π. Everything is
//! converted to rad/s and s on load.
//!
//! ```toml
//! name = "echo"
//! [layout]
//! ions = 2
//! fock_cutoff = 3
//! [hopping]
//! kappa_khz = [[0.0, 2.0], [2.0, 0.0]]
//! [initial]
//! phonons = [1, 0]
//! [[sweep]]
//! start_us = 0.0
//! stop_us = 125.0
//! step_us = 2.5
//! [[dd]]
//! at_us = 62.5
//! kind = "phase_shift"
//! ion = 1
//! theta_pi = 1.0
//! [[observables]]
//! label = "P10"
//! phonons = [1, 0]
//! ```

use super::{Detection, Observable, ObservableKind, PulseEvent, Scenario, TimedPulse, Timing};
use crate::dynamics::{NoiseModel, DEFAULT_DT_MAX};
use crate::error::{Error, Result};
use crate::hamiltonian::{DriveParams, HoppingGraph, Sideband};
use crate::operators::HilbertLayout;
use crate::units::{khz_to_rad_s, ns_to_s, us_to_s};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Default cutoff tolerance: population allowed on the top Fock level.
pub const DEFAULT_CUTOFF_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub layout: LayoutSpec,
    pub hopping: HoppingSpec,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub initial: InitialSpec,
    #[serde(default)]
    pub prep: Vec<PulseSpec>,
    pub sweep: Vec<SweepSpec>,
    #[serde(default)]
    pub dd: Vec<PulseSpec>,
    #[serde(default)]
    pub mapping: Vec<PulseSpec>,
    pub observables: Vec<ObservableSpec>,
    #[serde(default)]
    pub run: RunSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LayoutSpec {
    pub ions: usize,
    pub fock_cutoff: usize,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct HoppingSpec {
    /// Symmetric κ_ij/2π matrix.
    pub kappa_khz: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub dephasing_carrier_khz: f64,
    #[serde(default)]
    pub dephasing_sideband_khz: f64,
    #[serde(default)]
    pub prep_infidelity: f64,
    #[serde(default)]
    pub thermal_nbar: f64,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Defaults to all modes empty.
    #[serde(default)]
    pub phonons: Option<Vec<usize>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PulseKindSpec {
    Carrier,
    Bsb,
    Rsb,
    Dispersive,
    PhaseShift,
    Wait,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PulseSpec {
    /// Start time inside the hopping window; only for `[[dd]]` entries.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_us: Option<f64>,
    pub kind: PulseKindSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ion: Option<usize>,
    /// `2g/2π` for sidebands, `Ω/2π` for the carrier.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rabi_khz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_khz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi_khz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub area_pi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_us: Option<f64>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub instantaneous: bool,
}

/// Inclusive grid `start, start + step, …, stop`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub start_us: f64,
    pub stop_us: f64,
    pub step_us: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phonons: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<Vec<DetectionSpec>>,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum DetectionSpec {
    Bright,
    Dark,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    #[serde(default)]
    pub shots: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_dt_ns")]
    pub dt_max_ns: f64,
    #[serde(default = "default_cutoff")]
    pub cutoff_tolerance: f64,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            shots: 0,
            seed: 0,
            dt_max_ns: default_dt_ns(),
            cutoff_tolerance: default_cutoff(),
        }
    }
}

fn default_dt_ns() -> f64 {
    DEFAULT_DT_MAX * 1e9
}

fn default_cutoff() -> f64 {
    DEFAULT_CUTOFF_TOLERANCE
}

/// Command-line style overrides applied after loading.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub shots: Option<u32>,
    pub seed: Option<u64>,
    pub dt_max_ns: Option<f64>,
    /// Replace the τ grid by a uniform one over the same range.
    pub tau_step_us: Option<f64>,
}

impl Overrides {
    pub fn apply(&self, s: &mut Scenario) -> Result<()> {
        if let Some(shots) = self.shots {
            s.shots = shots;
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(dt) = self.dt_max_ns {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(Error::Validation(format!("dt-max = {dt} ns")));
            }
            s.dt_max = ns_to_s(dt);
        }
        if let Some(step) = self.tau_step_us {
            let start = s.tau_grid.first().copied().unwrap_or(0.0) * 1e6;
            let stop = s.body_duration() * 1e6;
            s.tau_grid = sweep_grid(&[SweepSpec {
                start_us: start,
                stop_us: stop,
                step_us: step,
            }])?;
        }
        s.validate()
    }
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario files serialize")
    }

    pub fn into_scenario(self) -> Result<Scenario> {
        let layout = HilbertLayout::new(self.layout.ions, self.layout.fock_cutoff)
            .map_err(|e| Error::Validation(format!("layout: {e}")))?;
        let kappa = self
            .hopping
            .kappa_khz
            .iter()
            .map(|row| row.iter().map(|&k| khz_to_rad_s(k)).collect())
            .collect();
        let graph = HoppingGraph::new(kappa).map_err(|e| Error::Validation(format!("hopping: {e}")))?;
        let noise = NoiseModel {
            dephasing_carrier: khz_to_rad_s(self.noise.dephasing_carrier_khz),
            dephasing_sideband: khz_to_rad_s(self.noise.dephasing_sideband_khz),
            prep_infidelity: self.noise.prep_infidelity,
            thermal_occupation: self.noise.thermal_nbar,
        };
        let prep = pulses(&self.prep, "prep")?;
        let mapping = pulses(&self.mapping, "mapping")?;
        let dd = self
            .dd
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let at = p
                    .at_us
                    .ok_or_else(|| Error::Validation(format!("dd[{k}]: missing `at_us`")))?;
                Ok(TimedPulse {
                    time: us_to_s(at),
                    pulse: pulse(p).map_err(|e| Error::Validation(format!("dd[{k}]: {e}")))?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let observables = self
            .observables
            .iter()
            .map(observable)
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario {
            name: self.name,
            description: self.description,
            layout,
            graph,
            noise,
            initial_phonons: self.initial.phonons.unwrap_or_else(|| vec![0; layout.n_ions()]),
            prep,
            tau_grid: sweep_grid(&self.sweep)?,
            dd_pulses: dd,
            mapping,
            observables,
            shots: self.run.shots,
            seed: self.run.seed,
            dt_max: ns_to_s(self.run.dt_max_ns),
            cutoff_tolerance: self.run.cutoff_tolerance,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn pulses(specs: &[PulseSpec], section: &str) -> Result<Vec<PulseEvent>> {
    specs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            if p.at_us.is_some() {
                return Err(Error::Validation(format!(
                    "{section}[{k}]: `at_us` is only meaningful for dd pulses"
                )));
            }
            pulse(p).map_err(|e| Error::Validation(format!("{section}[{k}]: {e}")))
        })
        .collect()
}

fn pulse(p: &PulseSpec) -> std::result::Result<PulseEvent, String> {
    let ion = || p.ion.ok_or("missing `ion`");
    let timing = || match (p.area_pi, p.duration_us) {
        (Some(a), None) => Ok(Timing::Area(a * PI)),
        (None, Some(d)) => Ok(Timing::Duration(us_to_s(d))),
        _ => Err("give exactly one of `area_pi` and `duration_us`"),
    };
    let unused = |fields: &[(&str, bool)]| -> std::result::Result<(), String> {
        match fields.iter().find(|(_, present)| *present) {
            Some((name, _)) => Err(format!("`{name}` does not apply to {:?} pulses", p.kind)),
            None => Ok(()),
        }
    };
    let sideband = match p.kind {
        PulseKindSpec::Carrier => Some(Sideband::Carrier),
        PulseKindSpec::Bsb => Some(Sideband::Blue),
        PulseKindSpec::Rsb => Some(Sideband::Red),
        _ => None,
    };
    let event = match p.kind {
        PulseKindSpec::Carrier | PulseKindSpec::Bsb | PulseKindSpec::Rsb => {
            unused(&[("chi_khz", p.chi_khz.is_some()), ("theta_pi", p.theta_pi.is_some())])?;
            let rabi = p.rabi_khz.ok_or("missing `rabi_khz`")?;
            let drive = DriveParams::resonant(ion()?, sideband.expect("drive kind"), khz_to_rad_s(rabi))
                .with_detuning(khz_to_rad_s(p.detuning_khz.unwrap_or(0.0)))
                .with_phase(p.phase_pi.unwrap_or(0.0) * PI);
            PulseEvent::Drive {
                drive,
                timing: timing()?,
                instantaneous: p.instantaneous,
            }
        }
        PulseKindSpec::Dispersive => {
            unused(&[
                ("rabi_khz", p.rabi_khz.is_some()),
                ("detuning_khz", p.detuning_khz.is_some()),
                ("phase_pi", p.phase_pi.is_some()),
                ("theta_pi", p.theta_pi.is_some()),
            ])?;
            PulseEvent::Dispersive {
                ion: ion()?,
                chi: khz_to_rad_s(p.chi_khz.ok_or("missing `chi_khz`")?),
                timing: timing()?,
                instantaneous: p.instantaneous,
            }
        }
        PulseKindSpec::PhaseShift => {
            unused(&[
                ("rabi_khz", p.rabi_khz.is_some()),
                ("detuning_khz", p.detuning_khz.is_some()),
                ("phase_pi", p.phase_pi.is_some()),
                ("chi_khz", p.chi_khz.is_some()),
                ("area_pi", p.area_pi.is_some()),
                ("duration_us", p.duration_us.is_some()),
            ])?;
            PulseEvent::PhaseShift {
                ion: ion()?,
                theta: p.theta_pi.ok_or("missing `theta_pi`")? * PI,
            }
        }
        PulseKindSpec::Wait => {
            unused(&[
                ("ion", p.ion.is_some()),
                ("rabi_khz", p.rabi_khz.is_some()),
                ("chi_khz", p.chi_khz.is_some()),
                ("theta_pi", p.theta_pi.is_some()),
                ("area_pi", p.area_pi.is_some()),
                ("instantaneous", p.instantaneous),
            ])?;
            PulseEvent::Wait {
                duration: us_to_s(p.duration_us.ok_or("missing `duration_us`")?),
            }
        }
    };
    Ok(event)
}

fn observable(o: &ObservableSpec) -> Result<Observable> {
    let kind = match (&o.phonons, &o.pattern) {
        (Some(n), None) => ObservableKind::Phonons(n.clone()),
        (None, Some(p)) => ObservableKind::Pattern(
            p.iter()
                .map(|d| match d {
                    DetectionSpec::Bright => Detection::Bright,
                    DetectionSpec::Dark => Detection::Dark,
                })
                .collect(),
        ),
        _ => {
            return Err(Error::Validation(format!(
                "observable `{}`: give exactly one of `phonons` and `pattern`",
                o.label
            )))
        }
    };
    Ok(Observable {
        label: o.label.clone(),
        kind,
    })
}

/// Concatenate inclusive sweeps, dropping points shared by adjacent pieces.
pub fn sweep_grid(sweeps: &[SweepSpec]) -> Result<Vec<f64>> {
    if sweeps.is_empty() {
        return Err(Error::Validation("at least one [[sweep]] is required".into()));
    }
    let mut grid_us: Vec<f64> = Vec::new();
    for (k, s) in sweeps.iter().enumerate() {
        if !(s.step_us > 0.0 && s.step_us.is_finite() && s.start_us.is_finite() && s.stop_us >= s.start_us) {
            return Err(Error::Validation(format!(
                "sweep[{k}]: need finite start ≤ stop and step > 0"
            )));
        }
        let span = (s.stop_us - s.start_us) / s.step_us;
        let n = span.round();
        if (span - n).abs() > 1e-6 {
            return Err(Error::Validation(format!(
                "sweep[{k}]: step {} µs does not divide [{}, {}] µs",
                s.step_us, s.start_us, s.stop_us
            )));
        }
        for i in 0..=n as usize {
            let t = s.start_us + i as f64 * s.step_us;
            match grid_us.last() {
                Some(&last) if (t - last).abs() < 1e-9 => {}
                _ => grid_us.push(t),
            }
        }
    }
    Ok(grid_us.into_iter().map(us_to_s).collect())
}

/// Parse and validate a scenario file.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    ScenarioFile::parse(text)?.into_scenario()
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Scenario text for a preset name or a file path. Existing files win over
/// preset names.
pub fn scenario_source(name_or_path: &str) -> Result<String> {
    let path = Path::new(name_or_path);
    if path.is_file() {
        return std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())));
    }
    match super::presets::preset_info(name_or_path) {
        Ok(info) => Ok(info.source.to_string()),
        Err(_) => Err(Error::Parse(format!(
            "`{name_or_path}` is neither a readable scenario file nor a preset name"
        ))),
    }
}

/// Load a preset or file, optionally layering an overlay file on top.
pub fn resolve_scenario(name_or_path: &str, overlay: Option<&Path>) -> Result<Scenario> {
    let base = scenario_source(name_or_path)?;
    let text = match overlay {
        Some(path) => {
            let extra = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read overlay {}: {e}", path.display())))?;
            merge_overlay(&base, &extra)?
        }
        None => base,
    };
    parse_scenario(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{name_or_path}: {msg}")),
        other => other,
    })
}

/// Layer `overlay` on top of `base`: tables merge key by key, everything
/// else (including arrays of tables) is replaced.
pub fn merge_overlay(base: &str, overlay: &str) -> Result<String> {
    let mut base: toml::Table = base.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    let overlay: toml::Table = overlay
        .parse()
        .map_err(|e: toml::de::Error| Error::Parse(format!("overlay: {e}")))?;
    merge_tables(&mut base, overlay);
    Ok(toml::to_string(&base).expect("merged table serializes"))
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge_tables(b, o),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}
