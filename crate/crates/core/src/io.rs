//! CSV output and run manifests.

use crate::error::{Error, Result};
use crate::experiment::{Column, Detection, ObservableKind, PulseEvent, Scenario, TimeSeries, Timing};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Decimal places for probabilities and times in CSV output.
pub const CSV_DECIMALS: usize = 6;

/// Write `tau_us,<columns…>,shots`, one row per τ.
pub fn write_csv<W: Write>(series: &TimeSeries, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["tau_us".to_string()];
    header.extend(series.columns.iter().map(|c| c.label.clone()));
    header.push("shots".into());
    w.write_record(&header)?;
    for (i, t) in series.times.iter().enumerate() {
        let mut row = vec![format!("{:.*}", CSV_DECIMALS, t * 1e6)];
        row.extend(series.columns.iter().map(|c| format!("{:.*}", CSV_DECIMALS, c.values[i])));
        row.push(series.shots.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_string(series: &TimeSeries) -> Result<String> {
    let mut buf = Vec::new();
    write_csv(series, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv output is ASCII"))
}

/// Parse a file produced by [`write_csv`]. Shot tallies are not stored, so
/// `shot_counts` comes back empty.
pub fn read_csv<R: Read>(input: R) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    let n = header.len();
    if n < 2 || &header[0] != "tau_us" || &header[n - 1] != "shots" {
        return Err(Error::Parse("CSV header must be `tau_us,…,shots`".into()));
    }
    let labels: Vec<String> = header.iter().skip(1).take(n - 2).map(str::to_string).collect();
    let mut times = Vec::new();
    let mut values: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
    let mut shots = 0;
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {}, column `{}`: {e}", line + 2, &header[k])))
        };
        times.push(num(0)? * 1e-6);
        for (j, col) in values.iter_mut().enumerate() {
            col.push(num(j + 1)?);
        }
        shots = rec[n - 1]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {}, column `shots`: {e}", line + 2)))?;
    }
    Ok(TimeSeries {
        times,
        columns: labels
            .into_iter()
            .zip(values)
            .map(|(label, values)| Column { label, values })
            .collect(),
        shots,
        shot_counts: None,
    })
}

/// Machine-readable description of one run.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub scenario: String,
    /// SHA-256 of the SI parameter echo.
    pub scenario_hash: String,
    /// Every physical parameter in SI units (rad/s, s).
    pub parameters: Value,
    pub seed: u64,
    pub shots: u32,
    pub integrator: Value,
    pub threads: usize,
    pub wall_clock_s: f64,
    pub output: PathBuf,
    pub version: &'static str,
}

impl RunManifest {
    pub fn new(s: &Scenario, threads: usize, wall_clock_s: f64, output: &Path) -> Self {
        let parameters = scenario_echo(s);
        RunManifest {
            scenario: s.name.clone(),
            scenario_hash: scenario_hash(s),
            parameters,
            seed: s.seed,
            shots: s.shots,
            integrator: json!({
                "method": "exact propagator; fixed-step RK4 when dissipative",
                "dt_max_s": s.dt_max,
                "cutoff_tolerance": s.cutoff_tolerance,
            }),
            threads,
            wall_clock_s,
            output: output.to_path_buf(),
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    /// `out.csv` → `out.manifest.json`.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("manifest.json")
    }
}

pub fn scenario_hash(s: &Scenario) -> String {
    let echo = serde_json::to_string(&scenario_echo(s)).expect("echo serializes");
    hex::encode(Sha256::digest(echo.as_bytes()))
}

/// Scenario parameters in SI units.
pub fn scenario_echo(s: &Scenario) -> Value {
    json!({
        "name": s.name,
        "n_ions": s.layout.n_ions(),
        "fock_cutoff": s.layout.fock_cutoff(),
        "kappa_rad_s": s.graph.rates(),
        "noise": {
            "dephasing_carrier_rad_s": s.noise.dephasing_carrier,
            "dephasing_sideband_rad_s": s.noise.dephasing_sideband,
            "prep_infidelity": s.noise.prep_infidelity,
            "thermal_nbar": s.noise.thermal_occupation,
        },
        "initial_phonons": s.initial_phonons,
        "prep": s.prep.iter().map(pulse_echo).collect::<Vec<_>>(),
        "tau_grid_s": s.tau_grid,
        "dd": s.dd_pulses.iter().map(|t| {
            let mut v = pulse_echo(&t.pulse);
            v["time_s"] = json!(t.time);
            v
        }).collect::<Vec<_>>(),
        "mapping": s.mapping.iter().map(pulse_echo).collect::<Vec<_>>(),
        "observables": s.observables.iter().map(|o| match &o.kind {
            ObservableKind::Phonons(n) => json!({"label": o.label, "phonons": n}),
            ObservableKind::Pattern(p) => json!({
                "label": o.label,
                "pattern": p.iter().map(|d| match d {
                    Detection::Bright => "bright",
                    Detection::Dark => "dark",
                }).collect::<Vec<_>>(),
            }),
        }).collect::<Vec<_>>(),
        "shots": s.shots,
        "seed": s.seed,
        "dt_max_s": s.dt_max,
        "cutoff_tolerance": s.cutoff_tolerance,
    })
}

fn pulse_echo(p: &PulseEvent) -> Value {
    let timing = |t: &Timing| match *t {
        Timing::Area(a) => json!({"area_rad": a}),
        Timing::Duration(d) => json!({"duration_s": d}),
    };
    let mut v = match p {
        PulseEvent::Drive {
            drive,
            timing: t,
            instantaneous,
        } => {
            let mut v = timing(t);
            v["ion"] = json!(drive.ion);
            v["rabi_rad_s"] = json!(drive.rabi);
            v["detuning_rad_s"] = json!(drive.detuning);
            v["phase_rad"] = json!(drive.phase);
            v["instantaneous"] = json!(instantaneous);
            v
        }
        PulseEvent::Dispersive {
            ion,
            chi,
            timing: t,
            instantaneous,
        } => {
            let mut v = timing(t);
            v["ion"] = json!(ion);
            v["chi_rad_s"] = json!(chi);
            v["instantaneous"] = json!(instantaneous);
            v
        }
        PulseEvent::PhaseShift { ion, theta } => json!({"ion": ion, "theta_rad": theta}),
        PulseEvent::Wait { duration } => json!({"duration_s": duration}),
    };
    v["kind"] = json!(format!("{:?}", p.kind()).to_lowercase());
    v
}
