//! Sweeping the hopping time τ.

use super::{sample_shots, Apparatus, Column, Scenario, TimeSeries};
use crate::dynamics::run_schedule;
use crate::error::{Error, Result};
use crate::operators::{trace_product, Matrix, QuantumState};
use rayon::prelude::*;

const PROBABILITY_SLACK: f64 = 1e-9;

/// Exact probabilities for every τ on the grid.
///
/// The body is run once with snapshots at every τ, which is the same as
/// truncating the schedule at τ. Mapping is applied to the observables in
/// the Heisenberg picture, so it is integrated once rather than per point.
pub fn run_scenario_exact(s: &Scenario) -> Result<TimeSeries> {
    s.validate()?;
    let app = Apparatus::from_scenario(s)?;
    let initial = app.prepare(&s.initial_phonons, &s.prep)?;
    let body = app.body_segments(&s.dd_pulses, s.body_duration())?;
    let snapshots = run_schedule(&initial, &body, &s.tau_grid, s.dt_max)?;
    for snap in std::iter::once(&initial).chain(&snapshots) {
        check_cutoff(snap, s.cutoff_tolerance)?;
    }

    let effective: Vec<Matrix> = s
        .observables
        .par_iter()
        .map(|o| {
            let p = o.projector(&s.layout)?;
            app.pull_back(p.matrix(), &s.mapping, true)
        })
        .collect::<Result<_>>()?;

    let rows: Vec<Vec<f64>> = snapshots
        .par_iter()
        .map(|state| effective.iter().map(|o| probability(o, state)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;

    let columns = s
        .observables
        .iter()
        .enumerate()
        .map(|(j, o)| Column {
            label: o.label.clone(),
            values: rows.iter().map(|r| r[j]).collect(),
        })
        .collect();
    Ok(TimeSeries {
        times: s.tau_grid.clone(),
        columns,
        shots: 0,
        shot_counts: None,
    })
}

/// Replace exact columns with multinomial frequencies. Point `i` draws from
/// its own generator seeded with `seed ^ i`, so the result does not depend
/// on thread count.
pub fn sample_series(exact: &TimeSeries, shots: u32, seed: u64) -> Result<TimeSeries> {
    let samples = (0..exact.len())
        .into_par_iter()
        .map(|i| {
            let p: Vec<f64> = exact.columns.iter().map(|c| c.values[i]).collect();
            sample_shots(&p, shots, seed ^ i as u64)
        })
        .collect::<Result<Vec<_>>>()?;
    let columns = exact
        .columns
        .iter()
        .enumerate()
        .map(|(j, c)| Column {
            label: c.label.clone(),
            values: samples.iter().map(|s| s.frequencies[j]).collect(),
        })
        .collect();
    Ok(TimeSeries {
        times: exact.times.clone(),
        columns,
        shots,
        shot_counts: Some(samples.into_iter().map(|s| s.counts).collect()),
    })
}

/// Exact run followed by shot sampling when `s.shots > 0`.
pub fn run_scenario(s: &Scenario) -> Result<TimeSeries> {
    if s.shots > 0 {
        check_exclusive(s)?;
    }
    let exact = run_scenario_exact(s)?;
    if s.shots == 0 {
        Ok(exact)
    } else {
        sample_series(&exact, s.shots, s.seed)
    }
}

fn probability(effective: &Matrix, state: &QuantumState) -> Result<f64> {
    let v = match state.as_pure() {
        Some(psi) => (psi.adjoint() * effective * psi)[(0, 0)].re,
        None => trace_product(effective, &state.density_matrix()).re,
    };
    if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&v) {
        return Err(Error::InvalidState(format!("probability {v} out of range")));
    }
    Ok(v.clamp(0.0, 1.0))
}

fn check_cutoff(state: &QuantumState, tolerance: f64) -> Result<()> {
    let (mode, population) = state.boundary_population();
    if population > tolerance {
        return Err(Error::CutoffExceeded {
            mode,
            population,
            tolerance,
        });
    }
    Ok(())
}

/// Shot sampling treats observables as categories of one measurement, so
/// their projectors must not overlap.
fn check_exclusive(s: &Scenario) -> Result<()> {
    let diags = s
        .observables
        .iter()
        .map(|o| Ok(o.projector(&s.layout)?.matrix().diagonal()))
        .collect::<Result<Vec<_>>>()?;
    for (i, a) in diags.iter().enumerate() {
        for (j, b) in diags.iter().enumerate().skip(i + 1) {
            if a.iter().zip(b.iter()).any(|(x, y)| x.re > 0.5 && y.re > 0.5) {
                return Err(Error::Validation(format!(
                    "observables `{}` and `{}` overlap; shot sampling needs exclusive outcomes",
                    s.observables[i].label, s.observables[j].label
                )));
            }
        }
    }
    Ok(())
}
