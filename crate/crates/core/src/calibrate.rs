//! Fitting the sideband dephasing rate to a measured π-pulse infidelity.

use crate::dynamics::NoiseModel;
use crate::error::{Error, Result};
use crate::experiment::{Apparatus, PulseEvent, Scenario};
use crate::hamiltonian::{HoppingGraph, Sideband};
use crate::operators::{HilbertLayout, Spin};
use crate::units::rad_s_to_khz;
use std::f64::consts::PI;

/// Required agreement between the fitted and target transfer.
pub const CALIBRATION_TOLERANCE: f64 = 1e-3;

/// Upper end of the search, in units of the Rabi frequency.
const MAX_RATE_FACTOR: f64 = 100.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Calibration {
    pub target_infidelity: f64,
    /// Fitted γ_s (rad/s).
    pub dephasing_rate: f64,
    /// `|↑,1⟩` population after the π pulse at the fitted rate.
    pub transfer: f64,
    /// Blue-sideband Rabi frequency `2g` used for the pulse (rad/s).
    pub rabi: f64,
    pub iterations: usize,
}

impl Calibration {
    /// Overlay that sets both dephasing rates to the fitted value.
    pub fn overlay_toml(&self) -> String {
        let khz = rad_s_to_khz(self.dephasing_rate);
        format!(
            "# blue-sideband pi infidelity {} at 2g/2pi = {:.6} kHz\n[noise]\ndephasing_carrier_khz = {khz:.9}\ndephasing_sideband_khz = {khz:.9}\n",
            self.target_infidelity,
            rad_s_to_khz(self.rabi)
        )
    }
}

/// `|↑,1⟩` population after a blue-sideband π pulse from `|↓,0⟩` on a lone
/// ion with sideband dephasing `rate`.
pub fn bsb_transfer(rabi: f64, rate: f64, fock_cutoff: usize, dt_max: f64) -> Result<f64> {
    let layout = HilbertLayout::new(1, fock_cutoff)?;
    let noise = NoiseModel {
        dephasing_sideband: rate,
        ..NoiseModel::ideal()
    };
    let app = Apparatus::new(layout, &HoppingGraph::uncoupled(1), noise, dt_max)?;
    let out = app.prepare(&[0], &[PulseEvent::bsb(0, rabi, PI)])?;
    Ok(out.basis_populations()[layout.index(&[Spin::Up], &[1])?])
}

/// Rabi frequency of the first blue-sideband pulse in mapping, prep or dd.
pub fn scenario_bsb_rabi(s: &Scenario) -> Result<f64> {
    s.mapping
        .iter()
        .chain(&s.prep)
        .chain(s.dd_pulses.iter().map(|t| &t.pulse))
        .find_map(|p| match p {
            PulseEvent::Drive { drive, .. } if drive.sideband == Sideband::Blue => Some(drive.rabi),
            _ => None,
        })
        .ok_or_else(|| Error::Calibration(format!("scenario `{}` has no blue-sideband pulse", s.name)))
}

/// Bisect γ_s so that one blue-sideband π pulse transfers `1 - target`.
pub fn calibrate_dephasing(target: f64, s: &Scenario) -> Result<Calibration> {
    if !(0.0..0.5).contains(&target) {
        return Err(Error::Calibration(format!(
            "target infidelity {target} outside the modelled range [0, 0.5)"
        )));
    }
    let rabi = scenario_bsb_rabi(s)?;
    let d = s.layout.fock_cutoff();
    let goal = 1.0 - target;
    let transfer = |rate: f64| bsb_transfer(rabi, rate, d, s.dt_max);
    if target == 0.0 {
        return Ok(Calibration {
            target_infidelity: 0.0,
            dephasing_rate: 0.0,
            transfer: transfer(0.0)?,
            rabi,
            iterations: 0,
        });
    }
    let (mut lo, mut hi) = (0.0, MAX_RATE_FACTOR * rabi);
    let p_hi = transfer(hi)?;
    if p_hi > goal {
        return Err(Error::Calibration(format!(
            "target {target} unreachable: transfer is still {p_hi:.4} at γ = {hi:e} rad/s"
        )));
    }
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let p = transfer(mid)?;
        if (p - goal).abs() < 0.1 * CALIBRATION_TOLERANCE || iterations >= 80 {
            if (p - goal).abs() >= CALIBRATION_TOLERANCE {
                return Err(Error::Calibration(format!(
                    "bisection stalled at transfer {p:.6} (goal {goal:.6})"
                )));
            }
            return Ok(Calibration {
                target_infidelity: target,
                dephasing_rate: mid,
                transfer: p,
                rabi,
                iterations,
            });
        }
        // transfer falls monotonically with the rate
        if p > goal {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::preset;

    #[test]
    fn zero_target_means_no_dephasing() {
        let c = calibrate_dephasing(0.0, &preset("fig5b").unwrap()).unwrap();
        assert_eq!(c.dephasing_rate, 0.0);
        assert!((c.transfer - 1.0).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_targets() {
        let s = preset("fig5b").unwrap();
        assert!(calibrate_dephasing(0.6, &s).is_err());
        assert!(calibrate_dephasing(-0.1, &s).is_err());
    }

    #[test]
    fn fit_is_monotone() {
        let s = preset("fig5b").unwrap();
        let a = calibrate_dephasing(0.04, &s).unwrap();
        let b = calibrate_dephasing(0.08, &s).unwrap();
        assert!(a.dephasing_rate > 0.0 && b.dephasing_rate > a.dephasing_rate);
        assert!((b.transfer - 0.92).abs() < CALIBRATION_TOLERANCE);
    }

    #[test]
    fn needs_a_sideband_pulse() {
        assert!(calibrate_dephasing(0.08, &preset("fig2a").unwrap()).is_err());
    }
}
