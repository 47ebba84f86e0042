//! Far-detuned red sideband approaches χ σ_z a†a with χ = g²/Δ.

use phonon_dd::hamiltonian::{dispersive_chi, offresonant_excitation_estimate};
use phonon_dd::selftest::dispersive_phase_error;
use std::f64::consts::PI;

fn main() -> phonon_dd::Result<()> {
    let g = 2.0 * PI * 25e3;
    for m in [10.0, 20.0, 40.0, 80.0] {
        let delta = m * g;
        let chi = dispersive_chi(2.0 * g, delta)?;
        let p = offresonant_excitation_estimate(2.0 * g, delta)?;
        println!(
            "Delta = {m:>4}g  chi/2pi = {:8.2} Hz  phase error {:.3e}  P_Delta ~ {:.2e}",
            chi / (2.0 * PI),
            dispersive_phase_error(g, delta)?,
            p.probability
        );
    }
    Ok(())
}
