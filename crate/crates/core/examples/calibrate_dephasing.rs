//! Fit the sideband dephasing rate to a given π-pulse infidelity and print
//! the overlay to layer onto a scenario.

use phonon_dd::calibrate::calibrate_dephasing;
use phonon_dd::experiment::preset;
use std::f64::consts::PI;

fn main() -> phonon_dd::Result<()> {
    let target = std::env::args().nth(1).map_or(Ok(0.08), |a| a.parse()).unwrap_or(0.08);
    let c = calibrate_dephasing(target, &preset("fig5b")?)?;
    println!(
        "target {target}: gamma/2pi = {:.4} kHz, transfer {:.6}, {} iterations",
        c.dephasing_rate / (2.0 * PI * 1e3),
        c.transfer,
        c.iterations
    );
    print!("{}", c.overlay_toml());
    Ok(())
}
