//! One phonon hopping between two ions, compared with sin²(κt/2).

use phonon_dd::experiment::{preset, run_scenario_exact};
use std::f64::consts::PI;

fn main() -> phonon_dd::Result<()> {
    let s = preset("fig2a")?;
    let kappa = s.graph.kappa(0, 1);
    let ts = run_scenario_exact(&s)?;
    let p01 = ts.column("P01").unwrap();
    println!("kappa/2pi = {} kHz", kappa / (2.0 * PI * 1e3));
    println!("{:>8} {:>10} {:>10}", "tau_us", "P01", "sin^2");
    for (t, p) in ts.times.iter().zip(p01).step_by(10) {
        println!("{:8.1} {p:10.6} {:10.6}", t * 1e6, (kappa * t / 2.0).sin().powi(2));
    }
    Ok(())
}
