//! Experimental single-pulse sequence with preparation, dephasing and
//! fluorescence mapping, in exact mode.

use phonon_dd::experiment::{preset, run_scenario_exact};

fn main() -> phonon_dd::Result<()> {
    let mut s = preset("fig5b")?;
    s.tau_grid = (0..=16).map(|k| k as f64 * 25e-6).collect();
    let ts = run_scenario_exact(&s)?;
    println!("{:>8} {:>8} {:>8}", "tau_us", "P10", "P01");
    for i in 0..ts.len() {
        println!(
            "{:8.1} {:8.4} {:8.4}",
            ts.times[i] * 1e6,
            ts.columns[0].values[i],
            ts.columns[1].values[i]
        );
    }
    Ok(())
}
