//! Finite-shot estimates scatter around the exact curve with binomial width.

use phonon_dd::experiment::{preset, run_scenario_exact, sample_series};

fn main() -> phonon_dd::Result<()> {
    let mut s = preset("fig5b")?;
    s.tau_grid = (0..=8).map(|k| k as f64 * 50e-6).collect();
    let exact = run_scenario_exact(&s)?;
    let shots = sample_series(&exact, s.shots, s.seed)?;
    println!("{:>8} {:>8} {:>8} {:>8}", "tau_us", "exact", "sampled", "sigma");
    for i in 0..exact.len() {
        let p = exact.columns[0].values[i];
        println!(
            "{:8.1} {p:8.4} {:8.4} {:8.4}",
            exact.times[i] * 1e6,
            shots.columns[0].values[i],
            (p * (1.0 - p) / s.shots as f64).sqrt()
        );
    }
    Ok(())
}
