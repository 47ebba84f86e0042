//! Finite 2π red-sideband pulse as the decoupling step, with hopping left on.
//! The pulse flips the sign of the one-phonon amplitude on ion 2 but not
//! cleanly for two phonons, where the Rabi frequency scales by √2.

use phonon_dd::experiment::{preset, run_scenario_exact, Observable};

fn main() -> phonon_dd::Result<()> {
    let s = preset("fig4b")?;
    let p = s.dd_pulses[0];
    let echo = 2.0 * p.time + p.pulse.duration();
    let ts = run_scenario_exact(&s)?;
    println!("one phonon: P10({:.1} us) = {:.6}", echo * 1e6, ts.at("P10", echo).unwrap());

    let mut two = s.clone();
    two.layout = phonon_dd::operators::HilbertLayout::new(2, 4)?;
    two.initial_phonons = vec![2, 0];
    two.observables = vec![Observable::phonons("P20", &[2, 0])];
    two.tau_grid = vec![echo];
    let ts = run_scenario_exact(&two)?;
    println!("two phonons: P20({:.1} us) = {:.6}", echo * 1e6, ts.columns[0].values[0]);
    Ok(())
}
