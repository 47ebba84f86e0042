//! A π phase shift on ion 2 halfway through reverses the hopping, for one
//! and for two phonons.

use phonon_dd::experiment::{preset, run_scenario_exact};

fn main() -> phonon_dd::Result<()> {
    for (name, label) in [("fig2a", "P10"), ("fig2b", "P10"), ("fig3a", "P20"), ("fig3b", "P20")] {
        let ts = run_scenario_exact(&preset(name)?)?;
        let at = |t| ts.at(label, t).unwrap();
        println!(
            "{name}: {label}(62.5 us) = {:.6}  {label}(125 us) = {:.6}",
            at(62.5e-6),
            at(125e-6)
        );
    }
    Ok(())
}
