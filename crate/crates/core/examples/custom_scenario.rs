//! Build a scenario from TOML text: three ions in a line, phonon on the
//! middle ion, one instantaneous phase shift.

use phonon_dd::experiment::config::parse_scenario;
use phonon_dd::experiment::run_scenario;
use phonon_dd::io::csv_string;

const SCENARIO: &str = r#"
name = "three-ions"

[layout]
ions = 3
fock_cutoff = 3

[hopping]
kappa_khz = [[0.0, 2.0, 0.0], [2.0, 0.0, 2.0], [0.0, 2.0, 0.0]]

[initial]
phonons = [0, 1, 0]

[[sweep]]
start_us = 0.0
stop_us = 200.0
step_us = 20.0

[[dd]]
at_us = 50.0
kind = "phase_shift"
ion = 1
theta_pi = 1.0

[[observables]]
label = "P010"
phonons = [0, 1, 0]

[run]
shots = 0
"#;

fn main() -> phonon_dd::Result<()> {
    let s = parse_scenario(SCENARIO)?;
    print!("{}", csv_string(&run_scenario(&s)?)?);
    Ok(())
}
