//! Four 2π blue-sideband pulses keep the phonon on ion 1; afterwards it
//! hops freely. Writes CSV to stdout.

use phonon_dd::experiment::{preset, run_scenario_exact};
use phonon_dd::io::write_csv;

fn main() -> phonon_dd::Result<()> {
    let mut s = preset("fig6b")?;
    s.tau_grid = (0..=50).map(|k| k as f64 * 20e-6).collect();
    let ts = run_scenario_exact(&s)?;
    write_csv(&ts, std::io::stdout().lock())
}
