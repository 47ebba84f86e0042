//! Built-in scenarios, one per figure panel.

use super::config::parse_scenario;
use super::Scenario;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PresetInfo {
    pub name: &'static str,
    pub figure: &'static str,
    pub summary: &'static str,
    pub source: &'static str,
}

pub const PRESETS: [PresetInfo; 8] = [
    PresetInfo {
        name: "fig2a",
        figure: "figure 2(a)",
        summary: "free hopping of one phonon, kappa/2pi = 2 kHz",
        source: include_str!("../../presets/fig2a.toml"),
    },
    PresetInfo {
        name: "fig2b",
        figure: "figure 2(b)",
        summary: "one phonon, instantaneous pi phase shift on ion 2 at 62.5 us",
        source: include_str!("../../presets/fig2b.toml"),
    },
    PresetInfo {
        name: "fig3a",
        figure: "figure 3(a)",
        summary: "free hopping of two phonons from |2,0>",
        source: include_str!("../../presets/fig3a.toml"),
    },
    PresetInfo {
        name: "fig3b",
        figure: "figure 3(b)",
        summary: "two phonons, instantaneous pi phase shift on ion 2 at 62.5 us",
        source: include_str!("../../presets/fig3b.toml"),
    },
    PresetInfo {
        name: "fig4a",
        figure: "figure 4(a)",
        summary: "free hopping of one phonon over 300 us",
        source: include_str!("../../presets/fig4a.toml"),
    },
    PresetInfo {
        name: "fig4b",
        figure: "figure 4(b)",
        summary: "one phonon, finite 2pi red-sideband pulse on ion 2, 2g = 25 kappa",
        source: include_str!("../../presets/fig4b.toml"),
    },
    PresetInfo {
        name: "fig5b",
        figure: "figure 5(b)",
        summary: "experimental sequence, one 2pi blue-sideband pulse after 100 us, kappa/2pi = 1.9 kHz",
        source: include_str!("../../presets/fig5b.toml"),
    },
    PresetInfo {
        name: "fig6b",
        figure: "figure 6(b)",
        summary: "experimental sequence, four 2pi blue-sideband pulses, kappa/2pi = 1.76 kHz",
        source: include_str!("../../presets/fig6b.toml"),
    },
];

pub fn preset_info(name: &str) -> Result<&'static PresetInfo> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| Error::UnknownPreset(name.to_string()))
}

pub fn preset(name: &str) -> Result<Scenario> {
    parse_scenario(preset_info(name)?.source)
}
