//! Bright/dark detection and finite-shot sampling.

use super::{Apparatus, Detection, PulseEvent};
use crate::error::{Error, Result};
use crate::operators::{populations, spin_projector, QuantumState};
use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Tolerance on probabilities summing past 1.
const SUM_SLACK: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionPattern {
    pub pattern: Vec<Detection>,
    pub probability: f64,
}

/// Apply the mapping pulses (hopping on), then project every ion onto
/// bright or dark. Patterns are listed with ion 0 most significant and
/// bright before dark.
pub fn detection_map(app: &Apparatus, state: &QuantumState, mapping: &[PulseEvent]) -> Result<Vec<DetectionPattern>> {
    let mapped = app.apply_pulses(state, mapping, true)?;
    let layout = app.layout();
    let n = layout.n_ions();
    let patterns: Vec<Vec<Detection>> = (0..1usize << n)
        .map(|bits| {
            (0..n)
                .map(|i| {
                    if bits >> (n - 1 - i) & 1 == 0 {
                        Detection::Bright
                    } else {
                        Detection::Dark
                    }
                })
                .collect()
        })
        .collect();
    let projectors = patterns
        .iter()
        .map(|p| spin_projector(layout, &p.iter().map(|d| d.spin()).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let probs = populations(&mapped, &projectors)?;
    Ok(patterns
        .into_iter()
        .zip(probs)
        .map(|(pattern, probability)| DetectionPattern { pattern, probability })
        .collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct ShotSample {
    pub counts: Vec<u32>,
    pub frequencies: Vec<f64>,
}

/// Multinomial draw of `shots` outcomes over the given categories plus an
/// implicit remainder `1 - Σp`.
pub fn sample_shots(probabilities: &[f64], shots: u32, seed: u64) -> Result<ShotSample> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    if let Some(p) = probabilities.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter(format!("probability {p} is negative or not finite")));
    }
    let total: f64 = probabilities.iter().sum();
    if total > 1.0 + SUM_SLACK {
        return Err(Error::InvalidParameter(format!("probabilities sum to {total} > 1")));
    }
    let mut weights = probabilities.to_vec();
    weights.push((1.0 - total).max(0.0));
    let dist = WeightedIndex::new(&weights)
        .map_err(|e| Error::InvalidParameter(format!("probabilities: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u32; weights.len()];
    for _ in 0..shots {
        counts[dist.sample(&mut rng)] += 1;
    }
    counts.pop();
    let frequencies = counts.iter().map(|&c| c as f64 / shots as f64).collect();
    Ok(ShotSample { counts, frequencies })
}
