//! Seeded constrained-random stimulus and the random/model source mux.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dut::{DutSpec, StimulusVector};
use crate::error::{Error, Result};

/// splitmix64 generator. Bit-exact on every platform, which keeps run logs
/// replayable from the seed alone.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prng {
    state: u64,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform real in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform index in `0..n` by modulo reduction. `n` must be non-zero.
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Mixes a seed into a well-separated derived seed (one splitmix64 step).
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    Prng::new(seed ^ salt.wrapping_mul(0xD6E8_FEB8_6659_FD93)).next_u64()
}

/// Value constraint on one input port.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Constraint {
    Full,
    /// Inclusive `[lo, hi]`.
    Range(u64, u64),
    /// `(value, weight)` pairs; a value is picked with probability
    /// proportional to its weight.
    Weighted(Vec<(u64, u64)>),
}

impl Constraint {
    fn validate(&self, max: u64, port: &str) -> Result<()> {
        match self {
            Constraint::Full => Ok(()),
            Constraint::Range(lo, hi) => {
                if lo > hi || *hi > max {
                    Err(Error::Config(format!(
                        "range [{lo}, {hi}] invalid for port `{port}` (max {max})"
                    )))
                } else {
                    Ok(())
                }
            }
            Constraint::Weighted(entries) => {
                let total = entries
                    .iter()
                    .try_fold(0u64, |acc, &(_, w)| acc.checked_add(w))
                    .ok_or_else(|| Error::Config(format!("weights overflow on port `{port}`")))?;
                if total == 0 {
                    return Err(Error::Config(format!(
                        "weights on port `{port}` must sum to a positive value"
                    )));
                }
                if let Some(&(v, _)) = entries.iter().find(|(v, _)| *v > max) {
                    return Err(Error::Config(format!("weighted value {v} does not fit port `{port}`")));
                }
                Ok(())
            }
        }
    }

    fn draw(&self, max: u64, u: u64) -> u64 {
        match self {
            Constraint::Full => draw_range(0, max, u),
            Constraint::Range(lo, hi) => draw_range(*lo, *hi, u),
            Constraint::Weighted(entries) => {
                let total: u64 = entries.iter().map(|&(_, w)| w).sum();
                let mut pick = u % total;
                for &(value, weight) in entries {
                    if pick < weight {
                        return value;
                    }
                    pick -= weight;
                }
                unreachable!("pick < total weight")
            }
        }
    }
}

fn draw_range(lo: u64, hi: u64, u: u64) -> u64 {
    let span = u128::from(hi - lo) + 1;
    lo + (u128::from(u) % span) as u64
}

/// One constraint per input port, in canonical port order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSet {
    per_port: Vec<Constraint>,
    max: Vec<u64>,
}

impl ConstraintSet {
    pub fn full_range(spec: &DutSpec) -> Self {
        ConstraintSet {
            per_port: vec![Constraint::Full; spec.inputs.len()],
            max: spec.inputs.iter().map(|p| p.max_value()).collect(),
        }
    }

    pub fn new(spec: &DutSpec, per_port: Vec<Constraint>) -> Result<Self> {
        if per_port.len() != spec.inputs.len() {
            return Err(Error::Config(format!(
                "{} constraints for {} input ports",
                per_port.len(),
                spec.inputs.len()
            )));
        }
        for (c, port) in per_port.iter().zip(&spec.inputs) {
            c.validate(port.max_value(), &port.name)?;
        }
        Ok(ConstraintSet {
            per_port,
            max: spec.inputs.iter().map(|p| p.max_value()).collect(),
        })
    }

    /// Builds a set from named overrides; unnamed ports stay full-range.
    pub fn from_named<'a>(spec: &DutSpec, named: impl IntoIterator<Item = (&'a str, Constraint)>) -> Result<Self> {
        let mut per_port = vec![Constraint::Full; spec.inputs.len()];
        for (name, c) in named {
            let idx = spec
                .inputs
                .iter()
                .position(|p| p.name == name)
                .ok_or_else(|| Error::Config(format!("no input port named `{name}`")))?;
            per_port[idx] = c;
        }
        Self::new(spec, per_port)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.per_port
    }
}

/// Draws one value per port in port order, one `next_u64` per port.
pub fn random_stimulus(constraints: &ConstraintSet, prng: &mut Prng) -> StimulusVector {
    StimulusVector(
        constraints
            .per_port
            .iter()
            .zip(&constraints.max)
            .map(|(c, &max)| c.draw(max, prng.next_u64()))
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    #[serde(rename = "TRAIN")]
    Train,
    #[serde(rename = "TEST")]
    Test,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StimulusSource {
    #[serde(rename = "RANDOM")]
    Random,
    #[serde(rename = "MODEL")]
    Model,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Train => "TRAIN",
            Phase::Test => "TEST",
        })
    }
}

impl fmt::Display for StimulusSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StimulusSource::Random => "RANDOM",
            StimulusSource::Model => "MODEL",
        })
    }
}

/// Random stimulus during training; the model's prediction during test,
/// unless no model exists or the caller asks for the random fallback.
pub fn mux_select(phase: Phase, model_ready: bool, fallback: bool) -> StimulusSource {
    match phase {
        Phase::Test if model_ready && !fallback => StimulusSource::Model,
        _ => StimulusSource::Random,
    }
}
