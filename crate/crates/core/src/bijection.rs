//! The bijection `F: {∂r = f, ∂b = g}_N → {∂r = f + g}_N × {∂b = −f + g}_N`.
//!
//! `split` keeps every direction for the red part and reverses the red slots
//! for the blue part. `merge` takes directions from the red part and paints a
//! slot blue exactly when both parts agree on it. Neither map reads `f` or `g`.

use std::collections::HashMap;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::current::EdgeAmplitude;
use crate::error::{Error, Result};
use crate::graph::{Graph, SourceFunction};
use crate::multigraph::{Color, ColoredConfig, Multigraph, OneColorCounts, OrientedConfig, Slot};

/// `(ω_R, ω_B)`: two colorless orientations of the same 𝔾_N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SplitPair {
    pub red_part: OrientedConfig,
    pub blue_part: OrientedConfig,
}

pub fn split(config: &ColoredConfig) -> SplitPair {
    let red_part = config.slots().iter().map(|s| s.direction).collect();
    let blue_part = config
        .slots()
        .iter()
        .map(|s| match s.color {
            Color::Red => s.direction.reversed(),
            Color::Blue => s.direction,
        })
        .collect();
    SplitPair {
        red_part: OrientedConfig::new(red_part),
        blue_part: OrientedConfig::new(blue_part),
    }
}

pub fn merge(pair: &SplitPair) -> Result<ColoredConfig> {
    let (red, blue) = (pair.red_part.directions(), pair.blue_part.directions());
    if red.len() != blue.len() {
        return Err(Error::SlotMismatch {
            left: red.len(),
            right: blue.len(),
        });
    }
    let slots = red
        .iter()
        .zip(blue)
        .map(|(&r, &b)| Slot::new(if r == b { Color::Blue } else { Color::Red }, r))
        .collect();
    Ok(ColoredConfig::new(slots))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Counterexample {
    /// `merge(split(ω)) ≠ ω`.
    MergeSplit { config: ColoredConfig, got: ColoredConfig },
    /// `split(merge(p)) ≠ p`.
    SplitMerge { pair: SplitPair, got: Option<SplitPair> },
    /// `split(ω)` does not carry sources `(f + g, −f + g)`.
    SourceMapping {
        config: ColoredConfig,
        red: SourceFunction,
        blue: SourceFunction,
        red_part_source: SourceFunction,
        blue_part_source: SourceFunction,
    },
    /// `|{∂r = f, ∂b = g}_N| ≠ #{∂r = f + g}_N · #{∂r = −f + g}_N`.
    ClassSize {
        red: SourceFunction,
        blue: SourceFunction,
        class_size: String,
        product: String,
    },
}

/// Outcome of one exhaustive sweep over a fixed amplitude.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BijectionReport {
    #[serde(rename = "N")]
    pub amplitude: EdgeAmplitude,
    pub configs: u64,
    pub pairs: u64,
    pub classes: usize,
    pub checked: u64,
    pub failures: Vec<Counterexample>,
}

impl BijectionReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const SHARD: u64 = 1 << 12;

/// Checks both round trips, the source mapping, and every class size against
/// the one-color product over all `4^{ΣN}` configurations and pairs.
pub fn verify_bijection(graph: &Graph, amplitude: &EdgeAmplitude) -> Result<BijectionReport> {
    let mg = Multigraph::new(graph, amplitude.clone())?;
    let slots = mg.slot_count();
    assert!(slots <= 31, "4^{slots} configurations is beyond exhaustive reach");
    let total = 1u64 << (2 * slots);
    let shards = total.div_ceil(SHARD);

    type Classes = HashMap<(SourceFunction, SourceFunction), u64>;
    let forward: Vec<(Vec<Counterexample>, Classes)> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut failures = Vec::new();
            let mut classes = Classes::new();
            for index in shard * SHARD..((shard + 1) * SHARD).min(total) {
                let config = mg.colored_config_at(index);
                let pair = split(&config);
                match merge(&pair) {
                    Ok(back) if back == config => {}
                    Ok(got) => failures.push(Counterexample::MergeSplit { config: config.clone(), got }),
                    Err(_) => unreachable!("split preserves the slot count"),
                }
                let (red, blue) = mg.sources(&config);
                let red_part_source = mg.orientation_source(&pair.red_part);
                let blue_part_source = mg.orientation_source(&pair.blue_part);
                if red_part_source != &red + &blue || blue_part_source != &blue - &red {
                    failures.push(Counterexample::SourceMapping {
                        config,
                        red: red.clone(),
                        blue: blue.clone(),
                        red_part_source,
                        blue_part_source,
                    });
                }
                *classes.entry((red, blue)).or_default() += 1;
            }
            (failures, classes)
        })
        .collect();

    let backward: Vec<Vec<Counterexample>> = (0..shards)
        .into_par_iter()
        .map(|shard| {
            let mut failures = Vec::new();
            for index in shard * SHARD..((shard + 1) * SHARD).min(total) {
                let pair = SplitPair {
                    red_part: mg.oriented_config_at(index >> slots),
                    blue_part: mg.oriented_config_at(index & ((1 << slots) - 1)),
                };
                let got = merge(&pair).ok().map(|c| split(&c));
                if got.as_ref() != Some(&pair) {
                    failures.push(Counterexample::SplitMerge { pair, got });
                }
            }
            failures
        })
        .collect();

    let mut failures = Vec::new();
    let mut classes = Classes::new();
    for (f, c) in forward {
        failures.extend(f);
        for (k, v) in c {
            *classes.entry(k).or_default() += v;
        }
    }
    failures.extend(backward.into_iter().flatten());

    // class sizes against the one-color product, in both directions
    let one_color = OneColorCounts::tabulate(graph, amplitude)?;
    let mut class_failures = Vec::new();
    for ((red, blue), &size) in &classes {
        let product = one_color.get(&(red + blue)) * one_color.get(&(blue - red));
        if product != BigUint::from(size) {
            class_failures.push(Counterexample::ClassSize {
                red: red.clone(),
                blue: blue.clone(),
                class_size: size.to_string(),
                product: product.to_string(),
            });
        }
    }
    for (plus, a) in one_color.iter() {
        for (minus, b) in one_color.iter() {
            // f + g = plus, −f + g = minus
            let doubled_red = plus - minus;
            let doubled_blue = plus + minus;
            if doubled_red.values().iter().chain(doubled_blue.values()).any(|x| x % 2 != 0) {
                class_failures.push(Counterexample::ClassSize {
                    red: doubled_red,
                    blue: doubled_blue,
                    class_size: "0".into(),
                    product: (a * b).to_string(),
                });
                continue;
            }
            let halve = |s: &SourceFunction| SourceFunction::new(s.values().iter().map(|x| x / 2).collect());
            let key = (halve(&doubled_red), halve(&doubled_blue));
            if !classes.contains_key(&key) {
                class_failures.push(Counterexample::ClassSize {
                    red: key.0,
                    blue: key.1,
                    class_size: "0".into(),
                    product: (a * b).to_string(),
                });
            }
        }
    }
    class_failures.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    failures.extend(class_failures);

    Ok(BijectionReport {
        amplitude: amplitude.clone(),
        configs: total,
        pairs: total,
        classes: classes.len(),
        checked: 2 * total,
        failures,
    })
}
