//! The multigraph 𝔾_N: `N_e` distinguishable parallel slots per edge `e`,
//! painted red or blue and oriented along or against the canonical edge
//! direction.
//!
//! Two independent ways of counting `#{∂r = f, ∂b = g}_N` live here:
//! exhaustive enumeration of all `4^{ΣN}` colored configurations, and the
//! sum over current pairs `(n, m)` with `|n + m| = N` of
//! `Π_e N_e! / (n_fwd! n_bwd! m_fwd! m_bwd!)`.

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::current::EdgeAmplitude;
use crate::error::Result;
use crate::graph::{Graph, SourceFunction};
use crate::rational::{binomial, multinomial};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

/// Orientation of a slot relative to its edge's canonical `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Fwd,
    Bwd,
}

impl Direction {
    pub fn reversed(self) -> Direction {
        match self {
            Direction::Fwd => Direction::Bwd,
            Direction::Bwd => Direction::Fwd,
        }
    }

    fn sign(self) -> i64 {
        match self {
            Direction::Fwd => 1,
            Direction::Bwd => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Slot {
    pub color: Color,
    pub direction: Direction,
}

impl Slot {
    const ALL: [Slot; 4] = [
        Slot { color: Color::Red, direction: Direction::Fwd },
        Slot { color: Color::Red, direction: Direction::Bwd },
        Slot { color: Color::Blue, direction: Direction::Fwd },
        Slot { color: Color::Blue, direction: Direction::Bwd },
    ];

    pub fn new(color: Color, direction: Direction) -> Slot {
        Slot { color, direction }
    }
}

/// ω: a color and a direction for every slot, in slot order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ColoredConfig(Vec<Slot>);

impl ColoredConfig {
    pub fn new(slots: Vec<Slot>) -> Self {
        ColoredConfig(slots)
    }

    pub fn slots(&self) -> &[Slot] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// ξ: a direction for every slot, colorless.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OrientedConfig(Vec<Direction>);

impl OrientedConfig {
    pub fn new(directions: Vec<Direction>) -> Self {
        OrientedConfig(directions)
    }

    pub fn directions(&self) -> &[Direction] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> OrientedConfig {
        OrientedConfig(self.0.iter().map(|d| d.reversed()).collect())
    }
}

/// 𝔾_N over a borrowed graph. Slots of edge 0 come first, then edge 1, ...
#[derive(Debug, Clone)]
pub struct Multigraph<'g> {
    graph: &'g Graph,
    amplitude: EdgeAmplitude,
    slot_edges: Vec<usize>,
}

impl<'g> Multigraph<'g> {
    pub fn new(graph: &'g Graph, amplitude: EdgeAmplitude) -> Result<Self> {
        amplitude.check(graph)?;
        let slot_edges = amplitude
            .values()
            .iter()
            .enumerate()
            .flat_map(|(e, &k)| std::iter::repeat_n(e, k as usize))
            .collect();
        Ok(Multigraph {
            graph,
            amplitude,
            slot_edges,
        })
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn amplitude(&self) -> &EdgeAmplitude {
        &self.amplitude
    }

    pub fn slot_count(&self) -> usize {
        self.slot_edges.len()
    }

    /// Base edge carrying `slot`.
    pub fn slot_edge(&self, slot: usize) -> usize {
        self.slot_edges[slot]
    }

    /// deg_{𝔾_N}(x) for every vertex.
    pub fn degrees(&self) -> Vec<u32> {
        let mut deg = vec![0; self.graph.vertex_count()];
        for (edge, &k) in self.graph.edges().iter().zip(self.amplitude.values()) {
            deg[edge.tail] += k;
            deg[edge.head] += k;
        }
        deg
    }

    fn push_flow(&self, slot: usize, direction: Direction, into: &mut [i64]) {
        let edge = self.graph.edge(self.slot_edges[slot]);
        into[edge.tail] += direction.sign();
        into[edge.head] -= direction.sign();
    }

    /// `(∂r, ∂b)`: sources of the red and blue slot currents.
    pub fn sources(&self, config: &ColoredConfig) -> (SourceFunction, SourceFunction) {
        assert_eq!(config.len(), self.slot_count(), "config on a different multigraph");
        let n = self.graph.vertex_count();
        let (mut red, mut blue) = (vec![0; n], vec![0; n]);
        for (slot, s) in config.slots().iter().enumerate() {
            let target = match s.color {
                Color::Red => &mut red,
                Color::Blue => &mut blue,
            };
            self.push_flow(slot, s.direction, target);
        }
        (SourceFunction::new(red), SourceFunction::new(blue))
    }

    /// Source of a single-color orientation.
    pub fn orientation_source(&self, config: &OrientedConfig) -> SourceFunction {
        assert_eq!(config.len(), self.slot_count(), "config on a different multigraph");
        let mut out = vec![0; self.graph.vertex_count()];
        for (slot, &d) in config.directions().iter().enumerate() {
            self.push_flow(slot, d, &mut out);
        }
        SourceFunction::new(out)
    }

    /// All `4^{ΣN}` colored configurations, lexicographic with slot 0 most
    /// significant and slot states ordered (Red,Fwd) < (Red,Bwd) < (Blue,Fwd) < (Blue,Bwd).
    pub fn colored_configs(&self) -> impl Iterator<Item = ColoredConfig> + '_ {
        odometer(self.slot_count(), 4).map(|digits| {
            ColoredConfig(digits.into_iter().map(|d| Slot::ALL[d as usize]).collect())
        })
    }

    /// All `2^{ΣN}` orientations, Fwd < Bwd, slot 0 most significant.
    pub fn oriented_configs(&self) -> impl Iterator<Item = OrientedConfig> + '_ {
        odometer(self.slot_count(), 2).map(|digits| OrientedConfig(digits.into_iter().map(direction_digit).collect()))
    }

    /// The configuration at position `index` of [`Self::colored_configs`].
    pub fn colored_config_at(&self, index: u64) -> ColoredConfig {
        let digits = decode(index, self.slot_count(), 4);
        ColoredConfig(digits.into_iter().map(|d| Slot::ALL[d as usize]).collect())
    }

    /// The orientation at position `index` of [`Self::oriented_configs`].
    pub fn oriented_config_at(&self, index: u64) -> OrientedConfig {
        OrientedConfig(decode(index, self.slot_count(), 2).into_iter().map(direction_digit).collect())
    }

    /// Materialises `{∂r = red, ∂b = blue}_N`.
    pub fn enumerate_configs(
        &self,
        red: &SourceFunction,
        blue: &SourceFunction,
    ) -> impl Iterator<Item = ColoredConfig> + '_ {
        let (red, blue) = (red.clone(), blue.clone());
        let feasible = red.total() == 0 && blue.total() == 0;
        self.colored_configs()
            .take_while(move |_| feasible)
            .filter(move |c| {
                let (r, b) = self.sources(c);
                r == red && b == blue
            })
    }
}

fn direction_digit(d: u8) -> Direction {
    if d == 0 {
        Direction::Fwd
    } else {
        Direction::Bwd
    }
}

fn decode(mut index: u64, width: usize, base: u64) -> Vec<u8> {
    let mut digits = vec![0u8; width];
    for d in digits.iter_mut().rev() {
        *d = (index % base) as u8;
        index /= base;
    }
    debug_assert_eq!(index, 0, "index out of range");
    digits
}

/// Every word of length `width` over `0..base`, lexicographically.
fn odometer(width: usize, base: u8) -> impl Iterator<Item = Vec<u8>> {
    let mut state = Some(vec![0u8; width]);
    std::iter::from_fn(move || {
        let current = state.take()?;
        let mut next = current.clone();
        for i in (0..width).rev() {
            if next[i] + 1 < base {
                next[i] += 1;
                state = Some(next);
                break;
            }
            next[i] = 0;
        }
        Some(current)
    })
}

/// Which route [`count_two_color`] takes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountMethod {
    /// Enumerate all `4^{ΣN}` colored configurations.
    Direct,
    /// Sum multinomial factors over current pairs.
    #[default]
    Multinomial,
}

/// `#{∂r = f, ∂b = g}_N`; zero when either source has a nonzero total.
pub fn count_two_color(
    graph: &Graph,
    amplitude: &EdgeAmplitude,
    f: &SourceFunction,
    g: &SourceFunction,
    method: CountMethod,
) -> Result<BigUint> {
    amplitude.check(graph)?;
    graph.check_source(f)?;
    graph.check_source(g)?;
    if f.total() != 0 || g.total() != 0 {
        return Ok(BigUint::zero());
    }
    Ok(match method {
        CountMethod::Direct => {
            let mg = Multigraph::new(graph, amplitude.clone())?;
            BigUint::from(mg.enumerate_configs(f, g).count())
        }
        CountMethod::Multinomial => {
            let mut total = BigUint::zero();
            for_each_current_pair(graph, amplitude, |red, blue, weight| {
                if red == f.values() && blue == g.values() {
                    total += weight;
                }
            });
            total
        }
    })
}

/// `#{∂r = f}_N`: orientations of 𝔾_N with source `f`, computed as
/// `Σ_{|n| = N, ∂n = f} Π_e binom(N_e, n_fwd)`.
pub fn count_one_color(graph: &Graph, amplitude: &EdgeAmplitude, f: &SourceFunction) -> Result<BigUint> {
    amplitude.check(graph)?;
    graph.check_source(f)?;
    let mut total = BigUint::zero();
    if f.total() != 0 {
        return Ok(total);
    }
    for_each_current(graph, amplitude, |src, weight| {
        if src == f.values() {
            total += weight;
        }
    });
    Ok(total)
}

/// Visits every current with amplitude `N` together with its source and
/// `Π_e binom(N_e, n_fwd)`.
fn for_each_current(graph: &Graph, amplitude: &EdgeAmplitude, mut visit: impl FnMut(&[i64], &BigUint)) {
    let per_edge: Vec<Vec<(i64, BigUint)>> = amplitude
        .values()
        .iter()
        .map(|&k| (0..=k).map(|fwd| (i64::from(fwd) - i64::from(k - fwd), binomial(k, fwd))).collect())
        .collect();

    fn walk(
        graph: &Graph,
        per_edge: &[Vec<(i64, BigUint)>],
        e: usize,
        src: &mut [i64],
        weight: &BigUint,
        visit: &mut dyn FnMut(&[i64], &BigUint),
    ) {
        let Some(choices) = per_edge.get(e) else {
            visit(src, weight);
            return;
        };
        let edge = graph.edge(e);
        for (net, coeff) in choices {
            src[edge.tail] += net;
            src[edge.head] -= net;
            walk(graph, per_edge, e + 1, src, &(weight * coeff), visit);
            src[edge.tail] -= net;
            src[edge.head] += net;
        }
    }

    let mut src = vec![0; graph.vertex_count()];
    walk(graph, &per_edge, 0, &mut src, &BigUint::one(), &mut visit);
}

/// Visits every pair `(n, m)` with `|n + m| = N` together with `(∂n, ∂m)`
/// and `Π_e N_e! / (n_fwd! n_bwd! m_fwd! m_bwd!)`.
fn for_each_current_pair(
    graph: &Graph,
    amplitude: &EdgeAmplitude,
    mut visit: impl FnMut(&[i64], &[i64], &BigUint),
) {
    // per edge: (red net flow, blue net flow, multinomial)
    let per_edge: Vec<Vec<(i64, i64, BigUint)>> = amplitude
        .values()
        .iter()
        .map(|&k| {
            let mut choices = Vec::new();
            for a in 0..=k {
                for b in 0..=k - a {
                    for c in 0..=k - a - b {
                        let d = k - a - b - c;
                        let red = i64::from(a) - i64::from(b);
                        let blue = i64::from(c) - i64::from(d);
                        choices.push((red, blue, multinomial(k, &[a, b, c, d])));
                    }
                }
            }
            choices
        })
        .collect();

    type Visit<'v> = dyn FnMut(&[i64], &[i64], &BigUint) + 'v;

    struct Walk<'a> {
        graph: &'a Graph,
        per_edge: &'a [Vec<(i64, i64, BigUint)>],
        red: Vec<i64>,
        blue: Vec<i64>,
    }

    impl Walk<'_> {
        fn go(&mut self, e: usize, weight: &BigUint, visit: &mut Visit<'_>) {
            let Some(choices) = self.per_edge.get(e) else {
                visit(&self.red, &self.blue, weight);
                return;
            };
            let edge = self.graph.edge(e);
            for (r, b, coeff) in choices {
                self.red[edge.tail] += r;
                self.red[edge.head] -= r;
                self.blue[edge.tail] += b;
                self.blue[edge.head] -= b;
                self.go(e + 1, &(weight * coeff), visit);
                self.red[edge.tail] -= r;
                self.red[edge.head] += r;
                self.blue[edge.tail] -= b;
                self.blue[edge.head] += b;
            }
        }
    }

    let n = graph.vertex_count();
    let mut walk = Walk {
        graph,
        per_edge: &per_edge,
        red: vec![0; n],
        blue: vec![0; n],
    };
    walk.go(0, &BigUint::one(), &mut visit);
}

/// Every nonempty class `{∂r = f, ∂b = g}_N` of one amplitude, with its size.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TwoColorCounts {
    counts: HashMap<(SourceFunction, SourceFunction), BigUint>,
}

impl TwoColorCounts {
    pub fn tabulate(graph: &Graph, amplitude: &EdgeAmplitude, method: CountMethod) -> Result<Self> {
        amplitude.check(graph)?;
        let mut counts: HashMap<(SourceFunction, SourceFunction), BigUint> = HashMap::new();
        match method {
            CountMethod::Direct => {
                let mg = Multigraph::new(graph, amplitude.clone())?;
                for config in mg.colored_configs() {
                    *counts.entry(mg.sources(&config)).or_default() += 1u32;
                }
            }
            CountMethod::Multinomial => {
                for_each_current_pair(graph, amplitude, |red, blue, weight| {
                    let key = (SourceFunction::new(red.to_vec()), SourceFunction::new(blue.to_vec()));
                    *counts.entry(key).or_default() += weight;
                });
            }
        }
        Ok(TwoColorCounts { counts })
    }

    pub fn get(&self, f: &SourceFunction, g: &SourceFunction) -> BigUint {
        // the key clone is cheap next to the counting work upstream
        self.counts
            .get(&(f.clone(), g.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(SourceFunction, SourceFunction), &BigUint)> {
        self.counts.iter()
    }
}

/// Every nonempty class `{∂r = f}_N` of one amplitude, with its size.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OneColorCounts {
    counts: HashMap<SourceFunction, BigUint>,
}

impl OneColorCounts {
    pub fn tabulate(graph: &Graph, amplitude: &EdgeAmplitude) -> Result<Self> {
        amplitude.check(graph)?;
        let mut counts: HashMap<SourceFunction, BigUint> = HashMap::new();
        for_each_current(graph, amplitude, |src, weight| {
            *counts.entry(SourceFunction::new(src.to_vec())).or_default() += weight;
        });
        Ok(OneColorCounts { counts })
    }

    pub fn get(&self, f: &SourceFunction) -> BigUint {
        self.counts.get(f).cloned().unwrap_or_default()
    }

    pub fn total(&self) -> BigUint {
        self.counts.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SourceFunction, &BigUint)> {
        self.counts.iter()
    }
}
