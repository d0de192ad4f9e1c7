//! Currents on oriented edges: amplitude, source, weight, and exact
//! enumeration under a fixed amplitude or a total-degree cap.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, SourceFunction};
use crate::rational::factorial;

/// Per-edge nonnegative integers; indexes the multigraph 𝔾_N.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeAmplitude(Vec<u32>);

impl EdgeAmplitude {
    pub fn new(values: Vec<u32>) -> Self {
        EdgeAmplitude(values)
    }

    pub fn zeros(edge_count: usize) -> Self {
        EdgeAmplitude(vec![0; edge_count])
    }

    /// Constant amplitude `n` on every edge.
    pub fn uniform(edge_count: usize, n: u32) -> Self {
        EdgeAmplitude(vec![n; edge_count])
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Σ_e N_e.
    pub fn total(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn check(&self, graph: &Graph) -> Result<()> {
        if self.0.len() != graph.edge_count() {
            return Err(Error::AmplitudeLength {
                expected: graph.edge_count(),
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

/// Nonnegative integers on oriented edges, laid out as in
/// [`Graph::oriented_edges`]: slot `2e` forward, `2e + 1` backward.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Current(Vec<u32>);

impl Current {
    pub fn zero(graph: &Graph) -> Self {
        Current(vec![0; 2 * graph.edge_count()])
    }

    pub fn from_values(graph: &Graph, values: Vec<u32>) -> Result<Self> {
        if values.len() != 2 * graph.edge_count() {
            return Err(Error::AmplitudeLength {
                expected: 2 * graph.edge_count(),
                got: values.len(),
            });
        }
        Ok(Current(values))
    }

    /// Builds a current from `(tail, head, value)` triples; unlisted edges are 0.
    pub fn from_triples(graph: &Graph, triples: &[(usize, usize, u32)]) -> Option<Self> {
        let mut current = Current::zero(graph);
        for &(tail, head, value) in triples {
            let base = graph
                .edges()
                .iter()
                .position(|e| (e.tail, e.head) == (tail.min(head), tail.max(head)))?;
            current.0[2 * base + usize::from(tail > head)] = value;
        }
        Some(current)
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    /// `(n_fwd, n_bwd)` on base edge `e`.
    pub fn on_edge(&self, e: usize) -> (u32, u32) {
        (self.0[2 * e], self.0[2 * e + 1])
    }

    /// |n|_xy = n_{x→y} + n_{y→x}.
    pub fn amplitude(&self) -> EdgeAmplitude {
        EdgeAmplitude(self.0.chunks_exact(2).map(|p| p[0] + p[1]).collect())
    }

    /// ∂n_x = Σ_{y∼x} (n_{x→y} − n_{y→x}).
    pub fn source(&self, graph: &Graph) -> SourceFunction {
        let mut out = SourceFunction::zeros(graph.vertex_count());
        let values = out.values_mut();
        for (e, edge) in graph.edges().iter().enumerate() {
            let (fwd, bwd) = self.on_edge(e);
            let net = i64::from(fwd) - i64::from(bwd);
            values[edge.tail] += net;
            values[edge.head] -= net;
        }
        out
    }

    /// w_J(n) = Π_{oriented e} (J_e/2)^{n_e} / n_e!.
    pub fn weight(&self, graph: &Graph) -> BigRational {
        self.weight_with(&graph.half_couplings())
    }

    pub(crate) fn weight_with(&self, half_couplings: &[BigRational]) -> BigRational {
        let mut numer = BigInt::one();
        let mut denom = BigInt::one();
        for (i, &n) in self.0.iter().enumerate() {
            if n == 0 {
                continue;
            }
            let half = &half_couplings[i / 2];
            numer *= Pow::pow(half.numer(), n);
            denom *= Pow::pow(half.denom(), n) * BigInt::from(factorial(n));
        }
        BigRational::new(numer, denom)
    }

    /// Swaps n_{x→y} and n_{y→x} on every edge.
    pub fn reversed(&self) -> Current {
        Current(self.0.chunks_exact(2).flat_map(|p| [p[1], p[0]]).collect())
    }

    /// `{"u->v": n}` over all oriented edges, in oriented-edge order.
    pub fn to_json(&self, graph: &Graph) -> serde_json::Value {
        let map = graph
            .oriented_edges()
            .iter()
            .zip(&self.0)
            .map(|(oe, &n)| (format!("{}->{}", oe.tail, oe.head), n.into()))
            .collect();
        serde_json::Value::Object(map)
    }
}

/// How [`enumerate_currents`] bounds the search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CurrentConstraint {
    /// Exactly this amplitude on every edge.
    Amplitude(EdgeAmplitude),
    /// Σ_e |n|_e ≤ cap.
    DegreeCap(u32),
}

/// Streams currents in lexicographic order of their oriented values,
/// keeping those whose source equals `filter` when one is given.
pub fn enumerate_currents<'g>(
    graph: &'g Graph,
    constraint: CurrentConstraint,
    filter: Option<SourceFunction>,
) -> Currents<'g> {
    let width = 2 * graph.edge_count();
    let mut exhausted = filter.as_ref().is_some_and(|f| f.total() != 0);
    let state = match &constraint {
        CurrentConstraint::Amplitude(n) => {
            exhausted |= n.len() != graph.edge_count();
            // first in lexicographic order: all mass on the backward slot
            n.values().iter().flat_map(|&k| [0, k]).collect()
        }
        CurrentConstraint::DegreeCap(_) => vec![0; width],
    };
    Currents {
        graph,
        constraint,
        filter,
        state,
        pending: !exhausted,
    }
}

pub struct Currents<'g> {
    graph: &'g Graph,
    constraint: CurrentConstraint,
    filter: Option<SourceFunction>,
    state: Vec<u32>,
    pending: bool,
}

impl Currents<'_> {
    fn advance(&mut self) {
        match &self.constraint {
            CurrentConstraint::Amplitude(amp) => {
                for e in (0..amp.len()).rev() {
                    if self.state[2 * e] < amp.values()[e] {
                        self.state[2 * e] += 1;
                        self.state[2 * e + 1] -= 1;
                        return;
                    }
                    self.state[2 * e] = 0;
                    self.state[2 * e + 1] = amp.values()[e];
                }
                self.pending = false;
            }
            &CurrentConstraint::DegreeCap(cap) => {
                let mut prefix: u32 = self.state.iter().sum();
                for i in (0..self.state.len()).rev() {
                    prefix -= self.state[i];
                    if prefix + self.state[i] < cap {
                        self.state[i] += 1;
                        return;
                    }
                    self.state[i] = 0;
                }
                self.pending = false;
            }
        }
    }
}

impl Iterator for Currents<'_> {
    type Item = Current;

    fn next(&mut self) -> Option<Current> {
        while self.pending {
            let candidate = Current(self.state.clone());
            self.advance();
            match &self.filter {
                Some(f) if candidate.source(self.graph) != *f => continue,
                _ => return Some(candidate),
            }
        }
        None
    }
}

/// All amplitude vectors on `edge_count` edges with Σ N_e = `total`,
/// in lexicographic order.
pub fn amplitudes_with_total(edge_count: usize, total: u32) -> Vec<EdgeAmplitude> {
    fn fill(prefix: &mut Vec<u32>, slots: usize, left: u32, out: &mut Vec<EdgeAmplitude>) {
        if slots == 1 {
            prefix.push(left);
            out.push(EdgeAmplitude(prefix.clone()));
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            fill(prefix, slots - 1, left - k, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    match edge_count {
        0 if total == 0 => out.push(EdgeAmplitude(Vec::new())),
        0 => {}
        _ => fill(&mut Vec::with_capacity(edge_count), edge_count, total, &mut out),
    }
    out
}

/// All amplitude vectors with Σ N_e ≤ `cap`, graded by total.
pub fn amplitudes_up_to(edge_count: usize, cap: u32) -> Vec<EdgeAmplitude> {
    (0..=cap)
        .flat_map(|t| amplitudes_with_total(edge_count, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn edge(j: BigRational) -> Graph {
        Graph::single_edge(j)
    }

    #[test]
    fn amplitude_examples() {
        let g = edge(q(1, 1));
        assert_eq!(Current::zero(&g).amplitude().values(), &[0]);
        let n = Current::from_triples(&g, &[(0, 1, 2), (1, 0, 1)]).unwrap();
        assert_eq!(n.amplitude().values(), &[3]);

        let tri = Graph::cycle(3, q(1, 2));
        let n = Current::from_triples(&tri, &[(0, 1, 1)]).unwrap();
        assert_eq!(n.amplitude().values(), &[1, 0, 0]);
    }

    #[test]
    fn source_examples() {
        let g = edge(q(1, 1));
        assert!(Current::zero(&g).source(&g).is_zero());
        let n = Current::from_triples(&g, &[(0, 1, 1)]).unwrap();
        assert_eq!(n.source(&g).values(), &[1, -1]);

        let tri = Graph::cycle(3, q(1, 2));
        let cyc = Current::from_triples(&tri, &[(0, 1, 1), (1, 2, 1), (2, 0, 1)]).unwrap();
        assert!(cyc.source(&tri).is_zero());
    }

    #[test]
    fn weight_examples() {
        let g = edge(q(1, 1));
        assert_eq!(Current::zero(&g).weight(&g), q(1, 1));
        let n = Current::from_triples(&g, &[(0, 1, 2), (1, 0, 1)]).unwrap();
        assert_eq!(n.weight(&g), q(1, 16));

        let g2 = edge(q(2, 1));
        let n = Current::from_triples(&g2, &[(0, 1, 1)]).unwrap();
        assert_eq!(n.weight(&g2), q(1, 1));
    }

    #[test]
    fn filtered_enumeration_examples() {
        let g = edge(q(1, 1));
        let dipole = SourceFunction::dipole(2, 0, 1);
        let found: Vec<_> = enumerate_currents(
            &g,
            CurrentConstraint::Amplitude(EdgeAmplitude::new(vec![1])),
            Some(dipole),
        )
        .collect();
        assert_eq!(found, vec![Current::from_triples(&g, &[(0, 1, 1)]).unwrap()]);

        let found: Vec<_> = enumerate_currents(
            &g,
            CurrentConstraint::Amplitude(EdgeAmplitude::new(vec![2])),
            Some(SourceFunction::zeros(2)),
        )
        .collect();
        assert_eq!(found, vec![Current::from_triples(&g, &[(0, 1, 1), (1, 0, 1)]).unwrap()]);

        let tri = Graph::cycle(3, q(1, 2));
        let found: Vec<_> = enumerate_currents(
            &tri,
            CurrentConstraint::DegreeCap(0),
            Some(SourceFunction::zeros(3)),
        )
        .collect();
        assert_eq!(found, vec![Current::zero(&tri)]);
    }

    #[test]
    fn cap_mode_matches_brute_force() {
        let path = Graph::path(3, q(1, 1));
        for cap in 0..5u32 {
            let listed: Vec<_> = enumerate_currents(&path, CurrentConstraint::DegreeCap(cap), None)
                .map(|c| c.values().to_vec())
                .collect();
            let mut brute = Vec::new();
            for a in 0..=cap {
                for b in 0..=cap {
                    for c in 0..=cap {
                        for d in 0..=cap {
                            if a + b + c + d <= cap {
                                brute.push(vec![a, b, c, d]);
                            }
                        }
                    }
                }
            }
            assert_eq!(listed, brute, "cap {cap}");
        }
    }

    #[test]
    fn nonzero_total_filter_is_empty() {
        let tri = Graph::cycle(3, q(1, 1));
        let f = SourceFunction::new(vec![1, 0, 0]);
        assert_eq!(enumerate_currents(&tri, CurrentConstraint::DegreeCap(4), Some(f)).count(), 0);
    }

    #[test]
    fn amplitude_sweep_is_complete() {
        assert_eq!(amplitudes_up_to(0, 3), vec![EdgeAmplitude::new(vec![])]);
        assert_eq!(amplitudes_up_to(1, 2).len(), 3);
        // C(cap + E, E)
        assert_eq!(amplitudes_up_to(3, 4).len(), 35);
        assert_eq!(amplitudes_up_to(4, 4).len(), 70);
        let sweep = amplitudes_up_to(3, 4);
        assert!(sweep.windows(2).all(|w| (w[0].total(), &w[0]) < (w[1].total(), &w[1])));
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        prop_oneof![
            Just(Graph::single_edge(q(1, 1))),
            Just(Graph::path(3, q(1, 3))),
            Just(Graph::cycle(3, q(1, 2))),
            Just(Graph::cycle(4, q(3, 2))),
        ]
    }

    proptest! {
        #[test]
        fn source_sums_to_zero_and_reversal_symmetries(
            g in small_graph(),
            raw in proptest::collection::vec(0u32..4, 8),
        ) {
            let n = Current::from_values(&g, raw[..2 * g.edge_count()].to_vec()).unwrap();
            let src = n.source(&g);
            prop_assert_eq!(src.total(), 0);
            let rev = n.reversed();
            prop_assert_eq!(rev.weight(&g), n.weight(&g));
            prop_assert_eq!(rev.source(&g), -&src);
            prop_assert_eq!(rev.amplitude(), n.amplitude());
            prop_assert!(!n.weight(&g).is_zero());
        }

        #[test]
        fn fixed_amplitude_count_is_product(
            g in small_graph(),
            raw in proptest::collection::vec(0u32..4, 4),
        ) {
            let amp = EdgeAmplitude::new(raw[..g.edge_count()].to_vec());
            let expected: usize = amp.values().iter().map(|&k| k as usize + 1).product();
            let all: Vec<_> = enumerate_currents(&g, CurrentConstraint::Amplitude(amp.clone()), None).collect();
            prop_assert_eq!(all.len(), expected);
            prop_assert!(all.iter().all(|c| c.amplitude() == amp));
            prop_assert!(all.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
