//! Finite simple graphs with exact positive couplings, their oriented edges,
//! and integer-valued vertex functions used as current sources.
//!
//! Every unoriented edge is stored in canonical orientation `tail < head`.
//! Oriented edge `2 * e` runs along that orientation ("forward"), `2 * e + 1`
//! runs against it.

use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, Neg, Sub};

use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use crate::error::{Error, GraphError, Result};
use crate::rational::{format_rational, parse_rational};

/// An unoriented edge with its coupling; `tail < head` always.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
    pub coupling: BigRational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge {
    pub tail: usize,
    pub head: usize,
    /// Index of the underlying unoriented edge.
    pub base: usize,
}

impl OrientedEdge {
    pub fn is_forward(&self) -> bool {
        self.tail < self.head
    }

    pub fn reversed(&self) -> OrientedEdge {
        OrientedEdge {
            tail: self.head,
            head: self.tail,
            base: self.base,
        }
    }

    /// Position in [`Graph::oriented_edges`].
    pub fn index(&self) -> usize {
        2 * self.base + usize::from(!self.is_forward())
    }
}

/// JSON instance description: `{"vertices": [..], "edges": [{"u", "v", "J": "p/q"}]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphSpec {
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    #[serde(rename = "J")]
    pub coupling: String,
}

/// A validated finite simple graph Λ = (V, E) with couplings J: E → (0, ∞) ∩ ℚ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<Edge>,
}

impl Graph {
    /// Validates and builds a graph on vertices `0..vertex_count`.
    ///
    /// Edges keep their input order; each is stored as `(min, max)`.
    pub fn new<I>(vertex_count: usize, edges: I) -> Result<Graph, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, BigRational)>,
    {
        let mut seen = BTreeSet::new();
        let mut stored = Vec::new();
        for (u, v, coupling) in edges {
            if u == v {
                return Err(GraphError::SelfLoop { vertex: u });
            }
            for w in [u, v] {
                if w >= vertex_count {
                    return Err(GraphError::DanglingEndpoint { vertex: w });
                }
            }
            let (tail, head) = (u.min(v), u.max(v));
            if !coupling.is_positive() {
                return Err(GraphError::NonPositiveCoupling {
                    u: tail,
                    v: head,
                    value: format_rational(&coupling),
                });
            }
            if !seen.insert((tail, head)) {
                return Err(GraphError::DuplicateEdge { u: tail, v: head });
            }
            stored.push(Edge {
                tail,
                head,
                coupling,
            });
        }
        Ok(Graph {
            vertex_count,
            edges: stored,
        })
    }

    pub fn from_spec(spec: &GraphSpec) -> Result<Graph, GraphError> {
        let count = spec.vertices.len();
        let ids: BTreeSet<usize> = spec.vertices.iter().copied().collect();
        if ids.len() != count || ids.iter().next_back().is_some_and(|&m| m + 1 != count) {
            return Err(GraphError::NonDenseVertices { count });
        }
        let mut edges = Vec::with_capacity(spec.edges.len());
        for e in &spec.edges {
            edges.push((e.u, e.v, parse_rational(&e.coupling)?));
        }
        Graph::new(count, edges)
    }

    pub fn from_json(text: &str) -> Result<Graph> {
        let spec: GraphSpec = serde_json::from_str(text)?;
        Ok(Graph::from_spec(&spec)?)
    }

    pub fn to_spec(&self) -> GraphSpec {
        GraphSpec {
            vertices: (0..self.vertex_count).collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    u: e.tail,
                    v: e.head,
                    coupling: format_rational(&e.coupling),
                })
                .collect(),
        }
    }

    /// One edge `0-1` with coupling `j`.
    pub fn single_edge(j: BigRational) -> Graph {
        Graph::new(2, [(0, 1, j)]).expect("single edge is valid")
    }

    /// Path `0-1-..-(n-1)` with a uniform coupling.
    pub fn path(n: usize, j: BigRational) -> Graph {
        let edges = (1..n).map(|i| (i - 1, i, j.clone()));
        Graph::new(n, edges).expect("path is valid")
    }

    /// Cycle `0-1-..-(n-1)-0` with a uniform coupling; `n >= 3`.
    pub fn cycle(n: usize, j: BigRational) -> Graph {
        assert!(n >= 3, "a simple cycle needs at least three vertices");
        let edges = (0..n).map(|i| (i, (i + 1) % n, j.clone()));
        Graph::new(n, edges).expect("cycle is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &Edge {
        &self.edges[index]
    }

    /// Sum of all couplings.
    pub fn total_coupling(&self) -> BigRational {
        self.edges.iter().map(|e| e.coupling.clone()).sum()
    }

    /// Each base edge twice: forward then backward, in edge order.
    pub fn oriented_edges(&self) -> Vec<OrientedEdge> {
        self.edges
            .iter()
            .enumerate()
            .flat_map(|(base, e)| {
                let fwd = OrientedEdge {
                    tail: e.tail,
                    head: e.head,
                    base,
                };
                [fwd, fwd.reversed()]
            })
            .collect()
    }

    /// Couplings halved, `J_e / 2`, in edge order.
    pub fn half_couplings(&self) -> Vec<BigRational> {
        let two = BigRational::one() + BigRational::one();
        self.edges.iter().map(|e| &e.coupling / &two).collect()
    }

    /// Checks that `f` is defined on this graph's vertex set.
    pub fn check_source(&self, f: &SourceFunction) -> Result<()> {
        if f.len() != self.vertex_count {
            return Err(Error::SourceLength {
                expected: self.vertex_count,
                got: f.len(),
            });
        }
        Ok(())
    }

    /// Parses a sparse `{"vertex-id": int}` map against this graph.
    pub fn parse_source(&self, text: &str) -> Result<SourceFunction> {
        let raw: BTreeMap<String, i64> = serde_json::from_str(text)?;
        let mut values = vec![0; self.vertex_count];
        for (key, value) in raw {
            let vertex: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::UnknownVertex(key.clone()))?;
            if vertex >= self.vertex_count {
                return Err(Error::UnknownVertex(key));
            }
            values[vertex] += value;
        }
        Ok(SourceFunction(values))
    }
}

/// Integer-valued vertex function: φ, ψ, f, g, and every source ∂n.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SourceFunction(Vec<i64>);

impl SourceFunction {
    pub fn new(values: Vec<i64>) -> Self {
        SourceFunction(values)
    }

    pub fn zeros(vertex_count: usize) -> Self {
        SourceFunction(vec![0; vertex_count])
    }

    /// `δ_a − δ_b`.
    pub fn dipole(vertex_count: usize, a: usize, b: usize) -> Self {
        let mut values = vec![0; vertex_count];
        values[a] += 1;
        values[b] -= 1;
        SourceFunction(values)
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [i64] {
        &mut self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, vertex: usize) -> i64 {
        self.0[vertex]
    }

    pub fn total(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Requires a zero total, reporting `name` otherwise.
    pub fn require_mean_zero(&self, name: &'static str) -> Result<()> {
        match self.total() {
            0 => Ok(()),
            total => Err(Error::NonZeroSum { name, total }),
        }
    }

    /// Sparse JSON map of the nonzero entries, keyed by vertex id.
    pub fn to_json(&self) -> serde_json::Value {
        let map = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(|(x, &v)| (x.to_string(), serde_json::Value::from(v)))
            .collect();
        serde_json::Value::Object(map)
    }
}

impl Add for &SourceFunction {
    type Output = SourceFunction;

    fn add(self, rhs: &SourceFunction) -> SourceFunction {
        assert_eq!(self.len(), rhs.len());
        SourceFunction(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &SourceFunction {
    type Output = SourceFunction;

    fn sub(self, rhs: &SourceFunction) -> SourceFunction {
        assert_eq!(self.len(), rhs.len());
        SourceFunction(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &SourceFunction {
    type Output = SourceFunction;

    fn neg(self) -> SourceFunction {
        SourceFunction(self.0.iter().map(|a| -a).collect())
    }
}

impl Serialize for SourceFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

impl From<Vec<i64>> for SourceFunction {
    fn from(values: Vec<i64>) -> Self {
        SourceFunction(values)
    }
}
