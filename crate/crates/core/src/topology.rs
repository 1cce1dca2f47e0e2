//! Device coupling graphs.
//!
//! A [`Topology`] is an undirected graph over physical qubits. Two-qubit
//! gates may only be compiled onto coupled pairs; the router consults the
//! all-pairs shortest-path table when it inserts SWAPs.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub name: String,
    pub num_qubits: usize,
    /// Normalized as `(low, high)` pairs, sorted.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("edge ({0}, {1}) is a self-loop")]
    SelfLoop(usize, usize),
    #[error("edge ({0}, {1}) references a qubit outside 0..{2}")]
    EdgeOutOfRange(usize, usize, usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("topology JSON malformed: {0}")]
    Malformed(String),
}

impl Topology {
    pub fn new(name: impl Into<String>, num_qubits: usize, edges: &[(usize, usize)]) -> Result<Self, TopologyError> {
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(TopologyError::SelfLoop(a, b));
            }
            if a >= num_qubits || b >= num_qubits {
                return Err(TopologyError::EdgeOutOfRange(a, b, num_qubits));
            }
            let e = (a.min(b), a.max(b));
            if !seen.insert(e) {
                return Err(TopologyError::DuplicateEdge(e.0, e.1));
            }
        }
        Ok(Topology {
            name: name.into(),
            num_qubits,
            edges: seen.into_iter().collect(),
        })
    }

    /// Linear chain 0-1-...-(n-1); used throughout the tests.
    pub fn line(n: usize) -> Self {
        let edges: Vec<(usize, usize)> = (0..n.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        Topology::new(format!("line-{n}"), n, &edges).unwrap()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        let e = (a.min(b), a.max(b));
        self.edges.binary_search(&e).is_ok()
    }

    pub fn neighbors(&self, q: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == q {
                    Some(b)
                } else if b == q {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// All-pairs hop distances by BFS; `usize::MAX` marks unreachable pairs.
    pub fn distances(&self) -> Vec<Vec<usize>> {
        let n = self.num_qubits;
        let adj: Vec<Vec<usize>> = (0..n).map(|q| self.neighbors(q)).collect();
        let mut dist = vec![vec![usize::MAX; n]; n];
        for start in 0..n {
            let mut queue = std::collections::VecDeque::new();
            dist[start][start] = 0;
            queue.push_back(start);
            while let Some(u) = queue.pop_front() {
                for &v in &adj[u] {
                    if dist[start][v] == usize::MAX {
                        dist[start][v] = dist[start][u] + 1;
                        queue.push_back(v);
                    }
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        if self.num_qubits == 0 {
            return true;
        }
        let d = self.distances();
        d[0].iter().all(|&x| x != usize::MAX)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("topology serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, TopologyError> {
        let t: Topology = serde_json::from_str(text).map_err(|e| TopologyError::Malformed(e.to_string()))?;
        // Re-validate so hand-edited files cannot smuggle bad edges in.
        Topology::new(t.name, t.num_qubits, &t.edges)
    }

    /// 20-qubit square-lattice device used by the bundled calibration data.
    pub fn iqm20() -> Self {
        Topology::from_json(include_str!("../fixtures/topology/iqm-q20.json")).expect("bundled topology is valid")
    }

    /// 15-qubit ladder device (public coupling map of the retired
    /// `ibmq_16_melbourne` machine).
    pub fn melbourne() -> Self {
        Topology::from_json(include_str!("../fixtures/topology/ibmq-melbourne.json")).expect("bundled topology is valid")
    }
}
