use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::PlacementError;

/// Physical qubit connectivity. Edges are undirected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CouplingGraph {
    n: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

const VIGO: &[(usize, usize)] = &[(0, 1), (1, 2), (1, 3), (3, 4)];
const YORKTOWN: &[(usize, usize)] = &[(0, 1), (0, 2), (1, 2), (2, 3), (2, 4), (3, 4)];
/// 27-qubit heavy-hexagon lattice.
const FALCON27: &[(usize, usize)] = &[
    (0, 1), (1, 2), (1, 4), (2, 3), (3, 5), (4, 7), (5, 8), (6, 7), (7, 10), (8, 9), (8, 11), (10, 12), (11, 14),
    (12, 13), (12, 15), (13, 14), (14, 16), (15, 18), (16, 19), (17, 18), (18, 21), (19, 20), (19, 22), (21, 23),
    (22, 25), (23, 24), (24, 25), (25, 26),
];

/// Names accepted by [`CouplingGraph::builtin`].
pub const BUILTIN_GRAPHS: &[&str] = &["vigo", "ourense", "yorktown", "falcon27"];

impl CouplingGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self, PlacementError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a == b {
                return Err(PlacementError::InvalidGraph(format!("self-loop on {a}")));
            }
            if a >= n || b >= n {
                return Err(PlacementError::InvalidGraph(format!("edge ({a}, {b}) outside {n} qubits")));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self { n, edges: set, adjacency })
    }

    /// A path `0 - 1 - ... - n-1`.
    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("line edges are valid")
    }

    /// Every pair coupled.
    pub fn complete(n: usize) -> Self {
        Self::new(n, (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b)))).expect("valid edges")
    }

    pub fn builtin(name: &str) -> Result<Self, PlacementError> {
        let (n, edges) = match name.trim_start_matches("ibmq_") {
            "vigo" | "ourense" => (5, VIGO),
            "yorktown" | "5_yorktown" | "ibmqx2" => (5, YORKTOWN),
            "falcon27" => (27, FALCON27),
            _ => return Err(PlacementError::UnknownGraph(name.to_string())),
        };
        Self::new(n, edges.iter().copied())
    }

    /// Parses `{"n": 5, "edges": [[0,1], ...]}`.
    pub fn from_json(text: &str) -> Result<Self, PlacementError> {
        let g: GraphJson = serde_json::from_str(text).map_err(|e| PlacementError::InvalidGraph(e.to_string()))?;
        Self::new(g.n, g.edges.into_iter().map(|[a, b]| (a, b)))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&GraphJson { n: self.n, edges: self.edges.iter().map(|&(a, b)| [a, b]).collect() })
            .expect("graph serializes")
    }

    /// A built-in name, or a path to a JSON file.
    pub fn load(spec: &str) -> Result<Self, PlacementError> {
        if BUILTIN_GRAPHS.contains(&spec.trim_start_matches("ibmq_")) || spec == "ibmqx2" {
            return Self::builtin(spec);
        }
        let path = Path::new(spec);
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| PlacementError::Io(format!("{spec}: {e}")))?;
            return Self::from_json(&text);
        }
        Err(PlacementError::UnknownGraph(spec.to_string()))
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn neighbors(&self, q: usize) -> &[usize] {
        &self.adjacency[q]
    }

    pub fn connected(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// BFS distances from `src`; unreachable qubits get `usize::MAX`.
    pub fn distances_from(&self, src: usize) -> Vec<usize> {
        let mut dist = vec![usize::MAX; self.n];
        dist[src] = 0;
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distance_matrix(&self) -> Vec<Vec<usize>> {
        (0..self.n).map(|s| self.distances_from(s)).collect()
    }

    /// Shortest path from `a` to `b` inclusive; neighbors are explored lowest index first.
    pub fn shortest_path(&self, a: usize, b: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.n];
        parent[a] = a;
        let mut queue = VecDeque::from([a]);
        while let Some(u) = queue.pop_front() {
            if u == b {
                break;
            }
            for &v in &self.adjacency[u] {
                if parent[v] == usize::MAX {
                    parent[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if parent[b] == usize::MAX {
            return None;
        }
        let mut path = vec![b];
        while *path.last().expect("non-empty") != a {
            path.push(parent[*path.last().expect("non-empty")]);
        }
        path.reverse();
        Some(path)
    }

    /// Component label of every qubit.
    pub fn components(&self) -> Vec<usize> {
        let mut label = vec![usize::MAX; self.n];
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            for (q, d) in self.distances_from(s).into_iter().enumerate() {
                if d != usize::MAX {
                    label[q] = s;
                }
            }
        }
        label
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let v = CouplingGraph::builtin("vigo").unwrap();
        assert_eq!(v.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2), (1, 3), (3, 4)]);
        assert_eq!(CouplingGraph::builtin("ibmq_ourense").unwrap(), v);
        let y = CouplingGraph::builtin("yorktown").unwrap();
        assert!(y.connected(4, 2) && y.connected(0, 2) && !y.connected(0, 3));
        let f = CouplingGraph::builtin("falcon27").unwrap();
        assert!(f.distances_from(0).iter().all(|&d| d != usize::MAX));
        assert!(f.neighbors(0).len() <= 3);
    }

    #[test]
    fn json_round_trip() {
        let g = CouplingGraph::from_json(r#"{"n": 5, "edges": [[0,1],[1,2],[1,3],[3,4]]}"#).unwrap();
        assert_eq!(g, CouplingGraph::builtin("vigo").unwrap());
        assert_eq!(CouplingGraph::from_json(&g.to_json()).unwrap(), g);
        assert!(CouplingGraph::from_json(r#"{"n": 2, "edges": [[0,2]]}"#).is_err());
        assert!(CouplingGraph::from_json(r#"{"n": 2, "edges": [[1,1]]}"#).is_err());
    }

    #[test]
    fn paths() {
        let g = CouplingGraph::builtin("vigo").unwrap();
        assert_eq!(g.shortest_path(0, 4).unwrap(), vec![0, 1, 3, 4]);
        assert_eq!(g.distances_from(2), vec![2, 1, 0, 2, 3]);
        let split = CouplingGraph::new(4, [(0, 1), (2, 3)]).unwrap();
        assert!(split.shortest_path(0, 3).is_none());
        assert_ne!(split.components()[0], split.components()[3]);
    }
}
