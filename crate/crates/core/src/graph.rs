//! Undirected simple graphs, their Laplacians, and the gossip pair-selection
//! distribution.
//!
//! Node labels are 1-based in all I/O (edge-list files, error messages) and
//! 0-based internally. Graphs are immutable after construction; simulations
//! hold references or cheap clones and never mutate.

use crate::error::{Error, Result};
use crate::linalg::{self, RealSymMatrix};
use nalgebra::DMatrix;

/// Validated undirected simple graph on nodes `1..=n` (stored 0-based).
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    /// Sorted list of edges `(i, j)` with `i < j`, 0-based.
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    connected: bool,
}

impl Graph {
    /// Builds a graph from a node count and 1-based edge pairs.
    ///
    /// Rejects out-of-range labels, self-loops and duplicate edges, naming
    /// the offending pair.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut seen = std::collections::HashSet::new();
        let mut internal = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            for node in [a, b] {
                if node == 0 || node > n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let (lo, hi) = (a.min(b) - 1, a.max(b) - 1);
            if !seen.insert((lo, hi)) {
                return Err(Error::DuplicateEdge(lo + 1, hi + 1));
            }
            internal.push((lo, hi));
        }
        internal.sort_unstable();
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &internal {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let connected = bfs_connected(n, &adjacency);
        Ok(Self {
            n,
            edges: internal,
            adjacency,
            connected,
        })
    }

    /// Parses the edge-list text format: first non-comment line is `N`,
    /// then one `i j` pair per line (1-based, whitespace-separated).
    /// `#` starts a comment; blank lines are ignored. Errors carry the
    /// 1-based line number.
    pub fn from_edge_list_str(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let parse = |tok: &str| -> Result<usize> {
                tok.parse::<usize>().map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("expected a positive integer, got '{tok}'"),
                })
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match n {
                None => {
                    if fields.len() != 1 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "expected the node count alone on the first line".into(),
                        });
                    }
                    n = Some(parse(fields[0])?);
                }
                Some(_) => {
                    if fields.len() != 2 {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("expected 'i j', got {} fields", fields.len()),
                        });
                    }
                    edges.push((parse(fields[0])?, parse(fields[1])?));
                }
            }
        }
        let n = n.ok_or(Error::Parse {
            line: 0,
            msg: "empty edge-list file".into(),
        })?;
        Self::new(n, &edges)
    }

    /// Reads and parses an edge-list file.
    pub fn from_edge_list_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
            line: 0,
            msg: format!("cannot read {}: {e}", path.display()),
        })?;
        Self::from_edge_list_str(&text)
    }

    /// The documented default 4-node connected graph used by experiment
    /// presets: edges {1,2}, {2,3}, {3,4}, {1,4}, {1,3}.
    pub fn default_four_node() -> Self {
        Self::new(4, &[(1, 2), (2, 3), (3, 4), (1, 4), (1, 3)])
            .expect("default graph is valid")
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Edges as sorted 0-based pairs `(i, j)` with `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Degree of a 0-based node.
    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Sorted 0-based neighbor list of a 0-based node.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn is_connected(&self) -> bool {
        self.connected
    }

    /// Graph Laplacian `L = D - A`.
    pub fn laplacian(&self) -> Laplacian {
        let mut m = DMatrix::<f64>::zeros(self.n, self.n);
        for i in 0..self.n {
            m[(i, i)] = self.degree(i) as f64;
        }
        for &(i, j) in &self.edges {
            m[(i, j)] = -1.0;
            m[(j, i)] = -1.0;
        }
        Laplacian {
            matrix: RealSymMatrix::new(m).expect("Laplacian entries are finite"),
        }
    }

    /// Edge-selection distribution of the two-stage gossip draw: a node
    /// uniformly among `N`, then a uniform neighbor. Edge `{i,j}` is
    /// selected with probability `(1/deg(i) + 1/deg(j))/N`.
    ///
    /// Errors on an isolated node; connectivity is not required here, the
    /// caller decides whether a disconnected graph warrants a warning.
    pub fn pair_distribution(&self) -> Result<PairDistribution> {
        if let Some(i) = (0..self.n).find(|&i| self.degree(i) == 0) {
            return Err(Error::IsolatedNode(i + 1));
        }
        let n = self.n as f64;
        let probs = self
            .edges
            .iter()
            .map(|&(i, j)| {
                let q = (1.0 / self.degree(i) as f64 + 1.0 / self.degree(j) as f64) / n;
                ((i, j), q)
            })
            .collect();
        Ok(PairDistribution { probs })
    }
}

fn bfs_connected(n: usize, adjacency: &[Vec<usize>]) -> bool {
    let mut visited = vec![false; n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    visited[0] = true;
    let mut count = 1;
    while let Some(u) = queue.pop_front() {
        for &v in &adjacency[u] {
            if !visited[v] {
                visited[v] = true;
                count += 1;
                queue.push_back(v);
            }
        }
    }
    count == n
}

/// Graph Laplacian: symmetric PSD with zero row sums; the zero eigenvalue is
/// simple iff the graph is connected.
#[derive(Debug, Clone)]
pub struct Laplacian {
    matrix: RealSymMatrix,
}

impl Laplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        self.matrix.as_matrix()
    }

    pub fn as_sym(&self) -> &RealSymMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.as_matrix().trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eig_sym(&self.matrix)
            .expect("Laplacian is finite")
            .0
    }

    /// Second-smallest eigenvalue; governs the consensus convergence rate.
    pub fn fiedler_value(&self) -> f64 {
        self.eigenvalues()[1.min(self.dim() - 1)]
    }
}

/// Selection probabilities `q_ij` over the edges of a graph.
#[derive(Debug, Clone)]
pub struct PairDistribution {
    /// `((i, j), q_ij)` aligned with `Graph::edges()`, 0-based.
    probs: Vec<((usize, usize), f64)>,
}

impl PairDistribution {
    pub fn probs(&self) -> &[((usize, usize), f64)] {
        &self.probs
    }

    pub fn prob(&self, i: usize, j: usize) -> Option<f64> {
        let key = (i.min(j), i.max(j));
        self.probs
            .iter()
            .find(|&&(e, _)| e == key)
            .map(|&(_, q)| q)
    }

    pub fn sum(&self) -> f64 {
        self.probs.iter().map(|&(_, q)| q).sum()
    }
}
