//! Degree-bounded undirected graphs over physical qubits.
//!
//! The edge set is stored as the strict upper-triangular half of the
//! adjacency matrix (`i < j`), flattened into a bit vector of length
//! `n*(n-1)/2`. That flattened form doubles as the observation an agent
//! sees, so the bit ordering here is load-bearing for everything else.

use std::fmt::Write as _;

use thiserror::Error;

/// Default per-vertex connectivity cap for superconducting-style hardware.
pub const DEFAULT_MAX_DEGREE: usize = 4;

/// Hop count used for unreachable vertex pairs.
pub const INF_DISTANCE: u32 = u32::MAX;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TopologyError {
    #[error("edge endpoints must be distinct and in range: ({0}, {1}) with n={2}")]
    BadEdge(usize, usize, usize),
    #[error("vertex count must be at least 1")]
    EmptyGraph,
    #[error("malformed topology file at line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("vertex {vertex} has degree {degree}, exceeding the maximum {max}")]
    DegreeExceeded {
        vertex: usize,
        degree: usize,
        max: usize,
    },
}

/// Outcome of attempting to add an edge. Rejections are ordinary values so
/// an environment can turn them into penalties instead of failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddEdgeOutcome {
    Added,
    Duplicate,
    /// At least one endpoint is already at the degree cap.
    DegreeRejected,
}

/// Canonical index of the unordered pair `(i, j)` with `i < j` among all
/// `n*(n-1)/2` pairs, in lexicographic order.
pub fn edge_index(i: usize, j: usize, n: usize) -> usize {
    assert!(i < j && j < n, "edge_index requires 0 <= i < j < n");
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Inverse of [`edge_index`]: recover the pair `(i, j)` from its index.
pub fn edge_pair(index: usize, n: usize) -> (usize, usize) {
    assert!(index < n * (n - 1) / 2, "pair index out of range");
    let mut i = 0;
    let mut remaining = index;
    loop {
        let row = n - i - 1;
        if remaining < row {
            return (i, i + 1 + remaining);
        }
        remaining -= row;
        i += 1;
    }
}

/// Number of unordered vertex pairs, i.e. the action-space size.
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Undirected graph over `n` physical qubits with a per-vertex degree cap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TopologyGraph {
    n: usize,
    bits: Vec<bool>,
    degrees: Vec<usize>,
    max_degree: usize,
}

impl TopologyGraph {
    /// Empty graph (no edges) on `n` vertices with the default degree cap.
    pub fn empty(n: usize) -> Result<Self, TopologyError> {
        Self::with_max_degree(n, DEFAULT_MAX_DEGREE)
    }

    pub fn with_max_degree(n: usize, max_degree: usize) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::EmptyGraph);
        }
        Ok(Self {
            n,
            bits: vec![false; pair_count(n)],
            degrees: vec![0; n],
            max_degree,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn num_edges(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i == j || i >= self.n || j >= self.n {
            return false;
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.bits[edge_index(a, b, self.n)]
    }

    /// Attempt to add the undirected edge `(i, j)` respecting the degree cap.
    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<AddEdgeOutcome, TopologyError> {
        if i == j || i >= self.n || j >= self.n {
            return Err(TopologyError::BadEdge(i, j, self.n));
        }
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let k = edge_index(a, b, self.n);
        if self.bits[k] {
            return Ok(AddEdgeOutcome::Duplicate);
        }
        if self.degrees[a] >= self.max_degree || self.degrees[b] >= self.max_degree {
            return Ok(AddEdgeOutcome::DegreeRejected);
        }
        self.bits[k] = true;
        self.degrees[a] += 1;
        self.degrees[b] += 1;
        Ok(AddEdgeOutcome::Added)
    }

    /// Add an edge addressed by its flattened pair index.
    pub fn add_edge_by_index(&mut self, index: usize) -> Result<AddEdgeOutcome, TopologyError> {
        let (i, j) = edge_pair(index, self.n);
        self.add_edge(i, j)
    }

    /// The strict-triangular bit vector; bit `k` is the edge with pair index `k`.
    pub fn flatten_state(&self) -> Vec<u8> {
        self.bits.iter().map(|&b| b as u8).collect()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| edge_pair(k, self.n))
            .collect()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(v, u)).collect()
    }

    /// All-pairs shortest hop counts via Floyd-Warshall.
    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.n;
        let mut d = vec![INF_DISTANCE; n * n];
        for v in 0..n {
            d[v * n + v] = 0;
        }
        for (i, j) in self.edges() {
            d[i * n + j] = 1;
            d[j * n + i] = 1;
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i * n + k];
                if dik == INF_DISTANCE {
                    continue;
                }
                for j in 0..n {
                    let dkj = d[k * n + j];
                    if dkj == INF_DISTANCE {
                        continue;
                    }
                    let via = dik + dkj;
                    if via < d[i * n + j] {
                        d[i * n + j] = via;
                    }
                }
            }
        }
        DistanceMatrix { n, d }
    }

    /// Vertices reachable from `start`, as a membership mask.
    pub fn component_of(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen
    }

    /// Edge-list text form: first line `n`, then one `i j` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.n);
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{} {}", i, j);
        }
        out
    }

    /// Parse the edge-list text form, enforcing the degree cap.
    pub fn from_edge_list(text: &str, max_degree: usize) -> Result<Self, TopologyError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(ln, s)| (ln + 1, s.trim()))
            .filter(|(_, s)| !s.is_empty() && !s.starts_with('#'));
        let (ln, first) = lines.next().ok_or(TopologyError::Parse {
            line: 1,
            reason: "missing vertex count".into(),
        })?;
        let n: usize = first.parse().map_err(|_| TopologyError::Parse {
            line: ln,
            reason: format!("bad vertex count {first:?}"),
        })?;
        let mut g = Self::with_max_degree(n, max_degree)?;
        for (ln, line) in lines {
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize, TopologyError> {
                tok.and_then(|t| t.parse().ok())
                    .ok_or(TopologyError::Parse {
                        line: ln,
                        reason: format!("expected `i j`, got {line:?}"),
                    })
            };
            let i = parse(it.next())?;
            let j = parse(it.next())?;
            if it.next().is_some() {
                return Err(TopologyError::Parse {
                    line: ln,
                    reason: format!("trailing tokens in {line:?}"),
                });
            }
            match g.add_edge(i, j)? {
                AddEdgeOutcome::Added | AddEdgeOutcome::Duplicate => {}
                AddEdgeOutcome::DegreeRejected => {
                    let v = if g.degree(i) >= max_degree { i } else { j };
                    return Err(TopologyError::DegreeExceeded {
                        vertex: v,
                        degree: g.degree(v) + 1,
                        max: max_degree,
                    });
                }
            }
        }
        Ok(g)
    }

    /// Flattened bit-vector form as CSV: one `0`/`1` per line after the count.
    pub fn to_bits_csv(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for b in &self.bits {
            let _ = writeln!(out, "{}", *b as u8);
        }
        out
    }
}

/// `rows x cols` lattice with 4-neighbor connectivity. Interior vertices have
/// degree 4, corners degree 2.
pub fn make_grid(rows: usize, cols: usize) -> TopologyGraph {
    assert!(rows >= 1 && cols >= 1);
    let mut g = TopologyGraph::with_max_degree(rows * cols, DEFAULT_MAX_DEGREE)
        .expect("grid has at least one vertex");
    let at = |r: usize, c: usize| r * cols + c;
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                g.add_edge(at(r, c), at(r, c + 1)).unwrap();
            }
            if r + 1 < rows {
                g.add_edge(at(r, c), at(r + 1, c)).unwrap();
            }
        }
    }
    g
}

/// Path graph 0-1-...-(n-1).
pub fn make_line(n: usize) -> TopologyGraph {
    assert!(n >= 1);
    let mut g = TopologyGraph::with_max_degree(n, DEFAULT_MAX_DEGREE)
        .expect("line has at least one vertex");
    for v in 0..n.saturating_sub(1) {
        g.add_edge(v, v + 1).unwrap();
    }
    g
}

/// Complete graph on `n` vertices; the degree cap is lifted so it can exist.
pub fn make_complete(n: usize) -> TopologyGraph {
    let mut g = TopologyGraph::with_max_degree(n, n).expect("n >= 1");
    for i in 0..n {
        for j in (i + 1)..n {
            g.add_edge(i, j).unwrap();
        }
    }
    g
}

/// All-pairs hop-count matrix with an infinity sentinel for disconnected pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<u32>,
}

impl DistanceMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.d[i * self.n + j]
    }

    pub fn is_connected(&self, i: usize, j: usize) -> bool {
        self.get(i, j) != INF_DISTANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_index_lexicographic_for_n4() {
        let pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
        for (k, &(i, j)) in pairs.iter().enumerate() {
            assert_eq!(edge_index(i, j, 4), k);
            assert_eq!(edge_pair(k, 4), (i, j));
        }
        assert_eq!(pair_count(4), 6);
    }

    #[test]
    fn edge_index_round_trips_exhaustively() {
        for n in 2..=20 {
            for i in 0..n {
                for j in (i + 1)..n {
                    let k = edge_index(i, j, n);
                    assert_eq!(edge_pair(k, n), (i, j), "n={n}");
                }
            }
        }
    }

    #[test]
    fn add_edge_tracks_degrees_and_duplicates() {
        let mut g = TopologyGraph::empty(6).unwrap();
        assert_eq!(g.add_edge(0, 1).unwrap(), AddEdgeOutcome::Added);
        assert_eq!(g.degree(0), 1);
        assert_eq!(g.degree(1), 1);
        assert_eq!(g.add_edge(1, 0).unwrap(), AddEdgeOutcome::Duplicate);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn add_edge_rejects_at_degree_cap() {
        let mut g = TopologyGraph::empty(6).unwrap();
        for v in 1..=4 {
            assert_eq!(g.add_edge(0, v).unwrap(), AddEdgeOutcome::Added);
        }
        assert_eq!(g.add_edge(0, 5).unwrap(), AddEdgeOutcome::DegreeRejected);
        assert_eq!(g.degree(0), 4);
        assert!(g.add_edge(3, 3).is_err());
    }

    #[test]
    fn flatten_state_matches_pair_indexing() {
        let g = make_line(4);
        assert_eq!(g.flatten_state(), vec![1, 0, 0, 1, 0, 1]);
        let empty = TopologyGraph::empty(4).unwrap();
        assert_eq!(empty.flatten_state(), vec![0; 6]);
        let full = make_complete(4);
        assert_eq!(full.flatten_state(), vec![1; 6]);
    }

    #[test]
    fn distance_matrix_examples() {
        let path = make_line(3);
        let d = path.distance_matrix();
        assert_eq!(d.get(0, 2), 2);
        assert_eq!(d.get(2, 0), 2);
        assert_eq!(d.get(1, 1), 0);

        let k5 = make_complete(5);
        let d = k5.distance_matrix();
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(d.get(i, j), if i == j { 0 } else { 1 });
            }
        }

        let grid = make_grid(3, 3);
        assert_eq!(grid.distance_matrix().get(0, 8), 4);
    }

    #[test]
    fn disconnected_pairs_use_sentinel() {
        let g = TopologyGraph::empty(3).unwrap();
        let d = g.distance_matrix();
        assert_eq!(d.get(0, 1), INF_DISTANCE);
        assert!(!d.is_connected(0, 2));
        assert!(d.is_connected(1, 1));
    }

    #[test]
    fn grid_and_line_shapes() {
        let g = make_grid(10, 10);
        assert_eq!(g.num_vertices(), 100);
        assert_eq!(g.num_edges(), 180);
        assert!((0..100).all(|v| g.degree(v) <= 4));
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(55), 4);

        let l = make_line(5);
        assert_eq!(l.num_edges(), 4);
        assert!((0..5).all(|v| l.degree(v) <= 2));
    }

    #[test]
    fn edge_list_round_trip_and_degree_check() {
        let g = make_grid(3, 3);
        let text = g.to_edge_list();
        let back = TopologyGraph::from_edge_list(&text, 4).unwrap();
        assert_eq!(back, g);

        // A 5-star violates the degree-4 cap.
        let star = "6\n0 1\n0 2\n0 3\n0 4\n0 5\n";
        assert!(matches!(
            TopologyGraph::from_edge_list(star, 4),
            Err(TopologyError::DegreeExceeded { vertex: 0, .. })
        ));
    }
}
