//! Simple undirected graphs and k-partite graphs with `n` vertices per class.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Vertex `v_{class, index}` of a k-partite graph (0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub class: usize,
    pub index: usize,
}

impl Vertex {
    pub fn new(class: usize, index: usize) -> Self {
        Vertex { class, index }
    }
}

/// A k-partite graph on vertex classes of size `n`; edges only join distinct classes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KPartiteGraph {
    n: usize,
    k: usize,
    edges: Vec<(Vertex, Vertex)>,
    adjacency: Vec<bool>,
}

impl KPartiteGraph {
    pub fn new(n: usize, k: usize, edges: impl IntoIterator<Item = (Vertex, Vertex)>) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(Error::InvalidInput("k-partite graph needs n, k >= 1".into()));
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            for v in [a, b] {
                if v.class >= k || v.index >= n {
                    return Err(Error::InvalidInput(format!(
                        "vertex ({}, {}) outside {k} classes of size {n}",
                        v.class, v.index
                    )));
                }
            }
            if a.class == b.class {
                return Err(Error::EdgeWithinClass { class: a.class });
            }
            set.insert(if a < b { (a, b) } else { (b, a) });
        }
        let edges: Vec<_> = set.into_iter().collect();
        let nk = n * k;
        let mut adjacency = vec![false; nk * nk];
        for (a, b) in &edges {
            let (x, y) = (a.class * n + a.index, b.class * n + b.index);
            adjacency[x * nk + y] = true;
            adjacency[y * nk + x] = true;
        }
        Ok(KPartiteGraph { n, k, edges, adjacency })
    }

    pub fn empty(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, std::iter::empty())
    }

    /// Every pair of vertices in distinct classes is adjacent.
    pub fn complete(n: usize, k: usize) -> Result<Self> {
        let mut edges = Vec::new();
        for c1 in 0..k {
            for c2 in c1 + 1..k {
                for i1 in 0..n {
                    for i2 in 0..n {
                        edges.push((Vertex::new(c1, i1), Vertex::new(c2, i2)));
                    }
                }
            }
        }
        Self::new(n, k, edges)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edges(&self) -> &[(Vertex, Vertex)] {
        &self.edges
    }

    pub fn has_edge(&self, a: Vertex, b: Vertex) -> bool {
        let nk = self.n * self.k;
        self.adjacency[(a.class * self.n + a.index) * nk + b.class * self.n + b.index]
    }

    /// Number of edges of the subgraph induced by `{v_{1,j_1}, ..., v_{k,j_k}}`.
    pub fn induced_edges(&self, tuple: &[usize]) -> usize {
        let mut count = 0;
        for i in 0..self.k {
            for i2 in i + 1..self.k {
                if self.has_edge(Vertex::new(i, tuple[i]), Vertex::new(i2, tuple[i2])) {
                    count += 1;
                }
            }
        }
        count
    }
}

/// A simple undirected graph on vertices `0..vertices`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(vertices: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= vertices || v >= vertices {
                return Err(Error::InvalidInput(format!("edge ({u}, {v}) references a vertex outside 0..{vertices}")));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            set.insert((u.min(v), u.max(v)));
        }
        Ok(Graph { vertices, edges: set.into_iter().collect() })
    }

    pub fn vertices(&self) -> usize {
        self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Number of edges with exactly one endpoint in the set encoded by `mask`.
    pub fn cut_value(&self, mask: u64) -> usize {
        self.edges.iter().filter(|(u, v)| ((mask >> u) & 1) != ((mask >> v) & 1)).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_edge_within_class() {
        let e = KPartiteGraph::new(2, 3, [(Vertex::new(1, 0), Vertex::new(1, 1))]);
        assert!(matches!(e, Err(Error::EdgeWithinClass { class: 1 })));
    }

    #[test]
    fn dedups_edges() {
        let a = Vertex::new(0, 1);
        let b = Vertex::new(2, 0);
        let g = KPartiteGraph::new(2, 3, [(a, b), (b, a)]).unwrap();
        assert_eq!(g.edges().len(), 1);
        assert!(g.has_edge(b, a));
        assert_eq!(g.induced_edges(&[1, 0, 0]), 1);
        assert_eq!(g.induced_edges(&[0, 0, 0]), 0);
    }

    #[test]
    fn cut_of_triangle() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(g.cut_value(0), 0);
        assert_eq!(g.cut_value(0b001), 2);
        assert_eq!(g.cut_value(0b011), 2);
        assert!(Graph::new(2, [(0, 0)]).is_err());
    }
}
