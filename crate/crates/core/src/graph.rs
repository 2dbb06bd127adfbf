//! Fully dynamic undirected graph over a static vertex set with a hard
//! maximum-degree cap.
//!
//! Each vertex keeps its neighbors in an ascending vector. Membership is a
//! binary search, enumeration follows vertex id order, so every consumer that
//! walks a neighborhood does so in the same order on every replay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;

/// Unordered vertex pair, stored as `(min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub u: VertexId,
    pub v: VertexId,
}

impl Edge {
    pub fn new(a: VertexId, b: VertexId) -> Self {
        if a <= b {
            Edge { u: a, v: b }
        } else {
            Edge { u: b, v: a }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UpdateKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DynamicGraph {
    delta_cap: u32,
    adjacency: Vec<Vec<VertexId>>,
    edge_count: usize,
    time: u64,
    strict: bool,
}

impl DynamicGraph {
    /// Empty graph on `n` vertices. Strict triangle checking is on.
    pub fn new(n: usize, delta_cap: u32) -> Result<Self> {
        if n == 0 || delta_cap == 0 || n > u32::MAX as usize {
            return Err(Error::InvalidSize {
                n,
                delta: delta_cap,
            });
        }
        Ok(DynamicGraph {
            delta_cap,
            adjacency: vec![Vec::new(); n],
            edge_count: 0,
            time: 0,
            strict: true,
        })
    }

    /// Trust mode skips the triangle check for traces validated upstream.
    pub fn with_strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn strict(&self) -> bool {
        self.strict
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn delta_cap(&self) -> u32 {
        self.delta_cap
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v as usize].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Neighbors of `v` in ascending id order.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v as usize]
    }

    /// Position of `w` in the ascending neighbor list of `v`.
    pub fn neighbor_index(&self, v: VertexId, w: VertexId) -> Option<usize> {
        self.adjacency[v as usize].binary_search(&w).ok()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        let (a, b) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        self.adjacency[a as usize].binary_search(&b).is_ok()
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, nbrs)| {
            let u = u as VertexId;
            nbrs.iter()
                .filter(move |&&v| u < v)
                .map(move |&v| Edge { u, v })
        })
    }

    /// A vertex adjacent to both `u` and `v`, if any. Walks the smaller list.
    pub fn common_neighbor(&self, u: VertexId, v: VertexId) -> Option<VertexId> {
        let (small, large) = if self.degree(u) <= self.degree(v) {
            (u, v)
        } else {
            (v, u)
        };
        let large = &self.adjacency[large as usize];
        self.adjacency[small as usize]
            .iter()
            .copied()
            .find(|w| large.binary_search(w).is_ok())
    }

    fn check_vertex(&self, v: VertexId) -> Result<()> {
        if (v as usize) < self.n() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }

    /// Checks every precondition of `insert_edge` without mutating.
    pub fn check_insert(&self, u: VertexId, v: VertexId) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if self.has_edge(u, v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        for at in [u, v] {
            if self.degree(at) >= self.delta_cap as usize {
                return Err(Error::DegreeCapExceeded {
                    u,
                    v,
                    at,
                    cap: self.delta_cap,
                });
            }
        }
        if self.strict {
            if let Some(via) = self.common_neighbor(u, v) {
                return Err(Error::TriangleCreated { u, v, via });
            }
        }
        Ok(())
    }

    pub fn insert_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.check_insert(u, v)?;
        for (a, b) in [(u, v), (v, u)] {
            let list = &mut self.adjacency[a as usize];
            let at = list.binary_search(&b).unwrap_err();
            list.insert(at, b);
        }
        self.edge_count += 1;
        self.time += 1;
        self.debug_check(u, v);
        Ok(())
    }

    pub fn delete_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        self.check_vertex(u)?;
        self.check_vertex(v)?;
        let at = self.adjacency[u as usize]
            .binary_search(&v)
            .map_err(|_| Error::MissingEdge(u, v))?;
        self.adjacency[u as usize].remove(at);
        let at = self.adjacency[v as usize]
            .binary_search(&u)
            .expect("adjacency symmetric");
        self.adjacency[v as usize].remove(at);
        self.edge_count -= 1;
        self.time += 1;
        self.debug_check(u, v);
        Ok(())
    }

    pub fn apply(&mut self, kind: UpdateKind, u: VertexId, v: VertexId) -> Result<()> {
        match kind {
            UpdateKind::Insert => self.insert_edge(u, v),
            UpdateKind::Delete => self.delete_edge(u, v),
        }
    }

    /// `v` first, then `N(v)`, then `N(N(v))`, without duplicates.
    pub fn two_ball(&self, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![v];
        out.extend_from_slice(self.neighbors(v));
        for &z in self.neighbors(v) {
            for &w in self.neighbors(z) {
                if w != v && !out.contains(&w) {
                    out.push(w);
                }
            }
        }
        out
    }

    #[inline]
    fn debug_check(&self, u: VertexId, v: VertexId) {
        if cfg!(debug_assertions) {
            for a in [u, v] {
                let list = &self.adjacency[a as usize];
                debug_assert!(list.len() <= self.delta_cap as usize);
                debug_assert!(list.windows(2).all(|w| w[0] < w[1]));
                for &b in list {
                    debug_assert!(self.adjacency[b as usize].binary_search(&a).is_ok());
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_graph_rejects_zero_sizes() {
        assert!(DynamicGraph::new(0, 3).is_err());
        assert!(DynamicGraph::new(4, 0).is_err());
        let g = DynamicGraph::new(4, 3).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.time(), 0);
        let g = DynamicGraph::new(1, 1).unwrap();
        assert_eq!(g.n(), 1);
        let g = DynamicGraph::new(2000, 64).unwrap();
        assert_eq!((g.n(), g.delta_cap()), (2000, 64));
    }

    #[test]
    fn insert_and_duplicate() {
        let mut g = DynamicGraph::new(4, 3).unwrap();
        g.insert_edge(0, 1).unwrap();
        assert_eq!((g.degree(0), g.degree(1)), (1, 1));
        assert_eq!(g.insert_edge(0, 1), Err(Error::DuplicateEdge(0, 1)));
        assert_eq!(g.insert_edge(1, 0), Err(Error::DuplicateEdge(1, 0)));
        assert_eq!(g.insert_edge(2, 2), Err(Error::SelfLoop(2)));
        assert_eq!(g.time(), 1);
    }

    #[test]
    fn strict_mode_rejects_triangle() {
        let mut g = DynamicGraph::new(3, 3).unwrap();
        g.insert_edge(0, 1).unwrap();
        g.insert_edge(1, 2).unwrap();
        assert_eq!(
            g.insert_edge(0, 2),
            Err(Error::TriangleCreated { u: 0, v: 2, via: 1 })
        );
        let mut g = g.with_strict(false);
        g.insert_edge(0, 2).unwrap();
    }

    #[test]
    fn degree_cap() {
        let mut g = DynamicGraph::new(4, 1).unwrap();
        g.insert_edge(0, 1).unwrap();
        assert!(matches!(
            g.insert_edge(0, 2),
            Err(Error::DegreeCapExceeded { at: 0, .. })
        ));
    }

    #[test]
    fn delete() {
        let mut g = DynamicGraph::new(4, 3).unwrap();
        assert_eq!(g.delete_edge(0, 1), Err(Error::MissingEdge(0, 1)));
        g.insert_edge(0, 1).unwrap();
        g.delete_edge(0, 1).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g, {
            let mut h = DynamicGraph::new(4, 3).unwrap();
            h.time = 2;
            h
        });

        // K_{2,2} on sides {0,2} / {1,3}, minus (2,3)
        let mut g = DynamicGraph::new(4, 3).unwrap();
        for (u, v) in [(0, 1), (0, 3), (2, 1), (2, 3)] {
            g.insert_edge(u, v).unwrap();
        }
        g.delete_edge(2, 3).unwrap();
        let degs: Vec<_> = (0..4).map(|v| g.degree(v)).collect();
        assert_eq!(degs, vec![2, 2, 1, 1]);
    }

    #[test]
    fn two_ball_shapes() {
        let g = DynamicGraph::new(4, 3).unwrap();
        assert_eq!(g.two_ball(2), vec![2]);

        let mut star = DynamicGraph::new(4, 3).unwrap();
        for leaf in 1..4 {
            star.insert_edge(0, leaf).unwrap();
        }
        let mut ball = star.two_ball(0);
        ball.sort();
        assert_eq!(ball, vec![0, 1, 2, 3]);

        let mut path = DynamicGraph::new(4, 3).unwrap();
        for (u, v) in [(0, 1), (1, 2), (2, 3)] {
            path.insert_edge(u, v).unwrap();
        }
        assert_eq!(path.two_ball(0), vec![0, 1, 2]);
    }

    #[test]
    fn edges_are_canonical() {
        let mut g = DynamicGraph::new(5, 3).unwrap();
        g.insert_edge(3, 1).unwrap();
        g.insert_edge(4, 0).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![Edge::new(0, 4), Edge::new(1, 3)]);
    }
}
