//! Undirected, unweighted interconnection graph between subsystems.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemGraph {
    adjacency: Vec<Vec<usize>>,
}

impl SubsystemGraph {
    /// Builds a graph from an undirected edge list. Duplicate edges are merged.
    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); node_count];
        for &(i, j) in edges {
            if i >= node_count || j >= node_count {
                return Err(Error::arg(format!(
                    "edge ({i}, {j}) out of range for {node_count} nodes"
                )));
            }
            if i == j {
                return Err(Error::arg(format!("self-loop on node {i}")));
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for adj in &mut adjacency {
            adj.sort_unstable();
            adj.dedup();
        }
        Ok(Self { adjacency })
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Hop distance from `source` to every node; `None` marks unreachable nodes.
    pub fn distances_from(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap_or(0);
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Shortest-path length in edges between `i` and `j`, or `None` if they are
    /// disconnected.
    pub fn distance(&self, i: usize, j: usize) -> Result<Option<usize>> {
        let n = self.node_count();
        if i >= n || j >= n {
            return Err(Error::arg(format!(
                "node pair ({i}, {j}) out of range for {n} nodes"
            )));
        }
        Ok(self.distances_from(i)[j])
    }

    /// Nodes within `d` hops of `node`, including `node` itself, sorted.
    pub fn neighborhood(&self, node: usize, d: usize) -> Vec<usize> {
        self.distances_from(node)
            .iter()
            .enumerate()
            .filter(|(_, h)| matches!(h, Some(h) if *h <= d))
            .map(|(j, _)| j)
            .collect()
    }

    /// Longest finite shortest path.
    pub fn diameter(&self) -> usize {
        (0..self.node_count())
            .flat_map(|i| self.distances_from(i).into_iter().flatten())
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> SubsystemGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        SubsystemGraph::from_edges(n, &edges).unwrap()
    }

    /// Floyd-Warshall over the adjacency lists.
    fn all_pairs(g: &SubsystemGraph) -> Vec<Vec<Option<usize>>> {
        let n = g.node_count();
        let inf = usize::MAX / 4;
        let mut d = vec![vec![inf; n]; n];
        for i in 0..n {
            d[i][i] = 0;
            for &j in g.neighbors(i) {
                d[i][j] = 1;
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if d[i][k] + d[k][j] < d[i][j] {
                        d[i][j] = d[i][k] + d[k][j];
                    }
                }
            }
        }
        d.into_iter()
            .map(|row| row.into_iter().map(|x| (x < inf).then_some(x)).collect())
            .collect()
    }

    #[test]
    fn chain_end_to_end() {
        assert_eq!(chain(5).distance(0, 4).unwrap(), Some(4));
    }

    #[test]
    fn self_distance_is_zero() {
        let g = chain(4);
        for i in 0..4 {
            assert_eq!(g.distance(i, i).unwrap(), Some(0));
        }
    }

    #[test]
    fn disconnected_nodes() {
        let g = SubsystemGraph::from_edges(2, &[]).unwrap();
        assert_eq!(g.distance(0, 1).unwrap(), None);
    }

    #[test]
    fn out_of_range_is_an_argument_error() {
        assert!(matches!(
            chain(3).distance(0, 3),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn rejects_self_loops() {
        assert!(SubsystemGraph::from_edges(2, &[(1, 1)]).is_err());
    }

    #[test]
    fn adjacency_is_symmetric_and_sorted() {
        let g = SubsystemGraph::from_edges(4, &[(2, 0), (0, 1), (1, 0), (3, 2)]).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(2), &[0, 3]);
        assert_eq!(g.max_degree(), 2);
        assert_eq!(g.neighborhood(3, 1), vec![2, 3]);
    }

    proptest::proptest! {
        #[test]
        fn bfs_matches_all_pairs(n in 1usize..=12, raw in proptest::collection::vec((0usize..12, 0usize..12), 0..30)) {
            let edges: Vec<_> = raw.into_iter()
                .map(|(a, b)| (a % n, b % n))
                .filter(|(a, b)| a != b)
                .collect();
            let g = SubsystemGraph::from_edges(n, &edges).unwrap();
            let brute = all_pairs(&g);
            for i in 0..n {
                for j in 0..n {
                    proptest::prop_assert_eq!(g.distance(i, j).unwrap(), brute[i][j]);
                }
            }
        }
    }
}
