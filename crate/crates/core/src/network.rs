//! Directed road graph and shortest-path distances.
//!
//! Distances are `f64` meters with `f64::INFINITY` marking unreachable nodes.
//! Parallel edges are kept as loaded; the search simply relaxes all of them.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TipsError};

/// Dense index of a road intersection.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(value: usize) -> Self {
        NodeId(value as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub length: f64,
}

/// Which way edges are followed during a search.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Distances from the source to every node.
    Forward,
    /// Distances from every node to the source.
    Reverse,
}

#[derive(Clone, Debug, PartialEq)]
struct Adjacency {
    offsets: Vec<usize>,
    heads: Vec<u32>,
    lengths: Vec<f64>,
}

impl Adjacency {
    fn build(node_count: usize, edges: &[Edge], reverse: bool) -> Self {
        let mut offsets = vec![0usize; node_count + 1];
        for e in edges {
            let tail = if reverse { e.to } else { e.from };
            offsets[tail.index() + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let mut cursor = offsets.clone();
        let mut heads = vec![0u32; edges.len()];
        let mut lengths = vec![0.0; edges.len()];
        for e in edges {
            let (tail, head) = if reverse {
                (e.to, e.from)
            } else {
                (e.from, e.to)
            };
            let slot = &mut cursor[tail.index()];
            heads[*slot] = head.0;
            lengths[*slot] = e.length;
            *slot += 1;
        }
        Adjacency {
            offsets,
            heads,
            lengths,
        }
    }

    #[inline]
    fn neighbors(&self, node: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.heads[range.clone()]
            .iter()
            .zip(&self.lengths[range])
            .map(|(&h, &w)| (h as usize, w))
    }
}

/// Directed, non-negatively weighted road graph. Immutable after construction.
#[derive(Clone, Debug, PartialEq)]
pub struct RoadNetwork {
    node_count: usize,
    edges: Vec<Edge>,
    forward: Adjacency,
    backward: Adjacency,
}

/// Builds a network from `(from, to, length)` records; the node count is one
/// more than the largest endpoint.
pub fn load_network<I>(records: I) -> Result<RoadNetwork>
where
    I: IntoIterator<Item = (usize, usize, f64)>,
{
    let records: Vec<_> = records.into_iter().collect();
    let node_count = records
        .iter()
        .map(|&(a, b, _)| a.max(b) + 1)
        .max()
        .ok_or(TipsError::EmptyNetwork)?;
    RoadNetwork::new(node_count, records)
}

impl RoadNetwork {
    /// Builds a network with an explicit node count, which may include
    /// isolated nodes beyond the largest edge endpoint.
    pub fn new<I>(node_count: usize, records: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut edges = Vec::new();
        for (record, (from, to, length)) in records.into_iter().enumerate() {
            if length.is_nan() || length.is_infinite() {
                return Err(TipsError::NonFiniteLength { record });
            }
            if length < 0.0 {
                return Err(TipsError::NegativeLength { record, length });
            }
            for node in [from, to] {
                if node >= node_count {
                    return Err(TipsError::InvalidNode { node, node_count });
                }
            }
            edges.push(Edge {
                from: NodeId::from(from),
                to: NodeId::from(to),
                length,
            });
        }
        if node_count == 0 {
            return Err(TipsError::EmptyNetwork);
        }
        Ok(RoadNetwork {
            node_count,
            forward: Adjacency::build(node_count, &edges, false),
            backward: Adjacency::build(node_count, &edges, true),
            edges,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, node: NodeId) -> bool {
        node.index() < self.node_count
    }

    pub fn check(&self, node: NodeId) -> Result<()> {
        if self.contains(node) {
            Ok(())
        } else {
            Err(TipsError::InvalidNode {
                node: node.index(),
                node_count: self.node_count,
            })
        }
    }

    /// Outgoing neighbours of `node` with edge lengths.
    pub fn successors(&self, node: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.forward
            .neighbors(node.index())
            .map(|(h, w)| (NodeId::from(h), w))
    }

    fn adjacency(&self, direction: Direction) -> &Adjacency {
        match direction {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.backward,
        }
    }

    /// Exact single-source shortest distances (Dijkstra).
    pub fn sssp(&self, source: NodeId) -> Result<DistanceVector> {
        self.search(source, Direction::Forward)
    }

    /// Shortest distances from every node *to* `target`.
    pub fn sssp_to(&self, target: NodeId) -> Result<DistanceVector> {
        self.search(target, Direction::Reverse)
    }

    pub fn search(&self, source: NodeId, direction: Direction) -> Result<DistanceVector> {
        self.check(source)?;
        let dist = dijkstra(
            self.adjacency(direction),
            self.node_count,
            source.index(),
            f64::INFINITY,
            None,
        );
        Ok(DistanceVector { source, dist })
    }

    /// Nodes whose distance from (or to) `source` is at most `radius`, with
    /// those distances. Settles nothing beyond the radius.
    pub fn within(
        &self,
        source: NodeId,
        radius: f64,
        direction: Direction,
    ) -> Result<Vec<(NodeId, f64)>> {
        self.check(source)?;
        let dist = dijkstra(
            self.adjacency(direction),
            self.node_count,
            source.index(),
            radius,
            None,
        );
        Ok(dist
            .iter()
            .enumerate()
            .filter(|(_, d)| **d <= radius)
            .map(|(v, d)| (NodeId::from(v), *d))
            .collect())
    }

    /// Shortest directed distance `d(from, to)`, stopping once `to` settles.
    pub fn distance(&self, from: NodeId, to: NodeId) -> Result<f64> {
        self.check(from)?;
        self.check(to)?;
        let dist = dijkstra(
            &self.forward,
            self.node_count,
            from.index(),
            f64::INFINITY,
            Some(to.index()),
        );
        Ok(dist[to.index()])
    }

    /// Round-trip distance `d(u, v) + d(v, u)`; infinite if either leg is.
    pub fn round_trip(&self, u: NodeId, v: NodeId) -> Result<f64> {
        Ok(self.distance(u, v)? + self.distance(v, u)?)
    }
}

/// Distances from (or to) one source node.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceVector {
    pub source: NodeId,
    pub dist: Vec<f64>,
}

impl DistanceVector {
    #[inline]
    pub fn get(&self, node: NodeId) -> f64 {
        self.dist[node.index()]
    }
}

#[derive(Copy, Clone, PartialEq)]
struct Frontier {
    dist: f64,
    node: usize,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, ties on node id
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(
    adj: &Adjacency,
    n: usize,
    source: usize,
    bound: f64,
    stop_at: Option<usize>,
) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(Frontier {
        dist: 0.0,
        node: source,
    });
    while let Some(Frontier { dist: d, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if Some(node) == stop_at {
            break;
        }
        for (next, w) in adj.neighbors(node) {
            let candidate = d + w;
            if candidate < dist[next] && candidate <= bound {
                dist[next] = candidate;
                heap.push(Frontier {
                    dist: candidate,
                    node: next,
                });
            }
        }
    }
    dist
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle4() -> RoadNetwork {
        load_network([(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap()
    }

    #[test]
    fn two_way_segment() {
        let net = load_network([(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(net.node_count(), 2);
        assert_eq!(net.edges().len(), 2);
        assert_eq!(net.sssp(NodeId(0)).unwrap().dist, vec![0.0, 2.0]);
    }

    #[test]
    fn negative_length_rejected() {
        let err = load_network([(0, 1, -1.0)]).unwrap_err();
        assert!(matches!(err, TipsError::NegativeLength { record: 0, .. }));
    }

    #[test]
    fn non_finite_and_empty_rejected() {
        assert!(matches!(
            load_network([(0, 1, f64::NAN)]),
            Err(TipsError::NonFiniteLength { .. })
        ));
        assert!(matches!(
            load_network(Vec::<(usize, usize, f64)>::new()),
            Err(TipsError::EmptyNetwork)
        ));
    }

    #[test]
    fn directed_cycle_distances() {
        let net = cycle4();
        assert_eq!(net.node_count(), 4);
        assert_eq!(net.distance(NodeId(0), NodeId(2)).unwrap(), 2.0);
        assert_eq!(net.distance(NodeId(2), NodeId(0)).unwrap(), 2.0);
        assert_eq!(net.round_trip(NodeId(0), NodeId(2)).unwrap(), 4.0);
        assert_eq!(net.distance(NodeId(0), NodeId(3)).unwrap(), 3.0);
    }

    #[test]
    fn directed_edge_is_asymmetric() {
        let net = load_network([(0, 1, 5.0)]).unwrap();
        assert_eq!(net.sssp(NodeId(1)).unwrap().dist[0], f64::INFINITY);
        assert_eq!(net.sssp_to(NodeId(1)).unwrap().dist, vec![5.0, 0.0]);
        assert_eq!(net.round_trip(NodeId(0), NodeId(1)).unwrap(), f64::INFINITY);
    }

    #[test]
    fn parallel_edges_use_shortest() {
        let net = load_network([(0, 1, 7.0), (0, 1, 3.0), (0, 1, 5.0)]).unwrap();
        assert_eq!(net.edges().len(), 3);
        assert_eq!(net.distance(NodeId(0), NodeId(1)).unwrap(), 3.0);
    }

    #[test]
    fn invalid_source() {
        let net = cycle4();
        assert!(matches!(
            net.sssp(NodeId(9)),
            Err(TipsError::InvalidNode { node: 9, .. })
        ));
    }

    #[test]
    fn within_radius_respects_direction() {
        let net = load_network([(0, 1, 1.0), (1, 2, 1.0), (2, 0, 10.0)]).unwrap();
        let out: Vec<_> = net.within(NodeId(0), 1.5, Direction::Forward).unwrap();
        assert_eq!(out, vec![(NodeId(0), 0.0), (NodeId(1), 1.0)]);
        let back: Vec<_> = net.within(NodeId(0), 1.5, Direction::Reverse).unwrap();
        assert_eq!(back, vec![(NodeId(0), 0.0)]);
    }
}
