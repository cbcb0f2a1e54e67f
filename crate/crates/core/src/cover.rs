//! Randomized network covering shared by the NetClus index and site sampling.
//!
//! A random unclustered node becomes a center and absorbs every unclustered
//! node within `radius` of it in both directions; this repeats until every
//! node is clustered.

use std::collections::HashMap;

use rand::Rng;

use crate::error::{Result, TipsError};
use crate::network::{Direction, NodeId, RoadNetwork};

#[derive(Clone, Debug, PartialEq)]
pub struct Covering {
    pub radius: f64,
    /// Cluster of every node.
    pub assignment: Vec<u32>,
    /// Center node of every cluster.
    pub centers: Vec<NodeId>,
    /// Round-trip distance from every node to its own center.
    pub center_dist: Vec<f64>,
}

impl Covering {
    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }

    /// Member nodes per cluster, in id order.
    pub fn members(&self) -> Vec<Vec<NodeId>> {
        let mut members = vec![Vec::new(); self.centers.len()];
        for (v, &c) in self.assignment.iter().enumerate() {
            members[c as usize].push(NodeId::from(v));
        }
        members
    }

    /// For each cluster, the node of `pool` in it closest to the center by
    /// round trip, smallest id on ties.
    pub fn nearest_in(&self, pool: &[NodeId]) -> Vec<Option<NodeId>> {
        let mut best: Vec<Option<NodeId>> = vec![None; self.centers.len()];
        for &s in pool {
            let c = self.assignment[s.index()] as usize;
            let closer = match best[c] {
                None => true,
                Some(b) => {
                    let (ds, db) = (self.center_dist[s.index()], self.center_dist[b.index()]);
                    ds < db || (ds == db && s < b)
                }
            };
            if closer {
                best[c] = Some(s);
            }
        }
        best
    }
}

pub fn randomized_cover<R: Rng>(net: &RoadNetwork, radius: f64, rng: &mut R) -> Result<Covering> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(TipsError::InvalidParameter(format!(
            "cluster radius must be finite and non-negative, got {radius}"
        )));
    }
    let n = net.node_count();
    let mut assignment = vec![u32::MAX; n];
    let mut center_dist = vec![f64::INFINITY; n];
    let mut centers = Vec::new();
    let mut unclustered: Vec<u32> = (0..n as u32).collect();
    while !unclustered.is_empty() {
        let center = NodeId(unclustered[rng.gen_range(0..unclustered.len())]);
        let cluster = centers.len() as u32;
        let back: HashMap<NodeId, f64> = net
            .within(center, radius, Direction::Reverse)?
            .into_iter()
            .collect();
        for (v, out) in net.within(center, radius, Direction::Forward)? {
            if assignment[v.index()] != u32::MAX {
                continue;
            }
            if let Some(&ret) = back.get(&v) {
                assignment[v.index()] = cluster;
                center_dist[v.index()] = out + ret;
            }
        }
        centers.push(center);
        unclustered.retain(|&v| assignment[v as usize] == u32::MAX);
    }
    Ok(Covering {
        radius,
        assignment,
        centers,
        center_dist,
    })
}
