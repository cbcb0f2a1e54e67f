//! Grid-city generator: a two-way grid with random-walk trajectories.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TipsError};
use crate::network::{load_network, NodeId};
use crate::trajectory::{PlacementInstance, Trajectory};

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticParams {
    /// Grid cells across; the grid has `width + 1` columns of nodes.
    pub width: usize,
    /// Grid cells down; the grid has `height + 1` rows of nodes.
    pub height: usize,
    pub edge_len: f64,
    pub traj_count: usize,
    /// Nodes per trajectory.
    pub traj_len: usize,
    pub seed: u64,
}

/// Instance on a `(width+1) × (height+1)` two-way grid with `S = V`, `F = ∅`.
/// Trajectories are random walks that never step straight back.
pub fn generate_synthetic(p: &SyntheticParams) -> Result<PlacementInstance> {
    if p.width == 0 || p.height == 0 || p.traj_count == 0 || p.traj_len == 0 {
        return Err(TipsError::InvalidParameter(
            "grid dimensions, trajectory count and length must be positive".into(),
        ));
    }
    if !(p.edge_len > 0.0 && p.edge_len.is_finite()) {
        return Err(TipsError::InvalidParameter(format!(
            "edge length must be positive, got {}",
            p.edge_len
        )));
    }
    let cols = p.width + 1;
    let rows = p.height + 1;
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    let mut neighbours = vec![Vec::new(); rows * cols];
    for r in 0..rows {
        for c in 0..cols {
            let v = id(r, c);
            if c + 1 < cols {
                edges.push((v, v + 1, p.edge_len));
                edges.push((v + 1, v, p.edge_len));
            }
            if r + 1 < rows {
                edges.push((v, v + cols, p.edge_len));
                edges.push((v + cols, v, p.edge_len));
            }
            if r > 0 {
                neighbours[v].push(id(r - 1, c));
            }
            if c > 0 {
                neighbours[v].push(id(r, c - 1));
            }
            if c + 1 < cols {
                neighbours[v].push(id(r, c + 1));
            }
            if r + 1 < rows {
                neighbours[v].push(id(r + 1, c));
            }
        }
    }
    let net = load_network(edges)?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut trajectories = Vec::with_capacity(p.traj_count);
    let mut options = Vec::with_capacity(4);
    for t in 0..p.traj_count {
        let mut walk = vec![rng.gen_range(0..rows * cols)];
        let mut previous = None;
        while walk.len() < p.traj_len {
            let here = *walk.last().unwrap();
            options.clear();
            options.extend(
                neighbours[here]
                    .iter()
                    .copied()
                    .filter(|&w| Some(w) != previous),
            );
            let next = *options
                .choose(&mut rng)
                .expect("grid nodes have at least two neighbours");
            previous = Some(here);
            walk.push(next);
        }
        let nodes = walk.into_iter().map(NodeId::from).collect();
        trajectories.push(Trajectory::new(t as u64, nodes)?);
    }
    PlacementInstance::all_sites(net, trajectories)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> SyntheticParams {
        SyntheticParams {
            width: 4,
            height: 3,
            edge_len: 50.0,
            traj_count: 10,
            traj_len: 6,
            seed: 9,
        }
    }

    #[test]
    fn unit_grid_has_four_nodes() {
        let inst = generate_synthetic(&SyntheticParams {
            width: 1,
            height: 1,
            ..params()
        })
        .unwrap();
        assert_eq!(inst.network.node_count(), 4);
        assert_eq!(inst.network.edges().len(), 8);
        assert_eq!(inst.sites.len(), 4);
        assert!(inst.facilities.is_empty());
    }

    #[test]
    fn walks_step_to_neighbours_without_backtracking() {
        let inst = generate_synthetic(&params()).unwrap();
        assert_eq!(inst.trajectory_count(), 10);
        for t in &inst.trajectories {
            assert_eq!(t.len(), 6);
            for w in t.nodes.windows(2) {
                assert_eq!(inst.network.distance(w[0], w[1]).unwrap(), 50.0);
            }
            for w in t.nodes.windows(3) {
                assert_ne!(w[0], w[2]);
            }
        }
    }

    #[test]
    fn rejects_degenerate_parameters() {
        assert!(generate_synthetic(&SyntheticParams {
            width: 0,
            ..params()
        })
        .is_err());
        assert!(generate_synthetic(&SyntheticParams {
            traj_len: 0,
            ..params()
        })
        .is_err());
        assert!(generate_synthetic(&SyntheticParams {
            edge_len: -1.0,
            ..params()
        })
        .is_err());
    }
}
