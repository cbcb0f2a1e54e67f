//! Shared fixtures, instance generators and independent oracles.
#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tips_core::io::{generate_synthetic, parse_instance, InstancePaths, SyntheticParams};
use tips_core::{load_network, NodeId, PlacementInstance, Trajectory};

pub fn fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/reference")
}

/// Reference instance: sites s1..s4 = nodes 1..4, facility s0 = node 0,
/// trajectories T1..T6 at positions 0..5.
pub fn reference_instance() -> PlacementInstance {
    parse_instance(&InstancePaths::in_dir(&fixture_dir())).expect("fixture parses")
}

pub fn nodes(ids: &[u32]) -> Vec<NodeId> {
    ids.iter().map(|&v| NodeId(v)).collect()
}

/// Shortest distances by repeated relaxation of every edge.
pub fn bellman_ford(n: usize, edges: &[(usize, usize, f64)], source: usize) -> Vec<f64> {
    let mut dist = vec![f64::INFINITY; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut changed = false;
        for &(a, b, w) in edges {
            if dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

pub fn all_pairs(inst: &PlacementInstance) -> Vec<Vec<f64>> {
    let n = inst.network.node_count();
    let edges: Vec<(usize, usize, f64)> = inst
        .network
        .edges()
        .iter()
        .map(|e| (e.from.index(), e.to.index(), e.length))
        .collect();
    (0..n).map(|s| bellman_ford(n, &edges, s)).collect()
}

/// Detour by brute force over every ordered node pair.
pub fn brute_detour(d: &[Vec<f64>], traj: &[NodeId], site: NodeId) -> f64 {
    let s = site.index();
    let mut best = f64::INFINITY;
    for a in traj {
        for b in traj {
            let (a, b) = (a.index(), b.index());
            if d[a][s].is_infinite() || d[s][b].is_infinite() || d[a][b].is_infinite() {
                continue;
            }
            best = best.min(d[a][s] + d[s][b] - d[a][b]);
        }
    }
    best.max(0.0)
}

/// Per-trajectory inconvenience against `open` from a brute-force table.
pub fn brute_profile(d: &[Vec<f64>], inst: &PlacementInstance, open: &[NodeId]) -> Vec<f64> {
    inst.trajectories
        .iter()
        .map(|t| {
            open.iter()
                .map(|&s| brute_detour(d, &t.nodes, s))
                .fold(f64::INFINITY, f64::min)
        })
        .collect()
}

/// Random directed graph with integer lengths, some one-way roads, and
/// trajectories that are arbitrary node sequences.
pub fn random_instance(seed: u64, n: usize, m: usize) -> PlacementInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        let w = rng.gen_range(1..20) as f64;
        edges.push((u, v, w));
        edges.push((v, u, w));
    }
    for _ in 0..n {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        edges.push((a, b, rng.gen_range(0..30) as f64));
    }
    let net = tips_core::RoadNetwork::new(n, edges).unwrap();
    let trajs = (0..m)
        .map(|j| {
            let len = rng.gen_range(1..5);
            let mut seq: Vec<NodeId> = Vec::new();
            while seq.len() < len {
                let v = NodeId(rng.gen_range(0..n) as u32);
                if seq.last() != Some(&v) {
                    seq.push(v);
                }
            }
            Trajectory::new(j as u64, seq).unwrap()
        })
        .collect();
    let mut all: Vec<NodeId> = (0..n).map(NodeId::from).collect();
    all.shuffle(&mut rng);
    let sites = all[..n.div_ceil(2)].to_vec();
    PlacementInstance::new(net, trajs, sites, Vec::new()).unwrap()
}

/// Two-way grid city with `S = V` and `facilities` random existing ones.
pub fn grid_instance(seed: u64, cells: usize, m: usize, facilities: usize) -> PlacementInstance {
    let inst = generate_synthetic(&SyntheticParams {
        width: cells,
        height: cells,
        edge_len: 100.0,
        traj_count: m,
        traj_len: 4,
        seed,
    })
    .unwrap();
    with_facilities(inst, facilities, seed)
}

pub fn with_facilities(inst: PlacementInstance, count: usize, seed: u64) -> PlacementInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let f: Vec<NodeId> = inst
        .sites
        .choose_multiple(&mut rng, count)
        .copied()
        .collect();
    PlacementInstance::new(inst.network, inst.trajectories, inst.sites, f).unwrap()
}

pub fn line_network(n: usize) -> tips_core::RoadNetwork {
    let mut edges = Vec::new();
    for i in 0..n - 1 {
        edges.push((i, i + 1, 1.0));
        edges.push((i + 1, i, 1.0));
    }
    load_network(edges).unwrap()
}
