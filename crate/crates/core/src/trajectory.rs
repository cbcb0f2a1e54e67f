//! Trajectories, detour distances and the inconvenience objectives.
//!
//! The detour of trajectory `T` to site `s` is
//! `min over v_k, v_l in T of d(v_k, s) + d(s, v_l) - d(v_k, v_l)`,
//! taken over all ordered node pairs including `v_k = v_l`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TipsError};
use crate::network::{NodeId, RoadNetwork};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: u64,
    pub nodes: Vec<NodeId>,
}

impl Trajectory {
    pub fn new(id: u64, nodes: Vec<NodeId>) -> Result<Self> {
        if nodes.is_empty() {
            return Err(TipsError::InvalidTrajectory {
                id,
                reason: "no nodes".into(),
            });
        }
        if let Some(w) = nodes.windows(2).find(|w| w[0] == w[1]) {
            return Err(TipsError::InvalidTrajectory {
                id,
                reason: format!("node {} repeated consecutively", w[0]),
            });
        }
        Ok(Trajectory { id, nodes })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: NodeId) -> bool {
        self.nodes.contains(&node)
    }
}

/// Network, trajectories `T`, candidate sites `S` and existing facilities `F`.
///
/// Sites and facilities are kept sorted and deduplicated. A site that is also
/// a facility is treated as a facility: it is never a candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct PlacementInstance {
    pub network: RoadNetwork,
    pub trajectories: Vec<Trajectory>,
    pub sites: Vec<NodeId>,
    pub facilities: Vec<NodeId>,
}

impl PlacementInstance {
    pub fn new(
        network: RoadNetwork,
        trajectories: Vec<Trajectory>,
        mut sites: Vec<NodeId>,
        mut facilities: Vec<NodeId>,
    ) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(TipsError::NoTrajectories);
        }
        if sites.is_empty() {
            return Err(TipsError::NoSites);
        }
        for t in &trajectories {
            for &v in &t.nodes {
                network.check(v).map_err(|_| TipsError::InvalidTrajectory {
                    id: t.id,
                    reason: format!("node {v} is not in the network"),
                })?;
            }
        }
        sites.sort_unstable();
        sites.dedup();
        facilities.sort_unstable();
        facilities.dedup();
        for &v in sites.iter().chain(&facilities) {
            network.check(v)?;
        }
        Ok(PlacementInstance {
            network,
            trajectories,
            sites,
            facilities,
        })
    }

    /// Instance with every node a candidate site and no existing facilities.
    pub fn all_sites(network: RoadNetwork, trajectories: Vec<Trajectory>) -> Result<Self> {
        let sites = (0..network.node_count()).map(NodeId::from).collect();
        Self::new(network, trajectories, sites, Vec::new())
    }

    pub fn trajectory_count(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_facility(&self, node: NodeId) -> bool {
        self.facilities.binary_search(&node).is_ok()
    }

    /// `S \ F`, sorted.
    pub fn candidates(&self) -> Vec<NodeId> {
        self.sites
            .iter()
            .copied()
            .filter(|&s| !self.is_facility(s))
            .collect()
    }

    /// `S ∪ F`, sorted.
    pub fn all_columns(&self) -> Vec<NodeId> {
        let set: BTreeSet<NodeId> = self.sites.iter().chain(&self.facilities).copied().collect();
        set.into_iter().collect()
    }

    /// Total visited nodes over all trajectories.
    pub fn node_visits(&self) -> usize {
        self.trajectories.iter().map(Trajectory::len).sum()
    }
}

/// Detour given per-node distances to/from the site and the trajectory's own
/// pairwise distances (row-major `l × l`, `intra[k * l + l2] = d(v_k, v_l2)`).
pub(crate) fn detour_from_parts(to_site: &[f64], from_site: &[f64], intra: &[f64]) -> f64 {
    let l = to_site.len();
    let mut best = f64::INFINITY;
    for k in 0..l {
        let out = to_site[k];
        if out == f64::INFINITY {
            continue;
        }
        for (j, &back) in from_site.iter().enumerate() {
            let direct = intra[k * l + j];
            // d(v_k, v_l) = ∞ forces d(v_k, s) + d(s, v_l) = ∞ as well
            if back == f64::INFINITY || direct == f64::INFINITY {
                continue;
            }
            let extra = out + back - direct;
            if extra < best {
                best = extra;
            }
        }
    }
    best.max(0.0)
}

/// Extra distance a user on `traj` travels to visit `site` and rejoin.
///
/// Runs one search per trajectory node plus two from the site; use
/// [`TrajectoryGeometry`] when evaluating many pairs.
pub fn detour_distance(net: &RoadNetwork, traj: &Trajectory, site: NodeId) -> Result<f64> {
    let from_site = net.sssp(site)?;
    let to_site = net.sssp_to(site)?;
    let l = traj.len();
    let mut intra = vec![0.0; l * l];
    for (k, &vk) in traj.nodes.iter().enumerate() {
        let dv = net.sssp(vk)?;
        for (j, &vl) in traj.nodes.iter().enumerate() {
            intra[k * l + j] = dv.get(vl);
        }
    }
    let to: Vec<f64> = traj.nodes.iter().map(|&v| to_site.get(v)).collect();
    let from: Vec<f64> = traj.nodes.iter().map(|&v| from_site.get(v)).collect();
    Ok(detour_from_parts(&to, &from, &intra))
}

/// Minimum round-trip distance between any node of `a` and any node of `b`.
pub fn trajectory_pair_distance(net: &RoadNetwork, a: &Trajectory, b: &Trajectory) -> Result<f64> {
    let mut best = f64::INFINITY;
    for &u in &a.nodes {
        let out = net.sssp(u)?;
        let back = net.sssp_to(u)?;
        for &v in &b.nodes {
            best = best.min(out.get(v) + back.get(v));
        }
    }
    Ok(best)
}

/// Sum of shortest distances between consecutive trajectory nodes.
pub fn trajectory_length(net: &RoadNetwork, traj: &Trajectory) -> Result<f64> {
    let mut total = 0.0;
    for w in traj.nodes.windows(2) {
        total += net.distance(w[0], w[1])?;
    }
    Ok(total)
}

/// Pairwise shortest distances between the nodes of each trajectory,
/// computed once per instance and shared by every detour evaluation.
#[derive(Clone, Debug)]
pub struct TrajectoryGeometry {
    intra: Vec<Vec<f64>>,
}

impl TrajectoryGeometry {
    pub fn build(inst: &PlacementInstance) -> Result<Self> {
        Ok(scan_nodes(inst, &[])?.geometry)
    }

    pub fn intra(&self, trajectory: usize) -> &[f64] {
        &self.intra[trajectory]
    }

    /// Detours of every trajectory to `site` (two searches from the site).
    pub fn site_detours(&self, inst: &PlacementInstance, site: NodeId) -> Result<Vec<f64>> {
        let from_site = inst.network.sssp(site)?;
        let to_site = inst.network.sssp_to(site)?;
        Ok(inst
            .trajectories
            .iter()
            .enumerate()
            .map(|(j, t)| {
                let to: Vec<f64> = t.nodes.iter().map(|&v| to_site.get(v)).collect();
                let from: Vec<f64> = t.nodes.iter().map(|&v| from_site.get(v)).collect();
                detour_from_parts(&to, &from, &self.intra[j])
            })
            .collect())
    }

    /// Detours of trajectory `j` to each of `sites`, with one forward and
    /// one reverse search per trajectory node.
    pub fn trajectory_detours(
        &self,
        inst: &PlacementInstance,
        j: usize,
        sites: &[NodeId],
    ) -> Result<Vec<f64>> {
        let t = &inst.trajectories[j];
        let outgoing = t
            .nodes
            .iter()
            .map(|&v| inst.network.sssp(v))
            .collect::<Result<Vec<_>>>()?;
        let incoming = t
            .nodes
            .iter()
            .map(|&v| inst.network.sssp_to(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(sites
            .iter()
            .map(|&s| {
                let to: Vec<f64> = outgoing.iter().map(|d| d.get(s)).collect();
                let from: Vec<f64> = incoming.iter().map(|d| d.get(s)).collect();
                detour_from_parts(&to, &from, &self.intra[j])
            })
            .collect())
    }
}

/// Result of one pass over the distinct trajectory nodes: the intra-trajectory
/// distances plus, for each distinct node `v` and requested column `s`,
/// `d(v, s)` in `to_columns` and `d(s, v)` in `from_columns`.
pub(crate) struct NodeScan {
    pub geometry: TrajectoryGeometry,
    pub slot: HashMap<NodeId, usize>,
    pub to_columns: Vec<Vec<f64>>,
    pub from_columns: Vec<Vec<f64>>,
}

/// One forward search per distinct trajectory node, plus a reverse search
/// when `columns` is non-empty.
pub(crate) fn scan_nodes(inst: &PlacementInstance, columns: &[NodeId]) -> Result<NodeScan> {
    let mut occurrences: BTreeMap<NodeId, Vec<(usize, usize)>> = BTreeMap::new();
    for (j, t) in inst.trajectories.iter().enumerate() {
        for (k, &v) in t.nodes.iter().enumerate() {
            occurrences.entry(v).or_default().push((j, k));
        }
    }
    let distinct: Vec<(NodeId, Vec<(usize, usize)>)> = occurrences.into_iter().collect();

    struct Scanned {
        rows: Vec<(usize, usize, Vec<f64>)>,
        to: Vec<f64>,
        from: Vec<f64>,
    }
    let scanned: Vec<Scanned> = distinct
        .par_iter()
        .map(|(v, occ)| {
            let out = inst.network.sssp(*v)?;
            let rows = occ
                .iter()
                .map(|&(j, k)| {
                    let row = inst.trajectories[j]
                        .nodes
                        .iter()
                        .map(|&w| out.get(w))
                        .collect();
                    (j, k, row)
                })
                .collect();
            let to = columns.iter().map(|&s| out.get(s)).collect();
            let from = if columns.is_empty() {
                Vec::new()
            } else {
                let back = inst.network.sssp_to(*v)?;
                columns.iter().map(|&s| back.get(s)).collect()
            };
            Ok(Scanned { rows, to, from })
        })
        .collect::<Result<_>>()?;

    let mut intra: Vec<Vec<f64>> = inst
        .trajectories
        .iter()
        .map(|t| vec![0.0; t.len() * t.len()])
        .collect();
    let mut slot = HashMap::with_capacity(distinct.len());
    let mut to_columns = Vec::with_capacity(distinct.len());
    let mut from_columns = Vec::with_capacity(distinct.len());
    for (i, ((v, _), sc)) in distinct.iter().zip(scanned).enumerate() {
        slot.insert(*v, i);
        for (j, k, row) in sc.rows {
            let l = row.len();
            intra[j][k * l..(k + 1) * l].copy_from_slice(&row);
        }
        to_columns.push(sc.to);
        from_columns.push(sc.from);
    }
    Ok(NodeScan {
        geometry: TrajectoryGeometry { intra },
        slot,
        to_columns,
        from_columns,
    })
}

/// Per-trajectory inconvenience against one evaluated site set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InconvenienceProfile {
    pub values: Vec<f64>,
    pub serving_site: Vec<Option<NodeId>>,
}

impl InconvenienceProfile {
    /// Profile where nothing serves anyone yet.
    pub fn unserved(m: usize) -> Self {
        InconvenienceProfile {
            values: vec![f64::INFINITY; m],
            serving_site: vec![None; m],
        }
    }

    /// Lowers trajectory `j` to `value` via `site` if that improves it; equal
    /// values move to the smaller site id.
    #[inline]
    pub fn offer(&mut self, j: usize, value: f64, site: NodeId) -> bool {
        if value == f64::INFINITY {
            return false;
        }
        let current = self.values[j];
        let better =
            value < current || (value == current && self.serving_site[j].is_none_or(|s| site < s));
        if better {
            self.values[j] = value;
            self.serving_site[j] = Some(site);
        }
        better
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Inconvenience of every trajectory against `selection ∪ F`, computed
/// directly from shortest-path searches.
pub fn inconvenience_profile(
    inst: &PlacementInstance,
    selection: &[NodeId],
) -> Result<InconvenienceProfile> {
    let geometry = TrajectoryGeometry::build(inst)?;
    profile_with(inst, &geometry, selection)
}

pub fn profile_with(
    inst: &PlacementInstance,
    geometry: &TrajectoryGeometry,
    selection: &[NodeId],
) -> Result<InconvenienceProfile> {
    let open: BTreeSet<NodeId> = selection.iter().chain(&inst.facilities).copied().collect();
    if open.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let mut profile = InconvenienceProfile::unserved(inst.trajectory_count());
    for &s in &open {
        let column = geometry.site_detours(inst, s)?;
        for (j, &d) in column.iter().enumerate() {
            profile.offer(j, d, s);
        }
    }
    Ok(profile)
}

/// Number of trajectories that must be served for user fraction `gamma`:
/// `⌈gamma · m⌉`, clamped to `1..=m`.
pub fn serve_count(m: usize, gamma: f64) -> usize {
    // guard against 0.7 * 10 = 7.000000000000001 style round-off
    let raw = (gamma * m as f64 - 1e-9).ceil();
    (raw.max(1.0) as usize).min(m)
}

pub fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma <= 1.0 {
        Ok(())
    } else {
        Err(TipsError::InvalidParameter(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )))
    }
}

/// MI: the `⌈gamma·m⌉`-th smallest inconvenience.
pub fn max_inconvenience(profile: &InconvenienceProfile, gamma: f64) -> f64 {
    rank_value(&profile.values, serve_count(profile.len(), gamma))
}

/// `rank`-th smallest (1-based) of `values`.
pub(crate) fn rank_value(values: &[f64], rank: usize) -> f64 {
    let mut scratch = values.to_vec();
    let (_, nth, _) = scratch.select_nth_unstable_by(rank - 1, f64::total_cmp);
    *nth
}

/// TI: sum of inconvenience over all trajectories.
pub fn total_inconvenience(profile: &InconvenienceProfile) -> f64 {
    profile.values.iter().sum()
}

/// AI = TI / m.
pub fn avg_inconvenience(profile: &InconvenienceProfile) -> f64 {
    total_inconvenience(profile) / profile.len() as f64
}
