//! Instance reduction: site sampling by randomized covering and trajectory
//! sampling by Jaccard agglomeration over coarse (cluster-center) sequences.

use std::collections::BTreeSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cover::randomized_cover;
use crate::error::{Result, TipsError};
use crate::network::NodeId;
use crate::trajectory::{PlacementInstance, Trajectory};

#[derive(Clone, Debug, PartialEq)]
pub struct SiteSample {
    pub radius: f64,
    pub clusters: Vec<u32>,
    pub centers: Vec<NodeId>,
    /// Site of `S` nearest to each center by round trip, if any.
    pub representatives: Vec<Option<NodeId>>,
    /// Defined representatives, ascending.
    pub sampled_sites: Vec<NodeId>,
}

pub fn sample_sites(inst: &PlacementInstance, radius: f64, seed: u64) -> Result<SiteSample> {
    if radius.is_nan() || radius <= 0.0 {
        return Err(TipsError::InvalidParameter(format!(
            "sampling radius must be positive, got {radius}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cover = randomized_cover(&inst.network, radius, &mut rng)?;
    let representatives = cover.nearest_in(&inst.sites);
    let mut sampled_sites: Vec<NodeId> = representatives.iter().flatten().copied().collect();
    sampled_sites.sort_unstable();
    Ok(SiteSample {
        radius,
        clusters: cover.assignment,
        centers: cover.centers,
        representatives,
        sampled_sites,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectorySample {
    pub target_size: usize,
    /// Cluster centers visited by each original trajectory.
    pub coarse: Vec<BTreeSet<NodeId>>,
    /// Positions of the kept trajectories in the original instance, ascending.
    pub members: Vec<usize>,
    pub representatives: Vec<Trajectory>,
    /// The target exceeded the number of trajectories.
    pub truncated: bool,
}

fn jaccard(a: &BTreeSet<NodeId>, b: &BTreeSet<NodeId>) -> f64 {
    let shared = a.intersection(b).count();
    let union = a.len() + b.len() - shared;
    if union == 0 {
        1.0
    } else {
        shared as f64 / union as f64
    }
}

/// Agglomerates trajectories by the Jaccard similarity of their coarse
/// sequences until `target` clusters remain. The surviving representative of
/// a fusion is the trajectory with more nodes, then the smaller id.
pub fn sample_trajectories(
    inst: &PlacementInstance,
    sites: &SiteSample,
    target: usize,
) -> Result<TrajectorySample> {
    if target == 0 {
        return Err(TipsError::InvalidParameter(
            "trajectory sample size must be at least 1".into(),
        ));
    }
    let trajs = &inst.trajectories;
    let m = trajs.len();
    let coarse: Vec<BTreeSet<NodeId>> = trajs
        .iter()
        .map(|t| {
            t.nodes
                .iter()
                .map(|v| sites.centers[sites.clusters[v.index()] as usize])
                .collect()
        })
        .collect();
    let mut active = vec![true; m];
    let mut remaining = m;
    if target < m {
        let mut pairs: Vec<(f64, usize, usize)> = (0..m)
            .into_par_iter()
            .flat_map_iter(|p| {
                let coarse = &coarse;
                (p + 1..m).map(move |q| (jaccard(&coarse[p], &coarse[q]), p, q))
            })
            .collect();
        pairs.par_sort_unstable_by(|a, b| {
            b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2))
        });
        for (_, p, q) in pairs {
            if remaining == target {
                break;
            }
            if !(active[p] && active[q]) {
                continue;
            }
            let keep_p = (
                trajs[p].len(),
                std::cmp::Reverse(trajs[p].id),
                std::cmp::Reverse(p),
            ) > (
                trajs[q].len(),
                std::cmp::Reverse(trajs[q].id),
                std::cmp::Reverse(q),
            );
            active[if keep_p { q } else { p }] = false;
            remaining -= 1;
        }
    }
    let members: Vec<usize> = (0..m).filter(|&j| active[j]).collect();
    Ok(TrajectorySample {
        target_size: target,
        coarse,
        representatives: members.iter().map(|&j| trajs[j].clone()).collect(),
        members,
        truncated: target > m,
    })
}

/// The instance restricted to the sampled sites and trajectories; existing
/// facilities are kept.
pub fn reduce_instance(
    inst: &PlacementInstance,
    sites: &SiteSample,
    trajs: &TrajectorySample,
) -> Result<PlacementInstance> {
    PlacementInstance::new(
        inst.network.clone(),
        trajs.representatives.clone(),
        sites.sampled_sites.clone(),
        inst.facilities.clone(),
    )
}
