//! MAX-TIPS solvers: exhaustive enumeration, MIF and the NetClus binary search.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::avgtips::{candidate_columns, open_set, DistanceMatrix};
use crate::enumerate::{best_subset, Score};
use crate::error::{Result, TipsError};
use crate::netclus::{tops_query, NetClusIndex};
use crate::network::NodeId;
use crate::solution::{NearestFacilityMap, SolverResult, TraceEvent};
use crate::trajectory::{
    check_gamma, max_inconvenience, profile_with, serve_count, PlacementInstance,
    TrajectoryGeometry,
};

/// Default MIF restarts (only used when `F` is empty).
pub const DEFAULT_RESTARTS: usize = 3;

/// Optimal MAX-TIPS selection by exhaustive enumeration of `k`-subsets of
/// `S \ F`; the lexicographically smallest optimum wins ties.
pub fn exact_maxtips(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
    k: usize,
    gamma: f64,
    budget: u128,
) -> Result<SolverResult> {
    check_gamma(gamma)?;
    let started = Instant::now();
    let (candidates, cols) = candidate_columns(inst, matrix)?;
    if k == 0 && inst.facilities.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let base = matrix.facility_base(inst)?;
    let columns: Vec<Vec<f64>> = cols
        .iter()
        .map(|&c| (0..matrix.rows()).map(|j| matrix.get(j, c)).collect())
        .collect();
    let rank = serve_count(matrix.rows(), gamma);
    let best = best_subset(&base, &columns, k, Score::Rank(rank), budget)?;
    let selected: Vec<NodeId> = best.members.iter().map(|&i| candidates[i]).collect();
    let profile = matrix.profile(&open_set(inst, &selected))?;
    Ok(SolverResult {
        algorithm: "exact".into(),
        objective: max_inconvenience(&profile, gamma),
        selected,
        profile,
        wall_time: started.elapsed().as_secs_f64(),
        seed: 0,
        work: best.visited,
        trace: Vec::new(),
        infeasible_at_tau_max: false,
    })
}

/// Most-Inconvenient-First greedy.
///
/// Each iteration takes the trajectory at rank `⌈γ·m⌉` of the NF map and opens
/// the free site nearest to it. With `F = ∅` the first trajectory is drawn at
/// random and the best of `restarts` runs is returned; otherwise the run is
/// deterministic and performed once.
pub fn mif(
    inst: &PlacementInstance,
    geometry: &TrajectoryGeometry,
    k: usize,
    gamma: f64,
    seed: u64,
    restarts: usize,
) -> Result<SolverResult> {
    check_gamma(gamma)?;
    if restarts == 0 {
        return Err(TipsError::InvalidParameter(
            "MIF needs at least one run".into(),
        ));
    }
    let candidates = inst.candidates();
    if k > candidates.len() {
        return Err(TipsError::TooFewSites {
            k,
            available: candidates.len(),
        });
    }
    if k == 0 && inst.facilities.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let started = Instant::now();
    let mut start = NearestFacilityMap::new(inst.trajectory_count());
    for &f in &inst.facilities {
        start.add_site(f, &geometry.site_detours(inst, f)?);
    }
    let runs = if inst.facilities.is_empty() {
        restarts
    } else {
        1
    };
    let outcomes = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run as u64);
            mif_run(
                inst,
                geometry,
                &candidates,
                start.clone(),
                k,
                gamma,
                &mut rng,
            )
        })
        .collect::<Result<Vec<_>>>()?;
    let work = (runs * k) as u64;
    let (nf, mut selected, trace) = outcomes
        .into_iter()
        .map(|(nf, sel, trace)| {
            let mi = max_inconvenience(nf.profile(), gamma);
            (mi, nf, sel, trace)
        })
        .reduce(|a, b| if b.0 < a.0 { b } else { a })
        .map(|(_, nf, sel, trace)| (nf, sel, trace))
        .expect("at least one run");
    selected.sort_unstable();
    let profile = nf.into_profile();
    Ok(SolverResult {
        algorithm: "mif".into(),
        objective: max_inconvenience(&profile, gamma),
        selected,
        profile,
        wall_time: started.elapsed().as_secs_f64(),
        seed,
        work,
        trace,
        infeasible_at_tau_max: false,
    })
}

type MifOutcome = (NearestFacilityMap, Vec<NodeId>, Vec<TraceEvent>);

fn mif_run(
    inst: &PlacementInstance,
    geometry: &TrajectoryGeometry,
    candidates: &[NodeId],
    mut nf: NearestFacilityMap,
    k: usize,
    gamma: f64,
    rng: &mut ChaCha8Rng,
) -> Result<MifOutcome> {
    let m = inst.trajectory_count();
    let rank = serve_count(m, gamma);
    let mut free = candidates.to_vec();
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let j = if nf.is_empty() {
            rng.gen_range(0..m)
        } else {
            nf.at_rank(rank)
        };
        let detours = geometry.trajectory_detours(inst, j, &free)?;
        let pos = detours
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .map(|(p, _)| p)
            .expect("k <= |S \\ F| leaves a free site");
        let site = free.remove(pos);
        nf.add_site(site, &geometry.site_detours(inst, site)?);
        selected.push(site);
        trace.push(TraceEvent::MifPick {
            trajectory: j,
            site,
        });
    }
    Ok((nf, selected, trace))
}

/// Default binary-search precision: `max(1 m, 0.005·tau_min)`.
pub fn default_precision(tau_min: f64) -> f64 {
    (0.005 * tau_min).max(1.0)
}

/// NetClus heuristic: binary search on the coverage threshold τ, answering
/// each probe with a TOPS query, then scoring the last feasible answer with
/// exact detours.
pub fn netclus_maxtips(
    index: &NetClusIndex,
    inst: &PlacementInstance,
    k: usize,
    gamma: f64,
    precision: f64,
) -> Result<SolverResult> {
    check_gamma(gamma)?;
    if precision.is_nan() || precision <= 0.0 {
        return Err(TipsError::InvalidParameter(format!(
            "precision must be positive, got {precision}"
        )));
    }
    index.check_instance(inst)?;
    let candidates = inst.candidates().len();
    if k > candidates {
        return Err(TipsError::TooFewSites {
            k,
            available: candidates,
        });
    }
    if k == 0 && inst.facilities.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let started = Instant::now();
    let needed = serve_count(inst.trajectory_count(), gamma);
    let (mut lo, mut hi) = (index.tau_min(), index.tau_max());
    let mut trace = Vec::new();
    let mut feasible: Option<Vec<NodeId>> = None;
    while hi - lo >= precision {
        let tau = 0.5 * (lo + hi);
        let answer = tops_query(index, k, tau)?;
        trace.push(TraceEvent::TopsProbe {
            tau,
            covered: answer.covered,
        });
        if answer.covered < needed {
            lo = tau;
        } else {
            hi = tau;
            feasible = Some(answer.selected);
        }
    }
    let mut infeasible = false;
    let selected = match feasible {
        Some(q) => q,
        None => {
            let answer = tops_query(index, k, index.tau_max())?;
            trace.push(TraceEvent::TopsProbe {
                tau: index.tau_max(),
                covered: answer.covered,
            });
            infeasible = answer.covered < needed;
            answer.selected
        }
    };
    let geometry = TrajectoryGeometry::build(inst)?;
    let profile = profile_with(inst, &geometry, &selected)?;
    let mut selected = selected;
    selected.sort_unstable();
    Ok(SolverResult {
        algorithm: "netclus".into(),
        objective: max_inconvenience(&profile, gamma),
        selected,
        profile,
        wall_time: started.elapsed().as_secs_f64(),
        seed: index.seed(),
        work: trace.len() as u64,
        trace,
        infeasible_at_tau_max: infeasible,
    })
}
