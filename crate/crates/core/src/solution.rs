//! Solver output and the nearest-facility bookkeeping shared by the heuristics.

use serde::{Deserialize, Serialize};

use crate::network::NodeId;
use crate::trajectory::InconvenienceProfile;

/// One observable step of a solver run, in execution order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum TraceEvent {
    /// MIF chose `trajectory` (position in the instance) and its nearest free site.
    MifPick { trajectory: usize, site: NodeId },
    /// GREAT added `site`, bringing TI to `total`.
    GreatPick { site: NodeId, total: f64 },
    /// HCC trial started from `medoids` with TI `total`.
    HccStart {
        trial: usize,
        medoids: Vec<NodeId>,
        total: f64,
    },
    /// HCC replaced `removed` by `added`, bringing TI to `total`.
    HccSwap {
        trial: usize,
        removed: NodeId,
        added: NodeId,
        total: f64,
    },
    /// One TOPS probe of the NetClus binary search.
    TopsProbe { tau: f64, covered: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub algorithm: String,
    /// New sites `Q`, sorted, disjoint from `F`.
    pub selected: Vec<NodeId>,
    /// MI for MAX-TIPS solvers, TI for AVG-TIPS solvers.
    pub objective: f64,
    /// Inconvenience against `Q ∪ F`.
    pub profile: InconvenienceProfile,
    pub wall_time: f64,
    pub seed: u64,
    /// Subsets enumerated, swaps scanned or TOPS probes, depending on the solver.
    pub work: u64,
    pub trace: Vec<TraceEvent>,
    /// Set by NetClus when even `tau_max` could not cover enough trajectories.
    pub infeasible_at_tau_max: bool,
}

impl SolverResult {
    pub fn total(&self) -> f64 {
        crate::trajectory::total_inconvenience(&self.profile)
    }

    pub fn average(&self) -> f64 {
        crate::trajectory::avg_inconvenience(&self.profile)
    }

    /// Everything except the wall-clock time, for reproducibility checks.
    pub fn fingerprint(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time = 0.0;
        format!("{copy:?}")
    }
}

/// Trajectories ordered by their distance to the nearest chosen facility.
///
/// The order is stable with the trajectory position as tie-break, so rank
/// lookups are deterministic.
#[derive(Clone, Debug)]
pub struct NearestFacilityMap {
    profile: InconvenienceProfile,
    order: Vec<usize>,
}

impl NearestFacilityMap {
    pub fn new(m: usize) -> Self {
        NearestFacilityMap {
            profile: InconvenienceProfile::unserved(m),
            order: (0..m).collect(),
        }
    }

    /// Offers every trajectory a facility at `site` with detours `column`.
    pub fn add_site(&mut self, site: NodeId, column: &[f64]) {
        for (j, &d) in column.iter().enumerate() {
            self.profile.offer(j, d, site);
        }
        let values = &self.profile.values;
        self.order
            .sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    }

    /// No facility serves anyone yet.
    pub fn is_empty(&self) -> bool {
        self.profile.serving_site.iter().all(Option::is_none)
    }

    /// Trajectory at 1-based `rank` in ascending distance order.
    pub fn at_rank(&self, rank: usize) -> usize {
        self.order[rank - 1]
    }

    pub fn distance(&self, j: usize) -> f64 {
        self.profile.values[j]
    }

    pub fn values(&self) -> &[f64] {
        &self.profile.values
    }

    pub fn profile(&self) -> &InconvenienceProfile {
        &self.profile
    }

    pub fn into_profile(self) -> InconvenienceProfile {
        self.profile
    }
}
