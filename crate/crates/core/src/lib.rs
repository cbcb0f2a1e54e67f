//! Trajectory-aware placement of service facilities on road networks.
//!
//! Given a directed road network, user trajectories, candidate sites `S` and
//! existing facilities `F`, choose `k` new sites so that the detour users make
//! to reach their nearest facility is small: either the worst detour over a
//! `γ` fraction of users (MAX-TIPS) or the total detour (AVG-TIPS).

pub mod avgtips;
pub mod cover;
pub mod enumerate;
pub mod error;
pub mod io;
pub mod maxtips;
pub mod netclus;
pub mod network;
pub mod sampling;
pub mod solution;
pub mod trajectory;

pub use avgtips::{exact_avgtips, great, hcc, hcc_from, DistanceMatrix, HccParams};
pub use error::{Result, TipsError};
pub use maxtips::{exact_maxtips, mif, netclus_maxtips};
pub use netclus::{build_index, tops_query, NetClusIndex};
pub use network::{load_network, DistanceVector, NodeId, RoadNetwork};
pub use sampling::{sample_sites, sample_trajectories, SiteSample, TrajectorySample};
pub use solution::{NearestFacilityMap, SolverResult, TraceEvent};
pub use trajectory::{
    avg_inconvenience, detour_distance, inconvenience_profile, max_inconvenience, serve_count,
    total_inconvenience, trajectory_pair_distance, PlacementInstance, Trajectory,
    TrajectoryGeometry,
};
