//! NetClus: multi-resolution clusterings of the network with precomputed
//! trajectory-to-cluster distances, answering TOPS coverage queries.
//!
//! Instance `i` clusters the nodes with radius `tau_min·(1+ε)^i`. A cluster is
//! represented by its candidate site closest to the center, and that site is
//! estimated to cover trajectory `T` when `T` passes through the cluster and
//! `min_{v ∈ T ∩ cluster} center_dist[v] + center_dist[rep] ≤ τ`. The estimate
//! bounds the true detour from above.

use std::fmt::Write as _;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::cover::randomized_cover;
use crate::error::{Result, TipsError};
use crate::network::NodeId;
use crate::trajectory::{PlacementInstance, TrajectoryGeometry};

pub const DEFAULT_EPSILON: f64 = 0.5;
pub const DEFAULT_TAU_MIN: f64 = 100.0;
pub const DEFAULT_TAU_MAX: f64 = 20_000.0;

const FORMAT_HEADER: &str = "netclus-index v1";

/// One clustering of the network at a fixed radius.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterInstance {
    pub radius: f64,
    pub assignment: Vec<u32>,
    pub centers: Vec<NodeId>,
    /// Round-trip distance of each node to its center.
    pub center_dist: Vec<f64>,
    /// Candidate site nearest to each center, if the cluster has one.
    pub representatives: Vec<Option<NodeId>>,
    /// Per trajectory: `(cluster, min center_dist over its nodes in that
    /// cluster)`, sorted by cluster.
    pub traj_clusters: Vec<Vec<(u32, f64)>>,
}

impl ClusterInstance {
    pub fn cluster_count(&self) -> usize {
        self.centers.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NetClusIndex {
    tau_min: f64,
    tau_max: f64,
    epsilon: f64,
    seed: u64,
    node_count: usize,
    /// Exact detour of each trajectory to its nearest existing facility.
    facility_detour: Vec<f64>,
    pub instances: Vec<ClusterInstance>,
}

/// Number of index instances, `⌊log_{1+ε}(tau_max/tau_min)⌋ + 1`.
pub fn instance_count(tau_min: f64, tau_max: f64, epsilon: f64) -> Result<usize> {
    if !(tau_min > 0.0 && tau_min < tau_max && tau_max.is_finite()) {
        return Err(TipsError::InvalidParameter(format!(
            "need 0 < tau_min < tau_max, got {tau_min} and {tau_max}"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(TipsError::InvalidParameter(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let steps = ((tau_max / tau_min).ln() / (1.0 + epsilon).ln() + 1e-9).floor();
    Ok(steps as usize + 1)
}

pub fn build_index(
    inst: &PlacementInstance,
    tau_min: f64,
    tau_max: f64,
    epsilon: f64,
    seed: u64,
) -> Result<NetClusIndex> {
    let t = instance_count(tau_min, tau_max, epsilon)?;
    let candidates = inst.candidates();
    let instances = (0..t)
        .into_par_iter()
        .map(|i| {
            let radius = tau_min * (1.0 + epsilon).powi(i as i32);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let cover = randomized_cover(&inst.network, radius, &mut rng)?;
            let representatives = cover.nearest_in(&candidates);
            let traj_clusters = inst
                .trajectories
                .iter()
                .map(|t| {
                    let mut entries: Vec<(u32, f64)> = t
                        .nodes
                        .iter()
                        .map(|v| (cover.assignment[v.index()], cover.center_dist[v.index()]))
                        .collect();
                    entries.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
                    entries.dedup_by_key(|e| e.0);
                    entries
                })
                .collect();
            Ok(ClusterInstance {
                radius,
                assignment: cover.assignment,
                centers: cover.centers,
                center_dist: cover.center_dist,
                representatives,
                traj_clusters,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let facility_detour = if inst.facilities.is_empty() {
        vec![f64::INFINITY; inst.trajectory_count()]
    } else {
        let geometry = TrajectoryGeometry::build(inst)?;
        let mut best = vec![f64::INFINITY; inst.trajectory_count()];
        for &f in &inst.facilities {
            for (b, d) in best.iter_mut().zip(geometry.site_detours(inst, f)?) {
                *b = b.min(d);
            }
        }
        best
    };
    Ok(NetClusIndex {
        tau_min,
        tau_max,
        epsilon,
        seed,
        node_count: inst.network.node_count(),
        facility_detour,
        instances,
    })
}

impl NetClusIndex {
    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn trajectory_count(&self) -> usize {
        self.facility_detour.len()
    }

    pub fn facility_detour(&self) -> &[f64] {
        &self.facility_detour
    }

    /// Errors unless the index was built for an instance of this shape.
    pub fn check_instance(&self, inst: &PlacementInstance) -> Result<()> {
        if self.node_count != inst.network.node_count()
            || self.trajectory_count() != inst.trajectory_count()
        {
            return Err(TipsError::IndexMismatch(format!(
                "index covers {} nodes and {} trajectories, instance has {} and {}",
                self.node_count,
                self.trajectory_count(),
                inst.network.node_count(),
                inst.trajectory_count()
            )));
        }
        Ok(())
    }

    /// The instance with the largest radius not exceeding `tau / 2`, or the
    /// finest one when none qualifies. Estimates can reach four radii, so
    /// coarser instances rarely certify any coverage.
    pub fn instance_for(&self, tau: f64) -> Result<&ClusterInstance> {
        if !(tau >= self.tau_min && tau <= self.tau_max) {
            return Err(TipsError::TauOutOfRange {
                tau,
                tau_min: self.tau_min,
                tau_max: self.tau_max,
            });
        }
        Ok(self
            .instances
            .iter()
            .rev()
            .find(|c| c.radius <= 0.5 * tau)
            .unwrap_or(&self.instances[0]))
    }
}

/// Estimated coverage at one threshold: which trajectories each cluster
/// representative covers, and which are already covered by `F`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverageTable {
    /// Representative sites, ascending.
    pub sites: Vec<NodeId>,
    /// Trajectory positions covered by each site, ascending.
    pub covers: Vec<Vec<usize>>,
    pub precovered: Vec<bool>,
}

pub fn coverage_table(index: &NetClusIndex, tau: f64) -> Result<CoverageTable> {
    let level = index.instance_for(tau)?;
    let mut reps: Vec<(NodeId, usize)> = level
        .representatives
        .iter()
        .enumerate()
        .filter_map(|(c, r)| r.map(|s| (s, c)))
        .collect();
    reps.sort_unstable();
    let mut slot_of = vec![usize::MAX; level.cluster_count()];
    for (slot, &(_, c)) in reps.iter().enumerate() {
        slot_of[c] = slot;
    }
    let mut covers = vec![Vec::new(); reps.len()];
    for (j, entries) in level.traj_clusters.iter().enumerate() {
        for &(c, through) in entries {
            let slot = slot_of[c as usize];
            if slot == usize::MAX {
                continue;
            }
            let rep = reps[slot].0;
            if through + level.center_dist[rep.index()] <= tau {
                covers[slot].push(j);
            }
        }
    }
    Ok(CoverageTable {
        sites: reps.into_iter().map(|(s, _)| s).collect(),
        covers,
        precovered: index.facility_detour.iter().map(|&d| d <= tau).collect(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TopsAnswer {
    /// Chosen sites in pick order.
    pub selected: Vec<NodeId>,
    /// Trajectories covered by `F` or the chosen sites.
    pub covered: usize,
}

/// Greedy maximum coverage over cluster representatives: `k` picks of the
/// site with the largest marginal coverage, smallest id on ties.
pub fn tops_query(index: &NetClusIndex, k: usize, tau: f64) -> Result<TopsAnswer> {
    let table = coverage_table(index, tau)?;
    let mut covered = table.precovered.clone();
    let mut count = covered.iter().filter(|&&c| c).count();
    let mut taken = vec![false; table.sites.len()];
    let mut selected = Vec::with_capacity(k);
    for _ in 0..k {
        let mut best: Option<(usize, usize)> = None;
        for (slot, list) in table.covers.iter().enumerate() {
            if taken[slot] {
                continue;
            }
            let gain = list.iter().filter(|&&j| !covered[j]).count();
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((slot, gain));
            }
        }
        let Some((slot, gain)) = best else { break };
        taken[slot] = true;
        for &j in &table.covers[slot] {
            covered[j] = true;
        }
        count += gain;
        selected.push(table.sites[slot]);
    }
    Ok(TopsAnswer {
        selected,
        covered: count,
    })
}

fn join<T: std::fmt::Display>(values: impl IntoIterator<Item = T>) -> String {
    let mut out = String::new();
    for (i, v) in values.into_iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{v}").expect("writing to a String");
    }
    out
}

impl NetClusIndex {
    /// Line-oriented text encoding; floats use shortest round-trip form.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "{FORMAT_HEADER}").unwrap();
        writeln!(w, "tau_min {}", self.tau_min).unwrap();
        writeln!(w, "tau_max {}", self.tau_max).unwrap();
        writeln!(w, "epsilon {}", self.epsilon).unwrap();
        writeln!(w, "seed {}", self.seed).unwrap();
        writeln!(w, "nodes {}", self.node_count).unwrap();
        writeln!(
            w,
            "facility_detour {} {}",
            self.facility_detour.len(),
            join(&self.facility_detour)
        )
        .unwrap();
        writeln!(w, "instances {}", self.instances.len()).unwrap();
        for level in &self.instances {
            writeln!(w, "radius {}", level.radius).unwrap();
            writeln!(w, "assignment {}", join(&level.assignment)).unwrap();
            writeln!(w, "center_dist {}", join(&level.center_dist)).unwrap();
            writeln!(
                w,
                "centers {} {}",
                level.centers.len(),
                join(&level.centers)
            )
            .unwrap();
            let reps = level
                .representatives
                .iter()
                .map(|r| r.map_or_else(|| "-".to_string(), |s| s.to_string()));
            writeln!(w, "representatives {}", join(reps)).unwrap();
            for entries in &level.traj_clusters {
                let pairs = entries.iter().map(|(c, d)| format!("{c}:{d}"));
                writeln!(w, "traj {} {}", entries.len(), join(pairs)).unwrap();
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut reader = Reader {
            lines: text.lines().enumerate(),
        };
        let (line, header) = reader.next_raw()?;
        if header.trim() != FORMAT_HEADER {
            return Err(reader.error(line, format!("expected header `{FORMAT_HEADER}`")));
        }
        let tau_min = reader.scalar("tau_min")?;
        let tau_max = reader.scalar("tau_max")?;
        let epsilon = reader.scalar("epsilon")?;
        let seed = reader.scalar("seed")?;
        let node_count: usize = reader.scalar("nodes")?;
        let facility_detour: Vec<f64> = reader.counted("facility_detour")?;
        let m = facility_detour.len();
        let t: usize = reader.scalar("instances")?;
        let mut instances = Vec::with_capacity(t);
        for _ in 0..t {
            let radius = reader.scalar("radius")?;
            let (line, assignment): (usize, Vec<u32>) = reader.list("assignment")?;
            let (_, center_dist): (usize, Vec<f64>) = reader.list("center_dist")?;
            let centers: Vec<NodeId> = reader
                .counted::<u32>("centers")?
                .into_iter()
                .map(NodeId)
                .collect();
            let (rline, reps): (usize, Vec<String>) = reader.list("representatives")?;
            if assignment.len() != node_count || center_dist.len() != node_count {
                return Err(
                    reader.error(line, "per-node table length differs from node count".into())
                );
            }
            if assignment.iter().any(|&c| c as usize >= centers.len())
                || reps.len() != centers.len()
            {
                return Err(reader.error(line, "cluster table is inconsistent".into()));
            }
            let representatives = reps
                .iter()
                .map(|r| match r.as_str() {
                    "-" => Ok(None),
                    s => s
                        .parse::<u32>()
                        .map(|v| Some(NodeId(v)))
                        .map_err(|_| reader.error(rline, format!("bad representative `{s}`"))),
                })
                .collect::<Result<Vec<_>>>()?;
            let mut traj_clusters = Vec::with_capacity(m);
            for _ in 0..m {
                let (line, fields): (usize, Vec<String>) = reader.list("traj")?;
                let count: usize = fields
                    .first()
                    .and_then(|c| c.parse().ok())
                    .ok_or_else(|| reader.error(line, "missing entry count".into()))?;
                if fields.len() != count + 1 {
                    return Err(reader.error(line, format!("expected {count} entries")));
                }
                let entries = fields[1..]
                    .iter()
                    .map(|f| {
                        let parsed = f
                            .split_once(':')
                            .and_then(|(c, d)| Some((c.parse().ok()?, d.parse().ok()?)));
                        parsed.ok_or_else(|| reader.error(line, format!("bad entry `{f}`")))
                    })
                    .collect::<Result<Vec<(u32, f64)>>>()?;
                traj_clusters.push(entries);
            }
            instances.push(ClusterInstance {
                radius,
                assignment,
                centers,
                center_dist,
                representatives,
                traj_clusters,
            });
        }
        Ok(NetClusIndex {
            tau_min,
            tau_max,
            epsilon,
            seed,
            node_count,
            facility_detour,
            instances,
        })
    }
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Reader<'a> {
    fn error(&self, line: usize, message: String) -> TipsError {
        TipsError::Parse {
            path: "<index>".into(),
            line: line + 1,
            message,
        }
    }

    fn next_raw(&mut self) -> Result<(usize, &'a str)> {
        self.lines.next().ok_or_else(|| TipsError::Parse {
            path: "<index>".into(),
            line: 0,
            message: "unexpected end of index".into(),
        })
    }

    /// Next line, which must start with `key`; returns the remaining fields.
    fn fields(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (line, text) = self.next_raw()?;
        let mut parts = text.split_whitespace();
        if parts.next() != Some(key) {
            return Err(self.error(line, format!("expected `{key}`")));
        }
        Ok((line, parts.collect()))
    }

    fn parse<T: FromStr>(&self, line: usize, field: &str) -> Result<T> {
        field
            .parse()
            .map_err(|_| self.error(line, format!("cannot parse `{field}`")))
    }

    fn scalar<T: FromStr>(&mut self, key: &str) -> Result<T> {
        let (line, fields) = self.fields(key)?;
        match fields.as_slice() {
            [one] => self.parse(line, one),
            _ => Err(self.error(line, format!("`{key}` takes one value"))),
        }
    }

    fn list<T: FromStr>(&mut self, key: &str) -> Result<(usize, Vec<T>)> {
        let (line, fields) = self.fields(key)?;
        let values = fields
            .iter()
            .map(|f| self.parse(line, f))
            .collect::<Result<_>>()?;
        Ok((line, values))
    }

    /// A list preceded by its length.
    fn counted<T: FromStr>(&mut self, key: &str) -> Result<Vec<T>> {
        let (line, fields) = self.fields(key)?;
        let (count, rest) = fields
            .split_first()
            .ok_or_else(|| self.error(line, "missing count".into()))?;
        let count: usize = self.parse(line, count)?;
        if rest.len() != count {
            return Err(self.error(
                line,
                format!("expected {count} values, found {}", rest.len()),
            ));
        }
        rest.iter().map(|f| self.parse(line, f)).collect()
    }
}
