//! AVG-TIPS solvers over a precomputed trajectory × site detour matrix:
//! exhaustive enumeration, the HCC swap search and the GREAT greedy.

use std::cmp::Ordering;
use std::time::Instant;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::enumerate::{best_subset, Score};
use crate::error::{Result, TipsError};
use crate::network::NodeId;
use crate::solution::{NearestFacilityMap, SolverResult, TraceEvent};
use crate::trajectory::{detour_from_parts, scan_nodes, InconvenienceProfile, PlacementInstance};

/// Default ceiling on matrix entries (`m × columns`).
pub const DEFAULT_MATRIX_BUDGET: usize = 50_000_000;

/// Detour of every trajectory (rows) to every site in `S ∪ F` (columns).
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    columns: Vec<NodeId>,
    rows: usize,
    values: Vec<f64>,
}

impl DistanceMatrix {
    pub fn build(inst: &PlacementInstance) -> Result<Self> {
        Self::build_with_budget(inst, DEFAULT_MATRIX_BUDGET)
    }

    pub fn build_with_budget(inst: &PlacementInstance, budget: usize) -> Result<Self> {
        Self::for_columns(inst, inst.all_columns(), budget)
    }

    /// Matrix over an arbitrary sorted column set. Runs one forward and one
    /// reverse search per distinct trajectory node.
    pub fn for_columns(
        inst: &PlacementInstance,
        mut columns: Vec<NodeId>,
        budget: usize,
    ) -> Result<Self> {
        columns.sort_unstable();
        columns.dedup();
        let rows = inst.trajectory_count();
        let entries = rows.saturating_mul(columns.len());
        if entries > budget {
            return Err(TipsError::MatrixTooLarge { entries, budget });
        }
        let scan = scan_nodes(inst, &columns)?;
        let n = columns.len();
        let row_values: Vec<Vec<f64>> = inst
            .trajectories
            .par_iter()
            .enumerate()
            .map(|(j, t)| {
                let slots: Vec<usize> = t.nodes.iter().map(|v| scan.slot[v]).collect();
                let intra = scan.geometry.intra(j);
                let mut to = vec![0.0; slots.len()];
                let mut from = vec![0.0; slots.len()];
                (0..n)
                    .map(|c| {
                        for (i, &s) in slots.iter().enumerate() {
                            to[i] = scan.to_columns[s][c];
                            from[i] = scan.from_columns[s][c];
                        }
                        detour_from_parts(&to, &from, intra)
                    })
                    .collect()
            })
            .collect();
        Ok(DistanceMatrix {
            columns,
            rows,
            values: row_values.concat(),
        })
    }

    pub fn columns(&self) -> &[NodeId] {
        &self.columns
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column_index(&self, site: NodeId) -> Option<usize> {
        self.columns.binary_search(&site).ok()
    }

    #[inline]
    pub fn get(&self, row: usize, column: usize) -> f64 {
        self.values[row * self.columns.len() + column]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.columns.len();
        &self.values[row * n..(row + 1) * n]
    }

    /// Detours of all trajectories to `site`.
    pub fn column(&self, site: NodeId) -> Result<Vec<f64>> {
        let c = self.require(site)?;
        Ok((0..self.rows).map(|j| self.get(j, c)).collect())
    }

    fn require(&self, site: NodeId) -> Result<usize> {
        self.column_index(site).ok_or_else(|| {
            TipsError::InvalidParameter(format!("site {site} has no column in the distance matrix"))
        })
    }

    /// Checks that every site and facility of `inst` has a column.
    pub fn check_covers(&self, inst: &PlacementInstance) -> Result<()> {
        if self.rows != inst.trajectory_count() {
            return Err(TipsError::InvalidParameter(format!(
                "matrix has {} rows for {} trajectories",
                self.rows,
                inst.trajectory_count()
            )));
        }
        for &s in inst.sites.iter().chain(&inst.facilities) {
            self.require(s)?;
        }
        Ok(())
    }

    /// Inconvenience profile against `open` (which should already include `F`).
    pub fn profile(&self, open: &[NodeId]) -> Result<InconvenienceProfile> {
        if open.is_empty() {
            return Err(TipsError::EmptyFacilitySet);
        }
        let mut sorted = open.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let cols = sorted
            .iter()
            .map(|&s| self.require(s))
            .collect::<Result<Vec<_>>>()?;
        let mut profile = InconvenienceProfile::unserved(self.rows);
        for j in 0..self.rows {
            for (&c, &s) in cols.iter().zip(&sorted) {
                profile.offer(j, self.get(j, c), s);
            }
        }
        Ok(profile)
    }

    /// Elementwise minimum over the facility columns (`∞` when `F = ∅`).
    pub(crate) fn facility_base(&self, inst: &PlacementInstance) -> Result<Vec<f64>> {
        let mut base = vec![f64::INFINITY; self.rows];
        for &f in &inst.facilities {
            let c = self.require(f)?;
            for (j, b) in base.iter_mut().enumerate() {
                *b = b.min(self.get(j, c));
            }
        }
        Ok(base)
    }
}

/// `Q ∪ F`, sorted.
pub(crate) fn open_set(inst: &PlacementInstance, selected: &[NodeId]) -> Vec<NodeId> {
    let mut open: Vec<NodeId> = selected.iter().chain(&inst.facilities).copied().collect();
    open.sort_unstable();
    open.dedup();
    open
}

pub(crate) fn candidate_columns(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
) -> Result<(Vec<NodeId>, Vec<usize>)> {
    matrix.check_covers(inst)?;
    let candidates = inst.candidates();
    let cols = candidates
        .iter()
        .map(|&s| matrix.require(s))
        .collect::<Result<Vec<_>>>()?;
    Ok((candidates, cols))
}

/// Optimal AVG-TIPS selection by exhaustive enumeration of `k`-subsets of
/// `S \ F`; the lexicographically smallest optimum wins ties.
pub fn exact_avgtips(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
    k: usize,
    budget: u128,
) -> Result<SolverResult> {
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
    let best = best_subset(&base, &columns, k, Score::Total, budget)?;
    let selected: Vec<NodeId> = best.members.iter().map(|&i| candidates[i]).collect();
    let profile = matrix.profile(&open_set(inst, &selected))?;
    Ok(SolverResult {
        algorithm: "exact".into(),
        objective: crate::trajectory::total_inconvenience(&profile),
        selected,
        profile,
        wall_time: started.elapsed().as_secs_f64(),
        seed: 0,
        work: best.visited,
        trace: Vec::new(),
        infeasible_at_tau_max: false,
    })
}

/// Greedy marginal-gain selection: starting from `F`, add the site that
/// minimizes the resulting TI, `k` times.
pub fn great(inst: &PlacementInstance, matrix: &DistanceMatrix, k: usize) -> Result<SolverResult> {
    let started = Instant::now();
    let (candidates, cols) = candidate_columns(inst, matrix)?;
    if k > candidates.len() {
        return Err(TipsError::TooFewSites {
            k,
            available: candidates.len(),
        });
    }
    if k == 0 && inst.facilities.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let m = matrix.rows();
    let mut nf = NearestFacilityMap::new(m);
    for &f in &inst.facilities {
        nf.add_site(f, &matrix.column(f)?);
    }
    let mut taken = vec![false; candidates.len()];
    let mut selected = Vec::with_capacity(k);
    let mut trace = Vec::with_capacity(k);
    for _ in 0..k {
        let current = nf.values();
        let (pick, total) = (0..candidates.len())
            .into_par_iter()
            .filter(|&i| !taken[i])
            .map(|i| {
                let c = cols[i];
                let total: f64 = current
                    .iter()
                    .enumerate()
                    .map(|(j, &cur)| {
                        let d = matrix.get(j, c);
                        if d < cur {
                            d
                        } else {
                            cur
                        }
                    })
                    .sum();
                (i, total)
            })
            .reduce_with(|a, b| match a.1.total_cmp(&b.1) {
                Ordering::Less => a,
                Ordering::Greater => b,
                Ordering::Equal => {
                    if a.0 <= b.0 {
                        a
                    } else {
                        b
                    }
                }
            })
            .expect("k <= |S \\ F| leaves a free candidate");
        taken[pick] = true;
        let site = candidates[pick];
        nf.add_site(site, &matrix.column(site)?);
        selected.push(site);
        trace.push(TraceEvent::GreatPick { site, total });
    }
    selected.sort_unstable();
    let profile = nf.into_profile();
    Ok(SolverResult {
        algorithm: "great".into(),
        objective: crate::trajectory::total_inconvenience(&profile),
        selected,
        profile,
        wall_time: started.elapsed().as_secs_f64(),
        seed: 0,
        work: k as u64,
        trace,
        infeasible_at_tau_max: false,
    })
}

/// HCC tuning: `t` trials, at most `η` iterations each, and the swap fraction.
#[derive(Copy, Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HccParams {
    pub trials: usize,
    pub max_iterations: usize,
    pub swap_fraction: f64,
    pub seed: u64,
}

impl Default for HccParams {
    fn default() -> Self {
        HccParams {
            trials: 3,
            max_iterations: 50,
            swap_fraction: 0.05,
            seed: 0,
        }
    }
}

impl HccParams {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(TipsError::InvalidParameter(
                "HCC needs at least one trial".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(TipsError::InvalidParameter(
                "HCC needs at least one iteration".into(),
            ));
        }
        if !(self.swap_fraction > 0.0 && self.swap_fraction <= 1.0) {
            return Err(TipsError::InvalidParameter(format!(
                "swap fraction must lie in (0, 1], got {}",
                self.swap_fraction
            )));
        }
        Ok(())
    }

    /// Swaps scanned per iteration out of `total` possible.
    pub fn scan_count(&self, total: usize) -> usize {
        ((self.swap_fraction * total as f64 - 1e-9).ceil() as usize).clamp(1, total.max(1))
    }
}

/// Swap search state over the candidate columns; `F` acts as a fixed medoid.
struct SwapSearch<'a> {
    matrix: &'a DistanceMatrix,
    cols: &'a [usize],
    base: &'a [f64],
    /// Candidate positions currently selected.
    medoids: Vec<usize>,
    best: Vec<f64>,
    owner: Vec<Option<usize>>,
    second: Vec<f64>,
}

impl<'a> SwapSearch<'a> {
    fn new(
        matrix: &'a DistanceMatrix,
        cols: &'a [usize],
        base: &'a [f64],
        mut medoids: Vec<usize>,
    ) -> Self {
        medoids.sort_unstable();
        let m = base.len();
        let mut s = SwapSearch {
            matrix,
            cols,
            base,
            medoids,
            best: vec![0.0; m],
            owner: vec![None; m],
            second: vec![0.0; m],
        };
        s.refresh();
        s
    }

    fn refresh(&mut self) {
        for j in 0..self.base.len() {
            let mut best = self.base[j];
            let mut owner = None;
            let mut second = f64::INFINITY;
            for (slot, &p) in self.medoids.iter().enumerate() {
                let d = self.matrix.get(j, self.cols[p]);
                if d < best {
                    second = best;
                    best = d;
                    owner = Some(slot);
                } else if d < second {
                    second = d;
                }
            }
            self.best[j] = best;
            self.owner[j] = owner;
            self.second[j] = second;
        }
    }

    fn total(&self) -> f64 {
        self.best.iter().sum()
    }

    /// TI after replacing medoid `slot` with candidate position `incoming`.
    fn swap_total(&self, slot: usize, incoming: usize) -> f64 {
        let c = self.cols[incoming];
        (0..self.best.len())
            .map(|j| {
                let keep = if self.owner[j] == Some(slot) {
                    self.second[j]
                } else {
                    self.best[j]
                };
                let d = self.matrix.get(j, c);
                if d < keep {
                    d
                } else {
                    keep
                }
            })
            .sum()
    }

    fn non_medoids(&self) -> Vec<usize> {
        (0..self.cols.len())
            .filter(|p| self.medoids.binary_search(p).is_err())
            .collect()
    }
}

struct TrialOutcome {
    total: f64,
    medoids: Vec<usize>,
    trace: Vec<TraceEvent>,
    scanned: u64,
}

fn run_trial(
    search: &mut SwapSearch<'_>,
    candidates: &[NodeId],
    params: &HccParams,
    trial: usize,
    rng: &mut ChaCha8Rng,
) -> TrialOutcome {
    let mut total = search.total();
    let mut trace = vec![TraceEvent::HccStart {
        trial,
        medoids: search.medoids.iter().map(|&p| candidates[p]).collect(),
        total,
    }];
    let mut scanned = 0u64;
    let k = search.medoids.len();
    for _ in 0..params.max_iterations {
        let outside = search.non_medoids();
        let pairs = k * outside.len();
        if pairs == 0 {
            break;
        }
        let amount = params.scan_count(pairs);
        scanned += amount as u64;
        // (TI, removed site, added site, slot, position)
        let mut chosen: Option<(f64, NodeId, NodeId, usize, usize)> = None;
        for pair in index::sample(rng, pairs, amount).iter() {
            let slot = pair / outside.len();
            let incoming = outside[pair % outside.len()];
            let t = search.swap_total(slot, incoming);
            let removed = candidates[search.medoids[slot]];
            let added = candidates[incoming];
            let replace = match &chosen {
                None => true,
                Some((bt, br, ba, _, _)) => (t, removed, added)
                    .partial_cmp(&(*bt, *br, *ba))
                    .is_some_and(|o| o == Ordering::Less),
            };
            if replace {
                chosen = Some((t, removed, added, slot, incoming));
            }
        }
        match chosen {
            Some((t, removed, added, slot, incoming)) if t < total => {
                search.medoids[slot] = incoming;
                search.medoids.sort_unstable();
                search.refresh();
                total = search.total();
                trace.push(TraceEvent::HccSwap {
                    trial,
                    removed,
                    added,
                    total,
                });
            }
            _ => break,
        }
    }
    TrialOutcome {
        total,
        medoids: search.medoids.clone(),
        trace,
        scanned,
    }
}

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

/// HCC: `t` randomized trials of sampled-swap local search; best TI wins.
pub fn hcc(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
    k: usize,
    params: &HccParams,
) -> Result<SolverResult> {
    params.validate()?;
    let started = Instant::now();
    let (candidates, cols) = candidate_columns(inst, matrix)?;
    if k > candidates.len() {
        return Err(TipsError::TooFewSites {
            k,
            available: candidates.len(),
        });
    }
    if k == 0 && inst.facilities.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let base = matrix.facility_base(inst)?;
    let outcomes: Vec<TrialOutcome> = (0..params.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(params.seed, trial);
            let initial = index::sample(&mut rng, candidates.len(), k).into_vec();
            let mut search = SwapSearch::new(matrix, &cols, &base, initial);
            run_trial(&mut search, &candidates, params, trial, &mut rng)
        })
        .collect();
    finish_hcc(inst, matrix, &candidates, outcomes, params.seed, started)
}

/// A single HCC trial from the given initial medoids (all in `S \ F`).
pub fn hcc_from(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
    initial: &[NodeId],
    params: &HccParams,
) -> Result<SolverResult> {
    params.validate()?;
    let started = Instant::now();
    let (candidates, cols) = candidate_columns(inst, matrix)?;
    let mut positions = Vec::with_capacity(initial.len());
    for s in initial {
        let p = candidates.binary_search(s).map_err(|_| {
            TipsError::InvalidParameter(format!("initial medoid {s} is not a candidate site"))
        })?;
        positions.push(p);
    }
    positions.sort_unstable();
    positions.dedup();
    if positions.is_empty() && inst.facilities.is_empty() {
        return Err(TipsError::EmptyFacilitySet);
    }
    let base = matrix.facility_base(inst)?;
    let mut rng = trial_rng(params.seed, 0);
    let mut search = SwapSearch::new(matrix, &cols, &base, positions);
    let outcome = run_trial(&mut search, &candidates, params, 0, &mut rng);
    finish_hcc(
        inst,
        matrix,
        &candidates,
        vec![outcome],
        params.seed,
        started,
    )
}

fn finish_hcc(
    inst: &PlacementInstance,
    matrix: &DistanceMatrix,
    candidates: &[NodeId],
    outcomes: Vec<TrialOutcome>,
    seed: u64,
    started: Instant,
) -> Result<SolverResult> {
    let work = outcomes.iter().map(|o| o.scanned).sum();
    let trace = outcomes
        .iter()
        .flat_map(|o| o.trace.iter().cloned())
        .collect();
    let best = outcomes
        .into_iter()
        .reduce(|a, b| if b.total < a.total { b } else { a })
        .expect("at least one trial");
    let selected: Vec<NodeId> = best.medoids.iter().map(|&p| candidates[p]).collect();
    let profile = matrix.profile(&open_set(inst, &selected))?;
    Ok(SolverResult {
        algorithm: "hcc".into(),
        objective: crate::trajectory::total_inconvenience(&profile),
        selected,
        profile,
        wall_time: started.elapsed().as_secs_f64(),
        seed,
        work,
        trace,
        infeasible_at_tau_max: false,
    })
}
