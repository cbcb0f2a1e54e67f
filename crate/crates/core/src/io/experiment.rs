//! Solver dispatch and the experiment grid runner writing CSV results.

use std::cell::OnceCell;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::avgtips::{exact_avgtips, great, hcc, DistanceMatrix, HccParams, DEFAULT_MATRIX_BUDGET};
use crate::enumerate::DEFAULT_ENUMERATION_BUDGET;
use crate::error::{Result, TipsError};
use crate::io::formats::{parse_instance, InstancePaths};
use crate::io::ilp::Problem;
use crate::io::synth::{generate_synthetic, SyntheticParams};
use crate::maxtips::{default_precision, exact_maxtips, mif, netclus_maxtips, DEFAULT_RESTARTS};
use crate::netclus::{
    build_index, NetClusIndex, DEFAULT_EPSILON, DEFAULT_TAU_MAX, DEFAULT_TAU_MIN,
};
use crate::sampling::{reduce_instance, sample_sites, sample_trajectories};
use crate::solution::SolverResult;
use crate::trajectory::{
    inconvenience_profile, max_inconvenience, total_inconvenience, PlacementInstance,
    TrajectoryGeometry,
};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Exact,
    Mif,
    Netclus,
    Great,
    Hcc,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Exact => "exact",
            Algorithm::Mif => "mif",
            Algorithm::Netclus => "netclus",
            Algorithm::Great => "great",
            Algorithm::Hcc => "hcc",
        }
    }

    pub fn solves(self, problem: Problem) -> bool {
        match self {
            Algorithm::Exact => true,
            Algorithm::Mif | Algorithm::Netclus => problem == Problem::MaxTips,
            Algorithm::Great | Algorithm::Hcc => problem == Problem::AvgTips,
        }
    }
}

impl FromStr for Algorithm {
    type Err = TipsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Algorithm::Exact),
            "mif" => Ok(Algorithm::Mif),
            "netclus" => Ok(Algorithm::Netclus),
            "great" => Ok(Algorithm::Great),
            "hcc" => Ok(Algorithm::Hcc),
            other => Err(TipsError::InvalidParameter(format!(
                "unknown algorithm `{other}`"
            ))),
        }
    }
}

/// Tuning knobs shared by every solver.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    pub enumeration_budget: u64,
    pub matrix_budget: usize,
    pub mif_restarts: usize,
    pub trials: usize,
    pub swap_fraction: f64,
    pub max_iterations: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub epsilon: f64,
    /// Binary-search precision; the default depends on `tau_min`.
    pub precision: Option<f64>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let hcc = HccParams::default();
        SolverSettings {
            enumeration_budget: DEFAULT_ENUMERATION_BUDGET as u64,
            matrix_budget: DEFAULT_MATRIX_BUDGET,
            mif_restarts: DEFAULT_RESTARTS,
            trials: hcc.trials,
            swap_fraction: hcc.swap_fraction,
            max_iterations: hcc.max_iterations,
            tau_min: DEFAULT_TAU_MIN,
            tau_max: DEFAULT_TAU_MAX,
            epsilon: DEFAULT_EPSILON,
            precision: None,
        }
    }
}

impl SolverSettings {
    pub fn hcc_params(&self, seed: u64) -> HccParams {
        HccParams {
            trials: self.trials,
            max_iterations: self.max_iterations,
            swap_fraction: self.swap_fraction,
            seed,
        }
    }

    pub fn precision(&self) -> f64 {
        self.precision
            .unwrap_or_else(|| default_precision(self.tau_min))
    }
}

/// Runs solvers on one instance, building the distance matrix, trajectory
/// geometry and NetClus index on first use.
pub struct Solver<'a> {
    inst: &'a PlacementInstance,
    settings: &'a SolverSettings,
    seed: u64,
    matrix: OnceCell<DistanceMatrix>,
    geometry: OnceCell<TrajectoryGeometry>,
    index: OnceCell<NetClusIndex>,
}

impl<'a> Solver<'a> {
    pub fn new(inst: &'a PlacementInstance, settings: &'a SolverSettings, seed: u64) -> Self {
        Solver {
            inst,
            settings,
            seed,
            matrix: OnceCell::new(),
            geometry: OnceCell::new(),
            index: OnceCell::new(),
        }
    }

    /// Uses a prebuilt index instead of building one.
    pub fn with_index(self, index: NetClusIndex) -> Self {
        let _ = self.index.set(index);
        self
    }

    fn matrix(&self) -> Result<&DistanceMatrix> {
        if let Some(m) = self.matrix.get() {
            return Ok(m);
        }
        let m = DistanceMatrix::build_with_budget(self.inst, self.settings.matrix_budget)?;
        Ok(self.matrix.get_or_init(|| m))
    }

    fn geometry(&self) -> Result<&TrajectoryGeometry> {
        if let Some(g) = self.geometry.get() {
            return Ok(g);
        }
        let g = TrajectoryGeometry::build(self.inst)?;
        Ok(self.geometry.get_or_init(|| g))
    }

    fn index(&self) -> Result<&NetClusIndex> {
        if let Some(i) = self.index.get() {
            return Ok(i);
        }
        let s = self.settings;
        let i = build_index(self.inst, s.tau_min, s.tau_max, s.epsilon, self.seed)?;
        Ok(self.index.get_or_init(|| i))
    }

    pub fn solve(
        &self,
        problem: Problem,
        algorithm: Algorithm,
        k: usize,
        gamma: f64,
    ) -> Result<SolverResult> {
        if !algorithm.solves(problem) {
            let problem = match problem {
                Problem::MaxTips => "max-tips",
                Problem::AvgTips => "avg-tips",
            };
            return Err(TipsError::InvalidParameter(format!(
                "algorithm {} does not solve {problem}",
                algorithm.name()
            )));
        }
        let budget = self.settings.enumeration_budget as u128;
        match (problem, algorithm) {
            (Problem::MaxTips, Algorithm::Exact) => {
                exact_maxtips(self.inst, self.matrix()?, k, gamma, budget)
            }
            (Problem::AvgTips, Algorithm::Exact) => {
                exact_avgtips(self.inst, self.matrix()?, k, budget)
            }
            (_, Algorithm::Mif) => mif(
                self.inst,
                self.geometry()?,
                k,
                gamma,
                self.seed,
                self.settings.mif_restarts,
            ),
            (_, Algorithm::Netclus) => netclus_maxtips(
                self.index()?,
                self.inst,
                k,
                gamma,
                self.settings.precision(),
            ),
            (_, Algorithm::Great) => great(self.inst, self.matrix()?, k),
            (_, Algorithm::Hcc) => hcc(
                self.inst,
                self.matrix()?,
                k,
                &self.settings.hcc_params(self.seed),
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFiles {
    pub edges: PathBuf,
    pub trajectories: PathBuf,
    pub sites: Option<PathBuf>,
    pub facilities: Option<PathBuf>,
}

/// Synthetic instance shape; each experiment seed generates its own instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticShape {
    pub width: usize,
    pub height: usize,
    pub edge_len: f64,
    pub traj_count: usize,
    pub traj_len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingConfig {
    /// Site-sampling radius in meters.
    pub radius: f64,
    /// Trajectories kept.
    pub trajectories: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    #[serde(default)]
    pub algorithms: Vec<Algorithm>,
    pub k: Vec<usize>,
    /// User fractions; MAX-TIPS only.
    #[serde(default)]
    pub gamma: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    pub output: Option<PathBuf>,
    pub instance: Option<InstanceFiles>,
    pub synthetic: Option<SyntheticShape>,
    /// Solve on a sampled instance and score on the full one.
    pub sampling: Option<SamplingConfig>,
    #[serde(default)]
    pub settings: SolverSettings,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| TipsError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(files) = cfg.instance.as_mut() {
            resolve(&mut files.edges);
            resolve(&mut files.trajectories);
            for p in [files.sites.as_mut(), files.facilities.as_mut()]
                .into_iter()
                .flatten()
            {
                resolve(p);
            }
        }
        if let Some(out) = cfg.output.as_mut() {
            resolve(out);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TipsError::Config(m.into()));
        if self.k.is_empty() {
            return bad("k list is empty");
        }
        if self.seeds.is_empty() {
            return bad("seed list is empty");
        }
        match self.problem {
            Problem::MaxTips if self.gamma.is_empty() => return bad("max-tips needs a gamma list"),
            Problem::AvgTips if !self.gamma.is_empty() => {
                return bad("gamma applies to max-tips only")
            }
            _ => {}
        }
        if let Some(g) = self.gamma.iter().find(|&&g| !(g > 0.0 && g <= 1.0)) {
            return Err(TipsError::Config(format!("gamma {g} outside (0, 1]")));
        }
        if let Some(a) = self.algorithms.iter().find(|a| !a.solves(self.problem)) {
            return Err(TipsError::Config(format!(
                "algorithm {} does not solve this problem",
                a.name()
            )));
        }
        match (&self.instance, &self.synthetic) {
            (Some(_), None) | (None, Some(_)) => Ok(()),
            _ => bad("give exactly one of [instance] and [synthetic]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultRow {
    pub algorithm: Algorithm,
    pub k: usize,
    pub gamma: Option<f64>,
    pub seed: u64,
    /// MI or TI in meters, or the solver's error message.
    pub objective: std::result::Result<f64, String>,
    pub wall_time: f64,
    /// Subsets enumerated, swaps scanned, picks or probes.
    pub work: u64,
}

pub const CSV_HEADER: [&str; 7] = [
    "algorithm",
    "k",
    "gamma",
    "seed",
    "objective_m",
    "wall_time_s",
    "work",
];

fn load_instance(cfg: &ExperimentConfig, seed: u64) -> Result<PlacementInstance> {
    match (&cfg.instance, &cfg.synthetic) {
        (Some(files), _) => parse_instance(&InstancePaths {
            edges: files.edges.clone(),
            trajectories: files.trajectories.clone(),
            sites: files.sites.clone(),
            facilities: files.facilities.clone(),
        }),
        (None, Some(s)) => generate_synthetic(&SyntheticParams {
            width: s.width,
            height: s.height,
            edge_len: s.edge_len,
            traj_count: s.traj_count,
            traj_len: s.traj_len,
            seed,
        }),
        (None, None) => Err(TipsError::Config("no instance source".into())),
    }
}

/// Objective of `selected` on the full instance.
fn rescore(
    full: &PlacementInstance,
    problem: Problem,
    selected: &[crate::network::NodeId],
    gamma: f64,
) -> Result<f64> {
    let profile = inconvenience_profile(full, selected)?;
    Ok(match problem {
        Problem::MaxTips => max_inconvenience(&profile, gamma),
        Problem::AvgTips => total_inconvenience(&profile),
    })
}

/// Runs the full grid: seeds × algorithms × k × gamma. Solver failures are
/// recorded in their row; instance loading failures abort the run.
pub fn run_experiments(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let gammas: Vec<Option<f64>> = match cfg.problem {
        Problem::MaxTips => cfg.gamma.iter().copied().map(Some).collect(),
        Problem::AvgTips => vec![None],
    };
    let mut rows = Vec::new();
    if cfg.algorithms.is_empty() {
        return Ok(rows);
    }
    let mut shared: Option<PlacementInstance> = None;
    for &seed in &cfg.seeds {
        let full = match (&shared, cfg.synthetic.is_some()) {
            (Some(inst), false) => inst.clone(),
            _ => {
                let inst = load_instance(cfg, seed)?;
                if cfg.synthetic.is_none() {
                    shared = Some(inst.clone());
                }
                inst
            }
        };
        let reduced = match &cfg.sampling {
            Some(spec) => {
                let sites = sample_sites(&full, spec.radius, seed)?;
                let trajs = sample_trajectories(&full, &sites, spec.trajectories)?;
                Some(reduce_instance(&full, &sites, &trajs)?)
            }
            None => None,
        };
        let target = reduced.as_ref().unwrap_or(&full);
        let solver = Solver::new(target, &cfg.settings, seed);
        for &algorithm in &cfg.algorithms {
            for &k in &cfg.k {
                for &gamma in &gammas {
                    let started = Instant::now();
                    let outcome = solver
                        .solve(cfg.problem, algorithm, k, gamma.unwrap_or(1.0))
                        .and_then(|r| {
                            let objective = match &reduced {
                                Some(_) => {
                                    rescore(&full, cfg.problem, &r.selected, gamma.unwrap_or(1.0))?
                                }
                                None => r.objective,
                            };
                            Ok((objective, r.work))
                        });
                    let wall_time = started.elapsed().as_secs_f64();
                    let (objective, work) = match outcome {
                        Ok((o, w)) => (Ok(o), w),
                        Err(e) => (Err(e.to_string()), 0),
                    };
                    rows.push(ResultRow {
                        algorithm,
                        k,
                        gamma,
                        seed,
                        objective,
                        wall_time,
                        work,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let objective = match &r.objective {
            Ok(v) => v.to_string(),
            Err(e) => format!("error: {e}"),
        };
        w.write_record([
            r.algorithm.name().to_string(),
            r.k.to_string(),
            r.gamma.map(|g| g.to_string()).unwrap_or_default(),
            r.seed.to_string(),
            objective,
            format!("{:.6}", r.wall_time),
            r.work.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
