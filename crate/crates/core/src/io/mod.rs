//! File formats, ILP export, the synthetic generator and the experiment runner.

pub mod experiment;
pub mod formats;
pub mod ilp;
pub mod synth;

pub use experiment::{
    run_experiments, write_csv, Algorithm, ExperimentConfig, ResultRow, Solver, SolverSettings,
};
pub use formats::{parse_instance, write_instance, InstancePaths};
pub use ilp::{export_ilp, Problem};
pub use synth::{generate_synthetic, SyntheticParams};
