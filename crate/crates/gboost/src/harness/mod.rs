//! Desk-scale experiment harness: toy-task generation with a brute-force
//! oracle, straight-line baselines, benchmark and ablation sweep runners,
//! and trace export.

pub mod baselines;
pub mod benchmark;
pub mod config;
pub mod sweep;
pub mod tasks;
pub mod trace;

pub use baselines::{baseline_decode, brute_force_best, tuned_mcts, BaselineMode, BaselineOutput};
pub use benchmark::{run_benchmark, BenchmarkReport, Method, QueryRecord};
pub use config::RunConfig;
pub use sweep::{sweep, sweep_csv, SweepParam, SweepValue};
pub use tasks::{generate_tasks, oracle_prm_for, read_tasks, write_tasks, ToyTask};
pub use trace::{export_trace, import_trace};
