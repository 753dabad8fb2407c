//! Amplitude amplification driven by a subdivided phase oracle.
//!
//! The oracle multiplies every basis state `|x⟩` by `e^{i·k·f(x)}`, embedding
//! the objective value `f(x)` in the phase; the usual inversion about the mean
//! then amplifies the states whose phase opposes the mean amplitude. This
//! crate simulates that process exactly and analyzes its query cost:
//!
//! - [`objective`] builds canonical objective tables (sampled distributions,
//!   injective families, constraint absorption, files).
//! - [`state`] evolves dense or value-compressed amplitude vectors.
//! - [`schedule`] runs fixed, scanned, greedy and alternating `k` schedules.
//! - [`analysis`] computes expected queries and success probabilities.
//! - [`export`] writes traces, snapshots and run descriptors.

pub mod analysis;
pub mod error;
pub mod export;
pub mod objective;
pub mod reduction;
pub mod schedule;
pub mod state;

pub use analysis::{
    advantage_report, expected_queries, success_probability, trials_for, AdvantageReport, QueryAnalysis, QueryPoint,
    SuccessModel,
};
pub use error::{Error, Result};
pub use objective::{
    absorb_constraint, load_table, make_injective, sample_distribution, shift_nonnegative, DistributionKind,
    DistributionSpec, InjectiveKind, InjectiveSpec, ObjectiveTable, TableSource,
};
pub use schedule::{
    alternating_k, greedy_dynamic_k, refine_scan, run_fixed_k, run_schedule, scan_k, size_scaling_study,
    AlternatingTrace, IterationRecord, KPoint, KScan, OracleSchedule, RunTrace, ScanStage, Simulator, SizeCurve,
    StageKind,
};
pub use state::{
    apply_diffusion, apply_phase_oracle, is_amplifying, mean_amplitude, MeanVector, OracleParameter, QuantumState,
    Representation,
};

pub use num_complex::Complex64;
