//! Matching-market toolkit for admissions with a common score priority.
//!
//! Runs deferred acceptance and the time-constrained dynamic mechanism
//! (TCDM), audits the resulting matchings, computes ex-ante assignment
//! distributions exactly and by simulation, simulates a staggered-closing
//! clearinghouse with hourly snapshots, and links those snapshots back into
//! student trajectories.

pub mod audit;
pub mod error;
pub mod exante;
pub mod fixtures;
pub mod imsim;
pub mod instance;
pub mod linker;
pub mod matching;
pub mod mechanisms;

pub use audit::{
    audit_stability, pareto_compare, unexplained_winners, winners_and_losers, AuditReport, Change, ParetoOrder,
};
pub use error::{Error, Result};
pub use fixtures::{random_instance, RandomShape};
pub use instance::{College, CollegeId, PreferenceList, ProblemInstance, Student, StudentId, OUTSIDE_OPTION};
pub use matching::{compute_cutoffs, CutoffVector, Matching};
pub use mechanisms::{run_da, run_tcdm, Mechanism, RoundBudget, TcdmTrajectory};
