//! Staggered-closing clearinghouse over synthetic cohorts: batches close at
//! successive hours, cutoffs are published hourly, and every hour's
//! applicant tables are kept with the hidden identities alongside.

mod clearinghouse;
mod metrics;
mod population;
mod schedule;
mod snapshot;

pub use clearinghouse::{
    run_clearinghouse, run_clearinghouse_with, straightforward_application, ClearinghouseConfig, ClearinghouseRun,
    CutoffKind, HourState, Opportunity, PublishedCutoffs,
};
pub use metrics::{compute_metrics, HourRates, OutcomeMetrics};
pub use population::{
    generate_population, Population, PopulationConfig, ProgramChoices, SyntheticStudent, University, UniversityId,
    MAX_PROGRAM_CHOICES, POPULATION_SCHEMA_VERSION,
};
pub use schedule::{Batch, BatchSchedule};
pub use snapshot::{
    build_snapshots, read_snapshot_dir, read_truth, write_snapshot_dir, write_truth, ApplicantRow, GroundTruth,
    HourSnapshot, SnapshotSet, TableShape, UniversitySnapshot,
};
