//! Rebuilds student trajectories from hourly university tables that carry
//! no identities, and scores the reconstruction against hidden ids.
//!
//! Ambiguous candidates are resolved in data order: universities in file
//! order, rows in published order.

mod link;
mod score;
mod trajectory;

pub use link::{link_snapshots, ChangeEvent, LinkKey, LinkRule, LinkWarning, LinkageResult, LinkedRow, RowLoc};
pub use score::{score_linkage, LinkageScore, RuleAccuracy};
pub use trajectory::{read_trajectory_csv, write_trajectory_csv};
