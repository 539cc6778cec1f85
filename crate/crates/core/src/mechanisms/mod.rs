//! Deferred acceptance and the time-constrained dynamic mechanism driven by
//! straightforward play.

mod da;
mod deviation;
mod tcdm;

pub use da::{run_da, serial_dictatorship};
pub use deviation::{unilateral_deviation_check, DeviationReport, DeviationSpace};
pub use tcdm::{
    minimal_convergence_t, run_tcdm, run_tcdm_with, straightforward_choice, tentative_matching, RoundBudget,
    RoundRecord, TcdmTrajectory,
};

use serde::{Deserialize, Serialize};

/// The mechanism whose outcome is being evaluated.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Da,
    Tcdm { rounds: u32 },
}

impl Mechanism {
    pub fn run(self, instance: &crate::ProblemInstance) -> crate::Matching {
        match self {
            Mechanism::Da => run_da(instance),
            Mechanism::Tcdm { rounds } => run_tcdm(instance, RoundBudget::Limited(rounds)).final_matching,
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Mechanism::Da => write!(f, "DA"),
            Mechanism::Tcdm { rounds } => write!(f, "TCDM(T={rounds})"),
        }
    }
}
