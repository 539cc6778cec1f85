use itertools::Itertools;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::instance::{CollegeId, PreferenceList, ProblemInstance, StudentId};
use crate::mechanisms::tcdm::{run_tcdm_with, straightforward_choice, RoundBudget};

/// Alternative orders the deviator may play straightforwardly against.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DeviationSpace {
    /// Every permutation of all colleges; limited to eight colleges.
    Exhaustive,
    Sampled {
        samples: usize,
        seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationReport {
    pub deviator: StudentId,
    pub straightforward_outcome: Option<CollegeId>,
    pub best_outcome: Option<CollegeId>,
    /// Order that produced `best_outcome`; the truthful order when nothing beats it.
    pub best_order: Vec<CollegeId>,
    pub orders_tried: usize,
    pub profitable: bool,
}

const MAX_EXHAUSTIVE_COLLEGES: usize = 8;

/// Lets `deviator` replace her order with a fixed alternative (played
/// straightforwardly) while everyone else stays truthful, and reports the
/// best final seat under her true preferences.
pub fn unilateral_deviation_check(
    instance: &ProblemInstance,
    deviator: StudentId,
    budget: RoundBudget,
    space: DeviationSpace,
) -> Result<DeviationReport> {
    if deviator.0 >= instance.num_students() {
        return Err(Error::UnknownStudent(deviator.to_string()));
    }
    let m = instance.num_colleges();
    let orders: Vec<Vec<CollegeId>> = match space {
        DeviationSpace::Exhaustive => {
            if m > MAX_EXHAUSTIVE_COLLEGES {
                return Err(Error::InvalidConfig(format!(
                    "exhaustive deviation search over {m} colleges; use sampling"
                )));
            }
            instance.college_ids().permutations(m).collect()
        }
        DeviationSpace::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| {
                    let mut o: Vec<CollegeId> = instance.college_ids().collect();
                    o.shuffle(&mut rng);
                    o
                })
                .collect()
        }
    };

    let truth = instance.preferences(deviator);
    let outcome_with = |alt: &ProblemInstance| {
        run_tcdm_with(instance, budget, |i, cutoffs, held, _| {
            if i == deviator {
                straightforward_choice(alt, i, cutoffs, held)
            } else {
                straightforward_choice(instance, i, cutoffs, held)
            }
        })
        .final_matching
        .get(deviator)
    };

    let straightforward_outcome = outcome_with(instance);
    let mut best_outcome = straightforward_outcome;
    let mut best_order = truth.acceptable().to_vec();
    for order in &orders {
        let alt = instance.with_preferences(deviator, PreferenceList::full(m, order.clone())?)?;
        let got = outcome_with(&alt);
        if truth.prefers(got, best_outcome) {
            best_outcome = got;
            best_order = order.clone();
        }
    }
    Ok(DeviationReport {
        deviator,
        straightforward_outcome,
        best_outcome,
        best_order,
        orders_tried: orders.len(),
        profitable: truth.prefers(best_outcome, straightforward_outcome),
    })
}
