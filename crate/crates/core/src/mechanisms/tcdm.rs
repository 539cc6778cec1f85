use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::instance::{CollegeId, ProblemInstance, StudentId};
use crate::matching::{compute_cutoffs, CutoffVector, Matching};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoundBudget {
    Limited(u32),
    /// Run until applications stop changing.
    Unbounded,
}

impl RoundBudget {
    fn allows(self, round: u32) -> bool {
        match self {
            RoundBudget::Limited(t) => round <= t,
            RoundBudget::Unbounded => true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub applications: Vec<Option<CollegeId>>,
    pub tentative: Matching,
    pub cutoffs: CutoffVector,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TcdmTrajectory {
    pub round_budget: RoundBudget,
    pub rounds: Vec<RoundRecord>,
    /// Set when a round repeated the previous applications; the remaining
    /// rounds would be no-ops and are not recorded.
    pub converged: bool,
    pub final_matching: Matching,
}

impl TcdmTrajectory {
    pub fn to_json(&self, instance: &ProblemInstance) -> Value {
        let label = |c: Option<CollegeId>| match c {
            Some(c) => Value::String(instance.college_label(c).to_owned()),
            None => Value::Null,
        };
        let rounds: Vec<Value> = self
            .rounds
            .iter()
            .enumerate()
            .map(|(t, r)| {
                let apps: serde_json::Map<String, Value> = instance
                    .student_ids()
                    .map(|i| (instance.student_label(i).to_owned(), label(r.applications[i.0])))
                    .collect();
                json!({
                    "round": t + 1,
                    "applications": apps,
                    "tentative": r.tentative.to_json(instance),
                    "cutoffs": r.cutoffs.to_json(instance),
                })
            })
            .collect();
        let budget = match self.round_budget {
            RoundBudget::Limited(t) => json!(t),
            RoundBudget::Unbounded => json!("unbounded"),
        };
        json!({
            "roundBudget": budget,
            "converged": self.converged,
            "rounds": rounds,
            "final": self.final_matching.to_json(instance),
        })
    }
}

/// Straightforward play: stay where held, otherwise apply to the most
/// preferred college whose cutoff the student's score meets, or to nobody.
pub fn straightforward_choice(
    instance: &ProblemInstance,
    student: StudentId,
    cutoffs: &CutoffVector,
    held_at: Option<CollegeId>,
) -> Option<CollegeId> {
    if held_at.is_some() {
        return held_at;
    }
    let score = instance.score(student);
    instance
        .preferences(student)
        .acceptable()
        .iter()
        .copied()
        .find(|&c| score >= cutoffs.get(c))
}

/// Each college keeps its highest-priority applicants up to capacity.
pub fn tentative_matching(instance: &ProblemInstance, applications: &[Option<CollegeId>]) -> Matching {
    let mut room = instance.capacities();
    let mut out = Matching::unassigned(instance.num_students());
    for i in instance.student_ids() {
        if let Some(c) = applications[i.0] {
            if room[c.0] > 0 {
                room[c.0] -= 1;
                out.set(i, Some(c));
            }
        }
    }
    out
}

/// Runs TCDM with every student playing straightforwardly.
pub fn run_tcdm(instance: &ProblemInstance, budget: RoundBudget) -> TcdmTrajectory {
    run_tcdm_with(instance, budget, |i, cutoffs, held, _| {
        straightforward_choice(instance, i, cutoffs, held)
    })
}

/// Runs TCDM with an arbitrary application policy.
///
/// `policy(student, published_cutoffs, held_at, round)` returns the
/// student's application for `round` (1-based). Round 1 sees all-zero
/// cutoffs and no holdings.
pub fn run_tcdm_with<F>(instance: &ProblemInstance, budget: RoundBudget, mut policy: F) -> TcdmTrajectory
where
    F: FnMut(StudentId, &CutoffVector, Option<CollegeId>, u32) -> Option<CollegeId>,
{
    if let RoundBudget::Limited(0) = budget {
        panic!("round budget must be at least 1");
    }
    let n = instance.num_students();
    let mut rounds: Vec<RoundRecord> = Vec::new();
    let mut cutoffs = CutoffVector::zeros(instance.num_colleges());
    let mut tentative = Matching::unassigned(n);
    let mut converged = false;
    let mut round = 1u32;

    while budget.allows(round) {
        let applications: Vec<Option<CollegeId>> = instance
            .student_ids()
            .map(|i| policy(i, &cutoffs, tentative.get(i), round))
            .collect();
        if rounds.last().is_some_and(|r| r.applications == applications) {
            converged = true;
            break;
        }
        tentative = tentative_matching(instance, &applications);
        cutoffs = compute_cutoffs(instance, &tentative).expect("tentative matching is feasible");
        rounds.push(RoundRecord {
            applications,
            tentative: tentative.clone(),
            cutoffs: cutoffs.clone(),
        });
        round += 1;
        if budget == RoundBudget::Unbounded {
            // every round without convergence rejects someone, so this bound is never hit
            // under straightforward play
            let limit = (n * (instance.num_colleges() + 1) + 2) as u32;
            assert!(round <= limit, "TCDM failed to converge within {limit} rounds");
        }
    }

    TcdmTrajectory {
        round_budget: budget,
        final_matching: tentative,
        rounds,
        converged,
    }
}

/// Smallest round budget whose final matching already equals the
/// matching reached once applications stop changing.
pub fn minimal_convergence_t(instance: &ProblemInstance) -> u32 {
    let traj = run_tcdm(instance, RoundBudget::Unbounded);
    let first = traj
        .rounds
        .iter()
        .position(|r| r.tentative == traj.final_matching)
        .unwrap_or(0);
    first as u32 + 1
}
