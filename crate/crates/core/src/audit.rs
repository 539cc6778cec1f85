//! Stability, blocking and welfare comparisons of matchings.

use serde::Serialize;

use crate::error::Result;
use crate::instance::{CollegeId, ProblemInstance, StudentId};
use crate::matching::{compute_cutoffs, Matching};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub blocking_pairs: Vec<(StudentId, CollegeId)>,
    /// Students who prefer the outside option to their seat.
    pub blocking_students: Vec<StudentId>,
    pub is_stable: bool,
    pub justified_envy_count: usize,
}

/// Enumerates every blocking student and student-college blocking pair.
///
/// With a common priority, `(i, c)` blocks exactly when `i` prefers `c` and
/// her score exceeds `c`'s cutoff (zero when `c` has a free seat).
pub fn audit_stability(instance: &ProblemInstance, matching: &Matching) -> Result<AuditReport> {
    let cutoffs = compute_cutoffs(instance, matching)?;
    let mut blocking_pairs = Vec::new();
    let mut blocking_students = Vec::new();
    let mut justified_envy_count = 0;
    for (i, current) in matching.iter() {
        let prefs = instance.preferences(i);
        if prefs.prefers(None, current) {
            blocking_students.push(i);
        }
        let before = blocking_pairs.len();
        for c in instance.college_ids() {
            if prefs.prefers(Some(c), current) && instance.score(i) > cutoffs.get(c) {
                blocking_pairs.push((i, c));
            }
        }
        if blocking_pairs.len() > before {
            justified_envy_count += 1;
        }
    }
    let is_stable = blocking_pairs.is_empty() && blocking_students.is_empty();
    Ok(AuditReport {
        blocking_pairs,
        blocking_students,
        is_stable,
        justified_envy_count,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ParetoOrder {
    ADominates,
    BDominates,
    Equal,
    Incomparable,
}

pub fn pareto_compare(instance: &ProblemInstance, a: &Matching, b: &Matching) -> Result<ParetoOrder> {
    a.validate(instance)?;
    b.validate(instance)?;
    let (mut a_better, mut b_better) = (false, false);
    for outcome in winners_and_losers(instance, a, b)? {
        match outcome {
            Change::Better => a_better = true,
            Change::Worse => b_better = true,
            Change::Same => {}
        }
    }
    Ok(match (a_better, b_better) {
        (false, false) => ParetoOrder::Equal,
        (true, false) => ParetoOrder::ADominates,
        (false, true) => ParetoOrder::BDominates,
        (true, true) => ParetoOrder::Incomparable,
    })
}

/// How a student fares under the first matching relative to the second.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Change {
    Better,
    Worse,
    Same,
}

/// Pointwise comparison of `tcdm` against `da` under each student's order.
pub fn winners_and_losers(instance: &ProblemInstance, tcdm: &Matching, da: &Matching) -> Result<Vec<Change>> {
    tcdm.validate(instance)?;
    da.validate(instance)?;
    Ok(instance
        .student_ids()
        .map(|i| {
            let p = instance.preferences(i);
            let (t, d) = (tcdm.get(i), da.get(i));
            if p.prefers(t, d) {
                Change::Better
            } else if p.prefers(d, t) {
                Change::Worse
            } else {
                Change::Same
            }
        })
        .collect())
}

/// Students who do better under `tcdm` than under `da` although every
/// higher-priority student holds a seat under `tcdm`.
///
/// Empty whenever `tcdm` comes from straightforward play with a round
/// budget and `da` is the stable matching.
pub fn unexplained_winners(instance: &ProblemInstance, tcdm: &Matching, da: &Matching) -> Result<Vec<StudentId>> {
    let changes = winners_and_losers(instance, tcdm, da)?;
    let mut out = Vec::new();
    let mut someone_above_unassigned = false;
    for (i, change) in instance.student_ids().zip(changes) {
        if change == Change::Better && !someone_above_unassigned {
            out.push(i);
        }
        if tcdm.get(i).is_none() {
            someone_above_unassigned = true;
        }
    }
    Ok(out)
}
