use serde::Serialize;

use crate::imsim::clearinghouse::ClearinghouseRun;
use crate::imsim::population::Population;
use crate::imsim::schedule::BatchSchedule;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HourRates {
    pub hour: u32,
    /// Share of each batch's non-void students held after this hour.
    pub by_batch: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeMetrics {
    pub population: usize,
    pub void_count: usize,
    /// Non-void students per batch.
    pub batch_sizes: Vec<usize>,
    pub tentative_assigned_rate_by_hour_by_batch: Vec<HourRates>,
    /// Application at the own deadline hour differs from the hour before.
    pub changed_final_round_count: usize,
    /// Of those, not held when the match closes.
    pub changed_final_round_and_rejected_count: usize,
    /// Unassigned students whose score meets the closing cutoff of a
    /// university they applied to before their deadline hour.
    pub unassigned_with_score_above_some_prior_cutoff_count: usize,
    /// Ranked within the final quota at the final university.
    pub admitted_by_rank_measure: usize,
    /// Score at least the closing final-quota cutoff of the final university.
    pub admitted_by_cutoff_measure: usize,
    pub measure_divergence: usize,
}

impl OutcomeMetrics {
    pub fn rate(&self, hour: u32, batch: usize) -> Option<f64> {
        self.tentative_assigned_rate_by_hour_by_batch
            .iter()
            .find(|r| r.hour == hour)
            .map(|r| r.by_batch[batch])
    }
}

pub fn compute_metrics(population: &Population, schedule: &BatchSchedule, run: &ClearinghouseRun) -> OutcomeMetrics {
    let students = population.students();
    let batch: Vec<usize> = students
        .iter()
        .map(|s| schedule.batch_of(s.score_with_bonus()))
        .collect();
    let active = |id: usize| !run.void[id];

    let mut batch_sizes = vec![0usize; schedule.num_batches()];
    for id in (0..students.len()).filter(|&id| active(id)) {
        batch_sizes[batch[id]] += 1;
    }
    let rates = run
        .hours
        .iter()
        .map(|state| {
            let mut held = vec![0usize; schedule.num_batches()];
            for id in (0..students.len()).filter(|&id| active(id) && state.held[id]) {
                held[batch[id]] += 1;
            }
            HourRates {
                hour: state.hour,
                by_batch: held
                    .iter()
                    .zip(&batch_sizes)
                    .map(|(&h, &n)| if n == 0 { 0.0 } else { h as f64 / n as f64 })
                    .collect(),
            }
        })
        .collect();

    let last = run.last();
    let mut changed = 0;
    let mut changed_rejected = 0;
    let mut envy = 0;
    let mut by_rank = 0;
    let mut by_cutoff = 0;
    let mut divergence = 0;
    for id in (0..students.len()).filter(|&id| active(id)) {
        let deadline = schedule.deadline(batch[id]);
        let assigned = run.final_assignment[id].is_some();
        if let (Some(now), Some(before)) = (run.hour(deadline), run.hour(deadline.saturating_sub(1))) {
            if now.applications[id] != before.applications[id] {
                changed += 1;
                if !assigned {
                    changed_rejected += 1;
                }
            }
        }
        let score = students[id].score_with_bonus();
        if !assigned {
            let envious = run
                .hours
                .iter()
                .filter(|s| s.hour < deadline)
                .filter_map(|s| s.applications[id])
                .any(|u| score >= last.cutoffs.final_quota[u.0]);
            envy += usize::from(envious);
        }
        let rank_admit = last.held[id];
        let cutoff_admit = last.applications[id].is_some_and(|u| score >= last.cutoffs.final_quota[u.0]);
        by_rank += usize::from(rank_admit);
        by_cutoff += usize::from(cutoff_admit);
        divergence += usize::from(rank_admit != cutoff_admit);
    }

    OutcomeMetrics {
        population: students.len(),
        void_count: run.num_void(),
        batch_sizes,
        tentative_assigned_rate_by_hour_by_batch: rates,
        changed_final_round_count: changed,
        changed_final_round_and_rejected_count: changed_rejected,
        unassigned_with_score_above_some_prior_cutoff_count: envy,
        admitted_by_rank_measure: by_rank,
        admitted_by_cutoff_measure: by_cutoff,
        measure_divergence: divergence,
    }
}
