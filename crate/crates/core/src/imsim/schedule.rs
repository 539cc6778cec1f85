use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One score band and the hour by which its students must finalize.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Batch {
    /// Inclusive; `None` for the bottom band.
    pub min_score: Option<i32>,
    /// Inclusive; `None` for the top band.
    pub max_score: Option<i32>,
    pub deadline_hour: u32,
}

/// Staggered closing: bands ordered from the highest scores down, each
/// closing one hour after the previous.
///
/// Hour `opening_hour` is the baseline (nothing published, all cutoffs
/// zero); students act at hours `opening_hour + 1 ..= deadline`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BatchSchedule {
    batches: Vec<Batch>,
    opening_hour: u32,
    /// Students without a choice entered by the end of this hour are void.
    /// `None` waives the requirement (used by single-batch reductions).
    mandatory_entry_hour: Option<u32>,
    total_hours: u32,
}

impl BatchSchedule {
    pub fn new(
        batches: Vec<Batch>,
        opening_hour: u32,
        mandatory_entry_hour: Option<u32>,
        total_hours: u32,
    ) -> Result<Self> {
        let s = Self {
            batches,
            opening_hour,
            mandatory_entry_hour,
            total_hours,
        };
        s.validate()?;
        Ok(s)
    }

    /// Nine 30-point bands (670+, 640–669, …, 460–489, below 460) closing at
    /// hours 3 through 11, with entry required by hour 2.
    pub fn default_staggered() -> Self {
        let mut batches = Vec::new();
        let mut upper = None;
        for (k, lower) in (0..8).map(|k| 670 - 30 * k).enumerate() {
            batches.push(Batch {
                min_score: Some(lower),
                max_score: upper,
                deadline_hour: 3 + k as u32,
            });
            upper = Some(lower - 1);
        }
        batches.push(Batch {
            min_score: None,
            max_score: upper,
            deadline_hour: 11,
        });
        Self::new(batches, 0, Some(2), 11).expect("default schedule is valid")
    }

    /// A single band for everyone, closing after `rounds` decision hours.
    pub fn single_batch(rounds: u32) -> Result<Self> {
        if rounds == 0 {
            return Err(Error::InvalidConfig(
                "single batch needs at least one decision hour".into(),
            ));
        }
        Self::new(
            vec![Batch {
                min_score: None,
                max_score: None,
                deadline_hour: rounds,
            }],
            0,
            None,
            rounds,
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(format!("batch schedule: {msg}")));
        let Some(first) = self.batches.first() else {
            return bad("no batches".into());
        };
        let last = self.batches.last().expect("non-empty");
        if first.max_score.is_some() || last.min_score.is_some() {
            return bad("bands must cover every score (open top and bottom)".into());
        }
        for (k, b) in self.batches.iter().enumerate() {
            if let (Some(lo), Some(hi)) = (b.min_score, b.max_score) {
                if lo > hi {
                    return bad(format!("batch {} has empty band {lo}..={hi}", k + 1));
                }
            }
        }
        for (k, w) in self.batches.windows(2).enumerate() {
            match (w[0].min_score, w[1].max_score) {
                (Some(lo), Some(hi)) if hi + 1 == lo => {}
                _ => return bad(format!("bands {} and {} are not adjacent and descending", k + 1, k + 2)),
            }
            if w[1].deadline_hour != w[0].deadline_hour + 1 {
                return bad(format!(
                    "deadline of batch {} is not one hour after batch {}",
                    k + 2,
                    k + 1
                ));
            }
        }
        if first.deadline_hour <= self.opening_hour {
            return bad("first deadline must come after the opening hour".into());
        }
        if let Some(m) = self.mandatory_entry_hour {
            if m <= self.opening_hour || m >= first.deadline_hour {
                return bad(format!(
                    "mandatory entry hour {m} must lie strictly between opening {} and first deadline {}",
                    self.opening_hour, first.deadline_hour
                ));
            }
        }
        if self.total_hours < last.deadline_hour {
            return bad(format!(
                "total hours {} end before the last deadline {}",
                self.total_hours, last.deadline_hour
            ));
        }
        Ok(())
    }

    pub fn batches(&self) -> &[Batch] {
        &self.batches
    }

    pub fn num_batches(&self) -> usize {
        self.batches.len()
    }

    pub fn opening_hour(&self) -> u32 {
        self.opening_hour
    }

    pub fn mandatory_entry_hour(&self) -> Option<u32> {
        self.mandatory_entry_hour
    }

    pub fn total_hours(&self) -> u32 {
        self.total_hours
    }

    pub fn first_decision_hour(&self) -> u32 {
        self.opening_hour + 1
    }

    /// Hours with a published snapshot, in order.
    pub fn hours(&self) -> impl Iterator<Item = u32> {
        self.first_decision_hour()..=self.total_hours
    }

    /// Zero-based batch index for a score including bonus points.
    pub fn batch_of(&self, score_with_bonus: i32) -> usize {
        self.batches
            .iter()
            .position(|b| b.min_score.is_none_or(|lo| score_with_bonus >= lo))
            .expect("bottom band is open")
    }

    pub fn deadline(&self, batch: usize) -> u32 {
        self.batches[batch].deadline_hour
    }

    pub fn deadline_for_score(&self, score_with_bonus: i32) -> u32 {
        self.deadline(self.batch_of(score_with_bonus))
    }
}
