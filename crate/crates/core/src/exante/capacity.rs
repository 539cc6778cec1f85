use serde::Serialize;

use crate::error::{Error, Result};

/// Capacities sorted ascending with their running sums.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CapacityPrefix {
    sorted: Vec<u32>,
    prefix_sums: Vec<u64>,
}

impl CapacityPrefix {
    pub fn new(capacities: &[u32]) -> Result<Self> {
        if capacities.is_empty() {
            return Err(Error::InvalidConfig("no colleges".into()));
        }
        if capacities.contains(&0) {
            return Err(Error::InvalidConfig("capacities must be at least 1".into()));
        }
        let mut sorted = capacities.to_vec();
        sorted.sort_unstable();
        let prefix_sums = sorted
            .iter()
            .scan(0u64, |acc, &q| {
                *acc += u64::from(q);
                Some(*acc)
            })
            .collect();
        Ok(Self { sorted, prefix_sums })
    }

    pub fn sorted_capacities(&self) -> &[u32] {
        &self.sorted
    }

    /// Sum of the `k` smallest capacities; `k` beyond the number of colleges
    /// saturates at total capacity.
    pub fn sigma(&self, k: usize) -> u64 {
        if k == 0 {
            return 0;
        }
        self.prefix_sums[k.min(self.prefix_sums.len()) - 1]
    }

    pub fn total(&self) -> u64 {
        *self.prefix_sums.last().expect("non-empty")
    }
}

/// A priority position (1-based) is unconstrained under a `rounds` budget
/// when it lies within the `rounds` smallest capacities combined.
pub fn is_unconstrained(position: usize, rounds: u32, capacities: &[u32]) -> Result<bool> {
    if position == 0 {
        return Err(Error::PositionOutOfRange {
            position,
            students: usize::MAX,
        });
    }
    let prefix = CapacityPrefix::new(capacities)?;
    Ok(position as u64 <= prefix.sigma(rounds as usize))
}
