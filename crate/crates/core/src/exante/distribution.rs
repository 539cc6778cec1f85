use std::fmt::Display;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

/// Probabilities over `[rank 1, …, rank m, unassigned]` for one priority
/// position (1-based).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RankDistribution {
    pub position: usize,
    pub probs: Vec<f64>,
}

impl RankDistribution {
    pub fn first_choice(&self) -> f64 {
        self.probs[0]
    }

    pub fn unassigned(&self) -> f64 {
        *self.probs.last().expect("non-empty")
    }

    /// Cumulative probabilities over the same outcome axis; the last entry is 1.
    pub fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }
}

/// Outcome frequencies over a full enumeration; probabilities are exact
/// ratios `count / total`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactRankDistribution {
    pub position: usize,
    pub counts: Vec<u64>,
    pub total: u64,
}

impl ExactRankDistribution {
    /// Number of colleges; the outcome axis has one more slot for unassigned.
    pub fn num_ranks(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn prob(&self, outcome: usize) -> Ratio<u64> {
        Ratio::new(self.counts[outcome], self.total)
    }

    /// Signed form used for margins and thresholds.
    pub fn prob_signed(&self, outcome: usize) -> Ratio<i128> {
        Ratio::new(i128::from(self.counts[outcome]), i128::from(self.total))
    }

    pub fn first_choice(&self) -> Ratio<u64> {
        self.prob(0)
    }

    pub fn unassigned(&self) -> Ratio<u64> {
        self.prob(self.num_ranks())
    }

    pub fn to_float(&self) -> RankDistribution {
        RankDistribution {
            position: self.position,
            probs: self.counts.iter().map(|&c| c as f64 / self.total as f64).collect(),
        }
    }

    /// Probabilities formatted as reduced fractions.
    pub fn fractions(&self) -> Vec<String> {
        (0..self.counts.len()).map(|k| ratio_string(&self.prob(k))).collect()
    }
}

pub fn ratio_string<T: Clone + Integer + Display>(r: &Ratio<T>) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
