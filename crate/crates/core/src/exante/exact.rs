use itertools::Itertools;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exante::distribution::ExactRankDistribution;
use crate::instance::{CollegeId, ProblemInstance, StudentId};
use crate::mechanisms::Mechanism;

pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactOptions {
    /// Largest number of profiles of the other students to enumerate.
    pub budget: u128,
    /// Fixed order of the target student (zero-based college indices).
    /// With `None` the identity order is used when all capacities are equal
    /// (every order then gives the same distribution); otherwise the counts
    /// are summed over all target orders.
    pub target_order: Option<Vec<usize>>,
}

impl Default for ExactOptions {
    fn default() -> Self {
        Self {
            budget: DEFAULT_ENUMERATION_BUDGET,
            target_order: None,
        }
    }
}

/// Number of profiles of `n - 1` other students over `m` colleges.
pub fn profile_count(n: usize, m: usize) -> u128 {
    let fact: u128 = (1..=m as u128).product();
    fact.checked_pow(n.saturating_sub(1) as u32).unwrap_or(u128::MAX)
}

/// Rank distributions for every priority position, each obtained by fixing
/// the target's order and enumerating all i.i.d. uniform orders of the rest.
pub fn exact_distribution(
    n: usize,
    capacities: &[u32],
    mechanism: Mechanism,
    options: &ExactOptions,
) -> Result<Vec<ExactRankDistribution>> {
    (1..=n)
        .map(|p| exact_distribution_at(n, capacities, mechanism, p, options))
        .collect()
}

pub fn exact_distribution_at(
    n: usize,
    capacities: &[u32],
    mechanism: Mechanism,
    position: usize,
    options: &ExactOptions,
) -> Result<ExactRankDistribution> {
    let m = capacities.len();
    if n == 0 || m == 0 {
        return Err(Error::InvalidConfig("need at least one student and one college".into()));
    }
    if capacities.contains(&0) {
        return Err(Error::InvalidConfig("capacities must be at least 1".into()));
    }
    if position == 0 || position > n {
        return Err(Error::PositionOutOfRange { position, students: n });
    }
    if let Mechanism::Tcdm { rounds: 0 } = mechanism {
        return Err(Error::InvalidConfig("round budget must be at least 1".into()));
    }
    let target_orders: Vec<Vec<usize>> = match &options.target_order {
        Some(o) => {
            let mut sorted = o.clone();
            sorted.sort_unstable();
            if sorted != (0..m).collect::<Vec<_>>() {
                return Err(Error::InvalidConfig(format!(
                    "target order {o:?} is not a permutation of 0..{m}"
                )));
            }
            vec![o.clone()]
        }
        None if capacities.iter().all_equal() => vec![(0..m).collect()],
        None => (0..m).permutations(m).collect(),
    };
    let required = profile_count(n, m).saturating_mul(target_orders.len() as u128);
    if required > options.budget {
        return Err(Error::EnumerationBudget {
            required,
            budget: options.budget,
        });
    }

    let perms: Vec<Vec<usize>> = (0..m).permutations(m).collect();
    let mut counts = vec![0u64; m + 1];
    for target_order in &target_orders {
        let part = tally_fixed_target(n, capacities, mechanism, position - 1, target_order, &perms);
        for (acc, c) in counts.iter_mut().zip(part) {
            *acc += c;
        }
    }

    Ok(ExactRankDistribution {
        position,
        total: counts.iter().sum(),
        counts,
    })
}

fn tally_fixed_target(
    n: usize,
    capacities: &[u32],
    mechanism: Mechanism,
    target: usize,
    target_order: &[usize],
    perms: &[Vec<usize>],
) -> Vec<u64> {
    let m = capacities.len();
    let others = n - 1;
    let num_perms = perms.len();

    let tally = |digits: &[usize]| -> usize {
        let orders: Vec<Vec<usize>> = (0..n)
            .map(|i| match i.cmp(&target) {
                std::cmp::Ordering::Less => perms[digits[i]].clone(),
                std::cmp::Ordering::Equal => target_order.to_vec(),
                std::cmp::Ordering::Greater => perms[digits[i - 1]].clone(),
            })
            .collect();
        let instance = ProblemInstance::ranked_full(capacities, &orders).expect("valid ranked instance");
        outcome_slot(target_order, mechanism.run(&instance).get(StudentId(target)))
    };

    if others == 0 {
        let mut counts = vec![0u64; m + 1];
        counts[tally(&[])] += 1;
        return counts;
    }
    // split on the first other student's order, then walk the rest as a mixed-radix counter
    (0..num_perms)
        .into_par_iter()
        .map(|first| {
            let mut counts = vec![0u64; m + 1];
            let mut digits = vec![0usize; others];
            digits[0] = first;
            loop {
                counts[tally(&digits)] += 1;
                if !advance(&mut digits[1..], num_perms) {
                    break;
                }
            }
            counts
        })
        .reduce(
            || vec![0u64; m + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Index on the `[rank 1 … rank m, unassigned]` axis.
pub(crate) fn outcome_slot(order: &[usize], outcome: Option<CollegeId>) -> usize {
    match outcome {
        Some(c) => order.iter().position(|&x| x == c.0).expect("college in order"),
        None => order.len(),
    }
}

fn advance(digits: &mut [usize], radix: usize) -> bool {
    for d in digits.iter_mut().rev() {
        *d += 1;
        if *d < radix {
            return true;
        }
        *d = 0;
    }
    false
}
