//! Small named instances used by tests, examples and the reproduction bundle.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::{CollegeId, PreferenceList, ProblemInstance};

/// Four students, four unit-capacity colleges; the direct and indirect
/// time-constraint effects both show up with a two-round budget.
pub fn example1() -> ProblemInstance {
    ProblemInstance::ranked_full(
        &[1, 1, 1, 1],
        &[vec![0, 1, 2, 3], vec![0, 1, 3, 2], vec![1, 2, 0, 3], vec![2, 3, 0, 1]],
    )
    .expect("fixture is valid")
}

/// `example1` with the lowest-priority student ranking c4 c3 c1 c2, under
/// which the DA outcome Pareto dominates the two-round TCDM outcome.
pub fn example1_variant() -> ProblemInstance {
    ProblemInstance::ranked_full(
        &[1, 1, 1, 1],
        &[vec![0, 1, 2, 3], vec![0, 1, 3, 2], vec![1, 2, 0, 3], vec![3, 2, 0, 1]],
    )
    .expect("fixture is valid")
}

/// Two students sharing a top choice among two unit-capacity colleges.
pub fn shared_top_choice() -> ProblemInstance {
    ProblemInstance::ranked_full(&[1, 1], &[vec![0, 1], vec![0, 1]]).expect("fixture is valid")
}

/// Shape of [`random_instance`] draws.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct RandomShape {
    pub max_students: usize,
    pub max_colleges: usize,
    pub max_capacity: u32,
    /// Draw truncated lists (outside-option sentinel at a random position).
    pub truncate: bool,
}

impl Default for RandomShape {
    fn default() -> Self {
        Self {
            max_students: 6,
            max_colleges: 6,
            max_capacity: 3,
            truncate: true,
        }
    }
}

/// Uniform sizes in `1..=max`, capacities in `1..=max_capacity`, uniformly
/// shuffled orders; with `truncate`, each list keeps a uniform prefix
/// (possibly all colleges) before the outside option.
pub fn random_instance<R: Rng>(rng: &mut R, shape: RandomShape) -> ProblemInstance {
    let n = rng.random_range(1..=shape.max_students);
    let m = rng.random_range(1..=shape.max_colleges);
    let capacities: Vec<u32> = (0..m).map(|_| rng.random_range(1..=shape.max_capacity)).collect();
    let prefs = (0..n)
        .map(|_| {
            let mut order: Vec<CollegeId> = (0..m).map(CollegeId).collect();
            order.shuffle(rng);
            let cut = if shape.truncate { rng.random_range(0..=m) } else { m };
            let unacceptable = order.split_off(cut);
            PreferenceList::new(m, order, unacceptable).expect("permutation is a valid list")
        })
        .collect();
    ProblemInstance::ranked(&capacities, prefs).expect("generated instance is valid")
}
