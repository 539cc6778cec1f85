//! Inputs shared by the benchmarks.

use matchlab_core::imsim::{
    build_snapshots, generate_population, run_clearinghouse, BatchSchedule, ClearinghouseConfig, GroundTruth,
    Population, PopulationConfig, SnapshotSet,
};
use matchlab_core::{random_instance, ProblemInstance, RandomShape};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Fixed batch of random markets with up to `size` students and colleges.
pub fn random_markets(count: usize, size: usize, seed: u64) -> Vec<ProblemInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = RandomShape {
        max_students: size,
        max_colleges: size,
        ..RandomShape::default()
    };
    (0..count).map(|_| random_instance(&mut rng, shape)).collect()
}

/// Demo-sized cohort with the staggered schedule.
pub fn demo_population(seed: u64) -> (Population, BatchSchedule) {
    let pop = generate_population(&PopulationConfig::default(), seed).expect("default config is valid");
    (pop, BatchSchedule::default_staggered())
}

pub fn demo_snapshots(seed: u64) -> (SnapshotSet, GroundTruth, BatchSchedule) {
    let (pop, schedule) = demo_population(seed);
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(seed)).expect("demo config is valid");
    let (set, truth) = build_snapshots(&pop, &run);
    (set, truth, schedule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inputs_are_reproducible() {
        assert_eq!(random_markets(3, 5, 1), random_markets(3, 5, 1));
        let (set, truth, _) = demo_snapshots(2);
        assert_eq!(set.hours.len(), truth.ids.len());
    }
}
