use matchlab_core::mechanisms::{minimal_convergence_t, serial_dictatorship, tentative_matching};
use matchlab_core::{
    audit_stability, compute_cutoffs, pareto_compare, random_instance, run_da, run_tcdm, unexplained_winners,
    winners_and_losers, Change, Matching, ParetoOrder, ProblemInstance, RandomShape, RoundBudget, StudentId,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance_from(seed: u64) -> ProblemInstance {
    random_instance(&mut ChaCha8Rng::seed_from_u64(seed), RandomShape::default())
}

fn arb_instance() -> impl Strategy<Value = ProblemInstance> {
    any::<u64>().prop_map(instance_from)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn da_is_stable_and_equals_serial_dictatorship(inst in arb_instance()) {
        let da = run_da(&inst);
        da.validate(&inst).unwrap();
        prop_assert_eq!(&da, &serial_dictatorship(&inst));
        let audit = audit_stability(&inst, &da).unwrap();
        prop_assert!(audit.is_stable, "{:?}", audit);
        prop_assert_eq!(audit.justified_envy_count, 0);
    }

    #[test]
    fn unbounded_tcdm_reaches_da(inst in arb_instance()) {
        let traj = run_tcdm(&inst, RoundBudget::Unbounded);
        prop_assert!(traj.converged);
        prop_assert_eq!(&traj.final_matching, &run_da(&inst));
        let t = minimal_convergence_t(&inst);
        prop_assert_eq!(&run_tcdm(&inst, RoundBudget::Limited(t)).final_matching, &run_da(&inst));
        if t > 1 {
            prop_assert_ne!(&run_tcdm(&inst, RoundBudget::Limited(t - 1)).final_matching, &run_da(&inst));
        }
    }

    #[test]
    fn cutoffs_never_fall_and_holds_persist(inst in arb_instance(), t in 1u32..6) {
        let traj = run_tcdm(&inst, RoundBudget::Limited(t));
        prop_assert!(traj.rounds.len() <= t as usize);
        prop_assert_eq!(&traj.final_matching, &traj.rounds.last().unwrap().tentative);
        for w in traj.rounds.windows(2) {
            for (a, b) in w[0].cutoffs.as_slice().iter().zip(w[1].cutoffs.as_slice()) {
                prop_assert!(a <= b);
            }
            for i in inst.student_ids() {
                if let Some(c) = w[0].tentative.get(i) {
                    prop_assert_eq!(w[1].applications[i.0], Some(c));
                    if w[1].tentative.get(i) != Some(c) {
                        // displaced only by a strictly higher score
                        let stronger = w[1].tentative.occupants(c).all(|j| inst.score(j) > inst.score(i));
                        prop_assert!(stronger);
                    }
                }
            }
        }
    }

    #[test]
    fn time_constrained_winners_are_explained(inst in arb_instance(), t in 1u32..4) {
        let tcdm = run_tcdm(&inst, RoundBudget::Limited(t)).final_matching;
        let da = run_da(&inst);
        prop_assert!(unexplained_winners(&inst, &tcdm, &da).unwrap().is_empty());
    }

    #[test]
    fn winners_and_losers_agree_with_pareto(inst in arb_instance(), t in 1u32..4) {
        let tcdm = run_tcdm(&inst, RoundBudget::Limited(t)).final_matching;
        let da = run_da(&inst);
        let changes = winners_and_losers(&inst, &tcdm, &da).unwrap();
        let better = changes.contains(&Change::Better);
        let worse = changes.contains(&Change::Worse);
        let expected = match (better, worse) {
            (false, false) => ParetoOrder::Equal,
            (true, false) => ParetoOrder::ADominates,
            (false, true) => ParetoOrder::BDominates,
            (true, true) => ParetoOrder::Incomparable,
        };
        prop_assert_eq!(pareto_compare(&inst, &tcdm, &da).unwrap(), expected);
    }

    #[test]
    fn assigned_scores_clear_their_cutoffs(inst in arb_instance(), seed in any::<u64>()) {
        // arbitrary feasible matching: everyone applies to a seeded college
        let m = inst.num_colleges();
        let apps: Vec<_> = inst
            .student_ids()
            .map(|i| {
                let k = (seed.rotate_left(i.0 as u32 * 7) % (m as u64 + 1)) as usize;
                (k < m).then_some(matchlab_core::CollegeId(k))
            })
            .collect();
        let matching = tentative_matching(&inst, &apps);
        matching.validate(&inst).unwrap();
        let cutoffs = compute_cutoffs(&inst, &matching).unwrap();
        for (i, c) in matching.iter() {
            if let Some(c) = c {
                prop_assert!(inst.score(i) >= cutoffs.get(c));
            }
        }
        for c in inst.college_ids() {
            let held = matching.occupants(c).count() as u32;
            prop_assert_eq!(cutoffs.get(c) == 0.0, held < inst.capacity(c));
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), t in 1u32..5) {
        let a = instance_from(seed);
        let b = instance_from(seed);
        let ta = run_tcdm(&a, RoundBudget::Limited(t));
        let tb = run_tcdm(&b, RoundBudget::Limited(t));
        prop_assert_eq!(
            serde_json::to_string(&ta.to_json(&a)).unwrap(),
            serde_json::to_string(&tb.to_json(&b)).unwrap()
        );
    }
}

#[test]
fn all_unassigned_matching_is_blocked_at_every_first_choice() {
    let inst = instance_from(42);
    let empty = Matching::unassigned(inst.num_students());
    let audit = audit_stability(&inst, &empty).unwrap();
    for i in inst.student_ids() {
        if let Some(top) = inst.preferences(i).top() {
            assert!(audit.blocking_pairs.contains(&(i, top)));
        }
    }
    assert_eq!(
        audit.is_stable,
        audit.blocking_pairs.is_empty() && audit.blocking_students.is_empty()
    );
}

#[test]
fn unit_capacity_orders_match_serial_dictatorship_oracle() {
    // independent oracle: walk students by score, take the best free college
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let shape = RandomShape {
            max_students: 6,
            max_colleges: 6,
            max_capacity: 1,
            truncate: false,
        };
        let inst = random_instance(&mut rng, shape);
        let mut taken = vec![false; inst.num_colleges()];
        for i in inst.student_ids() {
            let want = inst.preferences(i).acceptable().iter().copied().find(|c| !taken[c.0]);
            if let Some(c) = want {
                taken[c.0] = true;
            }
            assert_eq!(run_da(&inst).get(StudentId(i.0)), want);
        }
    }
}
