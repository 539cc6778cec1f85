use matchlab_core::fixtures::{example1, random_instance, RandomShape};
use matchlab_core::imsim::{
    build_snapshots, compute_metrics, generate_population, read_snapshot_dir, read_truth, run_clearinghouse,
    run_clearinghouse_with, straightforward_application, write_snapshot_dir, write_truth, Batch, BatchSchedule,
    ClearinghouseConfig, CutoffKind, Population, PopulationConfig, PublishedCutoffs, UniversityId,
};
use matchlab_core::{run_tcdm, CollegeId, RoundBudget};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_config() -> PopulationConfig {
    PopulationConfig {
        num_students: 800,
        num_universities: 15,
        ..PopulationConfig::default()
    }
}

fn as_colleges(assignment: &[Option<UniversityId>]) -> Vec<Option<CollegeId>> {
    assignment.iter().map(|a| a.map(|u| CollegeId(u.0))).collect()
}

#[test]
fn single_batch_with_full_revision_is_tcdm() {
    let mut divergences = Vec::new();
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_instance(&mut rng, RandomShape::default());
        let rounds = 1 + (seed % 3) as u32;
        let pop = Population::from_instance(&inst).unwrap();
        let schedule = BatchSchedule::single_batch(rounds).unwrap();
        let config = ClearinghouseConfig {
            seed,
            ..ClearinghouseConfig::default()
        };
        let run = run_clearinghouse(&pop, &schedule, &config).unwrap();
        let tcdm = run_tcdm(&inst, RoundBudget::Limited(rounds));
        if as_colleges(&run.final_assignment) != tcdm.final_matching.as_slice() {
            divergences.push(seed);
        }
    }
    assert!(divergences.is_empty(), "diverging seeds: {divergences:?}");
}

#[test]
fn tie_free_generated_cohort_reduces_to_tcdm() {
    for seed in 0..5u64 {
        let cfg = PopulationConfig {
            num_students: 300,
            num_universities: 10,
            late_entry_prob: 0.0,
            no_entry_prob: 0.0,
            unique_scores: true,
            ..PopulationConfig::default()
        };
        let pop = generate_population(&cfg, seed).unwrap();
        let inst = pop.to_instance().unwrap();
        let order = pop.priority_order();
        for rounds in [1, 3, 6] {
            let schedule = BatchSchedule::single_batch(rounds).unwrap();
            let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::default()).unwrap();
            let tcdm = run_tcdm(&inst, RoundBudget::Limited(rounds));
            // instance students are listed in priority order
            let by_rank: Vec<_> = order.iter().map(|&id| run.final_assignment[id as usize]).collect();
            assert_eq!(
                as_colleges(&by_rank),
                tcdm.final_matching.as_slice(),
                "seed {seed} T={rounds}"
            );
        }
    }
}

#[test]
fn example_one_inside_two_hours() {
    let pop = Population::from_instance(&example1()).unwrap();
    let schedule = BatchSchedule::single_batch(2).unwrap();
    let u = |k: usize| Some(UniversityId(k));
    let script = [[u(0), u(0), u(2), u(2)], [u(0), u(1), u(1), u(2)]];
    let run = run_clearinghouse_with(&pop, &schedule, &ClearinghouseConfig::default(), |opp| {
        script[opp.hour as usize - 1][opp.student as usize]
    })
    .unwrap();
    assert_eq!(run.final_assignment, vec![u(0), u(1), None, u(2)]);
    assert_eq!(run.last().cutoffs.final_quota, vec![4, 3, 1, 0]);

    let m = compute_metrics(&pop, &schedule, &run);
    // i3 left c3 (final cutoff 1) for c2 and was bumped by i2
    assert_eq!(m.unassigned_with_score_above_some_prior_cutoff_count, 1);
    assert_eq!(m.changed_final_round_count, 2);
    assert_eq!(m.changed_final_round_and_rejected_count, 1);
    assert_eq!(m.admitted_by_rank_measure, 3);
    assert_eq!(m.measure_divergence, 0);
}

#[test]
fn nobody_unassigned_means_no_envy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let shape = RandomShape {
            truncate: false,
            ..RandomShape::default()
        };
        let inst = random_instance(&mut rng, shape);
        let mut pop = Population::from_instance(&inst).unwrap();
        // roomy copy: every university can take everyone
        let roomy = matchlab_core::ProblemInstance::ranked_full(
            &vec![inst.num_students() as u32; inst.num_colleges()],
            &pop.students()
                .iter()
                .map(|s| s.preferences.iter().map(|u| u.0).collect())
                .collect::<Vec<_>>(),
        )
        .unwrap();
        pop = Population::from_instance(&roomy).unwrap();
        let schedule = BatchSchedule::single_batch(2).unwrap();
        let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::default()).unwrap();
        assert!(run.final_assignment.iter().all(Option::is_some));
        let m = compute_metrics(&pop, &schedule, &run);
        assert_eq!(m.unassigned_with_score_above_some_prior_cutoff_count, 0);
        assert_eq!(m.changed_final_round_and_rejected_count, 0);
    }
}

#[test]
fn measures_agree_without_ties() {
    for seed in 0..4 {
        let cfg = PopulationConfig {
            num_students: 350,
            unique_scores: true,
            ..small_config()
        };
        let pop = generate_population(&cfg, seed).unwrap();
        let mut scores: Vec<i32> = pop.students().iter().map(|s| s.score_with_bonus()).collect();
        scores.sort_unstable();
        scores.dedup();
        assert_eq!(scores.len(), pop.num_students());
        let schedule = BatchSchedule::default_staggered();
        let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(seed)).unwrap();
        let m = compute_metrics(&pop, &schedule, &run);
        assert_eq!(m.measure_divergence, 0);
        assert_eq!(m.admitted_by_rank_measure, m.admitted_by_cutoff_measure);
    }
}

#[test]
fn metric_counts_are_bounded() {
    let pop = generate_population(&small_config(), 11).unwrap();
    let schedule = BatchSchedule::default_staggered();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(11)).unwrap();
    let m = compute_metrics(&pop, &schedule, &run);
    let n = pop.num_students();
    assert!(m.changed_final_round_and_rejected_count <= m.changed_final_round_count);
    assert!(m.changed_final_round_count <= n);
    assert!(m.unassigned_with_score_above_some_prior_cutoff_count <= n);
    assert!(m.admitted_by_rank_measure <= n && m.admitted_by_cutoff_measure <= n);
    assert_eq!(m.batch_sizes.iter().sum::<usize>() + m.void_count, n);
    for hr in &m.tentative_assigned_rate_by_hour_by_batch {
        assert!(hr.by_batch.iter().all(|r| (0.0..=1.0).contains(r)));
    }
}

#[test]
fn applications_freeze_after_the_deadline() {
    let pop = generate_population(&small_config(), 5).unwrap();
    let schedule = BatchSchedule::default_staggered();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(5)).unwrap();
    let (set, truth) = build_snapshots(&pop, &run);
    for (id, s) in pop.students().iter().enumerate() {
        let deadline = schedule.deadline_for_score(s.score_with_bonus());
        let at_deadline = run.hour(deadline).unwrap();
        let locate = |h: usize| {
            truth.ids[h].iter().enumerate().find_map(|(u, ids)| {
                ids.iter()
                    .position(|&x| x as usize == id)
                    .map(|r| set.hours[h].universities[u].rows[r].clone())
            })
        };
        let d_idx = (deadline - 1) as usize;
        for later in run.hours.iter().filter(|st| st.hour > deadline) {
            assert_eq!(later.applications[id], at_deadline.applications[id]);
            assert!(!later.revised[id]);
            assert_eq!(locate((later.hour - 1) as usize), locate(d_idx));
        }
    }
}

#[test]
fn snapshots_repeat_once_everyone_is_frozen() {
    let mut batches = BatchSchedule::default_staggered().batches().to_vec();
    batches.last_mut().unwrap().deadline_hour = 11;
    let schedule = BatchSchedule::new(batches, 0, Some(2), 14).unwrap();
    let pop = generate_population(&small_config(), 2).unwrap();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(2)).unwrap();
    let (set, truth) = build_snapshots(&pop, &run);
    let base = &set.hours[10];
    assert_eq!(base.hour, 11);
    for later in &set.hours[11..] {
        assert_eq!(later.universities, base.universities, "hour {}", later.hour);
    }
    for later in &truth.ids[11..] {
        assert_eq!(later, &truth.ids[10]);
    }
}

#[test]
fn decisions_only_see_the_previous_hour() {
    let pop = generate_population(&small_config(), 9).unwrap();
    let schedule = BatchSchedule::default_staggered();
    let cfg = ClearinghouseConfig::demo(9);
    let mut seen: Vec<(u32, PublishedCutoffs)> = Vec::new();
    let run = run_clearinghouse_with(&pop, &schedule, &cfg, |opp| {
        if seen.last().is_none_or(|(h, _)| *h != opp.hour) {
            seen.push((opp.hour, opp.published.clone()));
        }
        straightforward_application(&pop, CutoffKind::Final, opp)
    })
    .unwrap();
    assert_eq!(run, run_clearinghouse(&pop, &schedule, &cfg).unwrap());
    for (hour, published) in seen {
        let expected = match run.hour(hour - 1) {
            Some(prev) => prev.cutoffs.clone(),
            None => PublishedCutoffs::zeros(pop.num_universities()),
        };
        assert_eq!(published, expected, "hour {hour}");
    }
}

#[test]
fn held_students_fit_the_quota_and_clear_the_cutoff() {
    let pop = generate_population(&small_config(), 4).unwrap();
    let schedule = BatchSchedule::default_staggered();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(4)).unwrap();
    for state in &run.hours {
        let mut count = vec![0u32; pop.num_universities()];
        for (id, app) in state.applications.iter().enumerate() {
            if let (Some(u), true) = (app, state.held[id]) {
                count[u.0] += 1;
                assert!(pop.students()[id].score_with_bonus() >= state.cutoffs.final_quota[u.0]);
            }
        }
        for (u, uni) in pop.universities().iter().enumerate() {
            assert!(count[u] <= uni.final_quota);
            assert_eq!(state.cutoffs.final_quota[u] == 0, count[u] < uni.final_quota);
            assert!(
                state.cutoffs.planned_quota[u] >= state.cutoffs.final_quota[u] || state.cutoffs.planned_quota[u] == 0
            );
        }
    }
}

#[test]
fn late_or_missing_entries_are_void() {
    let mut batches = vec![Batch {
        min_score: None,
        max_score: None,
        deadline_hour: 3,
    }];
    batches[0].deadline_hour = 3;
    let schedule = BatchSchedule::new(batches, 0, Some(1), 3).unwrap();
    let cfg = PopulationConfig {
        late_entry_prob: 0.2,
        no_entry_prob: 0.1,
        ..small_config()
    };
    let pop = generate_population(&cfg, 8).unwrap();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::default()).unwrap();
    for (id, s) in pop.students().iter().enumerate() {
        let expect_void = s.entry_delay.is_none_or(|d| d > 0);
        assert_eq!(run.void[id], expect_void);
        if expect_void {
            assert!(run.hours.iter().all(|st| st.applications[id].is_none()));
        }
    }
    assert!(run.num_void() > 0);
}

#[test]
fn snapshot_files_round_trip() {
    let pop = generate_population(
        &PopulationConfig {
            num_students: 300,
            num_universities: 6,
            ..PopulationConfig::default()
        },
        1,
    )
    .unwrap();
    let schedule = BatchSchedule::default_staggered();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::demo(1)).unwrap();
    let (set, truth) = build_snapshots(&pop, &run);
    let dir = tempfile::tempdir().unwrap();
    write_snapshot_dir(dir.path(), &set, &schedule).unwrap();
    let truth_path = dir.path().join("truth.csv");
    write_truth(&truth_path, &set, &truth).unwrap();

    let (back, back_schedule) = read_snapshot_dir(dir.path()).unwrap();
    assert_eq!(back, set);
    assert_eq!(back_schedule, schedule);
    assert_eq!(read_truth(&truth_path, &back.shape()).unwrap(), truth);

    // identities never leak into the published tables
    let sample = std::fs::read_to_string(dir.path().join("hour_01").join("U001.csv")).unwrap();
    assert!(!sample.contains("true_id"));
}

#[test]
fn truth_must_cover_every_row() {
    let pop = generate_population(
        &PopulationConfig {
            num_students: 100,
            num_universities: 4,
            ..PopulationConfig::default()
        },
        1,
    )
    .unwrap();
    let schedule = BatchSchedule::default_staggered();
    let run = run_clearinghouse(&pop, &schedule, &ClearinghouseConfig::default()).unwrap();
    let (set, mut truth) = build_snapshots(&pop, &run);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("truth.csv");
    let victim = truth.ids[0].iter_mut().find(|ids| !ids.is_empty()).unwrap();
    victim.pop();
    write_truth(&path, &set, &truth).ok();
    assert!(read_truth(&path, &set.shape()).is_err());
}

#[test]
fn population_is_reproducible() {
    let a = generate_population(&small_config(), 77).unwrap();
    let b = generate_population(&small_config(), 77).unwrap();
    let c = generate_population(&small_config(), 78).unwrap();
    assert_eq!(serde_json::to_vec(&a).unwrap(), serde_json::to_vec(&b).unwrap());
    assert_ne!(a, c);
}

#[test]
fn common_values_share_one_ordering() {
    let pop = generate_population(
        &PopulationConfig {
            delta: 1.0,
            ..small_config()
        },
        6,
    )
    .unwrap();
    let first = &pop.students()[0].preferences;
    assert!(pop.students().iter().all(|s| &s.preferences == first));
    let pop = generate_population(
        &PopulationConfig {
            delta: 0.0,
            ..small_config()
        },
        6,
    )
    .unwrap();
    assert!(pop
        .students()
        .iter()
        .any(|s| s.preferences != pop.students()[0].preferences));
}

#[test]
fn default_cohort_fills_every_band() {
    let pop = generate_population(&PopulationConfig::default(), 20180619).unwrap();
    let schedule = BatchSchedule::default_staggered();
    let mut sizes = vec![0usize; schedule.num_batches()];
    for s in pop.students() {
        sizes[schedule.batch_of(s.score_with_bonus())] += 1;
    }
    assert!(sizes.iter().all(|&k| k > 0), "{sizes:?}");
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        PopulationConfig {
            num_universities: 0,
            ..PopulationConfig::default()
        },
        PopulationConfig {
            delta: 1.5,
            ..PopulationConfig::default()
        },
        PopulationConfig {
            final_quota_ratio: 0.9,
            ..PopulationConfig::default()
        },
        PopulationConfig {
            schema_version: 9,
            ..PopulationConfig::default()
        },
    ] {
        assert!(generate_population(&cfg, 0).is_err());
    }
    let pop = generate_population(&small_config(), 0).unwrap();
    let bad = ClearinghouseConfig {
        rho: 1.5,
        ..ClearinghouseConfig::default()
    };
    assert!(run_clearinghouse(&pop, &BatchSchedule::default_staggered(), &bad).is_err());
}
