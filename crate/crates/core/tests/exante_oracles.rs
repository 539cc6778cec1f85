use matchlab_core::exante::{
    check_prop4, check_prop5, corollary1_threshold, exact_distribution, exact_distribution_at, monte_carlo_correlated,
    CorrelatedUtilityConfig, ExactOptions, ExactRankDistribution, FirstChoiceDirection, Margin,
};
use matchlab_core::{Error, Mechanism};
use num_rational::Ratio;

const UNIT4: [u32; 4] = [1, 1, 1, 1];

fn r(n: i128, d: i128) -> Margin {
    Ratio::new(n, d)
}

fn probs(d: &ExactRankDistribution) -> Vec<Margin> {
    (0..d.counts.len()).map(|k| d.prob_signed(k)).collect()
}

// Counts from an independent brute force over the 24^3 profiles of the
// other three students.
#[test]
fn four_by_four_two_rounds_exact() {
    let opts = ExactOptions::default();
    let tcdm = exact_distribution(4, &UNIT4, Mechanism::Tcdm { rounds: 2 }, &opts).unwrap();
    let da = exact_distribution(4, &UNIT4, Mechanism::Da, &opts).unwrap();

    let expect_tcdm = [
        vec![r(1, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1)],
        vec![r(3, 4), r(1, 4), r(0, 1), r(0, 1), r(0, 1)],
        vec![r(1, 2), r(7, 24), r(1, 8), r(0, 1), r(1, 12)],
        vec![r(13, 48), r(59, 288), r(7, 48), r(3, 32), r(41, 144)],
    ];
    let expect_da = [
        vec![r(1, 1), r(0, 1), r(0, 1), r(0, 1), r(0, 1)],
        vec![r(3, 4), r(1, 4), r(0, 1), r(0, 1), r(0, 1)],
        vec![r(1, 2), r(1, 3), r(1, 6), r(0, 1), r(0, 1)],
        vec![r(1, 4), r(1, 4), r(1, 4), r(1, 4), r(0, 1)],
    ];
    for p in 0..4 {
        assert_eq!(probs(&tcdm[p]), expect_tcdm[p], "TCDM position {}", p + 1);
        assert_eq!(probs(&da[p]), expect_da[p], "DA position {}", p + 1);
        assert_eq!(tcdm[p].total, 13_824);
        assert_eq!(tcdm[p].counts.iter().sum::<u64>(), tcdm[p].total);
    }
}

#[test]
fn target_order_does_not_matter_with_equal_capacities() {
    for mech in [
        Mechanism::Da,
        Mechanism::Tcdm { rounds: 1 },
        Mechanism::Tcdm { rounds: 2 },
    ] {
        for pos in 1..=4 {
            let a = exact_distribution_at(4, &UNIT4, mech, pos, &ExactOptions::default()).unwrap();
            let b = exact_distribution_at(4, &UNIT4, mech, pos, &with_target(vec![2, 0, 3, 1])).unwrap();
            assert_eq!(a.counts, b.counts, "{mech} position {pos}");
        }
    }
}

fn with_target(order: Vec<usize>) -> ExactOptions {
    ExactOptions {
        target_order: Some(order),
        ..ExactOptions::default()
    }
}

#[test]
fn unequal_capacities_average_over_target_orders() {
    let caps = [2, 1, 1];
    let mech = Mechanism::Tcdm { rounds: 1 };
    let pooled = exact_distribution_at(4, &caps, mech, 2, &ExactOptions::default()).unwrap();
    assert_eq!(pooled.total, 6 * 216);
    let mut sum = vec![0u64; 4];
    let mut distinct = std::collections::BTreeSet::new();
    for order in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
        let d = exact_distribution_at(4, &caps, mech, 2, &with_target(order.to_vec())).unwrap();
        distinct.insert(d.counts.clone());
        for (s, c) in sum.iter_mut().zip(d.counts) {
            *s += c;
        }
    }
    assert_eq!(pooled.counts, sum);
    // the big college at the top of the target's list changes her odds
    assert!(distinct.len() > 1);
}

#[test]
fn lowest_position_under_da_is_uniform() {
    for n in 2..=4 {
        let caps = vec![1; n];
        let d = exact_distribution_at(n, &caps, Mechanism::Da, n, &ExactOptions::default()).unwrap();
        for k in 0..n {
            assert_eq!(d.prob_signed(k), r(1, n as i128));
        }
        assert_eq!(d.prob_signed(n), r(0, 1));
    }
}

#[test]
fn prop4_holds_on_small_markets() {
    let opts = ExactOptions::default();
    for (n, caps, t) in [
        (3usize, vec![1u32, 1, 1], 1u32),
        (4, UNIT4.to_vec(), 1),
        (4, UNIT4.to_vec(), 2),
        (4, UNIT4.to_vec(), 3),
        (4, vec![2, 1, 1], 1),
    ] {
        let report = check_prop4(n, &caps, t, &opts).unwrap();
        assert!(report.passed(), "{caps:?} T={t}: {:?}", report.violations);
    }
}

#[test]
fn large_budget_matches_da_everywhere() {
    let report = check_prop4(4, &UNIT4, 4, &ExactOptions::default()).unwrap();
    for pos in &report.positions {
        assert_eq!(pos.tcdm.counts, pos.da.counts);
    }
}

#[test]
fn first_choice_falls_as_rounds_grow() {
    let report = check_prop5(4, &UNIT4, 4, &ExactOptions::default()).unwrap();
    assert!(report.passed(), "{:?}", report.violations);
    assert_eq!(report.first_choice_direction, FirstChoiceDirection::Decreasing);
    let p4 = &report.positions[3];
    assert!(p4.first_choice[1] >= p4.first_choice[3]);
    assert_eq!(p4.first_choice[3], r(1, 4));
    assert!(report.positions.iter().all(|p| p.equals_da_at_max));
}

fn expected_utility(d: &ExactRankDistribution, utils: &[Margin]) -> Margin {
    utils
        .iter()
        .enumerate()
        .map(|(k, u)| d.prob_signed(k) * u)
        .fold(r(0, 1), |a, b| a + b)
}

#[test]
fn threshold_separates_expected_utilities() {
    let opts = ExactOptions::default();
    let tcdm = exact_distribution_at(4, &UNIT4, Mechanism::Tcdm { rounds: 2 }, 4, &opts).unwrap();
    let da = exact_distribution_at(4, &UNIT4, Mechanism::Da, 4, &opts).unwrap();
    let lower = [r(3, 1), r(2, 1), r(1, 1)];
    let u1 = corollary1_threshold(&tcdm, &da, &lower).unwrap();
    assert!(u1 > r(3, 1));
    let eps = r(1, 1000);
    for (u, tcdm_wins) in [(u1 - eps, false), (u1, true), (u1 + eps, true)] {
        let utils = [u, lower[0], lower[1], lower[2], r(0, 1)];
        let (et, ed) = (expected_utility(&tcdm, &utils), expected_utility(&da, &utils));
        assert_eq!(et >= ed, tcdm_wins, "u1 = {u}");
    }
    assert!(et_eq(&tcdm, &da, u1, &lower));

    assert_eq!(corollary1_threshold(&tcdm, &da, &[r(0, 1); 3]).unwrap(), r(0, 1));

    let t3 = exact_distribution_at(4, &UNIT4, Mechanism::Tcdm { rounds: 2 }, 3, &opts).unwrap();
    let d3 = exact_distribution_at(4, &UNIT4, Mechanism::Da, 3, &opts).unwrap();
    assert!(matches!(
        corollary1_threshold(&t3, &d3, &lower),
        Err(Error::NoFiniteThreshold)
    ));
}

fn et_eq(tcdm: &ExactRankDistribution, da: &ExactRankDistribution, u1: Margin, lower: &[Margin]) -> bool {
    let utils = [u1, lower[0], lower[1], lower[2], r(0, 1)];
    expected_utility(tcdm, &utils) == expected_utility(da, &utils)
}

fn three_sigma(p: f64, sims: usize) -> f64 {
    3.0 * (p * (1.0 - p) / sims as f64).sqrt()
}

#[test]
fn independent_utilities_agree_with_enumeration() {
    let cfg = CorrelatedUtilityConfig {
        delta: 0.0,
        num_sims: 2000,
        seed: 20180619,
    };
    let mc = monte_carlo_correlated(4, &UNIT4, 2, &cfg).unwrap();
    let opts = ExactOptions::default();
    let exact_t = exact_distribution(4, &UNIT4, Mechanism::Tcdm { rounds: 2 }, &opts).unwrap();
    let exact_d = exact_distribution(4, &UNIT4, Mechanism::Da, &opts).unwrap();
    for (est, exact) in [(mc.tcdm(), exact_t), (mc.da(), exact_d)] {
        for (e, x) in est.iter().zip(&exact) {
            for (k, (&got, want)) in e.probs.iter().zip(x.to_float().probs).enumerate() {
                let band = three_sigma(want, cfg.num_sims);
                assert!(
                    (got - want).abs() <= band,
                    "position {} outcome {k}: {got} vs {want}",
                    e.position
                );
            }
        }
    }
}

#[test]
fn common_values_leave_the_constrained_unassigned() {
    let cfg = CorrelatedUtilityConfig {
        delta: 1.0,
        num_sims: 2000,
        seed: 5,
    };
    let mc = monte_carlo_correlated(4, &UNIT4, 2, &cfg).unwrap();
    let t = mc.tcdm();
    assert_eq!(t[2].unassigned(), 1.0);
    assert_eq!(t[3].unassigned(), 1.0);
    assert_eq!(mc.da()[3].unassigned(), 0.0);
}

#[test]
fn da_cdf_dominates_for_position_three() {
    for delta in [0.2, 0.4, 0.6, 0.8] {
        let cfg = CorrelatedUtilityConfig {
            delta,
            num_sims: 2000,
            seed: 7,
        };
        let mc = monte_carlo_correlated(4, &UNIT4, 2, &cfg).unwrap();
        let (t, d) = (mc.tcdm()[2].cdf(), mc.da()[2].cdf());
        for k in 0..4 {
            assert!(
                d[k] >= t[k] - 1e-12,
                "delta {delta} rank {}: DA {} < TCDM {}",
                k + 1,
                d[k],
                t[k]
            );
        }
    }
}
