//! Pass/fail evaluation of the acceptance criteria. Each function owns one
//! criterion; none of them measure time, so results are reproducible.

use std::fmt;

use matchlab_core::exante::{
    monte_carlo_correlated, CorrelatedUtilityConfig, ExactRankDistribution, FirstChoiceDirection, MonteCarloResult,
    Prop4Report, Prop5Report,
};
use matchlab_core::fixtures::example1;
use matchlab_core::imsim::{run_clearinghouse, BatchSchedule, ClearinghouseConfig, OutcomeMetrics, Population};
use matchlab_core::linker::LinkageScore;
use matchlab_core::{
    audit_stability, random_instance, run_da, run_tcdm, unexplained_winners, CollegeId, RandomShape, RoundBudget,
    StudentId,
};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Two-decimal reference values for n = m = 4, unit capacities:
/// `[position][rank 1..4, unassigned]`.
pub const REFERENCE_TCDM_T2: [[f64; 5]; 4] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.75, 0.25, 0.0, 0.0, 0.0],
    [0.5, 0.29, 0.12, 0.0, 0.09],
    [0.27, 0.20, 0.15, 0.09, 0.29],
];
pub const REFERENCE_DA: [[f64; 5]; 4] = [
    [1.0, 0.0, 0.0, 0.0, 0.0],
    [0.75, 0.25, 0.0, 0.0, 0.0],
    [0.5, 0.33, 0.17, 0.0, 0.0],
    [0.25, 0.25, 0.25, 0.25, 0.0],
];
/// Three-decimal reference values for the two lower TCDM rows.
pub const REFERENCE_TCDM_T2_FINE: [[f64; 5]; 2] =
    [[0.5, 0.292, 0.125, 0.0, 0.083], [0.271, 0.205, 0.146, 0.094, 0.285]];

pub const REFERENCE_TOLERANCE: f64 = 0.005;
/// Round-off slack on top of the stated tolerances.
const EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(id: u8, name: &'static str, failures: Vec<String>, summary: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed {
            summary
        } else {
            format!("{summary}; {}", failures.join("; "))
        };
        Self {
            id,
            name,
            passed,
            detail,
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {:>2} {verdict} {}: {}", self.id, self.name, self.detail)
    }
}

fn cell_mismatches(
    label: &str,
    dists: &[ExactRankDistribution],
    reference: &[[f64; 5]],
    first_position: usize,
    tolerance: f64,
) -> Vec<String> {
    let mut out = Vec::new();
    for (k, row) in reference.iter().enumerate() {
        let d = &dists[first_position - 1 + k];
        for (slot, (&want, got)) in row.iter().zip(d.to_float().probs).enumerate() {
            if (got - want).abs() > tolerance + EPS {
                out.push(format!(
                    "{label} p{} slot {} is {} ({got:.4}), reference {want}",
                    d.position,
                    slot + 1,
                    matchlab_core::exante::ratio_string(&d.prob(slot))
                ));
            }
        }
    }
    out
}

/// Criterion 1 on the values alone; the runtime bound is measured by the
/// acceptance harness.
pub fn rank_table(tcdm: &[ExactRankDistribution], da: &[ExactRankDistribution]) -> CheckResult {
    let mut failures = cell_mismatches("TCDM(T=2)", tcdm, &REFERENCE_TCDM_T2, 1, REFERENCE_TOLERANCE);
    failures.extend(cell_mismatches("DA", da, &REFERENCE_DA, 1, REFERENCE_TOLERANCE));
    let quarter = Ratio::new(1u64, 4);
    let uniform = (0..4).all(|k| da[3].prob(k) == quarter) && da[3].counts[4] == 0;
    if !uniform {
        failures.push(format!("DA p4 is {:?}, not uniform", da[3].fractions()));
    }
    CheckResult::new(
        1,
        "exact rank table within two-decimal rounding",
        failures,
        "32 printed cells compared".into(),
    )
}

/// The three-decimal comparison, reported but not part of any criterion.
pub fn rank_table_fine(tcdm: &[ExactRankDistribution]) -> CheckResult {
    let failures = cell_mismatches("TCDM(T=2)", tcdm, &REFERENCE_TCDM_T2_FINE, 3, 0.0005);
    CheckResult::new(
        1,
        "rank table lower rows within three-decimal rounding",
        failures,
        "10 cells compared".into(),
    )
}

/// Criterion 2.
pub fn worked_example() -> CheckResult {
    let inst = example1();
    let c = |k: usize| Some(CollegeId(k));
    let tcdm = run_tcdm(&inst, RoundBudget::Limited(2)).final_matching;
    let da = run_da(&inst);
    let mut failures = Vec::new();
    if tcdm.as_slice() != [c(0), c(1), None, c(2)] {
        failures.push(format!("TCDM(T=2) gave {:?}", tcdm.as_slice()));
    }
    if da.as_slice() != [c(0), c(1), c(2), c(3)] {
        failures.push(format!("DA gave {:?}", da.as_slice()));
    }
    let i4 = StudentId(3);
    let prefs = inst.preferences(i4);
    let (rank_tcdm, rank_da) = (prefs.rank_of(tcdm.get(i4)), prefs.rank_of(da.get(i4)));
    // zero-based ranks: first choice under TCDM, second under DA
    if (rank_tcdm, rank_da) != (0, 1) {
        failures.push(format!(
            "i4 gets choice {} under TCDM and {} under DA",
            rank_tcdm + 1,
            rank_da + 1
        ));
    }
    CheckResult::new(
        2,
        "worked-example matchings and the i4 comparison",
        failures,
        "four-student worked example".into(),
    )
}

/// Criterion 3: unbounded TCDM terminates at DA, which is stable.
pub fn unbounded_equals_da(seed: u64, instances: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for k in 0..instances {
        let inst = random_instance(&mut rng, RandomShape::default());
        let traj = run_tcdm(&inst, RoundBudget::Unbounded);
        let da = run_da(&inst);
        let audit = audit_stability(&inst, &traj.final_matching).expect("matching from the engine is valid");
        if !traj.converged || traj.final_matching != da || !audit.is_stable {
            failures.push(format!("instance {k}"));
        }
    }
    let summary = format!("{instances} random instances, {} failures", failures.len());
    CheckResult::new(3, "unbounded TCDM equals DA and is stable", failures, summary)
}

/// Criterion 4: anyone better off under TCDM sits below an unassigned student.
pub fn winners_explained(seed: u64, instances: usize) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = Vec::new();
    for k in 0..instances {
        let inst = random_instance(&mut rng, RandomShape::default());
        let rounds = 1 + (k % 3) as u32;
        let tcdm = run_tcdm(&inst, RoundBudget::Limited(rounds)).final_matching;
        let da = run_da(&inst);
        let unexplained = unexplained_winners(&inst, &tcdm, &da).expect("matchings fit the instance");
        if !unexplained.is_empty() {
            failures.push(format!("instance {k} with T={rounds}: {unexplained:?}"));
        }
    }
    let summary = format!(
        "{instances} random instances with T in 1..=3, {} violations",
        failures.len()
    );
    CheckResult::new(
        4,
        "TCDM winners are explained by unassigned students above",
        failures,
        summary,
    )
}

/// Configurations of criterion 5 as `(n, capacities, rounds)`.
pub fn comparison_configs() -> Vec<(usize, Vec<u32>, u32)> {
    vec![
        (3, vec![1, 1, 1], 1),
        (4, vec![1, 1, 1, 1], 1),
        (4, vec![1, 1, 1, 1], 2),
        (4, vec![1, 1, 1, 1], 3),
        (4, vec![2, 1, 1], 1),
    ]
}

/// Criterion 5.
pub fn tcdm_vs_da(reports: &[Prop4Report]) -> CheckResult {
    let failures = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| format!("n={} caps={:?} T={}: {:?}", r.n, r.capacities, r.rounds, r.violations))
        .collect();
    let summary = format!("{} configurations, all four clauses", reports.len());
    CheckResult::new(5, "exact TCDM vs DA comparison", failures, summary)
}

/// Criterion 6.
pub fn budget_sweep(report: &Prop5Report) -> CheckResult {
    let mut failures: Vec<String> = report.violations.iter().map(|v| format!("{v:?}")).collect();
    for p in report.positions.iter().filter(|p| !p.equals_da_at_max) {
        failures.push(format!(
            "position {} differs from DA at T={}",
            p.position, report.max_rounds
        ));
    }
    if report.first_choice_direction != FirstChoiceDirection::Decreasing {
        failures.push(format!("first-choice direction is {:?}", report.first_choice_direction));
    }
    let summary = format!(
        "T=1..={}, first-choice probability direction {:?}",
        report.max_rounds, report.first_choice_direction
    );
    CheckResult::new(6, "round-budget sweep", failures, summary)
}

pub const CORRELATED_DELTAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];
pub const CORRELATED_SIMS: usize = 2000;
pub const CORRELATED_ROUNDS: u32 = 2;

pub fn correlated_run(delta: f64, seed: u64) -> MonteCarloResult {
    let cfg = CorrelatedUtilityConfig {
        delta,
        num_sims: CORRELATED_SIMS,
        seed,
    };
    monte_carlo_correlated(4, &[1, 1, 1, 1], CORRELATED_ROUNDS, &cfg).expect("fixed configuration is valid")
}

fn outside_band(label: &str, counts: &[Vec<u64>], exact: &[ExactRankDistribution], sims: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (c, e) in counts.iter().zip(exact) {
        for (slot, (&k, p)) in c.iter().zip(e.to_float().probs).enumerate() {
            let est = k as f64 / sims as f64;
            let sigma = (p * (1.0 - p) / sims as f64).sqrt();
            if (est - p).abs() > 3.0 * sigma + EPS {
                out.push(format!(
                    "delta=0 {label} p{} slot {}: {est:.4} vs {p:.4}",
                    e.position,
                    slot + 1
                ));
            }
        }
    }
    out
}

/// Criterion 7. `grid` holds the runs for [`CORRELATED_DELTAS`]; `zero` is
/// the independent-preferences run checked against the exact oracle.
pub fn correlated(
    grid: &[MonteCarloResult],
    zero: &MonteCarloResult,
    exact_tcdm: &[ExactRankDistribution],
    exact_da: &[ExactRankDistribution],
) -> CheckResult {
    let mut failures = Vec::new();
    for run in grid.iter().filter(|r| r.delta == 1.0) {
        for p in [3usize, 4] {
            let unassigned = run.tcdm()[p - 1].unassigned();
            if unassigned != 1.0 {
                failures.push(format!("delta=1 p{p} unassigned {unassigned}"));
            }
        }
    }
    failures.extend(outside_band("TCDM", &zero.tcdm_counts, exact_tcdm, zero.num_sims));
    failures.extend(outside_band("DA", &zero.da_counts, exact_da, zero.num_sims));
    for run in grid.iter().filter(|r| r.delta < 1.0) {
        let (t, d) = (run.tcdm()[2].cdf(), run.da()[2].cdf());
        for rank in 0..4 {
            if d[rank] + EPS < t[rank] {
                failures.push(format!(
                    "delta={} p3 CDF at rank {}: DA {:.4} < TCDM {:.4}",
                    run.delta,
                    rank + 1,
                    d[rank],
                    t[rank]
                ));
            }
        }
    }
    let summary = format!("{} sims per delta", zero.num_sims);
    CheckResult::new(7, "correlated-preference simulations", failures, summary)
}

/// Criterion 8: with every hour granted and a single band, the clearinghouse
/// ends at the TCDM matching with the same number of rounds.
pub fn clearinghouse_reduction(seed: u64, configs: usize) -> CheckResult {
    let mut failures = Vec::new();
    let shape = RandomShape::default();
    for k in 0..configs as u64 {
        let s = seed.wrapping_add(k);
        let inst = random_instance(&mut ChaCha8Rng::seed_from_u64(s), shape);
        let rounds = 1 + (k % 3) as u32;
        let pop = Population::from_instance(&inst).expect("random instances have integer scores");
        let schedule = BatchSchedule::single_batch(rounds).expect("positive round count");
        let config = ClearinghouseConfig {
            seed: s,
            ..ClearinghouseConfig::default()
        };
        let run = run_clearinghouse(&pop, &schedule, &config).expect("valid configuration");
        let tcdm = run_tcdm(&inst, RoundBudget::Limited(rounds)).final_matching;
        let clearing: Vec<Option<CollegeId>> = run.final_assignment.iter().map(|u| u.map(|u| CollegeId(u.0))).collect();
        if clearing != tcdm.as_slice() {
            failures.push(format!("config {k}"));
        }
    }
    let summary = format!("{configs} configurations, {} divergences", failures.len());
    CheckResult::new(8, "clearinghouse reduces to TCDM", failures, summary)
}

pub const LINKER_SEEDS: u64 = 20;
pub const LINKER_TARGET: f64 = 0.95;

/// Criterion 9 over one linkage score per seeded cohort.
pub fn linker(scores: &[LinkageScore]) -> CheckResult {
    let mut failures = Vec::new();
    let (mut unique, mut unique_ok) = (0, 0);
    let (mut inferred, mut truth, mut correct) = (0, 0, 0);
    let mut bounded = 0;
    for s in scores {
        unique += s.frozen_unique_key_links;
        unique_ok += s.frozen_unique_key_correct;
        inferred += s.inferred_links;
        truth += s.true_links;
        correct += s.correct_links;
        bounded += usize::from(s.inferred_change_events <= s.true_change_events);
    }
    let precision = correct as f64 / inferred.max(1) as f64;
    let recall = correct as f64 / truth.max(1) as f64;
    if unique_ok != unique {
        failures.push(format!("unique-key frozen links {unique_ok}/{unique} correct"));
    }
    if precision < LINKER_TARGET || recall < LINKER_TARGET {
        failures.push(format!(
            "id precision {precision:.4}, recall {recall:.4} below {LINKER_TARGET}"
        ));
    }
    if (bounded as f64) < 0.95 * scores.len() as f64 {
        failures.push(format!(
            "change-event lower bound held on {bounded}/{} seeds",
            scores.len()
        ));
    }
    let summary = format!(
        "{} cohorts, frozen unique-key {unique_ok}/{unique}, precision {precision:.4}, recall {recall:.4}, lower bound {bounded}/{}",
        scores.len(),
        scores.len()
    );
    CheckResult::new(9, "snapshot linkage", failures, summary)
}

/// Tentative-assignment rate of batch `b` at the hour before and the hour
/// of its own deadline, for every batch after the first.
pub fn deadline_jumps(metrics: &OutcomeMetrics, schedule: &BatchSchedule) -> Vec<(usize, u32, f64, f64)> {
    (1..schedule.num_batches())
        .map(|b| {
            let d = schedule.deadline(b);
            let rate = |h| metrics.rate(h, b).unwrap_or(f64::NAN);
            (b + 1, d, rate(d - 1), rate(d))
        })
        .collect()
}

/// Criterion 10.
pub fn deadline_jump(metrics: &OutcomeMetrics, schedule: &BatchSchedule) -> CheckResult {
    let failures = deadline_jumps(metrics, schedule)
        .into_iter()
        .filter(|&(_, _, before, at)| at.partial_cmp(&before) != Some(std::cmp::Ordering::Greater))
        .map(|(b, d, before, at)| format!("batch {b}: {before:.4} at hour {} vs {at:.4} at hour {d}", d - 1))
        .collect();
    let summary = format!("{} batches compared on the demo cohort", schedule.num_batches() - 1);
    CheckResult::new(10, "tentative-assignment jump at each deadline", failures, summary)
}

/// Criterion 11 given two independently rendered bundles.
pub fn determinism<'a>(
    first: impl IntoIterator<Item = (&'a str, &'a [u8])>,
    second: impl IntoIterator<Item = (&'a str, &'a [u8])>,
) -> CheckResult {
    let a: Vec<_> = first.into_iter().collect();
    let b: Vec<_> = second.into_iter().collect();
    let mut failures = Vec::new();
    if a.iter().map(|f| f.0).ne(b.iter().map(|f| f.0)) {
        failures.push("file lists differ".to_owned());
    }
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        if x != y {
            failures.push(format!("{name} differs"));
        }
    }
    let summary = format!("{} files rendered twice", a.len());
    CheckResult::new(11, "byte-identical reruns", failures, summary)
}
