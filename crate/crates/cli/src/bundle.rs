//! The reproduction bundle: every artifact rendered to bytes in memory, then
//! written by a single writer per file.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use matchlab_core::exante::{check_prop4, check_prop5, ExactOptions, MonteCarloResult, Prop4Report, Prop5Report};
use matchlab_core::fixtures::{example1, example1_variant};
use matchlab_core::imsim::{
    build_snapshots, compute_metrics, generate_population, run_clearinghouse, BatchSchedule, ClearinghouseConfig,
    OutcomeMetrics, PopulationConfig,
};
use matchlab_core::linker::{link_snapshots, score_linkage, LinkageScore};
use matchlab_core::{run_da, run_tcdm, ProblemInstance, RoundBudget};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::checks::{self, CheckResult};
use crate::tables;

pub const CHECKS_FILE: &str = "checks.txt";

/// Demo cohort outcome: default population, staggered schedule, demo
/// revision probability, all seeded from one value.
#[derive(Clone, Debug)]
pub struct Demo {
    pub seed: u64,
    pub population: PopulationConfig,
    pub schedule: BatchSchedule,
    pub clearinghouse: ClearinghouseConfig,
    pub metrics: OutcomeMetrics,
    pub score: LinkageScore,
}

pub fn run_demo(seed: u64) -> Result<Demo> {
    let population = PopulationConfig::default();
    let schedule = BatchSchedule::default_staggered();
    let clearinghouse = ClearinghouseConfig::demo(seed);
    let pop = generate_population(&population, seed)?;
    let run = run_clearinghouse(&pop, &schedule, &clearinghouse)?;
    let metrics = compute_metrics(&pop, &schedule, &run);
    let (set, truth) = build_snapshots(&pop, &run);
    let score = score_linkage(&link_snapshots(&set, &schedule), &truth)?;
    Ok(Demo {
        seed,
        population,
        schedule,
        clearinghouse,
        metrics,
        score,
    })
}

/// Everything the bundle files are rendered from.
#[derive(Clone, Debug)]
pub struct Artifacts {
    pub seed: u64,
    /// TCDM with budgets 1..=4 and DA for n = m = 4, unit capacities; its
    /// second budget is the TCDM block of `table2.csv`.
    pub sweep: Prop5Report,
    pub comparisons: Vec<Prop4Report>,
    pub correlated: Vec<MonteCarloResult>,
    pub demo: Demo,
}

impl Artifacts {
    pub fn compute(seed: u64) -> Result<Self> {
        let opts = ExactOptions::default();
        let (exact, simulated) = rayon::join(
            || -> Result<_> {
                let sweep = check_prop5(4, &[1, 1, 1, 1], 4, &opts)?;
                let comparisons = checks::comparison_configs()
                    .into_par_iter()
                    .map(|(n, caps, t)| check_prop4(n, &caps, t, &opts))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((sweep, comparisons))
            },
            || -> Result<_> {
                let grid = checks::CORRELATED_DELTAS
                    .iter()
                    .map(|&d| checks::correlated_run(d, seed))
                    .collect();
                Ok((grid, run_demo(seed)?))
            },
        );
        let ((sweep, comparisons), (correlated, demo)) = (exact?, simulated?);
        Ok(Self {
            seed,
            sweep,
            comparisons,
            correlated,
            demo,
        })
    }

    pub fn table2_tcdm(&self) -> &[matchlab_core::exante::ExactRankDistribution] {
        &self.sweep.by_round[1]
    }

    pub fn table2_da(&self) -> &[matchlab_core::exante::ExactRankDistribution] {
        &self.sweep.da
    }

    /// Files in name order; `checks.txt` is added by [`reproduce`].
    pub fn render(&self) -> Result<BTreeMap<String, Vec<u8>>> {
        let mut files = BTreeMap::new();
        let mut put_json = |name: &str, value: &Value| -> Result<()> {
            let mut bytes = serde_json::to_vec_pretty(value)?;
            bytes.push(b'\n');
            files.insert(name.to_owned(), bytes);
            Ok(())
        };
        put_json("example1_trajectories.json", &example1_json())?;
        put_json("prop4_report.json", &serde_json::to_value(&self.comparisons)?)?;
        put_json("prop5_report.json", &serde_json::to_value(&self.sweep)?)?;
        let jumps: Vec<Value> = checks::deadline_jumps(&self.demo.metrics, &self.demo.schedule)
            .into_iter()
            .map(|(b, d, before, at)| json!({"batch": b, "deadline_hour": d, "rate_hour_before": before, "rate_at_deadline": at}))
            .collect();
        put_json(
            "imsim_demo_metrics.json",
            &json!({
                "seed": self.demo.seed,
                "population": self.demo.population,
                "schedule": self.demo.schedule,
                "clearinghouse": self.demo.clearinghouse,
                "metrics": self.demo.metrics,
                "deadline_jumps": jumps,
            }),
        )?;
        put_json(
            "linkage_score.json",
            &json!({"seed": self.demo.seed, "score": self.demo.score}),
        )?;
        files.insert(
            "table2.csv".to_owned(),
            tables::table2_csv(self.table2_tcdm(), self.table2_da(), 2)?,
        );
        files.insert("appendixC_cdfs.csv".to_owned(), tables::cdf_csv(&self.correlated)?);
        Ok(files)
    }
}

fn mechanism_pair(inst: &ProblemInstance) -> Value {
    json!({
        "instance": inst.to_json_value(),
        "tcdm": run_tcdm(inst, RoundBudget::Limited(2)).to_json(inst),
        "da": run_da(inst).to_json(inst),
    })
}

fn example1_json() -> Value {
    json!({
        "example1": mechanism_pair(&example1()),
        "example1_variant": mechanism_pair(&example1_variant()),
    })
}

pub const RANDOM_INSTANCES: usize = 1000;
pub const REDUCTION_CONFIGS: usize = 100;

/// Seeded cohorts of criterion 9, the first of which is the demo cohort.
pub fn linker_scores(seed: u64) -> Result<Vec<LinkageScore>> {
    (0..checks::LINKER_SEEDS)
        .into_par_iter()
        .map(|k| Ok(run_demo(seed.wrapping_add(k))?.score))
        .collect()
}

/// Criteria 1 through 10 on computed artifacts.
pub fn evaluate(artifacts: &Artifacts, linker: &[LinkageScore]) -> Vec<CheckResult> {
    let seed = artifacts.seed;
    let zero = checks::correlated_run(0.0, seed);
    vec![
        checks::rank_table(artifacts.table2_tcdm(), artifacts.table2_da()),
        checks::worked_example(),
        checks::unbounded_equals_da(seed, RANDOM_INSTANCES),
        checks::winners_explained(seed.wrapping_add(1), RANDOM_INSTANCES),
        checks::tcdm_vs_da(&artifacts.comparisons),
        checks::budget_sweep(&artifacts.sweep),
        checks::correlated(
            &artifacts.correlated,
            &zero,
            artifacts.table2_tcdm(),
            artifacts.table2_da(),
        ),
        checks::clearinghouse_reduction(seed, REDUCTION_CONFIGS),
        checks::linker(linker),
        checks::deadline_jump(&artifacts.demo.metrics, &artifacts.demo.schedule),
    ]
}

#[derive(Clone, Debug)]
pub struct Reproduction {
    pub files: BTreeMap<String, Vec<u8>>,
    pub checks: Vec<CheckResult>,
}

impl Reproduction {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        }
        Ok(())
    }
}

/// Computes the bundle twice to check determinism, evaluates every
/// criterion and adds `checks.txt`.
pub fn reproduce(seed: u64) -> Result<Reproduction> {
    let (first, second) = rayon::join(|| Artifacts::compute(seed), || Artifacts::compute(seed));
    let (first, second) = (first?, second?);
    let mut files = first.render()?;
    let again = second.render()?;
    let linker = linker_scores(seed)?;
    let mut checks = evaluate(&first, &linker);
    checks.push(checks::determinism(
        files.iter().map(|(k, v)| (k.as_str(), v.as_slice())),
        again.iter().map(|(k, v)| (k.as_str(), v.as_slice())),
    ));
    let mut text = format!("seed {seed}\n");
    for c in &checks {
        text.push_str(&c.to_string());
        text.push('\n');
    }
    text.push_str(&format!(
        "informational: {}\n",
        checks::rank_table_fine(first.table2_tcdm())
    ));
    files.insert(CHECKS_FILE.to_owned(), text.into_bytes());
    Ok(Reproduction { files, checks })
}
