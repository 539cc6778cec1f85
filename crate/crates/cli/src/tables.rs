//! CSV renderings of rank distributions.

use anyhow::Result;
use matchlab_core::exante::{ratio_string, ExactRankDistribution, MonteCarloResult, RankDistribution};

/// Outcome labels over `[rank 1 … rank m, unassigned]`.
pub fn outcome_label(slot: usize, m: usize) -> String {
    if slot == m {
        "unassigned".to_owned()
    } else {
        format!("rank{}", slot + 1)
    }
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>> {
    w.into_inner().map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
}

/// `position,outcome,exact,probability` for one mechanism.
pub fn exact_csv(dists: &[ExactRankDistribution]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["position", "outcome", "exact", "probability"])?;
    for d in dists {
        let m = d.num_ranks();
        for (slot, p) in d.to_float().probs.into_iter().enumerate() {
            w.write_record([
                d.position.to_string(),
                outcome_label(slot, m),
                ratio_string(&d.prob(slot)),
                format!("{p:.6}"),
            ])?;
        }
    }
    finish(w)
}

/// Table of both mechanisms with exact, six-decimal and two-decimal values.
pub fn table2_csv(tcdm: &[ExactRankDistribution], da: &[ExactRankDistribution], rounds: u32) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mechanism", "position", "outcome", "exact", "decimal", "rounded"])?;
    let tcdm_name = format!("tcdm_t{rounds}");
    for (name, dists) in [(tcdm_name.as_str(), tcdm), ("da", da)] {
        for d in dists {
            let m = d.num_ranks();
            for (slot, p) in d.to_float().probs.into_iter().enumerate() {
                w.write_record([
                    name.to_owned(),
                    d.position.to_string(),
                    outcome_label(slot, m),
                    ratio_string(&d.prob(slot)),
                    format!("{p:.6}"),
                    format!("{p:.2}"),
                ])?;
            }
        }
    }
    finish(w)
}

fn write_cdf_rows(w: &mut csv::Writer<Vec<u8>>, delta: f64, mechanism: &str, dists: &[RankDistribution]) -> Result<()> {
    for d in dists {
        let m = d.probs.len() - 1;
        for (slot, (p, c)) in d.probs.iter().zip(d.cdf()).enumerate() {
            w.write_record([
                format!("{delta:.1}"),
                mechanism.to_owned(),
                d.position.to_string(),
                outcome_label(slot, m),
                format!("{p:.6}"),
                format!("{c:.6}"),
            ])?;
        }
    }
    Ok(())
}

/// `delta,mechanism,position,outcome,probability,cdf`, one block per run.
pub fn cdf_csv(runs: &[MonteCarloResult]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["delta", "mechanism", "position", "outcome", "probability", "cdf"])?;
    for run in runs {
        write_cdf_rows(&mut w, run.delta, &format!("tcdm_t{}", run.rounds), &run.tcdm())?;
        write_cdf_rows(&mut w, run.delta, "da", &run.da())?;
    }
    finish(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_table_lists_every_outcome() {
        let d = ExactRankDistribution {
            position: 1,
            counts: vec![3, 1, 0],
            total: 4,
        };
        let text = String::from_utf8(exact_csv(&[d]).unwrap()).unwrap();
        assert_eq!(
            text,
            "position,outcome,exact,probability\n1,rank1,3/4,0.750000\n1,rank2,1/4,0.250000\n1,unassigned,0,0.000000\n"
        );
    }

    #[test]
    fn cdf_ends_at_one() {
        let run = MonteCarloResult {
            delta: 0.5,
            num_sims: 2,
            rounds: 1,
            tcdm_counts: vec![vec![1, 0, 1]],
            da_counts: vec![vec![1, 1, 0]],
        };
        let text = String::from_utf8(cdf_csv(&[run]).unwrap()).unwrap();
        let last = text.lines().last().unwrap();
        assert_eq!(last, "0.5,da,1,unassigned,0.000000,1.000000");
    }
}
