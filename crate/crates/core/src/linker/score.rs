use std::collections::{BTreeMap, HashMap};

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use pathfinding::undirected::connected_components::components;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::imsim::GroundTruth;
use crate::linker::link::{LinkKey, LinkRule, LinkageResult, RowLoc};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RuleAccuracy {
    pub rule: LinkRule,
    pub links: usize,
    pub correct: usize,
}

/// Evaluation of a linkage against hidden ids. Precision with nothing
/// predicted and recall with nothing to find are reported as 1.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LinkageScore {
    pub rows: usize,
    pub inferred_ids: usize,
    pub true_ids: usize,
    pub new_id_count: usize,
    /// Consecutive-hour row pairs given the same id.
    pub inferred_links: usize,
    pub true_links: usize,
    pub correct_links: usize,
    pub link_precision: f64,
    pub link_recall: f64,
    /// Links whose two rows sit at different universities.
    pub inferred_change_events: usize,
    pub true_change_events: usize,
    pub correct_change_events: usize,
    pub change_precision: f64,
    pub change_recall: f64,
    pub per_rule: Vec<RuleAccuracy>,
    pub frozen_accuracy: f64,
    /// Frozen links whose key is unique within the university-hour.
    pub frozen_unique_key_links: usize,
    pub frozen_unique_key_correct: usize,
    /// Rows whose inferred id maps to their true id under the best
    /// one-to-one relabeling.
    pub aligned_rows: usize,
    pub aligned_accuracy: f64,
    /// Same-key group size within a university-hour -> number of groups.
    pub collision_histogram: BTreeMap<usize, usize>,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

pub fn score_linkage(result: &LinkageResult, truth: &GroundTruth) -> Result<LinkageScore> {
    check_shape(result, truth)?;
    let num_hours = result.rows.len();
    let true_loc: Vec<HashMap<u32, RowLoc>> = truth
        .ids
        .iter()
        .map(|hour| {
            hour.iter()
                .enumerate()
                .flat_map(|(u, ids)| {
                    ids.iter()
                        .enumerate()
                        .map(move |(r, &id)| (id, RowLoc { university: u, row: r }))
                })
                .collect()
        })
        .collect();

    let mut per_rule: BTreeMap<LinkRule, (usize, usize)> = LinkRule::ALL.iter().map(|&r| (r, (0, 0))).collect();
    let (mut inferred_links, mut true_links, mut correct_links) = (0, 0, 0);
    let (mut inferred_changes, mut true_changes, mut correct_changes) = (0, 0, 0);
    let (mut unique_frozen, mut unique_frozen_correct) = (0, 0);
    let mut collision_histogram = BTreeMap::new();

    for h in 0..num_hours {
        for (u, rows) in result.rows[h].iter().enumerate() {
            let mut key_counts: HashMap<LinkKey, usize> = HashMap::new();
            for row in rows {
                *key_counts.entry(row.key).or_default() += 1;
            }
            for &size in key_counts.values() {
                *collision_histogram.entry(size).or_insert(0) += 1;
            }
            if h + 1 == num_hours {
                continue;
            }
            for (r, row) in rows.iter().enumerate() {
                let tid = truth.ids[h][u][r];
                let true_next = true_loc[h + 1].get(&tid).copied();
                if let Some(next) = true_next {
                    true_links += 1;
                    true_changes += usize::from(next.university != u);
                }
                let correct = match row.successor {
                    Some(next) => {
                        inferred_links += 1;
                        let moved = next.university != u;
                        inferred_changes += usize::from(moved);
                        let ok = truth.ids[h + 1][next.university][next.row] == tid;
                        correct_links += usize::from(ok);
                        correct_changes += usize::from(ok && moved);
                        ok
                    }
                    None => true_next.is_none(),
                };
                let entry = per_rule.get_mut(&row.rule).expect("all rules present");
                entry.0 += 1;
                entry.1 += usize::from(correct);
                if row.rule == LinkRule::FrozenCarry && key_counts[&row.key] == 1 {
                    unique_frozen += 1;
                    unique_frozen_correct += usize::from(correct);
                }
            }
        }
    }

    let rows: usize = result.rows.iter().flatten().map(Vec::len).sum();
    let aligned_rows = aligned_agreement(result, truth);
    let mut true_ids: Vec<u32> = truth.ids.iter().flatten().flatten().copied().collect();
    true_ids.sort_unstable();
    true_ids.dedup();
    let frozen = per_rule[&LinkRule::FrozenCarry];
    Ok(LinkageScore {
        rows,
        inferred_ids: result.num_ids(),
        true_ids: true_ids.len(),
        new_id_count: result.new_id_count,
        inferred_links,
        true_links,
        correct_links,
        link_precision: ratio(correct_links, inferred_links),
        link_recall: ratio(correct_links, true_links),
        inferred_change_events: inferred_changes,
        true_change_events: true_changes,
        correct_change_events: correct_changes,
        change_precision: ratio(correct_changes, inferred_changes),
        change_recall: ratio(correct_changes, true_changes),
        per_rule: per_rule
            .into_iter()
            .map(|(rule, (links, correct))| RuleAccuracy { rule, links, correct })
            .collect(),
        frozen_accuracy: ratio(frozen.1, frozen.0),
        frozen_unique_key_links: unique_frozen,
        frozen_unique_key_correct: unique_frozen_correct,
        aligned_rows,
        aligned_accuracy: ratio(aligned_rows, rows),
        collision_histogram,
    })
}

fn check_shape(result: &LinkageResult, truth: &GroundTruth) -> Result<()> {
    if truth.ids.len() != result.rows.len() {
        return Err(Error::TruthMismatch(format!(
            "{} hours of truth for {} linked hours",
            truth.ids.len(),
            result.rows.len()
        )));
    }
    for (h, (t, r)) in truth.ids.iter().zip(&result.rows).enumerate() {
        let t_sizes: Vec<usize> = t.iter().map(Vec::len).collect();
        let r_sizes: Vec<usize> = r.iter().map(Vec::len).collect();
        if t_sizes != r_sizes {
            return Err(Error::TruthMismatch(format!("row counts differ at hour index {h}")));
        }
    }
    Ok(())
}

/// Largest number of rows explained by a one-to-one map from inferred to
/// true ids, solved per connected component of the co-occurrence graph.
fn aligned_agreement(result: &LinkageResult, truth: &GroundTruth) -> usize {
    #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
    enum Node {
        Inferred(u32),
        True(u32),
    }
    let mut weight: HashMap<(u32, u32), i64> = HashMap::new();
    for (lh, th) in result.rows.iter().zip(&truth.ids) {
        for (lu, tu) in lh.iter().zip(th) {
            for (row, &tid) in lu.iter().zip(tu) {
                *weight.entry((row.id, tid)).or_default() += 1;
            }
        }
    }
    let edges: Vec<Vec<Node>> = weight
        .keys()
        .map(|&(i, t)| vec![Node::Inferred(i), Node::True(t)])
        .collect();
    let mut total = 0i64;
    for comp in components(&edges) {
        let mut inferred: Vec<u32> = Vec::new();
        let mut truths: Vec<u32> = Vec::new();
        for node in comp {
            match node {
                Node::Inferred(i) => inferred.push(i),
                Node::True(t) => truths.push(t),
            }
        }
        if inferred.len() == 1 || truths.len() == 1 {
            let best = inferred
                .iter()
                .flat_map(|&i| truths.iter().map(move |&t| (i, t)))
                .filter_map(|k| weight.get(&k))
                .max();
            total += best.copied().unwrap_or(0);
            continue;
        }
        let transpose = inferred.len() > truths.len();
        let (rows, cols) = if transpose {
            (&truths, &inferred)
        } else {
            (&inferred, &truths)
        };
        let mut m = Matrix::new(rows.len(), cols.len(), 0i64);
        for (a, &x) in rows.iter().enumerate() {
            for (b, &y) in cols.iter().enumerate() {
                let key = if transpose { (y, x) } else { (x, y) };
                m[(a, b)] = weight.get(&key).copied().unwrap_or(0);
            }
        }
        total += kuhn_munkres(&m).0;
    }
    total as usize
}
