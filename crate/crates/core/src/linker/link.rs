use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::imsim::{ApplicantRow, BatchSchedule, ProgramChoices, SnapshotSet, TableShape};

/// The four published characteristics; rows with equal keys are
/// indistinguishable apart from their program choices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkKey {
    pub score_with_bonus: i32,
    pub score_without_bonus: i32,
    pub gender: u8,
    pub ethnicity: u8,
}

impl LinkKey {
    pub fn of(row: &ApplicantRow) -> Self {
        Self {
            score_with_bonus: row.score_with_bonus,
            score_without_bonus: row.score_without_bonus,
            gender: row.gender,
            ethnicity: row.ethnicity,
        }
    }
}

/// How a row inherited its id from the following hour.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkRule {
    /// Batch already closed at the following hour, so the row cannot have moved.
    FrozenCarry,
    /// Same university, key and program choices.
    Rule1,
    /// Same university and key.
    Rule2,
    /// Same key at another university.
    CrossUniversity,
    /// No candidate left; a new id. Every row of the last hour starts here too.
    Fresh,
}

impl LinkRule {
    pub const ALL: [LinkRule; 5] = [
        LinkRule::FrozenCarry,
        LinkRule::Rule1,
        LinkRule::Rule2,
        LinkRule::CrossUniversity,
        LinkRule::Fresh,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkRule::FrozenCarry => "frozen_carry",
            LinkRule::Rule1 => "rule1",
            LinkRule::Rule2 => "rule2",
            LinkRule::CrossUniversity => "cross_university",
            LinkRule::Fresh => "fresh",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|r| r.name() == s)
    }
}

/// Position of a row within one hour: university index, then row index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RowLoc {
    pub university: usize,
    pub row: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkedRow {
    pub id: u32,
    pub rule: LinkRule,
    pub key: LinkKey,
    pub programs: ProgramChoices,
    /// The row at the following hour carrying the same id.
    pub successor: Option<RowLoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeEvent {
    pub id: u32,
    /// Hour at which the new university is first seen.
    pub hour: u32,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkWarning {
    pub hour: u32,
    pub university: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkageResult {
    pub hours: Vec<u32>,
    pub universities: Vec<String>,
    /// `rows[h][u][row]`, aligned with the snapshot tables.
    pub rows: Vec<Vec<Vec<LinkedRow>>>,
    /// Ids opened before the last hour.
    pub new_id_count: usize,
    pub change_events: Vec<ChangeEvent>,
    pub warnings: Vec<LinkWarning>,
}

impl LinkageResult {
    pub fn shape(&self) -> TableShape {
        TableShape {
            hours: self.hours.clone(),
            universities: self.universities.clone(),
            rows: self.rows.iter().map(|h| h.iter().map(Vec::len).collect()).collect(),
        }
    }

    pub fn ids_at(&self, h: usize) -> impl Iterator<Item = u32> + '_ {
        self.rows[h].iter().flatten().map(|r| r.id)
    }

    pub fn num_ids(&self) -> usize {
        let mut ids: Vec<u32> = self.rows.iter().flatten().flatten().map(|r| r.id).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    }

    /// Rebuilds change events and the fresh-id count from the rows.
    pub fn recount(&mut self) {
        let last = self.rows.len().saturating_sub(1);
        self.new_id_count = self.rows[..last]
            .iter()
            .flatten()
            .flatten()
            .filter(|r| r.rule == LinkRule::Fresh)
            .count();
        self.change_events.clear();
        for h in 0..last {
            for (u, rows) in self.rows[h].iter().enumerate() {
                for r in rows {
                    if let Some(next) = r.successor.filter(|s| s.university != u) {
                        self.change_events.push(ChangeEvent {
                            id: r.id,
                            hour: self.hours[h + 1],
                            from: self.universities[u].clone(),
                            to: self.universities[next.university].clone(),
                        });
                    }
                }
            }
        }
    }
}

/// Hands out candidate rows of one group in data order, skipping rows
/// already claimed through another group.
#[derive(Default)]
struct Queue {
    items: Vec<RowLoc>,
    cursor: usize,
}

impl Queue {
    fn pop(&mut self, used: &[Vec<bool>]) -> Option<RowLoc> {
        while let Some(&loc) = self.items.get(self.cursor) {
            self.cursor += 1;
            if !used[loc.university][loc.row] {
                return Some(loc);
            }
        }
        None
    }

    fn remaining(&self, used: &[Vec<bool>]) -> usize {
        self.items[self.cursor..]
            .iter()
            .filter(|l| !used[l.university][l.row])
            .count()
    }
}

/// Reconstructs trajectories by walking back from the last hour. Rows of
/// the last hour get ids in file order; each earlier hour inherits ids from
/// the hour after it through the rules in [`LinkRule`] order.
pub fn link_snapshots(set: &SnapshotSet, schedule: &BatchSchedule) -> LinkageResult {
    let shape = set.shape();
    let mut warnings = Vec::new();
    for h in &set.hours {
        if h.universities.len() != shape.universities.len() {
            warnings.push(LinkWarning {
                hour: h.hour,
                university: None,
                message: "university list differs from the first hour".into(),
            });
        }
    }
    let mut rows: Vec<Vec<Vec<LinkedRow>>> = set
        .hours
        .iter()
        .map(|h| {
            h.universities
                .iter()
                .map(|u| {
                    u.rows
                        .iter()
                        .map(|r| LinkedRow {
                            id: u32::MAX,
                            rule: LinkRule::Fresh,
                            key: LinkKey::of(r),
                            programs: r.programs.clone(),
                            successor: None,
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let Some(last) = rows.len().checked_sub(1) else {
        return LinkageResult {
            hours: Vec::new(),
            universities: shape.universities,
            rows,
            new_id_count: 0,
            change_events: Vec::new(),
            warnings,
        };
    };

    let mut next_id = 0u32;
    for r in rows[last].iter_mut().flatten() {
        r.id = next_id;
        next_id += 1;
    }
    for h in (0..last).rev() {
        let (earlier, later) = rows.split_at_mut(h + 1);
        link_pair(
            set.hours[h + 1].hour,
            &shape.universities,
            &mut earlier[h],
            &later[0],
            schedule,
            &mut next_id,
            &mut warnings,
        );
    }

    let mut result = LinkageResult {
        hours: shape.hours,
        universities: shape.universities,
        rows,
        new_id_count: 0,
        change_events: Vec::new(),
        warnings,
    };
    result.recount();
    result
}

fn link_pair(
    later_hour: u32,
    labels: &[String],
    earlier: &mut [Vec<LinkedRow>],
    later: &[Vec<LinkedRow>],
    schedule: &BatchSchedule,
    next_id: &mut u32,
    warnings: &mut Vec<LinkWarning>,
) {
    let num_unis = earlier.len().min(later.len());
    let mut used: Vec<Vec<bool>> = later.iter().map(|u| vec![false; u.len()]).collect();
    let frozen = |key: &LinkKey| schedule.deadline_for_score(key.score_with_bonus) < later_hour;
    let mut ambiguous = 0usize;

    let assign = |row: &mut LinkedRow, loc: RowLoc, rule: LinkRule, used: &mut Vec<Vec<bool>>| {
        used[loc.university][loc.row] = true;
        row.id = later[loc.university][loc.row].id;
        row.rule = rule;
        row.successor = Some(loc);
    };

    for u in 0..num_unis {
        let mut by_key: HashMap<LinkKey, Queue> = HashMap::new();
        let mut by_key_programs: HashMap<(LinkKey, ProgramChoices), Queue> = HashMap::new();
        for (r, row) in later[u].iter().enumerate() {
            let loc = RowLoc { university: u, row: r };
            by_key.entry(row.key).or_default().items.push(loc);
            by_key_programs
                .entry((row.key, row.programs.clone()))
                .or_default()
                .items
                .push(loc);
        }

        // a closed batch cannot move, so k-th duplicate pairs with k-th
        let mut frozen_counts: HashMap<LinkKey, usize> = HashMap::new();
        for row in earlier[u].iter_mut().filter(|r| frozen(&r.key)) {
            *frozen_counts.entry(row.key).or_default() += 1;
            if let Some(loc) = by_key.get_mut(&row.key).and_then(|q| q.pop(&used)) {
                assign(row, loc, LinkRule::FrozenCarry, &mut used);
            }
        }
        let mut mismatched: Vec<_> = frozen_counts
            .iter()
            .filter(|(k, &n)| by_key.get(k).map_or(0, |q| q.items.len()) != n)
            .map(|(k, _)| *k)
            .collect();
        mismatched.sort();
        for k in mismatched {
            warnings.push(LinkWarning {
                hour: later_hour,
                university: Some(labels[u].clone()),
                message: format!(
                    "closed batch rows with score {}/{} changed count across the hour",
                    k.score_with_bonus, k.score_without_bonus
                ),
            });
        }

        for row in earlier[u].iter_mut().filter(|r| r.id == u32::MAX) {
            let Some(q) = by_key_programs.get_mut(&(row.key, row.programs.clone())) else {
                continue;
            };
            ambiguous += usize::from(q.remaining(&used) > 1);
            if let Some(loc) = q.pop(&used) {
                assign(row, loc, LinkRule::Rule1, &mut used);
            }
        }
        for row in earlier[u].iter_mut().filter(|r| r.id == u32::MAX) {
            let Some(q) = by_key.get_mut(&row.key) else { continue };
            ambiguous += usize::from(q.remaining(&used) > 1);
            if let Some(loc) = q.pop(&used) {
                assign(row, loc, LinkRule::Rule2, &mut used);
            }
        }
    }

    // leftovers search every university in file order
    let mut global: HashMap<LinkKey, Queue> = HashMap::new();
    for (u, rows) in later.iter().enumerate() {
        for (r, row) in rows.iter().enumerate() {
            if !used[u][r] {
                global
                    .entry(row.key)
                    .or_default()
                    .items
                    .push(RowLoc { university: u, row: r });
            }
        }
    }
    for row in earlier.iter_mut().flatten().filter(|r| r.id == u32::MAX) {
        let q = global.get_mut(&row.key);
        let pick = q.and_then(|q| {
            ambiguous += usize::from(q.remaining(&used) > 1);
            q.pop(&used)
        });
        if let Some(loc) = pick {
            assign(row, loc, LinkRule::CrossUniversity, &mut used);
        } else {
            row.id = *next_id;
            *next_id += 1;
        }
    }

    if ambiguous > 0 {
        warnings.push(LinkWarning {
            hour: later_hour,
            university: None,
            message: format!("{ambiguous} rows had several same-key candidates; took the first in data order"),
        });
    }
}
