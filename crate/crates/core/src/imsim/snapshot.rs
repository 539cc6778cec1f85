use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::imsim::clearinghouse::ClearinghouseRun;
use crate::imsim::population::{Population, ProgramChoices, UniversityId, MAX_PROGRAM_CHOICES};
use crate::imsim::schedule::BatchSchedule;

/// One published applicant record; carries no identity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ApplicantRow {
    pub score_with_bonus: i32,
    pub score_without_bonus: i32,
    pub gender: u8,
    pub ethnicity: u8,
    pub programs: ProgramChoices,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UniversitySnapshot {
    pub university: String,
    pub planned_quota: u32,
    pub final_quota: u32,
    pub cutoff_planned: i32,
    pub cutoff_final: i32,
    /// Sorted by score with bonus, descending; ties keep the clearinghouse's
    /// internal order.
    pub rows: Vec<ApplicantRow>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HourSnapshot {
    pub hour: u32,
    /// Every university, in a fixed order shared by all hours.
    pub universities: Vec<UniversitySnapshot>,
}

impl HourSnapshot {
    pub fn num_rows(&self) -> usize {
        self.universities.iter().map(|u| u.rows.len()).sum()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SnapshotSet {
    pub hours: Vec<HourSnapshot>,
}

impl SnapshotSet {
    pub fn shape(&self) -> TableShape {
        TableShape {
            hours: self.hours.iter().map(|h| h.hour).collect(),
            universities: self
                .hours
                .first()
                .map(|h| h.universities.iter().map(|u| u.university.clone()).collect())
                .unwrap_or_default(),
            rows: self
                .hours
                .iter()
                .map(|h| h.universities.iter().map(|u| u.rows.len()).collect())
                .collect(),
        }
    }
}

/// Hours, university labels and row counts of a published table set;
/// enough to address every row without its contents.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TableShape {
    pub hours: Vec<u32>,
    pub universities: Vec<String>,
    /// `rows[h][u]`
    pub rows: Vec<Vec<usize>>,
}

/// Hidden true ids aligned with [`SnapshotSet`]: `ids[h][u][row]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GroundTruth {
    pub ids: Vec<Vec<Vec<u32>>>,
}

/// Publishes every hour of a run: applicants per university in data order
/// (score with bonus descending, then true id).
pub fn build_snapshots(population: &Population, run: &ClearinghouseRun) -> (SnapshotSet, GroundTruth) {
    let priority = population.priority_order();
    let mut set = SnapshotSet::default();
    let mut truth = GroundTruth::default();
    for state in &run.hours {
        let mut ids: Vec<Vec<u32>> = vec![Vec::new(); population.num_universities()];
        for &id in &priority {
            if let Some(u) = state.applications[id as usize] {
                ids[u.0].push(id);
            }
        }
        let universities = population
            .university_ids()
            .map(|u| {
                let uni = &population.universities()[u.0];
                UniversitySnapshot {
                    university: uni.label.clone(),
                    planned_quota: uni.planned_quota,
                    final_quota: uni.final_quota,
                    cutoff_planned: state.cutoffs.planned_quota[u.0],
                    cutoff_final: state.cutoffs.final_quota[u.0],
                    rows: ids[u.0].iter().map(|&id| row_for(population, id, u)).collect(),
                }
            })
            .collect();
        set.hours.push(HourSnapshot {
            hour: state.hour,
            universities,
        });
        truth.ids.push(ids);
    }
    (set, truth)
}

fn row_for(population: &Population, id: u32, u: UniversityId) -> ApplicantRow {
    let s = &population.students()[id as usize];
    ApplicantRow {
        score_with_bonus: s.score_with_bonus(),
        score_without_bonus: s.exam_score,
        gender: s.gender,
        ethnicity: s.ethnicity,
        programs: population.program_choices(id, u),
    }
}

const SCHEDULE_FILE: &str = "schedule.json";

fn hour_dir(dir: &Path, hour: u32) -> PathBuf {
    dir.join(format!("hour_{hour:02}"))
}

fn header() -> Vec<String> {
    let mut h = vec![
        "score_with_bonus".to_owned(),
        "score_without_bonus".to_owned(),
        "gender".to_owned(),
        "ethnicity".to_owned(),
    ];
    h.extend((1..=MAX_PROGRAM_CHOICES).map(|k| format!("program_choice_{k}")));
    h.push("accept_any".to_owned());
    h
}

/// Writes `schedule.json` plus `hour_HH/<university>.csv` per hour and
/// university: a `#` metadata line, a header, then applicant rows.
pub fn write_snapshot_dir(dir: &Path, set: &SnapshotSet, schedule: &BatchSchedule) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let sched_path = dir.join(SCHEDULE_FILE);
    let text = serde_json::to_string_pretty(schedule)?;
    fs::write(&sched_path, text + "\n").map_err(|e| Error::io(&sched_path, e))?;
    for hour in &set.hours {
        let hdir = hour_dir(dir, hour.hour);
        fs::create_dir_all(&hdir).map_err(|e| Error::io(&hdir, e))?;
        for uni in &hour.universities {
            let path = hdir.join(format!("{}.csv", uni.university));
            let mut file = fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            writeln!(
                file,
                "# university={} hour={} planned_quota={} final_quota={} cutoff_planned={} cutoff_final={}",
                uni.university, hour.hour, uni.planned_quota, uni.final_quota, uni.cutoff_planned, uni.cutoff_final
            )
            .map_err(|e| Error::io(&path, e))?;
            let mut w = csv::Writer::from_writer(file);
            w.write_record(header())?;
            for row in &uni.rows {
                let mut rec = vec![
                    row.score_with_bonus.to_string(),
                    row.score_without_bonus.to_string(),
                    row.gender.to_string(),
                    row.ethnicity.to_string(),
                ];
                rec.extend(
                    (0..MAX_PROGRAM_CHOICES)
                        .map(|k| row.programs.programs.get(k).map(u16::to_string).unwrap_or_default()),
                );
                rec.push(u8::from(row.programs.accept_any).to_string());
                w.write_record(&rec)?;
            }
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
    }
    Ok(())
}

/// Sidecar with one line per published row: `hour,university,row,true_id`.
pub fn write_truth(path: &Path, set: &SnapshotSet, truth: &GroundTruth) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["hour", "university", "row", "true_id"])?;
    for (hour, ids) in set.hours.iter().zip(&truth.ids) {
        for (uni, rows) in hour.universities.iter().zip(ids) {
            for (k, id) in rows.iter().enumerate() {
                w.write_record([
                    hour.hour.to_string(),
                    uni.university.clone(),
                    k.to_string(),
                    id.to_string(),
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_truth(path: &Path, shape: &TableShape) -> Result<GroundTruth> {
    let mut truth = GroundTruth {
        ids: shape
            .rows
            .iter()
            .map(|h| h.iter().map(|&n| vec![u32::MAX; n]).collect())
            .collect(),
    };
    let mut r = csv::Reader::from_path(path)?;
    for rec in r.records() {
        let rec = rec?;
        let bad = |d: String| Error::TruthMismatch(format!("{}: {d}", path.display()));
        let field = |k: usize| rec.get(k).ok_or_else(|| bad(format!("short record {rec:?}")));
        let hour: u32 = field(0)?.parse().map_err(|_| bad("bad hour".into()))?;
        let uni = field(1)?;
        let row: usize = field(2)?.parse().map_err(|_| bad("bad row".into()))?;
        let id: u32 = field(3)?.parse().map_err(|_| bad("bad id".into()))?;
        let h = shape
            .hours
            .iter()
            .position(|&x| x == hour)
            .ok_or_else(|| bad(format!("hour {hour} not in snapshots")))?;
        let u = shape
            .universities
            .iter()
            .position(|x| x == uni)
            .ok_or_else(|| bad(format!("university {uni} not in snapshots")))?;
        let slot = truth.ids[h][u]
            .get_mut(row)
            .ok_or_else(|| bad(format!("row {row} beyond {uni} at hour {hour}")))?;
        *slot = id;
    }
    if truth.ids.iter().flatten().flatten().any(|&id| id == u32::MAX) {
        return Err(Error::TruthMismatch(format!(
            "{} does not cover every row",
            path.display()
        )));
    }
    Ok(truth)
}

/// Reads a directory written by [`write_snapshot_dir`]. Hours and
/// universities are taken in sorted name order.
pub fn read_snapshot_dir(dir: &Path) -> Result<(SnapshotSet, BatchSchedule)> {
    let sched_path = dir.join(SCHEDULE_FILE);
    let text = fs::read_to_string(&sched_path).map_err(|e| Error::io(&sched_path, e))?;
    let schedule: BatchSchedule = serde_json::from_str(&text)?;
    schedule.validate()?;

    let mut hour_dirs: Vec<(u32, PathBuf)> = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if let Some(h) = name.strip_prefix("hour_").and_then(|h| h.parse::<u32>().ok()) {
            hour_dirs.push((h, entry.path()));
        }
    }
    hour_dirs.sort();
    let mut set = SnapshotSet::default();
    for (hour, hdir) in hour_dirs {
        let mut files: Vec<PathBuf> = fs::read_dir(&hdir)
            .map_err(|e| Error::io(&hdir, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "csv"))
            .collect();
        files.sort();
        let universities = files
            .iter()
            .map(|p| read_university(p, hour))
            .collect::<Result<Vec<_>>>()?;
        set.hours.push(HourSnapshot { hour, universities });
    }
    if let Some(w) = set.hours.windows(2).find(|w| {
        w[0].universities
            .iter()
            .map(|u| &u.university)
            .ne(w[1].universities.iter().map(|u| &u.university))
    }) {
        return Err(Error::Snapshot {
            path: dir.to_path_buf(),
            detail: format!("university lists differ between hours {} and {}", w[0].hour, w[1].hour),
        });
    }
    Ok((set, schedule))
}

fn read_university(path: &Path, hour: u32) -> Result<UniversitySnapshot> {
    let bad = |detail: String| Error::Snapshot {
        path: path.to_path_buf(),
        detail,
    };
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = BufReader::new(file);
    let mut meta = String::new();
    reader.read_line(&mut meta).map_err(|e| Error::io(path, e))?;
    let meta = meta
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| bad("missing metadata line".into()))?;
    let mut fields = std::collections::HashMap::new();
    for kv in meta.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| bad(format!("bad metadata item `{kv}`")))?;
        fields.insert(k, v);
    }
    let get = |k: &str| {
        fields
            .get(k)
            .copied()
            .ok_or_else(|| bad(format!("metadata lacks `{k}`")))
    };
    let num = |k: &str| -> Result<i64> {
        get(k)?
            .parse()
            .map_err(|_| bad(format!("metadata `{k}` is not a number")))
    };
    if num("hour")? != i64::from(hour) {
        return Err(bad(format!("metadata hour differs from directory hour {hour}")));
    }
    let mut uni = UniversitySnapshot {
        university: get("university")?.to_owned(),
        planned_quota: num("planned_quota")? as u32,
        final_quota: num("final_quota")? as u32,
        cutoff_planned: num("cutoff_planned")? as i32,
        cutoff_final: num("cutoff_final")? as i32,
        rows: Vec::new(),
    };
    let mut r = csv::Reader::from_reader(reader);
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != 5 + MAX_PROGRAM_CHOICES {
            return Err(bad(format!("row has {} fields", rec.len())));
        }
        let int = |k: usize| -> Result<i64> {
            rec[k]
                .parse()
                .map_err(|_| bad(format!("field {k} `{}` is not a number", &rec[k])))
        };
        let mut programs = Vec::new();
        for k in 4..4 + MAX_PROGRAM_CHOICES {
            if !rec[k].is_empty() {
                programs.push(int(k)? as u16);
            }
        }
        uni.rows.push(ApplicantRow {
            score_with_bonus: int(0)? as i32,
            score_without_bonus: int(1)? as i32,
            gender: int(2)? as u8,
            ethnicity: int(3)? as u8,
            programs: ProgramChoices {
                programs,
                accept_any: int(4 + MAX_PROGRAM_CHOICES)? != 0,
            },
        });
    }
    Ok(uni)
}
