use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::imsim::ProgramChoices;
use crate::linker::link::{LinkKey, LinkRule, LinkageResult, LinkedRow, RowLoc};

const HEADER: [&str; 13] = [
    "id",
    "hour",
    "university",
    "row",
    "score_with_bonus",
    "score_without_bonus",
    "gender",
    "ethnicity",
    "program_choices",
    "accept_any",
    "rule",
    "next_university",
    "next_row",
];

/// One line per published row in (hour, university, row) order, after a
/// `# hours=.. universities=..` line that fixes the table shape.
pub fn write_trajectory_csv(path: &Path, result: &LinkageResult) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let hours: Vec<String> = result.hours.iter().map(u32::to_string).collect();
    writeln!(
        file,
        "# hours={} universities={}",
        hours.join(","),
        result.universities.join(",")
    )
    .map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(HEADER)?;
    for (h, hour) in result.rows.iter().enumerate() {
        for (u, rows) in hour.iter().enumerate() {
            for (r, row) in rows.iter().enumerate() {
                let programs: Vec<String> = row.programs.programs.iter().map(u16::to_string).collect();
                let (next_u, next_r) = match row.successor {
                    Some(loc) => (result.universities[loc.university].clone(), loc.row.to_string()),
                    None => (String::new(), String::new()),
                };
                w.write_record([
                    row.id.to_string(),
                    result.hours[h].to_string(),
                    result.universities[u].clone(),
                    r.to_string(),
                    row.key.score_with_bonus.to_string(),
                    row.key.score_without_bonus.to_string(),
                    row.key.gender.to_string(),
                    row.key.ethnicity.to_string(),
                    programs.join(";"),
                    u8::from(row.programs.accept_any).to_string(),
                    row.rule.name().to_owned(),
                    next_u,
                    next_r,
                ])?;
            }
        }
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// Reads a file written by [`write_trajectory_csv`]. Warnings are not
/// stored in the file; change events and counts are rebuilt.
pub fn read_trajectory_csv(path: &Path) -> Result<LinkageResult> {
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
        .ok_or_else(|| bad("missing shape line".into()))?;
    let (mut hours, mut universities) = (None, None);
    for kv in meta.split_whitespace() {
        match kv.split_once('=') {
            Some(("hours", v)) => {
                let parsed: std::result::Result<Vec<u32>, _> =
                    v.split(',').filter(|s| !s.is_empty()).map(str::parse).collect();
                hours = Some(parsed.map_err(|_| bad(format!("bad hours list `{v}`")))?);
            }
            Some(("universities", v)) => {
                universities = Some(
                    v.split(',')
                        .filter(|s| !s.is_empty())
                        .map(str::to_owned)
                        .collect::<Vec<_>>(),
                );
            }
            _ => return Err(bad(format!("unexpected shape item `{kv}`"))),
        }
    }
    let hours = hours.ok_or_else(|| bad("shape line lacks hours".into()))?;
    let universities = universities.ok_or_else(|| bad("shape line lacks universities".into()))?;
    let uni_index = |label: &str| {
        universities
            .iter()
            .position(|u| u == label)
            .ok_or_else(|| bad(format!("unknown university `{label}`")))
    };

    let mut rows: Vec<Vec<Vec<LinkedRow>>> = vec![vec![Vec::new(); universities.len()]; hours.len()];
    let mut r = csv::Reader::from_reader(reader);
    for rec in r.records() {
        let rec = rec?;
        if rec.len() != HEADER.len() {
            return Err(bad(format!("record has {} fields", rec.len())));
        }
        let int = |k: usize| -> Result<i64> {
            rec[k]
                .parse()
                .map_err(|_| bad(format!("{} `{}` is not a number", HEADER[k], &rec[k])))
        };
        let hour = int(1)? as u32;
        let h = hours
            .iter()
            .position(|&x| x == hour)
            .ok_or_else(|| bad(format!("hour {hour} not in shape line")))?;
        let u = uni_index(&rec[2])?;
        if int(3)? as usize != rows[h][u].len() {
            return Err(bad(format!("rows of {} at hour {hour} out of order", &rec[2])));
        }
        let programs = rec[8]
            .split(';')
            .filter(|s| !s.is_empty())
            .map(|p| p.parse::<u16>().map_err(|_| bad(format!("bad program `{p}`"))))
            .collect::<Result<Vec<_>>>()?;
        let successor = if rec[11].is_empty() {
            None
        } else {
            Some(RowLoc {
                university: uni_index(&rec[11])?,
                row: int(12)? as usize,
            })
        };
        rows[h][u].push(LinkedRow {
            id: int(0)? as u32,
            rule: LinkRule::parse(&rec[10]).ok_or_else(|| bad(format!("unknown rule `{}`", &rec[10])))?,
            key: LinkKey {
                score_with_bonus: int(4)? as i32,
                score_without_bonus: int(5)? as i32,
                gender: int(6)? as u8,
                ethnicity: int(7)? as u8,
            },
            programs: ProgramChoices {
                programs,
                accept_any: int(9)? != 0,
            },
            successor,
        });
    }
    let mut result = LinkageResult {
        hours,
        universities,
        rows,
        new_id_count: 0,
        change_events: Vec::new(),
        warnings: Vec::new(),
    };
    if !result.rows.is_empty() {
        result.recount();
    }
    Ok(result)
}
