//! Admissions problem instances: students under a common score priority,
//! colleges with capacities, and strict preferences with an outside option.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Marks the outside option inside a serialized preference list.
pub const OUTSIDE_OPTION: &str = "∅";

/// Priority position of a student: `StudentId(0)` has the highest score.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StudentId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CollegeId(pub usize);

impl StudentId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl CollegeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for StudentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0 + 1)
    }
}

impl fmt::Display for CollegeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0 + 1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Student {
    pub label: String,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct College {
    pub label: String,
    pub capacity: u32,
}

const UNLISTED: u32 = u32::MAX;

/// A strict order over colleges and the outside option.
///
/// Colleges in `acceptable` are preferred to being unassigned, colleges in
/// `unacceptable` come after the outside option, and colleges missing from
/// both are never applied to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PreferenceList {
    acceptable: Vec<CollegeId>,
    unacceptable: Vec<CollegeId>,
    ranks: Vec<u32>,
}

impl PreferenceList {
    pub fn new(num_colleges: usize, acceptable: Vec<CollegeId>, unacceptable: Vec<CollegeId>) -> Result<Self> {
        let mut ranks = vec![UNLISTED; num_colleges];
        let unassigned_rank = acceptable.len() as u32;
        let listed = acceptable.iter().enumerate().map(|(i, &c)| (c, i as u32)).chain(
            unacceptable
                .iter()
                .enumerate()
                .map(|(j, &c)| (c, unassigned_rank + 1 + j as u32)),
        );
        for (college, rank) in listed {
            let slot = ranks.get_mut(college.0).ok_or_else(|| {
                Error::InvalidInstance(format!("preference refers to unknown college index {}", college.0))
            })?;
            if *slot != UNLISTED {
                return Err(Error::InvalidInstance(format!(
                    "college {college} listed twice in one preference list"
                )));
            }
            *slot = rank;
        }
        Ok(Self {
            acceptable,
            unacceptable,
            ranks,
        })
    }

    /// Every college acceptable, in the given order.
    pub fn full(num_colleges: usize, order: Vec<CollegeId>) -> Result<Self> {
        Self::new(num_colleges, order, Vec::new())
    }

    pub fn acceptable(&self) -> &[CollegeId] {
        &self.acceptable
    }

    pub fn unacceptable(&self) -> &[CollegeId] {
        &self.unacceptable
    }

    pub fn num_colleges(&self) -> usize {
        self.ranks.len()
    }

    /// Position of an option in the order; lower is better. `None` is the
    /// outside option.
    pub fn rank_of(&self, option: Option<CollegeId>) -> u32 {
        match option {
            None => self.acceptable.len() as u32,
            Some(c) => self.ranks.get(c.0).copied().unwrap_or(UNLISTED),
        }
    }

    /// Strict preference of `a` over `b`.
    pub fn prefers(&self, a: Option<CollegeId>, b: Option<CollegeId>) -> bool {
        self.rank_of(a) < self.rank_of(b)
    }

    pub fn is_acceptable(&self, college: CollegeId) -> bool {
        self.rank_of(Some(college)) < self.acceptable.len() as u32
    }

    pub fn top(&self) -> Option<CollegeId> {
        self.acceptable.first().copied()
    }
}

/// Students ordered by descending score, colleges with capacities, and
/// one preference list per student.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    students: Vec<Student>,
    colleges: Vec<College>,
    preferences: Vec<PreferenceList>,
}

impl ProblemInstance {
    /// Builds an instance from students in any order; they are re-indexed by
    /// descending score and `preferences` is permuted alongside.
    pub fn new(students: Vec<Student>, colleges: Vec<College>, preferences: Vec<PreferenceList>) -> Result<Self> {
        if students.len() != preferences.len() {
            return Err(Error::InvalidInstance(format!(
                "{} students but {} preference lists",
                students.len(),
                preferences.len()
            )));
        }
        for s in &students {
            if !(s.score.is_finite() && s.score > 0.0) {
                return Err(Error::InvalidInstance(format!(
                    "student `{}` has non-positive score {}",
                    s.label, s.score
                )));
            }
        }
        let mut labels = HashSet::new();
        for s in &students {
            if !labels.insert(s.label.as_str()) {
                return Err(Error::InvalidInstance(format!("duplicate student `{}`", s.label)));
            }
        }
        let mut labels = HashSet::new();
        for c in &colleges {
            if !labels.insert(c.label.as_str()) {
                return Err(Error::InvalidInstance(format!("duplicate college `{}`", c.label)));
            }
            if c.capacity == 0 {
                return Err(Error::InvalidInstance(format!(
                    "college `{}` has zero capacity",
                    c.label
                )));
            }
        }
        for p in &preferences {
            if p.num_colleges() != colleges.len() {
                return Err(Error::InvalidInstance(
                    "preference list built for a different number of colleges".into(),
                ));
            }
        }

        let mut paired: Vec<(Student, PreferenceList)> = students.into_iter().zip(preferences).collect();
        paired.sort_by(|a, b| b.0.score.total_cmp(&a.0.score));
        if let Some(w) = paired.windows(2).find(|w| w[0].0.score == w[1].0.score) {
            return Err(Error::InvalidInstance(format!(
                "students `{}` and `{}` share score {}",
                w[0].0.label, w[1].0.label, w[0].0.score
            )));
        }
        let (students, preferences) = paired.into_iter().unzip();
        Ok(Self {
            students,
            colleges,
            preferences,
        })
    }

    /// Instance with anonymous students `i1..in` scored `n..1` (so listing
    /// order is priority order) and colleges `c1..cm`.
    pub fn ranked(capacities: &[u32], preferences: Vec<PreferenceList>) -> Result<Self> {
        let n = preferences.len();
        let students = (0..n)
            .map(|k| Student {
                label: format!("i{}", k + 1),
                score: (n - k) as f64,
            })
            .collect();
        let colleges = capacities
            .iter()
            .enumerate()
            .map(|(k, &capacity)| College {
                label: format!("c{}", k + 1),
                capacity,
            })
            .collect();
        Self::new(students, colleges, preferences)
    }

    /// Like [`ProblemInstance::ranked`] with every college acceptable and
    /// orders given as zero-based college indices.
    pub fn ranked_full(capacities: &[u32], orders: &[Vec<usize>]) -> Result<Self> {
        let m = capacities.len();
        let prefs = orders
            .iter()
            .map(|o| PreferenceList::full(m, o.iter().map(|&c| CollegeId(c)).collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::ranked(capacities, prefs)
    }

    pub fn num_students(&self) -> usize {
        self.students.len()
    }

    pub fn num_colleges(&self) -> usize {
        self.colleges.len()
    }

    pub fn students(&self) -> &[Student] {
        &self.students
    }

    pub fn colleges(&self) -> &[College] {
        &self.colleges
    }

    pub fn student_ids(&self) -> impl Iterator<Item = StudentId> {
        (0..self.students.len()).map(StudentId)
    }

    pub fn college_ids(&self) -> impl Iterator<Item = CollegeId> {
        (0..self.colleges.len()).map(CollegeId)
    }

    pub fn score(&self, student: StudentId) -> f64 {
        self.students[student.0].score
    }

    pub fn capacity(&self, college: CollegeId) -> u32 {
        self.colleges[college.0].capacity
    }

    pub fn capacities(&self) -> Vec<u32> {
        self.colleges.iter().map(|c| c.capacity).collect()
    }

    pub fn preferences(&self, student: StudentId) -> &PreferenceList {
        &self.preferences[student.0]
    }

    pub fn student_label(&self, student: StudentId) -> &str {
        &self.students[student.0].label
    }

    pub fn college_label(&self, college: CollegeId) -> &str {
        &self.colleges[college.0].label
    }

    pub fn student_by_label(&self, label: &str) -> Result<StudentId> {
        self.students
            .iter()
            .position(|s| s.label == label)
            .map(StudentId)
            .ok_or_else(|| Error::UnknownStudent(label.to_owned()))
    }

    pub fn college_by_label(&self, label: &str) -> Result<CollegeId> {
        self.colleges
            .iter()
            .position(|c| c.label == label)
            .map(CollegeId)
            .ok_or_else(|| Error::UnknownCollege(label.to_owned()))
    }

    /// Same students and colleges with one student's preferences replaced.
    pub fn with_preferences(&self, student: StudentId, prefs: PreferenceList) -> Result<Self> {
        if prefs.num_colleges() != self.colleges.len() {
            return Err(Error::InvalidInstance(
                "preference list built for a different number of colleges".into(),
            ));
        }
        let mut out = self.clone();
        out.preferences[student.0] = prefs;
        Ok(out)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: InstanceFile = serde_json::from_str(text)?;
        file.into_instance()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(InstanceFile::from_instance(self)).expect("instance serializes")
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StudentEntry {
    id: String,
    score: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollegeEntry {
    id: String,
    capacity: u32,
}

/// On-disk instance layout.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    students: Vec<StudentEntry>,
    colleges: Vec<CollegeEntry>,
    preferences: BTreeMap<String, Vec<String>>,
}

impl InstanceFile {
    fn into_instance(self) -> Result<ProblemInstance> {
        let college_index: HashMap<&str, usize> = self
            .colleges
            .iter()
            .enumerate()
            .map(|(k, c)| (c.id.as_str(), k))
            .collect();
        let m = self.colleges.len();
        for key in self.preferences.keys() {
            if !self.students.iter().any(|s| &s.id == key) {
                return Err(Error::UnknownStudent(key.clone()));
            }
        }
        let mut prefs = Vec::with_capacity(self.students.len());
        for s in &self.students {
            let list = self
                .preferences
                .get(&s.id)
                .ok_or_else(|| Error::InvalidInstance(format!("student `{}` has no preference list", s.id)))?;
            let mut acceptable = Vec::new();
            let mut unacceptable = Vec::new();
            let mut past_sentinel = false;
            for entry in list {
                if entry == OUTSIDE_OPTION {
                    if past_sentinel {
                        return Err(Error::InvalidInstance(format!(
                            "student `{}` lists the outside option twice",
                            s.id
                        )));
                    }
                    past_sentinel = true;
                    continue;
                }
                let c = *college_index
                    .get(entry.as_str())
                    .ok_or_else(|| Error::UnknownCollege(entry.clone()))?;
                if past_sentinel {
                    unacceptable.push(CollegeId(c));
                } else {
                    acceptable.push(CollegeId(c));
                }
            }
            prefs.push(PreferenceList::new(m, acceptable, unacceptable)?);
        }
        let students = self
            .students
            .into_iter()
            .map(|s| Student {
                label: s.id,
                score: s.score,
            })
            .collect();
        let colleges = self
            .colleges
            .into_iter()
            .map(|c| College {
                label: c.id,
                capacity: c.capacity,
            })
            .collect();
        ProblemInstance::new(students, colleges, prefs)
    }

    fn from_instance(instance: &ProblemInstance) -> Self {
        let students = instance
            .students
            .iter()
            .map(|s| StudentEntry {
                id: s.label.clone(),
                score: s.score,
            })
            .collect();
        let colleges = instance
            .colleges
            .iter()
            .map(|c| CollegeEntry {
                id: c.label.clone(),
                capacity: c.capacity,
            })
            .collect();
        let preferences = instance
            .student_ids()
            .map(|i| {
                let p = instance.preferences(i);
                let mut list: Vec<String> = p
                    .acceptable()
                    .iter()
                    .map(|&c| instance.college_label(c).to_owned())
                    .collect();
                if !p.unacceptable().is_empty() {
                    list.push(OUTSIDE_OPTION.to_owned());
                    list.extend(p.unacceptable().iter().map(|&c| instance.college_label(c).to_owned()));
                }
                (instance.student_label(i).to_owned(), list)
            })
            .collect();
        Self {
            students,
            colleges,
            preferences,
        }
    }
}
