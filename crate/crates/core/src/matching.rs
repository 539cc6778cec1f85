use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::instance::{CollegeId, ProblemInstance, StudentId};

/// Assignment of each student to a college or to herself (`None`).
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    assignment: Vec<Option<CollegeId>>,
}

impl Matching {
    pub fn unassigned(num_students: usize) -> Self {
        Self {
            assignment: vec![None; num_students],
        }
    }

    /// Wraps an assignment vector without checking it against an instance.
    pub fn from_vec(assignment: Vec<Option<CollegeId>>) -> Self {
        Self { assignment }
    }

    /// Builds a matching and checks it is feasible for `instance`.
    pub fn new(instance: &ProblemInstance, assignment: Vec<Option<CollegeId>>) -> Result<Self> {
        let m = Self { assignment };
        m.validate(instance)?;
        Ok(m)
    }

    pub fn validate(&self, instance: &ProblemInstance) -> Result<()> {
        if self.assignment.len() != instance.num_students() {
            return Err(Error::InvalidMatching(format!(
                "matching covers {} students, instance has {}",
                self.assignment.len(),
                instance.num_students()
            )));
        }
        let counts = self.counts(instance.num_colleges())?;
        for c in instance.college_ids() {
            if counts[c.0] > instance.capacity(c) {
                return Err(Error::InvalidMatching(format!(
                    "college `{}` holds {} students, capacity {}",
                    instance.college_label(c),
                    counts[c.0],
                    instance.capacity(c)
                )));
            }
        }
        Ok(())
    }

    fn counts(&self, num_colleges: usize) -> Result<Vec<u32>> {
        let mut counts = vec![0u32; num_colleges];
        for c in self.assignment.iter().flatten() {
            *counts
                .get_mut(c.0)
                .ok_or_else(|| Error::InvalidMatching(format!("unknown college index {}", c.0)))? += 1;
        }
        Ok(counts)
    }

    pub fn get(&self, student: StudentId) -> Option<CollegeId> {
        self.assignment[student.0]
    }

    pub fn set(&mut self, student: StudentId, college: Option<CollegeId>) {
        self.assignment[student.0] = college;
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn as_slice(&self) -> &[Option<CollegeId>] {
        &self.assignment
    }

    pub fn iter(&self) -> impl Iterator<Item = (StudentId, Option<CollegeId>)> + '_ {
        self.assignment.iter().enumerate().map(|(i, &c)| (StudentId(i), c))
    }

    /// Students held by `college`, in priority order.
    pub fn occupants(&self, college: CollegeId) -> impl Iterator<Item = StudentId> + '_ {
        self.iter().filter(move |&(_, c)| c == Some(college)).map(|(i, _)| i)
    }

    pub fn num_assigned(&self) -> usize {
        self.assignment.iter().filter(|c| c.is_some()).count()
    }

    /// `{studentLabel: collegeLabel | null}` in priority order.
    pub fn to_json(&self, instance: &ProblemInstance) -> Value {
        let map: Map<String, Value> = self
            .iter()
            .map(|(i, c)| {
                let v = match c {
                    Some(c) => Value::String(instance.college_label(c).to_owned()),
                    None => Value::Null,
                };
                (instance.student_label(i).to_owned(), v)
            })
            .collect();
        Value::Object(map)
    }

    pub fn from_json(instance: &ProblemInstance, value: &Value) -> Result<Self> {
        let map = value
            .as_object()
            .ok_or_else(|| Error::InvalidMatching("expected a JSON object".into()))?;
        let mut assignment = vec![None; instance.num_students()];
        let mut seen = vec![false; instance.num_students()];
        for (student, college) in map {
            let i = instance.student_by_label(student)?;
            seen[i.0] = true;
            assignment[i.0] = match college {
                Value::Null => None,
                Value::String(label) => Some(instance.college_by_label(label)?),
                other => return Err(Error::InvalidMatching(format!("student `{student}` mapped to {other}"))),
            };
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidMatching(format!(
                "student `{}` missing from matching",
                instance.student_label(StudentId(missing))
            )));
        }
        Self::new(instance, assignment)
    }
}

/// Per-college admission cutoffs; zero marks spare capacity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CutoffVector {
    cutoffs: Vec<f64>,
}

impl CutoffVector {
    pub fn zeros(num_colleges: usize) -> Self {
        Self {
            cutoffs: vec![0.0; num_colleges],
        }
    }

    pub fn from_vec(cutoffs: Vec<f64>) -> Self {
        Self { cutoffs }
    }

    pub fn get(&self, college: CollegeId) -> f64 {
        self.cutoffs[college.0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.cutoffs
    }

    pub fn to_json(&self, instance: &ProblemInstance) -> Value {
        let map: Map<String, Value> = instance
            .college_ids()
            .map(|c| (instance.college_label(c).to_owned(), Value::from(self.get(c))))
            .collect();
        Value::Object(map)
    }
}

/// Minimum score among a full college's students, zero when seats remain.
pub fn compute_cutoffs(instance: &ProblemInstance, matching: &Matching) -> Result<CutoffVector> {
    matching.validate(instance)?;
    let m = instance.num_colleges();
    let mut counts = vec![0u32; m];
    let mut min_score = vec![f64::INFINITY; m];
    for (i, c) in matching.iter() {
        if let Some(c) = c {
            counts[c.0] += 1;
            min_score[c.0] = min_score[c.0].min(instance.score(i));
        }
    }
    let cutoffs = instance
        .college_ids()
        .map(|c| {
            if counts[c.0] == instance.capacity(c) {
                min_score[c.0]
            } else {
                0.0
            }
        })
        .collect();
    Ok(CutoffVector { cutoffs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;

    #[test]
    fn example1_tcdm_outcome_cutoffs() {
        // i1→c1, i2→c2, i3 unassigned, i4→c3; scores 4,3,2,1.
        let inst = example1();
        let m = Matching::new(
            &inst,
            vec![Some(CollegeId(0)), Some(CollegeId(1)), None, Some(CollegeId(2))],
        )
        .unwrap();
        let f = compute_cutoffs(&inst, &m).unwrap();
        assert_eq!(f.as_slice(), &[4.0, 3.0, 1.0, 0.0]);
    }

    #[test]
    fn empty_matching_has_zero_cutoffs() {
        let inst = example1();
        let f = compute_cutoffs(&inst, &Matching::unassigned(4)).unwrap();
        assert!(f.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_full_college() {
        let inst = ProblemInstance::new(
            vec![crate::instance::Student {
                label: "s".into(),
                score: 7.0,
            }],
            vec![crate::instance::College {
                label: "c".into(),
                capacity: 1,
            }],
            vec![crate::instance::PreferenceList::full(1, vec![CollegeId(0)]).unwrap()],
        )
        .unwrap();
        let m = Matching::new(&inst, vec![Some(CollegeId(0))]).unwrap();
        assert_eq!(compute_cutoffs(&inst, &m).unwrap().as_slice(), &[7.0]);
    }

    #[test]
    fn rejects_over_capacity_and_unknown_colleges() {
        let inst = example1();
        let over = Matching::from_vec(vec![Some(CollegeId(0)), Some(CollegeId(0)), None, None]);
        assert!(matches!(compute_cutoffs(&inst, &over), Err(Error::InvalidMatching(_))));
        let unknown = Matching::from_vec(vec![Some(CollegeId(9)), None, None, None]);
        assert!(compute_cutoffs(&inst, &unknown).is_err());
        let short = Matching::unassigned(3);
        assert!(compute_cutoffs(&inst, &short).is_err());
    }

    #[test]
    fn json_round_trip() {
        let inst = example1();
        let m = Matching::new(&inst, vec![Some(CollegeId(0)), None, Some(CollegeId(3)), None]).unwrap();
        let v = m.to_json(&inst);
        assert_eq!(v["i2"], Value::Null);
        assert_eq!(Matching::from_json(&inst, &v).unwrap(), m);
    }
}
