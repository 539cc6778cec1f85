use std::fmt;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{College, CollegeId, PreferenceList, ProblemInstance, Student};

pub const POPULATION_SCHEMA_VERSION: u32 = 1;
/// Programs a student may rank within one university.
pub const MAX_PROGRAM_CHOICES: usize = 6;

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct UniversityId(pub usize);

impl fmt::Display for UniversityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{:03}", self.0 + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct University {
    pub label: String,
    pub planned_quota: u32,
    pub final_quota: u32,
    pub num_programs: u16,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ProgramChoices {
    /// Up to six 1-based program numbers, best first.
    pub programs: Vec<u16>,
    pub accept_any: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SyntheticStudent {
    /// Index into the population; never published.
    pub true_id: u32,
    pub exam_score: i32,
    pub bonus: i32,
    /// 0 male, 1 female.
    pub gender: u8,
    /// 0 for the majority group; other codes are minorities.
    pub ethnicity: u8,
    /// Acceptable universities, best first; the rest are never applied to.
    pub preferences: Vec<UniversityId>,
    /// Hours after the first decision hour at which the student first acts;
    /// `None` never enters.
    pub entry_delay: Option<u32>,
    program_seed: u64,
}

impl SyntheticStudent {
    pub fn score_with_bonus(&self) -> i32 {
        self.exam_score + self.bonus
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationConfig {
    pub schema_version: u32,
    pub num_students: usize,
    pub num_universities: usize,
    pub score_mean: f64,
    pub score_sd: f64,
    pub score_min: i32,
    pub score_max: i32,
    pub female_share: f64,
    pub minority_share: f64,
    pub minority_bonus: i32,
    /// Weight of the common university valuation in student utilities.
    pub delta: f64,
    /// Total planned quota as a share of the cohort.
    pub capacity_ratio: f64,
    /// Log-scale spread of university sizes.
    pub quota_sigma: f64,
    /// Universities with a higher common valuation get proportionally fewer
    /// seats: size weight is scaled by `exp(-elasticity * v)`.
    pub prestige_size_elasticity: f64,
    pub final_quota_ratio: f64,
    /// Upper bound on any final quota.
    pub final_quota_cap: Option<u32>,
    pub max_programs: u16,
    pub accept_any_share: f64,
    /// Probability of first acting one or two hours late.
    pub late_entry_prob: f64,
    pub no_entry_prob: f64,
    /// Shift colliding scores apart so scores with bonus are all distinct.
    pub unique_scores: bool,
}

impl Default for PopulationConfig {
    fn default() -> Self {
        Self {
            schema_version: POPULATION_SCHEMA_VERSION,
            num_students: 6000,
            num_universities: 60,
            score_mean: 547.0,
            score_sd: 48.0,
            score_min: 350,
            score_max: 740,
            female_share: 0.5,
            minority_share: 0.24,
            minority_bonus: 10,
            delta: 0.8,
            capacity_ratio: 0.8,
            quota_sigma: 0.6,
            prestige_size_elasticity: 2.0,
            final_quota_ratio: 1.2,
            final_quota_cap: None,
            max_programs: 20,
            accept_any_share: 0.6,
            late_entry_prob: 0.03,
            no_entry_prob: 0.005,
            unique_scores: false,
        }
    }
}

impl PopulationConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(format!("population: {msg}")));
        let unit = |p: f64| (0.0..=1.0).contains(&p);
        if self.schema_version != POPULATION_SCHEMA_VERSION {
            return bad(&format!(
                "schema_version {} unsupported (expected {POPULATION_SCHEMA_VERSION})",
                self.schema_version
            ));
        }
        if self.num_students == 0 || self.num_universities == 0 {
            return bad("need at least one student and one university");
        }
        if !(self.score_sd.is_finite() && self.score_sd >= 0.0 && self.score_mean.is_finite()) {
            return bad("score distribution parameters must be finite with sd >= 0");
        }
        if self.score_min < 1 || self.score_min > self.score_max {
            return bad("score range must be positive and non-empty");
        }
        if self.unique_scores {
            let room = (self.score_max - self.score_min + 1) as usize + self.minority_bonus.max(0) as usize;
            if room < self.num_students {
                return bad("score range too narrow for unique scores");
            }
        }
        if !unit(self.female_share) || !unit(self.minority_share) || !unit(self.delta) || !unit(self.accept_any_share) {
            return bad("shares and delta must lie in [0, 1]");
        }
        if !unit(self.late_entry_prob) || !unit(self.no_entry_prob) || self.late_entry_prob + self.no_entry_prob > 1.0 {
            return bad("entry probabilities must lie in [0, 1] and sum to at most 1");
        }
        if self.minority_bonus < 0 {
            return bad("minority bonus must be nonnegative");
        }
        if !(self.capacity_ratio > 0.0 && self.capacity_ratio.is_finite()) {
            return bad("capacity_ratio must be positive");
        }
        if !(self.quota_sigma >= 0.0 && self.quota_sigma.is_finite()) {
            return bad("quota_sigma must be nonnegative");
        }
        if !self.prestige_size_elasticity.is_finite() {
            return bad("prestige_size_elasticity must be finite");
        }
        if !(self.final_quota_ratio >= 1.0 && self.final_quota_ratio.is_finite()) {
            return bad("final_quota_ratio must be at least 1");
        }
        if self.final_quota_cap == Some(0) || self.max_programs == 0 {
            return bad("final_quota_cap and max_programs must be positive");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Population {
    students: Vec<SyntheticStudent>,
    universities: Vec<University>,
    /// Chance that a student accepts any program at a given university.
    accept_any_share: f64,
}

impl Population {
    pub fn new(students: Vec<SyntheticStudent>, universities: Vec<University>) -> Result<Self> {
        if universities.is_empty() {
            return Err(Error::InvalidConfig("population has no universities".into()));
        }
        for (k, s) in students.iter().enumerate() {
            if s.true_id as usize != k {
                return Err(Error::InvalidInstance(format!(
                    "student {k} carries true id {}",
                    s.true_id
                )));
            }
            let mut seen = vec![false; universities.len()];
            for u in &s.preferences {
                match seen.get_mut(u.0) {
                    Some(flag) if !*flag => *flag = true,
                    Some(_) => return Err(Error::InvalidInstance(format!("student {k} lists {u} twice"))),
                    None => return Err(Error::UnknownCollege(u.to_string())),
                }
            }
        }
        for u in &universities {
            if u.planned_quota == 0 || u.final_quota < u.planned_quota || u.num_programs == 0 {
                return Err(Error::InvalidInstance(format!(
                    "university {} has invalid quotas",
                    u.label
                )));
            }
        }
        Ok(Self {
            students,
            universities,
            accept_any_share: 0.0,
        })
    }

    pub fn students(&self) -> &[SyntheticStudent] {
        &self.students
    }

    pub fn universities(&self) -> &[University] {
        &self.universities
    }

    pub fn num_students(&self) -> usize {
        self.students.len()
    }

    pub fn num_universities(&self) -> usize {
        self.universities.len()
    }

    pub fn university_ids(&self) -> impl Iterator<Item = UniversityId> {
        (0..self.universities.len()).map(UniversityId)
    }

    /// True ids sorted by admission priority: score with bonus descending,
    /// then true id ascending.
    pub fn priority_order(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = (0..self.students.len() as u32).collect();
        ids.sort_by_key(|&i| self.priority_key(i));
        ids
    }

    /// Smaller is higher priority.
    pub fn priority_key(&self, id: u32) -> (i32, u32) {
        (-self.students[id as usize].score_with_bonus(), id)
    }

    /// The program choices the student enters whenever she applies to `u`.
    pub fn program_choices(&self, id: u32, u: UniversityId) -> ProgramChoices {
        let student = &self.students[id as usize];
        let programs = self.universities[u.0].num_programs;
        let mut rng = ChaCha8Rng::seed_from_u64(student.program_seed);
        rng.set_stream(u.0 as u64);
        let k = rng.random_range(1..=MAX_PROGRAM_CHOICES.min(programs as usize));
        let picks: Vec<u16> = sample(&mut rng, programs as usize, k)
            .into_iter()
            .map(|p| p as u16 + 1)
            .collect();
        ProgramChoices {
            programs: picks,
            accept_any: rng.random_bool(self.accept_any_share),
        }
    }

    /// Lifts a core instance with integer scores: one program per university,
    /// planned and final quota equal to the capacity, everyone entering on time.
    pub fn from_instance(instance: &ProblemInstance) -> Result<Self> {
        let universities = instance
            .colleges()
            .iter()
            .map(|c| University {
                label: c.label.clone(),
                planned_quota: c.capacity,
                final_quota: c.capacity,
                num_programs: 1,
            })
            .collect();
        let students = instance
            .student_ids()
            .map(|i| {
                let score = instance.score(i);
                if score.fract() != 0.0 || score > i32::MAX as f64 {
                    return Err(Error::InvalidInstance(format!(
                        "student {} has non-integer score {score}",
                        instance.student_label(i)
                    )));
                }
                Ok(SyntheticStudent {
                    true_id: i.0 as u32,
                    exam_score: score as i32,
                    bonus: 0,
                    gender: 0,
                    ethnicity: 0,
                    preferences: instance
                        .preferences(i)
                        .acceptable()
                        .iter()
                        .map(|c| UniversityId(c.0))
                        .collect(),
                    entry_delay: Some(0),
                    program_seed: i.0 as u64,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(students, universities)
    }

    /// The core instance seen by the mechanism engines: strict scores from
    /// the priority order, capacities from final quotas.
    pub fn to_instance(&self) -> Result<ProblemInstance> {
        let n = self.students.len();
        let m = self.universities.len();
        let mut students = Vec::with_capacity(n);
        let mut prefs = Vec::with_capacity(n);
        for (rank, id) in self.priority_order().into_iter().enumerate() {
            let s = &self.students[id as usize];
            students.push(Student {
                label: format!("S{:05}", id + 1),
                score: (n - rank) as f64,
            });
            prefs.push(PreferenceList::new(
                m,
                s.preferences.iter().map(|u| CollegeId(u.0)).collect(),
                Vec::new(),
            )?);
        }
        let colleges = self
            .universities
            .iter()
            .map(|u| College {
                label: u.label.clone(),
                capacity: u.final_quota,
            })
            .collect();
        ProblemInstance::new(students, colleges, prefs)
    }
}

/// Draws a reproducible synthetic cohort.
pub fn generate_population(config: &PopulationConfig, seed: u64) -> Result<Population> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = config.num_students;
    let m = config.num_universities;

    let score_dist =
        Normal::new(config.score_mean, config.score_sd).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let size_dist = LogNormal::new(0.0, config.quota_sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let common: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
    let weights: Vec<f64> = common
        .iter()
        .map(|v| size_dist.sample(&mut rng) * (-config.prestige_size_elasticity * v).exp())
        .collect();
    let total_weight: f64 = weights.iter().sum();
    let seats = config.capacity_ratio * n as f64;
    let universities: Vec<University> = weights
        .iter()
        .enumerate()
        .map(|(k, w)| {
            let planned = ((seats * w / total_weight).round() as u32).max(1);
            let mut final_quota = (config.final_quota_ratio * planned as f64).ceil() as u32;
            if let Some(cap) = config.final_quota_cap {
                final_quota = final_quota.min(cap);
            }
            University {
                label: UniversityId(k).to_string(),
                planned_quota: planned,
                final_quota: final_quota.max(planned),
                num_programs: rng.random_range(4.min(config.max_programs)..=config.max_programs),
            }
        })
        .collect();

    let mut students = Vec::with_capacity(n);
    for id in 0..n as u32 {
        let raw = score_dist.sample(&mut rng).round();
        let exam_score = (raw as i64).clamp(config.score_min as i64, config.score_max as i64) as i32;
        let gender = u8::from(rng.random_bool(config.female_share));
        let ethnicity = if rng.random_bool(config.minority_share) {
            if rng.random_bool(0.85) {
                1
            } else {
                2
            }
        } else {
            0
        };
        let bonus = if ethnicity == 0 { 0 } else { config.minority_bonus };
        let utility: Vec<f64> = common
            .iter()
            .map(|v| config.delta * v + (1.0 - config.delta) * rng.random::<f64>())
            .collect();
        let mut preferences: Vec<UniversityId> = (0..m).map(UniversityId).collect();
        preferences.sort_by(|a, b| utility[b.0].total_cmp(&utility[a.0]));
        let draw: f64 = rng.random();
        let entry_delay = if draw < config.no_entry_prob {
            None
        } else if draw < config.no_entry_prob + config.late_entry_prob {
            Some(rng.random_range(1..=2))
        } else {
            Some(0)
        };
        students.push(SyntheticStudent {
            true_id: id,
            exam_score,
            bonus,
            gender,
            ethnicity,
            preferences,
            entry_delay,
            program_seed: rng.random(),
        });
    }
    if config.unique_scores {
        make_scores_unique(&mut students);
    }
    let mut pop = Population::new(students, universities)?;
    pop.accept_any_share = config.accept_any_share;
    Ok(pop)
}

/// Walks students from the highest score down and lowers each collision
/// to one below the previous distinct score; ties are resolved by true id.
fn make_scores_unique(students: &mut [SyntheticStudent]) {
    let mut order: Vec<usize> = (0..students.len()).collect();
    order.sort_by_key(|&k| (-students[k].score_with_bonus(), k));
    let mut floor = i32::MAX;
    for k in order {
        let s = &mut students[k];
        if s.score_with_bonus() >= floor {
            s.exam_score -= s.score_with_bonus() - (floor - 1);
        }
        floor = s.score_with_bonus();
    }
}
