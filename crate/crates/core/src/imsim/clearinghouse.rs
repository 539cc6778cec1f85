use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imsim::population::{Population, UniversityId};
use crate::imsim::schedule::BatchSchedule;

/// Which published university cutoff straightforward students consult.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CutoffKind {
    #[default]
    Final,
    Planned,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClearinghouseConfig {
    /// Chance that an active student gets to revise in a given hour; entry
    /// and deadline hours always grant one.
    pub rho: f64,
    pub cutoff_kind: CutoffKind,
    /// Seeds the revision-opportunity draws.
    pub seed: u64,
}

impl Default for ClearinghouseConfig {
    fn default() -> Self {
        Self {
            rho: 1.0,
            cutoff_kind: CutoffKind::Final,
            seed: 0,
        }
    }
}

impl ClearinghouseConfig {
    /// Delayed re-optimization used by the bundled demo: a student who is
    /// not at her entry or deadline hour revises with probability one half.
    pub fn demo(seed: u64) -> Self {
        Self {
            rho: 0.5,
            cutoff_kind: CutoffKind::Final,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(Error::InvalidConfig(format!("rho {} outside [0, 1]", self.rho)));
        }
        Ok(())
    }
}

/// Cutoffs published at the end of an hour, indexed by university.
/// Zero while a university has spare seats under the respective quota.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PublishedCutoffs {
    pub final_quota: Vec<i32>,
    pub planned_quota: Vec<i32>,
}

impl PublishedCutoffs {
    pub fn zeros(m: usize) -> Self {
        Self {
            final_quota: vec![0; m],
            planned_quota: vec![0; m],
        }
    }

    pub fn get(&self, kind: CutoffKind) -> &[i32] {
        match kind {
            CutoffKind::Final => &self.final_quota,
            CutoffKind::Planned => &self.planned_quota,
        }
    }
}

/// State after one decision hour; vectors are indexed by true id.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HourState {
    pub hour: u32,
    pub applications: Vec<Option<UniversityId>>,
    /// Ranked within the final quota of the university applied to.
    pub held: Vec<bool>,
    /// Had a revision opportunity this hour.
    pub revised: Vec<bool>,
    pub cutoffs: PublishedCutoffs,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClearinghouseRun {
    pub hours: Vec<HourState>,
    /// Never entered a choice in time; excluded from the match.
    pub void: Vec<bool>,
    /// Held at the end of the last hour.
    pub final_assignment: Vec<Option<UniversityId>>,
}

impl ClearinghouseRun {
    pub fn num_void(&self) -> usize {
        self.void.iter().filter(|&&v| v).count()
    }

    pub fn last(&self) -> &HourState {
        self.hours.last().expect("at least one hour")
    }

    pub fn hour(&self, hour: u32) -> Option<&HourState> {
        self.hours.iter().find(|s| s.hour == hour)
    }
}

/// What a student sees when she gets to act.
#[derive(Clone, Copy, Debug)]
pub struct Opportunity<'a> {
    pub student: u32,
    pub hour: u32,
    /// Cutoffs published at the end of the previous hour.
    pub published: &'a PublishedCutoffs,
    pub current: Option<UniversityId>,
    pub held: bool,
}

/// Stay where held; otherwise the best listed university whose published
/// cutoff the student's score meets.
pub fn straightforward_application(
    population: &Population,
    kind: CutoffKind,
    opp: &Opportunity<'_>,
) -> Option<UniversityId> {
    if opp.held && opp.current.is_some() {
        return opp.current;
    }
    let s = &population.students()[opp.student as usize];
    let score = s.score_with_bonus();
    let cutoffs = opp.published.get(kind);
    s.preferences.iter().copied().find(|u| score >= cutoffs[u.0])
}

pub fn run_clearinghouse(
    population: &Population,
    schedule: &BatchSchedule,
    config: &ClearinghouseConfig,
) -> Result<ClearinghouseRun> {
    run_clearinghouse_with(population, schedule, config, |opp| {
        straightforward_application(population, config.cutoff_kind, opp)
    })
}

/// Hour loop with an arbitrary application policy, called only for
/// students holding a revision opportunity.
pub fn run_clearinghouse_with<F>(
    population: &Population,
    schedule: &BatchSchedule,
    config: &ClearinghouseConfig,
    mut policy: F,
) -> Result<ClearinghouseRun>
where
    F: FnMut(&Opportunity<'_>) -> Option<UniversityId>,
{
    config.validate()?;
    schedule.validate()?;
    let n = population.num_students();
    let m = population.num_universities();
    let first = schedule.first_decision_hour();

    let deadlines: Vec<u32> = population
        .students()
        .iter()
        .map(|s| schedule.deadline_for_score(s.score_with_bonus()))
        .collect();
    let entry: Vec<Option<u32>> = population
        .students()
        .iter()
        .zip(&deadlines)
        .map(|(s, &d)| {
            let hour = first + s.entry_delay?;
            let late = schedule.mandatory_entry_hour().is_some_and(|mh| hour > mh);
            (!late && hour <= d).then_some(hour)
        })
        .collect();
    let void: Vec<bool> = entry.iter().map(Option::is_none).collect();
    let priority = population.priority_order();

    let mut applications: Vec<Option<UniversityId>> = vec![None; n];
    let mut held = vec![false; n];
    let mut published = PublishedCutoffs::zeros(m);
    let mut hours = Vec::new();

    for hour in schedule.hours() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(u64::from(hour));
        let mut revised = vec![false; n];
        let mut next = applications.clone();
        for id in 0..n {
            // one draw per student per hour keeps streams aligned across policies
            let lucky = rng.random::<f64>() < config.rho;
            let Some(entry_hour) = entry[id] else { continue };
            if hour < entry_hour || hour > deadlines[id] {
                continue;
            }
            if !(lucky || hour == entry_hour || hour == deadlines[id]) {
                continue;
            }
            revised[id] = true;
            next[id] = policy(&Opportunity {
                student: id as u32,
                hour,
                published: &published,
                current: applications[id],
                held: held[id],
            });
            if let Some(u) = next[id] {
                if u.0 >= m {
                    return Err(Error::UnknownCollege(u.to_string()));
                }
            }
        }
        applications = next;
        (held, published) = clear(population, &priority, &applications);
        hours.push(HourState {
            hour,
            applications: applications.clone(),
            held: held.clone(),
            revised,
            cutoffs: published.clone(),
        });
    }

    let final_assignment = applications
        .iter()
        .zip(&held)
        .map(|(a, &h)| if h { *a } else { None })
        .collect();
    Ok(ClearinghouseRun {
        hours,
        void,
        final_assignment,
    })
}

/// Holds the top final-quota applicants at each university and computes
/// both published cutoffs.
fn clear(
    population: &Population,
    priority: &[u32],
    applications: &[Option<UniversityId>],
) -> (Vec<bool>, PublishedCutoffs) {
    let m = population.num_universities();
    let mut held = vec![false; applications.len()];
    let mut count = vec![0u32; m];
    let mut cutoffs = PublishedCutoffs::zeros(m);
    for &id in priority {
        let Some(u) = applications[id as usize] else { continue };
        let uni = &population.universities()[u.0];
        count[u.0] += 1;
        let score = population.students()[id as usize].score_with_bonus();
        if count[u.0] <= uni.final_quota {
            held[id as usize] = true;
        }
        if count[u.0] == uni.final_quota {
            cutoffs.final_quota[u.0] = score;
        }
        if count[u.0] == uni.planned_quota {
            cutoffs.planned_quota[u.0] = score;
        }
    }
    (held, cutoffs)
}
