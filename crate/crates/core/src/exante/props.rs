//! Exact comparisons of TCDM and DA rank distributions.

use num_rational::Ratio;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exante::capacity::is_unconstrained;
use crate::exante::distribution::{ratio_string, ExactRankDistribution};
use crate::exante::exact::{exact_distribution, ExactOptions};
use crate::mechanisms::Mechanism;

pub type Margin = Ratio<i128>;

fn outcome_name(slot: usize, m: usize) -> String {
    if slot == m {
        "unassigned".into()
    } else {
        format!("rank {}", slot + 1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub clause: u8,
    pub position: usize,
    pub outcome: String,
    pub detail: String,
}

impl From<&Violation> for Error {
    fn from(v: &Violation) -> Self {
        Error::PropertyViolation {
            clause: v.clause,
            position: v.position,
            outcome: v.outcome.clone(),
            detail: v.detail.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PositionComparison {
    pub position: usize,
    pub unconstrained: bool,
    pub tcdm: ExactRankDistribution,
    pub da: ExactRankDistribution,
    /// `p1(TCDM) - p1(DA)`.
    #[serde(serialize_with = "ser_margin")]
    pub first_choice_margin: Margin,
    /// `pl(DA) - pl(TCDM)` for `l = 2..=m`.
    #[serde(serialize_with = "ser_margins")]
    pub lower_rank_margins: Vec<Margin>,
    /// `p∅(TCDM) - p∅(DA)`.
    #[serde(serialize_with = "ser_margin")]
    pub unassigned_margin: Margin,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop4Report {
    pub n: usize,
    pub capacities: Vec<u32>,
    pub rounds: u32,
    pub positions: Vec<PositionComparison>,
    pub violations: Vec<Violation>,
}

impl Prop4Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Turns the first violation into an error.
    pub fn ensure(&self) -> Result<()> {
        match self.violations.first() {
            Some(v) => Err(v.into()),
            None => Ok(()),
        }
    }
}

/// Compares TCDM with `rounds` against DA position by position:
/// unconstrained positions must match exactly; constrained ones must have
/// a weakly higher first-choice probability, weakly lower probabilities for
/// every other rank, and a weakly higher probability of ending unassigned.
pub fn check_prop4(n: usize, capacities: &[u32], rounds: u32, options: &ExactOptions) -> Result<Prop4Report> {
    let tcdm = exact_distribution(n, capacities, Mechanism::Tcdm { rounds }, options)?;
    let da = exact_distribution(n, capacities, Mechanism::Da, options)?;
    let m = capacities.len();
    let mut positions = Vec::with_capacity(n);
    let mut violations = Vec::new();

    for (t, d) in tcdm.into_iter().zip(da) {
        let position = t.position;
        let unconstrained = is_unconstrained(position, rounds, capacities)?;
        let first_choice_margin = t.prob_signed(0) - d.prob_signed(0);
        let lower_rank_margins: Vec<Margin> = (1..m).map(|l| d.prob_signed(l) - t.prob_signed(l)).collect();
        let unassigned_margin = t.prob_signed(m) - d.prob_signed(m);

        if unconstrained {
            for slot in 0..=m {
                if t.counts[slot] * d.total != d.counts[slot] * t.total {
                    violations.push(Violation {
                        clause: 1,
                        position,
                        outcome: outcome_name(slot, m),
                        detail: format!(
                            "unconstrained but TCDM {} != DA {}",
                            ratio_string(&t.prob(slot)),
                            ratio_string(&d.prob(slot))
                        ),
                    });
                }
            }
        } else {
            if first_choice_margin < Margin::zero() {
                violations.push(Violation {
                    clause: 2,
                    position,
                    outcome: outcome_name(0, m),
                    detail: format!("p1 TCDM - DA = {}", ratio_string(&first_choice_margin)),
                });
            }
            for (l, margin) in lower_rank_margins.iter().enumerate() {
                if *margin < Margin::zero() {
                    violations.push(Violation {
                        clause: 3,
                        position,
                        outcome: outcome_name(l + 1, m),
                        detail: format!("DA - TCDM = {}", ratio_string(margin)),
                    });
                }
            }
            if unassigned_margin < Margin::zero() {
                violations.push(Violation {
                    clause: 4,
                    position,
                    outcome: outcome_name(m, m),
                    detail: format!("TCDM - DA = {}", ratio_string(&unassigned_margin)),
                });
            }
        }

        positions.push(PositionComparison {
            position,
            unconstrained,
            tcdm: t,
            da: d,
            first_choice_margin,
            lower_rank_margins,
            unassigned_margin,
        });
    }

    Ok(Prop4Report {
        n,
        capacities: capacities.to_vec(),
        rounds,
        positions,
        violations,
    })
}

/// Which reading of the first-choice monotonicity the enumeration supports.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize)]
pub enum FirstChoiceDirection {
    /// Weakly decreasing in the round budget, with at least one strict drop.
    Decreasing,
    /// Weakly increasing, with at least one strict rise.
    Increasing,
    /// Constant for every position.
    Constant,
    /// Moves both ways.
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop5Position {
    pub position: usize,
    /// Whether the position is unconstrained at each budget `1..=max_rounds`.
    pub unconstrained: Vec<bool>,
    #[serde(serialize_with = "ser_margins")]
    pub first_choice: Vec<Margin>,
    #[serde(serialize_with = "ser_margins")]
    pub unassigned: Vec<Margin>,
    pub first_choice_nonincreasing: bool,
    pub lower_ranks_nondecreasing: bool,
    pub unassigned_nonincreasing: bool,
    /// Distribution unchanged across every step where the position starts unconstrained.
    pub constant_while_unconstrained: bool,
    pub equals_da_at_max: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prop5Report {
    pub n: usize,
    pub capacities: Vec<u32>,
    pub max_rounds: u32,
    /// `by_round[t - 1]` holds the TCDM distributions with budget `t`.
    pub by_round: Vec<Vec<ExactRankDistribution>>,
    pub da: Vec<ExactRankDistribution>,
    pub positions: Vec<Prop5Position>,
    pub first_choice_direction: FirstChoiceDirection,
    pub violations: Vec<Violation>,
}

impl Prop5Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Sweeps the round budget over `1..=max_rounds` and reports, for each
/// position, how its distribution moves from one budget to the next.
///
/// Every step from a constrained budget is expected to lower (weakly) the
/// first-choice and unassigned probabilities and raise the others; anything
/// else is recorded as a violation, not raised.
pub fn check_prop5(n: usize, capacities: &[u32], max_rounds: u32, options: &ExactOptions) -> Result<Prop5Report> {
    if max_rounds == 0 {
        return Err(Error::InvalidConfig("round budget must be at least 1".into()));
    }
    let m = capacities.len();
    let by_round: Vec<Vec<ExactRankDistribution>> = (1..=max_rounds)
        .map(|t| exact_distribution(n, capacities, Mechanism::Tcdm { rounds: t }, options))
        .collect::<Result<_>>()?;
    let da = exact_distribution(n, capacities, Mechanism::Da, options)?;

    let mut positions = Vec::with_capacity(n);
    let mut violations = Vec::new();
    let (mut any_drop, mut any_rise) = (false, false);

    for p in 0..n {
        let position = p + 1;
        let unconstrained: Vec<bool> = (1..=max_rounds)
            .map(|t| is_unconstrained(position, t, capacities))
            .collect::<Result<_>>()?;
        let series = |slot: usize| -> Vec<Margin> { by_round.iter().map(|d| d[p].prob_signed(slot)).collect() };
        let first_choice = series(0);
        let unassigned = series(m);

        let mut first_ok = true;
        let mut lower_ok = true;
        let mut unassigned_ok = true;
        let mut constant_ok = true;
        for step in 0..(max_rounds as usize).saturating_sub(1) {
            let (now, next) = (&by_round[step][p], &by_round[step + 1][p]);
            let t = step + 1;
            if unconstrained[step] {
                if now.counts != next.counts {
                    constant_ok = false;
                    violations.push(Violation {
                        clause: 1,
                        position,
                        outcome: "distribution".into(),
                        detail: format!("unconstrained at T={t} but changes at T={}", t + 1),
                    });
                }
                continue;
            }
            let delta = |slot: usize| next.prob_signed(slot) - now.prob_signed(slot);
            let d1 = delta(0);
            if d1 > Margin::zero() {
                first_ok = false;
                any_rise = true;
                violations.push(Violation {
                    clause: 2,
                    position,
                    outcome: outcome_name(0, m),
                    detail: format!("rises by {} from T={t} to T={}", ratio_string(&d1), t + 1),
                });
            } else if d1 < Margin::zero() {
                any_drop = true;
            }
            for l in 1..m {
                let dl = delta(l);
                if dl < Margin::zero() {
                    lower_ok = false;
                    violations.push(Violation {
                        clause: 3,
                        position,
                        outcome: outcome_name(l, m),
                        detail: format!("falls by {} from T={t} to T={}", ratio_string(&-dl), t + 1),
                    });
                }
            }
            let du = delta(m);
            if du > Margin::zero() {
                unassigned_ok = false;
                violations.push(Violation {
                    clause: 4,
                    position,
                    outcome: outcome_name(m, m),
                    detail: format!("rises by {} from T={t} to T={}", ratio_string(&du), t + 1),
                });
            }
        }

        positions.push(Prop5Position {
            position,
            unconstrained,
            first_choice,
            unassigned,
            first_choice_nonincreasing: first_ok,
            lower_ranks_nondecreasing: lower_ok,
            unassigned_nonincreasing: unassigned_ok,
            constant_while_unconstrained: constant_ok,
            equals_da_at_max: by_round.last().expect("non-empty")[p].counts == da[p].counts,
        });
    }

    let first_choice_direction = match (any_drop, any_rise) {
        (true, false) => FirstChoiceDirection::Decreasing,
        (false, true) => FirstChoiceDirection::Increasing,
        (false, false) => FirstChoiceDirection::Constant,
        (true, true) => FirstChoiceDirection::Mixed,
    };

    Ok(Prop5Report {
        n,
        capacities: capacities.to_vec(),
        max_rounds,
        by_round,
        da,
        positions,
        first_choice_direction,
        violations,
    })
}

/// Smallest utility for the first choice at which TCDM's expected utility
/// weakly exceeds DA's, with the unassigned outcome worth zero.
///
/// `lower_utilities` holds `u_2, …, u_m`.
pub fn corollary1_threshold(
    tcdm: &ExactRankDistribution,
    da: &ExactRankDistribution,
    lower_utilities: &[Margin],
) -> Result<Margin> {
    let m = tcdm.num_ranks();
    if da.num_ranks() != m || lower_utilities.len() + 1 != m {
        return Err(Error::InvalidConfig(format!(
            "expected {} lower-rank utilities for {m} colleges",
            m.saturating_sub(1)
        )));
    }
    if lower_utilities.iter().any(|u| *u < Margin::zero()) {
        return Err(Error::InvalidConfig("utilities must be nonnegative".into()));
    }
    let gain = tcdm.prob_signed(0) - da.prob_signed(0);
    if gain.is_zero() {
        return Err(Error::NoFiniteThreshold);
    }
    if gain < Margin::zero() {
        return Err(Error::ThresholdPrecondition {
            tcdm: tcdm.to_float().first_choice(),
            da: da.to_float().first_choice(),
        });
    }
    let loss: Margin = lower_utilities
        .iter()
        .enumerate()
        .map(|(k, u)| (da.prob_signed(k + 1) - tcdm.prob_signed(k + 1)) * u)
        .fold(Margin::zero(), |a, b| a + b);
    Ok(loss / gain)
}

fn ser_margin<S: serde::Serializer>(m: &Margin, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&ratio_string(m))
}

fn ser_margins<S: serde::Serializer>(ms: &[Margin], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ms.iter().map(ratio_string))
}
