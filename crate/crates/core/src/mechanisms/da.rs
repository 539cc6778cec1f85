use std::collections::VecDeque;

use crate::instance::{CollegeId, ProblemInstance, StudentId};
use crate::matching::Matching;

/// Student-proposing deferred acceptance on truthful preferences.
pub fn run_da(instance: &ProblemInstance) -> Matching {
    let n = instance.num_students();
    let mut next_choice = vec![0usize; n];
    let mut held: Vec<Vec<StudentId>> = vec![Vec::new(); instance.num_colleges()];
    let mut free: VecDeque<StudentId> = instance.student_ids().collect();

    while let Some(i) = free.pop_front() {
        let list = instance.preferences(i).acceptable();
        let Some(&c) = list.get(next_choice[i.0]) else {
            continue;
        };
        next_choice[i.0] += 1;
        let seats = &mut held[c.0];
        seats.push(i);
        if seats.len() > instance.capacity(c) as usize {
            // lowest priority is the largest index
            let (worst, _) = seats.iter().enumerate().max_by_key(|(_, s)| s.0).expect("non-empty");
            let rejected = seats.swap_remove(worst);
            free.push_back(rejected);
        }
    }

    let mut out = Matching::unassigned(n);
    for (c, seats) in held.iter().enumerate() {
        for &i in seats {
            out.set(i, Some(CollegeId(c)));
        }
    }
    out
}

/// Students pick, in priority order, their favourite acceptable college with
/// a free seat. Coincides with DA under a common priority.
pub fn serial_dictatorship(instance: &ProblemInstance) -> Matching {
    let mut remaining = instance.capacities();
    let mut out = Matching::unassigned(instance.num_students());
    for i in instance.student_ids() {
        if let Some(&c) = instance.preferences(i).acceptable().iter().find(|c| remaining[c.0] > 0) {
            remaining[c.0] -= 1;
            out.set(i, Some(c));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::example1;
    use crate::instance::PreferenceList;

    #[test]
    fn example1_da() {
        let m = run_da(&example1());
        let expect: Vec<_> = [0, 1, 2, 3].iter().map(|&c| Some(CollegeId(c))).collect();
        assert_eq!(m.as_slice(), expect.as_slice());
    }

    #[test]
    fn single_student_respects_outside_option() {
        let listed = ProblemInstance::ranked(&[1], vec![PreferenceList::full(1, vec![CollegeId(0)]).unwrap()]).unwrap();
        assert_eq!(run_da(&listed).get(StudentId(0)), Some(CollegeId(0)));
        let after_sentinel =
            ProblemInstance::ranked(&[1], vec![PreferenceList::new(1, vec![], vec![CollegeId(0)]).unwrap()]).unwrap();
        assert_eq!(run_da(&after_sentinel).get(StudentId(0)), None);
    }
}
