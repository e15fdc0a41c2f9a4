//! Classical model: treatment, credential progression, judgment, doctor
//! choice, health update and integer ratings.

use crate::agents::{Credential, DoctorId, DoctorState, PatientState};
use crate::config::CareRules;
use crate::infection::needs_doctor;
use crate::ledger::{RatingLedger, MAX_RATING};

/// Treatment never leaves a patient below this health.
pub const HEALTH_FLOOR: f64 = 0.1;

pub fn treatment_effectiveness(doctor: &DoctorState, rules: &CareRules) -> f64 {
    let raw = (doctor.credential.treatment_factor() + doctor.empathy)
        * (1.0 - doctor.technological_resource_constraint);
    raw.min(rules.effectiveness_cap)
}

/// Moves the credential at most one level up when the research and
/// experience thresholds for the next level are met.
pub fn upgrade_credential(doctor: &mut DoctorState) {
    doctor.credential = match doctor.credential {
        Credential::Low if doctor.research_ability >= 0.5 && doctor.experience >= 50 => {
            Credential::Medium
        }
        Credential::Medium if doctor.research_ability >= 0.8 && doctor.experience >= 80 => {
            Credential::High
        }
        current => current,
    };
}

/// Shared treatment bookkeeping: a busy doctor delivers nothing; otherwise
/// the doctor is occupied until the next round reset, the effectiveness is
/// computed from the pre-treatment state, and experience grows by one.
pub(crate) fn treat_with(
    doctor: &mut DoctorState,
    effectiveness: impl FnOnce(&DoctorState) -> f64,
) -> f64 {
    if doctor.is_busy {
        return 0.0;
    }
    doctor.is_busy = true;
    let delivered = effectiveness(doctor);
    doctor.experience += 1;
    upgrade_credential(doctor);
    delivered
}

pub fn treat_patient(doctor: &mut DoctorState, rules: &CareRules) -> f64 {
    treat_with(doctor, |d| treatment_effectiveness(d, rules))
}

pub fn judge_doctor(patient: &PatientState, doctor: &DoctorState, ledger: &RatingLedger) -> f64 {
    let w = &patient.weights;
    let past = ledger
        .rating_by_patient(doctor.id, patient.id)
        .unwrap_or(0.0);
    w.credential * doctor.credential.judgment_score()
        + w.mean_rating * ledger.mean_rating(doctor.id)
        + w.past_rating * past
}

/// Doctor choice shared by both models.
///
/// Returns `None` when the patient is healthy enough or every doctor is busy.
/// A free last doctor who earned a perfect rating is kept. Otherwise the free
/// doctor with the highest `judge` score wins, lowest id on ties.
pub fn choose_doctor_by(
    patient: &PatientState,
    doctors: &[DoctorState],
    ledger: &RatingLedger,
    rules: &CareRules,
    judge: impl Fn(&PatientState, &DoctorState, &RatingLedger) -> f64,
) -> Option<DoctorId> {
    if !needs_doctor(patient, rules) {
        return None;
    }
    let available: Vec<&DoctorState> = doctors.iter().filter(|d| !d.is_busy).collect();
    if available.is_empty() {
        return None;
    }
    let perfect_with = |id: DoctorId| ledger.rating_by_patient(id, patient.id) == Some(MAX_RATING);
    if let Some(last) = patient.last_doctor {
        if perfect_with(last) && available.iter().any(|d| d.id == last) {
            return Some(last);
        }
    }
    let eligible: Vec<&DoctorState> = available
        .iter()
        .copied()
        .filter(|d| Some(d.id) != patient.last_doctor || !perfect_with(d.id))
        .collect();
    let pool = if eligible.is_empty() {
        &available
    } else {
        &eligible
    };
    let mut best: Option<(DoctorId, f64)> = None;
    for doctor in pool {
        let score = judge(patient, doctor, ledger);
        let better = match best {
            None => true,
            Some((id, top)) => score > top || (score == top && doctor.id < id),
        };
        if better {
            best = Some((doctor.id, score));
        }
    }
    best.map(|(id, _)| id)
}

pub fn choose_doctor(
    patient: &PatientState,
    doctors: &[DoctorState],
    ledger: &RatingLedger,
    rules: &CareRules,
) -> Option<DoctorId> {
    choose_doctor_by(patient, doctors, ledger, rules, judge_doctor)
}

/// Adds `effectiveness`, clamps to `[0.1, 1]`, and records the result.
pub fn update_health_level(patient: &mut PatientState, effectiveness: f64) {
    patient.health_level = (patient.health_level + effectiveness).clamp(HEALTH_FLOOR, 1.0);
    patient.health_history.push(patient.health_level);
}

/// Integer rating from post-treatment health: 5 at or above the perfect
/// threshold, otherwise `floor(5 · health / threshold)`.
pub fn rate_doctor(patient: &PatientState, rules: &CareRules) -> u8 {
    let h = patient.health_level;
    if h >= rules.rating_perfect_threshold {
        5
    } else {
        (5.0 * (h / rules.rating_perfect_threshold))
            .max(0.0)
            .floor() as u8
    }
}

pub fn receive_treatment(
    patient: &mut PatientState,
    doctor: &mut DoctorState,
    ledger: &mut RatingLedger,
    rules: &CareRules,
) -> u8 {
    let effectiveness = treat_patient(doctor, rules) * (1.0 - patient.resilience);
    update_health_level(patient, effectiveness);
    patient.is_infected = false;
    let rating = rate_doctor(patient, rules);
    ledger
        .add_rating(doctor.id, patient.id, f64::from(rating))
        .expect("integer rating lies in [0, 5]");
    patient.last_doctor = Some(doctor.id);
    rating
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{init_doctors, init_patients, JudgmentWeights, PatientId, Roster};
    use crate::config::ModelVariant;
    use crate::rng::RngStream;

    fn doctor() -> DoctorState {
        let roster = Roster {
            num_doctors: 1,
            num_patients: 1,
        };
        init_doctors(
            ModelVariant::Classical,
            roster,
            &mut RngStream::from_seed(0),
        )
        .remove(0)
    }

    fn patient() -> PatientState {
        let roster = Roster {
            num_doctors: 1,
            num_patients: 1,
        };
        init_patients(
            ModelVariant::Classical,
            roster,
            &mut RngStream::from_seed(0),
        )
        .remove(0)
    }

    fn with(credential: Credential, empathy: f64, trc: f64) -> DoctorState {
        DoctorState {
            credential,
            empathy,
            technological_resource_constraint: trc,
            ..doctor()
        }
    }

    #[test]
    fn effectiveness_examples() {
        let rules = CareRules::default();
        assert!(
            (treatment_effectiveness(&with(Credential::High, 0.7, 0.5), &rules) - 0.5).abs()
                < 1e-12
        );
        assert_eq!(
            treatment_effectiveness(&with(Credential::High, 0.7, 0.0), &rules),
            0.7
        );
        assert_eq!(
            treatment_effectiveness(&with(Credential::Low, 0.0, 1.0), &rules),
            0.0
        );
    }

    #[test]
    fn credential_upgrade_examples() {
        let mut d = DoctorState {
            credential: Credential::Low,
            research_ability: 0.5,
            experience: 50,
            ..doctor()
        };
        upgrade_credential(&mut d);
        assert_eq!(d.credential, Credential::Medium);

        let mut d = DoctorState {
            credential: Credential::Low,
            research_ability: 0.9,
            experience: 100,
            ..doctor()
        };
        upgrade_credential(&mut d);
        assert_eq!(d.credential, Credential::Medium);
        upgrade_credential(&mut d);
        assert_eq!(d.credential, Credential::High);

        let mut d = DoctorState {
            credential: Credential::High,
            research_ability: 0.0,
            ..doctor()
        };
        upgrade_credential(&mut d);
        assert_eq!(d.credential, Credential::High);

        let mut d = DoctorState {
            credential: Credential::Medium,
            research_ability: 0.79,
            experience: 500,
            ..doctor()
        };
        upgrade_credential(&mut d);
        assert_eq!(d.credential, Credential::Medium);
    }

    #[test]
    fn busy_doctor_treats_nobody() {
        let rules = CareRules::default();
        let mut d = DoctorState {
            is_busy: true,
            ..doctor()
        };
        assert_eq!(treat_patient(&mut d, &rules), 0.0);
        assert_eq!(d.experience, 0);
    }

    #[test]
    fn free_doctor_treats_once_per_round() {
        let rules = CareRules::default();
        let mut d = doctor();
        let expected = treatment_effectiveness(&d, &rules);
        assert_eq!(treat_patient(&mut d, &rules), expected);
        assert_eq!(d.experience, 1);
        assert!(d.is_busy);
        assert_eq!(treat_patient(&mut d, &rules), 0.0);
    }

    #[test]
    fn fiftieth_treatment_upgrades() {
        let rules = CareRules::default();
        let mut d = DoctorState {
            credential: Credential::Low,
            research_ability: 0.6,
            experience: 48,
            ..doctor()
        };
        d.is_busy = false;
        treat_patient(&mut d, &rules);
        assert_eq!((d.experience, d.credential), (49, Credential::Low));
        d.is_busy = false;
        treat_patient(&mut d, &rules);
        assert_eq!((d.experience, d.credential), (50, Credential::Medium));
    }

    #[test]
    fn judgment_examples() {
        let third = 1.0 / 3.0;
        let mut ledger = RatingLedger::new();
        let d = DoctorState {
            id: DoctorId(0),
            credential: Credential::Medium,
            ..doctor()
        };
        let p = PatientState {
            id: PatientId(0),
            weights: JudgmentWeights {
                credential: third,
                mean_rating: third,
                past_rating: third,
            },
            ..patient()
        };
        // Mean over {p0: 4, p1: 2} is 3; past rating of p0 is 4.
        ledger.add_rating(DoctorId(0), PatientId(0), 4.0).unwrap();
        ledger.add_rating(DoctorId(0), PatientId(1), 2.0).unwrap();
        assert!((judge_doctor(&p, &d, &ledger) - 2.5).abs() < 1e-9);

        let low = DoctorState {
            credential: Credential::Low,
            ..doctor()
        };
        let cred_only = PatientState {
            weights: JudgmentWeights {
                credential: 1.0,
                mean_rating: 0.0,
                past_rating: 0.0,
            },
            ..patient()
        };
        assert!((judge_doctor(&cred_only, &low, &RatingLedger::new()) - 0.1).abs() < 1e-12);

        let past_only = PatientState {
            weights: JudgmentWeights {
                credential: 0.0,
                mean_rating: 0.0,
                past_rating: 1.0,
            },
            ..patient()
        };
        assert_eq!(judge_doctor(&past_only, &low, &RatingLedger::new()), 0.0);
    }

    fn staff(n: usize) -> Vec<DoctorState> {
        let roster = Roster {
            num_doctors: n,
            num_patients: 4,
        };
        init_doctors(
            ModelVariant::Classical,
            roster,
            &mut RngStream::from_seed(8),
        )
    }

    #[test]
    fn choice_none_when_all_busy_or_healthy() {
        let rules = CareRules::default();
        let mut ds = staff(3);
        let mut p = PatientState {
            health_level: 0.4,
            ..patient()
        };
        for d in &mut ds {
            d.is_busy = true;
        }
        assert_eq!(choose_doctor(&p, &ds, &RatingLedger::new(), &rules), None);
        ds[1].is_busy = false;
        p.health_level = 0.6;
        assert_eq!(choose_doctor(&p, &ds, &RatingLedger::new(), &rules), None);
    }

    #[test]
    fn loyalty_keeps_perfect_doctor() {
        let rules = CareRules::default();
        let mut ds = staff(3);
        ds[2].credential = Credential::Low;
        ds[0].credential = Credential::High;
        let mut ledger = RatingLedger::new();
        for i in 0..5 {
            ledger
                .add_rating(DoctorId(0), PatientId(10 + i), 5.0)
                .unwrap();
        }
        let p = PatientState {
            id: PatientId(0),
            health_level: 0.3,
            last_doctor: Some(DoctorId(2)),
            ..patient()
        };
        ledger.add_rating(DoctorId(2), PatientId(0), 5.0).unwrap();
        assert_eq!(choose_doctor(&p, &ds, &ledger, &rules), Some(DoctorId(2)));
        ds[2].is_busy = true;
        assert_ne!(choose_doctor(&p, &ds, &ledger, &rules), Some(DoctorId(2)));
    }

    #[test]
    fn choice_matches_exhaustive_argmax() {
        let rules = CareRules::default();
        let mut ds = staff(3);
        let mut ledger = RatingLedger::new();
        ledger.add_rating(DoctorId(1), PatientId(3), 4.0).unwrap();
        ledger.add_rating(DoctorId(2), PatientId(0), 2.0).unwrap();
        ds[0].credential = Credential::Medium;
        let p = PatientState {
            id: PatientId(0),
            health_level: 0.3,
            ..patient()
        };
        let best = ds
            .iter()
            .map(|d| (judge_doctor(&p, d, &ledger), d.id))
            .fold(None, |acc: Option<(f64, DoctorId)>, cur| match acc {
                Some(a) if a.0 >= cur.0 => Some(a),
                _ => Some(cur),
            })
            .map(|(_, id)| id);
        assert_eq!(choose_doctor(&p, &ds, &ledger, &rules), best);
    }

    #[test]
    fn health_update_examples() {
        let mut p = PatientState {
            health_level: 0.05,
            health_history: vec![],
            ..patient()
        };
        update_health_level(&mut p, 0.0);
        assert_eq!(p.health_level, 0.1);
        assert_eq!(p.health_history.len(), 1);
        p.health_level = 0.5;
        update_health_level(&mut p, 0.3);
        assert!((p.health_level - 0.8).abs() < 1e-12);
        assert_eq!(p.health_history.len(), 2);
    }

    #[test]
    fn rating_examples() {
        let rules = CareRules::default();
        let at = |h: f64| {
            rate_doctor(
                &PatientState {
                    health_level: h,
                    ..patient()
                },
                &rules,
            )
        };
        assert_eq!(at(0.8), 5);
        assert_eq!(at(0.4), 2);
        assert_eq!(at(0.0), 0);
        assert_eq!(at(0.79), 4);
        let mut last = 0;
        for i in 0..=100 {
            let r = at(i as f64 / 100.0);
            assert!(r >= last && r <= 5);
            last = r;
        }
    }

    #[test]
    fn treatment_examples() {
        let rules = CareRules::default();
        // Doctor effectiveness 0.5, resilience 0.2: health 0.4 + 0.4 = 0.8.
        let mut d = with(Credential::High, 0.7, 0.5);
        let mut p = PatientState {
            health_level: 0.4,
            resilience: 0.2,
            is_infected: true,
            ..patient()
        };
        let mut ledger = RatingLedger::new();
        let rating = receive_treatment(&mut p, &mut d, &mut ledger, &rules);
        assert!((p.health_level - 0.8).abs() < 1e-12);
        assert_eq!(rating, 5);
        assert!(!p.is_infected);
        assert_eq!(p.last_doctor, Some(d.id));
        assert_eq!(ledger.rating_by_patient(d.id, p.id), Some(5.0));

        let mut d = with(Credential::High, 0.7, 0.5);
        let mut p = PatientState {
            health_level: 0.2,
            resilience: 0.4,
            ..patient()
        };
        receive_treatment(&mut p, &mut d, &mut RatingLedger::new(), &rules);
        assert!((p.health_level - 0.5).abs() < 1e-12);

        let mut d = with(Credential::High, 0.7, 0.3);
        let mut p = PatientState {
            health_level: 0.95,
            resilience: 0.5,
            ..patient()
        };
        receive_treatment(&mut p, &mut d, &mut RatingLedger::new(), &rules);
        assert_eq!(p.health_level, 1.0);
    }
}
