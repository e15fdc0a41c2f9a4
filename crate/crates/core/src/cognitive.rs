//! Cognitive social system extensions: colleague respect, confidence,
//! tie-weighted judgment and tie-adjusted one-decimal ratings.

use crate::agents::{DoctorId, DoctorState, PatientState, PeerMap};
use crate::classical::{choose_doctor_by, treat_with, update_health_level};
use crate::config::CareRules;
use crate::ledger::{RatingLedger, MAX_RATING};

/// `Σ R_i·S_i / Σ S_i` over colleagues, where `R_i` is colleague `i`'s respect
/// for `doctor` and `S_i` is `doctor`'s tie to `i`. Zero when the ties sum
/// to zero.
pub fn mean_weighted_respects(doctor: &DoctorState, all_doctors: &[DoctorState]) -> f64 {
    let mut weighted = 0.0;
    let mut total = 0.0;
    for other in all_doctors.iter().filter(|o| o.id != doctor.id) {
        let respect = other.respect_for_colleagues.get(doctor.id).unwrap_or(0.0);
        let strength = doctor.social_ties_doctors.get(other.id).unwrap_or(0.0);
        weighted += respect * strength;
        total += strength;
    }
    if total > 0.0 {
        weighted / total
    } else {
        0.0
    }
}

/// Respect `doctor` would hold for each colleague `j`:
/// `S_j · (credential factor_j + weighted valuation of j's ratings)`.
pub fn respect_for_colleagues(
    doctor: &DoctorState,
    all_doctors: &[DoctorState],
    ledger: &RatingLedger,
) -> PeerMap<DoctorId> {
    let mut respect = PeerMap::new();
    for other in all_doctors.iter().filter(|o| o.id != doctor.id) {
        let valuation = ledger.weighted_valuation(other.id, &doctor.social_ties_patients);
        let strength = doctor.social_ties_doctors.get(other.id).unwrap_or(0.0);
        respect.insert(
            other.id,
            strength * (other.credential.treatment_factor() + valuation),
        );
    }
    respect
}

pub fn update_respect_for_colleagues(
    all_doctors: &mut [DoctorState],
    index: usize,
    ledger: &RatingLedger,
) {
    let respect = respect_for_colleagues(&all_doctors[index], all_doctors, ledger);
    all_doctors[index].respect_for_colleagues = respect;
}

pub fn confidence(doctor: &DoctorState, ledger: &RatingLedger, all_doctors: &[DoctorState]) -> f64 {
    doctor.weight_wmrat * ledger.mean_weighted_ratings(doctor.id, &doctor.social_ties_patients)
        + doctor.weight_mwres * mean_weighted_respects(doctor, all_doctors)
}

pub fn update_confidence(all_doctors: &mut [DoctorState], index: usize, ledger: &RatingLedger) {
    let value = confidence(&all_doctors[index], ledger, all_doctors);
    all_doctors[index].confidence = value;
}

/// Pre-round sweep. Every respect map is recomputed from the same snapshot
/// and committed together; confidences are then derived from the committed
/// respects.
pub fn refresh_respect_and_confidence(all_doctors: &mut [DoctorState], ledger: &RatingLedger) {
    let respects: Vec<PeerMap<DoctorId>> = all_doctors
        .iter()
        .map(|d| respect_for_colleagues(d, all_doctors, ledger))
        .collect();
    for (doctor, respect) in all_doctors.iter_mut().zip(respects) {
        doctor.respect_for_colleagues = respect;
    }
    let confidences: Vec<f64> = all_doctors
        .iter()
        .map(|d| confidence(d, ledger, all_doctors))
        .collect();
    for (doctor, value) in all_doctors.iter_mut().zip(confidences) {
        doctor.confidence = value;
    }
}

pub fn treatment_effectiveness_css(doctor: &DoctorState, rules: &CareRules) -> f64 {
    let raw = (doctor.credential.treatment_factor() + doctor.empathy + doctor.confidence)
        * (1.0 - doctor.technological_resource_constraint);
    raw.min(rules.effectiveness_cap)
}

pub fn treat_patient_css(doctor: &mut DoctorState, rules: &CareRules) -> f64 {
    treat_with(doctor, |d| treatment_effectiveness_css(d, rules))
}

/// Judgment with the credential term scaled by the patient's tie to the
/// doctor and the public rating replaced by a tie-weighted mean over the
/// patient's peers.
pub fn judge_doctor_css(
    patient: &PatientState,
    doctor: &DoctorState,
    ledger: &RatingLedger,
) -> f64 {
    let w = &patient.weights;
    let tie = patient.social_ties_doctors.get(doctor.id).unwrap_or(0.0);
    // The patient holds no tie to itself, so its own rating is excluded here.
    let peer_mean = ledger.mean_weighted_ratings(doctor.id, &patient.social_ties_patients);
    let past = ledger
        .rating_by_patient(doctor.id, patient.id)
        .unwrap_or(0.0);
    w.credential * doctor.credential.judgment_score() * tie
        + w.mean_rating * peer_mean
        + w.past_rating * past
}

pub fn choose_doctor_css(
    patient: &PatientState,
    doctors: &[DoctorState],
    ledger: &RatingLedger,
    rules: &CareRules,
) -> Option<DoctorId> {
    choose_doctor_by(patient, doctors, ledger, rules, judge_doctor_css)
}

/// Rounds half away from zero to one decimal place.
pub fn round_one_decimal(x: f64) -> f64 {
    (x * 10.0).round() / 10.0
}

/// `min(5, round_1(base · (1 + 0.1·S_d)))` with a real-valued base rating.
pub fn rate_doctor_css(health: f64, tie_to_doctor: f64, rules: &CareRules) -> f64 {
    let base = if health >= rules.rating_perfect_threshold {
        MAX_RATING
    } else {
        (MAX_RATING * (health / rules.rating_perfect_threshold)).max(0.0)
    };
    round_one_decimal(base * (1.0 + 0.1 * tie_to_doctor)).min(MAX_RATING)
}

pub fn receive_treatment_css(
    patient: &mut PatientState,
    doctor: &mut DoctorState,
    ledger: &mut RatingLedger,
    rules: &CareRules,
) -> f64 {
    let effectiveness = treat_patient_css(doctor, rules) * (1.0 - patient.resilience);
    update_health_level(patient, effectiveness);
    patient.is_infected = false;
    let tie = patient.social_ties_doctors.get(doctor.id).unwrap_or(0.0);
    let rating = rate_doctor_css(patient.health_level, tie, rules);
    ledger
        .add_rating(doctor.id, patient.id, rating)
        .expect("css rating lies in [0, 5]");
    patient.last_doctor = Some(doctor.id);
    rating
}
