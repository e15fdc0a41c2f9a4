//! Latest rating per (doctor, patient) pair, plus an append-only log that
//! defines recency.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::agents::{DoctorId, PatientId, PeerMap};

pub const MAX_RATING: f64 = 5.0;
/// Reported by [`RatingLedger::recent_feedback`] for a doctor nobody has rated.
pub const NEUTRAL_FEEDBACK: f64 = 3.0;

#[derive(Debug, Error, PartialEq)]
#[error("rating {rating} from {patient} for {doctor} is outside [0, 5]")]
pub struct RatingOutOfRange {
    pub doctor: DoctorId,
    pub patient: PatientId,
    pub rating: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatingEntry {
    pub doctor: DoctorId,
    pub patient: PatientId,
    pub rating: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatingLedger {
    ratings: BTreeMap<DoctorId, BTreeMap<PatientId, f64>>,
    latest: BTreeMap<DoctorId, f64>,
    log: Vec<RatingEntry>,
}

impl RatingLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a rating. A repeat rating from the same patient replaces the
    /// stored value but is still appended to the log.
    pub fn add_rating(
        &mut self,
        doctor: DoctorId,
        patient: PatientId,
        rating: f64,
    ) -> Result<(), RatingOutOfRange> {
        if !(0.0..=MAX_RATING).contains(&rating) {
            return Err(RatingOutOfRange {
                doctor,
                patient,
                rating,
            });
        }
        self.ratings
            .entry(doctor)
            .or_default()
            .insert(patient, rating);
        self.latest.insert(doctor, rating);
        self.log.push(RatingEntry {
            doctor,
            patient,
            rating,
        });
        Ok(())
    }

    pub fn ratings_for(&self, doctor: DoctorId) -> impl Iterator<Item = (PatientId, f64)> + '_ {
        self.ratings
            .get(&doctor)
            .into_iter()
            .flat_map(|m| m.iter().map(|(&p, &r)| (p, r)))
    }

    pub fn log(&self) -> &[RatingEntry] {
        &self.log
    }

    /// Mean of the doctor's current per-patient ratings; 0 when unrated.
    pub fn mean_rating(&self, doctor: DoctorId) -> f64 {
        match self.ratings.get(&doctor) {
            Some(m) if !m.is_empty() => m.values().sum::<f64>() / m.len() as f64,
            _ => 0.0,
        }
    }

    pub fn rating_by_patient(&self, doctor: DoctorId, patient: PatientId) -> Option<f64> {
        self.ratings.get(&doctor)?.get(&patient).copied()
    }

    /// Most recently logged rating for the doctor, or [`NEUTRAL_FEEDBACK`].
    pub fn recent_feedback(&self, doctor: DoctorId) -> f64 {
        self.latest
            .get(&doctor)
            .copied()
            .unwrap_or(NEUTRAL_FEEDBACK)
    }

    /// `Σ r·s / Σ s` over raters with positive tie strength; 0 when the
    /// strengths sum to zero.
    pub fn mean_weighted_ratings(&self, doctor: DoctorId, ties: &PeerMap<PatientId>) -> f64 {
        let mut weighted = 0.0;
        let mut total = 0.0;
        for (patient, rating) in self.ratings_for(doctor) {
            let strength = ties.get(patient).unwrap_or(0.0);
            if strength > 0.0 {
                weighted += rating * strength;
                total += strength;
            }
        }
        if total > 0.0 {
            weighted / total
        } else {
            0.0
        }
    }

    /// Unnormalized `Σ r·s` over everyone who rated the doctor, with `s` taken
    /// from the evaluator's ties (0 when absent).
    pub fn weighted_valuation(&self, doctor: DoctorId, evaluator_ties: &PeerMap<PatientId>) -> f64 {
        self.ratings_for(doctor)
            .map(|(patient, rating)| rating * evaluator_ties.get(patient).unwrap_or(0.0))
            .sum()
    }
}
