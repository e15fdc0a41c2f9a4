//! Infection spread, triage ordering and the care-seeking test.

use std::cmp::Ordering;

use crate::agents::PatientState;
use crate::config::CareRules;
use crate::rng::RngStream;

/// Patients at or below this health cannot be infected.
pub const INFECTION_FLOOR: f64 = 0.1;

/// Hands out global infection sequence numbers for one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InfectionCounter {
    next_order: u64,
}

impl InfectionCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn peek(&self) -> u64 {
        self.next_order
    }

    pub fn take_next(&mut self) -> u64 {
        let order = self.next_order;
        self.next_order += 1;
        order
    }
}

pub fn is_eligible(patient: &PatientState) -> bool {
    !patient.is_infected && patient.health_level > INFECTION_FLOOR
}

/// Infects an eligible patient. Returns whether anything changed.
pub fn infect(patient: &mut PatientState, order: u64, rules: &CareRules) -> bool {
    if !is_eligible(patient) {
        return false;
    }
    patient.health_level = (patient.health_level - rules.infection_severity).max(0.0);
    patient.is_infected = true;
    patient.infected_order = Some(order);
    true
}

/// Infects up to `n` distinct eligible patients chosen uniformly without
/// replacement. Returns the number infected.
pub fn spread_infection(
    patients: &mut [PatientState],
    n: usize,
    counter: &mut InfectionCounter,
    rules: &CareRules,
    rng: &mut RngStream,
) -> usize {
    if n == 0 {
        return 0;
    }
    let eligible: Vec<usize> = patients
        .iter()
        .enumerate()
        .filter(|(_, p)| is_eligible(p))
        .map(|(i, _)| i)
        .collect();
    let picks = rng.sample_indices(eligible.len(), n);
    for &pick in &picks {
        let order = counter.take_next();
        infect(&mut patients[eligible[pick]], order, rules);
    }
    picks.len()
}

/// Triage key: infected before healthy, earlier infection first, then lower
/// health. `None` order stands for infinity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Priority {
    pub not_infected: bool,
    pub order: Option<u64>,
    pub health: f64,
}

impl Priority {
    pub fn total_cmp(&self, other: &Self) -> Ordering {
        // None (infinity) sorts after every finite order.
        let order_key = |o: Option<u64>| (o.is_none(), o.unwrap_or(0));
        self.not_infected
            .cmp(&other.not_infected)
            .then_with(|| order_key(self.order).cmp(&order_key(other.order)))
            .then_with(|| self.health.total_cmp(&other.health))
    }
}

pub fn priority(patient: &PatientState) -> Priority {
    if patient.is_infected {
        Priority {
            not_infected: false,
            order: patient.infected_order,
            health: patient.health_level,
        }
    } else {
        Priority {
            not_infected: true,
            order: None,
            health: patient.health_level,
        }
    }
}

/// Patient indices in triage order; equal keys fall back to ascending id.
pub fn triage_order(patients: &[PatientState]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..patients.len()).collect();
    order.sort_by(|&a, &b| {
        priority(&patients[a])
            .total_cmp(&priority(&patients[b]))
            .then_with(|| patients[a].id.cmp(&patients[b].id))
    });
    order
}

pub fn needs_doctor(patient: &PatientState, rules: &CareRules) -> bool {
    let h = patient.health_level;
    h < rules.needs_doctor_threshold
        || (patient.is_infected && rules.infected_seek_threshold.is_some_and(|t| h < t))
}
