//! Doctor and patient state, identifiers, and random initialization.
//!
//! Identifiers are dense: the agent with id `i` lives at index `i` of its
//! population, and peer maps are indexed the same way.

use std::fmt;
use std::marker::PhantomData;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::ModelVariant;
use crate::rng::RngStream;

pub trait AgentId: Copy + Ord + fmt::Debug {
    fn index(self) -> usize;
    fn from_index(index: usize) -> Self;
}

macro_rules! agent_id {
    ($name:ident, $prefix:literal) => {
        #[derive(
            Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        pub struct $name(pub u32);

        impl AgentId for $name {
            fn index(self) -> usize {
                self.0 as usize
            }

            fn from_index(index: usize) -> Self {
                Self(u32::try_from(index).expect("agent index exceeds u32"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

agent_id!(DoctorId, "d");
agent_id!(PatientId, "p");

/// Map from agent id to a real value, stored densely by id.
///
/// Used for directed tie strengths and for doctors' respect toward
/// colleagues. Iteration is always in ascending id order.
#[derive(Clone, PartialEq)]
pub struct PeerMap<K> {
    slots: Vec<Option<f64>>,
    len: usize,
    _key: PhantomData<K>,
}

impl<K> Default for PeerMap<K> {
    fn default() -> Self {
        Self {
            slots: Vec::new(),
            len: 0,
            _key: PhantomData,
        }
    }
}

impl<K: AgentId> fmt::Debug for PeerMap<K> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.iter()).finish()
    }
}

impl<K: AgentId> PeerMap<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// A map over ids `0..count` except `skip`, with values from `value` in
    /// ascending id order.
    pub fn filled(count: usize, skip: Option<K>, mut value: impl FnMut(K) -> f64) -> Self {
        let skip = skip.map(AgentId::index);
        let slots: Vec<Option<f64>> = (0..count)
            .map(|i| (Some(i) != skip).then(|| value(K::from_index(i))))
            .collect();
        let len = slots.iter().filter(|s| s.is_some()).count();
        Self {
            slots,
            len,
            _key: PhantomData,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, key: K) -> Option<f64> {
        self.slots.get(key.index()).copied().flatten()
    }

    pub fn contains(&self, key: K) -> bool {
        self.get(key).is_some()
    }

    pub fn insert(&mut self, key: K, value: f64) {
        let i = key.index();
        if i >= self.slots.len() {
            self.slots.resize(i + 1, None);
        }
        if self.slots[i].replace(value).is_none() {
            self.len += 1;
        }
    }

    /// Mutable access to an existing entry.
    pub fn get_mut(&mut self, key: K) -> Option<&mut f64> {
        self.slots.get_mut(key.index()).and_then(Option::as_mut)
    }

    pub fn iter(&self) -> impl Iterator<Item = (K, f64)> + '_ {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.map(|v| (K::from_index(i), v)))
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.slots.iter_mut().filter_map(Option::as_mut)
    }

    pub fn keys(&self) -> impl Iterator<Item = K> + '_ {
        self.iter().map(|(k, _)| k)
    }

    /// The `n`-th key in ascending order.
    pub fn nth_key(&self, n: usize) -> Option<K> {
        self.keys().nth(n)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.iter().map(|(_, v)| v)
    }
}

/// Doctor qualification level. Ordered `Low < Medium < High`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Credential {
    Low,
    Medium,
    High,
}

impl Credential {
    pub const ALL: [Credential; 3] = [Credential::Low, Credential::Medium, Credential::High];

    /// Contribution to treatment effectiveness and to colleague respect.
    pub fn treatment_factor(self) -> f64 {
        match self {
            Credential::Low => 0.1,
            Credential::Medium => 0.2,
            Credential::High => 0.3,
        }
    }

    /// Score a patient assigns to the credential when judging a doctor.
    pub fn judgment_score(self) -> f64 {
        match self {
            Credential::Low => 0.1,
            Credential::Medium => 0.5,
            Credential::High => 1.0,
        }
    }
}

/// How a patient weighs credential, public mean rating and own past rating.
/// The three weights always sum to one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JudgmentWeights {
    pub credential: f64,
    pub mean_rating: f64,
    pub past_rating: f64,
}

impl JudgmentWeights {
    pub const EQUAL: JudgmentWeights = JudgmentWeights {
        credential: 1.0 / 3.0,
        mean_rating: 1.0 / 3.0,
        past_rating: 1.0 / 3.0,
    };

    pub fn sum(&self) -> f64 {
        self.credential + self.mean_rating + self.past_rating
    }

    /// Scales the weights to sum to one; falls back to equal thirds when the
    /// total is not positive.
    pub fn normalized(self) -> Self {
        let total = self.sum();
        if total > 0.0 {
            Self {
                credential: self.credential / total,
                mean_rating: self.mean_rating / total,
                past_rating: self.past_rating / total,
            }
        } else {
            Self::EQUAL
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DoctorState {
    pub id: DoctorId,
    pub experience: u32,
    pub research_ability: f64,
    pub empathy: f64,
    pub personal_resource_constraint: f64,
    pub personal_resource: f64,
    pub technological_resource_constraint: f64,
    pub credential: Credential,
    pub is_busy: bool,
    pub social_ties_doctors: PeerMap<DoctorId>,
    pub social_ties_patients: PeerMap<PatientId>,
    pub respect_for_colleagues: PeerMap<DoctorId>,
    pub confidence: f64,
    pub weight_wmrat: f64,
    pub weight_mwres: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PatientState {
    pub id: PatientId,
    pub health_level: f64,
    pub resilience: f64,
    pub weights: JudgmentWeights,
    pub is_infected: bool,
    pub infected_order: Option<u64>,
    pub last_doctor: Option<DoctorId>,
    pub health_history: Vec<f64>,
    pub social_ties_doctors: PeerMap<DoctorId>,
    pub social_ties_patients: PeerMap<PatientId>,
}

/// Population sizes the agents are initialized against.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Roster {
    pub num_doctors: usize,
    pub num_patients: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum InitError {
    #[error("{id} is outside a population of {size}")]
    IdOutOfRange { id: String, size: usize },
    #[error("{id} appears more than once")]
    DuplicateId { id: String },
    #[error("slot {slot} holds {id}; populations must be ordered by id")]
    MisplacedId { slot: usize, id: String },
}

pub const PERSONAL_RESOURCE_CONSTRAINT: f64 = 0.8;

/// Draw order: research, empathy, technological constraint, credential, then
/// (css only) doctor ties and patient ties in ascending id order.
pub fn init_doctor(
    id: DoctorId,
    model: ModelVariant,
    roster: Roster,
    rng: &mut RngStream,
) -> Result<DoctorState, InitError> {
    if id.index() >= roster.num_doctors {
        return Err(InitError::IdOutOfRange {
            id: id.to_string(),
            size: roster.num_doctors,
        });
    }
    let research_ability = rng.uniform(0.2, 0.6);
    let empathy = rng.uniform(0.2, 0.7);
    let technological_resource_constraint = rng.uniform(0.2, 0.5);
    let credential = Credential::ALL[rng.index(3)];
    let (social_ties_doctors, social_ties_patients, respect_for_colleagues, weights) =
        if model.is_css() {
            let doctors = PeerMap::filled(roster.num_doctors, Some(id), |_| rng.unit());
            let patients = PeerMap::filled(roster.num_patients, None, |_| rng.unit());
            let respect = PeerMap::filled(roster.num_doctors, Some(id), |_| 0.0);
            (doctors, patients, respect, 0.5)
        } else {
            (PeerMap::new(), PeerMap::new(), PeerMap::new(), 0.0)
        };
    Ok(DoctorState {
        id,
        experience: 0,
        research_ability,
        empathy,
        personal_resource_constraint: PERSONAL_RESOURCE_CONSTRAINT,
        personal_resource: 1.0 - PERSONAL_RESOURCE_CONSTRAINT,
        technological_resource_constraint,
        credential,
        is_busy: false,
        social_ties_doctors,
        social_ties_patients,
        respect_for_colleagues,
        confidence: 0.0,
        weight_wmrat: weights,
        weight_mwres: weights,
    })
}

/// Draw order: health, resilience, raw credential / mean / past weights,
/// then (css only) doctor ties and patient ties in ascending id order.
pub fn init_patient(
    id: PatientId,
    model: ModelVariant,
    roster: Roster,
    rng: &mut RngStream,
) -> Result<PatientState, InitError> {
    if id.index() >= roster.num_patients {
        return Err(InitError::IdOutOfRange {
            id: id.to_string(),
            size: roster.num_patients,
        });
    }
    let health_level = rng.uniform(0.5, 1.0);
    let resilience = rng.uniform(0.1, 0.4);
    // Past rating draws from a doubled range so it carries the largest share.
    let weights = JudgmentWeights {
        credential: rng.uniform(0.0, 1.0),
        mean_rating: rng.uniform(0.0, 1.0),
        past_rating: rng.uniform(0.0, 2.0),
    }
    .normalized();
    let (social_ties_doctors, social_ties_patients) = if model.is_css() {
        let doctors = PeerMap::filled(roster.num_doctors, None, |_| rng.unit());
        let patients = PeerMap::filled(roster.num_patients, Some(id), |_| rng.unit());
        (doctors, patients)
    } else {
        (PeerMap::new(), PeerMap::new())
    };
    Ok(PatientState {
        id,
        health_level,
        resilience,
        weights,
        is_infected: false,
        infected_order: None,
        last_doctor: None,
        health_history: Vec::new(),
        social_ties_doctors,
        social_ties_patients,
    })
}

pub fn init_doctors(model: ModelVariant, roster: Roster, rng: &mut RngStream) -> Vec<DoctorState> {
    (0..roster.num_doctors)
        .map(|i| {
            init_doctor(DoctorId::from_index(i), model, roster, rng).expect("id within roster")
        })
        .collect()
}

pub fn init_patients(
    model: ModelVariant,
    roster: Roster,
    rng: &mut RngStream,
) -> Vec<PatientState> {
    (0..roster.num_patients)
        .map(|i| {
            init_patient(PatientId::from_index(i), model, roster, rng).expect("id within roster")
        })
        .collect()
}

/// Checks that `ids[i]` is the id with index `i`, reporting duplicates first.
pub fn check_dense_ids<K: AgentId + fmt::Display>(
    ids: impl IntoIterator<Item = K>,
) -> Result<(), InitError> {
    let ids: Vec<K> = ids.into_iter().collect();
    let mut seen = vec![false; ids.len()];
    for id in &ids {
        if let Some(flag) = seen.get_mut(id.index()) {
            if *flag {
                return Err(InitError::DuplicateId { id: id.to_string() });
            }
            *flag = true;
        }
    }
    for (slot, id) in ids.iter().enumerate() {
        if id.index() != slot {
            return Err(InitError::MisplacedId {
                slot,
                id: id.to_string(),
            });
        }
    }
    Ok(())
}
