//! Microbial genetic algorithm: tournaments of `k` individuals, where the
//! loser absorbs recombined traits from the winner and is then mutated,
//! with elites restored verbatim at the end of each step.

use serde::{Deserialize, Serialize};

use crate::agents::{AgentId, DoctorState, JudgmentWeights, PatientState, PeerMap};
use crate::config::{ModelVariant, SimulationConfig};
use crate::ledger::RatingLedger;
use crate::rng::RngStream;

/// Probability that a crossover call actually recombines.
pub const INNER_CROSSOVER_CHANCE: f64 = 0.5;
/// Doctor mutation steps are drawn from `U(0, MAX_DOCTOR_STEP)` before scaling.
pub const MAX_DOCTOR_STEP: f64 = 0.05;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaParams {
    pub tournament_size: usize,
    pub num_elites: usize,
    pub mutation_chance: f64,
    pub crossover_chance: f64,
    pub tournaments_per_round: usize,
}

impl GaParams {
    pub fn for_doctors(config: &SimulationConfig) -> Self {
        Self::with_tournaments(config, config.doctor_tournaments())
    }

    pub fn for_patients(config: &SimulationConfig) -> Self {
        Self::with_tournaments(config, config.patient_tournaments())
    }

    fn with_tournaments(config: &SimulationConfig, tournaments_per_round: usize) -> Self {
        Self {
            tournament_size: config.tournament_size,
            num_elites: config.num_elites,
            mutation_chance: config.mutation_chance,
            crossover_chance: config.crossover_chance,
            tournaments_per_round,
        }
    }
}

/// How css patient mutation perturbs ties.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatientTieMutation {
    /// Every tie in the chosen class (doctors or patients) is perturbed.
    #[default]
    EveryTie,
    /// A single random tie in the chosen class is perturbed.
    SingleTie,
}

pub fn fitness_doctor(doctor: &DoctorState, ledger: &RatingLedger) -> f64 {
    ledger.mean_rating(doctor.id)
}

/// Mean of the health history, or the current health when there is none.
pub fn fitness_patient(patient: &PatientState) -> f64 {
    if patient.health_history.is_empty() {
        patient.health_level
    } else {
        patient.health_history.iter().sum::<f64>() / patient.health_history.len() as f64
    }
}

/// Positions ordered by descending fitness, ascending position on ties.
fn rank(indices: &mut [usize], fitness: &[f64]) {
    indices.sort_by(|&a, &b| fitness[b].total_cmp(&fitness[a]).then(a.cmp(&b)));
}

/// Samples `k` distinct individuals and returns `(winner, loser)` positions:
/// the first and last of the sample ranked by descending fitness, with ties
/// ordered by ascending position.
pub fn tournament_select<T>(
    population: &[T],
    k: usize,
    fitness: impl Fn(&T) -> f64,
    rng: &mut RngStream,
) -> (usize, usize) {
    assert!(
        k >= 1 && k <= population.len(),
        "tournament size {k} outside 1..={}",
        population.len()
    );
    let mut picks = rng.sample_indices(population.len(), k);
    let scores: Vec<f64> = (0..population.len())
        .map(|i| {
            if picks.contains(&i) {
                fitness(&population[i])
            } else {
                0.0
            }
        })
        .collect();
    rank(&mut picks, &scores);
    (picks[0], picks[picks.len() - 1])
}

fn clamp_unit(x: f64) -> f64 {
    x.clamp(0.0, 1.0)
}

/// Classical doctor mutation. Low recent feedback (< 3) triples the step;
/// otherwise it is halved. The step is paid from the personal resource and
/// never exceeds what remains. Research ability is chosen with probability
/// 0.7, empathy otherwise.
pub fn mutate_doctor_classical(
    doctor: &mut DoctorState,
    ledger: &RatingLedger,
    rng: &mut RngStream,
) {
    let factor = if ledger.recent_feedback(doctor.id) < 3.0 {
        3.0
    } else {
        0.5
    };
    let amount = (doctor
        .personal_resource
        .min(rng.uniform(0.0, MAX_DOCTOR_STEP))
        * factor)
        .min(doctor.personal_resource);
    let trait_roll = rng.unit();
    let change = amount * rng.sign();
    if trait_roll < 0.7 {
        doctor.research_ability = clamp_unit(doctor.research_ability + change);
    } else {
        doctor.empathy = clamp_unit(doctor.empathy + change);
    }
    doctor.personal_resource = (doctor.personal_resource - amount).max(0.0);
}

/// Resource-funded step on a trait; rejected outright if it would leave [0, 1].
fn funded_step(value: &mut f64, resource: &mut f64, amount: f64, rng: &mut RngStream) {
    if *resource <= 0.0 {
        return;
    }
    let change = amount * rng.sign();
    if (0.0..=1.0).contains(&(*value + change)) {
        let actual = change.abs().min(*resource);
        *value += actual * change.signum();
        *resource -= actual;
    }
}

fn nudge_random_tie<K: AgentId>(ties: &mut PeerMap<K>, amount: f64, rng: &mut RngStream) {
    let key = ties
        .nth_key(rng.index(ties.len()))
        .expect("index below len");
    let change = amount * rng.sign();
    let slot = ties.get_mut(key).expect("key present");
    *slot = clamp_unit(*slot + change);
}

/// Css doctor mutation: one of five equally likely targets (research,
/// empathy, rating weight, respect weight, one random tie).
pub fn mutate_doctor_css(doctor: &mut DoctorState, ledger: &RatingLedger, rng: &mut RngStream) {
    let factor = if ledger.recent_feedback(doctor.id) < 3.0 {
        1.5
    } else {
        0.5
    };
    let amount = rng.uniform(0.0, MAX_DOCTOR_STEP) * factor;
    let trait_roll = rng.unit();
    if trait_roll < 0.2 {
        funded_step(
            &mut doctor.research_ability,
            &mut doctor.personal_resource,
            amount,
            rng,
        );
    } else if trait_roll < 0.4 {
        funded_step(
            &mut doctor.empathy,
            &mut doctor.personal_resource,
            amount,
            rng,
        );
    } else if trait_roll < 0.6 {
        doctor.weight_wmrat = clamp_unit(doctor.weight_wmrat + amount * rng.sign());
    } else if trait_roll < 0.8 {
        doctor.weight_mwres = clamp_unit(doctor.weight_mwres + amount * rng.sign());
    } else {
        let toward_doctors = rng.unit() < 0.5;
        if toward_doctors && !doctor.social_ties_doctors.is_empty() {
            nudge_random_tie(&mut doctor.social_ties_doctors, amount, rng);
        } else if !doctor.social_ties_patients.is_empty() {
            nudge_random_tie(&mut doctor.social_ties_patients, amount, rng);
        }
    }
    doctor.personal_resource = doctor.personal_resource.max(0.0);
}

fn jitter_ties<K: AgentId>(ties: &mut PeerMap<K>, mode: PatientTieMutation, rng: &mut RngStream) {
    match mode {
        PatientTieMutation::EveryTie => {
            for slot in ties.values_mut() {
                *slot = clamp_unit(*slot + rng.uniform(-0.1, 0.1));
            }
        }
        PatientTieMutation::SingleTie => {
            if !ties.is_empty() {
                let key = ties
                    .nth_key(rng.index(ties.len()))
                    .expect("index below len");
                let slot = ties.get_mut(key).expect("key present");
                *slot = clamp_unit(*slot + rng.uniform(-0.1, 0.1));
            }
        }
    }
}

/// Renormalizes judgment weights after clamping any negative weight to 0,
/// so the weights stay in [0, 1] and sum to one.
fn renormalize(weights: JudgmentWeights) -> JudgmentWeights {
    JudgmentWeights {
        credential: weights.credential.max(0.0),
        mean_rating: weights.mean_rating.max(0.0),
        past_rating: weights.past_rating.max(0.0),
    }
    .normalized()
}

/// Shifts credential and mean weights by `m` and the past weight by `-2m`,
/// perturbs resilience within [0.1, 0.4], renormalizes, and for css jitters
/// either the doctor ties or the patient ties with equal chance.
pub fn mutate_patient(
    patient: &mut PatientState,
    model: ModelVariant,
    ties: PatientTieMutation,
    rng: &mut RngStream,
) {
    let shift = rng.uniform(-0.05, 0.05);
    let w = &mut patient.weights;
    w.credential += shift;
    w.mean_rating += shift;
    w.past_rating -= 2.0 * shift;
    patient.resilience = (patient.resilience + rng.uniform(-0.05, 0.05)).clamp(0.1, 0.4);
    patient.weights = renormalize(patient.weights);
    if model.is_css() {
        if rng.unit() < 0.5 {
            jitter_ties(&mut patient.social_ties_doctors, ties, rng);
        } else {
            jitter_ties(&mut patient.social_ties_patients, ties, rng);
        }
    }
}

fn average_shared<K: AgentId>(loser: &mut PeerMap<K>, winner: &PeerMap<K>) {
    let shared: Vec<(K, f64)> = loser
        .keys()
        .filter_map(|k| winner.get(k).map(|w| (k, w)))
        .collect();
    for (key, theirs) in shared {
        let mine = loser.get_mut(key).expect("key present");
        *mine = (*mine + theirs) / 2.0;
    }
}

/// With probability 0.5 moves the loser's traits to the parents' mean.
pub fn crossover_doctor(
    loser: &mut DoctorState,
    winner: &DoctorState,
    model: ModelVariant,
    rng: &mut RngStream,
) {
    if !rng.chance(INNER_CROSSOVER_CHANCE) {
        return;
    }
    loser.research_ability = (loser.research_ability + winner.research_ability) / 2.0;
    loser.empathy = (loser.empathy + winner.empathy) / 2.0;
    if model.is_css() {
        loser.weight_wmrat = (loser.weight_wmrat + winner.weight_wmrat) / 2.0;
        loser.weight_mwres = (loser.weight_mwres + winner.weight_mwres) / 2.0;
        average_shared(&mut loser.social_ties_doctors, &winner.social_ties_doctors);
        average_shared(
            &mut loser.social_ties_patients,
            &winner.social_ties_patients,
        );
    }
}

pub fn crossover_patient(
    loser: &mut PatientState,
    winner: &PatientState,
    model: ModelVariant,
    rng: &mut RngStream,
) {
    if !rng.chance(INNER_CROSSOVER_CHANCE) {
        return;
    }
    loser.resilience = (loser.resilience + winner.resilience) / 2.0;
    let (a, b) = (loser.weights, winner.weights);
    loser.weights = JudgmentWeights {
        credential: (a.credential + b.credential) / 2.0,
        mean_rating: (a.mean_rating + b.mean_rating) / 2.0,
        past_rating: (a.past_rating + b.past_rating) / 2.0,
    }
    .normalized();
    if model.is_css() {
        average_shared(&mut loser.social_ties_doctors, &winner.social_ties_doctors);
        average_shared(
            &mut loser.social_ties_patients,
            &winner.social_ties_patients,
        );
    }
}

/// `(&mut slice[target], &slice[source])` for distinct positions.
fn split_pair<T>(slice: &mut [T], target: usize, source: usize) -> (&mut T, &T) {
    assert_ne!(target, source);
    if target < source {
        let (head, tail) = slice.split_at_mut(source);
        (&mut head[target], &tail[0])
    } else {
        let (head, tail) = slice.split_at_mut(target);
        (&mut tail[0], &head[source])
    }
}

/// One generation step of the microbial GA over `population`.
///
/// The top `num_elites` individuals are snapshotted first. Each of the
/// `tournaments_per_round` tournaments then draws a winner and loser; with
/// `crossover_chance` the loser is recombined toward the winner and with
/// `mutation_chance` the loser is mutated. Finally the elite snapshots are
/// written back into their slots.
pub fn evolve_population<T: Clone>(
    population: &mut [T],
    params: &GaParams,
    fitness: impl Fn(&T) -> f64,
    mut crossover: impl FnMut(&mut T, &T, &mut RngStream),
    mut mutate: impl FnMut(&mut T, &mut RngStream),
    rng: &mut RngStream,
) {
    let scores: Vec<f64> = population.iter().map(&fitness).collect();
    let mut ranked: Vec<usize> = (0..population.len()).collect();
    rank(&mut ranked, &scores);
    let elites: Vec<(usize, T)> = ranked
        .iter()
        .take(params.num_elites)
        .map(|&i| (i, population[i].clone()))
        .collect();

    for _ in 0..params.tournaments_per_round {
        let (winner, loser) = tournament_select(population, params.tournament_size, &fitness, rng);
        if winner == loser {
            continue;
        }
        if rng.chance(params.crossover_chance) {
            let (target, source) = split_pair(population, loser, winner);
            crossover(target, source, rng);
        }
        if rng.chance(params.mutation_chance) {
            mutate(&mut population[loser], rng);
        }
    }

    for (slot, elite) in elites {
        population[slot] = elite;
    }
}
